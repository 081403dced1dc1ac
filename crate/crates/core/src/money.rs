//! Integer-cent money and report-boundary rounding.
//!
//! All cost arithmetic runs on whole cents. Floating point only appears when
//! a ratio (SPI, CPI, a localization factor) scales an amount, and the result
//! is rounded back to cents immediately.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An amount of money in integer cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        Money(dollars * 100)
    }

    /// Whole thousands of dollars, the unit of the monthly EV tables.
    pub const fn from_thousands(thousands: i64) -> Self {
        Money(thousands * 100_000)
    }

    /// Rounds a dollar amount to the nearest cent (half away from zero).
    pub fn from_dollars_f64(dollars: f64) -> Self {
        Money(round_half_away(dollars * 100.0) as i64)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn dollars(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn thousands(self) -> f64 {
        self.0 as f64 / 100_000.0
    }

    /// Multiplies by a dimensionless factor and rounds back to cents.
    pub fn scale(self, factor: f64) -> Self {
        Money(round_half_away(self.0 as f64 * factor) as i64)
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Thousands of dollars rounded half-up to `dp` decimals, as text.
    pub fn format_thousands(self, dp: u32) -> String {
        format_scaled(self.0, 100_000, dp)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{}{}.{:02}", sign, abs / 100, abs % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid money amount {0:?}: expected a decimal with at most two fractional digits")]
pub struct ParseMoneyError(pub String);

impl FromStr for Money {
    type Err = ParseMoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseMoneyError(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if frac.len() > 2 || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let whole: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| err())?
        };
        let mut cents_part: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| err())?
        };
        if frac.len() == 1 {
            cents_part *= 10;
        }
        let cents = whole
            .checked_mul(100)
            .and_then(|c| c.checked_add(cents_part))
            .ok_or_else(err)?;
        Ok(Money(if negative { -cents } else { cents }))
    }
}

// Serialized as a decimal string so round-trips are bit-exact.
impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rounds to the nearest integer, halves away from zero.
pub fn round_half_away(x: f64) -> f64 {
    libm::round(x)
}

/// Rounds `x` to `dp` decimals, halves away from zero.
///
/// Values are nudged by a few ulps before rounding so that decimal halves that
/// are not exactly representable (0.285 and friends) still round up.
pub fn round_dp(x: f64, dp: u32) -> f64 {
    let scale = libm::pow(10.0, dp as f64);
    let scaled = x * scale;
    let nudged = scaled + scaled.signum() * scaled.abs() * 4.0 * f64::EPSILON;
    round_half_away(nudged) / scale
}

/// `num / den` rounded half away from zero at `dp` decimals, returned as a
/// scaled integer (`ratio_scaled(9, 8, 2) == 113`). Exact for integer inputs.
pub fn ratio_scaled(num: i64, den: i64, dp: u32) -> Option<i64> {
    if den == 0 {
        return None;
    }
    let scale = 10i128.pow(dp);
    let n = num as i128 * scale;
    let d = den as i128;
    let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
    let q = n.abs() * 2 + d;
    let rounded = q / (2 * d);
    Some(if n < 0 { -(rounded as i64) } else { rounded as i64 })
}

/// Formats a scaled integer (`value / unit`) at `dp` decimals, half away from zero.
pub fn format_scaled(value: i64, unit: i64, dp: u32) -> String {
    let scaled = ratio_scaled(value, unit, dp).unwrap_or(0);
    format_fixed(scaled, dp)
}

/// Formats an integer holding `dp` implied decimals.
pub fn format_fixed(scaled: i64, dp: u32) -> String {
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    if dp == 0 {
        return format!("{sign}{abs}");
    }
    let p = 10u64.pow(dp);
    format!("{sign}{}.{:0width$}", abs / p, abs % p, width = dp as usize)
}

/// Formats a float at `dp` decimals with half-away rounding.
pub fn format_dp(x: f64, dp: u32) -> String {
    let r = round_dp(x, dp);
    let scaled = round_half_away(r * libm::pow(10.0, dp as f64)) as i64;
    format_fixed(scaled, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("1234.56".parse::<Money>().unwrap(), Money::from_cents(123_456));
        assert_eq!("-0.5".parse::<Money>().unwrap(), Money::from_cents(-50));
        assert_eq!("100".parse::<Money>().unwrap(), Money::from_dollars(100));
        assert!("1.234".parse::<Money>().is_err());
        assert!("abc".parse::<Money>().is_err());
        assert!("".parse::<Money>().is_err());
        assert_eq!(Money::from_cents(-5).to_string(), "-0.05");
        assert_eq!(Money::from_thousands(1_800).to_string(), "1800000.00");
    }

    #[test]
    fn ratio_rounding_is_half_up() {
        assert_eq!(ratio_scaled(9, 8, 2), Some(113));
        assert_eq!(ratio_scaled(28, 32, 2), Some(88));
        assert_eq!(ratio_scaled(2, 3, 2), Some(67));
        assert_eq!(ratio_scaled(-165, 8200, 4), Some(-201));
        assert_eq!(ratio_scaled(1, 0, 2), None);
    }

    #[test]
    fn round_dp_handles_inexact_halves() {
        assert_eq!(round_dp(0.285, 2), 0.29);
        assert_eq!(round_dp(-2.0122, 2), -2.01);
        assert_eq!(round_dp(1.875, 2), 1.88);
        assert_eq!(format_dp(-0.5555, 2), "-0.56");
        assert_eq!(format_dp(30.0, 1), "30.0");
    }

    #[test]
    fn thousands_formatting() {
        assert_eq!(Money::from_dollars(6_500).format_thousands(1), "6.5");
        assert_eq!(Money::from_cents(-140_000).format_thousands(1), "-1.4");
        assert_eq!(Money::from_dollars_f64(111_578.947).format_thousands(2), "111.58");
    }
}
