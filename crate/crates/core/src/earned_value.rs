//! Earned-value roll-ups, indices and cost forecasts.
//!
//! Amounts are integer cents throughout. Ratios are kept at full precision and
//! only rounded by the `*_reported` helpers.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::{ratio_scaled, round_dp, Money};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvError {
    #[error("{item}: period {period} is outside the {periods}-period series")]
    PeriodMismatch { item: String, period: u32, periods: usize },
    #[error("{item}: planned curve must be non-decreasing in [0, 1] and end at 1")]
    InvalidPlannedCurve { item: String },
    #[error("{item}: measured percent complete must be non-decreasing in [0, 1]")]
    InvalidMeasured { item: String },
    #[error("{item}: actual cost must be cumulative and non-negative")]
    InvalidActuals { item: String },
    #[error("{0}: budget at completion is negative")]
    NegativeBudget(String),
    #[error("cost performance index is zero or undefined")]
    ZeroCpi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetItem {
    /// Activity or WBS id.
    pub id: String,
    pub bac: Money,
    /// Cumulative planned fraction by period; carried forward between entries.
    pub planned_curve: BTreeMap<u32, f64>,
    /// Cumulative actual cost by period; carried forward between entries.
    #[serde(default)]
    pub actuals: BTreeMap<u32, Money>,
}

impl BudgetItem {
    pub fn validate(&self, periods: usize) -> Result<(), EvError> {
        if self.bac < Money::ZERO {
            return Err(EvError::NegativeBudget(self.id.clone()));
        }
        check_periods(&self.id, self.planned_curve.keys().copied(), periods)?;
        check_periods(&self.id, self.actuals.keys().copied(), periods)?;
        let bad_curve = || EvError::InvalidPlannedCurve { item: self.id.clone() };
        if !monotone_fractions(self.planned_curve.values().copied()) {
            return Err(bad_curve());
        }
        match self.planned_curve.values().last() {
            Some(&last) if (last - 1.0).abs() <= 1e-9 => {}
            _ => return Err(bad_curve()),
        }
        let mut prev = Money::ZERO;
        for &a in self.actuals.values() {
            if a < prev {
                return Err(EvError::InvalidActuals { item: self.id.clone() });
            }
            prev = a;
        }
        Ok(())
    }
}

fn check_periods(item: &str, keys: impl Iterator<Item = u32>, periods: usize) -> Result<(), EvError> {
    for period in keys {
        if period as usize >= periods {
            return Err(EvError::PeriodMismatch { item: String::from(item), period, periods });
        }
    }
    Ok(())
}

fn monotone_fractions(values: impl Iterator<Item = f64>) -> bool {
    let mut prev = 0.0;
    for v in values {
        if !(v >= prev && v <= 1.0) {
            return false;
        }
        prev = v;
    }
    true
}

/// Value at `t` of a step series: the latest entry at or before `t`.
fn carried<T: Copy>(series: &BTreeMap<u32, T>, t: u32, zero: T) -> T {
    series.range(..=t).next_back().map(|(_, &v)| v).unwrap_or(zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indices {
    pub sv: Money,
    pub cv: Money,
    /// `None` when PV is zero.
    pub spi: Option<f64>,
    /// `None` when AC is zero.
    pub cpi: Option<f64>,
}

fn ratio(num: Money, den: Money) -> Option<f64> {
    (den.cents() > 0).then(|| num.cents() as f64 / den.cents() as f64)
}

pub fn indices(pv: Money, ev: Money, ac: Money) -> Indices {
    Indices { sv: ev - pv, cv: ev - ac, spi: ratio(ev, pv), cpi: ratio(ev, ac) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub eac_cpi: Money,
    pub eac_work_remaining: Money,
    pub vac: Money,
    pub cpi: f64,
}

fn mul_div_round(a: i64, b: i64, d: i64) -> i64 {
    let n = a as i128 * b as i128;
    let d = d as i128;
    let q = (n.abs() * 2 + d) / (2 * d);
    (if n < 0 { -q } else { q }) as i64
}

/// EAC by both textbook forms and the variance at completion.
pub fn forecast(bac: Money, ev: Money, ac: Money) -> Result<Forecast, EvError> {
    if ev.cents() <= 0 || ac.cents() <= 0 {
        return Err(EvError::ZeroCpi);
    }
    // bac / (ev/ac) and ac + (bac - ev) / (ev/ac), evaluated in cents.
    let eac_cpi = Money::from_cents(mul_div_round(bac.cents(), ac.cents(), ev.cents()));
    let remaining = mul_div_round((bac - ev).cents(), ac.cents(), ev.cents());
    let eac_work_remaining = ac + Money::from_cents(remaining);
    Ok(Forecast {
        eac_cpi,
        eac_work_remaining,
        vac: bac - eac_cpi,
        cpi: ev.cents() as f64 / ac.cents() as f64,
    })
}

impl Forecast {
    /// EAC obtained by first rounding CPI to `dp` decimals, for side-by-side
    /// display with hand calculations that do the same.
    pub fn eac_with_rounded_cpi(&self, bac: Money, dp: u32) -> Option<Money> {
        let cpi = round_dp(self.cpi, dp);
        (cpi > 0.0).then(|| bac.scale(1.0 / cpi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvPoint {
    pub period: u32,
    pub label: String,
    pub pv: Money,
    pub ev: Money,
    pub ac: Money,
    pub sv: Money,
    pub cv: Money,
    pub spi: Option<f64>,
    pub cpi: Option<f64>,
    pub eac: Option<Money>,
    pub vac: Option<Money>,
}

impl EvPoint {
    pub fn new(period: u32, label: impl Into<String>, pv: Money, ev: Money, ac: Money, bac: Money) -> Self {
        let ix = indices(pv, ev, ac);
        let fc = forecast(bac, ev, ac).ok();
        EvPoint {
            period,
            label: label.into(),
            pv,
            ev,
            ac,
            sv: ix.sv,
            cv: ix.cv,
            spi: ix.spi,
            cpi: ix.cpi,
            eac: fc.map(|f| f.eac_cpi),
            vac: fc.map(|f| f.vac),
        }
    }

    /// SPI at report precision as a scaled integer (`113` for 1.13).
    pub fn spi_reported(&self, dp: u32) -> Option<i64> {
        ratio_scaled(self.ev.cents(), self.pv.cents(), dp).filter(|_| self.pv.cents() > 0)
    }

    pub fn cpi_reported(&self, dp: u32) -> Option<i64> {
        ratio_scaled(self.ev.cents(), self.ac.cents(), dp).filter(|_| self.ac.cents() > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvSeries {
    pub bac: Money,
    pub points: Vec<EvPoint>,
}

impl EvSeries {
    /// Builds a series directly from cumulative totals.
    pub fn from_totals<'a>(bac: Money, rows: impl IntoIterator<Item = (&'a str, Money, Money, Money)>) -> Self {
        let points = rows
            .into_iter()
            .enumerate()
            .map(|(t, (label, pv, ev, ac))| EvPoint::new(t as u32, label, pv, ev, ac, bac))
            .collect();
        EvSeries { bac, points }
    }

    pub fn last(&self) -> Option<&EvPoint> {
        self.points.last()
    }

    pub fn at(&self, label: &str) -> Option<&EvPoint> {
        self.points.iter().find(|p| p.label == label)
    }
}

/// Measured percent complete per item and period.
pub type MeasuredProgress = BTreeMap<String, BTreeMap<u32, f64>>;

/// Cumulative PV, EV and AC per period over all items.
///
/// Period `t` is the index into `labels`. Every per-item series is a step
/// function: a period without an entry inherits the previous one.
pub fn rollup(items: &[BudgetItem], measured: &MeasuredProgress, labels: &[String]) -> Result<EvSeries, EvError> {
    let periods = labels.len();
    for item in items {
        item.validate(periods)?;
        if let Some(m) = measured.get(&item.id) {
            check_periods(&item.id, m.keys().copied(), periods)?;
            if !monotone_fractions(m.values().copied()) {
                return Err(EvError::InvalidMeasured { item: item.id.clone() });
            }
        }
    }
    let empty = BTreeMap::new();
    let bac: Money = items.iter().map(|i| i.bac).sum();
    let points = labels
        .iter()
        .enumerate()
        .map(|(t, label)| {
            let t = t as u32;
            let mut pv = Money::ZERO;
            let mut ev = Money::ZERO;
            let mut ac = Money::ZERO;
            for item in items {
                pv += item.bac.scale(carried(&item.planned_curve, t, 0.0));
                let m = measured.get(&item.id).unwrap_or(&empty);
                ev += item.bac.scale(carried(m, t, 0.0));
                ac += carried(&item.actuals, t, Money::ZERO);
            }
            EvPoint::new(t, label.clone(), pv, ev, ac, bac)
        })
        .collect();
    Ok(EvSeries { bac, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SCurvePoint {
    pub label: String,
    pub bcws: Money,
    pub bcwp: Money,
    pub acwp: Money,
}

pub fn scurve_series(series: &EvSeries) -> Vec<SCurvePoint> {
    series
        .points
        .iter()
        .map(|p| SCurvePoint { label: p.label.clone(), bcws: p.pv, bcwp: p.ev, acwp: p.ac })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn k(x: i64) -> Money {
        Money::from_thousands(x)
    }

    #[test]
    fn year_end_indices() {
        let ix = indices(k(100), k(95), k(106));
        assert_eq!(ix.sv, k(-5));
        assert_eq!(ix.cv, k(-11));
        assert_eq!(round_dp(ix.spi.unwrap(), 2), 0.95);
        assert_eq!(round_dp(ix.cpi.unwrap(), 2), 0.90);
        assert!((ix.cpi.unwrap() - 0.896_226).abs() < 1e-6);
    }

    #[test]
    fn june_indices() {
        let p = EvPoint::new(5, "2025-06", k(52), k(58), k(60), k(100));
        assert_eq!((p.sv, p.cv), (k(6), k(-2)));
        assert_eq!(p.spi_reported(2), Some(112));
        assert_eq!(p.cpi_reported(2), Some(97));
    }

    #[test]
    fn identity_indices() {
        let ix = indices(k(7), k(7), k(7));
        assert_eq!((ix.sv, ix.cv, ix.spi, ix.cpi), (Money::ZERO, Money::ZERO, Some(1.0), Some(1.0)));
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let ix = indices(Money::ZERO, Money::ZERO, Money::ZERO);
        assert_eq!((ix.spi, ix.cpi), (None, None));
        let p = EvPoint::new(0, "0", Money::ZERO, Money::ZERO, Money::ZERO, k(1));
        assert_eq!((p.spi_reported(2), p.eac), (None, None));
    }

    #[test]
    fn year_end_forecast() {
        let f = forecast(k(100), k(95), k(106)).unwrap();
        // 100 * 106 / 95 = 111.578947...
        assert_eq!(f.eac_cpi, Money::from_cents(11_157_895));
        assert_eq!(f.eac_work_remaining, f.eac_cpi);
        assert_eq!(f.vac, Money::from_cents(-1_157_895));
        assert_eq!(f.eac_cpi.format_thousands(2), "111.58");
        assert_eq!(f.eac_with_rounded_cpi(k(100), 2).unwrap().format_thousands(1), "111.1");
    }

    #[test]
    fn on_budget_forecast() {
        let f = forecast(k(100), k(40), k(40)).unwrap();
        assert_eq!((f.eac_cpi, f.vac), (k(100), Money::ZERO));
        assert!(matches!(forecast(k(100), Money::ZERO, k(1)), Err(EvError::ZeroCpi)));
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("P{i}")).collect()
    }

    fn item(id: &str, bac: i64, curve: &[(u32, f64)], actuals: &[(u32, i64)]) -> BudgetItem {
        BudgetItem {
            id: id.into(),
            bac: k(bac),
            planned_curve: curve.iter().copied().collect(),
            actuals: actuals.iter().map(|&(t, a)| (t, k(a))).collect(),
        }
    }

    #[test]
    fn on_plan_item_earns_its_planned_value() {
        let curve = [(0, 0.25), (1, 0.5), (2, 1.0)];
        let it = item("A", 40, &curve, &[(0, 10), (2, 40)]);
        let mut measured = MeasuredProgress::new();
        measured.insert("A".into(), curve.iter().copied().collect());
        let s = rollup(&[it], &measured, &labels(3)).unwrap();
        for p in &s.points {
            assert_eq!(p.ev, p.pv);
            assert_eq!(p.sv, Money::ZERO);
        }
        // Carried forward: period 1 has no actuals entry.
        assert_eq!(s.points[1].ac, k(10));
        assert_eq!(s.last().unwrap().pv, k(40));
    }

    #[test]
    fn two_items_sum_by_hand() {
        let a = item("A", 30, &[(0, 0.5), (1, 1.0)], &[(0, 12), (1, 31)]);
        let b = item("B", 50, &[(0, 0.2), (1, 1.0)], &[(1, 20)]);
        let mut m = MeasuredProgress::new();
        m.insert("A".into(), [(0, 0.4), (1, 0.9)].into_iter().collect());
        m.insert("B".into(), [(1, 0.5)].into_iter().collect());
        let s = rollup(&[a, b], &m, &labels(2)).unwrap();
        let p1 = &s.points[1];
        assert_eq!(p1.pv, k(80));
        assert_eq!(p1.ev, Money::from_dollars(27_000 + 25_000));
        assert_eq!(p1.ac, k(51));
        assert_eq!(s.points[0].ev, k(12));
        assert_eq!(s.points[0].pv, k(25));
    }

    #[test]
    fn rollup_errors() {
        let bad_end = item("A", 10, &[(0, 0.5)], &[]);
        assert!(matches!(rollup(&[bad_end], &MeasuredProgress::new(), &labels(2)), Err(EvError::InvalidPlannedCurve { .. })));
        let late = item("A", 10, &[(5, 1.0)], &[]);
        assert!(matches!(rollup(&[late], &MeasuredProgress::new(), &labels(2)), Err(EvError::PeriodMismatch { .. })));
        let mut m = MeasuredProgress::new();
        m.insert("A".into(), [(0, 0.6), (1, 0.5)].into_iter().collect());
        let ok = item("A", 10, &[(1, 1.0)], &[]);
        assert!(matches!(rollup(&[ok], &m, &labels(2)), Err(EvError::InvalidMeasured { .. })));
    }

    #[test]
    fn scurve_empty_and_labels() {
        assert!(scurve_series(&EvSeries { bac: Money::ZERO, points: vec![] }).is_empty());
        let s = EvSeries::from_totals(k(100), [("2025-12", k(100), k(95), k(106))]);
        let c = scurve_series(&s);
        assert_eq!((c[0].bcws, c[0].bcwp, c[0].acwp), (k(100), k(95), k(106)));
    }

    proptest! {
        #[test]
        fn eac_forms_agree(bac in 1i64..10_000_000_000, ev in 1i64..10_000_000_000, ac in 1i64..10_000_000_000) {
            let f = forecast(Money::from_cents(bac), Money::from_cents(ev), Money::from_cents(ac)).unwrap();
            prop_assert!((f.eac_cpi.cents() - f.eac_work_remaining.cents()).abs() <= 1);
        }

        #[test]
        fn index_signs_follow_variances(pv in 1i64..1_000_000, ev in 1i64..1_000_000, ac in 1i64..1_000_000) {
            let ix = indices(Money::from_cents(pv), Money::from_cents(ev), Money::from_cents(ac));
            prop_assert_eq!(ix.spi.unwrap() > 1.0, ev > pv);
            prop_assert_eq!(ix.cpi.unwrap() > 1.0, ev > ac);
        }

        #[test]
        fn earned_never_exceeds_budget(fracs in prop::collection::vec(0.0f64..=1.0, 1..6), bacs in prop::collection::vec(0i64..1_000_000, 1..6)) {
            let n = fracs.len().min(bacs.len());
            let items: Vec<BudgetItem> = (0..n)
                .map(|i| BudgetItem {
                    id: alloc::format!("I{i}"),
                    bac: Money::from_cents(bacs[i]),
                    planned_curve: [(0u32, 1.0)].into_iter().collect(),
                    actuals: BTreeMap::new(),
                })
                .collect();
            let measured: MeasuredProgress = (0..n).map(|i| (alloc::format!("I{i}"), [(0u32, fracs[i])].into_iter().collect())).collect();
            let s = rollup(&items, &measured, &labels(1)).unwrap();
            prop_assert!(s.points[0].ev <= s.bac);
        }
    }
}
