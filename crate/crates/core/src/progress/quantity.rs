//! Planned-versus-measured quantity reconciliation per WBS element.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ProgressError;
use crate::money::round_dp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QuantityUnit {
    #[serde(rename = "m2")]
    SquareMeters,
    #[serde(rename = "m3")]
    CubicMeters,
    #[serde(rename = "m")]
    Meters,
    #[serde(rename = "ea")]
    Each,
}

impl QuantityUnit {
    pub fn symbol(self) -> &'static str {
        match self {
            QuantityUnit::SquareMeters => "m2",
            QuantityUnit::CubicMeters => "m3",
            QuantityUnit::Meters => "m",
            QuantityUnit::Each => "ea",
        }
    }
}

impl fmt::Display for QuantityUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for QuantityUnit {
    type Err = ProgressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "m2" | "m²" | "m^2" | "sqm" => Ok(QuantityUnit::SquareMeters),
            "m3" | "m³" | "m^3" | "cum" => Ok(QuantityUnit::CubicMeters),
            "m" | "lm" => Ok(QuantityUnit::Meters),
            "ea" | "each" | "EA" => Ok(QuantityUnit::Each),
            other => Err(ProgressError::UnknownUnit(String::from(other))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: QuantityUnit,
}

impl Quantity {
    pub fn new(value: f64, unit: QuantityUnit) -> Self {
        Quantity { value, unit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WbsQuantity {
    pub wbs_id: String,
    pub element_class: String,
    pub planned: Quantity,
    pub measured: Quantity,
    /// Provenance carried verbatim into audit output.
    #[serde(default)]
    pub evidence_link: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconciliation {
    /// measured − planned, in the planned unit.
    pub delta_qty: f64,
    /// 100 · delta / planned, full precision.
    pub delta_pct: f64,
}

impl Reconciliation {
    /// Percent difference at report precision (2 decimals, half away from zero).
    pub fn delta_pct_reported(&self) -> f64 {
        round_dp(self.delta_pct, 2)
    }
}

fn check(q: &WbsQuantity) -> Result<(), ProgressError> {
    if q.planned.unit != q.measured.unit {
        return Err(ProgressError::UnitMismatch {
            wbs_id: q.wbs_id.clone(),
            planned: q.planned.unit,
            measured: q.measured.unit,
        });
    }
    if !(q.planned.value > 0.0) {
        return Err(ProgressError::ZeroPlanned(q.wbs_id.clone()));
    }
    if !(q.measured.value.is_finite() && q.measured.value >= 0.0) {
        return Err(ProgressError::InvalidQuantity(q.wbs_id.clone()));
    }
    Ok(())
}

pub fn reconcile(q: &WbsQuantity) -> Result<Reconciliation, ProgressError> {
    check(q)?;
    let delta_qty = q.measured.value - q.planned.value;
    Ok(Reconciliation {
        delta_qty,
        delta_pct: 100.0 * delta_qty / q.planned.value,
    })
}

/// Percent complete implied by measured quantity, capped at 1 so an
/// over-measured element never earns more than its budget.
pub fn quantity_percent_complete(q: &WbsQuantity) -> Result<f64, ProgressError> {
    check(q)?;
    Ok((q.measured.value / q.planned.value).clamp(0.0, 1.0))
}
