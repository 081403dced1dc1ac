//! Cost items, regional localization and ledger deltas.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csi::is_known_division;
use crate::money::Money;

/// Items below this mapping confidence are flagged for estimator review.
pub const DEFAULT_REVIEW_THRESHOLD: f64 = 0.70;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("{0}: duplicate cost item id")]
    DuplicateItem(String),
    #[error("{item_id}: unknown division code {code:?}")]
    UnknownDivision { item_id: String, code: String },
    #[error("{0}: mapping confidence outside [0, 1]")]
    InvalidConfidence(String),
    #[error("{0}: cost components must be non-negative")]
    NegativeComponent(String),
    #[error("trade {0:?}: local and national wages must be given together")]
    MissingWagePair(String),
    #[error("city cost factor must be positive, got {0}")]
    InvalidFactor(f64),
    #[error("ledgers differ in item ids: {0:?}")]
    ItemUniverseMismatch(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostComponent {
    Material,
    Labor,
    Equipment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostItem {
    pub item_id: String,
    pub csi_division: String,
    pub wbs_id: String,
    pub material: Money,
    pub labor: Money,
    pub equipment: Money,
    #[serde(default)]
    pub crew_hours: Option<f64>,
    /// Trade key into the wage tables.
    #[serde(default)]
    pub trade: Option<String>,
    #[serde(default = "full_confidence")]
    pub mapping_confidence: f64,
    /// Schedule activity this item is performed under, when known.
    #[serde(default)]
    pub activity_id: Option<String>,
}

fn full_confidence() -> f64 {
    1.0
}

impl CostItem {
    pub fn new(item_id: impl Into<String>, division: impl Into<String>, wbs_id: impl Into<String>) -> Self {
        CostItem {
            item_id: item_id.into(),
            csi_division: division.into(),
            wbs_id: wbs_id.into(),
            material: Money::ZERO,
            labor: Money::ZERO,
            equipment: Money::ZERO,
            crew_hours: None,
            trade: None,
            mapping_confidence: 1.0,
            activity_id: None,
        }
    }

    pub fn with_components(mut self, material: Money, labor: Money, equipment: Money) -> Self {
        self.material = material;
        self.labor = labor;
        self.equipment = equipment;
        self
    }

    pub fn with_activity(mut self, activity_id: impl Into<String>) -> Self {
        self.activity_id = Some(activity_id.into());
        self
    }

    pub fn base_cost(&self) -> Money {
        self.material + self.labor + self.equipment
    }

    pub fn component(&self, c: CostComponent) -> Money {
        match c {
            CostComponent::Material => self.material,
            CostComponent::Labor => self.labor,
            CostComponent::Equipment => self.equipment,
        }
    }

    fn component_mut(&mut self, c: CostComponent) -> &mut Money {
        match c {
            CostComponent::Material => &mut self.material,
            CostComponent::Labor => &mut self.labor,
            CostComponent::Equipment => &mut self.equipment,
        }
    }

    /// Scales the chosen components (all three when `components` is empty).
    pub fn scale_components(&mut self, factor: f64, components: &[CostComponent]) {
        let all = [CostComponent::Material, CostComponent::Labor, CostComponent::Equipment];
        let chosen: &[CostComponent] = if components.is_empty() { &all } else { components };
        for &c in chosen {
            let m = self.component_mut(c);
            *m = m.scale(factor);
        }
        if components.is_empty() || components.contains(&CostComponent::Labor) {
            if let Some(h) = self.crew_hours.as_mut() {
                *h *= factor;
            }
        }
    }

    pub fn needs_review(&self, threshold: f64) -> bool {
        self.mapping_confidence < threshold
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if !is_known_division(&self.csi_division) {
            return Err(CostError::UnknownDivision { item_id: self.item_id.clone(), code: self.csi_division.clone() });
        }
        if !(0.0..=1.0).contains(&self.mapping_confidence) {
            return Err(CostError::InvalidConfidence(self.item_id.clone()));
        }
        if self.material < Money::ZERO || self.labor < Money::ZERO || self.equipment < Money::ZERO {
            return Err(CostError::NegativeComponent(self.item_id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationFactors {
    /// Printed city cost index divided by 100.
    pub cci_factor: f64,
    /// Per-division overrides of `cci_factor`.
    #[serde(default)]
    pub division_factors: BTreeMap<String, f64>,
    #[serde(default)]
    pub local_wage: BTreeMap<String, Money>,
    #[serde(default)]
    pub national_wage: BTreeMap<String, Money>,
}

impl LocalizationFactors {
    pub fn uniform(cci_factor: f64) -> Self {
        LocalizationFactors {
            cci_factor,
            division_factors: BTreeMap::new(),
            local_wage: BTreeMap::new(),
            national_wage: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        for &f in core::iter::once(&self.cci_factor).chain(self.division_factors.values()) {
            if !(f > 0.0 && f.is_finite()) {
                return Err(CostError::InvalidFactor(f));
            }
        }
        let local: BTreeSet<&String> = self.local_wage.keys().collect();
        let national: BTreeSet<&String> = self.national_wage.keys().collect();
        if let Some(t) = local.symmetric_difference(&national).next() {
            return Err(CostError::MissingWagePair((*t).clone()));
        }
        Ok(())
    }

    pub fn factor_for(&self, division: &str) -> f64 {
        self.division_factors.get(division).copied().unwrap_or(self.cci_factor)
    }
}

/// Localized components of one item.
pub fn localize_item(item: &CostItem, f: &LocalizationFactors) -> Result<CostItem, CostError> {
    f.validate()?;
    let cci = f.factor_for(&item.csi_division);
    let mut out = item.clone();
    out.material = item.material.scale(cci);
    out.equipment = item.equipment.scale(cci);
    let wage = item.trade.as_ref().and_then(|t| f.local_wage.get(t));
    out.labor = match (item.crew_hours, wage) {
        (Some(h), Some(&w)) => w.scale(h),
        _ => item.labor.scale(cci),
    };
    Ok(out)
}

pub fn localize(item: &CostItem, f: &LocalizationFactors) -> Result<Money, CostError> {
    localize_item(item, f).map(|i| i.base_cost())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Division,
    Wbs,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    items: Vec<CostItem>,
}

impl CostLedger {
    pub fn new(mut items: Vec<CostItem>) -> Result<Self, CostError> {
        items.sort_by(|a, b| a.item_id.cmp(&b.item_id));
        for w in items.windows(2) {
            if w[0].item_id == w[1].item_id {
                return Err(CostError::DuplicateItem(w[0].item_id.clone()));
            }
        }
        for i in &items {
            i.validate()?;
        }
        Ok(CostLedger { items })
    }

    pub fn items(&self) -> &[CostItem] {
        &self.items
    }

    pub fn items_mut(&mut self) -> impl Iterator<Item = &mut CostItem> {
        self.items.iter_mut()
    }

    pub fn get(&self, item_id: &str) -> Option<&CostItem> {
        self.items
            .binary_search_by(|i| i.item_id.as_str().cmp(item_id))
            .ok()
            .map(|k| &self.items[k])
    }

    pub fn total(&self) -> Money {
        self.items.iter().map(CostItem::base_cost).sum()
    }

    pub fn localized(&self, f: &LocalizationFactors) -> Result<CostLedger, CostError> {
        let items = self.items.iter().map(|i| localize_item(i, f)).collect::<Result<Vec<_>, _>>()?;
        Ok(CostLedger { items })
    }

    pub fn needs_review(&self, threshold: f64) -> impl Iterator<Item = &CostItem> {
        self.items.iter().filter(move |i| i.needs_review(threshold))
    }
}

pub fn rollup_costs(ledger: &CostLedger, group_by: GroupBy) -> BTreeMap<String, Money> {
    let mut out: BTreeMap<String, Money> = BTreeMap::new();
    for i in ledger.items() {
        let key = match group_by {
            GroupBy::Division => &i.csi_division,
            GroupBy::Wbs => &i.wbs_id,
        };
        *out.entry(key.clone()).or_default() += i.base_cost();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerDelta {
    pub total: Money,
    /// Only divisions with a non-zero change.
    pub by_division: BTreeMap<String, Money>,
}

pub fn ledger_delta(base: &CostLedger, modified: &CostLedger) -> Result<LedgerDelta, CostError> {
    let ids = |l: &CostLedger| l.items.iter().map(|i| i.item_id.clone()).collect::<BTreeSet<_>>();
    let (a, b) = (ids(base), ids(modified));
    if a != b {
        return Err(CostError::ItemUniverseMismatch(a.symmetric_difference(&b).cloned().collect()));
    }
    let mut by_division: BTreeMap<String, Money> = BTreeMap::new();
    let mut total = Money::ZERO;
    // Both item lists are sorted by id and hold the same ids.
    for (x, y) in base.items.iter().zip(&modified.items) {
        let d = y.base_cost() - x.base_cost();
        if !d.is_zero() {
            *by_division.entry(y.csi_division.clone()).or_default() += d;
            total += d;
        }
    }
    by_division.retain(|_, v| !v.is_zero());
    Ok(LedgerDelta { total, by_division })
}
