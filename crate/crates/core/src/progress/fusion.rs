//! Scan and vision percent-complete fusion.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ProgressError;

/// Relative trust in the two status sources. Scan is quantity-bearing and
/// gets twice the weight of vision by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceWeights {
    pub scan: f64,
    pub cv: f64,
}

impl Default for SourceWeights {
    fn default() -> Self {
        SourceWeights { scan: 2.0, cv: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressObservation {
    pub activity_id: String,
    pub period: u32,
    #[serde(default)]
    pub scan_pc: Option<f64>,
    #[serde(default)]
    pub cv_pc: Option<f64>,
    #[serde(default)]
    pub weights: SourceWeights,
}

/// Convex combination of the sources that are present.
pub fn fuse_percent_complete(obs: &ProgressObservation) -> Result<f64, ProgressError> {
    let w = obs.weights;
    if !(w.scan >= 0.0 && w.cv >= 0.0) {
        return Err(ProgressError::NegativeWeight(obs.activity_id.clone()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (value, weight) in [(obs.scan_pc, w.scan), (obs.cv_pc, w.cv)] {
        if let Some(v) = value {
            if !(0.0..=1.0).contains(&v) {
                return Err(ProgressError::FractionOutOfRange {
                    activity_id: obs.activity_id.clone(),
                    value: v,
                });
            }
            num += weight * v;
            den += weight;
        }
    }
    if obs.scan_pc.is_none() && obs.cv_pc.is_none() {
        return Err(ProgressError::NoEvidence(obs.activity_id.clone()));
    }
    if den == 0.0 {
        return Err(ProgressError::ZeroWeight(obs.activity_id.clone()));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneClamp {
    pub activity_id: String,
    pub period: u32,
    pub fused: f64,
    pub held_at: f64,
}

/// Cumulative percent complete per activity; never moves backwards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProgressTracker {
    last: BTreeMap<String, f64>,
    warnings: Vec<MonotoneClamp>,
}

impl ProgressTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fuses one observation and holds it at the previous period's value when
    /// the fused figure would regress. Observations must arrive in period order.
    pub fn observe(&mut self, obs: &ProgressObservation) -> Result<f64, ProgressError> {
        let fused = fuse_percent_complete(obs)?;
        let prev = self.last.get(&obs.activity_id).copied().unwrap_or(0.0);
        let value = if fused < prev {
            self.warnings.push(MonotoneClamp {
                activity_id: obs.activity_id.clone(),
                period: obs.period,
                fused,
                held_at: prev,
            });
            prev
        } else {
            fused
        };
        self.last.insert(obs.activity_id.clone(), value);
        Ok(value)
    }

    pub fn current(&self, activity_id: &str) -> Option<f64> {
        self.last.get(activity_id).copied()
    }

    pub fn warnings(&self) -> &[MonotoneClamp] {
        &self.warnings
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(scan: Option<f64>, cv: Option<f64>, period: u32) -> ProgressObservation {
        ProgressObservation {
            activity_id: String::from("A090"),
            period,
            scan_pc: scan,
            cv_pc: cv,
            weights: SourceWeights::default(),
        }
    }

    #[test]
    fn weighted_mean_of_both_sources() {
        let v = fuse_percent_complete(&obs(Some(0.60), Some(0.70), 1)).unwrap();
        assert!((v - 1.9 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_source_passes_through() {
        assert_eq!(fuse_percent_complete(&obs(Some(0.5), None, 1)).unwrap(), 0.5);
        assert_eq!(fuse_percent_complete(&obs(None, Some(0.25), 1)).unwrap(), 0.25);
    }

    #[test]
    fn no_evidence_and_bad_fraction() {
        assert!(matches!(fuse_percent_complete(&obs(None, None, 1)), Err(ProgressError::NoEvidence(_))));
        assert!(matches!(
            fuse_percent_complete(&obs(Some(1.2), None, 1)),
            Err(ProgressError::FractionOutOfRange { .. })
        ));
    }

    #[test]
    fn regression_is_clamped_with_warning() {
        let mut t = ProgressTracker::new();
        assert_eq!(t.observe(&obs(Some(0.60), None, 1)).unwrap(), 0.60);
        assert_eq!(t.observe(&obs(Some(0.58), None, 2)).unwrap(), 0.60);
        assert_eq!(t.warnings().len(), 1);
        assert_eq!(t.warnings()[0].fused, 0.58);
        assert_eq!(t.observe(&obs(Some(0.65), None, 3)).unwrap(), 0.65);
    }

    proptest! {
        #[test]
        fn fused_lies_between_sources(s in 0.0f64..=1.0, c in 0.0f64..=1.0, ws in 0.01f64..10.0, wc in 0.01f64..10.0) {
            let mut o = obs(Some(s), Some(c), 1);
            o.weights = SourceWeights { scan: ws, cv: wc };
            let v = fuse_percent_complete(&o).unwrap();
            prop_assert!(v >= s.min(c) - 1e-12 && v <= s.max(c) + 1e-12);
        }

        #[test]
        fn fused_is_monotone_in_each_source(s in 0.0f64..=0.9, c in 0.0f64..=1.0, bump in 0.0f64..0.1) {
            let lo = fuse_percent_complete(&obs(Some(s), Some(c), 1)).unwrap();
            let hi = fuse_percent_complete(&obs(Some(s + bump), Some(c), 1)).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
