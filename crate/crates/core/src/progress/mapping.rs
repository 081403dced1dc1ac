//! Division-level evaluation of automated cost-code mappings.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::metrics::{f1_of, safe_ratio};
use super::ProgressError;
use crate::csi::is_known_division;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingRecord {
    pub item_id: String,
    /// Division the item was filed under in the source document.
    #[serde(default)]
    pub csi_division: String,
    pub predicted_division: String,
    /// Absent for items not yet reviewed.
    #[serde(default)]
    pub gold_division: Option<String>,
    pub confidence: f64,
    #[serde(default)]
    pub review_minutes: f64,
}

impl MappingRecord {
    pub fn validate(&self) -> Result<(), ProgressError> {
        let mut codes = alloc::vec![self.predicted_division.as_str()];
        if !self.csi_division.is_empty() {
            codes.push(&self.csi_division);
        }
        if let Some(g) = &self.gold_division {
            codes.push(g);
        }
        for code in codes {
            if !is_known_division(code) {
                return Err(ProgressError::UnknownDivision {
                    item_id: self.item_id.clone(),
                    code: String::from(code),
                });
            }
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(ProgressError::InvalidConfidence(self.item_id.clone()));
        }
        if !(self.review_minutes >= 0.0) {
            return Err(ProgressError::InvalidReviewTime(self.item_id.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisionMetrics {
    pub division: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_review_minutes: f64,
    #[serde(default)]
    pub zero_division: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSummary {
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_review_minutes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    pub divisions: Vec<DivisionMetrics>,
    pub weighted: WeightedSummary,
}

/// Support-weighted averages over per-division rows.
pub fn support_weighted(rows: &[DivisionMetrics]) -> Result<WeightedSummary, ProgressError> {
    let support: u64 = rows.iter().map(|r| r.support).sum();
    if support == 0 {
        return Err(ProgressError::NoGoldLabels);
    }
    let w = |f: fn(&DivisionMetrics) -> f64| {
        rows.iter().map(|r| f(r) * r.support as f64).sum::<f64>() / support as f64
    };
    Ok(WeightedSummary {
        support,
        precision: w(|r| r.precision),
        recall: w(|r| r.recall),
        f1: w(|r| r.f1),
        mean_review_minutes: w(|r| r.mean_review_minutes),
    })
}

#[derive(Default)]
struct Tally {
    tp: u64,
    predicted: u64,
    support: u64,
    minutes: f64,
}

/// One-vs-rest metrics per gold division. Records without a gold label are ignored.
pub fn mapping_evaluation(records: &[MappingRecord]) -> Result<MappingReport, ProgressError> {
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut gold_count = 0usize;
    for r in records {
        r.validate()?;
        let Some(gold) = r.gold_division.as_deref() else { continue };
        gold_count += 1;
        let g = tallies.entry(gold).or_default();
        g.support += 1;
        g.minutes += r.review_minutes;
        if gold == r.predicted_division {
            g.tp += 1;
        }
        tallies.entry(r.predicted_division.as_str()).or_default().predicted += 1;
    }
    if gold_count == 0 {
        return Err(ProgressError::NoGoldLabels);
    }
    let divisions: Vec<DivisionMetrics> = tallies
        .into_iter()
        .filter(|(_, t)| t.support > 0)
        .map(|(code, t)| {
            let mut flag = false;
            let precision = safe_ratio(t.tp as f64, t.predicted as f64, &mut flag);
            let recall = safe_ratio(t.tp as f64, t.support as f64, &mut flag);
            let f1 = f1_of(precision, recall, &mut flag);
            DivisionMetrics {
                division: String::from(code),
                support: t.support,
                precision,
                recall,
                f1,
                mean_review_minutes: t.minutes / t.support as f64,
                zero_division: flag,
            }
        })
        .collect();
    let weighted = support_weighted(&divisions)?;
    Ok(MappingReport { divisions, weighted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn row(code: &str, support: u64, p: f64, r: f64, f1: f64, min: f64) -> DivisionMetrics {
        DivisionMetrics {
            division: code.into(),
            support,
            precision: p,
            recall: r,
            f1,
            mean_review_minutes: min,
            zero_division: false,
        }
    }

    fn texas_rows() -> Vec<DivisionMetrics> {
        vec![
            row("03", 188, 0.92, 0.88, 0.90, 1.2),
            row("04", 124, 0.89, 0.84, 0.86, 1.4),
            row("05", 162, 0.91, 0.86, 0.88, 1.3),
            row("06", 131, 0.90, 0.83, 0.86, 1.6),
            row("07", 175, 0.88, 0.82, 0.85, 1.7),
            row("08", 149, 0.93, 0.90, 0.91, 0.9),
            row("09", 210, 0.90, 0.85, 0.87, 1.5),
            row("21", 96, 0.89, 0.87, 0.88, 1.1),
            row("22", 205, 0.91, 0.88, 0.89, 1.2),
            row("23", 198, 0.90, 0.86, 0.88, 1.4),
            row("26", 228, 0.92, 0.89, 0.90, 1.0),
            row("27", 94, 0.89, 0.85, 0.87, 1.3),
        ]
    }

    #[test]
    fn texas_weighted_rows() {
        let w = support_weighted(&texas_rows()).unwrap();
        assert_eq!(w.support, 1960);
        // Hand-summed: sum(support * p) = 1773.82, sum(support * f1) = 1726.25.
        assert!((w.precision - 1773.82 / 1960.0).abs() < 1e-12);
        assert!((w.precision - 0.905).abs() < 0.0005);
        assert!((w.f1 - 1726.25 / 1960.0).abs() < 1e-12);
        assert!((w.f1 - 0.883).abs() <= 0.005);
    }

    fn rec(id: &str, pred: &str, gold: Option<&str>, minutes: f64) -> MappingRecord {
        MappingRecord {
            item_id: id.into(),
            csi_division: String::new(),
            predicted_division: pred.into(),
            gold_division: gold.map(String::from),
            confidence: 0.9,
            review_minutes: minutes,
        }
    }

    #[test]
    fn perfect_predictions() {
        let recs = vec![rec("a", "03", Some("03"), 1.0), rec("b", "09", Some("09"), 2.0), rec("c", "09", Some("09"), 4.0)];
        let r = mapping_evaluation(&recs).unwrap();
        assert_eq!(r.divisions.len(), 2);
        for d in &r.divisions {
            assert_eq!((d.precision, d.recall, d.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(r.divisions[1].mean_review_minutes, 3.0);
        assert_eq!(r.weighted.f1, 1.0);
    }

    #[test]
    fn one_vs_rest_counts() {
        // gold 03 x3 (one predicted 04), gold 04 x1; predicted 04 twice.
        let recs = vec![
            rec("a", "03", Some("03"), 0.0),
            rec("b", "03", Some("03"), 0.0),
            rec("c", "04", Some("03"), 0.0),
            rec("d", "04", Some("04"), 0.0),
            rec("e", "05", None, 0.0),
        ];
        let r = mapping_evaluation(&recs).unwrap();
        let d03 = &r.divisions[0];
        assert_eq!((d03.support, d03.precision), (3, 1.0));
        assert!((d03.recall - 2.0 / 3.0).abs() < 1e-15);
        let d04 = &r.divisions[1];
        assert_eq!((d04.support, d04.precision, d04.recall), (1, 0.5, 1.0));
    }

    #[test]
    fn no_gold_and_bad_codes() {
        assert!(matches!(mapping_evaluation(&[rec("a", "03", None, 0.0)]), Err(ProgressError::NoGoldLabels)));
        assert!(matches!(
            mapping_evaluation(&[rec("a", "99", Some("03"), 0.0)]),
            Err(ProgressError::UnknownDivision { .. })
        ));
    }
}
