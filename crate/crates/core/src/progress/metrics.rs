//! Classification and segmentation quality from ingested label counts.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ProgressError;

/// Square count grid. Rows are predicted classes, columns are actual classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    class_names: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(class_names: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self, ProgressError> {
        let n = class_names.len();
        if n == 0 || counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(ProgressError::NotSquare { classes: n, rows: counts.len() });
        }
        Ok(ConfusionMatrix { class_names, counts })
    }

    pub fn identity(class_names: Vec<String>, support: u64) -> Self {
        let n = class_names.len();
        let counts = (0..n)
            .map(|i| (0..n).map(|j| if i == j { support } else { 0 }).collect())
            .collect();
        ConfusionMatrix { class_names, counts }
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Column total, i.e. per-class support.
    pub fn column_total(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when any of the three ratios had a zero denominator and was reported as 0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub micro_accuracy: f64,
    pub trace: u64,
    pub total: u64,
}

pub(crate) fn safe_ratio(num: f64, den: f64, flag: &mut bool) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        *flag = true;
        0.0
    }
}

pub(crate) fn f1_of(p: f64, r: f64, flag: &mut bool) -> f64 {
    safe_ratio(2.0 * p * r, p + r, flag)
}

pub fn classification_metrics(m: &ConfusionMatrix) -> Result<ClassificationReport, ProgressError> {
    let total = m.total();
    if total == 0 {
        return Err(ProgressError::EmptyMatrix);
    }
    let n = m.class_names.len();
    let per_class: Vec<ClassMetrics> = (0..n)
        .map(|c| {
            let mut flag = false;
            let diag = m.counts[c][c] as f64;
            let precision = safe_ratio(diag, m.row_total(c) as f64, &mut flag);
            let recall = safe_ratio(diag, m.column_total(c) as f64, &mut flag);
            let f1 = f1_of(precision, recall, &mut flag);
            ClassMetrics {
                class: m.class_names[c].clone(),
                precision,
                recall,
                f1,
                support: m.column_total(c),
                zero_division: flag,
            }
        })
        .collect();
    let k = n as f64;
    let macro_avg = Averages {
        precision: per_class.iter().map(|c| c.precision).sum::<f64>() / k,
        recall: per_class.iter().map(|c| c.recall).sum::<f64>() / k,
        f1: per_class.iter().map(|c| c.f1).sum::<f64>() / k,
    };
    let trace = m.trace();
    Ok(ClassificationReport {
        per_class,
        macro_avg,
        micro_accuracy: trace as f64 / total as f64,
        trace,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IouEntry {
    pub class: String,
    pub iou: f64,
    pub support_px: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IouSummary {
    pub macro_iou: f64,
    pub micro_iou: f64,
    pub total_support: f64,
}

/// Unweighted and support-weighted mean IoU.
pub fn iou_aggregate(per_class: &[IouEntry]) -> Result<IouSummary, ProgressError> {
    if per_class.is_empty() {
        return Err(ProgressError::EmptyIou);
    }
    for e in per_class {
        if !(e.support_px > 0.0) || !(0.0..=1.0).contains(&e.iou) {
            return Err(ProgressError::InvalidIou(e.class.clone()));
        }
    }
    let total: f64 = per_class.iter().map(|e| e.support_px).sum();
    Ok(IouSummary {
        macro_iou: per_class.iter().map(|e| e.iou).sum::<f64>() / per_class.len() as f64,
        micro_iou: per_class.iter().map(|e| e.iou * e.support_px).sum::<f64>() / total,
        total_support: total,
    })
}
