//! CSV drop-file ingest for labels, quantities and evidence.

use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

use sitetwin_core::progress::{ConfusionMatrix, DivisionMetrics, IouEntry, ProgressError, Quantity, QuantityUnit, WbsQuantity};
use sitetwin_core::stochastic::Evidence;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Progress(#[from] ProgressError),
}

fn row_err(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Row { line, message: e.to_string() }
}

fn is_total(label: &str) -> bool {
    label.trim().to_ascii_lowercase().contains("total")
}

/// Confusion matrix with predicted classes down the rows and actual classes
/// across the columns. The first column holds row labels. A trailing
/// row-total column and a trailing column-total row are checked and dropped.
pub fn read_confusion<R: Read>(r: R) -> Result<ConfusionMatrix, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers().map_err(row_err)?.clone();
    let mut classes: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let has_row_total = classes.last().is_some_and(|c| is_total(c));
    if has_row_total {
        classes.pop();
    }
    let n = classes.len();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    let mut column_totals: Option<Vec<u64>> = None;
    for rec in rdr.records() {
        let rec = rec.map_err(row_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let label = rec.get(0).unwrap_or("");
        let mut cells = Vec::with_capacity(rec.len());
        for c in rec.iter().skip(1) {
            let v: u64 = c.replace(' ', "").parse().map_err(|_| IngestError::Row { line, message: format!("count {c:?} is not a non-negative integer") })?;
            cells.push(v);
        }
        let expected = n + usize::from(has_row_total);
        if cells.len() != expected {
            return Err(IngestError::Row { line, message: format!("{} cells, expected {expected}", cells.len()) });
        }
        if has_row_total {
            let total = cells.pop().unwrap();
            if total != cells.iter().sum::<u64>() {
                return Err(IngestError::Row { line, message: format!("row total {total} does not match the counts") });
            }
        }
        if is_total(label) {
            column_totals = Some(cells);
        } else {
            if label != classes.get(counts.len()).map_or("", String::as_str) {
                return Err(IngestError::Row { line, message: format!("row {label:?} out of order with the header classes") });
            }
            counts.push(cells);
        }
    }
    if let Some(totals) = column_totals {
        for (j, t) in totals.iter().enumerate() {
            let sum: u64 = counts.iter().map(|r| r[j]).sum();
            if sum != *t {
                return Err(IngestError::Shape(format!("column total for {:?} is {t}, counts sum to {sum}", classes[j])));
            }
        }
    }
    Ok(ConfusionMatrix::new(classes, counts)?)
}

fn records<T: for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<Vec<T>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    rdr.deserialize().map(|x| x.map_err(row_err)).collect()
}

#[derive(Deserialize)]
struct IouRow {
    class: String,
    iou: f64,
    support: f64,
}

/// `class,iou,support` rows.
pub fn read_iou<R: Read>(r: R) -> Result<Vec<IouEntry>, IngestError> {
    Ok(records::<IouRow, _>(r)?.into_iter().map(|x| IouEntry { class: x.class, iou: x.iou, support_px: x.support }).collect())
}

#[derive(Deserialize)]
struct DivisionRow {
    division: String,
    support: u64,
    precision: f64,
    recall: f64,
    f1: f64,
    #[serde(default)]
    avg_review_min: f64,
}

/// `division,support,precision,recall,f1,avg_review_min` rows.
pub fn read_divisions<R: Read>(r: R) -> Result<Vec<DivisionMetrics>, IngestError> {
    Ok(records::<DivisionRow, _>(r)?
        .into_iter()
        .map(|x| DivisionMetrics {
            division: x.division,
            support: x.support,
            precision: x.precision,
            recall: x.recall,
            f1: x.f1,
            mean_review_minutes: x.avg_review_min,
            zero_division: false,
        })
        .collect())
}

#[derive(Deserialize)]
struct QuantityRow {
    wbs: String,
    element_class: String,
    planned: f64,
    unit: String,
    measured: f64,
    #[serde(default)]
    evidence_link: String,
}

/// `wbs,element_class,planned,unit,measured,evidence_link` rows; both
/// quantities are in `unit`.
pub fn read_quantities<R: Read>(r: R) -> Result<Vec<WbsQuantity>, IngestError> {
    records::<QuantityRow, _>(r)?
        .into_iter()
        .map(|x| {
            let unit: QuantityUnit = x.unit.parse()?;
            Ok(WbsQuantity {
                wbs_id: x.wbs,
                element_class: x.element_class,
                planned: Quantity::new(x.planned, unit),
                measured: Quantity::new(x.measured, unit),
                evidence_link: x.evidence_link,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct EvidenceRow {
    activity_id: String,
    week: u32,
    percent_complete: f64,
    elapsed: f64,
    #[serde(default)]
    likelihood_sd: Option<f64>,
}

/// `activity_id,week,percent_complete,elapsed[,likelihood_sd]` rows.
pub fn read_evidence<R: Read>(r: R) -> Result<Vec<Evidence>, IngestError> {
    Ok(records::<EvidenceRow, _>(r)?
        .into_iter()
        .map(|x| {
            let e = Evidence::new(x.activity_id, x.week, x.percent_complete, x.elapsed);
            match x.likelihood_sd {
                Some(sd) => e.with_sd(sd),
                None => e,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: &str = "predicted,A,B,Row Total\nA,5,1,6\nB,2,7,9\nColumn Total,7,8,15\n";

    #[test]
    fn confusion_with_totals() {
        let m = read_confusion(GRID.as_bytes()).unwrap();
        assert_eq!(m.class_names(), ["A", "B"]);
        assert_eq!(m.counts(), [vec![5, 1], vec![2, 7]]);
    }

    #[test]
    fn confusion_total_mismatch() {
        let bad = GRID.replace("A,5,1,6", "A,5,1,7");
        assert!(matches!(read_confusion(bad.as_bytes()), Err(IngestError::Row { line: 2, .. })));
        let bad = GRID.replace("Column Total,7,8,15", "Column Total,7,9,16");
        assert!(matches!(read_confusion(bad.as_bytes()), Err(IngestError::Shape(_))));
    }

    #[test]
    fn confusion_without_totals_and_bad_cells() {
        let m = read_confusion("p,A,B\nA,1,0\nB,0,1\n".as_bytes()).unwrap();
        assert_eq!(m.total(), 2);
        assert!(read_confusion("p,A,B\nA,1,x\nB,0,1\n".as_bytes()).is_err());
        assert!(read_confusion("p,A,B\nB,1,0\nA,0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn quantities_and_units() {
        let q = read_quantities("wbs,element_class,planned,unit,measured,evidence_link\nWBS-001,Wall,8200,m2,8035,scan\n".as_bytes()).unwrap();
        assert_eq!(q[0].planned.unit, QuantityUnit::SquareMeters);
        assert!(read_quantities("wbs,element_class,planned,unit,measured\nW,Wall,1,ft,1\n".as_bytes()).is_err());
    }

    #[test]
    fn evidence_rows() {
        let e = read_evidence("activity_id,week,percent_complete,elapsed,likelihood_sd\nA020,3,0.5,30,\n".as_bytes()).unwrap();
        assert_eq!(e[0].implied_duration(), 60.0);
    }
}
