//! Quantity and status evidence, and label-quality metrics.

mod fusion;
mod mapping;
mod metrics;
mod quantity;

use alloc::string::String;
use thiserror::Error;

pub use fusion::{fuse_percent_complete, MonotoneClamp, ProgressObservation, ProgressTracker, SourceWeights};
pub use mapping::{mapping_evaluation, support_weighted, DivisionMetrics, MappingRecord, MappingReport, WeightedSummary};
pub use metrics::{
    classification_metrics, iou_aggregate, Averages, ClassMetrics, ClassificationReport, ConfusionMatrix, IouEntry,
    IouSummary,
};
pub use quantity::{quantity_percent_complete, reconcile, Quantity, QuantityUnit, Reconciliation, WbsQuantity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProgressError {
    #[error("{wbs_id}: planned unit {planned} does not match measured unit {measured}")]
    UnitMismatch { wbs_id: String, planned: QuantityUnit, measured: QuantityUnit },
    #[error("{0}: planned quantity must be positive")]
    ZeroPlanned(String),
    #[error("{0}: measured quantity must be finite and non-negative")]
    InvalidQuantity(String),
    #[error("unknown quantity unit {0:?}")]
    UnknownUnit(String),
    #[error("{0}: no scan or vision evidence")]
    NoEvidence(String),
    #[error("{activity_id}: fraction {value} outside [0, 1]")]
    FractionOutOfRange { activity_id: String, value: f64 },
    #[error("{0}: source weights must be non-negative")]
    NegativeWeight(String),
    #[error("{0}: weights of the present sources sum to zero")]
    ZeroWeight(String),
    #[error("confusion matrix has {classes} classes but {rows} rows, or a ragged row")]
    NotSquare { classes: usize, rows: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no IoU entries")]
    EmptyIou,
    #[error("{0}: IoU must lie in [0, 1] with positive support")]
    InvalidIou(String),
    #[error("no records carry a gold label")]
    NoGoldLabels,
    #[error("{item_id}: unknown division code {code:?}")]
    UnknownDivision { item_id: String, code: String },
    #[error("{0}: confidence outside [0, 1]")]
    InvalidConfidence(String),
    #[error("{0}: negative review time")]
    InvalidReviewTime(String),
}
