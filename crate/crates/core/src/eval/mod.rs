//! Evaluation against ground truth: proposal detection quality, recall of the
//! candidate graph, and tracking scores of a selected lineage.

mod detection;
mod ground_truth;
mod recall;
mod report;
mod tracking;

pub use detection::{match_iou, match_marker, pr_curve_and_ap, ApMode, DetectionScores, PrCurve, Verdicts};
pub use ground_truth::{validate_tracks, GroundTruth, Marker, TrackRecord};
pub use recall::{graph_recall, GraphRecall};
pub use report::{evaluate_detection, evaluate_tracking, DetectionReport, EvalConfig, EvalReport, TrackingScores};
pub use tracking::{
    aogm_errors, f1, mitosis_f1, seg_score, tra_score, AogmWeights, ErrorCounts, MitosisScore, TraScore, TrackingResult,
};
