use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{
    match_iou, match_marker, mitosis_f1, seg_score, tra_score, AogmWeights, ApMode, DetectionScores, GraphRecall,
    GroundTruth, MitosisScore, TraScore, TrackingResult,
};
use crate::proposals::Proposal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub weights: AogmWeights,
    /// Dilate result regions before matching them to reference cells.
    pub dilate: bool,
    pub dilate_radius: u32,
    pub ap_mode: ApMode,
    pub iou_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            weights: AogmWeights::default(),
            dilate: false,
            dilate_radius: 1,
            ap_mode: ApMode::Trapezoid,
            iou_threshold: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub marker: DetectionScores,
    /// Only when reference masks exist.
    pub iou: Option<DetectionScores>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingScores {
    #[serde(flatten)]
    pub tra: TraScore,
    /// Only when reference masks exist.
    pub seg: Option<f64>,
    pub mitosis: MitosisScore,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub detection: Option<DetectionReport>,
    pub graph: Option<GraphRecall>,
    pub tracking: Option<TrackingScores>,
}

pub fn evaluate_detection(props: &[Proposal], gt: &GroundTruth, cfg: &EvalConfig) -> Result<DetectionReport> {
    let marker = DetectionScores::from_verdicts(&match_marker(props, gt)?, cfg.ap_mode)?;
    let iou = if gt.label_grids.is_empty() {
        None
    } else {
        Some(DetectionScores::from_verdicts(
            &match_iou(props, gt, cfg.iou_threshold)?,
            cfg.ap_mode,
        )?)
    };
    Ok(DetectionReport { marker, iou })
}

/// TRA and mitosis scores match (optionally dilated) regions; SEG always
/// uses the regions as they are.
pub fn evaluate_tracking(result: &TrackingResult, gt: &GroundTruth, cfg: &EvalConfig) -> Result<TrackingScores> {
    let dilated;
    let matched = if cfg.dilate {
        dilated = result.dilated(cfg.dilate_radius);
        &dilated
    } else {
        result
    };
    Ok(TrackingScores {
        tra: tra_score(matched, gt, &cfg.weights),
        seg: if gt.label_grids.is_empty() {
            None
        } else {
            Some(seg_score(result, gt)?)
        },
        mitosis: mitosis_f1(matched, gt),
    })
}

impl EvalReport {
    /// Aligned plain-text table; the tracking block lists
    /// TRA SEG FN FP NS EA EC ED2 in that order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(t) = &self.tracking {
            let e = &t.tra.errors;
            let seg = t.seg.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                s,
                "{:<8}{:<8}{:>7}{:>7}{:>7}{:>7}{:>7}{:>7}",
                "TRA", "SEG", "FN", "FP", "NS", "EA", "EC", "ED2"
            );
            let _ = writeln!(
                s,
                "{:<8}{:<8}{:>7}{:>7}{:>7}{:>7}{:>7}{:>7}",
                format!("{:.4}", t.tra.tra),
                seg,
                e.fn_,
                e.fp,
                e.ns,
                e.ea,
                e.ec,
                e.ed2
            );
            let m = &t.mitosis;
            let _ = writeln!(
                s,
                "mitosis  F1 {:.4}  P {:.4}  R {:.4}  (TP {} FP {} FN {})",
                m.f1, m.precision, m.recall, m.tp, m.fp, m.fn_
            );
        }
        if let Some(g) = &self.graph {
            let _ = writeln!(
                s,
                "graph    R {:.4}  R-NS {:.4}  move {:.4}  mitosis {:.4}  ({} cells)",
                g.r, g.r_ns, g.move_recall, g.mitosis_recall, g.cells
            );
        }
        if let Some(d) = &self.detection {
            for (name, v) in [("marker", Some(&d.marker)), ("iou", d.iou.as_ref())] {
                if let Some(v) = v {
                    let _ = writeln!(
                        s,
                        "{name:<8} AP {:.4}  P {:.4}  R {:.4}  (TP {} FP {} FN {} NS {})",
                        v.ap, v.precision, v.recall, v.tp, v.fp, v.fn_, v.ns
                    );
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_columns_in_order() {
        let r = EvalReport {
            tracking: Some(TrackingScores {
                tra: TraScore {
                    tra: 0.5,
                    aogm: 1.0,
                    aogm0: 2.0,
                    errors: Default::default(),
                },
                seg: None,
                mitosis: MitosisScore::from_counts(1, 0, 0),
            }),
            ..Default::default()
        };
        let text = r.to_text();
        let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
        assert_eq!(header, ["TRA", "SEG", "FN", "FP", "NS", "EA", "EC", "ED2"]);
        let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(row[..2], ["0.5000", "-"]);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(
            serde_json::from_str::<EvalConfig>(r#"{"dilate": true}"#)
                .unwrap()
                .dilate
        );
        assert!(serde_json::from_str::<EvalConfig>(r#"{"dilation": true}"#).is_err());
        let w: EvalConfig = serde_json::from_str(r#"{"weights": {"fn": 3}}"#).unwrap();
        assert_eq!((w.weights.fn_, w.weights.ns), (3.0, 5.0));
    }
}
