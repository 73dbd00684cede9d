use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::geometry::iou_mask;
use crate::proposals::Proposal;

/// Outcome of greedy matching: proposals in evaluation order with their
/// verdicts, plus the number of reference instances.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdicts {
    /// `(proposal id, score, true positive)` by descending score.
    pub ranked: Vec<(u64, f64, bool)>,
    pub num_gt: usize,
    /// Proposals that cover two or more reference cells.
    pub under_segmented: usize,
}

impl Verdicts {
    pub fn tp(&self) -> usize {
        self.ranked.iter().filter(|v| v.2).count()
    }

    pub fn fp(&self) -> usize {
        self.ranked.len() - self.tp()
    }

    pub fn fn_(&self) -> usize {
        self.num_gt - self.tp()
    }
}

/// Descending score, ties by id.
fn ranked<'a>(props: impl IntoIterator<Item = &'a Proposal>) -> Vec<&'a Proposal> {
    let mut v: Vec<&Proposal> = props.into_iter().collect();
    v.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
    v
}

/// Marker criterion: a proposal is a true positive iff exactly one marker of
/// its frame lies inside and that marker is still unmatched.
pub fn match_marker(props: &[Proposal], gt: &GroundTruth) -> Result<Verdicts> {
    let mut used = BTreeSet::new();
    let mut out = Vec::with_capacity(props.len());
    let mut under = 0;
    for p in ranked(props) {
        let inside = gt.markers_inside(p.t, &p.mask)?;
        if inside.len() > 1 {
            under += 1;
        }
        let tp = inside.len() == 1 && used.insert((p.t, inside[0].track_id));
        out.push((p.id, p.score, tp));
    }
    Ok(Verdicts {
        ranked: out,
        num_gt: gt.markers.iter().map(Vec::len).sum(),
        under_segmented: under,
    })
}

/// IoU criterion on the frames with annotated masks: a proposal is a true
/// positive if its best unmatched reference cell has IoU above `threshold`.
/// Proposals in unannotated frames are ignored.
pub fn match_iou(props: &[Proposal], gt: &GroundTruth, threshold: f64) -> Result<Verdicts> {
    if gt.label_grids.is_empty() {
        return Err(Error::MissingGroundTruth("no annotated masks for IoU matching".into()));
    }
    let cells: std::collections::BTreeMap<usize, _> =
        gt.label_grids.iter().map(|(&t, g)| (t, g.masks_by_label())).collect();
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    let mut under = 0;
    for p in ranked(props.iter().filter(|p| cells.contains_key(&p.t))) {
        let frame = &cells[&p.t];
        let covered = frame.values().filter(|m| 2 * p.mask.intersection(m) > m.area()).count();
        if covered > 1 {
            under += 1;
        }
        let best = frame
            .iter()
            .filter(|(l, _)| !used.contains(&(p.t, **l)))
            .map(|(&l, m)| (iou_mask(&p.mask, m), l))
            .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let tp = match best {
            Some((iou, l)) if iou > threshold => used.insert((p.t, l)),
            _ => false,
        };
        out.push((p.id, p.score, tp));
    }
    Ok(Verdicts {
        ranked: out,
        num_gt: cells.values().map(|c| c.len()).sum(),
        under_segmented: under,
    })
}

/// How the area under the precision-recall points is integrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApMode {
    /// Trapezoids between consecutive points, starting from recall 0 at the
    /// first point's precision.
    #[default]
    Trapezoid,
    /// Recall increments times the precision reached at each point.
    Step,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrCurve {
    /// `(recall, precision)` after each proposal.
    pub points: Vec<(f64, f64)>,
    pub ap: f64,
}

pub fn pr_curve_and_ap(v: &Verdicts, mode: ApMode) -> Result<PrCurve> {
    if v.num_gt == 0 {
        return Err(Error::MissingGroundTruth(
            "precision-recall needs at least one reference instance".into(),
        ));
    }
    let mut points = Vec::with_capacity(v.ranked.len());
    let mut tp = 0usize;
    for (i, &(_, _, hit)) in v.ranked.iter().enumerate() {
        tp += hit as usize;
        points.push((tp as f64 / v.num_gt as f64, tp as f64 / (i + 1) as f64));
    }
    let mut ap = 0.0;
    let mut prev = points.first().map_or((0.0, 0.0), |p| (0.0, p.1));
    for &(r, p) in &points {
        ap += match mode {
            ApMode::Trapezoid => (r - prev.0) * 0.5 * (p + prev.1),
            ApMode::Step => (r - prev.0) * p,
        };
        prev = (r, p);
    }
    Ok(PrCurve { points, ap })
}

/// Counts and rates of one matching criterion over the whole proposal list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionScores {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ns: usize,
    pub recall: f64,
    pub precision: f64,
    pub ap: f64,
}

impl DetectionScores {
    pub fn from_verdicts(v: &Verdicts, mode: ApMode) -> Result<Self> {
        let curve = pr_curve_and_ap(v, mode)?;
        let tp = v.tp();
        Ok(DetectionScores {
            tp,
            fp: v.fp(),
            fn_: v.fn_(),
            ns: v.under_segmented,
            recall: tp as f64 / v.num_gt as f64,
            precision: if v.ranked.is_empty() {
                1.0
            } else {
                tp as f64 / v.ranked.len() as f64
            },
            ap: curve.ap,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Marker, TrackRecord};
    use crate::geometry::{LabeledGrid, Mask};

    fn gt_one_frame(markers: &[(u32, i32, i32)]) -> GroundTruth {
        GroundTruth {
            width: 40,
            height: 20,
            markers: vec![markers
                .iter()
                .map(|&(track_id, x, y)| Marker { track_id, x, y })
                .collect()],
            label_grids: Default::default(),
            tracks: markers
                .iter()
                .map(|m| TrackRecord {
                    label: m.0,
                    birth: 0,
                    end: 0,
                    parent: 0,
                })
                .collect(),
        }
    }

    fn prop(id: u64, x: i32, w: u32, score: f64) -> Proposal {
        Proposal::new(id, 0, Mask::rect(x, 0, w, 10).unwrap(), score)
    }

    fn verdicts(hits: &[bool], num_gt: usize) -> Verdicts {
        Verdicts {
            ranked: hits
                .iter()
                .enumerate()
                .map(|(i, &h)| (i as u64, 1.0 - i as f64 * 0.1, h))
                .collect(),
            num_gt,
            under_segmented: 0,
        }
    }

    #[test]
    fn marker_rules() {
        let gt = gt_one_frame(&[(1, 3, 3), (2, 25, 3)]);
        let v = match_marker(&[prop(0, 0, 10, 0.9)], &gt).unwrap();
        assert_eq!((v.tp(), v.fp(), v.fn_()), (1, 0, 1));

        // second proposal over the same marker finds it consumed
        let v = match_marker(&[prop(0, 0, 10, 0.9), prop(1, 1, 8, 0.5)], &gt).unwrap();
        assert_eq!(v.ranked, vec![(0, 0.9, true), (1, 0.5, false)]);

        // one proposal over both markers
        let v = match_marker(&[prop(0, 0, 40, 0.9)], &gt).unwrap();
        assert_eq!((v.tp(), v.fp(), v.fn_(), v.under_segmented), (0, 1, 2, 1));

        let v = match_marker(&[prop(0, 0, 40, 0.9), prop(1, 20, 10, 0.3)], &gt).unwrap();
        assert_eq!((v.tp(), v.fp(), v.fn_()), (1, 1, 1));
    }

    #[test]
    fn iou_rules() {
        let mut gt = gt_one_frame(&[(1, 3, 3)]);
        let mut grid = LabeledGrid::zeros(40, 20);
        grid.paint(&Mask::rect(0, 0, 10, 10).unwrap(), 1);
        gt.label_grids.insert(0, grid);

        let v = match_iou(&[prop(0, 0, 10, 0.5)], &gt, 0.5).unwrap();
        assert_eq!(v.tp(), 1);
        // 4 of 10 columns: IoU 0.4
        let v = match_iou(&[prop(0, 0, 4, 0.5)], &gt, 0.5).unwrap();
        assert_eq!((v.tp(), v.fp()), (0, 1));
        // IoU 0.6 and 0.55 on the same cell: only the higher-scored one counts
        let cell = Mask::rect(0, 0, 10, 10).unwrap();
        let a = prop(0, 0, 6, 0.9);
        let b = Proposal::new(
            1,
            0,
            Mask::rect(0, 0, 5, 10).unwrap().union(&Mask::rect(5, 0, 1, 5).unwrap()),
            0.8,
        );
        assert!((iou_mask(&a.mask, &cell) - 0.6).abs() < 1e-12);
        assert!((iou_mask(&b.mask, &cell) - 0.55).abs() < 1e-12);
        let v = match_iou(&[b.clone(), a.clone()], &gt, 0.5).unwrap();
        assert_eq!(v.ranked, vec![(0, 0.9, true), (1, 0.8, false)]);
        let b_first = Proposal { score: 0.95, ..b };
        let v = match_iou(&[b_first, a.clone()], &gt, 0.5).unwrap();
        assert_eq!(v.ranked, vec![(1, 0.95, true), (0, 0.9, false)]);

        let no_masks = gt_one_frame(&[(1, 3, 3)]);
        assert!(match_iou(&[a], &no_masks, 0.5).is_err());
    }

    #[test]
    fn ap_examples() {
        assert_eq!(
            pr_curve_and_ap(&verdicts(&[true, true], 2), ApMode::Trapezoid)
                .unwrap()
                .ap,
            1.0
        );
        assert_eq!(
            pr_curve_and_ap(&verdicts(&[false, false], 2), ApMode::Trapezoid)
                .unwrap()
                .ap,
            0.0
        );
        let c = pr_curve_and_ap(&verdicts(&[true, false, true], 2), ApMode::Trapezoid).unwrap();
        assert_eq!(c.points[..2], [(0.5, 1.0), (0.5, 0.5)]);
        assert!((c.points[2].1 - 2.0 / 3.0).abs() < 1e-15);
        // rectangle up to the first point, zero-width drop, then one trapezoid
        let oracle = 0.5 * 1.0 + 0.0 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((c.ap - oracle).abs() < 1e-12);
        assert!((c.ap - 0.79167).abs() < 5e-6);
        let s = pr_curve_and_ap(&verdicts(&[true, false, true], 2), ApMode::Step).unwrap();
        assert!((s.ap - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
        assert!(pr_curve_and_ap(&verdicts(&[true], 0), ApMode::Trapezoid).is_err());
    }
}
