use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{validate_tracks, GroundTruth, TrackRecord};
use crate::geometry::{iou_mask, LabeledGrid, Mask};
use crate::par;
use crate::proposals::Proposal;
use crate::solve::LineageForest;

/// A tracking result in the form it is written to disk: a track table and
/// one label grid per frame, kept here as per-label masks.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackingResult {
    pub width: usize,
    pub height: usize,
    pub tracks: Vec<TrackRecord>,
    /// Indexed by frame; track label to its region.
    pub frames: Vec<BTreeMap<u32, Mask>>,
}

impl TrackingResult {
    pub fn empty(width: usize, height: usize, num_frames: usize) -> Self {
        TrackingResult {
            width,
            height,
            tracks: Vec::new(),
            frames: vec![BTreeMap::new(); num_frames],
        }
    }

    /// Paints every track's proposals in label order (later labels win on
    /// overlapping pixels), so the masks equal what the label grids hold.
    pub fn from_lineage(
        forest: &LineageForest,
        props: &[Proposal],
        width: usize,
        height: usize,
        num_frames: usize,
    ) -> Result<Self> {
        let by_id: BTreeMap<u64, &Proposal> = props.iter().map(|p| (p.id, p)).collect();
        let mut grids = vec![LabeledGrid::zeros(width, height); num_frames];
        for track in &forest.tracks {
            for (k, id) in track.proposals.iter().enumerate() {
                let p = by_id
                    .get(id)
                    .ok_or_else(|| Error::InvalidArgument(format!("track {} uses unknown proposal {id}", track.id)))?;
                let t = track.start + k;
                if p.t != t || t >= num_frames {
                    return Err(Error::FrameMismatch(format!(
                        "proposal {id} is in frame {}, track {} places it in frame {t}",
                        p.t, track.id
                    )));
                }
                grids[t].paint(&p.mask, track.id);
            }
        }
        Self::from_label_grids(forest.track_table(), &grids)
    }

    pub fn from_label_grids(tracks: Vec<TrackRecord>, grids: &[LabeledGrid]) -> Result<Self> {
        validate_tracks(&tracks)?;
        let (width, height) = grids.first().map_or((0, 0), |g| (g.width, g.height));
        if let Some(g) = grids.iter().find(|g| (g.width, g.height) != (width, height)) {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                actual: g.width * g.height,
            });
        }
        Ok(TrackingResult {
            width,
            height,
            tracks,
            frames: par::map(grids, LabeledGrid::masks_by_label),
        })
    }

    pub fn label_grids(&self) -> Vec<LabeledGrid> {
        self.frames
            .iter()
            .map(|f| {
                let mut g = LabeledGrid::zeros(self.width, self.height);
                for (&l, m) in f {
                    g.paint(m, l);
                }
                g
            })
            .collect()
    }

    /// Every region dilated by a disk of `radius`, clipped to the frame.
    pub fn dilated(&self, radius: u32) -> Self {
        let frames = par::map(&self.frames, |f| {
            f.iter()
                .filter_map(|(&l, m)| m.dilate(radius).clip(self.width, self.height).map(|m| (l, m)))
                .collect()
        });
        TrackingResult { frames, ..self.clone() }
    }
}

/// Semantic class of a link between nodes of consecutive frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Link {
    Move,
    Parent,
}

type Node = (u32, usize);

/// Links `(label, t) -> (label', t + 1)` of a track table restricted to the
/// nodes that exist.
fn links(tracks: &[TrackRecord], exists: impl Fn(Node) -> bool) -> BTreeMap<(Node, Node), Link> {
    let mut out = BTreeMap::new();
    let ends: BTreeMap<u32, usize> = tracks.iter().map(|r| (r.label, r.end)).collect();
    for r in tracks {
        for t in r.birth..r.end {
            if exists((r.label, t)) && exists((r.label, t + 1)) {
                out.insert(((r.label, t), (r.label, t + 1)), Link::Move);
            }
        }
        if r.parent != 0 {
            if let Some(&pe) = ends.get(&r.parent) {
                if pe + 1 == r.birth && exists((r.parent, pe)) && exists((r.label, r.birth)) {
                    out.insert(((r.parent, pe), (r.label, r.birth)), Link::Parent);
                }
            }
        }
    }
    out
}

/// How reference cells are assigned to result regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Criterion {
    /// A cell belongs to the region containing its marker.
    Marker,
    /// Majority coverage on annotated frames, marker elsewhere.
    Auto,
}

/// Per frame: reference label to result label.
struct Matching {
    gt_to_res: Vec<BTreeMap<u32, u32>>,
}

impl Matching {
    fn compute(result: &TrackingResult, gt: &GroundTruth, criterion: Criterion) -> Self {
        let n = gt.num_frames();
        let gt_to_res = par::map_range(n, |t| {
            let empty = BTreeMap::new();
            let regions = result.frames.get(t).unwrap_or(&empty);
            let cells = match (criterion, gt.label_grids.get(&t)) {
                (Criterion::Auto, Some(grid)) => grid.masks_by_label(),
                _ => BTreeMap::new(),
            };
            let mut out = BTreeMap::new();
            for m in &gt.markers[t] {
                let hit = match cells.get(&m.track_id) {
                    Some(cell) => regions
                        .iter()
                        .find(|(_, r)| 2 * r.intersection(cell) > cell.area())
                        .map(|(&l, _)| l),
                    None => regions.iter().find(|(_, r)| r.contains(m.x, m.y)).map(|(&l, _)| l),
                };
                if let Some(l) = hit {
                    out.insert(m.track_id, l);
                }
            }
            out
        });
        Matching { gt_to_res }
    }

    fn res_to_gt(&self) -> BTreeMap<Node, Vec<u32>> {
        let mut out: BTreeMap<Node, Vec<u32>> = BTreeMap::new();
        for (t, frame) in self.gt_to_res.iter().enumerate() {
            for (&g, &r) in frame {
                out.entry((r, t)).or_default().push(g);
            }
        }
        out
    }
}

/// Weights of the graph-edit operations that turn the result into the
/// reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AogmWeights {
    pub ns: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub fp: f64,
    pub ed2: f64,
    pub ea: f64,
    pub ec: f64,
}

impl Default for AogmWeights {
    fn default() -> Self {
        AogmWeights {
            ns: 5.0,
            fn_: 10.0,
            fp: 1.0,
            ed2: 1.0,
            ea: 1.5,
            ec: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub ns: usize,
    pub ea: usize,
    pub ec: usize,
    pub ed2: usize,
}

impl ErrorCounts {
    pub fn cost(&self, w: &AogmWeights) -> f64 {
        w.fn_ * self.fn_ as f64
            + w.fp * self.fp as f64
            + w.ns * self.ns as f64
            + w.ea * self.ea as f64
            + w.ec * self.ec as f64
            + w.ed2 * self.ed2 as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraScore {
    pub tra: f64,
    pub aogm: f64,
    /// Cost of building the reference graph from nothing.
    pub aogm0: f64,
    pub errors: ErrorCounts,
}

/// Graph-edit errors of the result against the reference:
/// - FN: reference cell not assigned to any region;
/// - FP: region with no reference cell;
/// - NS: each extra cell assigned to an already used region;
/// - EA: reference link whose end cells' regions are not linked;
/// - EC: linked, but as move instead of division or vice versa;
/// - ED2: result link that carries no reference link.
pub fn aogm_errors(result: &TrackingResult, gt: &GroundTruth) -> ErrorCounts {
    error_counts(result, gt, &Matching::compute(result, gt, Criterion::Auto))
}

fn error_counts(result: &TrackingResult, gt: &GroundTruth, m: &Matching) -> ErrorCounts {
    let res_to_gt = m.res_to_gt();
    let mut e = ErrorCounts::default();
    for (t, frame) in gt.markers.iter().enumerate() {
        e.fn_ += frame
            .iter()
            .filter(|c| !m.gt_to_res[t].contains_key(&c.track_id))
            .count();
    }
    for (t, regions) in result.frames.iter().enumerate() {
        for &l in regions.keys() {
            match res_to_gt.get(&(l, t)).map_or(0, Vec::len) {
                0 => e.fp += 1,
                k => e.ns += k - 1,
            }
        }
    }

    let gt_nodes: BTreeSet<Node> = gt
        .markers
        .iter()
        .enumerate()
        .flat_map(|(t, f)| f.iter().map(move |c| (c.track_id, t)))
        .collect();
    let gt_links = links(&gt.tracks, |n| gt_nodes.contains(&n));
    let res_links = links(&result.tracks, |(l, t)| {
        result.frames.get(t).is_some_and(|f| f.contains_key(&l))
    });
    let mapped = |(g, t): Node| m.gt_to_res.get(t).and_then(|f| f.get(&g)).map(|&r| (r, t));

    let mut explained = BTreeSet::new();
    for (&(a, b), &kind) in &gt_links {
        let link = mapped(a).zip(mapped(b));
        match link.and_then(|l| res_links.get(&l).map(|k| (l, k))) {
            Some((l, &k)) => {
                explained.insert(l);
                if k != kind {
                    e.ec += 1;
                }
            }
            None => e.ea += 1,
        }
    }
    e.ed2 = res_links.keys().filter(|l| !explained.contains(*l)).count();
    e
}

/// Number of reference nodes and links (all FN and EA for an empty result).
fn reference_size(gt: &GroundTruth) -> (usize, usize) {
    let nodes: BTreeSet<Node> = gt
        .markers
        .iter()
        .enumerate()
        .flat_map(|(t, f)| f.iter().map(move |c| (c.track_id, t)))
        .collect();
    let links = links(&gt.tracks, |n| nodes.contains(&n));
    (nodes.len(), links.len())
}

/// `TRA = 1 - min(AOGM, AOGM0) / AOGM0`. An empty reference scores 1 only
/// for an error-free result.
pub fn tra_score(result: &TrackingResult, gt: &GroundTruth, weights: &AogmWeights) -> TraScore {
    let errors = aogm_errors(result, gt);
    let aogm = errors.cost(weights);
    let (nodes, edges) = reference_size(gt);
    let aogm0 = weights.fn_ * nodes as f64 + weights.ea * edges as f64;
    let tra = if aogm0 > 0.0 {
        1.0 - aogm.min(aogm0) / aogm0
    } else if aogm == 0.0 {
        1.0
    } else {
        0.0
    };
    TraScore {
        tra,
        aogm,
        aogm0,
        errors,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitosisScore {
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MitosisScore {
    /// Rates from counts. No reference divisions means recall 1; no detected
    /// divisions means precision 1.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        MitosisScore {
            f1: f1(precision, recall),
            recall,
            precision,
            tp,
            fp,
            fn_,
        }
    }
}

pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Divisions as `(parent label, parent's last frame, sorted daughters)`.
fn divisions(tracks: &[TrackRecord]) -> Vec<(u32, usize, Vec<u32>)> {
    let ends: BTreeMap<u32, usize> = tracks.iter().map(|r| (r.label, r.end)).collect();
    let mut kids: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for r in tracks.iter().filter(|r| r.parent != 0) {
        if ends.get(&r.parent).is_some_and(|&e| e + 1 == r.birth) {
            kids.entry(r.parent).or_default().push(r.label);
        }
    }
    kids.into_iter()
        .filter(|(_, k)| k.len() >= 2)
        .map(|(p, mut k)| {
            k.sort_unstable();
            (p, ends[&p], k)
        })
        .collect()
}

/// A detected division is correct iff its parent region holds exactly the
/// reference parent's marker in the parent's last frame and its daughter
/// regions hold exactly the reference daughters' markers one frame later.
pub fn mitosis_f1(result: &TrackingResult, gt: &GroundTruth) -> MitosisScore {
    let m = Matching::compute(result, gt, Criterion::Marker);
    let res_to_gt = m.res_to_gt();
    let sole = |n: Node| match res_to_gt.get(&n).map(Vec::as_slice) {
        Some([g]) => Some(*g),
        _ => None,
    };
    let reference: BTreeSet<(u32, usize, Vec<u32>)> = divisions(&gt.tracks).into_iter().collect();
    let mut found = BTreeSet::new();
    let mut fp = 0;
    for (p, t, kids) in divisions(&result.tracks) {
        let parent = sole((p, t));
        let mut daughters: Option<Vec<u32>> = kids.iter().map(|&k| sole((k, t + 1))).collect();
        if let Some(d) = daughters.as_mut() {
            d.sort_unstable();
        }
        let hit = parent.zip(daughters).map(|(p, d)| (p, t, d));
        match hit {
            Some(key) if reference.contains(&key) && !found.contains(&key) => {
                found.insert(key);
            }
            _ => fp += 1,
        }
    }
    MitosisScore::from_counts(found.len(), fp, reference.len() - found.len())
}

/// Mean over annotated reference cells of the IoU with the result region
/// covering more than half of the cell (0 when there is none).
pub fn seg_score(result: &TrackingResult, gt: &GroundTruth) -> Result<f64> {
    if gt.label_grids.is_empty() {
        return Err(Error::MissingGroundTruth("no annotated masks for SEG".into()));
    }
    let frames: Vec<(&usize, &LabeledGrid)> = gt.label_grids.iter().collect();
    let per_frame = par::map(&frames, |&(&t, grid)| {
        let empty = BTreeMap::new();
        let regions = result.frames.get(t).unwrap_or(&empty);
        grid.masks_by_label()
            .values()
            .map(|cell| {
                regions
                    .values()
                    .find(|r| 2 * r.intersection(cell) > cell.area())
                    .map_or(0.0, |r| iou_mask(r, cell))
            })
            .collect::<Vec<f64>>()
    });
    let scores: Vec<f64> = per_frame.into_iter().flatten().collect();
    if scores.is_empty() {
        return Ok(1.0);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}
