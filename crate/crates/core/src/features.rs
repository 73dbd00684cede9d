//! Appearance and shape descriptors for proposals, move edges and mitosis sets.
//!
//! Proposal vector layout (92 values):
//!
//! | offset | len | block |
//! |-------:|----:|-------|
//! | 0  | 15 | intensity histogram, 15 equal bins on `[0, 1]` |
//! | 15 | 8  | boundary-to-ring difference histogram, ring radius 1 |
//! | 23 | 8  | boundary-to-ring difference histogram, ring radius 3 |
//! | 31 | 60 | boundary polar histogram, 12 angular x 5 radial bins |
//! | 91 | 1  | area as a fraction of the frame |
//!
//! Difference histograms use 8 equal bins on `[-0.5, 0.5]` (values clipped).
//! For each boundary pixel the difference is the mean intensity of the ring
//! pixels inside its radius-`r` disk minus the boundary pixel's intensity.
//! All histograms are L1-normalised, or all-zero when they have no samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_and_dilations, disk_offsets, iou_mask, Mask};
use crate::proposals::{Frame, Proposal};

pub const PROPOSAL_DIM: usize = 92;
pub const MOVE_DIM: usize = 2 * PROPOSAL_DIM + 3 + DIFF_STATS + 2;
pub const MOVE_DIM_FULL: usize = 2 * PROPOSAL_DIM + 3 + PROPOSAL_DIM + 2;
pub const MITOSIS_DIM: usize = 3 * PROPOSAL_DIM + 3 + 3 + 3 + 1 + 1 + 3 + DIFF_STATS + 2;

const INTENSITY_BINS: usize = 15;
const DIFF_BINS: usize = 8;
const ANGLE_BINS: usize = 12;
const RADIUS_BINS: usize = 5;
const RING_RADII: [u32; 2] = [1, 3];
const DIFF_STATS: usize = 6;
const EPS: f64 = 1e-9;

/// Block boundaries of the proposal vector used for per-block summaries.
const BLOCKS: [(usize, usize); 4] = [(0, 15), (15, 31), (31, 91), (91, 92)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Proposal,
    Move,
    Mitosis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureOptions {
    /// Keep the element-wise normalised difference in move vectors instead of
    /// its six summary statistics.
    pub full_difference: bool,
}

impl FeatureOptions {
    pub fn move_dim(&self) -> usize {
        if self.full_difference {
            MOVE_DIM_FULL
        } else {
            MOVE_DIM
        }
    }
}

fn normalize(hist: &mut [f64]) {
    let total: f64 = hist.iter().sum();
    if total > 0.0 {
        hist.iter_mut().for_each(|v| *v /= total);
    }
}

pub fn proposal_features(p: &Proposal, frame: &Frame) -> Result<FeatureVector> {
    if p.t != frame.t {
        return Err(Error::FrameMismatch(format!(
            "proposal {} is in frame {}, got frame {}",
            p.id, p.t, frame.t
        )));
    }
    let m = &p.mask;
    if !m.fits_in(frame.width, frame.height) {
        return Err(Error::MaskOutOfBounds {
            mask: (m.x0(), m.y0(), m.width(), m.height()),
            width: frame.width,
            height: frame.height,
        });
    }
    let mut out = Vec::with_capacity(PROPOSAL_DIM);

    let mut hist = [0.0; INTENSITY_BINS];
    for (x, y) in m.pixels() {
        let v = frame.at(x, y);
        hist[((v * INTENSITY_BINS as f64) as usize).min(INTENSITY_BINS - 1)] += 1.0;
    }
    normalize(&mut hist);
    out.extend_from_slice(&hist);

    let (boundary, _) = boundary_and_dilations(m, &[]);
    for r in RING_RADII {
        let dilated = m.dilate(r);
        let offsets = disk_offsets(r);
        let mut hist = [0.0; DIFF_BINS];
        for &(bx, by) in &boundary {
            let (mut sum, mut n) = (0.0, 0usize);
            for &(dx, dy) in &offsets {
                let (x, y) = (bx + dx, by + dy);
                if frame.in_bounds(x, y) && dilated.contains(x, y) && !m.contains(x, y) {
                    sum += frame.at(x, y);
                    n += 1;
                }
            }
            if n == 0 {
                continue;
            }
            let diff = (sum / n as f64 - frame.at(bx, by)).clamp(-0.5, 0.5);
            hist[(((diff + 0.5) * DIFF_BINS as f64) as usize).min(DIFF_BINS - 1)] += 1.0;
        }
        normalize(&mut hist);
        out.extend_from_slice(&hist);
    }

    out.extend_from_slice(&polar_histogram(m, &boundary));
    out.push(m.area() as f64 / (frame.width * frame.height) as f64);
    debug_assert_eq!(out.len(), PROPOSAL_DIM);
    Ok(FeatureVector {
        kind: FeatureKind::Proposal,
        values: out,
    })
}

/// Boundary distribution in polar coordinates around the centroid, with
/// radius normalised by the largest boundary radius. Computed in box-local
/// coordinates so it is exact under integer translation.
fn polar_histogram(m: &Mask, boundary: &[(i32, i32)]) -> [f64; ANGLE_BINS * RADIUS_BINS] {
    let (cx, cy) = m.local_centroid();
    let local: Vec<(f64, f64)> = boundary
        .iter()
        .map(|&(x, y)| ((x - m.x0()) as f64 - cx, (y - m.y0()) as f64 - cy))
        .collect();
    let max_r = local.iter().map(|(dx, dy)| dx.hypot(*dy)).fold(0.0, f64::max);
    let mut hist = [0.0; ANGLE_BINS * RADIUS_BINS];
    for &(dx, dy) in &local {
        let angle = dy.atan2(dx).rem_euclid(std::f64::consts::TAU);
        let a = ((angle / std::f64::consts::TAU * ANGLE_BINS as f64) as usize) % ANGLE_BINS;
        let r = if max_r > 0.0 {
            ((dx.hypot(dy) / max_r * RADIUS_BINS as f64) as usize).min(RADIUS_BINS - 1)
        } else {
            0
        };
        hist[a * RADIUS_BINS + r] += 1.0;
    }
    normalize(&mut hist);
    hist
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// IoU after shifting `b` so its centroid lands on `a`'s (rounded to whole pixels).
pub fn aligned_iou(a: &Mask, b: &Mask) -> f64 {
    let (ca, cb) = (a.centroid(), b.centroid());
    let dx = (ca.0 - cb.0).round() as i32;
    let dy = (ca.1 - cb.1).round() as i32;
    iou_mask(a, &b.translate(dx, dy))
}

pub fn normalized_difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (x.abs() + y.abs() + EPS))
        .collect()
}

/// Mean, max and the four per-block means of a normalised difference vector.
fn difference_summary(diff: &[f64]) -> [f64; DIFF_STATS] {
    let mean = diff.iter().sum::<f64>() / diff.len() as f64;
    let max = diff.iter().copied().fold(0.0, f64::max);
    let block = |(lo, hi): (usize, usize)| diff[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
    [
        mean,
        max,
        block(BLOCKS[0]),
        block(BLOCKS[1]),
        block(BLOCKS[2]),
        block(BLOCKS[3]),
    ]
}

/// Shortest distance from `p` to the segment `a`–`b`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let s = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0);
    distance(p, (a.0 + s * vx, a.1 + s * vy))
}

fn check_proposal_dim(v: &[f64]) -> Result<()> {
    if v.len() != PROPOSAL_DIM {
        return Err(Error::DimensionMismatch {
            expected: PROPOSAL_DIM,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Move-edge vector from precomputed proposal vectors.
pub fn move_features_with(
    pi: &Proposal,
    pj: &Proposal,
    feat_i: &[f64],
    feat_j: &[f64],
    prob_i: f64,
    prob_j: f64,
    opts: &FeatureOptions,
) -> Result<FeatureVector> {
    if pj.t != pi.t + 1 {
        return Err(Error::FrameMismatch(format!(
            "move edge {} -> {} spans frames {} -> {}",
            pi.id, pj.id, pi.t, pj.t
        )));
    }
    check_proposal_dim(feat_i)?;
    check_proposal_dim(feat_j)?;
    let mut out = Vec::with_capacity(opts.move_dim());
    out.extend_from_slice(feat_i);
    out.extend_from_slice(feat_j);
    out.push(distance(pi.centroid(), pj.centroid()));
    out.push(iou_mask(&pi.mask, &pj.mask));
    out.push(aligned_iou(&pi.mask, &pj.mask));
    let diff = normalized_difference(feat_i, feat_j);
    if opts.full_difference {
        out.extend_from_slice(&diff);
    } else {
        out.extend_from_slice(&difference_summary(&diff));
    }
    out.push(prob_i);
    out.push(prob_j);
    debug_assert_eq!(out.len(), opts.move_dim());
    Ok(FeatureVector {
        kind: FeatureKind::Move,
        values: out,
    })
}

pub fn move_features(
    pi: &Proposal,
    pj: &Proposal,
    prob_i: f64,
    prob_j: f64,
    fi: &Frame,
    fj: &Frame,
    opts: &FeatureOptions,
) -> Result<FeatureVector> {
    let a = proposal_features(pi, fi)?;
    let b = proposal_features(pj, fj)?;
    move_features_with(pi, pj, &a.values, &b.values, prob_i, prob_j, opts)
}

/// A member of a mitosis set together with its precomputed descriptor.
#[derive(Clone, Copy, Debug)]
pub struct Member<'a> {
    pub proposal: &'a Proposal,
    pub features: &'a [f64],
    pub prob: f64,
}

/// Mitosis-set vector (298 values): parent, first and second daughter
/// vectors; centroid distances, in-place IoUs and aligned IoUs for the pairs
/// (parent, d1), (parent, d2), (d1, d2); parent-to-daughter-segment distance;
/// `| |d1 d2| - (|p d1| + |p d2|) |`; the three probabilities; the daughter
/// similarity summary (6); the cosine between the two parent-to-daughter
/// directions; and mean daughter area over parent area.
///
/// Daughters are put in id order first, so the vector does not depend on the
/// order they are passed in.
pub fn mitosis_features_with(parent: Member, d1: Member, d2: Member) -> Result<FeatureVector> {
    let (d1, d2) = if d2.proposal.id < d1.proposal.id {
        (d2, d1)
    } else {
        (d1, d2)
    };
    let (p, a, b) = (parent.proposal, d1.proposal, d2.proposal);
    if a.t != p.t + 1 || b.t != p.t + 1 {
        return Err(Error::FrameMismatch(format!(
            "mitosis set ({}, {}, {}) spans frames ({}, {}, {})",
            p.id, a.id, b.id, p.t, a.t, b.t
        )));
    }
    if a.id == b.id {
        return Err(Error::InvalidArgument("mitosis daughters must be distinct".into()));
    }
    for m in [&parent, &d1, &d2] {
        check_proposal_dim(m.features)?;
    }
    let (cp, ca, cb) = (p.centroid(), a.centroid(), b.centroid());
    let mut out = Vec::with_capacity(MITOSIS_DIM);
    out.extend_from_slice(parent.features);
    out.extend_from_slice(d1.features);
    out.extend_from_slice(d2.features);
    let pairs = [(p, a), (p, b), (a, b)];
    for (x, y) in pairs {
        out.push(distance(x.centroid(), y.centroid()));
    }
    for (x, y) in pairs {
        out.push(iou_mask(&x.mask, &y.mask));
    }
    for (x, y) in pairs {
        out.push(aligned_iou(&x.mask, &y.mask));
    }
    out.push(point_segment_distance(cp, ca, cb));
    out.push((distance(ca, cb) - (distance(cp, ca) + distance(cp, cb))).abs());
    out.extend_from_slice(&[parent.prob, d1.prob, d2.prob]);
    out.extend_from_slice(&difference_summary(&normalized_difference(d1.features, d2.features)));
    let (ua, ub) = ((ca.0 - cp.0, ca.1 - cp.1), (cb.0 - cp.0, cb.1 - cp.1));
    let norm = ua.0.hypot(ua.1) * ub.0.hypot(ub.1);
    out.push(if norm > 0.0 {
        (ua.0 * ub.0 + ua.1 * ub.1) / norm
    } else {
        0.0
    });
    out.push((a.area() + b.area()) as f64 / (2.0 * p.area() as f64));
    debug_assert_eq!(out.len(), MITOSIS_DIM);
    Ok(FeatureVector {
        kind: FeatureKind::Mitosis,
        values: out,
    })
}

pub fn mitosis_features(
    parent: &Proposal,
    d1: &Proposal,
    d2: &Proposal,
    probs: [f64; 3],
    parent_frame: &Frame,
    daughter_frame: &Frame,
) -> Result<FeatureVector> {
    let fp = proposal_features(parent, parent_frame)?;
    let f1 = proposal_features(d1, daughter_frame)?;
    let f2 = proposal_features(d2, daughter_frame)?;
    mitosis_features_with(
        Member {
            proposal: parent,
            features: &fp.values,
            prob: probs[0],
        },
        Member {
            proposal: d1,
            features: &f1.values,
            prob: probs[1],
        },
        Member {
            proposal: d2,
            features: &f2.values,
            prob: probs[2],
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(cx: i32, cy: i32, r: i32) -> Mask {
        let mut px = Vec::new();
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                    px.push((x, y));
                }
            }
        }
        Mask::from_pixels(&px).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(PROPOSAL_DIM, 15 + 8 + 8 + 60 + 1);
        assert_eq!(MOVE_DIM, 195);
        assert_eq!(MITOSIS_DIM, 298);
    }

    #[test]
    fn uniform_proposal_is_one_hot() {
        let mut f = Frame::zeros(0, 40, 40);
        f.data.iter_mut().for_each(|v| *v = 0.5);
        let p = Proposal::new(0, 0, disk(20, 20, 5), 1.0);
        let v = proposal_features(&p, &f).unwrap().values;
        assert_eq!(v.len(), 92);
        assert_eq!(v[7], 1.0); // 0.5 * 15 = 7.5
        assert_eq!(v[..15].iter().sum::<f64>(), 1.0);
        assert_eq!(v[15 + 4], 1.0);
        assert_eq!(v[23 + 4], 1.0);
        assert!((v[31..91].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn area_fraction() {
        let f = Frame::zeros(0, 100, 100);
        let p = Proposal::new(0, 0, Mask::rect(10, 10, 10, 10).unwrap(), 1.0);
        assert_eq!(proposal_features(&p, &f).unwrap().values[91], 0.01);
    }

    #[test]
    fn out_of_bounds_mask() {
        let f = Frame::zeros(0, 10, 10);
        let p = Proposal::new(0, 0, Mask::rect(8, 8, 4, 4).unwrap(), 1.0);
        assert!(matches!(proposal_features(&p, &f), Err(Error::MaskOutOfBounds { .. })));
    }

    #[test]
    fn centroid_distance_and_translation() {
        let f0 = Frame::zeros(0, 60, 60);
        let f1 = Frame::zeros(1, 60, 60);
        let a = Proposal::new(0, 0, disk(20, 20, 4), 0.9);
        let b = Proposal::new(1, 1, disk(23, 24, 4), 0.8);
        let v = move_features(&a, &b, 0.9, 0.8, &f0, &f1, &FeatureOptions::default())
            .unwrap()
            .values;
        assert_eq!(v.len(), MOVE_DIM);
        assert!((v[184] - 5.0).abs() < 1e-12);
        assert_eq!(v[186], 1.0);
        assert!(v[187..193].iter().all(|&s| s < 1e-6));
        assert_eq!(&v[193..], &[0.9, 0.8]);

        let far = Proposal::new(2, 1, disk(50, 50, 4), 0.8);
        let v = move_features(&a, &far, 0.9, 0.8, &f0, &f1, &FeatureOptions::default())
            .unwrap()
            .values;
        assert_eq!(v[185], 0.0);

        let full = FeatureOptions { full_difference: true };
        let v = move_features(&a, &b, 0.9, 0.8, &f0, &f1, &full).unwrap().values;
        assert_eq!(v.len(), MOVE_DIM_FULL);
    }

    #[test]
    fn move_requires_adjacent_frames() {
        let f = Frame::zeros(0, 30, 30);
        let a = Proposal::new(0, 0, disk(10, 10, 3), 0.9);
        let b = Proposal::new(1, 0, disk(12, 10, 3), 0.9);
        assert!(matches!(
            move_features(&a, &b, 0.5, 0.5, &f, &f, &FeatureOptions::default()),
            Err(Error::FrameMismatch(_))
        ));
    }

    #[test]
    fn point_segment_examples() {
        assert!((point_segment_distance((0., 1.), (-3., 0.), (3., 0.)) - 1.0).abs() < 1e-15);
        assert_eq!(point_segment_distance((1., 0.), (-3., 0.), (3., 0.)), 0.0);
    }

    #[test]
    fn mitosis_geometry_blocks() {
        let f0 = Frame::zeros(0, 60, 60);
        let f1 = Frame::zeros(1, 60, 60);
        let p = Proposal::new(0, 0, disk(30, 30, 4), 0.9);
        let d1 = Proposal::new(1, 1, disk(25, 30, 3), 0.7);
        let d2 = Proposal::new(2, 1, disk(35, 30, 3), 0.6);
        let v = mitosis_features(&p, &d1, &d2, [0.9, 0.7, 0.6], &f0, &f1)
            .unwrap()
            .values;
        assert_eq!(v.len(), MITOSIS_DIM);
        assert_eq!(&v[276..279], &[5.0, 5.0, 10.0]);
        assert_eq!(v[285], 0.0); // parent on the segment
        assert_eq!(v[286], 0.0); // |10 - (5 + 5)|
        assert_eq!(&v[287..290], &[0.9, 0.7, 0.6]);
        assert_eq!(v[296], -1.0); // opposite directions
        let swapped = mitosis_features(&p, &d2, &d1, [0.9, 0.6, 0.7], &f0, &f1)
            .unwrap()
            .values;
        assert_eq!(v, swapped);
    }
}
