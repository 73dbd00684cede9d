use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::geometry::{disk_offsets, Mask};
use crate::par;
use crate::proposals::{renumber, Frame, Proposal};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorruptionConfig {
    pub seed: u64,
    /// Probability of losing a cell's proposal.
    pub drop: f64,
    /// Expected clutter blobs per reference cell.
    pub clutter: f64,
    /// Probability that a touching pair is fused into one proposal.
    pub merge: f64,
    /// Probability that a proposal is bisected.
    pub split: f64,
    /// Standard deviation of the mask shift, px.
    pub jitter: f64,
    /// Standard deviation of the additive score noise.
    pub score_noise: f64,
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("drop", self.drop),
            ("clutter", self.clutter),
            ("merge", self.merge),
            ("split", self.split),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("corruption.{name} = {v} is not in [0, 1]")));
            }
        }
        if !(self.jitter >= 0.0 && self.score_noise >= 0.0) {
            return Err(Error::Config(
                "corruption jitter and score noise must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Score of an uncorrupted proposal before noise.
const CELL_SCORE: f64 = 0.9;

/// Two regions touch when they come within two pixels of each other.
fn touching(a: &Mask, b: &Mask) -> bool {
    a.dilate(2).intersection(b) > 0
}

/// Halves of a mask on either side of the line through its centroid
/// perpendicular to the major axis.
fn bisect(m: &Mask) -> Option<(Mask, Mask)> {
    let (cx, cy) = m.centroid();
    let n = m.area() as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in m.pixels() {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let angle = 0.5 * (2.0 * sxy / n).atan2((sxx - syy) / n);
    let (ux, uy) = (angle.cos(), angle.sin());
    let (a, b): (Vec<(i32, i32)>, Vec<(i32, i32)>) = m
        .pixels()
        .partition(|&(x, y)| (x as f64 - cx) * ux + (y as f64 - cy) * uy < 0.0);
    Some((Mask::from_pixels(&a).ok()?, Mask::from_pixels(&b).ok()?))
}

/// Ideal proposals (one per annotated cell region) perturbed by, in order:
/// fusion of touching pairs, drops, bisection, shifts, and added clutter
/// disks; scores get additive noise. Fused and bisected masks replace their
/// sources. Frames are processed independently with their own random stream.
pub fn corrupt(gt: &GroundTruth, frames: &[Frame], cfg: &CorruptionConfig) -> Result<Vec<Proposal>> {
    cfg.validate()?;
    if frames.len() != gt.num_frames() {
        return Err(Error::FrameMismatch(format!(
            "{} frames but ground truth covers {}",
            frames.len(),
            gt.num_frames()
        )));
    }
    if let Some(t) = (0..frames.len()).find(|t| !gt.label_grids.contains_key(t)) {
        return Err(Error::MissingGroundTruth(format!("frame {t} has no annotated masks")));
    }
    let (w, h) = (gt.width, gt.height);
    let per_frame = par::map_range(frames.len(), |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t as u64);
        let score_noise = Normal::new(0.0, cfg.score_noise.max(1e-300)).expect("valid sigma");
        let shift = Normal::new(0.0, cfg.jitter.max(1e-300)).expect("valid sigma");

        let cells: Vec<Mask> = gt.label_grids[&t].masks_by_label().into_values().collect();
        let mut fused = vec![false; cells.len()];
        let mut masks: Vec<(Mask, f64)> = Vec::new();
        if cfg.merge > 0.0 {
            for i in 0..cells.len() {
                for j in i + 1..cells.len() {
                    if fused[i] || fused[j] || !touching(&cells[i], &cells[j]) {
                        continue;
                    }
                    if rng.gen::<f64>() < cfg.merge {
                        fused[i] = true;
                        fused[j] = true;
                        masks.push((cells[i].union(&cells[j]), CELL_SCORE));
                    }
                }
            }
        }
        masks.extend(
            cells
                .iter()
                .zip(&fused)
                .filter(|(_, &f)| !f)
                .map(|(m, _)| (m.clone(), CELL_SCORE)),
        );

        let mut out: Vec<(Mask, f64)> = Vec::new();
        for (m, s) in masks {
            if cfg.drop > 0.0 && rng.gen::<f64>() < cfg.drop {
                continue;
            }
            if cfg.split > 0.0 && rng.gen::<f64>() < cfg.split {
                if let Some((a, b)) = bisect(&m) {
                    out.push((a, s));
                    out.push((b, s));
                    continue;
                }
            }
            out.push((m, s));
        }
        if cfg.jitter > 0.0 {
            out = out
                .into_iter()
                .filter_map(|(m, s)| {
                    let (dx, dy) = (shift.sample(&mut rng).round(), shift.sample(&mut rng).round());
                    m.translate(dx as i32, dy as i32).clip(w, h).map(|m| (m, s))
                })
                .collect();
        }
        if cfg.clutter > 0.0 {
            let radii: Vec<f64> = cells
                .iter()
                .map(|m| (m.area() as f64 / std::f64::consts::PI).sqrt())
                .collect();
            for &r in &radii {
                if rng.gen::<f64>() >= cfg.clutter {
                    continue;
                }
                let r = (r * rng.gen_range(0.6..1.0)).max(2.0);
                let (cx, cy) = (rng.gen_range(0..w) as i32, rng.gen_range(0..h) as i32);
                let pixels: Vec<(i32, i32)> = disk_offsets(r.round() as u32)
                    .into_iter()
                    .map(|(dx, dy)| (cx + dx, cy + dy))
                    .collect();
                let disk = Mask::from_pixels(&pixels).expect("non-empty disk");
                if let Some(m) = disk.clip(w, h) {
                    out.push((m, rng.gen_range(0.2..0.8)));
                }
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, (m, s))| {
                let s = if cfg.score_noise > 0.0 {
                    (s + score_noise.sample(&mut rng)).clamp(0.0, 1.0)
                } else {
                    s
                };
                Proposal::new(i as u64, t, m, s)
            })
            .collect::<Vec<_>>()
    });
    Ok(renumber(per_frame.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Marker, TrackRecord};
    use crate::geometry::LabeledGrid;
    use crate::sim::{simulate, SimConfig};

    fn sequence() -> (Vec<Frame>, GroundTruth) {
        simulate(&SimConfig {
            frames: 10,
            width: 80,
            height: 60,
            initial_cells: 6,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_rates_reproduce_reference() {
        let (frames, gt) = sequence();
        let props = corrupt(&gt, &frames, &CorruptionConfig::default()).unwrap();
        assert_eq!(props.len(), gt.markers.iter().map(Vec::len).sum::<usize>());
        for p in &props {
            let cells = gt.label_grids[&p.t].masks_by_label();
            assert!(cells.values().any(|c| c == &p.mask));
            assert_eq!(gt.markers_inside(p.t, &p.mask).unwrap().len(), 1);
        }
    }

    #[test]
    fn drop_everything() {
        let (frames, gt) = sequence();
        let cfg = CorruptionConfig {
            drop: 1.0,
            ..Default::default()
        };
        assert!(corrupt(&gt, &frames, &cfg).unwrap().is_empty());
    }

    #[test]
    fn merge_touching_pair() {
        let mut grid = LabeledGrid::zeros(30, 10);
        grid.paint(&Mask::rect(0, 0, 10, 10).unwrap(), 1);
        grid.paint(&Mask::rect(10, 0, 8, 10).unwrap(), 2);
        grid.paint(&Mask::rect(25, 0, 5, 5).unwrap(), 3);
        let gt = GroundTruth {
            width: 30,
            height: 10,
            markers: vec![vec![
                Marker {
                    track_id: 1,
                    x: 4,
                    y: 4,
                },
                Marker {
                    track_id: 2,
                    x: 14,
                    y: 4,
                },
                Marker {
                    track_id: 3,
                    x: 27,
                    y: 2,
                },
            ]],
            label_grids: [(0, grid)].into(),
            tracks: (1..=3)
                .map(|label| TrackRecord {
                    label,
                    birth: 0,
                    end: 0,
                    parent: 0,
                })
                .collect(),
        };
        let cfg = CorruptionConfig {
            merge: 1.0,
            ..Default::default()
        };
        let props = corrupt(&gt, &[Frame::zeros(0, 30, 10)], &cfg).unwrap();
        assert_eq!(props.len(), 2);
        let counts: Vec<usize> = props
            .iter()
            .map(|p| gt.markers_inside(0, &p.mask).unwrap().len())
            .collect();
        assert_eq!(counts.iter().filter(|&&c| c == 2).count(), 1);
        assert_eq!(counts.iter().filter(|&&c| c == 1).count(), 1);
    }

    #[test]
    fn bisection_halves() {
        let m = Mask::rect(0, 0, 10, 4).unwrap();
        let (a, b) = bisect(&m).unwrap();
        assert_eq!((a.area(), b.area()), (20, 20));
        assert_eq!(a.intersection(&b), 0);
        assert!(a.width() == 5 && b.width() == 5);
    }

    #[test]
    fn deterministic_and_frame_parallel_safe() {
        let (frames, gt) = sequence();
        let cfg = CorruptionConfig {
            seed: 9,
            drop: 0.2,
            clutter: 0.3,
            merge: 0.2,
            split: 0.1,
            jitter: 1.0,
            score_noise: 0.1,
        };
        let a = corrupt(&gt, &frames, &cfg).unwrap();
        assert_eq!(a, corrupt(&gt, &frames, &cfg).unwrap());
        assert_eq!(a, par::sequential(|| corrupt(&gt, &frames, &cfg).unwrap()));
        assert!(a
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.score) && p.mask.fits_in(80, 60)));
    }
}
