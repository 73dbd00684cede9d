use serde::{Deserialize, Serialize};

use crate::geometry::{nms_masks, Mask};
use crate::proposals::{AreaBounds, Frame, Proposal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogBlobConfig {
    pub sigmas: Vec<f64>,
    /// Minimum scale-normalised response for a seed.
    pub min_response: f64,
    #[serde(flatten)]
    pub area: AreaBounds,
}

impl Default for LogBlobConfig {
    fn default() -> Self {
        LogBlobConfig {
            sigmas: vec![1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0],
            min_response: 0.03,
            area: AreaBounds::default(),
        }
    }
}

fn gaussian_kernels(sigma: f64) -> (Vec<f64>, Vec<f64>) {
    let radius = (4.0 * sigma).ceil() as i64;
    let g: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|v| v / norm).collect();
    let mut d2: Vec<f64> = (-radius..=radius)
        .zip(&g)
        .map(|(x, gv)| ((x * x) as f64 / sigma.powi(4) - 1.0 / (sigma * sigma)) * gv)
        .collect();
    // zero-sum so flat regions respond exactly 0
    let mean = d2.iter().sum::<f64>() / d2.len() as f64;
    d2.iter_mut().for_each(|v| *v -= mean);
    (g, d2)
}

fn convolve_rows(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let r = (k.len() / 2) as i64;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                let sx = (x as i64 + i as i64 - r).clamp(0, w as i64 - 1) as usize;
                acc += kv * row[sx];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn convolve_cols(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let r = (k.len() / 2) as i64;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for (i, kv) in k.iter().enumerate() {
            let sy = (y as i64 + i as i64 - r).clamp(0, h as i64 - 1) as usize;
            let src_row = &src[sy * w..(sy + 1) * w];
            let dst = &mut out[y * w..(y + 1) * w];
            for (d, s) in dst.iter_mut().zip(src_row) {
                *d += kv * s;
            }
        }
    }
    out
}

/// Scale-normalised negative Laplacian of Gaussian; bright blobs respond positively.
pub(crate) fn log_response(frame: &Frame, sigma: f64) -> Vec<f64> {
    let (g, d2) = gaussian_kernels(sigma);
    let (w, h) = (frame.width, frame.height);
    let gx = convolve_rows(&frame.data, w, h, &g);
    let dxx = convolve_rows(&frame.data, w, h, &d2);
    let lyy = convolve_cols(&gx, w, h, &d2);
    let lxx = convolve_cols(&dxx, w, h, &g);
    let s2 = sigma * sigma;
    lxx.iter().zip(&lyy).map(|(a, b)| -s2 * (a + b)).collect()
}

fn median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Region grown from `seed` over 8-connected pixels at or above `level`,
/// limited to a disk of `radius` around the seed.
fn grow_region(frame: &Frame, seed: (i32, i32), level: f64, radius: f64) -> Vec<(i32, i32)> {
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![seed];
    let mut out = Vec::new();
    seen.insert(seed);
    let r2 = radius * radius;
    while let Some((x, y)) = stack.pop() {
        out.push((x, y));
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if !frame.in_bounds(nx, ny) || seen.contains(&(nx, ny)) {
                    continue;
                }
                let d2 = ((nx - seed.0).pow(2) + (ny - seed.1).pow(2)) as f64;
                if d2 <= r2 && frame.at(nx, ny) >= level {
                    seen.insert((nx, ny));
                    stack.push((nx, ny));
                }
            }
        }
    }
    out
}

/// Multi-scale LoG blob proposals: scale-space maxima seed regions grown to
/// the half-peak level above the frame median; duplicates removed by mask NMS
/// at 0.7. Scores are responses divided by the strongest response in the frame.
pub fn log_blob_proposals(frame: &Frame, cfg: &LogBlobConfig) -> Vec<Proposal> {
    if cfg.sigmas.is_empty() || frame.data.is_empty() {
        return Vec::new();
    }
    let (w, h) = (frame.width as i32, frame.height as i32);
    let stack: Vec<Vec<f64>> = cfg.sigmas.iter().map(|&s| log_response(frame, s)).collect();

    let mut seeds = Vec::new();
    for (si, resp) in stack.iter().enumerate() {
        for y in 0..h {
            for x in 0..w {
                let v = resp[(y * w + x) as usize];
                if v < cfg.min_response {
                    continue;
                }
                let lo = si.saturating_sub(1);
                let hi = (si + 1).min(stack.len() - 1);
                let is_max = (lo..=hi).all(|sj| {
                    (-1..=1).all(|dy| {
                        (-1..=1).all(|dx| {
                            let (nx, ny) = (x + dx, y + dy);
                            if (sj == si && dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h {
                                return true;
                            }
                            stack[sj][(ny * w + nx) as usize] <= v
                        })
                    })
                });
                if is_max {
                    seeds.push((x, y, si, v));
                }
            }
        }
    }
    if seeds.is_empty() {
        return Vec::new();
    }
    let peak_response = seeds.iter().map(|s| s.3).fold(f64::MIN, f64::max);
    let background = median(&frame.data);

    let mut candidates: Vec<(Mask, f64)> = Vec::new();
    for &(x, y, si, v) in &seeds {
        let peak = frame.at(x, y);
        let level = background + 0.5 * (peak - background);
        let radius = (2.5 * cfg.sigmas[si]).max(2.0);
        let region = grow_region(frame, (x, y), level, radius);
        if !cfg.area.admits(region.len()) {
            continue;
        }
        let mask = Mask::from_pixels(&region).expect("region contains its seed");
        candidates.push((mask, (v / peak_response).clamp(0.0, 1.0)));
    }
    let items: Vec<(u64, f64, &Mask)> = candidates
        .iter()
        .enumerate()
        .map(|(i, (m, s))| (i as u64, *s, m))
        .collect();
    nms_masks(&items, 0.7)
        .into_iter()
        .enumerate()
        .map(|(new_id, i)| {
            let (m, s) = &candidates[i as usize];
            Proposal::new(new_id as u64, frame.t, m.clone(), *s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_with(w: usize, h: usize, f: impl Fn(f64, f64) -> f64) -> Frame {
        let data = (0..w * h)
            .map(|i| f((i % w) as f64, (i / w) as f64).clamp(0.0, 1.0))
            .collect();
        Frame::new(0, w, h, data).unwrap()
    }

    #[test]
    fn flat_frame_has_no_blobs() {
        let f = frame_with(32, 32, |_, _| 0.4);
        assert!(log_blob_proposals(&f, &LogBlobConfig::default()).is_empty());
    }

    #[test]
    fn disk_blob_is_found_at_center() {
        // binary disk of radius 6: LoG optimum at sigma = 6/sqrt(2)
        let r = 6.0;
        let (cx, cy) = (25.0, 22.0);
        let f = frame_with(50, 45, |x, y| {
            if (x - cx).powi(2) + (y - cy).powi(2) <= r * r {
                0.9
            } else {
                0.1
            }
        });
        let cfg = LogBlobConfig {
            sigmas: vec![2.0, 3.0, r / 2f64.sqrt(), 5.5, 7.0],
            ..Default::default()
        };
        let props = log_blob_proposals(&f, &cfg);
        assert_eq!(props.len(), 1, "{props:?}");
        let (px, py) = props[0].centroid();
        assert!((px - cx).abs() <= 1.0 && (py - cy).abs() <= 1.0, "{px} {py}");
    }

    #[test]
    fn dumbbell_splits_into_lobes() {
        let s = 3.0;
        let f = frame_with(60, 40, |x, y| {
            let g = |cx: f64| (-((x - cx).powi(2) + (y - 20.0).powi(2)) / (2.0 * s * s)).exp();
            0.05 + 0.8 * (g(25.0) + g(25.0 + 4.0 * s))
        });
        let props = log_blob_proposals(&f, &LogBlobConfig::default());
        assert!(props.len() >= 2, "{}", props.len());
        assert!(props.iter().any(|p| p.mask.contains(25, 20)));
        assert!(props.iter().any(|p| p.mask.contains(37, 20)));
    }
}
