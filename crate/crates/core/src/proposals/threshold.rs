use serde::{Deserialize, Serialize};

use crate::geometry::{components_of, iou_mask, nms_masks, Mask};
use crate::proposals::{AreaBounds, Frame, Proposal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub num_levels: usize,
    #[serde(flatten)]
    pub area: AreaBounds,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            num_levels: 8,
            area: AreaBounds::default(),
        }
    }
}

const OTSU_BINS: usize = 256;

/// Otsu's threshold over a 256-bin histogram of `[0, 1]`. Returns the upper
/// edge of the last background bin (middle of the maximising range on ties),
/// or the mean intensity when no split separates the histogram.
pub fn otsu_threshold(data: &[f64]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let mut hist = [0u64; OTSU_BINS];
    for &v in data {
        hist[((v * OTSU_BINS as f64) as usize).min(OTSU_BINS - 1)] += 1;
    }
    let total = data.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut between = [0.0f64; OTSU_BINS - 1];
    for (k, &c) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += c as f64;
        sum0 += k as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        between[k] = w0 * w1 * (m0 - m1) * (m0 - m1);
    }
    let best = between.iter().copied().fold(0.0, f64::max);
    if best <= 0.0 {
        return data.iter().sum::<f64>() / total;
    }
    // separated modes give a plateau of equal splits; take its middle
    let tied: Vec<usize> = (0..OTSU_BINS - 1)
        .filter(|&k| between[k] >= best * (1.0 - 1e-12))
        .collect();
    let k = (tied[0] + tied[tied.len() - 1]) / 2;
    (k + 1) as f64 / OTSU_BINS as f64
}

/// Threshold sweep around Otsu's level: components at each level become
/// candidates scored by how many levels reproduce them (IoU > 0.5), then
/// duplicates are removed by mask NMS at 0.7. Ids are local to the frame.
pub fn multi_threshold_proposals(frame: &Frame, cfg: &ThresholdConfig) -> Vec<Proposal> {
    let levels = cfg.num_levels.max(1);
    let otsu = otsu_threshold(&frame.data);
    let thresholds: Vec<f64> = if levels == 1 {
        vec![otsu]
    } else {
        (0..levels)
            .map(|i| otsu * (0.5 + i as f64 / (levels - 1) as f64))
            .collect()
    };

    let mut per_level: Vec<Vec<Mask>> = Vec::with_capacity(levels);
    for &thr in &thresholds {
        let fg: Vec<bool> = frame.data.iter().map(|&v| v > thr).collect();
        per_level.push(
            components_of(frame.width, frame.height, &fg)
                .into_iter()
                .filter(|m| cfg.area.admits(m.area()))
                .collect(),
        );
    }

    let candidates: Vec<&Mask> = per_level.iter().flatten().collect();
    if candidates.is_empty() {
        return Vec::new();
    }
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| {
            let hits = per_level
                .iter()
                .filter(|level| level.iter().any(|m| iou_mask(c, m) > 0.5))
                .count();
            hits as f64 / levels as f64
        })
        .collect();

    let items: Vec<(u64, f64, &Mask)> = candidates
        .iter()
        .zip(&scores)
        .enumerate()
        .map(|(i, (m, &s))| (i as u64, s, *m))
        .collect();
    nms_masks(&items, 0.7)
        .into_iter()
        .enumerate()
        .map(|(new_id, i)| {
            Proposal::new(
                new_id as u64,
                frame.t,
                candidates[i as usize].clone(),
                scores[i as usize],
            )
        })
        .collect()
}
