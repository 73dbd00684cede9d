use std::cmp::Ordering;

use crate::geometry::{iou_box, iou_mask, BBox, Mask};

/// Greedy non-maximum suppression over arbitrary shapes.
///
/// Items are visited by descending score (equal scores: lower id first). An
/// item is suppressed iff its overlap with an already kept item exceeds
/// `threshold`. Returns kept ids in kept order.
pub fn nms_by<S>(items: &[(u64, f64, S)], threshold: f64, overlap: impl Fn(&S, &S) -> f64) -> Vec<u64> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .1
            .partial_cmp(&items[a].1)
            .unwrap_or(Ordering::Equal)
            .then(items[a].0.cmp(&items[b].0))
    });
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if kept.iter().all(|&k| overlap(&items[k].2, &items[i].2) <= threshold) {
            kept.push(i);
        }
    }
    kept.into_iter().map(|k| items[k].0).collect()
}

pub fn nms_boxes(items: &[(u64, f64, BBox)], threshold: f64) -> Vec<u64> {
    nms_by(items, threshold, iou_box)
}

pub fn nms_masks(items: &[(u64, f64, &Mask)], threshold: f64) -> Vec<u64> {
    nms_by(items, threshold, |a, b| iou_mask(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: f64, w: f64) -> BBox {
        BBox::new(x, 0.0, w, 10.0).unwrap()
    }

    #[test]
    fn identical_boxes_keep_best() {
        let items = [(1, 0.8, b(0., 10.)), (2, 0.9, b(0., 10.))];
        assert_eq!(nms_boxes(&items, 0.8), vec![2]);
    }

    #[test]
    fn low_overlap_keeps_all() {
        let items = [(1, 0.5, b(0., 10.)), (2, 0.9, b(20., 10.)), (3, 0.7, b(9., 10.))];
        assert_eq!(nms_boxes(&items, 0.8), vec![2, 3, 1]);
    }

    #[test]
    fn chain_suppression_keeps_a_and_c() {
        // Jaccard distance is a metric, so no real shapes realise
        // IoU(A,B) = IoU(B,C) = 0.85 with IoU(A,C) = 0.1; drive the sweep with
        // a tabulated overlap instead.
        let table = |a: &usize, b: &usize| match (a.min(b), a.max(b)) {
            (0, 1) | (1, 2) => 0.85,
            (0, 2) => 0.1,
            _ => 1.0,
        };
        let items = [(0u64, 0.9, 0usize), (1, 0.8, 1), (2, 0.7, 2)];
        assert_eq!(nms_by(&items, 0.8, table), vec![0, 2]);
    }

    #[test]
    fn chain_suppression_with_boxes() {
        let items = [
            (0, 0.9, BBox::new(0., 0., 10., 10.).unwrap()),
            (1, 0.8, BBox::new(0.7, 0., 10., 10.).unwrap()),
            (2, 0.7, BBox::new(9., 0., 10., 10.).unwrap()),
        ];
        assert!(iou_box(&items[0].2, &items[1].2) > 0.8);
        assert_eq!(nms_boxes(&items, 0.8), vec![0, 2]);
    }

    #[test]
    fn ties_prefer_lower_id() {
        let items = [(7, 0.5, b(0., 10.)), (3, 0.5, b(0., 10.))];
        assert_eq!(nms_boxes(&items, 0.5), vec![3]);
    }
}
