use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geometry::Mask;
use crate::par;
use crate::proposals::{by_frame, Proposal};

/// Symmetric, irreflexive set of same-frame proposal pairs that may not be
/// selected together. Pairs are stored as `(min_id, max_id)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConflictMatrix {
    pairs: BTreeSet<(u64, u64)>,
}

impl ConflictMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        ConflictMatrix {
            pairs: pairs
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
        }
    }

    pub fn contains(&self, a: u64, b: u64) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.pairs.iter().copied()
    }
}

/// The three overlap tests: IoU above `c1`, or either mask more than `c2`
/// covered by the other.
pub fn masks_conflict(a: &Mask, b: &Mask, c1: f64, c2: f64) -> bool {
    let inter = a.intersection(b);
    if inter == 0 {
        return false;
    }
    let inter = inter as f64;
    let union = a.area() as f64 + b.area() as f64 - inter;
    inter / union > c1 || inter / a.area() as f64 > c2 || inter / b.area() as f64 > c2
}

pub fn conflicts(props: &[Proposal], c1: f64, c2: f64) -> ConflictMatrix {
    let frames: Vec<Vec<&Proposal>> = by_frame(props).into_values().collect();
    let per_frame = par::map(&frames, |group| {
        let mut pairs = Vec::new();
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if masks_conflict(&a.mask, &b.mask, c1, c2) {
                    pairs.push((a.id, b.id));
                }
            }
        }
        pairs
    });
    ConflictMatrix::from_pairs(per_frame.into_iter().flatten())
}
