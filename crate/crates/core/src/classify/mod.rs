//! Probabilistic scoring of proposals, move edges and mitosis sets: training
//! labels derived from ground-truth markers and a bagged decision forest.

mod forest;

use std::collections::BTreeMap;

pub use forest::{roc_auc, train_forest, ForestConfig, ForestModel, Tree};

use crate::error::{Error, Result};
use crate::eval::{GroundTruth, Marker};
use crate::features::{FeatureKind, FeatureVector};
use crate::proposals::Proposal;

/// Labelled feature rows of one kind.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub kind: FeatureKind,
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl TrainingSet {
    pub fn new(kind: FeatureKind, dim: usize) -> Self {
        TrainingSet {
            kind,
            dim,
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, row: FeatureVector, label: bool) -> Result<()> {
        if row.values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: row.values.len(),
            });
        }
        if row.kind != self.kind {
            return Err(Error::InvalidArgument(format!(
                "{:?} vector added to a {:?} training set",
                row.kind, self.kind
            )));
        }
        self.rows.push(row.values);
        self.labels.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

/// The single marker strictly inside a proposal, if it has exactly one.
fn sole_marker(gt: &GroundTruth, p: &Proposal) -> Result<Option<Marker>> {
    let inside = gt.markers_inside(p.t, &p.mask)?;
    Ok(if inside.len() == 1 { Some(inside[0]) } else { None })
}

fn sole_markers(props: &[&Proposal], gt: &GroundTruth) -> BTreeMap<u64, Option<Marker>> {
    props
        .iter()
        .map(|p| (p.id, sole_marker(gt, p).ok().flatten()))
        .collect()
}

/// A proposal is a positive sample iff exactly one marker lies inside it.
pub fn label_proposals(props: &[Proposal], gt: &GroundTruth) -> Result<Vec<bool>> {
    props.iter().map(|p| sole_marker(gt, p).map(|m| m.is_some())).collect()
}

fn index(props: &[Proposal]) -> BTreeMap<u64, &Proposal> {
    props.iter().map(|p| (p.id, p)).collect()
}

/// A move edge is positive iff both ends hold exactly one marker each and
/// the two markers belong to the same cell.
pub fn label_move_edges(edges: &[(u64, u64)], props: &[Proposal], gt: &GroundTruth) -> Vec<bool> {
    let by_id = index(props);
    let involved: Vec<&Proposal> = by_id.values().copied().collect();
    let sole = sole_markers(&involved, gt);
    edges
        .iter()
        .map(
            |(i, j)| match (sole.get(i).copied().flatten(), sole.get(j).copied().flatten()) {
                (Some(a), Some(b)) => a.track_id == b.track_id,
                _ => false,
            },
        )
        .collect()
}

/// A mitosis set is positive iff each member holds exactly one marker and
/// the daughters' markers are two distinct children of the parent's cell,
/// born in the daughters' frame.
pub fn label_mitosis_sets(sets: &[(u64, u64, u64)], props: &[Proposal], gt: &GroundTruth) -> Vec<bool> {
    let by_id = index(props);
    let involved: Vec<&Proposal> = by_id.values().copied().collect();
    let sole = sole_markers(&involved, gt);
    let tracks: BTreeMap<u32, _> = gt.tracks.iter().map(|r| (r.label, *r)).collect();
    sets.iter()
        .map(|(p, d1, d2)| {
            let get = |id: &u64| sole.get(id).copied().flatten();
            let (Some(mp), Some(m1), Some(m2)) = (get(p), get(d1), get(d2)) else {
                return false;
            };
            let Some(t) = by_id.get(d1).map(|d| d.t) else {
                return false;
            };
            let child_of = |m: Marker| {
                tracks
                    .get(&m.track_id)
                    .is_some_and(|r| r.parent == mp.track_id && r.birth == t)
            };
            m1.track_id != m2.track_id && child_of(m1) && child_of(m2)
        })
        .collect()
}
