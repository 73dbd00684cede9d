use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::GroundTruth;
use crate::graph::{EdgeKind, NodeRef, TrackingGraph};
use crate::proposals::Proposal;

/// How much of the reference the candidate graph can still express.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRecall {
    pub cells: usize,
    /// Cells that some proposal covers as its only marker.
    pub cells_found: usize,
    /// Cells covered by any proposal, alone or together with other cells.
    pub cells_found_ns: usize,
    pub r: f64,
    pub r_ns: f64,
    pub moves: usize,
    pub moves_found: usize,
    pub move_recall: f64,
    pub mitoses: usize,
    pub mitoses_found: usize,
    pub mitosis_recall: f64,
}

fn rate(found: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        found as f64 / total as f64
    }
}

/// Recall of cells, move links and divisions in the graph. A reference link
/// is found iff its cells are matched alone by proposals joined by an edge of
/// the same kind; a division iff a mitosis set joins the parent's proposal to
/// both daughters' proposals.
pub fn graph_recall(g: &TrackingGraph, props: &[Proposal], gt: &GroundTruth) -> Result<GraphRecall> {
    // (track, frame) -> proposals holding only that marker
    let mut alone: BTreeMap<(u32, usize), Vec<u64>> = BTreeMap::new();
    let mut covered = BTreeSet::new();
    for p in props.iter().filter(|p| g.node_index(p.id).is_some()) {
        let inside = gt.markers_inside(p.t, &p.mask)?;
        for m in &inside {
            covered.insert((m.track_id, p.t));
        }
        if let [m] = inside.as_slice() {
            alone.entry((m.track_id, p.t)).or_default().push(p.id);
        }
    }
    let cells: usize = gt.markers.iter().map(Vec::len).sum();

    let moves: BTreeSet<(u64, u64)> = g
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Move)
        .filter_map(|e| match (e.from, e.to) {
            (NodeRef::Proposal(a), NodeRef::Proposal(b)) => Some((a, b)),
            _ => None,
        })
        .collect();
    let present: BTreeSet<(u32, usize)> = gt
        .markers
        .iter()
        .enumerate()
        .flat_map(|(t, f)| f.iter().map(move |m| (m.track_id, t)))
        .collect();
    let none = Vec::new();
    let candidates = |k: (u32, usize)| alone.get(&k).unwrap_or(&none);
    let linked = |a: (u32, usize), b: (u32, usize)| {
        candidates(a)
            .iter()
            .any(|&p| candidates(b).iter().any(|&q| moves.contains(&(p, q))))
    };
    let (mut n_moves, mut moves_found) = (0, 0);
    for &(label, t) in &present {
        if present.contains(&(label, t + 1)) {
            n_moves += 1;
            moves_found += linked((label, t), (label, t + 1)) as usize;
        }
    }

    let sets: BTreeSet<(u64, u64, u64)> = g
        .mitosis_sets
        .iter()
        .map(|s| (s.parent, s.d1.min(s.d2), s.d1.max(s.d2)))
        .collect();
    let (mut n_div, mut div_found) = (0, 0);
    for (parent, kids) in gt.children() {
        let Some(rec) = gt.track(parent) else { continue };
        let (t, u) = (rec.end, rec.end + 1);
        let [a, b] = kids.as_slice() else { continue };
        if !present.contains(&(parent, t)) || !present.contains(&(*a, u)) || !present.contains(&(*b, u)) {
            continue;
        }
        n_div += 1;
        let hit = candidates((parent, t)).iter().any(|&p| {
            candidates((*a, u)).iter().any(|&x| {
                candidates((*b, u))
                    .iter()
                    .any(|&y| sets.contains(&(p, x.min(y), x.max(y))))
            })
        });
        div_found += hit as usize;
    }

    Ok(GraphRecall {
        cells,
        cells_found: alone.len(),
        cells_found_ns: covered.len(),
        r: rate(alone.len(), cells),
        r_ns: rate(covered.len(), cells),
        moves: n_moves,
        moves_found,
        move_recall: rate(moves_found, n_moves),
        mitoses: n_div,
        mitoses_found: div_found,
        mitosis_recall: rate(div_found, n_div),
    })
}
