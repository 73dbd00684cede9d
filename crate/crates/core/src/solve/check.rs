//! Constraint checker that reads the graph directly, independent of the
//! program encoding and of any solver's bookkeeping.

use std::collections::BTreeMap;

use crate::graph::{EdgeKind, NodeRef, TrackingGraph};
use crate::solve::ilp::{ConstraintTag, Selection};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: ConstraintTag,
    pub detail: String,
}

/// Every violated selection rule: no conflicting pair selected, one incoming
/// edge per selected proposal and none for unselected ones, incoming equals
/// outgoing with second-daughter edges excluded, and mitosis edges selected in
/// pairs. Edges touching an unselected proposal are reported as well.
pub fn check_selection(g: &TrackingGraph, sel: &Selection) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut v = |rule, detail: String| out.push(Violation { rule, detail });
    for (a, b) in g.conflicts.iter() {
        if sel.nodes.contains(&a) && sel.nodes.contains(&b) {
            v(
                ConstraintTag::Conflict,
                format!("conflicting proposals {a} and {b} both selected"),
            );
        }
    }
    let mut incoming: BTreeMap<u64, usize> = BTreeMap::new();
    let mut outgoing: BTreeMap<u64, usize> = BTreeMap::new();
    let mut halves: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
    for (k, e) in g.edges.iter().enumerate() {
        let chosen = sel.edges.contains(&k);
        if e.kind == EdgeKind::Mitosis {
            let entry = halves.entry(e.set_id.unwrap_or(usize::MAX)).or_default();
            match e.daughter {
                Some(1) => entry.0 |= chosen,
                _ => entry.1 |= chosen,
            }
        }
        if !chosen {
            continue;
        }
        if let NodeRef::Proposal(id) = e.to {
            *incoming.entry(id).or_default() += 1;
        }
        if let NodeRef::Proposal(id) = e.from {
            if e.daughter != Some(2) {
                *outgoing.entry(id).or_default() += 1;
            }
        }
    }
    for id in sel
        .edges
        .iter()
        .filter_map(|&k| g.edges.get(k))
        .flat_map(|e| [e.from, e.to])
    {
        if let NodeRef::Proposal(id) = id {
            if !sel.nodes.contains(&id) {
                v(
                    ConstraintTag::Incoming,
                    format!("selected edge touches unselected proposal {id}"),
                );
            }
        }
    }
    for node in &g.nodes {
        let want = sel.nodes.contains(&node.id) as usize;
        let (i, o) = (
            incoming.get(&node.id).copied().unwrap_or(0),
            outgoing.get(&node.id).copied().unwrap_or(0),
        );
        if i != want {
            v(
                ConstraintTag::Incoming,
                format!("proposal {} has {i} incoming edges selected, expected {want}", node.id),
            );
        }
        if i != o {
            v(
                ConstraintTag::Flow,
                format!("proposal {} has {i} incoming and {o} outgoing edges", node.id),
            );
        }
    }
    for (set, (a, b)) in halves {
        if a != b {
            v(
                ConstraintTag::Mitosis,
                format!("mitosis set {set} selected on one side only"),
            );
        }
    }
    for id in &sel.nodes {
        if g.node(*id).is_none() {
            v(
                ConstraintTag::Other,
                format!("selected proposal {id} is not in the graph"),
            );
        }
    }
    for k in &sel.edges {
        if *k >= g.edges.len() {
            v(ConstraintTag::Other, format!("selected edge {k} is not in the graph"));
        }
    }
    out
}
