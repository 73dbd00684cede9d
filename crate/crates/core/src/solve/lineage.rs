use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::TrackRecord;
use crate::graph::{EdgeKind, NodeRef, TrackingGraph};
use crate::solve::check::check_selection;
use crate::solve::ilp::Selection;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Exit,
    Death,
    Division,
    SequenceEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Track {
    /// Positive label, assigned in order of first appearance.
    pub id: u32,
    pub start: usize,
    /// Proposal id in each frame from `start` on.
    pub proposals: Vec<u64>,
    pub parent: Option<u32>,
    pub end: EndReason,
}

impl Track {
    pub fn end_frame(&self) -> usize {
        self.start + self.proposals.len() - 1
    }
}

/// Selected tracks; each tree of parent links is the lineage of one cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LineageForest {
    pub tracks: Vec<Track>,
}

impl LineageForest {
    pub fn track_table(&self) -> Vec<TrackRecord> {
        self.tracks
            .iter()
            .map(|t| TrackRecord {
                label: t.id,
                birth: t.start,
                end: t.end_frame(),
                parent: t.parent.unwrap_or(0),
            })
            .collect()
    }

    pub fn num_proposals(&self) -> usize {
        self.tracks.iter().map(|t| t.proposals.len()).sum()
    }

    /// Proposal id to track label.
    pub fn labels(&self) -> BTreeMap<u64, u32> {
        self.tracks
            .iter()
            .flat_map(|t| t.proposals.iter().map(move |&p| (p, t.id)))
            .collect()
    }
}

/// Splits a feasible selection into maximal move chains. Tracks are numbered
/// in (frame, proposal id) order of their first proposal.
pub fn extract_lineage(g: &TrackingGraph, sel: &Selection) -> Result<LineageForest> {
    let violations = check_selection(g, sel);
    if let Some(v) = violations.first() {
        return Err(Error::InfeasibleSolution(format!(
            "{} violated rule(s), first: {}",
            violations.len(),
            v.detail
        )));
    }
    let mut in_edge: BTreeMap<u64, usize> = BTreeMap::new();
    let mut out_edge: BTreeMap<u64, usize> = BTreeMap::new();
    for &k in &sel.edges {
        let e = &g.edges[k];
        if let NodeRef::Proposal(id) = e.to {
            in_edge.insert(id, k);
        }
        if let NodeRef::Proposal(id) = e.from {
            if e.daughter != Some(2) {
                out_edge.insert(id, k);
            }
        }
    }
    let mut order: Vec<(usize, u64)> = sel.nodes.iter().map(|&id| (g.node(id).unwrap().t, id)).collect();
    order.sort_unstable();

    let mut tracks: Vec<Track> = Vec::new();
    let mut track_of: BTreeMap<u64, usize> = BTreeMap::new();
    for &(t, id) in &order {
        let e = &g.edges[in_edge[&id]];
        let from = match e.from {
            NodeRef::Proposal(p) => Some(p),
            _ => None,
        };
        let idx = match (e.kind, from) {
            (EdgeKind::Move, Some(p)) => {
                let idx = track_of[&p];
                tracks[idx].proposals.push(id);
                idx
            }
            (kind, from) => {
                let parent = match (kind, from) {
                    (EdgeKind::Mitosis, Some(p)) => Some(tracks[track_of[&p]].id),
                    _ => None,
                };
                tracks.push(Track {
                    id: tracks.len() as u32 + 1,
                    start: t,
                    proposals: vec![id],
                    parent,
                    end: EndReason::SequenceEnd,
                });
                tracks.len() - 1
            }
        };
        track_of.insert(id, idx);
        let out = &g.edges[out_edge[&id]];
        tracks[idx].end = match out.kind {
            EdgeKind::Exit if t + 1 >= g.num_frames => EndReason::SequenceEnd,
            EdgeKind::Exit => EndReason::Exit,
            EdgeKind::Death => EndReason::Death,
            EdgeKind::Mitosis => EndReason::Division,
            _ => tracks[idx].end,
        };
    }
    Ok(LineageForest { tracks })
}
