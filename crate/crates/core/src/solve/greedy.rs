//! Sequential path extraction: repeatedly take the cheapest source-to-sink
//! path through unused, non-conflicting proposals while it lowers the cost.
//! A path may also start at a selected proposal's mitosis set, replacing that
//! proposal's terminal edge with the two daughter edges.

use std::collections::BTreeSet;

use crate::graph::{EdgeKind, NodeRef, TrackingGraph};
use crate::solve::ilp::{formulate_costs, objective, Selection};
use crate::solve::{Solution, Status};

struct Paths {
    best: Vec<f64>,
    /// Next edge on the best path (a move or terminal edge).
    next: Vec<Option<usize>>,
}

struct Greedy<'g> {
    g: &'g TrackingGraph,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    /// Node positions in descending frame order.
    backward: Vec<usize>,
    available: Vec<bool>,
    selected: Vec<bool>,
    edges: BTreeSet<usize>,
    /// Selected terminal edge of each selected node, if it ends there.
    ends: Vec<Option<usize>>,
    conflicts: Vec<Vec<usize>>,
}

impl<'g> Greedy<'g> {
    fn new(g: &'g TrackingGraph) -> Self {
        let n = g.nodes.len();
        let adj = g.adjacency();
        let mut backward: Vec<usize> = (0..n).collect();
        backward.sort_by_key(|&i| (std::cmp::Reverse(g.nodes[i].t), i));
        let mut conflicts = vec![Vec::new(); n];
        for (a, b) in g.conflicts.iter() {
            if let (Some(i), Some(j)) = (g.node_index(a), g.node_index(b)) {
                conflicts[i].push(j);
                conflicts[j].push(i);
            }
        }
        Greedy {
            g,
            incoming: adj.incoming,
            outgoing: adj.outgoing,
            backward,
            available: vec![true; n],
            selected: vec![false; n],
            edges: BTreeSet::new(),
            ends: vec![None; n],
            conflicts,
        }
    }

    fn target(&self, e: usize) -> Option<usize> {
        match self.g.edges[e].to {
            NodeRef::Proposal(id) => self.g.node_index(id),
            _ => None,
        }
    }

    fn paths(&self) -> Paths {
        let n = self.g.nodes.len();
        let mut p = Paths {
            best: vec![f64::INFINITY; n],
            next: vec![None; n],
        };
        for &i in &self.backward {
            if !self.available[i] {
                continue;
            }
            let mut best = (f64::INFINITY, None);
            for &e in &self.outgoing[i] {
                let edge = &self.g.edges[e];
                let value = match edge.kind {
                    EdgeKind::Exit | EdgeKind::Death => edge.cost,
                    EdgeKind::Move => match self.target(e) {
                        Some(j) if self.available[j] => edge.cost + p.best[j],
                        _ => continue,
                    },
                    _ => continue,
                };
                if value < best.0 {
                    best = (value, Some(e));
                }
            }
            p.best[i] = self.g.nodes[i].cost + best.0;
            p.next[i] = best.1;
        }
        p
    }

    /// Nodes and edges of the best path starting at `i`.
    fn trace(&self, p: &Paths, mut i: usize) -> (Vec<usize>, Vec<usize>) {
        let (mut nodes, mut edges) = (Vec::new(), Vec::new());
        loop {
            nodes.push(i);
            let Some(e) = p.next[i] else { break };
            edges.push(e);
            match self.target(e) {
                Some(j) => i = j,
                None => break,
            }
        }
        (nodes, edges)
    }

    fn take(&mut self, nodes: &[usize], edges: &[usize]) {
        for &i in nodes {
            self.selected[i] = true;
            self.available[i] = false;
            for &j in &self.conflicts[i] {
                self.available[j] = false;
            }
        }
        for &e in edges {
            self.edges.insert(e);
            if matches!(self.g.edges[e].kind, EdgeKind::Exit | EdgeKind::Death) {
                if let NodeRef::Proposal(id) = self.g.edges[e].from {
                    self.ends[self.g.node_index(id).expect("known node")] = Some(e);
                }
            }
        }
    }

    fn run(mut self) -> Selection {
        let n = self.g.nodes.len();
        let mut rejected = vec![false; self.g.mitosis_sets.len()];
        // mitosis edges of each set as (k1, k2)
        let mut set_edges = vec![(usize::MAX, usize::MAX); self.g.mitosis_sets.len()];
        for (k, e) in self.g.edges.iter().enumerate() {
            if let (Some(s), Some(d)) = (e.set_id, e.daughter) {
                if d == 1 {
                    set_edges[s].0 = k;
                } else {
                    set_edges[s].1 = k;
                }
            }
        }
        loop {
            let p = self.paths();
            // best fresh track
            let mut best: Option<(f64, Option<usize>, usize)> = None;
            for i in 0..n {
                if !self.available[i] || !p.best[i].is_finite() {
                    continue;
                }
                for &e in &self.incoming[i] {
                    if self.g.edges[e].kind == EdgeKind::Enter {
                        let v = self.g.edges[e].cost + p.best[i];
                        if best.is_none_or(|b| v < b.0) {
                            best = Some((v, None, e));
                        }
                    }
                }
            }
            // best division of an already selected proposal that currently ends
            for (s, set) in self.g.mitosis_sets.iter().enumerate() {
                let (k1, k2) = set_edges[s];
                if rejected[s] || k1 == usize::MAX || k2 == usize::MAX {
                    continue;
                }
                let (Some(pi), Some(a), Some(b)) = (
                    self.g.node_index(set.parent),
                    self.g.node_index(set.d1),
                    self.g.node_index(set.d2),
                ) else {
                    continue;
                };
                let Some(end) = self.ends[pi] else { continue };
                if !self.available[a] || !self.available[b] || self.conflicts[a].contains(&b) {
                    continue;
                }
                let edges = &self.g.edges;
                let v = edges[k1].cost + edges[k2].cost - edges[end].cost + p.best[a] + p.best[b];
                if v.is_finite() && best.is_none_or(|bst| v < bst.0) {
                    best = Some((v, Some(s), 0));
                }
            }
            let Some((value, set, enter)) = best else { break };
            if value >= 0.0 {
                break;
            }
            match set {
                None => {
                    let i = self.target(enter).expect("enter edges end at a proposal");
                    let (nodes, mut edges) = self.trace(&p, i);
                    edges.push(enter);
                    self.take(&nodes, &edges);
                }
                Some(s) => {
                    let set = &self.g.mitosis_sets[s];
                    let (pi, a, b) = (
                        self.g.node_index(set.parent).unwrap(),
                        self.g.node_index(set.d1).unwrap(),
                        self.g.node_index(set.d2).unwrap(),
                    );
                    let (k1, k2) = set_edges[s];
                    let end = self.ends[pi].unwrap();
                    // the second daughter's path must avoid the first one's
                    let (nodes_a, edges_a) = self.trace(&p, a);
                    let saved = self.available.clone();
                    for &i in &nodes_a {
                        self.available[i] = false;
                        for &j in &self.conflicts[i] {
                            self.available[j] = false;
                        }
                    }
                    let q = self.paths();
                    self.available = saved;
                    let cost_a: f64 = nodes_a.iter().map(|&i| self.g.nodes[i].cost).sum::<f64>()
                        + edges_a.iter().map(|&e| self.g.edges[e].cost).sum::<f64>();
                    let edges = &self.g.edges;
                    let actual = edges[k1].cost + edges[k2].cost - edges[end].cost + cost_a + q.best[b];
                    rejected[s] = true;
                    if !(actual < 0.0) {
                        continue;
                    }
                    let (nodes_b, edges_b) = self.trace(&q, b);
                    self.edges.remove(&end);
                    self.ends[pi] = None;
                    self.take(&nodes_a, &edges_a);
                    self.take(&nodes_b, &edges_b);
                    self.take(&[], &[k1, k2]);
                }
            }
        }
        Selection {
            nodes: (0..n)
                .filter(|&i| self.selected[i])
                .map(|i| self.g.nodes[i].id)
                .collect(),
            edges: self.edges,
        }
    }
}

/// Greedy selection; always feasible, never better than the exact optimum.
pub fn solve_greedy(g: &TrackingGraph) -> Solution {
    let sel = Greedy::new(g).run();
    let x = sel.to_assignment(g);
    Solution {
        objective: objective(&formulate_costs(g), &x),
        assignment: x,
        status: Status::Feasible { gap: None },
    }
}
