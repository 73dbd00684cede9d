//! Spatio-temporal tracking graph: one node per proposal plus source and
//! sink terminals, joined by costed move, enter, exit, death and paired
//! mitosis edges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::ForestModel;
use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::features::{
    mitosis_features_with, move_features_with, proposal_features, FeatureKind, FeatureOptions, Member, MITOSIS_DIM,
};
use crate::par;
use crate::proposals::{by_frame, ConflictMatrix, Frame, Proposal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRef {
    Source,
    Sink,
    Proposal(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Move,
    Enter,
    Exit,
    Death,
    Mitosis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub kind: EdgeKind,
    pub from: NodeRef,
    pub to: NodeRef,
    /// 1 or 2 on mitosis edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub daughter: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_id: Option<usize>,
    pub prob: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitosisSet {
    pub id: usize,
    pub parent: u64,
    /// Daughters with `d1 < d2`.
    pub d1: u64,
    pub d2: u64,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphNode {
    pub id: u64,
    pub t: usize,
    pub centroid: (f64, f64),
    pub prob: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingGraph {
    pub num_frames: usize,
    /// Sorted by id.
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    pub mitosis_sets: Vec<MitosisSet>,
    pub conflicts: ConflictMatrix,
}

/// Incoming and outgoing edge indices per node position.
#[derive(Clone, Debug)]
pub struct Adjacency {
    pub incoming: Vec<Vec<usize>>,
    pub outgoing: Vec<Vec<usize>>,
}

impl TrackingGraph {
    pub fn node_index(&self, id: u64) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn node(&self, id: u64) -> Option<&GraphNode> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    pub fn adjacency(&self) -> Adjacency {
        let n = self.nodes.len();
        let mut adj = Adjacency {
            incoming: vec![Vec::new(); n],
            outgoing: vec![Vec::new(); n],
        };
        for (e, edge) in self.edges.iter().enumerate() {
            if let NodeRef::Proposal(id) = edge.from {
                if let Some(i) = self.node_index(id) {
                    adj.outgoing[i].push(e);
                }
            }
            if let NodeRef::Proposal(id) = edge.to {
                if let Some(i) = self.node_index(id) {
                    adj.incoming[i].push(e);
                }
            }
        }
        adj
    }

    /// Structural checks: sorted unique nodes, edges between known nodes in
    /// the right direction, paired mitosis edges, finite costs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("malformed graph: {m}")));
        if self.nodes.windows(2).any(|w| w[0].id >= w[1].id) {
            return bad("node ids not strictly increasing".into());
        }
        let t_of = |r: NodeRef| match r {
            NodeRef::Proposal(id) => self.node(id).map(|n| Some(n.t)),
            _ => Some(None),
        };
        let mut halves: BTreeMap<usize, [Option<(u64, u64)>; 2]> = BTreeMap::new();
        for (k, e) in self.edges.iter().enumerate() {
            if !e.cost.is_finite() || !(0.0..=1.0).contains(&e.prob) {
                return bad(format!("edge {k} has cost {} prob {}", e.cost, e.prob));
            }
            let (Some(tf), Some(tt)) = (t_of(e.from), t_of(e.to)) else {
                return bad(format!("edge {k} references an unknown node"));
            };
            let ok = match (e.kind, e.from, e.to) {
                (EdgeKind::Enter, NodeRef::Source, NodeRef::Proposal(_)) => true,
                (EdgeKind::Exit | EdgeKind::Death, NodeRef::Proposal(_), NodeRef::Sink) => true,
                (EdgeKind::Move | EdgeKind::Mitosis, NodeRef::Proposal(_), NodeRef::Proposal(_)) => {
                    tt == tf.map(|t| t + 1)
                }
                _ => false,
            };
            if !ok {
                return bad(format!("edge {k} ({:?}) connects {:?} -> {:?}", e.kind, e.from, e.to));
            }
            if e.kind == EdgeKind::Mitosis {
                let (Some(set), Some(d @ 1..=2)) = (e.set_id, e.daughter) else {
                    return bad(format!("mitosis edge {k} lacks set id or daughter number"));
                };
                let (NodeRef::Proposal(p), NodeRef::Proposal(c)) = (e.from, e.to) else {
                    unreachable!()
                };
                let slot = &mut halves.entry(set).or_default()[d as usize - 1];
                if slot.replace((p, c)).is_some() {
                    return bad(format!("mitosis set {set} has two daughter-{d} edges"));
                }
            }
        }
        for (set, [a, b]) in halves {
            match (a, b) {
                (Some((p1, _)), Some((p2, _))) if p1 == p2 => {}
                _ => return bad(format!("mitosis set {set} is not a matched pair")),
            }
        }
        if self
            .conflicts
            .iter()
            .any(|(a, b)| self.node(a).zip(self.node(b)).is_none_or(|(x, y)| x.t != y.t))
        {
            return bad("conflict pair across frames or with unknown node".into());
        }
        Ok(())
    }
}

/// `-ln(p / (1 - p))` with `p` clamped to `[eps, 1 - eps]`.
pub fn log_odds_cost(p: f64, eps: f64) -> f64 {
    let p = p.clamp(eps, 1.0 - eps);
    -(p / (1.0 - p)).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    /// Maximum centroid distance of a move edge. Unset: derived from ground
    /// truth displacements when available.
    pub gating_radius: Option<f64>,
    /// Number of nearest next-frame neighbours considered as daughters.
    pub mitosis_n: usize,
    /// Maximum parent-to-daughter distance; unset means the gating radius.
    pub mitosis_dist: Option<f64>,
    pub p_enter: f64,
    pub p_exit: f64,
    /// Constant death probability; `None` disables death edges.
    pub p_death: Option<f64>,
    pub epsilon: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            gating_radius: None,
            mitosis_n: 3,
            mitosis_dist: None,
            p_enter: 0.01,
            p_exit: 0.01,
            p_death: None,
            epsilon: 1e-6,
        }
    }
}

impl GraphConfig {
    /// Fills an unset gating radius with 1.25 times the 99th percentile of
    /// the ground-truth displacements.
    pub fn resolved(&self, gt: Option<&GroundTruth>) -> Result<GraphConfig> {
        let mut cfg = self.clone();
        if cfg.gating_radius.is_none() {
            let mut d = gt.map(GroundTruth::displacements).unwrap_or_default();
            if d.is_empty() {
                return Err(Error::Config(
                    "graph.gating_radius is unset and no ground-truth displacements are available".into(),
                ));
            }
            d.sort_by(f64::total_cmp);
            let rank = ((0.99 * d.len() as f64).ceil() as usize).clamp(1, d.len());
            cfg.gating_radius = Some(1.25 * d[rank - 1].max(1.0));
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(f64, f64)> {
        let gating = self
            .gating_radius
            .ok_or_else(|| Error::Config("graph.gating_radius is unset".into()))?;
        let mitosis = self.mitosis_dist.unwrap_or(gating);
        let prob_ok = |p: f64| p > 0.0 && p < 1.0;
        if !(gating >= 0.0 && mitosis >= 0.0) {
            return Err(Error::Config(
                "gating and mitosis distances must be non-negative".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config("epsilon must lie in (0, 0.5)".into()));
        }
        if !prob_ok(self.p_enter) || !prob_ok(self.p_exit) || self.p_death.is_some_and(|p| !prob_ok(p)) {
            return Err(Error::Config("terminal probabilities must lie in (0, 1)".into()));
        }
        Ok((gating, mitosis))
    }
}

/// Edge probability source.
pub trait EdgeScorer: Sync {
    fn move_prob(&self, from: &Proposal, to: &Proposal) -> Result<f64>;
    /// Daughters are passed with `d1.id < d2.id`.
    fn mitosis_prob(&self, parent: &Proposal, d1: &Proposal, d2: &Proposal) -> Result<f64>;
}

/// Scores edges with trained forests over the feature vectors.
pub struct ForestScorer<'a> {
    cache: BTreeMap<u64, (&'a Proposal, Vec<f64>, f64)>,
    move_model: &'a ForestModel,
    mitosis_model: &'a ForestModel,
    options: FeatureOptions,
}

impl<'a> ForestScorer<'a> {
    /// `frames` are indexed by frame number; `node_probs` align with `props`.
    pub fn new(
        props: &'a [Proposal],
        node_probs: &[f64],
        frames: &[Frame],
        move_model: &'a ForestModel,
        mitosis_model: &'a ForestModel,
        options: FeatureOptions,
    ) -> Result<Self> {
        if move_model.kind != FeatureKind::Move || move_model.dim != options.move_dim() {
            return Err(Error::DimensionMismatch {
                expected: options.move_dim(),
                actual: move_model.dim,
            });
        }
        if mitosis_model.kind != FeatureKind::Mitosis || mitosis_model.dim != MITOSIS_DIM {
            return Err(Error::DimensionMismatch {
                expected: MITOSIS_DIM,
                actual: mitosis_model.dim,
            });
        }
        let feats = proposal_feature_table(props, frames)?;
        let cache = props
            .iter()
            .zip(feats)
            .zip(node_probs)
            .map(|((p, f), &prob)| (p.id, (p, f, prob)))
            .collect();
        Ok(ForestScorer {
            cache,
            move_model,
            mitosis_model,
            options,
        })
    }

    fn entry(&self, id: u64) -> Result<&(&'a Proposal, Vec<f64>, f64)> {
        self.cache
            .get(&id)
            .ok_or_else(|| Error::InvalidArgument(format!("proposal {id} unknown to the scorer")))
    }
}

/// Proposal descriptors for every proposal, in input order.
pub fn proposal_feature_table(props: &[Proposal], frames: &[Frame]) -> Result<Vec<Vec<f64>>> {
    par::try_map(props, |p| {
        let frame = frames
            .get(p.t)
            .ok_or_else(|| Error::FrameMismatch(format!("proposal {} is in missing frame {}", p.id, p.t)))?;
        Ok(proposal_features(p, frame)?.values)
    })
}

fn member<'b>(e: &'b (&Proposal, Vec<f64>, f64)) -> Member<'b> {
    Member {
        proposal: e.0,
        features: &e.1,
        prob: e.2,
    }
}

impl EdgeScorer for ForestScorer<'_> {
    fn move_prob(&self, from: &Proposal, to: &Proposal) -> Result<f64> {
        let (_, fi, pi) = self.entry(from.id)?;
        let (_, fj, pj) = self.entry(to.id)?;
        let v = move_features_with(from, to, fi, fj, *pi, *pj, &self.options)?;
        self.move_model.predict_prob(&v)
    }

    fn mitosis_prob(&self, parent: &Proposal, d1: &Proposal, d2: &Proposal) -> Result<f64> {
        let (ep, e1, e2) = (self.entry(parent.id)?, self.entry(d1.id)?, self.entry(d2.id)?);
        let v = mitosis_features_with(member(ep), member(e1), member(e2))?;
        self.mitosis_model.predict_prob(&v)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Gated move pairs `(from, to)` and mitosis triples `(parent, d1, d2)` with
/// `d1 < d2`, both sorted. Daughters are unordered pairs among the
/// `mitosis_n` nearest next-frame proposals within `mitosis_dist`, skipping
/// conflicting pairs (they could never be selected together).
pub fn candidates(
    props: &[Proposal],
    conflicts: &ConflictMatrix,
    gating: f64,
    mitosis_dist: f64,
    mitosis_n: usize,
) -> (Vec<(u64, u64)>, Vec<(u64, u64, u64)>) {
    let frames = by_frame(props);
    let pairs: Vec<(&Vec<&Proposal>, &Vec<&Proposal>)> = frames
        .iter()
        .filter_map(|(t, cur)| frames.get(&(t + 1)).map(|next| (cur, next)))
        .collect();
    let per_pair = par::map(&pairs, |(cur, next)| {
        let mut moves = Vec::new();
        let mut sets = Vec::new();
        for &pi in cur.iter() {
            let ci = pi.centroid();
            for &pj in next.iter() {
                if dist(ci, pj.centroid()) <= gating {
                    moves.push((pi.id, pj.id));
                }
            }
            if mitosis_n < 2 {
                continue;
            }
            let mut near: Vec<(f64, &Proposal)> = next
                .iter()
                .map(|&pj| (dist(ci, pj.centroid()), pj))
                .filter(|(d, _)| *d <= mitosis_dist)
                .collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
            near.truncate(mitosis_n);
            near.sort_by_key(|(_, p)| p.id);
            for (a, &(_, d1)) in near.iter().enumerate() {
                for &(_, d2) in &near[a + 1..] {
                    if !conflicts.contains(d1.id, d2.id) {
                        sets.push((pi.id, d1.id, d2.id));
                    }
                }
            }
        }
        (moves, sets)
    });
    let (mut moves, mut sets): (Vec<_>, Vec<_>) = (Vec::new(), Vec::new());
    for (m, s) in per_pair {
        moves.extend(m);
        sets.extend(s);
    }
    moves.sort_unstable();
    sets.sort_unstable();
    (moves, sets)
}

/// Builds the graph over `props` (ids unique), with `node_probs` aligned to
/// `props`. Edges are ordered: enter edges by node, move edges by (from, to),
/// mitosis edge pairs by set, exit edges by node, death edges by node.
pub fn build_graph(
    props: &[Proposal],
    node_probs: &[f64],
    conflicts: &ConflictMatrix,
    scorer: &dyn EdgeScorer,
    num_frames: usize,
    cfg: &GraphConfig,
) -> Result<TrackingGraph> {
    let (gating, mitosis_dist) = cfg.validate()?;
    if node_probs.len() != props.len() {
        return Err(Error::InvalidArgument(format!(
            "{} node probabilities for {} proposals",
            node_probs.len(),
            props.len()
        )));
    }
    if let Some(p) = props.iter().find(|p| p.t >= num_frames) {
        return Err(Error::FrameMismatch(format!(
            "proposal {} in frame {} of {num_frames}",
            p.id, p.t
        )));
    }
    let eps = cfg.epsilon;
    let mut nodes: Vec<GraphNode> = props
        .iter()
        .zip(node_probs)
        .map(|(p, &prob)| GraphNode {
            id: p.id,
            t: p.t,
            centroid: p.centroid(),
            prob,
            cost: log_odds_cost(prob, eps),
        })
        .collect();
    nodes.sort_by_key(|n| n.id);
    if nodes.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::InvalidArgument("duplicate proposal ids".into()));
    }

    let (move_pairs, set_triples) = candidates(props, conflicts, gating, mitosis_dist, cfg.mitosis_n);
    let by_id: BTreeMap<u64, &Proposal> = props.iter().map(|p| (p.id, p)).collect();
    let move_probs = par::try_map(&move_pairs, |&(i, j)| scorer.move_prob(by_id[&i], by_id[&j]))?;
    let set_probs = par::try_map(&set_triples, |&(p, a, b)| {
        scorer.mitosis_prob(by_id[&p], by_id[&a], by_id[&b])
    })?;
    let moves: Vec<(u64, u64, f64)> = move_pairs
        .iter()
        .zip(move_probs)
        .map(|(&(i, j), p)| (i, j, p))
        .collect();
    let sets: Vec<(u64, u64, u64, f64)> = set_triples
        .iter()
        .zip(set_probs)
        .map(|(&(p, a, b), q)| (p, a, b, q))
        .collect();

    let edge = |kind, from, to, prob: f64| Edge {
        kind,
        from,
        to,
        daughter: None,
        set_id: None,
        prob,
        cost: log_odds_cost(prob, eps),
    };
    let mut edges = Vec::new();
    for n in &nodes {
        edges.push(edge(
            EdgeKind::Enter,
            NodeRef::Source,
            NodeRef::Proposal(n.id),
            cfg.p_enter,
        ));
    }
    for &(i, j, p) in &moves {
        edges.push(edge(EdgeKind::Move, NodeRef::Proposal(i), NodeRef::Proposal(j), p));
    }
    let mut mitosis_sets = Vec::with_capacity(sets.len());
    for (id, &(parent, d1, d2, prob)) in sets.iter().enumerate() {
        mitosis_sets.push(MitosisSet {
            id,
            parent,
            d1,
            d2,
            prob,
        });
        for (k, d) in [(1u8, d1), (2u8, d2)] {
            let mut e = edge(EdgeKind::Mitosis, NodeRef::Proposal(parent), NodeRef::Proposal(d), prob);
            e.daughter = Some(k);
            e.set_id = Some(id);
            edges.push(e);
        }
    }
    for n in &nodes {
        edges.push(edge(EdgeKind::Exit, NodeRef::Proposal(n.id), NodeRef::Sink, cfg.p_exit));
    }
    if let Some(pd) = cfg.p_death {
        for n in &nodes {
            edges.push(edge(EdgeKind::Death, NodeRef::Proposal(n.id), NodeRef::Sink, pd));
        }
    }
    let known: std::collections::BTreeSet<u64> = nodes.iter().map(|n| n.id).collect();
    let conflicts =
        ConflictMatrix::from_pairs(conflicts.iter().filter(|(a, b)| known.contains(a) && known.contains(b)));
    Ok(TrackingGraph {
        num_frames,
        nodes,
        edges,
        mitosis_sets,
        conflicts,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub moves: usize,
    pub enters: usize,
    pub exits: usize,
    pub deaths: usize,
    pub mitosis_sets: usize,
    pub mitosis_edges: usize,
    pub conflicts: usize,
    /// Proposal count per frame.
    pub nodes_per_frame: Vec<usize>,
    /// Move edges leaving each frame.
    pub moves_per_frame: Vec<usize>,
}

pub fn graph_stats(g: &TrackingGraph) -> GraphStats {
    let mut s = GraphStats {
        nodes: g.nodes.len(),
        mitosis_sets: g.mitosis_sets.len(),
        conflicts: g.conflicts.len(),
        nodes_per_frame: vec![0; g.num_frames],
        moves_per_frame: vec![0; g.num_frames],
        ..Default::default()
    };
    for n in &g.nodes {
        s.nodes_per_frame[n.t] += 1;
    }
    for e in &g.edges {
        match e.kind {
            EdgeKind::Move => {
                s.moves += 1;
                if let NodeRef::Proposal(id) = e.from {
                    if let Some(n) = g.node(id) {
                        s.moves_per_frame[n.t] += 1;
                    }
                }
            }
            EdgeKind::Enter => s.enters += 1,
            EdgeKind::Exit => s.exits += 1,
            EdgeKind::Death => s.deaths += 1,
            EdgeKind::Mitosis => s.mitosis_edges += 1,
        }
    }
    s
}
