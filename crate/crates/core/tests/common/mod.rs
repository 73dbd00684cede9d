#![allow(dead_code)]

use lineage_ilp::graph::{Edge, EdgeKind, GraphNode, MitosisSet, NodeRef, TrackingGraph};
use lineage_ilp::proposals::ConflictMatrix;
use lineage_ilp::solve::{formulate, Constraint, ConstraintTag, IlpInstance, Relation, VarRef, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn edge(kind: EdgeKind, from: NodeRef, to: NodeRef, cost: f64) -> Edge {
    Edge {
        kind,
        from,
        to,
        daughter: None,
        set_id: None,
        prob: 0.5,
        cost,
    }
}

pub fn node(id: u64, t: usize, cost: f64) -> GraphNode {
    GraphNode {
        id,
        t,
        centroid: (id as f64, 0.0),
        prob: 0.5,
        cost,
    }
}

/// Graph from explicit node costs, terminal costs and move/mitosis lists.
pub fn graph(
    nodes: &[(u64, usize, f64)],
    enter: f64,
    exit: f64,
    moves: &[(u64, u64, f64)],
    mitoses: &[(u64, u64, u64, f64)],
    conflicts: &[(u64, u64)],
) -> TrackingGraph {
    let p = NodeRef::Proposal;
    let mut edges: Vec<Edge> = nodes
        .iter()
        .map(|&(id, _, _)| edge(EdgeKind::Enter, NodeRef::Source, p(id), enter))
        .collect();
    edges.extend(moves.iter().map(|&(a, b, c)| edge(EdgeKind::Move, p(a), p(b), c)));
    let mut sets = Vec::new();
    for (id, &(parent, d1, d2, c)) in mitoses.iter().enumerate() {
        sets.push(MitosisSet {
            id,
            parent,
            d1,
            d2,
            prob: 0.5,
        });
        for (k, d) in [(1u8, d1), (2u8, d2)] {
            let mut e = edge(EdgeKind::Mitosis, p(parent), p(d), c);
            e.daughter = Some(k);
            e.set_id = Some(id);
            edges.push(e);
        }
    }
    edges.extend(
        nodes
            .iter()
            .map(|&(id, _, _)| edge(EdgeKind::Exit, p(id), NodeRef::Sink, exit)),
    );
    let num_frames = nodes.iter().map(|n| n.1 + 1).max().unwrap_or(0);
    let g = TrackingGraph {
        num_frames,
        nodes: nodes.iter().map(|&(id, t, c)| node(id, t, c)).collect(),
        edges,
        mitosis_sets: sets,
        conflicts: ConflictMatrix::from_pairs(conflicts.iter().copied()),
    };
    g.validate().expect("well-formed fixture");
    g
}

/// Two cells over two frames where the single best path (A1 -> B2) blocks
/// the better pair of tracks (A1 -> A2, B1 -> B2): greedy -39, exact -42.
pub fn strict_gap_fixture() -> TrackingGraph {
    graph(
        &[(0, 0, -10.0), (1, 0, -10.0), (2, 1, -10.0), (3, 1, -10.0)],
        1.0,
        1.0,
        &[(0, 3, -5.0), (0, 2, -3.0), (1, 3, -3.0)],
        &[],
        &[],
    )
}

/// Small random tracking graph with costs uniform in [-2, 2].
pub fn random_graph(rng: &mut ChaCha8Rng) -> TrackingGraph {
    let mut c = || rng.gen_range(-2.0..=2.0);
    let frames = 2;
    let mut nodes = Vec::new();
    let mut id = 0;
    let counts = [1 + (c() > 0.0) as usize, 1 + (c() > 0.0) as usize];
    for (t, &k) in counts.iter().enumerate().take(frames) {
        for _ in 0..k {
            nodes.push((id, t, c()));
            id += 1;
        }
    }
    let first: Vec<u64> = nodes.iter().filter(|n| n.1 == 0).map(|n| n.0).collect();
    let second: Vec<u64> = nodes.iter().filter(|n| n.1 == 1).map(|n| n.0).collect();
    let mut moves = Vec::new();
    for &a in &first {
        for &b in &second {
            if c() > -1.0 {
                moves.push((a, b, c()));
            }
        }
    }
    let mut mitoses = Vec::new();
    if second.len() == 2 && c() > 0.0 {
        mitoses.push((first[0], second[0], second[1], c()));
    }
    let mut conflicts = Vec::new();
    for group in [&first, &second] {
        if group.len() == 2 && c() > 0.5 {
            conflicts.push((group[0], group[1]));
        }
    }
    let enter = c();
    let exit = c();
    let mut g = graph(&nodes, enter, exit, &moves, &mitoses, &conflicts);
    // individual terminal costs
    for e in g.edges.iter_mut() {
        if matches!(e.kind, EdgeKind::Enter | EdgeKind::Exit) {
            e.cost = rng.gen_range(-2.0..=2.0);
        }
    }
    g
}

/// Random program over at most `max_vars` variables with unit-coefficient
/// constraints; may be infeasible.
pub fn random_generic(rng: &mut ChaCha8Rng, max_vars: usize) -> IlpInstance {
    let n = rng.gen_range(1..=max_vars);
    let variables = (0..n)
        .map(|_| Variable {
            var: VarRef::Free,
            cost: rng.gen_range(-2.0..=2.0),
        })
        .collect();
    let m = rng.gen_range(0..=n);
    let constraints = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=4.min(n));
            let mut vars: Vec<usize> = (0..n).collect();
            for i in 0..k {
                let j = rng.gen_range(i..n);
                vars.swap(i, j);
            }
            let terms = vars[..k]
                .iter()
                .map(|&v| (v, if rng.gen_bool(0.6) { 1 } else { -1 }))
                .collect();
            Constraint {
                terms,
                relation: if rng.gen_bool(0.5) { Relation::Le } else { Relation::Eq },
                rhs: rng.gen_range(-1..=2),
                tag: ConstraintTag::Other,
            }
        })
        .collect();
    IlpInstance { variables, constraints }
}

/// The `i`-th instance of a seeded stream alternating graph-shaped and
/// generic programs, all with at most 20 variables.
pub fn random_instance(seed: u64, i: u64) -> IlpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    if i.is_multiple_of(2) {
        loop {
            let inst = formulate(&random_graph(&mut rng));
            if inst.num_vars() <= 20 {
                return inst;
            }
        }
    }
    random_generic(&mut rng, 20)
}
