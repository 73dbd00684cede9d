use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeKind, TrackingGraph};

/// What a variable selects in the graph it was formulated from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarRef {
    /// Proposal node, by proposal id.
    Proposal(u64),
    /// Edge, by index into the graph's edge list.
    Edge(usize),
    /// Not tied to a graph (hand-made or randomly generated instances).
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub var: VarRef,
    pub cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// Which family of the program a constraint belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintTag {
    /// Two conflicting proposals are not both selected.
    Conflict,
    /// A selected proposal has exactly one selected incoming edge.
    Incoming,
    /// Incoming equals outgoing, second-daughter edges excluded.
    Flow,
    /// Both edges of a mitosis set are selected together.
    Mitosis,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    /// `(variable index, coefficient)` with coefficients `+1` or `-1`.
    pub terms: Vec<(usize, i8)>,
    pub relation: Relation,
    pub rhs: i64,
    pub tag: ConstraintTag,
}

impl Constraint {
    pub fn activity(&self, x: &[bool]) -> i64 {
        self.terms.iter().map(|&(v, c)| if x[v] { c as i64 } else { 0 }).sum()
    }

    pub fn holds(&self, x: &[bool]) -> bool {
        let a = self.activity(x);
        match self.relation {
            Relation::Le => a <= self.rhs,
            Relation::Eq => a == self.rhs,
        }
    }
}

/// Binary program: minimise the summed cost of selected variables subject
/// to linear constraints with unit coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlpInstance {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl IlpInstance {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.variables.iter().map(|v| v.cost).collect()
    }

    /// Objective of an assignment, summed in variable order. Every solver
    /// reports its objective through this function so that equal assignments
    /// give bit-equal objectives.
    pub fn objective(&self, x: &[bool]) -> f64 {
        objective(&self.costs(), x)
    }

    /// Indices of violated constraints.
    pub fn violations(&self, x: &[bool]) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.holds(x))
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks indices, coefficients and finite costs.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        if let Some(v) = self.variables.iter().position(|v| !v.cost.is_finite()) {
            return Err(Error::InvalidArgument(format!("variable {v} has a non-finite cost")));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for &(v, coef) in &c.terms {
                if v >= n || !(coef == 1 || coef == -1) {
                    return Err(Error::InvalidArgument(format!(
                        "constraint {i} has term ({v}, {coef}); need an index below {n} and coefficient +-1"
                    )));
                }
            }
            let mut vars: Vec<usize> = c.terms.iter().map(|t| t.0).collect();
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!("constraint {i} repeats a variable")));
            }
        }
        Ok(())
    }
}

pub fn objective(costs: &[f64], x: &[bool]) -> f64 {
    costs.iter().zip(x).filter(|(_, &b)| b).map(|(c, _)| *c).sum()
}

/// Encodes the selection program of a tracking graph. Variables are the
/// proposals in node order followed by the edges in edge order. Constraints:
/// one `x_i + x_j <= 1` per conflict pair, then per node `sum(in) - x_p = 0`
/// and `sum(in) - sum(out without daughter-2 edges) = 0`, then per mitosis set
/// `x_k1 - x_k2 = 0`.
pub fn formulate(g: &TrackingGraph) -> IlpInstance {
    let n = g.nodes.len();
    let mut variables: Vec<Variable> = g
        .nodes
        .iter()
        .map(|node| Variable {
            var: VarRef::Proposal(node.id),
            cost: node.cost,
        })
        .collect();
    variables.extend(g.edges.iter().enumerate().map(|(k, e)| Variable {
        var: VarRef::Edge(k),
        cost: e.cost,
    }));

    let mut constraints = Vec::new();
    for (a, b) in g.conflicts.iter() {
        if let (Some(i), Some(j)) = (g.node_index(a), g.node_index(b)) {
            constraints.push(Constraint {
                terms: vec![(i, 1), (j, 1)],
                relation: Relation::Le,
                rhs: 1,
                tag: ConstraintTag::Conflict,
            });
        }
    }
    let adj = g.adjacency();
    for i in 0..n {
        let incoming: Vec<(usize, i8)> = adj.incoming[i].iter().map(|&e| (n + e, 1)).collect();
        let mut sel = incoming.clone();
        sel.push((i, -1));
        constraints.push(Constraint {
            terms: sel,
            relation: Relation::Eq,
            rhs: 0,
            tag: ConstraintTag::Incoming,
        });
        let mut flow = incoming;
        flow.extend(
            adj.outgoing[i]
                .iter()
                .filter(|&&e| g.edges[e].daughter != Some(2))
                .map(|&e| (n + e, -1)),
        );
        constraints.push(Constraint {
            terms: flow,
            relation: Relation::Eq,
            rhs: 0,
            tag: ConstraintTag::Flow,
        });
    }
    let mut halves: std::collections::BTreeMap<usize, [Option<usize>; 2]> = Default::default();
    for (k, e) in g.edges.iter().enumerate() {
        if let (EdgeKind::Mitosis, Some(set), Some(d)) = (e.kind, e.set_id, e.daughter) {
            halves.entry(set).or_default()[d as usize - 1] = Some(k);
        }
    }
    for [a, b] in halves.into_values() {
        if let (Some(a), Some(b)) = (a, b) {
            constraints.push(Constraint {
                terms: vec![(n + a, 1), (n + b, -1)],
                relation: Relation::Eq,
                rhs: 0,
                tag: ConstraintTag::Mitosis,
            });
        }
    }
    IlpInstance { variables, constraints }
}

/// Selected proposals and edges of a graph solution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Selection {
    pub nodes: std::collections::BTreeSet<u64>,
    pub edges: std::collections::BTreeSet<usize>,
}

impl Selection {
    /// Reads a selection out of an assignment to `formulate(g)`.
    pub fn from_assignment(g: &TrackingGraph, x: &[bool]) -> Result<Self> {
        let n = g.nodes.len();
        if x.len() != n + g.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "assignment has {} values, graph has {} variables",
                x.len(),
                n + g.edges.len()
            )));
        }
        Ok(Selection {
            nodes: (0..n).filter(|&i| x[i]).map(|i| g.nodes[i].id).collect(),
            edges: (0..g.edges.len()).filter(|&k| x[n + k]).collect(),
        })
    }

    pub fn to_assignment(&self, g: &TrackingGraph) -> Vec<bool> {
        let mut x: Vec<bool> = g.nodes.iter().map(|node| self.nodes.contains(&node.id)).collect();
        x.extend((0..g.edges.len()).map(|k| self.edges.contains(&k)));
        x
    }

    /// Summed cost of the selection in variable order.
    pub fn cost(&self, g: &TrackingGraph) -> f64 {
        formulate_costs(g)
            .iter()
            .zip(self.to_assignment(g))
            .filter(|(_, b)| *b)
            .map(|(c, _)| *c)
            .sum()
    }
}

pub(crate) fn formulate_costs(g: &TrackingGraph) -> Vec<f64> {
    g.nodes
        .iter()
        .map(|n| n.cost)
        .chain(g.edges.iter().map(|e| e.cost))
        .collect()
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::graph::{Edge, EdgeKind, GraphNode, NodeRef, TrackingGraph};

    pub fn single_node_graph(node: f64, enter: f64, exit: f64) -> TrackingGraph {
        let e = |kind, from, to, cost| Edge {
            kind,
            from,
            to,
            daughter: None,
            set_id: None,
            prob: 0.5,
            cost,
        };
        TrackingGraph {
            num_frames: 1,
            nodes: vec![GraphNode {
                id: 7,
                t: 0,
                centroid: (0.0, 0.0),
                prob: 0.5,
                cost: node,
            }],
            edges: vec![
                e(EdgeKind::Enter, NodeRef::Source, NodeRef::Proposal(7), enter),
                e(EdgeKind::Exit, NodeRef::Proposal(7), NodeRef::Sink, exit),
            ],
            mitosis_sets: vec![],
            conflicts: Default::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::single_node_graph;
    use super::*;

    #[test]
    fn empty_graph_is_empty_program() {
        let inst = formulate(&TrackingGraph::default());
        assert_eq!((inst.num_vars(), inst.constraints.len()), (0, 0));
    }

    #[test]
    fn single_proposal_program() {
        let inst = formulate(&single_node_graph(-1.0, -0.1, -0.1));
        assert_eq!(
            inst.variables.iter().map(|v| v.var).collect::<Vec<_>>(),
            vec![VarRef::Proposal(7), VarRef::Edge(0), VarRef::Edge(1)]
        );
        assert_eq!(inst.constraints.len(), 2);
        assert_eq!(inst.constraints[0].terms, vec![(1, 1), (0, -1)]);
        assert_eq!(inst.constraints[1].terms, vec![(1, 1), (2, -1)]);
        assert!(inst
            .constraints
            .iter()
            .all(|c| c.relation == Relation::Eq && c.rhs == 0));
        assert!(inst.violations(&[true, true, true]).is_empty());
        assert_eq!(inst.violations(&[true, true, false]), vec![1]);
    }

    #[test]
    fn one_conflict_one_inequality() {
        let mut g = single_node_graph(-1.0, 0.0, 0.0);
        let mut second = g.nodes[0].clone();
        second.id = 8;
        g.nodes.push(second);
        g.conflicts = crate::proposals::ConflictMatrix::from_pairs([(7, 8)]);
        let inst = formulate(&g);
        let le: Vec<_> = inst.constraints.iter().filter(|c| c.relation == Relation::Le).collect();
        assert_eq!(le.len(), 1);
        assert_eq!((le[0].rhs, le[0].terms.clone()), (1, vec![(0, 1), (1, 1)]));
    }
}
