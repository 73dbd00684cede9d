//! Selection program over the tracking graph: formulation, exact branch and
//! bound, brute-force oracle, greedy path extraction and lineage recovery.

mod brute;
mod check;
mod exact;
mod greedy;
mod ilp;
mod lineage;

use serde::{Deserialize, Serialize};

pub use brute::{solve_bruteforce, BRUTE_FORCE_LIMIT};
pub use check::{check_selection, Violation};
pub use exact::{solve_exact, ExactConfig};
pub use greedy::solve_greedy;
pub use ilp::{formulate, objective, Constraint, ConstraintTag, IlpInstance, Relation, Selection, VarRef, Variable};
pub use lineage::{extract_lineage, EndReason, LineageForest, Track};

use crate::error::Result;
use crate::graph::TrackingGraph;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "status")]
pub enum Status {
    Optimal,
    /// Feasible with a proven absolute gap when one is known.
    Feasible {
        gap: Option<f64>,
    },
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub assignment: Vec<bool>,
    pub objective: f64,
    pub status: Status,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Exact,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub backend: Backend,
    /// Seconds; `null` for no limit.
    pub time_limit: Option<f64>,
    pub gap_tolerance: f64,
    pub node_limit: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let exact = ExactConfig::default();
        SolveConfig {
            backend: Backend::Exact,
            time_limit: exact.time_limit,
            gap_tolerance: exact.gap_tolerance,
            node_limit: exact.node_limit,
        }
    }
}

impl SolveConfig {
    pub fn exact(&self) -> ExactConfig {
        ExactConfig {
            time_limit: self.time_limit,
            gap_tolerance: self.gap_tolerance,
            node_limit: self.node_limit,
        }
    }
}

/// A way of choosing the selection for a graph.
pub trait Solver {
    fn solve(&self, g: &TrackingGraph) -> Result<Solution>;
}

pub struct ExactSolver(pub ExactConfig);

impl Solver for ExactSolver {
    fn solve(&self, g: &TrackingGraph) -> Result<Solution> {
        solve_exact(&formulate(g), &self.0)
    }
}

pub struct GreedySolver;

impl Solver for GreedySolver {
    fn solve(&self, g: &TrackingGraph) -> Result<Solution> {
        Ok(solve_greedy(g))
    }
}

pub fn solver_for(cfg: &SolveConfig) -> Box<dyn Solver> {
    match cfg.backend {
        Backend::Exact => Box::new(ExactSolver(cfg.exact())),
        Backend::Greedy => Box::new(GreedySolver),
    }
}

/// Solves the graph and returns the lineage with the raw solution.
pub fn track(g: &TrackingGraph, solver: &dyn Solver) -> Result<(LineageForest, Solution)> {
    let sol = solver.solve(g)?;
    if sol.status == Status::Infeasible {
        return Err(crate::Error::InfeasibleSolution(
            "solver reported an infeasible program".into(),
        ));
    }
    let sel = Selection::from_assignment(g, &sol.assignment)?;
    Ok((extract_lineage(g, &sel)?, sol))
}
