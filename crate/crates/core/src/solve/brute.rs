use crate::error::{Error, Result};
use crate::solve::ilp::{objective, IlpInstance, Relation};
use crate::solve::{Solution, Status};

pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exhaustive enumeration of all `2^n` assignments in Gray-code order; the
/// first assignment with the lowest objective wins. Test oracle only.
pub fn solve_bruteforce(inst: &IlpInstance) -> Result<Solution> {
    let n = inst.num_vars();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyVariables {
            vars: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    inst.validate()?;
    let costs = inst.costs();
    let mut var_cons: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for (c, con) in inst.constraints.iter().enumerate() {
        for &(v, k) in &con.terms {
            var_cons[v].push((c, k as i64));
        }
    }
    let holds = |c: usize, a: i64| {
        let con = &inst.constraints[c];
        match con.relation {
            Relation::Le => a <= con.rhs,
            Relation::Eq => a == con.rhs,
        }
    };
    let mut act = vec![0i64; inst.constraints.len()];
    let mut violated = (0..act.len()).filter(|&c| !holds(c, 0)).count();
    let mut x = vec![false; n];
    let mut running = 0.0;
    let mut best: Option<(Vec<bool>, f64)> = None;
    let consider = |x: &[bool], running: f64, best: &mut Option<(Vec<bool>, f64)>| {
        // the running sum only filters; the reported value is recomputed
        if best.as_ref().is_some_and(|b| running > b.1 + 1e-6) {
            return;
        }
        let obj = objective(&costs, x);
        if best.as_ref().is_none_or(|b| obj < b.1) {
            *best = Some((x.to_vec(), obj));
        }
    };
    if violated == 0 {
        consider(&x, running, &mut best);
    }
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        x[v] = !x[v];
        let sign = if x[v] { 1 } else { -1 };
        running += sign as f64 * costs[v];
        for &(c, k) in &var_cons[v] {
            let before = holds(c, act[c]);
            act[c] += sign * k;
            match (before, holds(c, act[c])) {
                (true, false) => violated += 1,
                (false, true) => violated -= 1,
                _ => {}
            }
        }
        if violated == 0 {
            consider(&x, running, &mut best);
        }
    }
    Ok(match best {
        Some((assignment, objective)) => Solution {
            assignment,
            objective,
            status: Status::Optimal,
        },
        None => Solution {
            assignment: vec![false; n],
            objective: 0.0,
            status: Status::Infeasible,
        },
    })
}
