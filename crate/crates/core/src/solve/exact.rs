//! Best-first branch and bound over binary variables.
//!
//! The instance is split into independent blocks (variables linked through
//! constraints) that are solved separately. Inside a block, each search node
//! is a partial assignment closed under bounds propagation of the unit
//! coefficient constraints. The lower bound is LP-free:
//!
//! * Variables not covered by a selector group contribute `min(0, cost)`
//!   while free and their cost once fixed.
//! * A selector group is recognised from a pair of equalities
//!   `sum(S) - x_p = 0` and `sum(S) - sum(O) = 0`. Any feasible assignment
//!   selects either nothing of `{p} ∪ S ∪ O` or `p` with exactly one member of
//!   `S` and one of `O`, so the group contributes
//!   `min(0, c_p + min_S w_in + min_O w_out)`, where each variable's cost is
//!   split between its in-role and out-role (`w_in + w_out = c`).
//!
//! Any split gives a valid bound. The split is chosen once per block by
//! coordinate ascent that equalises, for every shared variable, the gain of
//! selecting it as seen from its two groups.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::par;
use crate::solve::ilp::{objective, IlpInstance, Relation};
use crate::solve::{Solution, Status};

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactConfig {
    /// Wall-clock limit in seconds; `None` searches to completion.
    pub time_limit: Option<f64>,
    /// Absolute optimality gap accepted when pruning.
    pub gap_tolerance: f64,
    /// Maximum number of search nodes per block.
    pub node_limit: Option<u64>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            time_limit: Some(60.0),
            gap_tolerance: 0.0,
            node_limit: None,
        }
    }
}

const FREE: i8 = -1;
const UNSET: u32 = u32::MAX;
const DIFFUSION_SWEEPS: usize = 200;

/// Minimises `inst` exactly, or returns the best assignment found with
/// status `Feasible` when a limit stops the search.
pub fn solve_exact(inst: &IlpInstance, cfg: &ExactConfig) -> Result<Solution> {
    inst.validate()?;
    let deadline = cfg
        .time_limit
        .map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0)));
    let blocks = blocks(inst);
    let results = par::map(&blocks, |vars| Block::new(inst, vars).search(cfg, deadline));
    let mut x = vec![false; inst.num_vars()];
    let mut gap = 0.0;
    let mut limited = false;
    for (vars, r) in blocks.iter().zip(results) {
        match r {
            BlockResult::Infeasible => {
                return Ok(Solution {
                    assignment: vec![false; inst.num_vars()],
                    objective: 0.0,
                    status: Status::Infeasible,
                })
            }
            BlockResult::NoIncumbent => return Err(Error::NoIncumbent),
            BlockResult::Solved {
                x: local,
                gap: g,
                limited: l,
            } => {
                for (&v, b) in vars.iter().zip(local) {
                    x[v] = b;
                }
                gap += g;
                limited |= l;
            }
        }
    }
    let status = if limited || cfg.gap_tolerance > 0.0 {
        Status::Feasible { gap: Some(gap) }
    } else {
        Status::Optimal
    };
    Ok(Solution {
        objective: inst.objective(&x),
        assignment: x,
        status,
    })
}

/// Variables grouped into blocks connected through shared constraints, each
/// block sorted, blocks ordered by their smallest variable.
fn blocks(inst: &IlpInstance) -> Vec<Vec<usize>> {
    let n = inst.num_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for c in &inst.constraints {
        if let Some(&(first, _)) = c.terms.first() {
            for &(v, _) in &c.terms[1..] {
                let (a, b) = (find(&mut parent, first), find(&mut parent, v));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut out: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..n {
        let r = find(&mut parent, v);
        out.entry(r).or_default().push(v);
    }
    out.into_values().collect()
}

struct Cons {
    terms: Vec<(u32, i8)>,
    eq: bool,
    rhs: i32,
}

#[derive(Clone, Copy, Default)]
struct Roles {
    own: u32,
    input: u32,
    output: u32,
}

struct Group {
    p: u32,
    ins: Vec<u32>,
    outs: Vec<u32>,
}

/// One independent block with local variable indices.
struct Block {
    n: usize,
    cost: Vec<f64>,
    cons: Vec<Cons>,
    var_cons: Vec<Vec<(u32, i8)>>,
    groups: Vec<Group>,
    roles: Vec<Roles>,
    w_in: Vec<f64>,
    w_out: Vec<f64>,
    /// Branching order: cost ascending, then index.
    order: Vec<u32>,
}

#[derive(Clone, Copy, Default)]
struct Act {
    fixed: i32,
    free_pos: i32,
    free_neg: i32,
}

#[derive(Clone)]
struct State {
    vals: Vec<i8>,
    act: Vec<Act>,
    gval: Vec<f64>,
    total: f64,
    cursor: usize,
}

enum BlockResult {
    Solved { x: Vec<bool>, gap: f64, limited: bool },
    Infeasible,
    NoIncumbent,
}

#[derive(PartialEq)]
struct Open {
    bound: f64,
    seq: u64,
    node: u32,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (bound, seq)
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Block {
    fn new(inst: &IlpInstance, vars: &[usize]) -> Self {
        let n = vars.len();
        let local = |v: usize| vars.binary_search(&v).expect("variable in block") as u32;
        let cost: Vec<f64> = vars.iter().map(|&v| inst.variables[v].cost).collect();
        let mut cons = Vec::new();
        let mut var_cons = vec![Vec::new(); n];
        for c in &inst.constraints {
            let Some(&(v0, _)) = c.terms.first() else { continue };
            if vars.binary_search(&v0).is_err() {
                continue;
            }
            let terms: Vec<(u32, i8)> = c.terms.iter().map(|&(v, k)| (local(v), k)).collect();
            for &(v, k) in &terms {
                var_cons[v as usize].push((cons.len() as u32, k));
            }
            cons.push(Cons {
                terms,
                eq: c.relation == Relation::Eq,
                rhs: c.rhs.clamp(i32::MIN as i64, i32::MAX as i64) as i32,
            });
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| cost[a as usize].total_cmp(&cost[b as usize]).then(a.cmp(&b)));
        let mut block = Block {
            n,
            cost,
            cons,
            var_cons,
            groups: Vec::new(),
            roles: vec![
                Roles {
                    own: UNSET,
                    input: UNSET,
                    output: UNSET
                };
                n
            ],
            w_in: Vec::new(),
            w_out: Vec::new(),
            order,
        };
        block.detect_groups();
        block
    }

    /// Finds selector groups (see module docs) and validates that every
    /// variable takes each role at most once.
    fn detect_groups(&mut self) {
        use std::collections::HashMap;
        let split = |c: &Cons| -> (Vec<u32>, Vec<u32>) {
            let mut pos: Vec<u32> = c.terms.iter().filter(|t| t.1 > 0).map(|t| t.0).collect();
            let mut neg: Vec<u32> = c.terms.iter().filter(|t| t.1 < 0).map(|t| t.0).collect();
            pos.sort_unstable();
            neg.sort_unstable();
            (pos, neg)
        };
        let zero_eq: Vec<usize> = (0..self.cons.len())
            .filter(|&i| self.cons[i].eq && self.cons[i].rhs == 0)
            .collect();
        let mut by_side: HashMap<Vec<u32>, Vec<(usize, Vec<u32>)>> = HashMap::new();
        for &i in &zero_eq {
            let (pos, neg) = split(&self.cons[i]);
            by_side.entry(pos.clone()).or_default().push((i, neg.clone()));
            by_side.entry(neg).or_default().push((i, pos));
        }
        for &i in &zero_eq {
            let (pos, neg) = split(&self.cons[i]);
            let (p, ins) = match (pos.len(), neg.len()) {
                (_, 1) if !pos.is_empty() => (neg[0], pos),
                (1, _) if !neg.is_empty() => (pos[0], neg),
                _ => continue,
            };
            let Some(outs) = by_side.get(&ins).and_then(|list| {
                list.iter()
                    .find(|(j, other)| {
                        *j != i && !other.contains(&p) && other.iter().all(|o| ins.binary_search(o).is_err())
                    })
                    .map(|(_, other)| other.clone())
            }) else {
                continue;
            };
            let roles = &self.roles;
            let p_free =
                roles[p as usize].own == UNSET && roles[p as usize].input == UNSET && roles[p as usize].output == UNSET;
            let ins_free = ins
                .iter()
                .all(|&s| roles[s as usize].input == UNSET && roles[s as usize].own == UNSET);
            let outs_free = outs
                .iter()
                .all(|&o| roles[o as usize].output == UNSET && roles[o as usize].own == UNSET);
            if !(p_free && ins_free && outs_free) {
                continue;
            }
            let g = self.groups.len() as u32;
            self.roles[p as usize].own = g;
            for &s in &ins {
                self.roles[s as usize].input = g;
            }
            for &o in &outs {
                self.roles[o as usize].output = g;
            }
            self.groups.push(Group { p, ins, outs });
        }
        self.w_in = vec![0.0; self.n];
        self.w_out = vec![0.0; self.n];
        for v in 0..self.n {
            let r = self.roles[v];
            match (r.input != UNSET, r.output != UNSET) {
                (true, true) => {
                    self.w_in[v] = self.cost[v] / 2.0;
                    self.w_out[v] = self.cost[v] - self.w_in[v];
                }
                (true, false) => self.w_in[v] = self.cost[v],
                (false, true) => self.w_out[v] = self.cost[v],
                (false, false) => {}
            }
        }
        if !self.groups.is_empty() {
            self.diffuse();
        }
    }

    fn min_excluding(&self, set: &[u32], w: &[f64], skip: u32) -> f64 {
        set.iter()
            .filter(|&&v| v != skip)
            .map(|&v| w[v as usize])
            .fold(f64::INFINITY, f64::min)
    }

    /// Coordinate ascent on the cost split of variables that sit in one
    /// group's out-set and another group's in-set.
    fn diffuse(&mut self) {
        let shared: Vec<u32> = (0..self.n as u32)
            .filter(|&v| self.roles[v as usize].input != UNSET && self.roles[v as usize].output != UNSET)
            .collect();
        if shared.is_empty() {
            return;
        }
        let scale = 1e-12 * (1.0 + self.cost.iter().map(|c| c.abs()).sum::<f64>());
        let mut last = self.root_value();
        for _ in 0..DIFFUSION_SWEEPS {
            for &v in &shared {
                let vi = v as usize;
                let a = &self.groups[self.roles[vi].output as usize];
                let b = &self.groups[self.roles[vi].input as usize];
                let in_a = self.min_excluding(&a.ins, &self.w_in, UNSET);
                let out_b = self.min_excluding(&b.outs, &self.w_out, UNSET);
                let m1a = self.cost[a.p as usize] + in_a + self.w_out[vi];
                let m0a = (self.cost[a.p as usize] + in_a + self.min_excluding(&a.outs, &self.w_out, v)).min(0.0);
                let m1b = self.cost[b.p as usize] + out_b + self.w_in[vi];
                let m0b = (self.cost[b.p as usize] + out_b + self.min_excluding(&b.ins, &self.w_in, v)).min(0.0);
                let (da, db) = (m1a - m0a, m1b - m0b);
                if !(da.is_finite() && db.is_finite()) {
                    continue;
                }
                let half = (da + db) / 2.0;
                self.w_out[vi] += half - da;
                self.w_in[vi] = self.cost[vi] - self.w_out[vi];
            }
            let value = self.root_value();
            if value - last <= scale {
                break;
            }
            last = value;
        }
    }

    fn root_value(&self) -> f64 {
        let vals = vec![FREE; self.n];
        (0..self.groups.len()).map(|g| self.group_value(g, &vals)).sum()
    }

    fn group_value(&self, g: usize, vals: &[i8]) -> f64 {
        let grp = &self.groups[g];
        let p = grp.p as usize;
        if vals[p] == 0 {
            return 0.0;
        }
        let pick = |set: &[u32], w: &[f64]| {
            let mut best = f64::INFINITY;
            for &v in set {
                match vals[v as usize] {
                    1 => return w[v as usize],
                    FREE => best = best.min(w[v as usize]),
                    _ => {}
                }
            }
            best
        };
        let (i, o) = (pick(&grp.ins, &self.w_in), pick(&grp.outs, &self.w_out));
        if !(i.is_finite() && o.is_finite()) {
            return if vals[p] == 1 { f64::INFINITY } else { 0.0 };
        }
        let v = self.cost[p] + i + o;
        if vals[p] == 1 {
            v
        } else {
            v.min(0.0)
        }
    }

    fn loose_value(&self, v: usize, val: i8) -> f64 {
        match val {
            FREE => self.cost[v].min(0.0),
            1 => self.cost[v],
            _ => 0.0,
        }
    }

    fn is_loose(&self, v: usize) -> bool {
        let r = self.roles[v];
        r.own == UNSET && r.input == UNSET && r.output == UNSET
    }

    fn root_state(&self) -> Option<State> {
        let mut act = vec![Act::default(); self.cons.len()];
        for (c, a) in self.cons.iter().zip(act.iter_mut()) {
            for &(_, k) in &c.terms {
                if k > 0 {
                    a.free_pos += 1;
                } else {
                    a.free_neg += 1;
                }
            }
        }
        let vals = vec![FREE; self.n];
        let gval: Vec<f64> = (0..self.groups.len()).map(|g| self.group_value(g, &vals)).collect();
        let loose: f64 = (0..self.n)
            .filter(|&v| self.is_loose(v))
            .map(|v| self.loose_value(v, FREE))
            .sum();
        let total = gval.iter().sum::<f64>() + loose;
        let mut s = State {
            vals,
            act,
            gval,
            total,
            cursor: 0,
        };
        // constraints that force values before any decision
        let mut queue = Vec::new();
        for c in 0..self.cons.len() {
            if !self.check_and_force(&mut s, c, &mut queue) {
                return None;
            }
        }
        let mut dirty = Vec::new();
        if !self.drain(&mut s, &mut queue, &mut dirty) {
            return None;
        }
        self.refresh(&mut s, &mut dirty);
        Some(s)
    }

    /// Checks constraint `c` under the current activities and queues the
    /// values it forces. Returns false on contradiction.
    fn check_and_force(&self, s: &mut State, c: usize, queue: &mut Vec<(u32, i8)>) -> bool {
        let con = &self.cons[c];
        let a = s.act[c];
        let min = a.fixed - a.free_neg;
        let max = a.fixed + a.free_pos;
        if min > con.rhs || (con.eq && max < con.rhs) {
            return false;
        }
        let at_min = min == con.rhs;
        let at_max = con.eq && max == con.rhs;
        if (at_min || at_max) && a.free_pos + a.free_neg > 0 {
            for &(v, k) in &con.terms {
                if s.vals[v as usize] != FREE {
                    continue;
                }
                // at the minimum every free term must stay at its low value
                let val = if at_min { (k < 0) as i8 } else { (k > 0) as i8 };
                queue.push((v, val));
            }
        }
        true
    }

    fn assign(&self, s: &mut State, v: u32, val: i8, queue: &mut Vec<(u32, i8)>, dirty: &mut Vec<u32>) -> bool {
        let vi = v as usize;
        if s.vals[vi] != FREE {
            return s.vals[vi] == val;
        }
        s.vals[vi] = val;
        if self.is_loose(vi) {
            s.total += self.loose_value(vi, val) - self.loose_value(vi, FREE);
        } else {
            let r = self.roles[vi];
            for g in [r.own, r.input, r.output] {
                if g != UNSET {
                    dirty.push(g);
                }
            }
        }
        for &(c, k) in &self.var_cons[vi] {
            let a = &mut s.act[c as usize];
            if k > 0 {
                a.free_pos -= 1;
            } else {
                a.free_neg -= 1;
            }
            a.fixed += k as i32 * val as i32;
            if !self.check_and_force(s, c as usize, queue) {
                return false;
            }
        }
        true
    }

    fn drain(&self, s: &mut State, queue: &mut Vec<(u32, i8)>, dirty: &mut Vec<u32>) -> bool {
        while let Some((v, val)) = queue.pop() {
            if !self.assign(s, v, val, queue, dirty) {
                queue.clear();
                return false;
            }
        }
        true
    }

    fn refresh(&self, s: &mut State, dirty: &mut Vec<u32>) {
        dirty.sort_unstable();
        dirty.dedup();
        for &g in dirty.iter() {
            let new = self.group_value(g as usize, &s.vals);
            s.total += new - s.gval[g as usize];
            s.gval[g as usize] = new;
        }
        dirty.clear();
    }

    /// Fixes `v = val` and propagates. Returns false on contradiction.
    fn decide(&self, s: &mut State, v: u32, val: i8) -> bool {
        let (mut queue, mut dirty) = (vec![(v, val)], Vec::new());
        let ok = self.drain(s, &mut queue, &mut dirty);
        self.refresh(s, &mut dirty);
        ok && s.total.is_finite()
    }

    fn next_free(&self, s: &mut State) -> Option<u32> {
        while s.cursor < self.n {
            let v = self.order[s.cursor];
            if s.vals[v as usize] == FREE {
                return Some(v);
            }
            s.cursor += 1;
        }
        None
    }

    fn leaf_value(&self, s: &State) -> (Vec<bool>, f64) {
        let x: Vec<bool> = s.vals.iter().map(|&v| v == 1).collect();
        let obj = objective(&self.cost, &x);
        (x, obj)
    }

    fn search(&self, cfg: &ExactConfig, deadline: Option<Instant>) -> BlockResult {
        let Some(root) = self.root_state() else {
            return BlockResult::Infeasible;
        };
        // decisions form a tree stored as parent links
        let mut arena: Vec<(u32, u32, i8)> = Vec::new();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Open {
            bound: root.total,
            seq,
            node: UNSET,
        });
        let mut best: Option<(Vec<bool>, f64)> = None;
        let mut nodes = 0u64;
        let mut limited = false;
        let cutoff = |best: &Option<(Vec<bool>, f64)>| match best {
            Some((_, obj)) => obj - (1e-9 * obj.abs().max(1.0)).max(cfg.gap_tolerance),
            None => f64::INFINITY,
        };
        let mut path = Vec::new();
        'outer: while let Some(open) = heap.pop() {
            if open.bound >= cutoff(&best) {
                // best-first: nothing left can improve
                heap.clear();
                break;
            }
            let mut s = root.clone();
            path.clear();
            let mut at = open.node;
            while at != UNSET {
                let (parent, v, val) = arena[at as usize];
                path.push((v, val));
                at = parent;
            }
            if !path.iter().rev().all(|&(v, val)| self.decide(&mut s, v, val)) {
                continue;
            }
            let mut here = open.node;
            loop {
                nodes += 1;
                if nodes.is_multiple_of(256) {
                    let timed_out = deadline.is_some_and(|d| Instant::now() >= d);
                    if timed_out || cfg.node_limit.is_some_and(|l| nodes >= l) {
                        limited = true;
                        heap.push(Open {
                            bound: s.total,
                            seq: u64::MAX,
                            node: here,
                        });
                        break 'outer;
                    }
                }
                if s.total >= cutoff(&best) {
                    break;
                }
                let Some(v) = self.next_free(&mut s) else {
                    let (x, obj) = self.leaf_value(&s);
                    if best.as_ref().is_none_or(|b| obj < b.1) {
                        best = Some((x, obj));
                    }
                    break;
                };
                if self.cost[v as usize] >= 0.0 {
                    // every free cost is non-negative: the all-zero completion,
                    // when feasible, is optimal for this subtree
                    let mut z = s.clone();
                    let mut ok = true;
                    while let Some(u) = self.next_free(&mut z) {
                        if !self.decide(&mut z, u, 0) {
                            ok = false;
                            break;
                        }
                    }
                    // propagation may have forced a paid variable to one
                    ok = ok && z.vals.iter().zip(&s.vals).all(|(&a, &b)| b != FREE || a == 0);
                    if ok {
                        let (x, obj) = self.leaf_value(&z);
                        if best.as_ref().is_none_or(|b| obj < b.1) {
                            best = Some((x, obj));
                        }
                        break;
                    }
                }
                let preferred: i8 = if self.cost[v as usize] < 0.0 { 1 } else { 0 };
                arena.push((here, v, 1 - preferred));
                seq += 1;
                heap.push(Open {
                    bound: s.total,
                    seq,
                    node: arena.len() as u32 - 1,
                });
                arena.push((here, v, preferred));
                here = arena.len() as u32 - 1;
                if !self.decide(&mut s, v, preferred) {
                    break;
                }
            }
        }
        let open_bound = heap.iter().map(|o| o.bound).fold(f64::INFINITY, f64::min);
        match best {
            Some((x, obj)) => BlockResult::Solved {
                gap: if limited { (obj - open_bound).max(0.0) } else { 0.0 },
                x,
                limited,
            },
            None if limited => {
                // all-zero is the natural fallback for selection programs
                if self.cons.iter().all(|c| if c.eq { c.rhs == 0 } else { c.rhs >= 0 }) {
                    BlockResult::Solved {
                        gap: (0.0 - open_bound).max(0.0),
                        x: vec![false; self.n],
                        limited,
                    }
                } else {
                    BlockResult::NoIncumbent
                }
            }
            None => BlockResult::Infeasible,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::ilp::{Constraint, ConstraintTag, VarRef, Variable};

    fn inst(costs: &[f64], cons: &[(&[(usize, i8)], Relation, i64)]) -> IlpInstance {
        IlpInstance {
            variables: costs
                .iter()
                .map(|&cost| Variable {
                    var: VarRef::Free,
                    cost,
                })
                .collect(),
            constraints: cons
                .iter()
                .map(|(t, r, rhs)| Constraint {
                    terms: t.to_vec(),
                    relation: *r,
                    rhs: *rhs,
                    tag: ConstraintTag::Other,
                })
                .collect(),
        }
    }

    #[test]
    fn positive_costs_select_nothing() {
        let i = inst(&[1.0, 2.0], &[(&[(0, 1), (1, -1)], Relation::Eq, 0)]);
        let s = solve_exact(&i, &ExactConfig::default()).unwrap();
        assert_eq!(s.assignment, vec![false, false]);
        assert_eq!((s.objective, s.status), (0.0, Status::Optimal));
    }

    #[test]
    fn single_proposal_takes_everything() {
        let g = crate::solve::ilp::test_support::single_node_graph(-1.0, -0.1, -0.1);
        let s = solve_exact(&crate::solve::formulate(&g), &ExactConfig::default()).unwrap();
        assert_eq!(s.assignment, vec![true; 3]);
        assert_eq!(s.objective, -1.0 + -0.1 + -0.1);
    }

    #[test]
    fn contradiction_is_infeasible() {
        // x0 = 1, x1 = 1 forced, but x0 + x1 <= 1
        let i = inst(
            &[1.0, 1.0],
            &[
                (&[(0, 1)], Relation::Eq, 1),
                (&[(1, 1)], Relation::Eq, 1),
                (&[(0, 1), (1, 1)], Relation::Le, 1),
            ],
        );
        assert_eq!(
            solve_exact(&i, &ExactConfig::default()).unwrap().status,
            Status::Infeasible
        );
    }

    #[test]
    fn unconstrained_negative_variable_is_taken() {
        let i = inst(&[-1.0, 3.0], &[]);
        let s = solve_exact(&i, &ExactConfig::default()).unwrap();
        assert_eq!(s.assignment, vec![true, false]);
    }

    #[test]
    fn forced_positive_costs_are_paid() {
        // exactly one of three positive-cost variables
        let i = inst(&[2.0, 1.5, 3.0], &[(&[(0, 1), (1, 1), (2, 1)], Relation::Eq, 1)]);
        let s = solve_exact(&i, &ExactConfig::default()).unwrap();
        assert_eq!(s.assignment, vec![false, true, false]);
    }
}
