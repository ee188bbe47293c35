//! Embedded SAT solving, DIMACS exchange, model decoding and solution
//! enumeration.

mod cdcl;
mod dimacs;

use thiserror::Error;

use crate::encoder::{CnfDocument, Lit, VarMap};
use crate::model::{Assignment, Instance, Val, Value};

pub use cdcl::{Cdcl, Stats};
pub use dimacs::{parse_dimacs, parse_model, write_dimacs, DimacsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    #[default]
    Activity,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub heuristic: Heuristic,
    pub phase_saving: bool,
    pub conflict_limit: Option<u64>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            heuristic: Heuristic::Activity,
            phase_saving: true,
            conflict_limit: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// Model indexed by variable id; index 0 is unused.
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Conflict,
    Fixed(Vec<i32>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("model has {got} variables, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("order atoms of `{0}` are not monotone")]
    NonMonotone(String),
    #[error("variable `{0}` has no atoms in the variable map")]
    Unmapped(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("conflict limit reached")]
    Unknown,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

fn load(cnf: &CnfDocument, cfg: &SolverConfig) -> Cdcl {
    let mut s = Cdcl::new(cnf.num_vars as usize, cfg);
    for c in &cnf.clauses {
        if !s.add_clause(c) {
            break;
        }
    }
    s
}

pub fn solve(cnf: &CnfDocument, cfg: &SolverConfig) -> SolveResult {
    solve_with_stats(cnf, cfg).0
}

pub fn solve_with_stats(cnf: &CnfDocument, cfg: &SolverConfig) -> (SolveResult, Stats) {
    let mut s = load(cnf, cfg);
    let result = match s.solve() {
        cdcl::Outcome::Sat(m) => SolveResult::Sat(m),
        cdcl::Outcome::Unsat => SolveResult::Unsat,
        cdcl::Outcome::Unknown => SolveResult::Unknown,
    };
    (result, s.stats)
}

/// Unit propagation at decision level 0, after asserting `assumptions` as
/// unit clauses.
pub fn propagate_only(cnf: &CnfDocument, assumptions: &[i32]) -> Propagation {
    let mut s = load(cnf, &SolverConfig::default());
    for &a in assumptions {
        s.add_clause(&[a]);
    }
    match s.fixed_literals() {
        None => Propagation::Conflict,
        Some(fixed) => Propagation::Fixed(fixed),
    }
}

/// Value of every variable under `model`: for Integer variables the greatest
/// encoding point `p` with `Less(x,p)` false, i.e. the representative of
/// the decoded class.
pub fn decode(model: &[bool], map: &VarMap, inst: &Instance) -> Result<Assignment, DecodeError> {
    if model.len() != map.len() + 1 {
        return Err(DecodeError::Length {
            expected: map.len(),
            got: model.len().saturating_sub(1),
        });
    }
    let mut out = Assignment::new();
    for var in inst.variables.values() {
        if var.domain.is_bool() {
            let l = map
                .bool_val(&var.name)
                .ok_or_else(|| DecodeError::Unmapped(var.name.clone()))?;
            out.set(var.name.clone(), Val::Bool(l.eval(model)));
            continue;
        }
        let points = map
            .points
            .get(&var.name)
            .ok_or_else(|| DecodeError::Unmapped(var.name.clone()))?;
        let mut value = *points.last().expect("points are non-empty");
        let mut below = true;
        for &p in points.iter().rev().skip(1) {
            let less = map
                .less(&var.name, p)
                .ok_or_else(|| DecodeError::Unmapped(var.name.clone()))?
                .eval(model);
            if !less {
                if !below {
                    return Err(DecodeError::NonMonotone(var.name.clone()));
                }
                value = p;
            } else {
                below = false;
            }
        }
        out.set(var.name.clone(), Val::Int(value));
    }
    Ok(out)
}

/// Domain values represented by encoding point `p` of `var`.
pub fn class_values(map: &VarMap, inst: &Instance, var: &str, p: Value) -> Vec<Value> {
    let points = &map.points[var];
    let dom = inst.int_domain(var).expect("integer variable");
    let idx = points.iter().position(|&q| q == p).expect("encoding point");
    match idx.checked_sub(1) {
        Some(up) => dom.values_between(p, points[up] - 1).collect(),
        None => dom.values_between(p, dom.max().expect("non-empty")).collect(),
    }
}

/// Expands class representatives into concrete assignments, stopping once
/// `out` holds `limit` elements.
fn expand(rep: &Assignment, map: &VarMap, inst: &Instance, limit: Option<usize>, out: &mut Vec<Assignment>) {
    let classes: Vec<(String, Vec<Value>)> = map
        .points
        .keys()
        .map(|v| (v.clone(), class_values(map, inst, v, rep.int(v).expect("decoded"))))
        .collect();
    let mut idx = vec![0usize; classes.len()];
    loop {
        if limit.is_some_and(|l| out.len() >= l) {
            return;
        }
        let mut a = rep.clone();
        for ((v, vals), &i) in classes.iter().zip(&idx) {
            a.set(v.clone(), Val::Int(vals[i]));
        }
        out.push(a);
        let mut k = classes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < classes[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// All (or the first `limit`) solutions of `inst` via repeated solving with
/// blocking clauses over the class and Boolean atoms.
pub fn enumerate(
    cnf: &CnfDocument,
    map: &VarMap,
    inst: &Instance,
    limit: Option<usize>,
    cfg: &SolverConfig,
) -> Result<Vec<Assignment>, SolveError> {
    let mut s = load(cnf, cfg);
    let mut out = Vec::new();
    while limit.is_none_or(|l| out.len() < l) {
        let model = match s.solve() {
            cdcl::Outcome::Sat(m) => m,
            cdcl::Outcome::Unsat => break,
            cdcl::Outcome::Unknown => return Err(SolveError::Unknown),
        };
        let rep = decode(&model, map, inst)?;
        let mut block = Vec::new();
        for (name, val) in rep.iter() {
            let lit = match *val {
                Val::Bool(b) => {
                    let l = map.bool_val(name).expect("decoded");
                    if b {
                        l
                    } else {
                        !l
                    }
                }
                Val::Int(p) => map.eq(name, p).expect("decoded"),
            };
            if let Lit::Var(v) = lit {
                block.push(-v);
            }
        }
        expand(&rep, map, inst, limit, &mut out);
        if block.is_empty() || !s.add_clause(&block) {
            break;
        }
    }
    Ok(out)
}
