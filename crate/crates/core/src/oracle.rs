//! Reference semantics: direct evaluation of clauses and exhaustive search.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    domain_values, Assignment, Instance, Literal, LiteralExpr, ModelError, RelationKind, Val,
};

pub const SEARCH_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("variable `{0}` has a value of the wrong kind")]
    WrongKind(String),
    #[error("search space of {0} assignments exceeds the limit")]
    TooLarge(u128),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn int_of(v: &Assignment, name: &str) -> Result<i64, OracleError> {
    match v.get(name) {
        Some(Val::Int(x)) => Ok(x),
        Some(Val::Bool(_)) => Err(OracleError::WrongKind(name.to_string())),
        None => Err(OracleError::Unassigned(name.to_string())),
    }
}

/// Alldifferent by sweeping the arguments in index order with a seen set;
/// when the arguments must cover their whole value union, a value not seen
/// by the last index is a violation too.
fn all_different(inst: &Instance, args: &[String], v: &Assignment) -> Result<bool, OracleError> {
    let mut seen = BTreeSet::new();
    for a in args {
        if !seen.insert(int_of(v, a)?) {
            return Ok(false);
        }
    }
    let mut union = BTreeSet::new();
    for a in args {
        union.extend(inst.int_domain(a)?.iter());
    }
    if union.len() == args.len() && union.iter().any(|d| !seen.contains(d)) {
        return Ok(false);
    }
    Ok(true)
}

/// Tuple traversal: each tuple's matched prefix grows argument by argument.
fn table(inst: &Instance, rel: &str, args: &[String], v: &Assignment) -> Result<bool, OracleError> {
    let relation = inst
        .relation(rel)
        .ok_or_else(|| ModelError::UndeclaredRelation(rel.to_string()))?;
    let values = args.iter().map(|a| int_of(v, a)).collect::<Result<Vec<_>, _>>()?;
    let mut alive: Vec<&Vec<i64>> = relation.tuples.iter().collect();
    for (i, x) in values.iter().enumerate() {
        alive.retain(|t| t[i] == *x);
    }
    let reached = !alive.is_empty();
    Ok(match relation.kind {
        RelationKind::Supports => reached,
        RelationKind::Conflicts => !reached,
    })
}

/// Truth of a literal (polarity applied) under `v`.
pub fn eval_literal(inst: &Instance, lit: &Literal, v: &Assignment) -> Result<bool, OracleError> {
    let holds = match &lit.expr {
        LiteralExpr::BoolVar(name) => match v.get(name) {
            Some(Val::Bool(b)) => b,
            Some(Val::Int(_)) => return Err(OracleError::WrongKind(name.clone())),
            None => return Err(OracleError::Unassigned(name.clone())),
        },
        LiteralExpr::LinearCmp { sum, op, rhs } => {
            let mut total: i128 = 0;
            for t in sum.terms() {
                total += i128::from(t.coeff) * i128::from(int_of(v, &t.var)?);
            }
            let rhs = i128::from(*rhs);
            match op {
                crate::model::CmpOp::Le => total <= rhs,
                crate::model::CmpOp::Ge => total >= rhs,
                crate::model::CmpOp::Eq => total == rhs,
                crate::model::CmpOp::Ne => total != rhs,
                crate::model::CmpOp::Lt => total < rhs,
                crate::model::CmpOp::Gt => total > rhs,
            }
        }
        LiteralExpr::AllDifferent(args) => all_different(inst, args, v)?,
        LiteralExpr::Table { rel, args } => table(inst, rel, args, v)?,
    };
    Ok(holds != lit.negated)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub overall: bool,
    pub clauses: BTreeMap<String, bool>,
    /// Literal truth values of every violated clause, in literal order.
    pub failing: BTreeMap<String, Vec<(String, bool)>>,
}

pub fn check(inst: &Instance, v: &Assignment) -> Result<CheckReport, OracleError> {
    for name in inst.variables.keys() {
        if v.get(name).is_none() {
            return Err(OracleError::Unassigned(name.clone()));
        }
    }
    let mut report = CheckReport {
        overall: true,
        clauses: BTreeMap::new(),
        failing: BTreeMap::new(),
    };
    for clause in &inst.clauses {
        let mut detail = Vec::with_capacity(clause.literals.len());
        for lit in &clause.literals {
            detail.push((lit.to_string(), eval_literal(inst, lit, v)?));
        }
        let ok = detail.iter().any(|(_, b)| *b);
        report.overall &= ok;
        report.clauses.insert(clause.id.clone(), ok);
        if !ok {
            report.failing.insert(clause.id.clone(), detail);
        }
    }
    Ok(report)
}

/// Every solution, variables in name order with values ascending (false
/// before true), stopping after `limit` solutions.
pub fn enumerate_bruteforce(inst: &Instance, limit: Option<usize>) -> Result<Vec<Assignment>, OracleError> {
    let vars: Vec<(&String, Vec<Val>)> = inst
        .variables
        .values()
        .map(|var| {
            let vals = if var.domain.is_bool() {
                vec![Val::Bool(false), Val::Bool(true)]
            } else {
                let dom = var.domain.as_int().expect("integer domain");
                if u128::from(dom.len()) > SEARCH_LIMIT {
                    return Err(OracleError::TooLarge(u128::from(dom.len())));
                }
                domain_values(&var.domain)?.into_iter().map(Val::Int).collect()
            };
            Ok((&var.name, vals))
        })
        .collect::<Result<_, OracleError>>()?;
    let size = vars
        .iter()
        .try_fold(1u128, |acc, (_, vals)| acc.checked_mul(vals.len() as u128))
        .unwrap_or(u128::MAX);
    if size > SEARCH_LIMIT {
        return Err(OracleError::TooLarge(size));
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        if limit.is_some_and(|l| out.len() >= l) {
            break;
        }
        let mut a = Assignment::new();
        for ((name, vals), &i) in vars.iter().zip(&idx) {
            a.set((*name).clone(), vals[i]);
        }
        if check(inst, &a)?.overall {
            out.push(a);
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < vars[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_native;
    use crate::model::{IntervalSet, Relation, Variable};

    fn example() -> Instance {
        parse_native(include_str!("../data/example1.csp")).unwrap()
    }

    fn v(b: bool, x: i64, y: i64, z: i64) -> Assignment {
        Assignment::new()
            .with("b", Val::Bool(b))
            .with("x", Val::Int(x))
            .with("y", Val::Int(y))
            .with("z", Val::Int(z))
    }

    #[test]
    fn example_literals() {
        let inst = example();
        let sum_lit = &inst.clauses[1].literals[1];
        assert!(eval_literal(&inst, sum_lit, &v(false, 2, 3, 1)).unwrap());
        let ad = &inst.clauses[0].literals[0];
        assert!(eval_literal(&inst, ad, &v(false, 1, 3, 2)).unwrap());
        assert!(!eval_literal(&inst, ad, &v(false, 1, 1, 2)).unwrap());
        let tbl = &inst.clauses[2].literals[1];
        assert!(eval_literal(&inst, tbl, &v(true, 3, 1, 2)).unwrap());
    }

    #[test]
    fn check_reports() {
        let inst = example();
        assert!(check(&inst, &v(true, 1, 3, 2)).unwrap().overall);
        let bad = check(&inst, &v(true, 2, 3, 1)).unwrap();
        assert!(!bad.overall);
        assert_eq!(bad.failing.keys().collect::<Vec<_>>(), vec!["c3"]);
        assert_eq!(
            check(&inst, &Assignment::new().with("b", Val::Bool(true))),
            Err(OracleError::Unassigned("x".into()))
        );
        let empty = parse_native("int x 1 3").unwrap();
        assert!(check(&empty, &Assignment::new().with("x", Val::Int(2))).unwrap().overall);
    }

    #[test]
    fn example_solutions() {
        let sols = enumerate_bruteforce(&example(), None).unwrap();
        assert_eq!(
            sols,
            vec![v(false, 1, 3, 2), v(false, 2, 3, 1), v(true, 1, 3, 2), v(true, 3, 1, 2)]
        );
    }

    #[test]
    fn trivial_searches() {
        let none = parse_native("int x 1 3\nclause sum(x) <= 0").unwrap();
        assert!(enumerate_bruteforce(&none, None).unwrap().is_empty());
        let b = parse_native("bool b").unwrap();
        assert_eq!(enumerate_bruteforce(&b, None).unwrap().len(), 2);
        let big = parse_native("int x 1 10000\nint y 1 10000").unwrap();
        assert!(matches!(enumerate_bruteforce(&big, None), Err(OracleError::TooLarge(_))));
    }

    #[test]
    fn sweep_agrees_with_pairwise() {
        for n in 1..=5usize {
            for k in 1..=5i64 {
                let mut inst = Instance::new();
                let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
                for name in &names {
                    inst.add_variable(Variable::integer(name.clone(), IntervalSet::single(1, k).unwrap()).unwrap())
                        .unwrap();
                }
                let total = (k as usize).pow(n as u32);
                for code in 0..total {
                    let mut a = Assignment::new();
                    let mut c = code;
                    let mut vals = Vec::new();
                    for name in &names {
                        let x = (c % k as usize) as i64 + 1;
                        c /= k as usize;
                        vals.push(x);
                        a.set(name.clone(), Val::Int(x));
                    }
                    let pairwise = (0..n).all(|i| (i + 1..n).all(|j| vals[i] != vals[j]));
                    assert_eq!(all_different(&inst, &names, &a).unwrap(), pairwise);
                }
            }
        }
    }

    #[test]
    fn traversal_agrees_with_membership() {
        let mut inst = Instance::new();
        for name in ["x", "y"] {
            inst.add_variable(Variable::integer(name, IntervalSet::single(0, 3).unwrap()).unwrap())
                .unwrap();
        }
        let tuples = vec![vec![0, 1], vec![2, 2], vec![3, 0], vec![0, 3]];
        for kind in [RelationKind::Supports, RelationKind::Conflicts] {
            let mut inst = inst.clone();
            inst.add_relation(Relation {
                id: "r".into(),
                arity: 2,
                kind,
                tuples: tuples.clone(),
            })
            .unwrap();
            let args = vec!["x".to_string(), "y".to_string()];
            for x in 0..4 {
                for y in 0..4 {
                    let a = Assignment::new().with("x", Val::Int(x)).with("y", Val::Int(y));
                    let member = tuples.contains(&vec![x, y]);
                    let expect = (kind == RelationKind::Supports) == member;
                    assert_eq!(table(&inst, "r", &args, &a).unwrap(), expect);
                }
            }
        }
    }
}
