#![allow(dead_code)]

use std::collections::BTreeSet;

use ordcsp::analysis::relevant_values;
use ordcsp::encoder::{encode, CnfDocument, EncodeOptions, VarMap};
use ordcsp::frontend::normalize_comparisons;
use ordcsp::model::{
    normalize_sum, Assignment, CmpOp, ConstraintClause, Instance, IntervalSet, Literal, LiteralExpr,
    Relation, RelationKind, Value, Variable,
};
use ordcsp::oracle::enumerate_bruteforce;
use ordcsp::solver::{enumerate, SolverConfig};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_domain(rng: &mut StdRng, max_size: usize) -> IntervalSet {
    let size = rng.gen_range(1..=max_size);
    let mut pool: Vec<Value> = (-3..=6).collect();
    pool.shuffle(rng);
    IntervalSet::from_values(pool.into_iter().take(size))
}

pub fn random_sum_literal(rng: &mut StdRng, inst: &Instance, ints: &[String], max_terms: usize, op: CmpOp) -> LiteralExpr {
    let k = rng.gen_range(1..=max_terms.min(ints.len()));
    let vars: Vec<&String> = ints.choose_multiple(rng, k).collect();
    let terms: Vec<(Value, String)> = vars
        .iter()
        .map(|v| {
            let mut c = rng.gen_range(-4..=3);
            if c >= 0 {
                c += 1;
            }
            (c, (*v).clone())
        })
        .collect();
    let (mut lo, mut hi) = (0, 0);
    for (c, v) in &terms {
        let d = inst.int_domain(v).unwrap();
        let (a, b) = (c * d.min().unwrap(), c * d.max().unwrap());
        lo += a.min(b);
        hi += a.max(b);
    }
    let rhs = rng.gen_range(lo - 2..=hi + 1);
    LiteralExpr::LinearCmp {
        sum: normalize_sum(terms).unwrap(),
        op,
        rhs,
    }
}

/// Up to 4 Integer variables with domains of at most 5 values, at most one
/// Boolean, at most 5 clauses mixing inequalities, alldifferent and tables.
pub fn random_instance(rng: &mut StdRng) -> Instance {
    let mut inst = Instance::new();
    let n = rng.gen_range(1..=4);
    let ints: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    for name in &ints {
        inst.add_variable(Variable::integer(name.clone(), random_domain(rng, 5)).unwrap())
            .unwrap();
    }
    let with_bool = rng.gen_bool(0.5);
    if with_bool {
        inst.add_variable(Variable::boolean("b")).unwrap();
    }
    for r in 0..2 {
        let arity = rng.gen_range(1..=n.min(3));
        let count = rng.gen_range(0..=6);
        let tuples = (0..count)
            .map(|_| (0..arity).map(|_| rng.gen_range(-3..=6)).collect())
            .collect();
        inst.add_relation(Relation {
            id: format!("r{r}"),
            arity,
            kind: if r == 0 { RelationKind::Supports } else { RelationKind::Conflicts },
            tuples,
        })
        .unwrap();
    }
    let clauses = rng.gen_range(0..=5);
    for c in 0..clauses {
        let len = rng.gen_range(1..=3);
        let mut literals = Vec::new();
        for _ in 0..len {
            let kind = rng.gen_range(0..10);
            let lit = match kind {
                0..=4 => {
                    let e = random_sum_literal(rng, &inst, &ints, 3, CmpOp::Le);
                    Literal { expr: e, negated: rng.gen_bool(0.3) }
                }
                5 | 6 if n >= 2 => {
                    let k = rng.gen_range(2..=n);
                    let args = ints.choose_multiple(rng, k).cloned().collect();
                    Literal::pos(LiteralExpr::AllDifferent(args))
                }
                7 | 8 => {
                    let rel = &inst.relations[rng.gen_range(0..2)];
                    let args = ints.choose_multiple(rng, rel.arity).cloned().collect();
                    Literal {
                        expr: LiteralExpr::Table { rel: rel.id.clone(), args },
                        negated: rng.gen_bool(0.3),
                    }
                }
                _ if with_bool => Literal {
                    expr: LiteralExpr::BoolVar("b".into()),
                    negated: rng.gen_bool(0.5),
                },
                _ => Literal::pos(random_sum_literal(rng, &inst, &ints, 3, CmpOp::Le)),
            };
            literals.push(lit);
        }
        inst.clauses.push(ConstraintClause { id: format!("c{}", c + 1), literals });
    }
    inst.validate().unwrap();
    inst
}

pub fn compile(inst: &Instance, opts: EncodeOptions) -> (Instance, CnfDocument, VarMap) {
    let normalized = normalize_comparisons(inst).unwrap();
    let tables = relevant_values(&normalized).unwrap();
    let (cnf, map) = encode(&normalized, &tables, opts).unwrap();
    (normalized, cnf, map)
}

pub fn solver_solutions(inst: &Instance, opts: EncodeOptions) -> Vec<Assignment> {
    let (normalized, cnf, map) = compile(inst, opts);
    enumerate(&cnf, &map, &normalized, None, &SolverConfig::default()).unwrap()
}

pub fn oracle_solutions(inst: &Instance) -> BTreeSet<Assignment> {
    enumerate_bruteforce(inst, None).unwrap().into_iter().collect()
}
