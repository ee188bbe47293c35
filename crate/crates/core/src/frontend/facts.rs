//! ASP fact representation of instances (`var/2`, `var/3`, `constraint/2`,
//! `rel/4`, `tuple/4`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{
    normalize_sum, CmpOp, ConstraintClause, Domain, Instance, IntervalSet, LinearSum, Literal,
    LiteralExpr, ModelError, Relation, RelationKind, Value, Variable,
};

use super::term::{parse_term_document, Term};
use super::FrontendError;

/// `arg(x1,arg(...,arg(xn,nil)...))`
pub(crate) fn arg_list_term(args: &[String]) -> Term {
    args.iter().rev().fold(Term::constant("nil"), |tail, a| {
        Term::fun("arg", vec![Term::constant(a), tail])
    })
}

pub(crate) fn mul_term(coeff: Value, var: &str) -> Term {
    Term::fun("op", vec![Term::constant("mul"), Term::Int(coeff), Term::constant(var)])
}

/// Term of the first `len` addends of `sum`.
pub(crate) fn prefix_term(sum: &LinearSum, len: usize) -> Term {
    let terms = &sum.terms()[..len];
    let mut acc = mul_term(terms[0].coeff, &terms[0].var);
    for t in &terms[1..] {
        acc = Term::fun("op", vec![Term::constant("add"), acc, mul_term(t.coeff, &t.var)]);
    }
    acc
}

fn literal_term(lit: &Literal, rel_ids: &BTreeMap<&str, String>) -> Result<Term, FrontendError> {
    let inner = match &lit.expr {
        LiteralExpr::BoolVar(name) => Term::constant(name),
        LiteralExpr::LinearCmp { sum, op, rhs } => {
            if *op != CmpOp::Le {
                return Err(FrontendError::NotNormalized(lit.to_string()));
            }
            Term::fun(
                "op",
                vec![Term::constant("le"), prefix_term(sum, sum.len()), Term::Int(*rhs)],
            )
        }
        LiteralExpr::AllDifferent(args) => Term::fun(
            "global",
            vec![Term::constant("alldifferent"), arg_list_term(args)],
        ),
        LiteralExpr::Table { rel, args } => {
            let id = rel_ids
                .get(rel.as_str())
                .ok_or_else(|| FrontendError::DanglingRelation(rel.clone()))?;
            Term::fun("rel", vec![Term::constant(id), arg_list_term(args)])
        }
    };
    Ok(if lit.negated {
        Term::fun("op", vec![Term::constant("neg"), inner])
    } else {
        inner
    })
}

/// Serializes a `<=`-normalized instance as facts, one per line.
/// Relations are renamed `r, r2, r3, ...` in declaration order.
pub fn emit_facts(inst: &Instance) -> Result<String, FrontendError> {
    let rel_ids: BTreeMap<&str, String> = inst
        .relations
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let id = if i == 0 { "r".to_string() } else { format!("r{}", i + 1) };
            (r.id.as_str(), id)
        })
        .collect();
    let mut out = String::new();
    for var in inst.variables.values() {
        match &var.domain {
            Domain::Bool => writeln!(out, "var({}).", var.name).unwrap(),
            Domain::Int(set) => {
                for (k, (lo, hi)) in set.intervals().iter().enumerate() {
                    writeln!(out, "var({},{},range({},{})).", var.name, k, lo, hi).unwrap();
                }
            }
        }
    }
    for clause in &inst.clauses {
        for lit in &clause.literals {
            writeln!(out, "constraint({},{}).", clause.id, literal_term(lit, &rel_ids)?).unwrap();
        }
    }
    for rel in &inst.relations {
        let id = &rel_ids[rel.id.as_str()];
        writeln!(
            out,
            "rel({},{},{},{}).",
            id,
            rel.arity,
            rel.tuples.len(),
            rel.kind.keyword()
        )
        .unwrap();
        for (t, tuple) in rel.tuples.iter().enumerate() {
            for (i, d) in tuple.iter().enumerate() {
                writeln!(out, "tuple({},{},{},{}).", id, t + 1, i + 1, d).unwrap();
            }
        }
    }
    Ok(out)
}

fn malformed(t: &Term) -> FrontendError {
    FrontendError::MalformedFact(t.to_string())
}

fn constant(t: &Term) -> Result<&str, FrontendError> {
    match t {
        Term::Const(c) => Ok(c),
        other => Err(malformed(other)),
    }
}

fn int(t: &Term) -> Result<Value, FrontendError> {
    match t {
        Term::Int(v) => Ok(*v),
        other => Err(malformed(other)),
    }
}

fn decode_args(t: &Term) -> Result<Vec<String>, FrontendError> {
    let mut args = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::Const(c) if c == "nil" => break,
            Term::Fn(f, a) if f == "arg" && a.len() == 2 => {
                match &a[0] {
                    Term::Const(c) if c != "nil" => args.push(c.clone()),
                    other => return Err(FrontendError::MalformedArgs(other.to_string())),
                }
                cur = &a[1];
            }
            other => return Err(FrontendError::MalformedArgs(other.to_string())),
        }
    }
    if args.is_empty() {
        return Err(FrontendError::MalformedArgs(t.to_string()));
    }
    Ok(args)
}

fn decode_sum(t: &Term, out: &mut Vec<(Value, String)>) -> Result<(), FrontendError> {
    match t {
        Term::Fn(f, a) if f == "op" && a.len() == 3 => match constant(&a[0])? {
            "mul" => {
                out.push((int(&a[1])?, constant(&a[2])?.to_string()));
                Ok(())
            }
            "add" => {
                decode_sum(&a[1], out)?;
                decode_sum(&a[2], out)
            }
            other => Err(FrontendError::UnknownPredicate(format!("op({other},...)"))),
        },
        other => Err(malformed(other)),
    }
}

fn decode_literal(t: &Term, relations: &[Relation]) -> Result<Literal, FrontendError> {
    let expr = match t {
        Term::Const(name) => LiteralExpr::BoolVar(name.clone()),
        Term::Fn(f, a) if f == "op" && a.len() == 2 && constant(&a[0])? == "neg" => {
            let mut inner = decode_literal(&a[1], relations)?;
            inner.negated = !inner.negated;
            return Ok(inner);
        }
        Term::Fn(f, a) if f == "op" && a.len() == 3 && constant(&a[0])? == "le" => {
            let mut terms = Vec::new();
            decode_sum(&a[1], &mut terms)?;
            let sum = normalize_sum(terms)?;
            LiteralExpr::LinearCmp {
                sum,
                op: CmpOp::Le,
                rhs: int(&a[2])?,
            }
        }
        Term::Fn(f, a) if f == "global" && a.len() == 2 => match constant(&a[0])? {
            "alldifferent" => LiteralExpr::AllDifferent(decode_args(&a[1])?),
            other => return Err(FrontendError::UnknownPredicate(format!("global({other},...)"))),
        },
        Term::Fn(f, a) if f == "rel" && a.len() == 2 => {
            let rel = constant(&a[0])?.to_string();
            if !relations.iter().any(|r| r.id == rel) {
                return Err(FrontendError::DanglingRelation(rel));
            }
            LiteralExpr::Table {
                rel,
                args: decode_args(&a[1])?,
            }
        }
        other => {
            let sig = other
                .signature()
                .map(|(f, n)| format!("{f}/{n}"))
                .unwrap_or_else(|| other.to_string());
            return Err(FrontendError::UnknownPredicate(sig));
        }
    };
    Ok(Literal::pos(expr))
}

/// Reads a fact document back into an [`Instance`].
pub fn parse_facts(doc: &str) -> Result<Instance, FrontendError> {
    let facts = parse_term_document(doc)?;

    let mut bools: Vec<String> = Vec::new();
    // variable -> (index, interval) pairs
    type Ranges = BTreeMap<String, Vec<(Value, (Value, Value))>>;
    let mut ranges: Ranges = BTreeMap::new();
    let mut constraints: Vec<(String, &Term)> = Vec::new();
    let mut rels: Vec<(String, usize, usize, RelationKind)> = Vec::new();
    let mut cells: BTreeMap<String, BTreeMap<(usize, usize), Value>> = BTreeMap::new();

    for fact in &facts {
        let Term::Fn(pred, args) = fact else {
            return Err(FrontendError::UnknownPredicate(fact.to_string()));
        };
        match (pred.as_str(), args.len()) {
            ("var", 1) => bools.push(constant(&args[0])?.to_string()),
            ("var", 3) => {
                let name = constant(&args[0])?.to_string();
                let k = int(&args[1])?;
                let (lo, hi) = match &args[2] {
                    Term::Fn(f, r) if f == "range" && r.len() == 2 => (int(&r[0])?, int(&r[1])?),
                    other => return Err(malformed(other)),
                };
                ranges.entry(name).or_default().push((k, (lo, hi)));
            }
            ("constraint", 2) => {
                constraints.push((constant(&args[0])?.to_string(), &args[1]));
            }
            ("rel", 4) => {
                let id = constant(&args[0])?.to_string();
                let arity = int(&args[1])?;
                let count = int(&args[2])?;
                if arity < 1 || count < 0 {
                    return Err(malformed(fact));
                }
                let kind = match constant(&args[3])? {
                    "supports" => RelationKind::Supports,
                    "conflicts" => RelationKind::Conflicts,
                    _ => return Err(malformed(fact)),
                };
                rels.push((id, arity as usize, count as usize, kind));
            }
            ("tuple", 4) => {
                let id = constant(&args[0])?.to_string();
                let t = int(&args[1])?;
                let i = int(&args[2])?;
                let d = int(&args[3])?;
                if t < 1 || i < 1 {
                    return Err(malformed(fact));
                }
                let prev = cells.entry(id.clone()).or_default().insert((t as usize, i as usize), d);
                if prev.is_some() {
                    return Err(FrontendError::ArityMismatch {
                        rel: id,
                        msg: format!("duplicate cell for tuple {t}, argument {i}"),
                    });
                }
            }
            _ => return Err(FrontendError::UnknownPredicate(format!("{pred}/{}", args.len()))),
        }
    }

    let mut inst = Instance::new();
    for name in bools {
        inst.add_variable(Variable::boolean(name))?;
    }
    for (name, mut pieces) in ranges {
        pieces.sort();
        let set = IntervalSet::from_intervals(pieces.into_iter().map(|(_, iv)| iv))?;
        inst.add_variable(Variable::integer(name, set)?)?;
    }

    for (id, arity, count, kind) in rels {
        let grid = cells.remove(&id).unwrap_or_default();
        if let Some(&(t, i)) = grid.keys().find(|&&(t, i)| i > arity || t > count) {
            return Err(FrontendError::ArityMismatch {
                rel: id,
                msg: format!("cell (tuple {t}, argument {i}) outside {count} tuples of arity {arity}"),
            });
        }
        if grid.len() != arity * count {
            return Err(FrontendError::ArityMismatch {
                rel: id,
                msg: format!("expected {} cells, found {}", arity * count, grid.len()),
            });
        }
        let tuples = (1..=count)
            .map(|t| (1..=arity).map(|i| grid[&(t, i)]).collect())
            .collect();
        inst.add_relation(Relation {
            id,
            arity,
            kind,
            tuples,
        })?;
    }
    if let Some(id) = cells.keys().next() {
        return Err(FrontendError::DanglingRelation(id.clone()));
    }

    let mut order: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<Literal>> = BTreeMap::new();
    for (cid, term) in constraints {
        let lit = decode_literal(term, &inst.relations)?;
        if !grouped.contains_key(&cid) {
            order.push(cid.clone());
        }
        grouped.entry(cid).or_default().push(lit);
    }
    inst.clauses = order
        .into_iter()
        .map(|id| {
            let literals = grouped.remove(&id).unwrap_or_default();
            ConstraintClause { id, literals }
        })
        .collect();
    inst.validate().map_err(|e| match e {
        ModelError::ArityMismatch { rel, arity, got } => FrontendError::ArityMismatch {
            rel,
            msg: format!("arity {arity} applied to {got} arguments"),
        },
        other => FrontendError::Invalid(other),
    })?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{normalize_comparisons, parse_native};

    const EXAMPLE1: &str = include_str!("../../data/example1.csp");

    fn example() -> Instance {
        normalize_comparisons(&parse_native(EXAMPLE1).unwrap()).unwrap()
    }

    #[test]
    fn example_facts_match_listing_shape() {
        let doc = emit_facts(&example()).unwrap();
        let expected = "\
var(b).
var(x,0,range(1,3)).
var(y,0,range(1,3)).
var(z,0,range(1,3)).
constraint(c1,global(alldifferent,arg(x,arg(y,arg(z,nil))))).
constraint(c2,b).
constraint(c2,op(le,op(add,op(add,op(mul,4,x),op(mul,-3,y)),op(mul,1,z)),0)).
constraint(c3,op(neg,b)).
constraint(c3,rel(r,arg(x,arg(y,nil)))).
rel(r,2,3,supports).
tuple(r,1,1,1).
tuple(r,1,2,3).
tuple(r,2,1,2).
tuple(r,2,2,2).
tuple(r,3,1,3).
tuple(r,3,2,1).
";
        assert_eq!(doc, expected);
    }

    #[test]
    fn round_trip_is_structural_for_example() {
        let inst = example();
        let back = parse_facts(&emit_facts(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn lone_boolean() {
        let inst = parse_native("bool b").unwrap();
        assert_eq!(emit_facts(&inst).unwrap(), "var(b).\n");
    }

    #[test]
    fn non_normalized_is_rejected() {
        let inst = parse_native("int x 1 3\nclause sum(x) >= 2").unwrap();
        assert!(matches!(emit_facts(&inst), Err(FrontendError::NotNormalized(_))));
    }

    #[test]
    fn tuple_outside_arity() {
        let doc = "var(x,0,range(1,3)).\nrel(r,2,1,supports).\ntuple(r,1,1,1).\ntuple(r,1,2,3).\ntuple(r,1,3,5).\n";
        assert!(matches!(parse_facts(doc), Err(FrontendError::ArityMismatch { .. })));
    }

    #[test]
    fn empty_document() {
        assert_eq!(parse_facts("").unwrap(), Instance::new());
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            parse_facts("foo(1)."),
            Err(FrontendError::UnknownPredicate(_))
        ));
        assert!(matches!(
            parse_facts("var(x,0,range(1,3)).\nconstraint(c1,rel(q,arg(x,nil)))."),
            Err(FrontendError::DanglingRelation(_))
        ));
        assert!(matches!(
            parse_facts("var(x,0,range(1,3)).\nconstraint(c1,global(alldifferent,arg(x,foo)))."),
            Err(FrontendError::MalformedArgs(_))
        ));
    }

    #[test]
    fn split_domains_use_piece_index() {
        let inst = parse_native("int x 1 2 5 7").unwrap();
        let doc = emit_facts(&inst).unwrap();
        assert_eq!(doc, "var(x,0,range(1,2)).\nvar(x,1,range(5,7)).\n");
        assert_eq!(parse_facts(&doc).unwrap(), inst);
    }
}
