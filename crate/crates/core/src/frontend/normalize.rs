use crate::model::{
    CmpOp, ConstraintClause, Instance, LinearSum, Literal, LiteralExpr, ModelError, Value,
    Variable,
};

fn le(sum: LinearSum, rhs: Value) -> Literal {
    Literal::pos(LiteralExpr::LinearCmp {
        sum,
        op: CmpOp::Le,
        rhs,
    })
}

/// `sum op rhs` as one or two `<=` literals (a disjunction when two).
/// `Eq` is not handled here.
fn rewrite(sum: &LinearSum, op: CmpOp, rhs: Value) -> Result<Vec<Literal>, ModelError> {
    let dec = |v: Value| v.checked_sub(1).ok_or(ModelError::Overflow);
    let neg = |v: Value| v.checked_neg().ok_or(ModelError::Overflow);
    Ok(match op {
        CmpOp::Le => vec![le(sum.clone(), rhs)],
        CmpOp::Ge => vec![le(sum.negated()?, neg(rhs)?)],
        CmpOp::Lt => vec![le(sum.clone(), dec(rhs)?)],
        CmpOp::Gt => vec![le(sum.negated()?, dec(neg(rhs)?)?)],
        CmpOp::Ne => vec![
            le(sum.clone(), dec(rhs)?),
            le(sum.negated()?, dec(neg(rhs)?)?),
        ],
        CmpOp::Eq => unreachable!("equality is split by the caller"),
    })
}

fn fresh_name(inst: &Instance, base: String) -> String {
    let mut name = base;
    while inst.variables.contains_key(&name) {
        name.push('_');
    }
    name
}

/// Rewrites every linear comparison into positive `<=` literals.
///
/// Negations are pushed into the operator first. `=` as the only literal of
/// a clause splits the clause in two (`<id>_1`, `<id>_2`); `=` inside a
/// larger clause is replaced by a fresh Boolean switch `s` with clauses
/// `{-s, sum <= m}` and `{-s, -sum <= -m}`.
pub fn normalize_comparisons(inst: &Instance) -> Result<Instance, ModelError> {
    let mut out = Instance {
        variables: inst.variables.clone(),
        relations: inst.relations.clone(),
        clauses: Vec::with_capacity(inst.clauses.len()),
    };
    for clause in &inst.clauses {
        let mut literals = Vec::with_capacity(clause.literals.len());
        let mut side_clauses = Vec::new();
        for (idx, lit) in clause.literals.iter().enumerate() {
            let LiteralExpr::LinearCmp { sum, op, rhs } = &lit.expr else {
                literals.push(lit.clone());
                continue;
            };
            let op = if lit.negated { op.complement() } else { *op };
            if op != CmpOp::Eq {
                literals.extend(rewrite(sum, op, *rhs)?);
                continue;
            }
            let upper = rewrite(sum, CmpOp::Le, *rhs)?.remove(0);
            let lower = rewrite(sum, CmpOp::Ge, *rhs)?.remove(0);
            if clause.literals.len() == 1 {
                side_clauses.push((format!("{}_1", clause.id), vec![upper]));
                side_clauses.push((format!("{}_2", clause.id), vec![lower]));
            } else {
                let switch = fresh_name(&out, format!("eqsw_{}_{}", clause.id, idx + 1));
                out.add_variable(Variable::boolean(switch.clone()))?;
                literals.push(Literal::pos(LiteralExpr::BoolVar(switch.clone())));
                let off = Literal::neg(LiteralExpr::BoolVar(switch));
                side_clauses.push((
                    format!("{}_s{}a", clause.id, idx + 1),
                    vec![off.clone(), upper],
                ));
                side_clauses.push((format!("{}_s{}b", clause.id, idx + 1), vec![off, lower]));
            }
        }
        if !literals.is_empty() {
            out.clauses.push(ConstraintClause {
                id: clause.id.clone(),
                literals,
            });
        }
        out.clauses
            .extend(side_clauses.into_iter().map(|(id, literals)| ConstraintClause { id, literals }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_native;
    use crate::model::Term;

    fn only_le(inst: &Instance) -> bool {
        inst.clauses.iter().flat_map(|c| &c.literals).all(|l| match &l.expr {
            LiteralExpr::LinearCmp { op, .. } => *op == CmpOp::Le && !l.negated,
            _ => true,
        })
    }

    fn linear(lit: &Literal) -> (Vec<Term>, Value) {
        match &lit.expr {
            LiteralExpr::LinearCmp { sum, rhs, .. } => (sum.terms().to_vec(), *rhs),
            _ => panic!("not linear"),
        }
    }

    #[test]
    fn le_clause_is_unchanged() {
        let inst = parse_native("bool b\nint x 1 3\nint y 1 3\nint z 1 3\nclause b ; sum(4*x - 3*y + z) <= 0").unwrap();
        assert_eq!(normalize_comparisons(&inst).unwrap(), inst);
    }

    #[test]
    fn ge_negates() {
        let inst = parse_native("int x 1 3\nclause sum(x) >= 2").unwrap();
        let out = normalize_comparisons(&inst).unwrap();
        assert_eq!(linear(&out.clauses[0].literals[0]), (vec![Term::new(-1, "x")], -2));
    }

    #[test]
    fn sole_equality_splits_clause() {
        let inst = parse_native("int x 1 3\nclause sum(x) = 2").unwrap();
        let out = normalize_comparisons(&inst).unwrap();
        assert_eq!(out.clauses.len(), 2);
        assert_eq!(linear(&out.clauses[0].literals[0]), (vec![Term::new(1, "x")], 2));
        assert_eq!(linear(&out.clauses[1].literals[0]), (vec![Term::new(-1, "x")], -2));
        assert!(only_le(&out));
    }

    #[test]
    fn disequality_is_two_literal_disjunction() {
        let inst = parse_native("int x 1 3\nclause sum(x) != 2").unwrap();
        let out = normalize_comparisons(&inst).unwrap();
        assert_eq!(out.clauses.len(), 1);
        let lits = &out.clauses[0].literals;
        assert_eq!(linear(&lits[0]), (vec![Term::new(1, "x")], 1));
        assert_eq!(linear(&lits[1]), (vec![Term::new(-1, "x")], -3));
    }

    #[test]
    fn equality_in_disjunction_uses_switch() {
        let inst = parse_native("bool b\nint x 1 3\nclause b ; sum(x) = 2").unwrap();
        let out = normalize_comparisons(&inst).unwrap();
        assert_eq!(out.clauses.len(), 3);
        assert!(out.variables.contains_key("eqsw_c1_2"));
        assert!(only_le(&out));
    }

    #[test]
    fn negations_are_pushed_into_operator() {
        let inst = parse_native("int x 1 3\nclause -sum(x) <= 1").unwrap();
        let out = normalize_comparisons(&inst).unwrap();
        assert_eq!(linear(&out.clauses[0].literals[0]), (vec![Term::new(-1, "x")], -2));
    }
}
