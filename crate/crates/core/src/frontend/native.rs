//! The native line-based instance format.
//!
//! ```text
//! bool b
//! int x 1 3
//! rel r 2 supports
//! tuple r 1 3
//! clause b ; sum(4*x - 3*y + z) <= 0
//! clause -b ; table(r, x, y)
//! clause alldifferent(x, y, z)
//! ```

use crate::model::{
    normalize_sum, CmpOp, ConstraintClause, Instance, IntervalSet, Literal, LiteralExpr,
    ModelError, Relation, RelationKind, Value, Variable,
};

use super::{is_identifier, FrontendError};

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor { text, pos: 0, line }
    }

    fn err(&self, msg: impl Into<String>) -> FrontendError {
        FrontendError::Syntax {
            line: self.line,
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FrontendError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.word() {
            Some(w) if is_identifier(w) => Ok(w.to_string()),
            Some(w) => {
                self.pos = start;
                Err(self.err(format!("invalid identifier `{w}`")))
            }
            None => Err(self.err("expected identifier")),
        }
    }

    fn int(&mut self) -> Result<Value, FrontendError> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        if rest.starts_with('-') || rest.starts_with('+') {
            len = 1;
        }
        len += rest[len..]
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len() - len);
        let text = &rest[..len];
        let v = text
            .parse::<Value>()
            .map_err(|_| self.err(format!("expected integer, found `{}`", rest.split_whitespace().next().unwrap_or(""))))?;
        self.pos += len;
        Ok(v)
    }

    fn cmp_op(&mut self) -> Result<CmpOp, FrontendError> {
        self.skip_ws();
        for (sym, op) in [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("!=", CmpOp::Ne),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
            ("=", CmpOp::Eq),
        ] {
            if self.rest().starts_with(sym) {
                self.pos += sym.len();
                return Ok(op);
            }
        }
        Err(self.err("expected comparison operator"))
    }

    fn arg_list(&mut self) -> Result<Vec<String>, FrontendError> {
        let mut args = vec![self.ident()?];
        while self.eat(',') {
            args.push(self.ident()?);
        }
        Ok(args)
    }
}

fn model_err(line: usize) -> impl Fn(ModelError) -> FrontendError {
    move |source| FrontendError::Model { line, source }
}

/// Parses the native format into a validated [`Instance`]. Clause ids are
/// `c1, c2, ...` in input order.
pub fn parse_native(src: &str) -> Result<Instance, FrontendError> {
    let mut inst = Instance::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('%').next().unwrap_or("");
        let mut cur = Cursor::new(text, line);
        let Some(keyword) = cur.word() else {
            if cur.at_end() {
                continue;
            }
            return Err(cur.err("expected a statement keyword"));
        };
        match keyword {
            "bool" => {
                let name = cur.ident()?;
                inst.add_variable(Variable::boolean(name))
                    .map_err(model_err(line))?;
            }
            "int" => {
                let name = cur.ident()?;
                let mut pieces = Vec::new();
                while !cur.at_end() {
                    let lo = cur.int()?;
                    let hi = cur.int()?;
                    pieces.push((lo, hi));
                }
                if pieces.is_empty() {
                    return Err(model_err(line)(ModelError::EmptyDomain(name)));
                }
                let set = IntervalSet::from_intervals(pieces).map_err(model_err(line))?;
                let var = Variable::integer(name, set).map_err(model_err(line))?;
                inst.add_variable(var).map_err(model_err(line))?;
            }
            "rel" => {
                let name = cur.ident()?;
                let arity = cur.int()?;
                if arity < 1 {
                    return Err(cur.err("relation arity must be positive"));
                }
                let kind = match cur.word() {
                    Some("supports") => RelationKind::Supports,
                    Some("conflicts") => RelationKind::Conflicts,
                    _ => return Err(cur.err("expected `supports` or `conflicts`")),
                };
                inst.add_relation(Relation {
                    id: name,
                    arity: arity as usize,
                    kind,
                    tuples: Vec::new(),
                })
                .map_err(model_err(line))?;
            }
            "tuple" => {
                let name = cur.ident()?;
                let mut tuple = Vec::new();
                while !cur.at_end() {
                    tuple.push(cur.int()?);
                }
                let rel = inst
                    .relations
                    .iter_mut()
                    .find(|r| r.id == name)
                    .ok_or_else(|| model_err(line)(ModelError::UndeclaredRelation(name.clone())))?;
                if tuple.len() != rel.arity {
                    return Err(model_err(line)(ModelError::ArityMismatch {
                        rel: name,
                        arity: rel.arity,
                        got: tuple.len(),
                    }));
                }
                rel.tuples.push(tuple);
            }
            "clause" => {
                let mut literals = vec![parse_literal(&mut cur)?];
                while cur.eat(';') {
                    literals.push(parse_literal(&mut cur)?);
                }
                if !cur.at_end() {
                    return Err(cur.err("expected `;` or end of line"));
                }
                let clause = ConstraintClause {
                    id: format!("c{}", inst.clauses.len() + 1),
                    literals,
                };
                // references must already be declared
                let mut probe = Instance {
                    variables: std::mem::take(&mut inst.variables),
                    relations: std::mem::take(&mut inst.relations),
                    clauses: vec![clause],
                };
                let checked = probe.validate().map_err(model_err(line));
                inst.variables = std::mem::take(&mut probe.variables);
                inst.relations = std::mem::take(&mut probe.relations);
                checked?;
                inst.clauses.extend(probe.clauses);
            }
            other => return Err(cur.err(format!("unknown statement `{other}`"))),
        }
        if !cur.at_end() {
            return Err(cur.err("unexpected trailing input"));
        }
    }
    Ok(inst)
}

fn parse_literal(cur: &mut Cursor<'_>) -> Result<Literal, FrontendError> {
    let negated = cur.eat('-');
    cur.skip_ws();
    let save = cur.pos;
    let head = cur.word().ok_or_else(|| cur.err("expected literal"))?;
    let expr = match head {
        "sum" if cur.peek() == Some('(') => {
            cur.expect('(')?;
            let terms = parse_sum_terms(cur)?;
            cur.expect(')')?;
            let op = cur.cmp_op()?;
            let rhs = cur.int()?;
            let sum = normalize_sum(terms).map_err(|e| match e {
                ModelError::EmptySum => cur.err("linear sum has no terms after merging"),
                other => FrontendError::Model {
                    line: cur.line,
                    source: other,
                },
            })?;
            LiteralExpr::LinearCmp { sum, op, rhs }
        }
        "alldifferent" if cur.peek() == Some('(') => {
            cur.expect('(')?;
            let args = cur.arg_list()?;
            cur.expect(')')?;
            LiteralExpr::AllDifferent(args)
        }
        "table" if cur.peek() == Some('(') => {
            cur.expect('(')?;
            let rel = cur.ident()?;
            cur.expect(',')?;
            let args = cur.arg_list()?;
            cur.expect(')')?;
            LiteralExpr::Table { rel, args }
        }
        _ => {
            cur.pos = save;
            LiteralExpr::BoolVar(cur.ident()?)
        }
    };
    Ok(Literal { expr, negated })
}

fn parse_sum_terms(cur: &mut Cursor<'_>) -> Result<Vec<(Value, String)>, FrontendError> {
    let mut terms = Vec::new();
    let mut sign: Value = if cur.eat('-') {
        -1
    } else {
        cur.eat('+');
        1
    };
    loop {
        let coeff = match cur.peek() {
            Some(c) if c.is_ascii_digit() => {
                let c = cur.int()?;
                cur.expect('*')?;
                c
            }
            _ => 1,
        };
        let var = cur.ident()?;
        let coeff = coeff
            .checked_mul(sign)
            .ok_or_else(|| cur.err("coefficient overflow"))?;
        terms.push((coeff, var));
        sign = if cur.eat('+') {
            1
        } else if cur.eat('-') {
            -1
        } else {
            break;
        };
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = include_str!("../../data/example1.csp");

    #[test]
    fn parses_example_one() {
        let inst = parse_native(EXAMPLE1).unwrap();
        assert_eq!(inst.bool_vars().count(), 1);
        assert_eq!(inst.int_vars().count(), 3);
        assert_eq!(inst.clauses.len(), 3);
        assert_eq!(inst.clauses[1].id, "c2");
        let LiteralExpr::LinearCmp { sum, op, rhs } = &inst.clauses[1].literals[1].expr else {
            panic!("expected linear literal");
        };
        assert_eq!(sum.to_string(), "(((4*x)+(-3*y))+(1*z))");
        assert_eq!((*op, *rhs), (CmpOp::Le, 0));
        assert!(inst.clauses[2].literals[0].negated);
        assert_eq!(inst.relations[0].tuples, vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
    }

    #[test]
    fn single_variable_no_clauses() {
        let inst = parse_native("int x 1 3").unwrap();
        assert_eq!(inst.variables.len(), 1);
        assert!(inst.clauses.is_empty());
    }

    #[test]
    fn undeclared_variable() {
        let err = parse_native("int x 1 3\nclause sum(x + w) <= 2").unwrap_err();
        assert!(
            matches!(
                &err,
                FrontendError::Model {
                    line: 2,
                    source: ModelError::UndeclaredVariable(w)
                } if w == "w"
            ),
            "{err:?}"
        );
    }

    #[test]
    fn tuple_arity_mismatch() {
        let err = parse_native("rel r 2 supports\ntuple r 1 2 3").unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Model {
                source: ModelError::ArityMismatch { .. },
                ..
            }
        ));
        let err = parse_native("int x 1 2\nrel r 2 supports\nclause table(r, x)").unwrap_err();
        assert!(matches!(
            err,
            FrontendError::Model {
                source: ModelError::ArityMismatch { .. },
                ..
            }
        ));
    }

    #[test]
    fn empty_domain_and_syntax_errors() {
        assert!(matches!(
            parse_native("int x"),
            Err(FrontendError::Model {
                source: ModelError::EmptyDomain(_),
                ..
            })
        ));
        assert!(matches!(
            parse_native("int x 3 1"),
            Err(FrontendError::Model {
                source: ModelError::InvalidInterval(3, 1),
                ..
            })
        ));
        let err = parse_native("int x 1 3\nclause sum(x) <== 2").unwrap_err();
        assert!(matches!(err, FrontendError::Syntax { line: 2, .. }), "{err:?}");
        assert!(parse_native("frobnicate x").is_err());
    }

    #[test]
    fn sums_with_signs_and_comments() {
        let inst = parse_native("int x 0 5 % comment\nint y 0 5\nclause sum(-x + 2*y - y) != 1\n").unwrap();
        let LiteralExpr::LinearCmp { sum, op, rhs } = &inst.clauses[0].literals[0].expr else {
            panic!()
        };
        assert_eq!(sum.to_string(), "((-1*x)+(1*y))");
        assert_eq!((*op, *rhs), (CmpOp::Ne, 1));
    }

    #[test]
    fn non_contiguous_domain() {
        let inst = parse_native("int x 1 2 4 4").unwrap();
        assert_eq!(inst.int_domain("x").unwrap().values(), vec![1, 2, 4]);
    }
}
