//! CNF compilation of an analyzed instance.
//!
//! Integer variables are order encoded on their encoding points: `Less(x,p)`
//! for every point but the smallest, and a class atom `Eq(x,p)` per point.
//! Linear comparisons get bound atoms per prefix sum, alldifferent is
//! pairwise plus value cover plus counter-based pigeon-hole windows, and
//! table constraints use tuple prefix chains.

mod cnf;
mod global;
mod linear;

use std::collections::HashMap;

use thiserror::Error;

use crate::analysis::{LitPos, LookupTables, PrefixKey};
use crate::model::{Instance, LiteralExpr, ModelError, VarKind};

pub use cnf::{AtomKey, CnfDocument, Lit, VarMap, FALSE, TRUE};
pub(crate) use cnf::Builder;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("literal {literal} of clause {clause} was not analyzed")]
    NotAnalyzed { clause: String, literal: usize },
    #[error("internal encoding error: {0}")]
    Internal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Emit the redundant pigeon-hole counters for alldifferent.
    pub ph: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { ph: true }
    }
}

pub(crate) struct Encoder<'a> {
    inst: &'a Instance,
    tables: &'a LookupTables,
    opts: EncodeOptions,
    pub(crate) b: Builder,
    prefix_cache: HashMap<(String, PrefixKey), Vec<Lit>>,
    prefix_ctx: HashMap<String, usize>,
}

impl<'a> Encoder<'a> {
    fn new(inst: &'a Instance, tables: &'a LookupTables, opts: EncodeOptions) -> Self {
        Encoder {
            inst,
            tables,
            opts,
            b: Builder::default(),
            prefix_cache: HashMap::new(),
            prefix_ctx: HashMap::new(),
        }
    }

    /// Atoms and axioms of every variable, in name order.
    fn encode_order_axioms(&mut self) {
        for var in self.inst.variables.values() {
            if var.kind() == VarKind::Boolean {
                self.b.atom(AtomKey::BoolVal(var.name.clone()));
                self.b.map.bools.insert(var.name.clone());
                continue;
            }
            let points = self.tables.points[&var.name].clone();
            let k = points.len();
            let less: Vec<Lit> = points[..k - 1]
                .iter()
                .map(|&value| {
                    self.b.atom(AtomKey::Less {
                        var: var.name.clone(),
                        value,
                    })
                })
                .collect();
            let eq: Vec<Lit> = if k == 1 {
                vec![TRUE]
            } else {
                points
                    .iter()
                    .map(|&value| {
                        self.b.atom(AtomKey::Eq {
                            var: var.name.clone(),
                            value,
                        })
                    })
                    .collect()
            };
            self.b.map.points.insert(var.name.clone(), points);
            for w in less.windows(2) {
                self.b.implies(w[1], w[0]);
            }
            for i in 0..k {
                // x in [p_i, p_{i-1}) iff not x < p_i and x < p_{i-1}
                let below = if i + 1 < k { !less[i] } else { TRUE };
                let above = if i > 0 { less[i - 1] } else { TRUE };
                self.b.implies(eq[i], below);
                self.b.implies(eq[i], above);
                self.b.add(&[eq[i], !below, !above]);
            }
        }
    }

    fn encode_clauses(&mut self) -> Result<(), EncodeError> {
        let inst = self.inst;
        for (ci, clause) in inst.clauses.iter().enumerate() {
            let mut lits = Vec::with_capacity(clause.literals.len());
            for (li, lit) in clause.literals.iter().enumerate() {
                let pos = LitPos {
                    clause: ci,
                    literal: li,
                };
                let not_analyzed = || EncodeError::NotAnalyzed {
                    clause: clause.id.clone(),
                    literal: li + 1,
                };
                let h = match &lit.expr {
                    LiteralExpr::BoolVar(name) => self
                        .b
                        .map
                        .bool_val(name)
                        .ok_or_else(|| ModelError::UndeclaredVariable(name.clone()))?,
                    LiteralExpr::LinearCmp { .. } => {
                        let info = self.tables.linear.get(&pos).ok_or_else(not_analyzed)?;
                        self.encode_linear(info)?
                    }
                    LiteralExpr::AllDifferent(args) => {
                        if lit.negated {
                            return Err(EncodeError::Unsupported(format!(
                                "negated alldifferent in clause {}",
                                clause.id
                            )));
                        }
                        let info = self.tables.alldiff.get(&pos).ok_or_else(not_analyzed)?;
                        let guard = if clause.literals.len() == 1 {
                            TRUE
                        } else {
                            self.b.atom(AtomKey::Hold {
                                clause: clause.id.clone(),
                                literal: li + 1,
                            })
                        };
                        debug_assert_eq!(&info.args, args);
                        self.encode_alldifferent(&clause.id, li + 1, info, guard)?;
                        guard
                    }
                    LiteralExpr::Table { rel, args } => {
                        self.tables.tables.get(&pos).ok_or_else(not_analyzed)?;
                        self.encode_table(&clause.id, li + 1, rel, args)?
                    }
                };
                let h = if lit.negated && !matches!(lit.expr, LiteralExpr::AllDifferent(_)) {
                    !h
                } else {
                    h
                };
                lits.push(h);
            }
            self.b.add(&lits);
        }
        Ok(())
    }
}

/// Compiles a `<=`-normalized instance with its lookup tables into CNF.
/// Numbering is deterministic: variable atoms in name order first, then the
/// atoms of each clause in input order.
pub fn encode(
    inst: &Instance,
    tables: &LookupTables,
    opts: EncodeOptions,
) -> Result<(CnfDocument, VarMap), EncodeError> {
    let mut enc = Encoder::new(inst, tables, opts);
    enc.encode_order_axioms();
    enc.encode_clauses()?;
    Ok(enc.b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::relevant_values;
    use crate::frontend::{normalize_comparisons, parse_native};

    fn compile(src: &str) -> (CnfDocument, VarMap) {
        let inst = normalize_comparisons(&parse_native(src).unwrap()).unwrap();
        let tables = relevant_values(&inst).unwrap();
        encode(&inst, &tables, EncodeOptions::default()).unwrap()
    }

    /// All models by brute force over the document's variables.
    fn models(doc: &CnfDocument) -> Vec<Vec<bool>> {
        let n = doc.num_vars as usize;
        assert!(n <= 16);
        (0u32..1 << n)
            .map(|bits| {
                std::iter::once(false)
                    .chain((0..n).map(|v| bits >> v & 1 == 1))
                    .collect::<Vec<_>>()
            })
            .filter(|m| {
                doc.clauses
                    .iter()
                    .all(|c| c.iter().any(|&l| Lit::Var(l).eval(m)))
            })
            .collect()
    }

    #[test]
    fn order_axioms_for_three_points() {
        let (doc, map) = compile("int x 1 3\nint y 1 3\nclause alldifferent(x, y)");
        let less: Vec<_> = map
            .iter()
            .filter(|(_, k)| matches!(k, AtomKey::Less { var, .. } if var == "x"))
            .collect();
        assert_eq!(less.len(), 2);
        // x atoms: less(x,3)=1, less(x,2)=2, eq(x,3..1)=3..5
        assert!(doc.clauses.contains(&vec![-2, 1]));
        let eq_clauses = doc
            .clauses
            .iter()
            .filter(|c| c.iter().any(|l| (3..=5).contains(&l.abs())) && c.iter().all(|l| l.abs() <= 5))
            .count();
        assert_eq!(eq_clauses, 7);
    }

    #[test]
    fn order_axioms_admit_one_model_per_value() {
        let (doc, _) = compile("int x 1 3\nclause alldifferent(x)");
        assert_eq!(models(&doc).len(), 3);
    }

    #[test]
    fn single_point_and_boolean() {
        let (doc, map) = compile("bool b\nint x 4 9");
        assert_eq!(map.len(), 1);
        assert_eq!(map.eq("x", 4), Some(TRUE));
        assert!(doc.clauses.is_empty());
    }

    #[test]
    fn trivial_comparisons_fold() {
        let (doc, _) = compile("int x 1 3\nclause sum(x) <= 3");
        assert!(doc.clauses.iter().all(|c| c.len() > 1));
        let (doc, map) = compile("int x 1 3\nclause sum(x) <= 0");
        assert!(map.iter().any(|(_, k)| matches!(k, AtomKey::Aux { tag, .. } if tag == "unsat")));
        assert!(models(&doc).is_empty());
    }

    #[test]
    fn ground_chain_clauses() {
        let (doc, map) = compile(include_str!("../../data/example1.csp"));
        let id = |b| {
            map.id(&AtomKey::Leq {
                prefix: "op(add,op(mul,4,x),op(mul,-3,y))".into(),
                ctx: 0,
                bound: b,
            })
            .unwrap()
        };
        assert!(doc.clauses.contains(&vec![-id(-3), id(-2)]));
        assert!(doc.clauses.contains(&vec![-id(-2), id(-1)]));
    }

    #[test]
    fn alldifferent_clause_counts() {
        let (doc, _) = {
            let inst = parse_native("int x 1 3\nint y 1 3\nint z 1 3\nclause alldifferent(x, y, z)").unwrap();
            let tables = relevant_values(&inst).unwrap();
            encode(&inst, &tables, EncodeOptions { ph: false }).unwrap()
        };
        // per variable: one chain clause and seven class clauses
        let axioms = 3 * 8;
        let ternary = doc.clauses[axioms..].iter().filter(|c| c.len() == 3).count();
        let binary = doc.clauses[axioms..].iter().filter(|c| c.len() == 2).count();
        assert_eq!((binary, ternary), (9, 3));
        assert_eq!(models(&doc).len(), 6);
    }

    #[test]
    fn negated_alldifferent_rejected() {
        let inst = parse_native("int x 1 3\nint y 1 3\nclause -alldifferent(x, y)").unwrap();
        let tables = relevant_values(&inst).unwrap();
        assert!(matches!(
            encode(&inst, &tables, EncodeOptions::default()),
            Err(EncodeError::Unsupported(_))
        ));
    }

    #[test]
    fn deterministic_numbering() {
        let src = include_str!("../../data/example1.csp");
        assert_eq!(compile(src), compile(src));
    }
}
