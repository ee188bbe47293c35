//! Static extraction of relevant values.
//!
//! Three stages feed the relevant values of every Integer variable:
//! thresholds of linear inequalities, full domains of alldifferent arguments,
//! and tuple values of table constraints. The linear stage is computed on
//! coefficient/domain signatures ([`PrefixKey`]), so inequalities that only
//! differ in variable names share one analysis.
//!
//! Besides the relevant values, the analysis fixes the *encoding points* of
//! each variable: relevant values plus the domain value right after every
//! value at which an order atom is cut. A point `p` stands for the class of
//! domain values `[p, next point)`, and every constraint is constant on such
//! a class.

mod dump;
pub mod linear;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{Instance, IntervalSet, LinearSum, LiteralExpr, ModelError, RelationKind, Value};

pub use dump::dump_analysis;
pub use linear::{
    addend_pairs, bound_set, erg, prefix_bounds, push_thresholds, scale_range, AddPair, Leaf,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("arithmetic overflow during bound analysis")]
    Overflow,
    #[error("comparison in clause `{0}` is not normalized to <=")]
    NotNormalized(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Position of a literal: clause index and literal index within the clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LitPos {
    pub clause: usize,
    pub literal: usize,
}

/// One level of a [`PrefixKey`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrefixLevel {
    pub coeff: Value,
    pub domain: IntervalSet,
    pub blow: Value,
    pub bupp: Value,
}

/// Structural identity of a sum prefix: coefficients, domains and pushed
/// thresholds of its addends. Variable names are deliberately absent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrefixKey {
    pub levels: Vec<PrefixLevel>,
}

impl PrefixKey {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixAnalysis {
    pub low: Value,
    pub upp: Value,
    pub blow: Value,
    pub bupp: Value,
    /// Ascending bound set.
    pub bounds: Vec<Value>,
    /// Addend pairs relating the shorter prefix's bounds to `bounds`.
    pub pairs: Vec<AddPair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearOutcome {
    /// The comparison holds for every assignment.
    True,
    /// The comparison fails for every assignment.
    False,
    /// Prefix keys, shortest prefix first.
    Prefixes(Vec<PrefixKey>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearInfo {
    pub sum: LinearSum,
    pub rhs: Value,
    pub outcome: LinearOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MulEntry {
    pub value: Value,
    pub product: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllDiffInfo {
    pub args: Vec<String>,
    /// Union of the argument domains, ascending.
    pub values: Vec<Value>,
    /// Last 1-based argument index whose domain holds the value.
    pub lastindex: BTreeMap<Value, usize>,
    /// Every value of the union must be taken (`|union| = #args`).
    pub difall: bool,
}

impl AllDiffInfo {
    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.args.iter().position(|a| a == var).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableInfo {
    pub rel: String,
    pub args: Vec<String>,
}

impl TableInfo {
    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.args.iter().position(|a| a == var).map(|i| i + 1)
    }
}

/// Everything the encoder needs from the static analysis.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LookupTables {
    /// Relevant values per Integer variable, descending.
    pub relevant: BTreeMap<String, Vec<Value>>,
    /// Encoding points per Integer variable, descending.
    pub points: BTreeMap<String, Vec<Value>>,
    /// Relevant `(value, product)` entries per `(variable, coefficient)`.
    pub mul_look: BTreeMap<(String, Value), Vec<MulEntry>>,
    pub prefixes: BTreeMap<PrefixKey, PrefixAnalysis>,
    pub linear: BTreeMap<LitPos, LinearInfo>,
    pub alldiff: BTreeMap<LitPos, AllDiffInfo>,
    pub tables: BTreeMap<LitPos, TableInfo>,
}

impl LookupTables {
    pub fn add_look(&self, key: &PrefixKey) -> Option<&[AddPair]> {
        self.prefixes.get(key).map(|p| p.pairs.as_slice())
    }

    /// Bound set of a prefix in descending order; each element's successor
    /// is the next element of the list.
    pub fn sum_bound_order(&self, key: &PrefixKey) -> Option<Vec<Value>> {
        self.prefixes
            .get(key)
            .map(|p| p.bounds.iter().rev().copied().collect())
    }

    pub fn total_ub(&self, key: &PrefixKey) -> Option<Value> {
        self.prefixes.get(key).map(|p| p.upp)
    }

    /// Next smaller relevant value of `var` (the successor in descending order).
    pub fn successor(&self, var: &str, value: Value) -> Option<Value> {
        let list = self.relevant.get(var)?;
        let idx = list.iter().position(|&v| v == value)?;
        list.get(idx + 1).copied()
    }
}

/// Analysis of a single `sum <= rhs` over the given domains. Newly computed
/// prefixes are inserted into `prefixes`; shared prefixes are reused.
pub fn analyze_inequality(
    leaves: &[Leaf<'_>],
    rhs: Value,
    prefixes: &mut BTreeMap<PrefixKey, PrefixAnalysis>,
) -> Result<LinearOutcome, AnalysisError> {
    let totals = prefix_bounds(leaves)?;
    let (low, upp) = totals[totals.len() - 1];
    if rhs >= upp {
        return Ok(LinearOutcome::True);
    }
    if rhs < low {
        return Ok(LinearOutcome::False);
    }
    let thresholds = push_thresholds(leaves, &totals, rhs)?;
    let mut keys: Vec<PrefixKey> = Vec::with_capacity(leaves.len());
    let mut levels = Vec::with_capacity(leaves.len());
    for (leaf, &(blow, bupp)) in leaves.iter().zip(&thresholds) {
        levels.push(PrefixLevel {
            coeff: leaf.coeff,
            domain: leaf.dom.clone(),
            blow,
            bupp,
        });
        keys.push(PrefixKey {
            levels: levels.clone(),
        });
    }
    if !prefixes.contains_key(keys.last().unwrap()) {
        let mut prev: Vec<Value> = vec![0];
        for (i, key) in keys.iter().enumerate() {
            let (blow, bupp) = thresholds[i];
            let bounds = bound_set(&prev, leaves[i], blow, bupp)?;
            let pairs = addend_pairs(&prev, leaves[i], &bounds);
            let (low, upp) = totals[i];
            prefixes.entry(key.clone()).or_insert(PrefixAnalysis {
                low,
                upp,
                blow,
                bupp,
                bounds: bounds.clone(),
                pairs,
            });
            prev = bounds;
        }
    }
    let top = &prefixes[keys.last().unwrap()];
    if top.bounds.is_empty() {
        return Ok(LinearOutcome::False);
    }
    Ok(LinearOutcome::Prefixes(keys))
}

/// Runs the three-stage relevant value analysis over a `<=`-normalized instance.
pub fn relevant_values(inst: &Instance) -> Result<LookupTables, AnalysisError> {
    let mut tables = LookupTables::default();
    let mut relevant: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    let mut cuts: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    let mut mul: BTreeMap<(String, Value), BTreeSet<MulEntry>> = BTreeMap::new();

    for (ci, clause) in inst.clauses.iter().enumerate() {
        for (li, lit) in clause.literals.iter().enumerate() {
            let pos = LitPos {
                clause: ci,
                literal: li,
            };
            match &lit.expr {
                LiteralExpr::BoolVar(_) => {}
                LiteralExpr::LinearCmp { sum, op, rhs } => {
                    if *op != crate::model::CmpOp::Le {
                        return Err(AnalysisError::NotNormalized(clause.id.clone()));
                    }
                    let doms = sum
                        .terms()
                        .iter()
                        .map(|t| inst.int_domain(&t.var))
                        .collect::<Result<Vec<_>, _>>()?;
                    let leaves: Vec<Leaf<'_>> = sum
                        .terms()
                        .iter()
                        .zip(&doms)
                        .map(|(t, dom)| Leaf {
                            coeff: t.coeff,
                            dom,
                        })
                        .collect();
                    let outcome = analyze_inequality(&leaves, *rhs, &mut tables.prefixes)?;
                    if let LinearOutcome::Prefixes(keys) = &outcome {
                        for ((term, leaf), key) in sum.terms().iter().zip(&leaves).zip(keys) {
                            for pair in &tables.prefixes[key].pairs {
                                let value = pair.addend / term.coeff;
                                relevant.entry(term.var.clone()).or_default().insert(value);
                                mul.entry((term.var.clone(), term.coeff))
                                    .or_default()
                                    .insert(MulEntry {
                                        value,
                                        product: pair.addend,
                                    });
                                if term.coeff > 0 {
                                    if let Some(c) = leaf.cut(value) {
                                        cuts.entry(term.var.clone()).or_default().insert(c);
                                    }
                                }
                            }
                        }
                    }
                    tables.linear.insert(
                        pos,
                        LinearInfo {
                            sum: sum.clone(),
                            rhs: *rhs,
                            outcome,
                        },
                    );
                }
                LiteralExpr::AllDifferent(args) => {
                    let mut union = BTreeSet::new();
                    let mut lastindex = BTreeMap::new();
                    for (i, a) in args.iter().enumerate() {
                        let dom = inst.int_domain(a)?;
                        for v in dom.iter() {
                            union.insert(v);
                            lastindex.insert(v, i + 1);
                        }
                        relevant.entry(a.clone()).or_default().extend(dom.iter());
                    }
                    let difall = union.len() == args.len();
                    tables.alldiff.insert(
                        pos,
                        AllDiffInfo {
                            args: args.clone(),
                            values: union.into_iter().collect(),
                            lastindex,
                            difall,
                        },
                    );
                }
                LiteralExpr::Table { rel, args } => {
                    let relation = inst
                        .relation(rel)
                        .ok_or_else(|| ModelError::UndeclaredRelation(rel.clone()))?;
                    for (i, a) in args.iter().enumerate() {
                        let dom = inst.int_domain(a)?;
                        let entry = relevant.entry(a.clone()).or_default();
                        match relation.kind {
                            RelationKind::Supports => {
                                for t in &relation.tuples {
                                    if dom.contains(t[i]) {
                                        entry.insert(t[i]);
                                        if let Some(c) = dom.next_above(t[i]) {
                                            cuts.entry(a.clone()).or_default().insert(c);
                                        }
                                    }
                                }
                            }
                            RelationKind::Conflicts => entry.extend(dom.iter()),
                        }
                    }
                    tables.tables.insert(
                        pos,
                        TableInfo {
                            rel: rel.clone(),
                            args: args.clone(),
                        },
                    );
                }
            }
        }
    }

    for var in inst.int_vars() {
        let dom = var.domain.as_int().expect("integer variable");
        let min = dom.min().expect("non-empty domain");
        let rel = relevant.remove(&var.name).filter(|s| !s.is_empty());
        let rel = rel.unwrap_or_else(|| BTreeSet::from([min]));
        let mut points = rel.clone();
        points.insert(min);
        points.extend(cuts.remove(&var.name).unwrap_or_default());
        tables
            .relevant
            .insert(var.name.clone(), rel.into_iter().rev().collect());
        tables
            .points
            .insert(var.name.clone(), points.into_iter().rev().collect());
    }
    tables.mul_look = mul
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect();
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{normalize_comparisons, parse_native};

    fn dom(lo: Value, hi: Value) -> IntervalSet {
        IntervalSet::single(lo, hi).unwrap()
    }

    #[test]
    fn running_inequality() {
        let d = dom(1, 3);
        let leaves = [
            Leaf { coeff: 4, dom: &d },
            Leaf { coeff: -3, dom: &d },
            Leaf { coeff: 1, dom: &d },
        ];
        let totals = prefix_bounds(&leaves).unwrap();
        assert_eq!(totals, vec![(4, 12), (-5, 9), (-4, 12)]);
        let th = push_thresholds(&leaves, &totals, 0).unwrap();
        assert_eq!(th, vec![(4, 8), (-3, -1), (0, 0)]);

        let b1 = bound_set(&[0], leaves[0], 4, 8).unwrap();
        assert_eq!(b1, vec![4, 8]);
        let b2 = bound_set(&b1, leaves[1], -3, -1).unwrap();
        assert_eq!(b2, vec![-3, -2, -1]);
        let b3 = bound_set(&b2, leaves[2], 0, 0).unwrap();
        assert_eq!(b3, vec![0]);

        let p = |left, addend, erg| AddPair { left, addend, erg };
        assert_eq!(addend_pairs(&[0], leaves[0], &b1), vec![p(0, 4, 4), p(0, 8, 8)]);
        assert_eq!(
            addend_pairs(&b1, leaves[1], &b2),
            vec![p(4, -9, -3), p(4, -6, -2), p(8, -9, -1)]
        );
        assert_eq!(
            addend_pairs(&b2, leaves[2], &b3),
            vec![p(-3, 3, 0), p(-2, 2, 0), p(-1, 1, 0)]
        );
    }

    #[test]
    fn degenerate_thresholds() {
        let d = dom(1, 3);
        let leaf = [Leaf { coeff: 1, dom: &d }];
        let totals = prefix_bounds(&leaf).unwrap();
        // x <= 10: blow above bupp, trivially true
        assert_eq!(push_thresholds(&leaf, &totals, 10).unwrap(), vec![(10, 3)]);
        assert_eq!(push_thresholds(&leaf, &totals, 2).unwrap(), vec![(2, 2)]);
        let mut prefixes = BTreeMap::new();
        assert_eq!(analyze_inequality(&leaf, 10, &mut prefixes).unwrap(), LinearOutcome::True);
        assert_eq!(analyze_inequality(&leaf, 3, &mut prefixes).unwrap(), LinearOutcome::True);
        assert_eq!(analyze_inequality(&leaf, 0, &mut prefixes).unwrap(), LinearOutcome::False);
        assert!(prefixes.is_empty());
    }

    #[test]
    fn single_leaf_bound_set() {
        let d = dom(1, 3);
        let leaf = Leaf { coeff: 1, dom: &d };
        assert_eq!(bound_set(&[0], leaf, 2, 2).unwrap(), vec![2]);
        // the clamp maps 1 to blow: {max(1,2), max(2,2)}
        assert_eq!(bound_set(&[0], leaf, 1, 2).unwrap(), vec![1, 2]);
        assert_eq!(bound_set(&[0], leaf, 0, 0).unwrap(), Vec::<Value>::new());
    }

    #[test]
    fn single_inequality_relevance() {
        let inst = parse_native("int x 1 3\nclause sum(x) <= 2").unwrap();
        let t = relevant_values(&inst).unwrap();
        assert_eq!(t.relevant["x"], vec![2]);
        // 1 and 2 behave alike for x <= 2; the class boundary at 3 is a point
        assert_eq!(t.points["x"], vec![3, 2, 1]);
    }

    #[test]
    fn example_one_release() {
        let src = include_str!("../../data/example1.csp");
        let inst = normalize_comparisons(&parse_native(src).unwrap()).unwrap();
        let t = relevant_values(&inst).unwrap();
        for v in ["x", "y", "z"] {
            assert_eq!(t.relevant[v], vec![3, 2, 1], "{v}");
        }
        let ad = t.alldiff.values().next().unwrap();
        assert!(ad.difall);
        assert!(ad.lastindex.values().all(|&i| i == 3));
        assert_eq!(ad.index_of("z"), Some(3));
        let tb = t.tables.values().next().unwrap();
        assert_eq!(tb.index_of("y"), Some(2));
    }

    #[test]
    fn unconstrained_variable_keeps_minimum() {
        let inst = parse_native("int x 4 9").unwrap();
        let t = relevant_values(&inst).unwrap();
        assert_eq!(t.relevant["x"], vec![4]);
        assert_eq!(t.points["x"], vec![4]);
    }

    #[test]
    fn renamed_inequalities_share_prefixes() {
        let inst = parse_native(
            "int x 1 3\nint y 1 3\nint u 1 3\nint v 1 3\nclause sum(2*x - y) <= 1\nclause sum(2*u - v) <= 1",
        )
        .unwrap();
        let t = relevant_values(&inst).unwrap();
        let k0 = match &t.linear[&LitPos { clause: 0, literal: 0 }].outcome {
            LinearOutcome::Prefixes(k) => k.clone(),
            o => panic!("{o:?}"),
        };
        let k1 = match &t.linear[&LitPos { clause: 1, literal: 0 }].outcome {
            LinearOutcome::Prefixes(k) => k.clone(),
            o => panic!("{o:?}"),
        };
        assert_eq!(k0, k1);
        assert_eq!(t.prefixes.len(), 2);
        assert_eq!(t.add_look(&k0[1]), t.add_look(&k1[1]));
    }

    #[test]
    fn non_normalized_rejected() {
        let inst = parse_native("int x 1 3\nclause sum(x) >= 2").unwrap();
        assert!(matches!(relevant_values(&inst), Err(AnalysisError::NotNormalized(_))));
    }
}
