use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Not;

use crate::model::Value;

/// CSP-level meaning of a propositional variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKey {
    /// `var < value`
    Less { var: String, value: Value },
    /// `var` lies in the class of encoding point `value`
    Eq { var: String, value: Value },
    BoolVal(String),
    /// prefix sum `<= bound`; `ctx` separates analyses of the same prefix
    /// under different thresholds
    Leq { prefix: String, ctx: usize, bound: Value },
    /// one addend pair supporting a `Leq` atom
    LeqSupport { prefix: String, ctx: usize, left: Value, addend: Value },
    /// the first `arg` values of tuple `tuple` are matched
    TupPrefix { clause: String, literal: usize, tuple: usize, arg: usize },
    /// at least `count` of the first `index` window literals hold
    PhCount { clause: String, literal: usize, window: String, index: usize, count: usize },
    Hold { clause: String, literal: usize },
    Aux { tag: String, n: usize },
}

impl fmt::Display for AtomKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomKey::Less { var, value } => write!(f, "less({var},{value})"),
            AtomKey::Eq { var, value } => write!(f, "eq({var},{value})"),
            AtomKey::BoolVal(var) => write!(f, "bool({var})"),
            AtomKey::Leq { prefix, ctx, bound } => write!(f, "leq({prefix},{ctx},{bound})"),
            AtomKey::LeqSupport { prefix, ctx, left, addend } => {
                write!(f, "sup({prefix},{ctx},{left},{addend})")
            }
            AtomKey::TupPrefix { clause, literal, tuple, arg } => {
                write!(f, "tup({clause},{literal},{tuple},{arg})")
            }
            AtomKey::PhCount { clause, literal, window, index, count } => {
                write!(f, "ph({clause},{literal},{window},{index},{count})")
            }
            AtomKey::Hold { clause, literal } => write!(f, "hold({clause},{literal})"),
            AtomKey::Aux { tag, n } => write!(f, "aux({tag},{n})"),
        }
    }
}

/// A literal under construction: a folded constant or a signed variable id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lit {
    Const(bool),
    Var(i32),
}

pub const TRUE: Lit = Lit::Const(true);
pub const FALSE: Lit = Lit::Const(false);

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        match self {
            Lit::Const(b) => Lit::Const(!b),
            Lit::Var(v) => Lit::Var(-v),
        }
    }
}

impl Lit {
    /// Truth value under a model indexed by variable id (index 0 unused).
    pub fn eval(self, model: &[bool]) -> bool {
        match self {
            Lit::Const(b) => b,
            Lit::Var(v) if v > 0 => model[v as usize],
            Lit::Var(v) => !model[(-v) as usize],
        }
    }
}

/// Bijection between atom keys and variable ids, plus the encoding points
/// of every Integer variable (descending).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarMap {
    ids: BTreeMap<AtomKey, i32>,
    keys: Vec<AtomKey>,
    pub points: BTreeMap<String, Vec<Value>>,
    pub bools: BTreeSet<String>,
}

impl VarMap {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn id(&self, key: &AtomKey) -> Option<i32> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: i32) -> Option<&AtomKey> {
        self.keys.get(usize::try_from(id).ok()?.checked_sub(1)?)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &AtomKey)> {
        self.keys.iter().enumerate().map(|(i, k)| (i as i32 + 1, k))
    }

    fn intern(&mut self, key: AtomKey) -> i32 {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        self.keys.push(key.clone());
        let id = self.keys.len() as i32;
        self.ids.insert(key, id);
        id
    }

    /// `var < value`, for `value` an encoding point (or beyond the points).
    pub fn less(&self, var: &str, value: Value) -> Option<Lit> {
        let points = self.points.get(var)?;
        let min = *points.last()?;
        if value <= min {
            return Some(FALSE);
        }
        if value > points[0] {
            return None;
        }
        self.id(&AtomKey::Less {
            var: var.to_string(),
            value,
        })
        .map(Lit::Var)
    }

    /// The class literal of encoding point `value`.
    pub fn eq(&self, var: &str, value: Value) -> Option<Lit> {
        let points = self.points.get(var)?;
        if !points.contains(&value) {
            return None;
        }
        if points.len() == 1 {
            return Some(TRUE);
        }
        self.id(&AtomKey::Eq {
            var: var.to_string(),
            value,
        })
        .map(Lit::Var)
    }

    pub fn bool_val(&self, var: &str) -> Option<Lit> {
        self.id(&AtomKey::BoolVal(var.to_string())).map(Lit::Var)
    }
}

/// A CNF clause database with `c map` annotations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfDocument {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
    pub annotations: Vec<(u32, String)>,
}

/// Clause collector with constant folding.
#[derive(Debug, Default)]
pub(crate) struct Builder {
    pub map: VarMap,
    pub clauses: Vec<Vec<i32>>,
    pub unsat: bool,
}

impl Builder {
    pub fn atom(&mut self, key: AtomKey) -> Lit {
        Lit::Var(self.map.intern(key))
    }

    pub fn add(&mut self, lits: &[Lit]) {
        let mut clause: Vec<i32> = Vec::with_capacity(lits.len());
        for &l in lits {
            match l {
                Lit::Const(true) => return,
                Lit::Const(false) => {}
                Lit::Var(v) => {
                    if clause.contains(&-v) {
                        return;
                    }
                    if !clause.contains(&v) {
                        clause.push(v);
                    }
                }
            }
        }
        if clause.is_empty() {
            self.unsat = true;
        } else {
            self.clauses.push(clause);
        }
    }

    /// `a -> b`
    pub fn implies(&mut self, a: Lit, b: Lit) {
        self.add(&[!a, b]);
    }

    /// A literal equivalent to `a and b`, folded when possible.
    pub fn and(&mut self, a: Lit, b: Lit, key: AtomKey) -> Lit {
        match (a, b) {
            (FALSE, _) | (_, FALSE) => FALSE,
            (TRUE, x) | (x, TRUE) => x,
            _ if a == b => a,
            _ if a == !b => FALSE,
            _ => {
                let r = self.atom(key);
                self.add(&[!r, a]);
                self.add(&[!r, b]);
                self.add(&[r, !a, !b]);
                r
            }
        }
    }

    /// A literal equivalent to the disjunction of `lits`, folded when possible.
    pub fn or(&mut self, lits: &[Lit], key: AtomKey) -> Lit {
        let mut rest: Vec<Lit> = Vec::new();
        for &l in lits {
            match l {
                TRUE => return TRUE,
                FALSE => {}
                _ => {
                    if rest.contains(&!l) {
                        return TRUE;
                    }
                    if !rest.contains(&l) {
                        rest.push(l);
                    }
                }
            }
        }
        match rest.len() {
            0 => FALSE,
            1 => rest[0],
            _ => {
                let r = self.atom(key);
                let mut big = vec![!r];
                big.extend(&rest);
                self.add(&big);
                for &l in &rest {
                    self.add(&[!l, r]);
                }
                r
            }
        }
    }

    pub fn finish(mut self) -> (CnfDocument, VarMap) {
        if self.unsat {
            let v = self.atom(AtomKey::Aux {
                tag: "unsat".into(),
                n: 0,
            });
            let Lit::Var(v) = v else { unreachable!() };
            self.clauses.push(vec![v]);
            self.clauses.push(vec![-v]);
        }
        let annotations = self
            .map
            .iter()
            .map(|(id, k)| (id as u32, k.to_string()))
            .collect();
        let doc = CnfDocument {
            num_vars: self.map.len() as u32,
            clauses: self.clauses,
            annotations,
        };
        (doc, self.map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(n: usize) -> AtomKey {
        AtomKey::Aux { tag: "t".into(), n }
    }

    #[test]
    fn folding() {
        let mut b = Builder::default();
        let x = b.atom(key(0));
        let y = b.atom(key(1));
        b.add(&[x, TRUE]);
        b.add(&[x, !x]);
        b.add(&[x, x, FALSE, y]);
        assert_eq!(b.clauses, vec![vec![1, 2]]);
        assert_eq!(b.and(x, TRUE, key(2)), x);
        assert_eq!(b.and(x, !x, key(2)), FALSE);
        assert_eq!(b.or(&[FALSE, y], key(2)), y);
        assert_eq!(b.or(&[], key(2)), FALSE);
        assert!(!b.unsat);
        b.add(&[FALSE]);
        assert!(b.unsat);
        let (doc, map) = b.finish();
        assert_eq!(doc.num_vars, 3);
        assert_eq!(doc.clauses[1..], [vec![3], vec![-3]]);
        assert_eq!(map.key(3), Some(&AtomKey::Aux { tag: "unsat".into(), n: 0 }));
    }

    #[test]
    fn and_gate_defines_both_directions() {
        let mut b = Builder::default();
        let x = b.atom(key(0));
        let y = b.atom(key(1));
        let r = b.and(x, y, key(2));
        assert_eq!(r, Lit::Var(3));
        assert_eq!(b.clauses, vec![vec![-3, 1], vec![-3, 2], vec![3, -1, -2]]);
    }

    #[test]
    fn atom_key_display() {
        let k = AtomKey::Leq {
            prefix: "op(mul,4,x)".into(),
            ctx: 0,
            bound: 8,
        };
        assert_eq!(k.to_string(), "leq(op(mul,4,x),0,8)");
        assert_eq!(AtomKey::BoolVal("b".into()).to_string(), "bool(b)");
    }
}
