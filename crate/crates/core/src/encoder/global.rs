//! Alldifferent and table constraints.

use std::collections::BTreeMap;

use crate::analysis::AllDiffInfo;
use crate::model::{RelationKind, Value};

use super::cnf::{AtomKey, Lit, FALSE, TRUE};
use super::{EncodeError, Encoder};

fn no_point(var: &str, v: Value) -> EncodeError {
    EncodeError::Internal(format!("{v} is not an encoding point of {var}"))
}

impl Encoder<'_> {
    /// Clauses enforcing alldifferent whenever `guard` holds.
    pub(crate) fn encode_alldifferent(
        &mut self,
        clause: &str,
        literal: usize,
        info: &AllDiffInfo,
        guard: Lit,
    ) -> Result<(), EncodeError> {
        let doms = info
            .args
            .iter()
            .map(|a| self.inst.int_domain(a))
            .collect::<Result<Vec<_>, _>>()?;
        let n = info.args.len();
        for &d in &info.values {
            let mut holders = Vec::new();
            for (i, a) in info.args.iter().enumerate() {
                if doms[i].contains(d) {
                    holders.push(self.b.map.eq(a, d).ok_or_else(|| no_point(a, d))?);
                }
            }
            for i in 0..holders.len() {
                for j in i + 1..holders.len() {
                    self.b.add(&[!guard, !holders[i], !holders[j]]);
                }
            }
            if info.difall {
                let mut cover = vec![!guard];
                cover.extend(&holders);
                self.b.add(&cover);
            }
        }
        if !self.opts.ph {
            return Ok(());
        }
        let u = &info.values;
        for w in 1..=(n - 1).min(u.len()) {
            let lo = u[w - 1];
            let hi = u[u.len() - w];
            let mut below = Vec::with_capacity(n);
            let mut above = Vec::with_capacity(n);
            for (i, a) in info.args.iter().enumerate() {
                below.push(match doms[i].next_above(lo) {
                    None => TRUE,
                    Some(c) => self.b.map.less(a, c).ok_or_else(|| no_point(a, c))?,
                });
                let first = if doms[i].contains(hi) {
                    Some(hi)
                } else {
                    doms[i].next_above(hi)
                };
                above.push(match first {
                    None => FALSE,
                    Some(c) => !self.b.map.less(a, c).ok_or_else(|| no_point(a, c))?,
                });
            }
            self.at_most(&below, w, guard, clause, literal, format!("lo{w}"));
            self.at_most(&above, w, guard, clause, literal, format!("hi{w}"));
        }
        Ok(())
    }

    /// Sequential counter: at most `k` of `lits` hold whenever `guard` holds.
    fn at_most(
        &mut self,
        lits: &[Lit],
        k: usize,
        guard: Lit,
        clause: &str,
        literal: usize,
        window: String,
    ) {
        // s[c]: at least c of the literals seen so far hold
        let mut s = vec![FALSE; k + 1];
        s[0] = TRUE;
        for (i, &l) in lits.iter().enumerate() {
            self.b.add(&[!guard, !l, !s[k]]);
            if i + 1 == lits.len() {
                break;
            }
            let mut next = s.clone();
            for c in 1..=k {
                let carried = match (l, s[c - 1]) {
                    (FALSE, _) | (_, FALSE) => Some(FALSE),
                    (TRUE, x) | (x, TRUE) => Some(x),
                    _ => None,
                };
                next[c] = match (s[c], carried) {
                    (TRUE, _) | (_, Some(TRUE)) => TRUE,
                    (x, Some(FALSE)) => x,
                    (FALSE, Some(y)) => y,
                    (x, Some(y)) if x == y => x,
                    _ => {
                        let r = self.b.atom(AtomKey::PhCount {
                            clause: clause.to_string(),
                            literal,
                            window: window.clone(),
                            index: i + 1,
                            count: c,
                        });
                        self.b.implies(s[c], r);
                        self.b.add(&[!l, !s[c - 1], r]);
                        r
                    }
                };
            }
            s = next;
        }
    }

    /// Literal equivalent to the table literal (before polarity).
    pub(crate) fn encode_table(
        &mut self,
        clause: &str,
        literal: usize,
        rel: &str,
        args: &[String],
    ) -> Result<Lit, EncodeError> {
        let inst = self.inst;
        let relation = inst
            .relation(rel)
            .ok_or_else(|| crate::model::ModelError::UndeclaredRelation(rel.to_string()))?;
        let doms = args
            .iter()
            .map(|a| inst.int_domain(a))
            .collect::<Result<Vec<_>, _>>()?;
        let mut chains: BTreeMap<Vec<Value>, Lit> = BTreeMap::new();
        let mut complete = Vec::new();
        for (t, tuple) in relation.tuples.iter().enumerate() {
            if tuple.iter().zip(&doms).any(|(v, d)| !d.contains(*v)) {
                continue;
            }
            let mut cur = TRUE;
            for (i, (&v, a)) in tuple.iter().zip(args).enumerate() {
                if let Some(&l) = chains.get(&tuple[..=i]) {
                    cur = l;
                    continue;
                }
                let eq = self.b.map.eq(a, v).ok_or_else(|| no_point(a, v))?;
                cur = self.b.and(
                    cur,
                    eq,
                    AtomKey::TupPrefix {
                        clause: clause.to_string(),
                        literal,
                        tuple: t + 1,
                        arg: i + 1,
                    },
                );
                chains.insert(tuple[..=i].to_vec(), cur);
            }
            complete.push(cur);
        }
        let any = self.b.or(
            &complete,
            AtomKey::Hold {
                clause: clause.to_string(),
                literal,
            },
        );
        Ok(match relation.kind {
            RelationKind::Supports => any,
            RelationKind::Conflicts => !any,
        })
    }
}
