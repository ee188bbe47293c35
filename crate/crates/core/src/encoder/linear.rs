//! Order encoding of `sum <= m` through prefix-sum bound atoms.

use crate::analysis::{Leaf, LinearInfo, LinearOutcome, PrefixAnalysis};
use crate::frontend::prefix_term;
use crate::model::{IntervalSet, Value};

use super::cnf::{AtomKey, Lit, VarMap, FALSE, TRUE};
use super::{Encoder, EncodeError};

/// `a*x <= a*k`, or `None` if the needed order atom does not exist.
pub(crate) fn leaf_lit(map: &VarMap, var: &str, leaf: Leaf<'_>, k: Value) -> Option<Lit> {
    match leaf.cut(k) {
        None => Some(TRUE),
        Some(c) => {
            let less = map.less(var, c)?;
            Some(if leaf.coeff > 0 { less } else { !less })
        }
    }
}

fn missing(what: &str, var: &str, v: Value) -> EncodeError {
    EncodeError::Internal(format!("no {what} atom for {var} at {v}"))
}

/// Largest element of ascending `bounds` not above `v`, as its literal.
fn floor_lit(bounds: &[Value], lits: &[Lit], v: Value) -> Lit {
    match bounds.partition_point(|&b| b <= v) {
        0 => FALSE,
        i => lits[i - 1],
    }
}

struct Level<'a> {
    prefix: String,
    ctx: usize,
    var: &'a str,
    leaf: Leaf<'a>,
    analysis: &'a PrefixAnalysis,
}

impl Encoder<'_> {
    pub(crate) fn encode_linear(&mut self, info: &LinearInfo) -> Result<Lit, EncodeError> {
        let keys = match &info.outcome {
            LinearOutcome::True => return Ok(TRUE),
            LinearOutcome::False => return Ok(FALSE),
            LinearOutcome::Prefixes(keys) => keys,
        };
        let tables = self.tables;
        let terms = info.sum.terms();
        let doms: Vec<&IntervalSet> = terms
            .iter()
            .map(|t| self.inst.int_domain(&t.var))
            .collect::<Result<_, _>>()?;

        let first = &tables.prefixes[&keys[0]];
        let leaf0 = Leaf {
            coeff: terms[0].coeff,
            dom: doms[0],
        };
        let mut bounds: &[Value] = &first.bounds;
        let mut lits = first
            .bounds
            .iter()
            .map(|&b| {
                let (k, _) = leaf0
                    .max_product_le(b)
                    .ok_or_else(|| missing("leaf", &terms[0].var, b))?;
                leaf_lit(&self.b.map, &terms[0].var, leaf0, k)
                    .ok_or_else(|| missing("leaf", &terms[0].var, k))
            })
            .collect::<Result<Vec<_>, _>>()?;

        for i in 1..keys.len() {
            let analysis = &tables.prefixes[&keys[i]];
            let prefix = prefix_term(&info.sum, i + 1).to_string();
            let cache_key = (prefix.clone(), keys[i].clone());
            let next = match self.prefix_cache.get(&cache_key) {
                Some(l) => l.clone(),
                None => {
                    let counter = self.prefix_ctx.entry(prefix.clone()).or_insert(0);
                    let ctx = *counter;
                    *counter += 1;
                    let level = Level {
                        prefix,
                        ctx,
                        var: &terms[i].var,
                        leaf: Leaf {
                            coeff: terms[i].coeff,
                            dom: doms[i],
                        },
                        analysis,
                    };
                    let l = self.encode_level(&level, bounds, &lits)?;
                    self.prefix_cache.insert(cache_key, l.clone());
                    l
                }
            };
            lits = next;
            bounds = &analysis.bounds;
        }
        let idx = bounds
            .binary_search(&info.rhs)
            .map_err(|_| EncodeError::Internal(format!("bound {} not analyzed", info.rhs)))?;
        Ok(lits[idx])
    }

    /// Bound atoms of one prefix `S = P + a*x`, given the atoms of `P`.
    fn encode_level(
        &mut self,
        level: &Level<'_>,
        prev_bounds: &[Value],
        prev: &[Lit],
    ) -> Result<Vec<Lit>, EncodeError> {
        let Level {
            prefix,
            ctx,
            var,
            leaf,
            analysis,
        } = level;
        let (ctx, var, leaf) = (*ctx, *var, *leaf);
        let bounds = &analysis.bounds;
        let q: Vec<Lit> = bounds
            .iter()
            .map(|&bound| {
                self.b.atom(AtomKey::Leq {
                    prefix: prefix.clone(),
                    ctx,
                    bound,
                })
            })
            .collect();
        let prev_at = |j: Value| prev[prev_bounds.binary_search(&j).expect("left bound")];

        let mut supports: Vec<Vec<Lit>> = vec![Vec::new(); q.len()];
        for p in &analysis.pairs {
            let k = p.addend / leaf.coeff;
            let l = leaf_lit(&self.b.map, var, leaf, k).ok_or_else(|| missing("leaf", var, k))?;
            let j = prev_at(p.left);
            let r = bounds.binary_search(&p.erg).expect("erg bound");
            self.b.add(&[!j, !l, q[r]]);
            let s = self.b.and(
                j,
                l,
                AtomKey::LeqSupport {
                    prefix: prefix.clone(),
                    ctx,
                    left: p.left,
                    addend: p.addend,
                },
            );
            supports[r].push(s);
        }
        for r in 0..q.len() {
            if r + 1 < q.len() {
                self.b.implies(q[r], q[r + 1]);
            }
            let mut clause = vec![!q[r]];
            if r > 0 {
                clause.push(q[r - 1]);
            }
            clause.extend(&supports[r]);
            self.b.add(&clause);
        }

        // split clauses: S <= b with a*x > t bounds P, and with P > j bounds a*x
        let points: Vec<Value> = self.b.map.points[var].clone();
        let cuts: Vec<(Lit, Value)> = points[..points.len() - 1]
            .iter()
            .filter_map(|&c| {
                let k = if leaf.coeff > 0 { leaf.dom.next_below(c)? } else { c };
                let l = leaf_lit(&self.b.map, var, leaf, k)?;
                Some((l, leaf.next_product(k)?))
            })
            .collect();
        for (r, &b) in bounds.iter().enumerate() {
            let base = floor_lit(prev_bounds, prev, b.saturating_sub(leaf.low()));
            self.b.add(&[!q[r], base]);
            for &(l, t_next) in &cuts {
                let rest = floor_lit(prev_bounds, prev, b.saturating_sub(t_next));
                self.b.add(&[!q[r], l, rest]);
            }
            for (pi, &pl) in prev.iter().enumerate() {
                let Some(&succ) = prev_bounds.get(pi + 1) else {
                    self.b.add(&[!q[r], pl]);
                    continue;
                };
                match leaf.max_product_le(b.saturating_sub(succ)) {
                    None => self.b.add(&[!q[r], pl]),
                    Some((k, _)) => {
                        if let Some(l) = leaf_lit(&self.b.map, var, leaf, k) {
                            self.b.add(&[!q[r], pl, l]);
                        }
                    }
                }
            }
        }
        Ok(q)
    }
}
