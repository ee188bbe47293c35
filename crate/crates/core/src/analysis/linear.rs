//! Threshold analysis of a single linear inequality `a1*x1 + ... + an*xn <= m`
//! over the left-nested prefixes of the sum.

use std::collections::BTreeSet;

use crate::model::{IntervalSet, Value};

use super::AnalysisError;

pub(crate) fn ovf<T>(v: Option<T>) -> Result<T, AnalysisError> {
    v.ok_or(AnalysisError::Overflow)
}

fn floor_div(a: Value, b: Value) -> Value {
    let q = a.div_euclid(b);
    // for negative divisors div_euclid rounds toward +inf
    if b < 0 && a.rem_euclid(b) != 0 {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: Value, b: Value) -> Value {
    -floor_div(-a, b)
}

/// `range(a*x)`: the domain intervals scaled by `a`, reversed for negative `a`.
pub fn scale_range(dom: &IntervalSet, a: Value) -> Result<IntervalSet, AnalysisError> {
    let pieces = dom
        .intervals()
        .iter()
        .map(|&(l, u)| {
            let (p, q) = (ovf(a.checked_mul(l))?, ovf(a.checked_mul(u))?);
            Ok(if a >= 0 { (p, q) } else { (q, p) })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    IntervalSet::from_intervals(pieces).map_err(|_| AnalysisError::Overflow)
}

/// One addend `a*x` seen through its domain only.
#[derive(Debug, Clone, Copy)]
pub struct Leaf<'a> {
    pub coeff: Value,
    pub dom: &'a IntervalSet,
}

impl Leaf<'_> {
    pub fn low(&self) -> Value {
        if self.coeff > 0 {
            self.coeff * self.dom.min().unwrap()
        } else {
            self.coeff * self.dom.max().unwrap()
        }
    }

    pub fn upp(&self) -> Value {
        if self.coeff > 0 {
            self.coeff * self.dom.max().unwrap()
        } else {
            self.coeff * self.dom.min().unwrap()
        }
    }

    /// Domain values `k` with `lo <= a*k <= hi`, paired with their product.
    pub fn products_in(&self, lo: Value, hi: Value) -> Vec<(Value, Value)> {
        if lo > hi {
            return Vec::new();
        }
        let a = self.coeff;
        let (klo, khi) = if a > 0 {
            (ceil_div(lo, a), floor_div(hi, a))
        } else {
            (ceil_div(hi, a), floor_div(lo, a))
        };
        self.dom
            .values_between(klo, khi)
            .map(|k| (k, a * k))
            .collect()
    }

    /// The domain value with the greatest product `a*k <= v`.
    pub fn max_product_le(&self, v: Value) -> Option<(Value, Value)> {
        let a = self.coeff;
        let k = if a > 0 {
            let bound = floor_div(v, a);
            if self.dom.contains(bound) {
                Some(bound)
            } else {
                self.dom.next_below(bound)
            }
        } else {
            let bound = ceil_div(v, a);
            if self.dom.contains(bound) {
                Some(bound)
            } else {
                self.dom.next_above(bound)
            }
        }?;
        Some((k, a * k))
    }

    /// Smallest product strictly above the product of `k`.
    pub fn next_product(&self, k: Value) -> Option<Value> {
        let next = if self.coeff > 0 {
            self.dom.next_above(k)
        } else {
            self.dom.next_below(k)
        }?;
        Some(self.coeff * next)
    }

    /// The value `e` such that `a*x <= a*k` iff `x < e` (positive `a`) or
    /// `x >= e` (negative `a`); `None` when the comparison always holds.
    pub fn cut(&self, k: Value) -> Option<Value> {
        if self.coeff > 0 {
            self.dom.next_above(k)
        } else if Some(k) == self.dom.min() {
            None
        } else {
            Some(k)
        }
    }
}

/// Per-prefix `(low, upp)`, prefix `i` holding the first `i + 1` addends.
pub fn prefix_bounds(leaves: &[Leaf<'_>]) -> Result<Vec<(Value, Value)>, AnalysisError> {
    let mut out = Vec::with_capacity(leaves.len());
    let (mut low, mut upp) = (0i64, 0i64);
    for leaf in leaves {
        ovf(leaf.coeff.checked_mul(leaf.dom.min().unwrap()))?;
        ovf(leaf.coeff.checked_mul(leaf.dom.max().unwrap()))?;
        low = ovf(low.checked_add(leaf.low()))?;
        upp = ovf(upp.checked_add(leaf.upp()))?;
        out.push((low, upp));
    }
    Ok(out)
}

/// Per-prefix `(blow, bupp)`: the comparison bound pushed inward from the full
/// sum towards the first addend.
pub fn push_thresholds(
    leaves: &[Leaf<'_>],
    bounds: &[(Value, Value)],
    rhs: Value,
) -> Result<Vec<(Value, Value)>, AnalysisError> {
    let n = leaves.len();
    let mut out = vec![(0, 0); n];
    let (low, upp) = bounds[n - 1];
    out[n - 1] = (rhs.max(low), rhs.min(upp));
    for i in (0..n - 1).rev() {
        let (blow, bupp) = out[i + 1];
        let (low, upp) = bounds[i];
        out[i] = (
            ovf(blow.checked_sub(leaves[i + 1].upp()))?.max(low),
            ovf(bupp.checked_sub(leaves[i + 1].low()))?.min(upp),
        );
    }
    Ok(out)
}

/// Upper bounds worth distinguishing for a prefix, given the bounds of the
/// prefix one addend shorter (`{0}` for the first addend). Ascending.
pub fn bound_set(
    prev: &[Value],
    leaf: Leaf<'_>,
    blow: Value,
    bupp: Value,
) -> Result<Vec<Value>, AnalysisError> {
    let mut set = BTreeSet::new();
    let leaf_low = leaf.low();
    for &j in prev {
        let hi = ovf(bupp.checked_sub(j))?;
        if hi < leaf_low {
            continue;
        }
        let lo = ovf(blow.checked_sub(j))?;
        if leaf_low < lo {
            set.insert(blow);
        }
        for (_, p) in leaf.products_in(lo.max(leaf_low), hi) {
            set.insert(j + p);
        }
    }
    Ok(set.into_iter().collect())
}

/// A maximal pair of addends `(left, addend)` and the smallest bound `erg`
/// of the prefix dominating their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AddPair {
    pub left: Value,
    pub addend: Value,
    pub erg: Value,
}

/// Smallest element of `bounds` (ascending) that is `>= value`.
pub fn erg(bounds: &[Value], value: Value) -> Option<Value> {
    let idx = bounds.partition_point(|&b| b < value);
    bounds.get(idx).copied()
}

/// Maximal addend pairs relating `prev` bounds and the leaf's products to the
/// prefix bounds `bounds`.
pub fn addend_pairs(prev: &[Value], leaf: Leaf<'_>, bounds: &[Value]) -> Vec<AddPair> {
    let leaf_low = leaf.low();
    let mut pairs = BTreeSet::new();
    for &j in prev {
        for &ub in bounds {
            let room = ub - j;
            if leaf_low > room {
                continue;
            }
            if let Some((_, t)) = leaf.max_product_le(room) {
                pairs.insert((j, t));
            }
        }
    }
    pairs
        .into_iter()
        .map(|(left, addend)| AddPair {
            left,
            addend,
            erg: erg(bounds, left + addend).expect("pair derived from a bound"),
        })
        .collect()
}
