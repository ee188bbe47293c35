//! Core data types for CSP instances: domains, variables, linear sums,
//! literals, constraint clauses, table relations and assignments.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Integer values used throughout the crate.
pub type Value = i64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("all terms of the linear sum cancel out")]
    EmptySum,
    #[error("variable `{0}` is Boolean where an Integer variable is required")]
    KindMismatch(String),
    #[error("empty domain for variable `{0}`")]
    EmptyDomain(String),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(Value, Value),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("undeclared relation `{0}`")]
    UndeclaredRelation(String),
    #[error("relation `{rel}` has arity {arity} but is applied to {got} arguments")]
    ArityMismatch {
        rel: String,
        arity: usize,
        got: usize,
    },
    #[error("empty argument list")]
    EmptyArgs,
    #[error("clause `{0}` has no literals")]
    EmptyClause(String),
}

/// Ordered, disjoint, non-adjacent closed integer intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalSet {
    intervals: Vec<(Value, Value)>,
}

impl IntervalSet {
    /// Builds a set from arbitrary intervals; overlapping or adjacent pieces are merged.
    pub fn from_intervals<I>(pieces: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Value, Value)>,
    {
        let mut pieces: Vec<(Value, Value)> = pieces.into_iter().collect();
        for &(lo, hi) in &pieces {
            if lo > hi {
                return Err(ModelError::InvalidInterval(lo, hi));
            }
        }
        pieces.sort_unstable();
        let mut intervals: Vec<(Value, Value)> = Vec::with_capacity(pieces.len());
        for (lo, hi) in pieces {
            match intervals.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => intervals.push((lo, hi)),
            }
        }
        Ok(IntervalSet { intervals })
    }

    pub fn from_values<I: IntoIterator<Item = Value>>(values: I) -> Self {
        Self::from_intervals(values.into_iter().map(|v| (v, v)))
            .expect("singleton intervals are always valid")
    }

    pub fn single(lo: Value, hi: Value) -> Result<Self, ModelError> {
        Self::from_intervals([(lo, hi)])
    }

    pub fn intervals(&self) -> &[(Value, Value)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn min(&self) -> Option<Value> {
        self.intervals.first().map(|iv| iv.0)
    }

    pub fn max(&self) -> Option<Value> {
        self.intervals.last().map(|iv| iv.1)
    }

    pub fn contains(&self, v: Value) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.1 < v);
        self.intervals.get(idx).is_some_and(|iv| iv.0 <= v)
    }

    /// Number of values, saturating at `u64::MAX`.
    pub fn len(&self) -> u64 {
        self.intervals.iter().fold(0u64, |acc, &(lo, hi)| {
            acc.saturating_add((hi as i128 - lo as i128 + 1) as u64)
        })
    }

    /// Ascending iterator over all values.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Value> + '_ {
        self.intervals.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    pub fn values(&self) -> Vec<Value> {
        self.iter().collect()
    }

    /// Values within `[lo, hi]`, ascending.
    pub fn values_between(&self, lo: Value, hi: Value) -> impl Iterator<Item = Value> + '_ {
        let start = self.intervals.partition_point(|iv| iv.1 < lo);
        self.intervals[start..]
            .iter()
            .take_while(move |iv| iv.0 <= hi)
            .flat_map(move |&(a, b)| a.max(lo)..=b.min(hi))
    }

    /// Smallest member strictly greater than `v`.
    pub fn next_above(&self, v: Value) -> Option<Value> {
        let w = v.checked_add(1)?;
        let idx = self.intervals.partition_point(|iv| iv.1 < w);
        self.intervals.get(idx).map(|iv| iv.0.max(w))
    }

    /// Greatest member strictly smaller than `v`.
    pub fn next_below(&self, v: Value) -> Option<Value> {
        let w = v.checked_sub(1)?;
        let idx = self.intervals.partition_point(|iv| iv.0 <= w);
        idx.checked_sub(1).map(|i| self.intervals[i].1.min(w))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (lo, hi)) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "[{lo},{hi}]")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    Int(IntervalSet),
}

impl Domain {
    pub fn int(intervals: IntervalSet) -> Result<Self, ModelError> {
        if intervals.is_empty() {
            return Err(ModelError::EmptyDomain(String::new()));
        }
        Ok(Domain::Int(intervals))
    }

    pub fn range(lo: Value, hi: Value) -> Result<Self, ModelError> {
        Self::int(IntervalSet::single(lo, hi)?)
    }

    pub fn from_values<I: IntoIterator<Item = Value>>(values: I) -> Result<Self, ModelError> {
        Self::int(IntervalSet::from_values(values))
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Domain::Bool)
    }

    pub fn as_int(&self) -> Option<&IntervalSet> {
        match self {
            Domain::Int(set) => Some(set),
            Domain::Bool => None,
        }
    }
}

/// Ascending enumeration of an Integer domain.
pub fn domain_values(d: &Domain) -> Result<Vec<Value>, ModelError> {
    match d {
        Domain::Int(set) => Ok(set.values()),
        Domain::Bool => Err(ModelError::KindMismatch(String::new())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Boolean,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

impl Variable {
    pub fn boolean(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            domain: Domain::Bool,
        }
    }

    pub fn integer(name: impl Into<String>, domain: IntervalSet) -> Result<Self, ModelError> {
        let name = name.into();
        if domain.is_empty() {
            return Err(ModelError::EmptyDomain(name));
        }
        Ok(Variable {
            name,
            domain: Domain::Int(domain),
        })
    }

    pub fn kind(&self) -> VarKind {
        match self.domain {
            Domain::Bool => VarKind::Boolean,
            Domain::Int(_) => VarKind::Integer,
        }
    }
}

/// One `coeff * var` addend.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub coeff: Value,
    pub var: String,
}

impl Term {
    pub fn new(coeff: Value, var: impl Into<String>) -> Self {
        Term {
            coeff,
            var: var.into(),
        }
    }
}

/// A canonical linear sum: nonzero coefficients, one term per variable,
/// terms ordered by variable name. Conceptually the left-nested tree
/// `(((a1*x1)+(a2*x2))+(a3*x3))`; prefix `i` is the subtree holding the
/// first `i` terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearSum {
    terms: Vec<Term>,
}

/// Merges duplicate variables, drops zero coefficients and orders terms by
/// variable name.
pub fn normalize_sum<I>(terms: I) -> Result<LinearSum, ModelError>
where
    I: IntoIterator<Item = (Value, String)>,
{
    let mut merged: BTreeMap<String, Value> = BTreeMap::new();
    for (coeff, var) in terms {
        let slot = merged.entry(var).or_insert(0);
        *slot = slot.checked_add(coeff).ok_or(ModelError::Overflow)?;
    }
    let terms: Vec<Term> = merged
        .into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(var, coeff)| Term { coeff, var })
        .collect();
    if terms.is_empty() {
        return Err(ModelError::EmptySum);
    }
    Ok(LinearSum { terms })
}

impl LinearSum {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn negated(&self) -> Result<LinearSum, ModelError> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                t.coeff
                    .checked_neg()
                    .map(|coeff| Term::new(coeff, t.var.clone()))
                    .ok_or(ModelError::Overflow)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LinearSum { terms })
    }

    /// Evaluates the sum with the given value lookup; `None` on a missing
    /// variable or overflow.
    pub fn eval<F>(&self, mut value_of: F) -> Option<Value>
    where
        F: FnMut(&str) -> Option<Value>,
    {
        self.terms.iter().try_fold(0i64, |acc, t| {
            let v = value_of(&t.var)?;
            acc.checked_add(t.coeff.checked_mul(v)?)
        })
    }
}

impl fmt::Display for LinearSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let leaf = format!("({}*{})", t.coeff, t.var);
            s = if i == 0 { leaf } else { format!("({s}+{leaf})") };
        }
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Le,
    Ge,
    Eq,
    Ne,
    Lt,
    Gt,
}

impl CmpOp {
    pub fn holds(self, lhs: Value, rhs: Value) -> bool {
        match self {
            CmpOp::Le => lhs <= rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    /// The operator of the complemented comparison.
    pub fn complement(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Le,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LiteralExpr {
    BoolVar(String),
    LinearCmp {
        sum: LinearSum,
        op: CmpOp,
        rhs: Value,
    },
    AllDifferent(Vec<String>),
    Table {
        rel: String,
        args: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub expr: LiteralExpr,
    pub negated: bool,
}

impl Literal {
    pub fn pos(expr: LiteralExpr) -> Self {
        Literal {
            expr,
            negated: false,
        }
    }

    pub fn neg(expr: LiteralExpr) -> Self {
        Literal {
            expr,
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        match &self.expr {
            LiteralExpr::BoolVar(name) => f.write_str(name),
            LiteralExpr::LinearCmp { sum, op, rhs } => {
                write!(f, "sum(")?;
                for (i, t) in sum.terms().iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{}*{}", t.coeff, t.var)?;
                }
                write!(f, ") {} {}", op.symbol(), rhs)
            }
            LiteralExpr::AllDifferent(args) => write!(f, "alldifferent({})", args.join(", ")),
            LiteralExpr::Table { rel, args } => write!(f, "table({}, {})", rel, args.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintClause {
    pub id: String,
    pub literals: Vec<Literal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Supports,
    Conflicts,
}

impl RelationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::Supports => "supports",
            RelationKind::Conflicts => "conflicts",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub id: String,
    pub arity: usize,
    pub kind: RelationKind,
    pub tuples: Vec<Vec<Value>>,
}

/// A CSP instance: variables (kept in name order), table relations and
/// constraint clauses (kept in input order).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub variables: BTreeMap<String, Variable>,
    pub relations: Vec<Relation>,
    pub clauses: Vec<ConstraintClause>,
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, var: Variable) -> Result<(), ModelError> {
        if self.variables.contains_key(&var.name) {
            return Err(ModelError::Duplicate(var.name));
        }
        self.variables.insert(var.name.clone(), var);
        Ok(())
    }

    pub fn add_relation(&mut self, rel: Relation) -> Result<(), ModelError> {
        if self.relation(&rel.id).is_some() {
            return Err(ModelError::Duplicate(rel.id));
        }
        if let Some(t) = rel.tuples.iter().find(|t| t.len() != rel.arity) {
            return Err(ModelError::ArityMismatch {
                rel: rel.id.clone(),
                arity: rel.arity,
                got: t.len(),
            });
        }
        self.relations.push(rel);
        Ok(())
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.get(name)
    }

    pub fn relation(&self, id: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.id == id)
    }

    /// Integer domain of `name`, or the appropriate error.
    pub fn int_domain(&self, name: &str) -> Result<&IntervalSet, ModelError> {
        match self.variables.get(name) {
            None => Err(ModelError::UndeclaredVariable(name.to_string())),
            Some(Variable {
                domain: Domain::Int(set),
                ..
            }) => Ok(set),
            Some(_) => Err(ModelError::KindMismatch(name.to_string())),
        }
    }

    pub fn bool_vars(&self) -> impl Iterator<Item = &Variable> {
        self.variables.values().filter(|v| v.domain.is_bool())
    }

    pub fn int_vars(&self) -> impl Iterator<Item = &Variable> {
        self.variables.values().filter(|v| !v.domain.is_bool())
    }

    /// Checks every reference, kind and arity in the clauses.
    pub fn validate(&self) -> Result<(), ModelError> {
        for clause in &self.clauses {
            if clause.literals.is_empty() {
                return Err(ModelError::EmptyClause(clause.id.clone()));
            }
            for lit in &clause.literals {
                self.validate_expr(&lit.expr)?;
            }
        }
        Ok(())
    }

    fn validate_expr(&self, expr: &LiteralExpr) -> Result<(), ModelError> {
        match expr {
            LiteralExpr::BoolVar(name) => match self.variables.get(name) {
                None => Err(ModelError::UndeclaredVariable(name.clone())),
                Some(v) if v.domain.is_bool() => Ok(()),
                Some(_) => Err(ModelError::KindMismatch(name.clone())),
            },
            LiteralExpr::LinearCmp { sum, .. } => {
                if sum.is_empty() {
                    return Err(ModelError::EmptySum);
                }
                sum.terms()
                    .iter()
                    .try_for_each(|t| self.int_domain(&t.var).map(|_| ()))
            }
            LiteralExpr::AllDifferent(args) => {
                if args.is_empty() {
                    return Err(ModelError::EmptyArgs);
                }
                args.iter()
                    .try_for_each(|a| self.int_domain(a).map(|_| ()))
            }
            LiteralExpr::Table { rel, args } => {
                if args.is_empty() {
                    return Err(ModelError::EmptyArgs);
                }
                let r = self
                    .relation(rel)
                    .ok_or_else(|| ModelError::UndeclaredRelation(rel.clone()))?;
                if r.arity != args.len() {
                    return Err(ModelError::ArityMismatch {
                        rel: rel.clone(),
                        arity: r.arity,
                        got: args.len(),
                    });
                }
                args.iter()
                    .try_for_each(|a| self.int_domain(a).map(|_| ()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    Bool(bool),
    Int(Value),
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Bool(b) => write!(f, "{b}"),
            Val::Int(v) => write!(f, "{v}"),
        }
    }
}

/// A mapping from variable names to values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: BTreeMap<String, Val>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, val: Val) {
        self.values.insert(name.into(), val);
    }

    pub fn with(mut self, name: &str, val: Val) -> Self {
        self.set(name, val);
        self
    }

    pub fn get(&self, name: &str) -> Option<Val> {
        self.values.get(name).copied()
    }

    pub fn int(&self, name: &str) -> Option<Value> {
        match self.values.get(name) {
            Some(Val::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn bool(&self, name: &str) -> Option<bool> {
        match self.values.get(name) {
            Some(Val::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Val)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the assignment is total over `inst` and respects every domain.
    pub fn is_total_for(&self, inst: &Instance) -> bool {
        inst.variables.values().all(|var| match (&var.domain, self.get(&var.name)) {
            (Domain::Bool, Some(Val::Bool(_))) => true,
            (Domain::Int(set), Some(Val::Int(v))) => set.contains(v),
            _ => false,
        })
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, val) in &self.values {
            writeln!(f, "{name} = {val}")?;
        }
        Ok(())
    }
}
