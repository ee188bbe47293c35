//! Conflict-driven clause learning: two watched literals, first-UIP
//! learning, activity ordering, phase saving and Luby restarts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{Heuristic, SolverConfig};

const NO_REASON: u32 = u32::MAX;
const RESTART_UNIT: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Model indexed by variable id; index 0 is unused.
    Sat(Vec<bool>),
    Unsat,
    Unknown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
}

#[derive(Clone, Copy, PartialEq)]
struct Scored(f64, u32);

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

fn to_lit(l: i32) -> u32 {
    let v = l.unsigned_abs() - 1;
    2 * v + u32::from(l < 0)
}

fn from_lit(l: u32) -> i32 {
    let v = (l >> 1) as i32 + 1;
    if l & 1 == 1 {
        -v
    } else {
        v
    }
}

fn value(assign: &[i8], l: u32) -> i8 {
    let a = assign[(l >> 1) as usize];
    if l & 1 == 1 {
        -a
    } else {
        a
    }
}

fn luby(mut i: u64) -> u64 {
    // i-th element (0-based) of 1,1,2,1,1,2,4,...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

pub struct Cdcl {
    num_vars: usize,
    original: Vec<Vec<i32>>,
    clauses: Vec<Vec<u32>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: BinaryHeap<Scored>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    heuristic: Heuristic,
    phase_saving: bool,
    conflict_limit: Option<u64>,
    pub stats: Stats,
}

impl Cdcl {
    pub fn new(num_vars: usize, cfg: &SolverConfig) -> Self {
        let mut rng = StdRng::seed_from_u64(cfg.seed);
        let activity: Vec<f64> = (0..num_vars).map(|_| rng.gen::<f64>() * 1e-6).collect();
        let heap = activity
            .iter()
            .enumerate()
            .map(|(v, &a)| Scored(a, v as u32))
            .collect();
        Cdcl {
            num_vars,
            original: Vec::new(),
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assign: vec![0; num_vars],
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            heap,
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            ok: true,
            heuristic: cfg.heuristic,
            phase_saving: cfg.phase_saving,
            conflict_limit: cfg.conflict_limit,
            stats: Stats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: u32, reason: u32) {
        let v = (l >> 1) as usize;
        self.assign[v] = if l & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, lits: Vec<u32>) -> u32 {
        let ci = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(ci);
        self.watches[lits[1] as usize].push(ci);
        self.clauses.push(lits);
        ci
    }

    /// Adds a clause at decision level 0. Returns `false` once the clause
    /// set is known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[i32]) -> bool {
        self.original.push(lits.to_vec());
        if !self.ok {
            return false;
        }
        self.backtrack(0);
        let mut c: Vec<u32> = Vec::with_capacity(lits.len());
        for &l in lits {
            assert!(
                l != 0 && l.unsigned_abs() as usize <= self.num_vars,
                "literal {l} out of range"
            );
            let p = to_lit(l);
            match value(&self.assign, p) {
                1 => return true,
                -1 => continue,
                _ => {}
            }
            if c.contains(&(p ^ 1)) {
                return true;
            }
            if !c.contains(&p) {
                c.push(p);
            }
        }
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
        self.ok
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let falsified = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[falsified as usize]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci as usize];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                if value(&self.assign, c[0]) == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if value(&self.assign, c[k]) != -1 {
                        c.swap(1, k);
                        self.watches[c[1] as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if value(&self.assign, first) == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, ci);
                }
            }
            ws.truncate(j);
            self.watches[falsified as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
            self.heap = self
                .activity
                .iter()
                .enumerate()
                .filter(|&(v, _)| self.assign[v] == 0)
                .map(|(v, &a)| Scored(a, v as u32))
                .collect();
        } else if self.assign[v] == 0 {
            self.heap.push(Scored(self.activity[v], v as u32));
        }
    }

    /// First-UIP clause and the level to backtrack to.
    fn analyze(&mut self, mut confl: u32) -> (Vec<u32>, usize) {
        let mut learnt = vec![0u32];
        let mut open = 0usize;
        let mut idx = self.trail.len();
        let mut skip_first = false;
        let current = self.decision_level() as u32;
        loop {
            let clause = std::mem::take(&mut self.clauses[confl as usize]);
            for &q in &clause[usize::from(skip_first)..] {
                let v = (q >> 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        open += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            self.clauses[confl as usize] = clause;
            let p = loop {
                idx -= 1;
                let p = self.trail[idx];
                if self.seen[(p >> 1) as usize] {
                    break p;
                }
            };
            let v = (p >> 1) as usize;
            self.seen[v] = false;
            open -= 1;
            if open == 0 {
                learnt[0] = p ^ 1;
                break;
            }
            confl = self.reason[v];
            skip_first = true;
        }
        for &q in &learnt[1..] {
            self.seen[(q >> 1) as usize] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[(learnt[k] >> 1) as usize] > self.level[(learnt[best] >> 1) as usize] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back = self.level[(learnt[1] >> 1) as usize] as usize;
        }
        (learnt, back)
    }

    fn backtrack(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let start = self.trail_lim[target];
        for k in (start..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = (l >> 1) as usize;
            self.assign[v] = 0;
            self.reason[v] = NO_REASON;
            if self.phase_saving {
                self.phase[v] = l & 1 == 0;
            }
            self.heap.push(Scored(self.activity[v], v as u32));
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(target);
        self.qhead = start;
    }

    fn pick(&mut self) -> Option<u32> {
        let v = match self.heuristic {
            Heuristic::Fixed => (0..self.num_vars).find(|&v| self.assign[v] == 0)?,
            Heuristic::Activity => loop {
                let Scored(a, v) = self.heap.pop()?;
                let v = v as usize;
                if self.assign[v] == 0 && a == self.activity[v] {
                    break v;
                }
            },
        };
        Some(2 * v as u32 + u32::from(!self.phase[v]))
    }

    fn model(&self) -> Vec<bool> {
        let mut m = vec![false; self.num_vars + 1];
        for v in 0..self.num_vars {
            m[v + 1] = self.assign[v] == 1;
        }
        m
    }

    pub fn solve(&mut self) -> Outcome {
        if !self.ok {
            return Outcome::Unsat;
        }
        self.backtrack(0);
        if self.propagate().is_some() {
            self.ok = false;
            return Outcome::Unsat;
        }
        let start_conflicts = self.stats.conflicts;
        let mut restart_idx = 0u64;
        let mut until_restart = luby(0) * RESTART_UNIT;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Outcome::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, ci);
                }
                self.var_inc /= 0.95;
                if self
                    .conflict_limit
                    .is_some_and(|lim| self.stats.conflicts - start_conflicts >= lim)
                {
                    self.backtrack(0);
                    return Outcome::Unknown;
                }
                until_restart -= 1;
                if until_restart == 0 {
                    self.stats.restarts += 1;
                    restart_idx += 1;
                    until_restart = luby(restart_idx) * RESTART_UNIT;
                    self.backtrack(0);
                }
            } else {
                match self.pick() {
                    None => {
                        let model = self.model();
                        for c in &self.original {
                            assert!(
                                c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)),
                                "model violates clause {c:?}"
                            );
                        }
                        self.backtrack(0);
                        return Outcome::Sat(model);
                    }
                    Some(l) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }

    /// Level-0 propagation result: `None` on conflict, else the fixed literals.
    pub fn fixed_literals(&mut self) -> Option<Vec<i32>> {
        if !self.ok {
            return None;
        }
        self.backtrack(0);
        if self.propagate().is_some() {
            self.ok = false;
            return None;
        }
        Some(self.trail.iter().map(|&l| from_lit(l)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(n: usize, clauses: &[&[i32]]) -> Outcome {
        let mut s = Cdcl::new(n, &SolverConfig::default());
        for c in clauses {
            s.add_clause(c);
        }
        s.solve()
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn literal_coding() {
        for l in [1, -1, 7, -7] {
            assert_eq!(from_lit(to_lit(l)), l);
        }
    }

    #[test]
    fn small_formulas() {
        assert_eq!(solve(0, &[]), Outcome::Sat(vec![false]));
        assert_eq!(solve(1, &[&[1], &[-1]]), Outcome::Unsat);
        let Outcome::Sat(m) = solve(3, &[&[1, 2], &[-1, 3], &[-3, -2], &[-2]]) else {
            panic!()
        };
        assert!(m[1] && m[3] && !m[2]);
    }

    #[test]
    fn pigeonhole_three_into_two() {
        // p(i,h) = 2*i + h + 1
        let p = |i: i32, h: i32| 2 * i + h + 1;
        let mut clauses: Vec<Vec<i32>> = (0..3).map(|i| vec![p(i, 0), p(i, 1)]).collect();
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    clauses.push(vec![-p(i, h), -p(j, h)]);
                }
            }
        }
        let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
        assert_eq!(solve(6, &refs), Outcome::Unsat);
        let mut s = Cdcl::new(6, &SolverConfig { heuristic: Heuristic::Fixed, ..Default::default() });
        for c in &refs {
            s.add_clause(c);
        }
        assert_eq!(s.solve(), Outcome::Unsat);
    }

    #[test]
    fn conflict_limit_gives_unknown() {
        let n = 7;
        let holes = 6;
        let p = |i: i32, h: i32| holes * i + h + 1;
        let mut s = Cdcl::new(
            (n * holes) as usize,
            &SolverConfig {
                conflict_limit: Some(3),
                ..Default::default()
            },
        );
        for i in 0..n {
            s.add_clause(&(0..holes).map(|h| p(i, h)).collect::<Vec<_>>());
        }
        for h in 0..holes {
            for i in 0..n {
                for j in i + 1..n {
                    s.add_clause(&[-p(i, h), -p(j, h)]);
                }
            }
        }
        assert_eq!(s.solve(), Outcome::Unknown);
    }

    #[test]
    fn incremental_blocking() {
        let mut s = Cdcl::new(2, &SolverConfig::default());
        let mut count = 0;
        while let Outcome::Sat(m) = s.solve() {
            count += 1;
            s.add_clause(&[if m[1] { -1 } else { 1 }, if m[2] { -2 } else { 2 }]);
        }
        assert_eq!(count, 4);
    }

    #[test]
    fn level_zero_fixed() {
        let mut s = Cdcl::new(3, &SolverConfig::default());
        s.add_clause(&[1]);
        s.add_clause(&[-1, 2]);
        s.add_clause(&[2, 3]);
        assert_eq!(s.fixed_literals(), Some(vec![1, 2]));
        s.add_clause(&[-2]);
        assert_eq!(s.fixed_literals(), None);
    }
}
