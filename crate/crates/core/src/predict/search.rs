//! Exact counting of 0-1 solutions of a linear system, split by the sign of
//! the target row.
//!
//! Depth-first search over variables in column order with bound propagation:
//! each row keeps its fixed partial sum and the range still reachable from its
//! free variables, infeasible branches are cut as soon as the range misses the
//! row's bounds, and variables whose value is implied are fixed without
//! branching. Once every row is entailed the remaining free variables are
//! counted in closed form (a convolution over the target coefficients).

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bridge::LinearSystem;

/// Solution counts grouped by the sign of `c . x`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignTally {
    pub up: BigUint,
    pub down: BigUint,
    pub flat: BigUint,
}

impl SignTally {
    pub fn total(&self) -> BigUint {
        &self.up + &self.down + &self.flat
    }

    fn add(&mut self, other: SignTally) {
        self.up += other.up;
        self.down += other.down;
        self.flat += other.flat;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("search exceeded its budget of {budget} branching nodes")]
pub struct BudgetExceeded {
    pub budget: u64,
}

struct Row {
    terms: Vec<(usize, i64)>,
    lo: i64,
    hi: i64,
    max_abs: i64,
}

struct Search<'a> {
    rows: Vec<Row>,
    occurs: Vec<Vec<(usize, i64)>>,
    value: Vec<i8>,
    fixed: Vec<i64>,
    pos_free: Vec<i64>,
    neg_free: Vec<i64>,
    trail: Vec<usize>,
    queued: Vec<bool>,
    queue: Vec<usize>,
    target: &'a [i8],
    nodes: u64,
    budget: u64,
}

const FREE: i8 = -1;

impl<'a> Search<'a> {
    fn new(sys: &'a LinearSystem, budget: u64) -> Self {
        let mut rows: Vec<Row> = Vec::with_capacity(sys.rows());
        let mk = |r: &[i8], lo: i64, hi: i64| {
            let terms: Vec<(usize, i64)> = r
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != 0)
                .map(|(j, &a)| (j, a as i64))
                .collect();
            let max_abs = terms.iter().map(|(_, a)| a.abs()).max().unwrap_or(0);
            Row {
                terms,
                lo,
                hi,
                max_abs,
            }
        };
        for r in &sys.strict {
            rows.push(mk(r, 1, i64::MAX));
        }
        for (r, &b) in sys.equalities.iter().zip(&sys.rhs) {
            rows.push(mk(r, b, b));
        }
        let mut occurs = vec![Vec::new(); sys.columns];
        let mut pos_free = vec![0; rows.len()];
        let mut neg_free = vec![0; rows.len()];
        for (i, row) in rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                occurs[j].push((i, a));
                if a > 0 {
                    pos_free[i] += a;
                } else {
                    neg_free[i] += a;
                }
            }
        }
        let n_rows = rows.len();
        Search {
            rows,
            occurs,
            value: vec![FREE; sys.columns],
            fixed: vec![0; n_rows],
            pos_free,
            neg_free,
            trail: Vec::new(),
            queued: vec![false; n_rows],
            queue: Vec::new(),
            target: &sys.target,
            nodes: 0,
            budget,
        }
    }

    fn assign(&mut self, v: usize, val: i8) {
        self.value[v] = val;
        self.trail.push(v);
        for &(r, a) in &self.occurs[v] {
            self.fixed[r] += a * val as i64;
            if a > 0 {
                self.pos_free[r] -= a;
            } else {
                self.neg_free[r] -= a;
            }
            if !self.queued[r] {
                self.queued[r] = true;
                self.queue.push(r);
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let val = self.value[v] as i64;
            for &(r, a) in &self.occurs[v] {
                self.fixed[r] -= a * val;
                if a > 0 {
                    self.pos_free[r] += a;
                } else {
                    self.neg_free[r] += a;
                }
            }
            self.value[v] = FREE;
        }
    }

    fn clear_queue(&mut self) {
        for r in self.queue.drain(..) {
            self.queued[r] = false;
        }
    }

    /// Runs propagation to a fixpoint. Returns `false` on a conflict.
    fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            self.queued[r] = false;
            let row = &self.rows[r];
            let low = self.fixed[r] + self.neg_free[r];
            let high = self.fixed[r] + self.pos_free[r];
            if high < row.lo || low > row.hi {
                self.clear_queue();
                return false;
            }
            let slack_up = high - row.lo;
            let slack_down = row.hi.saturating_sub(low);
            if slack_up >= row.max_abs && slack_down >= row.max_abs {
                continue;
            }
            let mut forced = Vec::new();
            for &(v, a) in &row.terms {
                if self.value[v] != FREE {
                    continue;
                }
                if slack_up < a.abs() {
                    forced.push((v, if a > 0 { 1 } else { 0 }));
                } else if slack_down < a.abs() {
                    forced.push((v, if a > 0 { 0 } else { 1 }));
                }
            }
            for (v, val) in forced {
                if self.value[v] == FREE {
                    self.assign(v, val);
                }
            }
        }
        true
    }

    fn entailed(&self, r: usize) -> bool {
        let row = &self.rows[r];
        self.fixed[r] + self.neg_free[r] >= row.lo && self.fixed[r] + self.pos_free[r] <= row.hi
    }

    fn branch_variable(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for r in 0..self.rows.len() {
            if self.entailed(r) {
                continue;
            }
            if let Some(&(v, _)) = self.rows[r]
                .terms
                .iter()
                .find(|(v, _)| self.value[*v] == FREE)
            {
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best
    }

    fn leaf(&self) -> SignTally {
        let mut base = 0i64;
        let mut free_coeffs = Vec::new();
        let mut unconstrained = 0usize;
        for (v, &c) in self.target.iter().enumerate() {
            match (self.value[v], c) {
                (FREE, 0) => unconstrained += 1,
                (FREE, c) => free_coeffs.push(c as i64),
                (val, c) => base += c as i64 * val as i64,
            }
        }
        // Sum distribution of the free target terms, offset by the number of terms.
        let width = free_coeffs.len();
        let mut dist = vec![BigUint::zero(); 2 * width + 1];
        dist[width] = BigUint::one();
        for &c in &free_coeffs {
            let mut next = dist.clone();
            for (s, n) in dist.iter().enumerate() {
                if !n.is_zero() {
                    let t = (s as i64 + c) as usize;
                    next[t] += n;
                }
            }
            dist = next;
        }
        let scale = BigUint::one() << unconstrained;
        let mut tally = SignTally::default();
        for (s, n) in dist.into_iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            let total = base + s as i64 - width as i64;
            let n = n * &scale;
            match total.signum() {
                1 => tally.up += n,
                -1 => tally.down += n,
                _ => tally.flat += n,
            }
        }
        tally
    }

    fn run(&mut self) -> Result<SignTally, BudgetExceeded> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(BudgetExceeded {
                budget: self.budget,
            });
        }
        let Some(v) = self.branch_variable() else {
            return Ok(self.leaf());
        };
        let mut tally = SignTally::default();
        for val in [0i8, 1] {
            let mark = self.trail.len();
            self.assign(v, val);
            if self.propagate() {
                tally.add(self.run()?);
            }
            self.undo_to(mark);
        }
        Ok(tally)
    }
}

/// Counts 0-1 vectors `x` with `A x > 0, B x = b`, grouped by `sgn(c . x)`.
pub fn count_solutions(sys: &LinearSystem, budget: u64) -> Result<SignTally, BudgetExceeded> {
    count_solutions_with(sys, &[], budget)
}

/// As [`count_solutions`], with some variables pinned to given values.
pub fn count_solutions_with(
    sys: &LinearSystem,
    pinned: &[(usize, bool)],
    budget: u64,
) -> Result<SignTally, BudgetExceeded> {
    let mut search = Search::new(sys, budget);
    for r in 0..search.rows.len() {
        search.queued[r] = true;
        search.queue.push(r);
    }
    for &(v, val) in pinned {
        match search.value[v] {
            FREE => search.assign(v, val as i8),
            cur if cur != val as i8 => return Ok(SignTally::default()),
            _ => {}
        }
    }
    if !search.propagate() {
        return Ok(SignTally::default());
    }
    search.run()
}

/// Brute-force count over all `2^h` vectors; `h` must be at most 25.
///
/// Kept as an independent reference for [`count_solutions`].
pub fn enumerate_solutions(sys: &LinearSystem) -> Option<SignTally> {
    let h = sys.columns;
    if h > 25 {
        return None;
    }
    let masks = |r: &[i8]| -> (u64, u64) {
        r.iter()
            .enumerate()
            .fold((0, 0), |(p, n), (j, &a)| match a {
                1 => (p | 1 << j, n),
                -1 => (p, n | 1 << j),
                _ => (p, n),
            })
    };
    let eval =
        |(p, n): (u64, u64), x: u64| (x & p).count_ones() as i64 - (x & n).count_ones() as i64;
    let strict: Vec<_> = sys.strict.iter().map(|r| masks(r)).collect();
    let eqs: Vec<_> = sys
        .equalities
        .iter()
        .zip(&sys.rhs)
        .map(|(r, &b)| (masks(r), b))
        .collect();
    let target = masks(&sys.target);
    let (mut up, mut down, mut flat) = (0u64, 0u64, 0u64);
    for x in 0..(1u64 << h) {
        if strict.iter().all(|&m| eval(m, x) > 0) && eqs.iter().all(|&(m, b)| eval(m, x) == b) {
            match eval(target, x).signum() {
                1 => up += 1,
                -1 => down += 1,
                _ => flat += 1,
            }
        }
    }
    Some(SignTally {
        up: up.into(),
        down: down.into(),
        flat: flat.into(),
    })
}
