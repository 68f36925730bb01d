//! Strict 0-1 inequalities to 0-1 equations with right-hand side one.
//!
//! Row `i` of `A x > 0` becomes `sum_j A_ij x_j - sum_j s_ij = 1`, where the
//! excess `A_i x - 1` is written in unary in `s_i1 >= s_i2 >= ... >= s_i,n-1`.
//! The ordering is forced by `s_ij - s_i,j+1 - t_ij + u = 1` together with
//! `u = 1`, so every solution of the inequalities has exactly one extension.

/// Column of the equation system. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationVar {
    Original(usize),
    Unit,
    Slack { row: usize, index: usize },
    Order { row: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    /// Every row has right-hand side one.
    pub rows: Vec<Vec<i8>>,
    pub variables: Vec<EquationVar>,
}

impl EquationSystem {
    pub fn columns(&self) -> usize {
        self.variables.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SlackError {
    #[error("need at least one inequality")]
    NoRows,
    #[error("need at least three unknowns, got {0}")]
    TooFewColumns(usize),
    #[error("row {row} has {len} entries, expected {columns}")]
    Ragged {
        row: usize,
        len: usize,
        columns: usize,
    },
    #[error("row {row} has coefficient {value} outside -1..=1")]
    Coefficient { row: usize, value: i8 },
}

struct Layout {
    n: usize,
    m: usize,
}

impl Layout {
    fn unit(&self) -> usize {
        self.n
    }
    fn slack(&self, row: usize, index: usize) -> usize {
        self.n + 1 + row * (self.n - 1) + index
    }
    fn order(&self, row: usize, index: usize) -> usize {
        self.n + 1 + self.m * (self.n - 1) + row * (self.n - 2) + index
    }
    fn columns(&self) -> usize {
        2 * self.m * self.n - 3 * self.m + self.n + 1
    }
}

fn check(a: &[Vec<i8>], n: usize) -> Result<Layout, SlackError> {
    if a.is_empty() {
        return Err(SlackError::NoRows);
    }
    if n < 3 {
        return Err(SlackError::TooFewColumns(n));
    }
    for (row, r) in a.iter().enumerate() {
        if r.len() != n {
            return Err(SlackError::Ragged {
                row,
                len: r.len(),
                columns: n,
            });
        }
        if let Some(&value) = r.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(SlackError::Coefficient { row, value });
        }
    }
    Ok(Layout { n, m: a.len() })
}

/// Converts `m` strict inequalities over `n >= 3` unknowns into
/// `mn - m + 1` equations over `2mn - 3m + n + 1` unknowns.
///
/// Columns: the original `x`, then `u`, then `s` and `t` in row-major order.
/// Rows: `u = 1`, then one row per inequality, then the ordering rows.
pub fn inequalities_to_equations(a: &[Vec<i8>], n: usize) -> Result<EquationSystem, SlackError> {
    let lay = check(a, n)?;
    let cols = lay.columns();
    let mut rows = Vec::with_capacity(1 + lay.m * (n - 1));

    let mut u_row = vec![0i8; cols];
    u_row[lay.unit()] = 1;
    rows.push(u_row);

    for (i, ai) in a.iter().enumerate() {
        let mut r = vec![0i8; cols];
        r[..n].copy_from_slice(ai);
        for j in 0..n - 1 {
            r[lay.slack(i, j)] = -1;
        }
        rows.push(r);
    }
    for i in 0..lay.m {
        for j in 0..n - 2 {
            let mut r = vec![0i8; cols];
            r[lay.slack(i, j)] = 1;
            r[lay.slack(i, j + 1)] = -1;
            r[lay.order(i, j)] = -1;
            r[lay.unit()] = 1;
            rows.push(r);
        }
    }

    let variables = (0..n)
        .map(EquationVar::Original)
        .chain([EquationVar::Unit])
        .chain(
            (0..lay.m)
                .flat_map(|row| (0..n - 1).map(move |index| EquationVar::Slack { row, index })),
        )
        .chain(
            (0..lay.m)
                .flat_map(|row| (0..n - 2).map(move |index| EquationVar::Order { row, index })),
        )
        .collect();
    Ok(EquationSystem { rows, variables })
}

/// The unique extension of a solution `x` of `A x > 0`, or `None` when `x`
/// violates some inequality.
pub fn extend_solution(a: &[Vec<i8>], x: &[bool]) -> Result<Option<Vec<bool>>, SlackError> {
    let lay = check(a, x.len())?;
    let n = lay.n;
    let mut out = vec![false; lay.columns()];
    out[..n].copy_from_slice(x);
    out[lay.unit()] = true;
    for (i, ai) in a.iter().enumerate() {
        let value: i64 = ai.iter().zip(x).map(|(&c, &v)| c as i64 * v as i64).sum();
        if value <= 0 {
            return Ok(None);
        }
        let excess = (value - 1) as usize;
        for j in 0..excess {
            out[lay.slack(i, j)] = true;
        }
        for j in 0..n - 2 {
            out[lay.order(i, j)] = out[lay.slack(i, j)] && !out[lay.slack(i, j + 1)];
        }
    }
    Ok(Some(out))
}
