//! Next-day prediction for a fixed-increment market with a multinomial
//! population in the many-traders limit.
//!
//! Recentred and rescaled, the first `h - 1` counts converge to a centered
//! Gaussian with the single-trader covariance. A strict row `A_i` with
//! `A_i p > 0` holds with probability tending to one and is dropped; one with
//! `A_i p < 0` fails with probability tending to one, so the history has limit
//! probability zero. Rows with `A_i p = 0` become cone constraints on the
//! Gaussian after eliminating `X_h = m - sum(X_1..X_{h-1})`.

use super::cone::{estimate_cone_ratio, ConeEstimate, ConeOptions};
use super::PredictError;
use crate::bridge::{fi_market_to_system, LinearSystem};
use crate::market::{MarketModel, Population, PriceRule, PriceSeries};
use crate::scalar::{sign_of, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum LimitClassification<T> {
    /// The history has probability tending to zero.
    HistoryLimitInfeasible,
    AlwaysUp,
    AlwaysDown,
    /// The target row is identically zero: the price cannot move.
    AlwaysFlat,
    Ratio {
        /// Rows `A'_i = (A_i1 - A_ih, ..., A_i,h-1 - A_ih)` of the surviving constraints.
        cone: Vec<Vec<i64>>,
        /// `c' = (c_1 - c_h, ..., c_{h-1} - c_h)`.
        target: Vec<i64>,
        covariance: Vec<Vec<T>>,
    },
}

fn dot_p<T: Scalar>(row: &[i8], p: &[T]) -> T {
    row.iter().zip(p).fold(T::zero(), |acc, (&a, pi)| {
        acc + T::from_int(a as i64) * pi.clone()
    })
}

fn reduce(row: &[i8]) -> Vec<i64> {
    let last = *row.last().expect("h >= 1") as i64;
    row[..row.len() - 1]
        .iter()
        .map(|&a| a as i64 - last)
        .collect()
}

/// Sorts the constraints of an FI system by the sign of `A_i p` and `c p`.
/// All sign tests are exact for exact scalar types.
pub fn classify_limit_constraints<T: Scalar>(
    sys: &LinearSystem,
    p: &[T],
) -> Result<LimitClassification<T>, PredictError> {
    if p.len() != sys.columns || p.is_empty() {
        return Err(PredictError::InvalidArgument(format!(
            "{} probabilities for {} strategies",
            p.len(),
            sys.columns
        )));
    }
    if sys.equalities.iter().any(|r| r.iter().any(|&a| a != 0)) || sys.rhs.iter().any(|&b| b != 0) {
        return Ok(LimitClassification::HistoryLimitInfeasible);
    }
    let mut cone = Vec::new();
    for row in &sys.strict {
        match sign_of(&dot_p(row, p)) {
            -1 => return Ok(LimitClassification::HistoryLimitInfeasible),
            1 => {}
            _ => {
                if row.iter().all(|&a| a == 0) {
                    return Ok(LimitClassification::HistoryLimitInfeasible);
                }
                cone.push(reduce(row));
            }
        }
    }
    if sys.target.iter().all(|&c| c == 0) {
        return Ok(LimitClassification::AlwaysFlat);
    }
    Ok(match sign_of(&dot_p(&sys.target, p)) {
        1 => LimitClassification::AlwaysUp,
        -1 => LimitClassification::AlwaysDown,
        _ => LimitClassification::Ratio {
            cone,
            target: reduce(&sys.target),
            covariance: gaussian_covariance(p)?,
        },
    })
}

/// Covariance of one trader's indicator vector restricted to the first `h - 1`
/// strategies: `C_ii = p_i - p_i^2`, `C_ij = -p_i p_j`.
pub fn gaussian_covariance<T: Scalar>(p: &[T]) -> Result<Vec<Vec<T>>, PredictError> {
    if p.len() < 2 {
        return Err(PredictError::InvalidArgument(
            "covariance needs at least two strategies".into(),
        ));
    }
    let n = p.len() - 1;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        p[i].clone() - p[i].clone() * p[i].clone()
                    } else {
                        -(p[i].clone() * p[j].clone())
                    }
                })
                .collect()
        })
        .collect())
}

/// Symmetric positive-definiteness by symmetric Gaussian elimination; exact
/// for exact scalar types.
pub fn is_positive_definite<T: Scalar>(m: &[Vec<T>]) -> bool {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return false;
    }
    for i in 0..n {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return false;
            }
        }
    }
    let mut a: Vec<Vec<T>> = m.to_vec();
    for k in 0..n {
        if !a[k][k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            let factor = a[i][k].clone() / a[k][k].clone();
            for j in k..n {
                let v = a[i][j].clone() - factor.clone() * a[k][j].clone();
                a[i][j] = v;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitPrediction {
    /// Limit of `Pr_m[up | history]` as `m -> infinity`.
    pub p_up: f64,
    /// Zero when the classification settles the answer exactly.
    pub half_width: f64,
    pub estimate: Option<ConeEstimate<f64>>,
}

pub fn predict_limit<T: Scalar>(
    model: &MarketModel<T>,
    history: &PriceSeries<T>,
    opts: &ConeOptions,
) -> Result<LimitPrediction, PredictError> {
    if model.rule != PriceRule::FixedIncrement {
        return Err(PredictError::Unsupported(
            "the limit predictor applies to fixed-increment markets".into(),
        ));
    }
    let Population::Multinomial { p } = &model.population else {
        return Err(PredictError::Unsupported(
            "the limit predictor needs a multinomial population".into(),
        ));
    };
    let (sys, _) = fi_market_to_system(model, history)?;
    let exact = |v: f64| LimitPrediction {
        p_up: v,
        half_width: 0.0,
        estimate: None,
    };
    match classify_limit_constraints(&sys, p)? {
        LimitClassification::HistoryLimitInfeasible => Err(PredictError::HistoryLimitInfeasible),
        LimitClassification::AlwaysUp => Ok(exact(1.0)),
        LimitClassification::AlwaysDown | LimitClassification::AlwaysFlat => Ok(exact(0.0)),
        LimitClassification::Ratio {
            cone,
            target,
            covariance,
        } => {
            let cov: Vec<Vec<f64>> = covariance
                .iter()
                .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
                .collect();
            let est = estimate_cone_ratio(&cone, &target, &cov, opts)?;
            Ok(LimitPrediction {
                p_up: est.ratio,
                half_width: est.half_width,
                estimate: Some(est),
            })
        }
    }
}
