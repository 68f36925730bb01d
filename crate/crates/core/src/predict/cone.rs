//! Monte Carlo estimate of `Pr[D y > 0 and c' y > 0] / Pr[D y > 0]` for a
//! centered Gaussian `y ~ N(0, C)`.
//!
//! Samples are drawn as `y = L z` with `C = L L^T` (Cholesky) and `z`
//! standard normal. Sampling stops once the conditioning cone `D y > 0` has
//! been hit `K = ceil(ln(2/eta) / (2 eps^2))` times. The stopping rule looks
//! only at cone membership, so the numerator indicators of those `K` hits are
//! i.i.d. Bernoulli with the target ratio and Hoeffding's inequality gives
//! `|estimate - ratio| <= eps` with probability at least `1 - eta`.
//!
//! Samples come in fixed-size blocks; block `b` draws from ChaCha8 seeded with
//! `seed` on stream `b`. Blocks are evaluated in parallel but consumed in
//! index order, so the result depends only on the inputs and the seed.

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::FromPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::PredictError;

const BLOCK: u64 = 8192;
const WAVE: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    /// Additive error bound on the ratio.
    pub epsilon: f64,
    /// Failure probability.
    pub eta: f64,
    pub seed: u64,
    /// Smallest conditioning-cone probability the estimator will chase. The
    /// sample budget is `K / min_cone_fraction`; running out of budget is an
    /// error rather than a low-confidence answer.
    pub min_cone_fraction: f64,
}

impl ConeOptions {
    pub fn new(epsilon: f64, eta: f64, seed: u64) -> Self {
        ConeOptions {
            epsilon,
            eta,
            seed,
            min_cone_fraction: 1e-3,
        }
    }

    /// Cone hits needed for the requested accuracy.
    pub fn required_hits(&self) -> u64 {
        ((2.0 / self.eta).ln() / (2.0 * self.epsilon * self.epsilon)).ceil() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeEstimate<F> {
    pub ratio: F,
    /// Hoeffding half-width `sqrt(ln(2/eta) / (2 hits))`; at most `epsilon`.
    pub half_width: F,
    pub cone_hits: u64,
    pub numerator_hits: u64,
    pub samples: u64,
}

pub fn estimate_cone_ratio<F>(
    cone: &[Vec<i64>],
    target: &[i64],
    covariance: &[Vec<F>],
    opts: &ConeOptions,
) -> Result<ConeEstimate<F>, PredictError>
where
    F: RealField + Copy + FromPrimitive,
    StandardNormal: Distribution<F>,
{
    let dim = target.len();
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0 && opts.eta > 0.0 && opts.eta < 1.0) {
        return Err(PredictError::InvalidArgument(
            "epsilon and eta must lie in (0, 1)".into(),
        ));
    }
    if !(opts.min_cone_fraction > 0.0 && opts.min_cone_fraction <= 1.0) {
        return Err(PredictError::InvalidArgument(
            "min_cone_fraction must lie in (0, 1]".into(),
        ));
    }
    if covariance.len() != dim || covariance.iter().any(|r| r.len() != dim) {
        return Err(PredictError::InvalidArgument(format!(
            "covariance must be {dim}x{dim}"
        )));
    }
    if let Some(r) = cone.iter().find(|r| r.len() != dim) {
        return Err(PredictError::InvalidArgument(format!(
            "cone row has {} entries, expected {dim}",
            r.len()
        )));
    }

    let c = DMatrix::from_fn(dim, dim, |i, j| covariance[i][j]);
    let chol = c.cholesky().ok_or(PredictError::NotPositiveDefinite)?;
    let l = chol.l();
    let to_f = |v: i64| F::from_i64(v).expect("small integer");
    let d = DMatrix::from_fn(cone.len(), dim, |i, j| to_f(cone[i][j]));
    let g = &d * &l;
    let t = DVector::from_fn(dim, |i, _| to_f(target[i]));
    let gt = l.transpose() * t;

    let needed = opts.required_hits();
    let budget = (needed as f64 / opts.min_cone_fraction).ceil() as u64;
    let block = |b: u64| -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b);
        let mut z = DVector::<F>::zeros(dim);
        let (mut den, mut num) = (0u64, 0u64);
        for _ in 0..BLOCK {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(&mut rng);
            }
            let inside = (0..g.nrows()).all(|i| g.row(i).transpose().dot(&z) > F::zero());
            if inside {
                den += 1;
                if gt.dot(&z) > F::zero() {
                    num += 1;
                }
            }
        }
        (den, num)
    };

    let (mut den, mut num, mut samples) = (0u64, 0u64, 0u64);
    let mut next_block = 0u64;
    'outer: while samples < budget {
        let wave: Vec<(u64, u64)> = (next_block..next_block + WAVE)
            .into_par_iter()
            .map(block)
            .collect();
        next_block += WAVE;
        for (bd, bn) in wave {
            den += bd;
            num += bn;
            samples += BLOCK;
            if den >= needed {
                break 'outer;
            }
            if samples >= budget {
                break;
            }
        }
    }
    if den < needed {
        return Err(PredictError::VanishingCone { hits: den, samples });
    }
    let ln = (2.0 / opts.eta).ln();
    let half = (ln / (2.0 * den as f64)).sqrt();
    Ok(ConeEstimate {
        ratio: F::from_f64(num as f64 / den as f64).expect("finite"),
        half_width: F::from_f64(half).expect("finite"),
        cone_hits: den,
        numerator_hits: num,
        samples,
    })
}
