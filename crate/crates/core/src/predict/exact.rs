use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::search::{count_solutions, SignTally};
use super::PredictError;
use crate::bridge::{market_to_system, LinearSystem};
use crate::market::{MarketModel, Population, PriceSeries};
use crate::Rational;

/// Conditional probabilities of the next day's movement. Always sums to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub up: Rational,
    pub down: Rational,
    pub same: Rational,
}

impl Prediction {
    fn from_weights(up: Rational, down: Rational, same: Rational) -> Result<Self, PredictError> {
        let total = &up + &down + &same;
        if total.is_zero() {
            return Err(PredictError::ProbabilityZero);
        }
        Ok(Prediction {
            up: up / &total,
            down: down / &total,
            same: same / total,
        })
    }

    pub fn from_tally(tally: &SignTally) -> Result<Self, PredictError> {
        let r = |n: &BigUint| Rational::from_integer(BigInt::from(n.clone()));
        Self::from_weights(r(&tally.up), r(&tally.down), r(&tally.flat))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactOptions {
    /// Branching-node budget for the Bernoulli-subset solution counter.
    pub node_budget: u64,
    /// Maximum number of multinomial count vectors to enumerate.
    pub composition_cap: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            node_budget: 50_000_000,
            composition_cap: 10_000_000,
        }
    }
}

pub fn predict_exact(
    model: &MarketModel<Rational>,
    history: &PriceSeries<Rational>,
) -> Result<Prediction, PredictError> {
    predict_exact_with(model, history, &ExactOptions::default())
}

/// Exact `Pr[move | history]` by weighted enumeration of every population.
///
/// Bernoulli-subset populations are uniformly weighted, so the answer is a
/// ratio of solution counts of the extracted system. Multinomial populations
/// enumerate all count vectors summing to `m` with their multinomial weights.
pub fn predict_exact_with(
    model: &MarketModel<Rational>,
    history: &PriceSeries<Rational>,
    opts: &ExactOptions,
) -> Result<Prediction, PredictError> {
    let (sys, _) = market_to_system(model, history)?;
    match &model.population {
        Population::BernoulliSubset => {
            let tally = count_solutions(&sys, opts.node_budget)
                .map_err(|e| PredictError::CapExceeded(format!("{e}")))?;
            Prediction::from_tally(&tally)
        }
        Population::Multinomial { p } => {
            multinomial_prediction(&sys, p, model.traders, opts.composition_cap)
        }
    }
}

/// Number of vectors of `h` non-negative integers summing to `m`, saturating.
pub fn composition_count(m: u64, h: usize) -> u64 {
    if h == 0 {
        return u64::from(m == 0);
    }
    // C(m + h - 1, h - 1)
    let k = (h - 1) as u64;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (m + i) as u128 / i as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn multinomial_prediction(
    sys: &LinearSystem,
    p: &[Rational],
    m: u64,
    cap: u64,
) -> Result<Prediction, PredictError> {
    let h = p.len();
    let n = composition_count(m, h);
    if n > cap {
        return Err(PredictError::CapExceeded(format!(
            "{n} count vectors for m = {m}, h = {h} (cap {cap})"
        )));
    }
    let mut factorial = vec![BigInt::one()];
    for i in 1..=m {
        let next = factorial.last().unwrap() * BigInt::from(i);
        factorial.push(next);
    }
    let powers: Vec<Vec<Rational>> = p
        .iter()
        .map(|pi| {
            let mut v = vec![Rational::one()];
            for _ in 0..m {
                let next = v.last().unwrap() * pi;
                v.push(next);
            }
            v
        })
        .collect();

    let mut weights = [Rational::zero(), Rational::zero(), Rational::zero()];
    let mut x = vec![0i64; h];
    let mut visit = |x: &[i64]| {
        if !sys.is_satisfied_by(x) {
            return;
        }
        let mut w = Rational::from_integer(factorial[m as usize].clone());
        for (i, &xi) in x.iter().enumerate() {
            w = w * &powers[i][xi as usize] / &factorial[xi as usize];
        }
        let slot = match sys.target_value(x).signum() {
            1 => 0,
            -1 => 1,
            _ => 2,
        };
        weights[slot] += w;
    };
    compositions(&mut x, 0, m as i64, &mut visit);
    let [up, down, same] = weights;
    Prediction::from_weights(up, down, same)
}

fn compositions(x: &mut [i64], i: usize, remaining: i64, visit: &mut impl FnMut(&[i64])) {
    if i + 1 == x.len() {
        x[i] = remaining;
        visit(x);
        return;
    }
    if x.is_empty() {
        return;
    }
    for v in 0..=remaining {
        x[i] = v;
        compositions(x, i + 1, remaining - v, visit);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundedVerdict {
    /// `Pr[up | history] > 2/3`.
    UpLikely,
    /// `Pr[up | history] < 1/3`.
    DownNotUp,
    /// The 1/3 - 2/3 promise does not hold for this input.
    Indeterminate,
}

fn require_bernoulli(model: &MarketModel<Rational>) -> Result<(), PredictError> {
    match model.population {
        Population::BernoulliSubset => Ok(()),
        _ => Err(PredictError::Unsupported(
            "decision problems are defined for bernoulli-subset populations".into(),
        )),
    }
}

pub fn decide_bounded(
    model: &MarketModel<Rational>,
    history: &PriceSeries<Rational>,
) -> Result<BoundedVerdict, PredictError> {
    require_bernoulli(model)?;
    let up = predict_exact(model, history)?.up;
    Ok(if up > crate::scalar::rational(2, 3) {
        BoundedVerdict::UpLikely
    } else if up < crate::scalar::rational(1, 3) {
        BoundedVerdict::DownNotUp
    } else {
        BoundedVerdict::Indeterminate
    })
}

/// Whether `Pr[up | history] > 1/2`, compared exactly.
pub fn decide_unbounded(
    model: &MarketModel<Rational>,
    history: &PriceSeries<Rational>,
) -> Result<bool, PredictError> {
    require_bernoulli(model)?;
    Ok(predict_exact(model, history)?.up > crate::scalar::rational(1, 2))
}
