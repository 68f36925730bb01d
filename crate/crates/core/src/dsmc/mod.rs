//! Deterministic-switching momentum/contrarian (DSMC) market.
//!
//! Every trader picks a kind (momentum or contrarian) and a switching period
//! `l in [2, L]` once, at random, and then behaves deterministically: hold for
//! the `k + 1` seeded days, trade its initial kind for `l` days, then flip kind
//! every `l` days. Prices move by `alpha * (buys - sells)`.
//!
//! Series indexing: index 0 holds the first given price, so the given prices
//! occupy indices `0..=k` and trading days are `k + 1 ..= k + days`.

mod stats;

pub use stats::{summary_stats, SummaryStats};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::market::{
    switching_kind, Action, MarketError, MarketModel, Population, PopulationCounts, PriceRule,
    PriceSeries, Strategy, TrendKind,
};
use crate::scalar::Scalar;

/// `k`-day trend on day `t`: up-days minus down-days among the comparisons
/// `P_g` vs `P_{g-1}` for `g in [t-k, t-1]`. Equal prices count toward neither.
pub fn trend<T: Scalar>(history: &[T], k: usize, t: usize) -> Result<i64, MarketError> {
    if t < k + 1 || history.len() < t {
        return Err(MarketError::InsufficientHistory {
            day: t,
            have: history.len(),
        });
    }
    Ok((t - k..t)
        .map(|g| match history[g].partial_cmp(&history[g - 1]) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsmcParams<T> {
    /// Trader count `m`.
    pub traders: usize,
    /// Maximum switching period `L`; periods are drawn uniformly from `[2, L]`.
    pub max_period: usize,
    /// Memory size `k`.
    pub memory: usize,
    pub alpha: T,
    /// Number of trading days after the seeded prices.
    pub days: usize,
    /// The `k + 1` given prices.
    pub initial_prices: Vec<T>,
    pub seed: u64,
}

impl<T: Scalar> DsmcParams<T> {
    pub fn validate(&self) -> Result<(), DsmcError> {
        if self.max_period < 2 {
            return Err(DsmcError::Invalid(
                "max switching period L must be at least 2".into(),
            ));
        }
        if self.memory == 0 {
            return Err(DsmcError::Invalid(
                "memory size k must be at least 1".into(),
            ));
        }
        if self.days == 0 {
            return Err(DsmcError::Invalid(
                "at least one trading day is required".into(),
            ));
        }
        if !self.alpha.is_positive() {
            return Err(DsmcError::Invalid("alpha must be positive".into()));
        }
        if self.initial_prices.len() != self.memory + 1 {
            return Err(DsmcError::Invalid(format!(
                "expected k + 1 = {} initial prices, got {}",
                self.memory + 1,
                self.initial_prices.len()
            )));
        }
        Ok(())
    }

    /// Index of the first trading day in the series.
    pub fn first_trading_day(&self) -> usize {
        self.memory + 1
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DsmcError {
    #[error("invalid DSMC parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Market(#[from] MarketError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraderState {
    pub initial_kind: TrendKind,
    pub period: usize,
}

impl TraderState {
    /// Kind used on series index `day`, or `None` during the seeded days.
    pub fn kind_on(&self, first_trading_day: usize, day: usize) -> Option<TrendKind> {
        switching_kind(self.initial_kind, self.period, first_trading_day, day)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraderLog {
    pub state: TraderState,
    /// `(kind, action)` for each trading day, in order.
    pub days: Vec<(TrendKind, Action)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsmcRun<T> {
    pub series: PriceSeries<T>,
    pub traders: Vec<TraderLog>,
    pub first_trading_day: usize,
}

/// Draws the trader population. This is the only randomness in the model.
pub fn draw_traders(traders: usize, max_period: usize, seed: u64) -> Vec<TraderState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..traders)
        .map(|_| {
            let initial_kind = if rng.random::<bool>() {
                TrendKind::Momentum
            } else {
                TrendKind::Contrarian
            };
            let period = rng.random_range(2..=max_period);
            TraderState {
                initial_kind,
                period,
            }
        })
        .collect()
}

pub fn simulate_dsmc<T: Scalar>(params: &DsmcParams<T>) -> Result<DsmcRun<T>, DsmcError> {
    params.validate()?;
    let k = params.memory;
    let first = params.first_trading_day();
    let states = draw_traders(params.traders, params.max_period, params.seed);
    let mut logs: Vec<TraderLog> = states
        .iter()
        .map(|&state| TraderLog {
            state,
            days: Vec::with_capacity(params.days),
        })
        .collect();

    let mut prices = params.initial_prices.clone();
    for day in first..first + params.days {
        let tr = trend(&prices, k, day)?;
        let mut flow = 0i64;
        for log in &mut logs {
            let kind = log.state.kind_on(first, day).expect("trading day");
            let action = kind.act_on(tr);
            flow += action.value();
            log.days.push((kind, action));
        }
        let next = prices[day - 1].clone() + params.alpha.clone() * T::from_int(flow);
        prices.push(next);
    }

    Ok(DsmcRun {
        series: PriceSeries::new(prices)?,
        traders: logs,
        first_trading_day: first,
    })
}

impl<T: Scalar> DsmcRun<T> {
    /// The same population expressed as an AS market under the proportional
    /// rule: one switching strategy per distinct `(kind, period)` pair, with the
    /// number of traders holding it as its count.
    pub fn as_market(
        &self,
        params: &DsmcParams<T>,
    ) -> Result<(MarketModel<T>, PopulationCounts, PriceSeries<T>), DsmcError> {
        let mut groups: Vec<(TraderState, u64)> = Vec::new();
        for log in &self.traders {
            match groups.iter_mut().find(|(s, _)| *s == log.state) {
                Some((_, n)) => *n += 1,
                None => groups.push((log.state, 1)),
            }
        }
        let m = self.traders.len() as u64;
        let (strategies, counts, p): (Vec<Strategy>, Vec<u64>, Vec<T>) = if groups.is_empty() {
            (vec![Strategy::Hold], vec![0], vec![T::one()])
        } else {
            let mut strategies = Vec::new();
            let mut counts = Vec::new();
            let mut p = Vec::new();
            for (state, n) in groups {
                strategies.push(Strategy::Switching {
                    initial: state.initial_kind,
                    period: state.period,
                    k: params.memory,
                    start: self.first_trading_day,
                });
                counts.push(n);
                p.push(T::from_int(n as i64) / T::from_int(m as i64));
            }
            (strategies, counts, p)
        };
        let model = MarketModel::new(
            m,
            params.alpha.clone(),
            strategies,
            PriceRule::ProportionalIncrement,
            Population::Multinomial { p },
        )?;
        let initial = PriceSeries::new(params.initial_prices.clone())?;
        Ok((model, PopulationCounts(counts), initial))
    }
}
