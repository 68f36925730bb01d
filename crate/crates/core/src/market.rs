//! The arbitrary-strategy (AS) market: strategies, population, and the
//! one-day price update under the fixed- and proportional-increment rules.
//!
//! Days are indexed from 0. `P_0` is given, there is no trading on day 0, and
//! the action a strategy takes on day `t >= 1` is a function of the prices of
//! days `0..t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dsmc::trend;
use crate::scalar::{sign_of, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarketError {
    #[error("there is no trading on day 0")]
    NoTradingDay,
    #[error("history has {have} prices but day {day} needs prices for days 0..{day}")]
    InsufficientHistory { day: usize, have: usize },
    #[error("a price series needs at least one price")]
    EmptySeries,
    #[error("invalid strategy #{index}: {reason}")]
    InvalidStrategy { index: usize, reason: String },
    #[error("price unit alpha must be positive")]
    NonPositiveAlpha,
    #[error("a market needs at least one strategy")]
    NoStrategies,
    #[error("invalid population distribution: {0}")]
    InvalidPopulation(String),
    #[error("population counts do not fit the market: {0}")]
    InvalidCounts(String),
}

/// A market order: sell one share, do nothing, or buy one share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Sell,
    Hold,
    Buy,
}

impl Action {
    pub fn value(self) -> i64 {
        match self {
            Action::Sell => -1,
            Action::Hold => 0,
            Action::Buy => 1,
        }
    }

    pub fn from_sign(sign: i64) -> Action {
        match sign.signum() {
            1 => Action::Buy,
            -1 => Action::Sell,
            _ => Action::Hold,
        }
    }

    pub fn opposite(self) -> Action {
        Action::from_sign(-self.value())
    }
}

impl TryFrom<i64> for Action {
    type Error = i64;

    fn try_from(v: i64) -> Result<Self, i64> {
        match v {
            -1 => Ok(Action::Sell),
            0 => Ok(Action::Hold),
            1 => Ok(Action::Buy),
            other => Err(other),
        }
    }
}

/// Whether a trend-following trader is currently following or fading the trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrendKind {
    Momentum,
    Contrarian,
}

impl TrendKind {
    pub fn flipped(self) -> TrendKind {
        match self {
            TrendKind::Momentum => TrendKind::Contrarian,
            TrendKind::Contrarian => TrendKind::Momentum,
        }
    }

    /// Momentum buys on a non-negative trend and sells otherwise; contrarian does the reverse.
    pub fn act_on(self, trend: i64) -> Action {
        let momentum = if trend >= 0 {
            Action::Buy
        } else {
            Action::Sell
        };
        match self {
            TrendKind::Momentum => momentum,
            TrendKind::Contrarian => momentum.opposite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Fixed per-day action table; `actions[j]` is the action on day `j + 1`.
    /// Days past the end of the table hold.
    Passive(Vec<Action>),
    Momentum {
        k: usize,
    },
    Contrarian {
        k: usize,
    },
    /// Trades `initial` on days `[start, start + period)`, then alternates
    /// between momentum and contrarian every `period` days. Holds before `start`.
    Switching {
        initial: TrendKind,
        period: usize,
        k: usize,
        start: usize,
    },
    Hold,
}

impl Strategy {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Strategy::Momentum { k } | Strategy::Contrarian { k } if *k == 0 => {
                Err("window k must be at least 1".into())
            }
            Strategy::Switching { k, .. } if *k == 0 => Err("window k must be at least 1".into()),
            Strategy::Switching { period, .. } if *period < 2 => {
                Err("switching period must be at least 2".into())
            }
            Strategy::Switching { start, .. } if *start == 0 => {
                Err("switching start day must be at least 1".into())
            }
            _ => Ok(()),
        }
    }

    /// `true` when the strategy never looks at prices.
    pub fn is_passive(&self) -> bool {
        matches!(self, Strategy::Passive(_) | Strategy::Hold)
    }

    /// Action on `day`, seeing only the prices of days `0..day`.
    ///
    /// Trend-based strategies hold until a full `k`-day window exists, i.e.
    /// while `day < k + 1`.
    pub fn action<T: Scalar>(&self, history: &[T], day: usize) -> Result<Action, MarketError> {
        if day == 0 {
            return Err(MarketError::NoTradingDay);
        }
        if history.len() < day {
            return Err(MarketError::InsufficientHistory {
                day,
                have: history.len(),
            });
        }
        let observed = &history[..day];
        let trend_action = |kind: TrendKind, k: usize| {
            if day < k + 1 {
                Action::Hold
            } else {
                let tr = trend(observed, k, day).expect("window checked above");
                kind.act_on(tr)
            }
        };
        Ok(match self {
            Strategy::Passive(actions) => actions.get(day - 1).copied().unwrap_or(Action::Hold),
            Strategy::Hold => Action::Hold,
            Strategy::Momentum { k } => trend_action(TrendKind::Momentum, *k),
            Strategy::Contrarian { k } => trend_action(TrendKind::Contrarian, *k),
            Strategy::Switching {
                initial,
                period,
                k,
                start,
            } => match switching_kind(*initial, *period, *start, day) {
                Some(kind) => trend_action(kind, *k),
                None => Action::Hold,
            },
        })
    }
}

/// Kind a switching trader uses on `day`, or `None` before it starts trading.
pub fn switching_kind(
    initial: TrendKind,
    period: usize,
    start: usize,
    day: usize,
) -> Option<TrendKind> {
    if day < start {
        return None;
    }
    let phase = (day - start) / period;
    Some(if phase % 2 == 0 {
        initial
    } else {
        initial.flipped()
    })
}

/// Action of strategy `s` on `day` given the price history.
pub fn eval_strategy<T: Scalar>(
    s: &Strategy,
    history: &PriceSeries<T>,
    day: usize,
) -> Result<Action, MarketError> {
    s.action(history.prices(), day)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PriceRule {
    /// `P_t = P_{t-1} + alpha * sgn(net flow)`.
    FixedIncrement,
    /// `P_t = P_{t-1} + alpha * net flow`.
    ProportionalIncrement,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Population<T> {
    /// Each strategy is adopted by exactly zero or one trader, independently with probability 1/2.
    BernoulliSubset,
    /// Each of the market's traders picks strategy `i` independently with probability `p[i]`.
    Multinomial { p: Vec<T> },
}

impl<T: Scalar> Population<T> {
    pub fn validate(&self, h: usize) -> Result<(), MarketError> {
        match self {
            Population::BernoulliSubset => Ok(()),
            Population::Multinomial { p } => {
                if p.len() != h {
                    return Err(MarketError::InvalidPopulation(format!(
                        "{} probabilities for {h} strategies",
                        p.len()
                    )));
                }
                if let Some(i) = p.iter().position(|pi| !pi.is_positive()) {
                    return Err(MarketError::InvalidPopulation(format!(
                        "p[{i}] = {} is not positive",
                        p[i]
                    )));
                }
                let sum = p.iter().cloned().fold(T::zero(), |a, b| a + b);
                if !T::is_unit(&sum) {
                    return Err(MarketError::InvalidPopulation(format!(
                        "probabilities sum to {sum}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Realized number of traders per strategy, `X_1..X_h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PopulationCounts(pub Vec<u64>);

impl PopulationCounts {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Day-indexed prices `P_0, P_1, ...`; never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    prices: Vec<T>,
}

impl<T: Scalar> PriceSeries<T> {
    pub fn new(prices: Vec<T>) -> Result<Self, MarketError> {
        if prices.is_empty() {
            return Err(MarketError::EmptySeries);
        }
        Ok(PriceSeries { prices })
    }

    pub fn single(p0: T) -> Self {
        PriceSeries { prices: vec![p0] }
    }

    pub fn prices(&self) -> &[T] {
        &self.prices
    }

    pub fn into_prices(self) -> Vec<T> {
        self.prices
    }

    /// Number of prices, i.e. one more than the last day index.
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> &T {
        self.prices.last().expect("non-empty")
    }

    pub fn push(&mut self, price: T) {
        self.prices.push(price);
    }

    /// Number of post-initial days, `len() - 1`.
    pub fn trading_days(&self) -> usize {
        self.prices.len() - 1
    }

    pub fn change(&self, day: usize) -> T {
        self.prices[day].clone() - self.prices[day - 1].clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel<T> {
    /// Trader count `m`. Only meaningful for the multinomial population; a
    /// Bernoulli-subset market has at most one trader per strategy.
    pub traders: u64,
    pub alpha: T,
    pub strategies: Vec<Strategy>,
    pub rule: PriceRule,
    pub population: Population<T>,
}

impl<T: Scalar> MarketModel<T> {
    pub fn new(
        traders: u64,
        alpha: T,
        strategies: Vec<Strategy>,
        rule: PriceRule,
        population: Population<T>,
    ) -> Result<Self, MarketError> {
        let model = MarketModel {
            traders,
            alpha,
            strategies,
            rule,
            population,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        if self.strategies.is_empty() {
            return Err(MarketError::NoStrategies);
        }
        if !self.alpha.is_positive() {
            return Err(MarketError::NonPositiveAlpha);
        }
        for (index, s) in self.strategies.iter().enumerate() {
            s.validate()
                .map_err(|reason| MarketError::InvalidStrategy { index, reason })?;
        }
        self.population.validate(self.strategies.len())
    }

    /// Number of strategies `h`.
    pub fn h(&self) -> usize {
        self.strategies.len()
    }

    /// Row of actions `(S^1_day, ..., S^h_day)`.
    pub fn action_row(&self, history: &[T], day: usize) -> Result<Vec<Action>, MarketError> {
        self.strategies
            .iter()
            .map(|s| s.action(history, day))
            .collect()
    }

    pub fn check_counts(&self, counts: &PopulationCounts) -> Result<(), MarketError> {
        if counts.0.len() != self.h() {
            return Err(MarketError::InvalidCounts(format!(
                "{} counts for {} strategies",
                counts.0.len(),
                self.h()
            )));
        }
        match &self.population {
            Population::BernoulliSubset if counts.0.iter().any(|&x| x > 1) => Err(
                MarketError::InvalidCounts("bernoulli-subset counts must be 0 or 1".into()),
            ),
            Population::Multinomial { .. } if counts.total() != self.traders => {
                Err(MarketError::InvalidCounts(format!(
                    "counts sum to {} but the market has {} traders",
                    counts.total(),
                    self.traders
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Net order flow `sum_i X_i * S^i_day`.
pub fn net_flow(actions: &[Action], counts: &[u64]) -> i64 {
    actions
        .iter()
        .zip(counts)
        .map(|(a, &x)| a.value() * x as i64)
        .sum()
}

/// Price increment produced by a net order flow under `rule`.
pub fn price_change<T: Scalar>(rule: PriceRule, alpha: &T, flow: i64) -> T {
    let units = match rule {
        PriceRule::FixedIncrement => flow.signum(),
        PriceRule::ProportionalIncrement => flow,
    };
    alpha.clone() * T::from_int(units)
}

/// Price of `day` given the prices of days `0..day` and the realized population.
pub fn market_step<T: Scalar>(
    model: &MarketModel<T>,
    history: &PriceSeries<T>,
    counts: &PopulationCounts,
    day: usize,
) -> Result<T, MarketError> {
    if counts.0.len() != model.h() {
        return Err(MarketError::InvalidCounts(format!(
            "{} counts for {} strategies",
            counts.0.len(),
            model.h()
        )));
    }
    let actions = model.action_row(history.prices(), day)?;
    let flow = net_flow(&actions, &counts.0);
    Ok(history.prices()[day - 1].clone() + price_change(model.rule, &model.alpha, flow))
}

/// Extends `initial` by `days` prices. Deterministic given the counts.
pub fn simulate_as<T: Scalar>(
    model: &MarketModel<T>,
    counts: &PopulationCounts,
    initial: &PriceSeries<T>,
    days: usize,
) -> Result<PriceSeries<T>, MarketError> {
    let mut series = initial.clone();
    for _ in 0..days {
        let day = series.len();
        let next = market_step(model, &series, counts, day)?;
        series.push(next);
    }
    Ok(series)
}

/// Draws `X_1..X_h` from `dist` with a ChaCha8 generator seeded by `seed`.
///
/// The multinomial draw uses the conditional-binomial decomposition, which is
/// exact in distribution and costs `O(h)` regardless of `m`.
pub fn sample_population<T: Scalar>(
    dist: &Population<T>,
    h: usize,
    m: u64,
    seed: u64,
) -> Result<PopulationCounts, MarketError> {
    dist.validate(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(dist, h, m, &mut rng))
}

pub(crate) fn sample_with<T: Scalar, R: Rng>(
    dist: &Population<T>,
    h: usize,
    m: u64,
    rng: &mut R,
) -> PopulationCounts {
    match dist {
        Population::BernoulliSubset => {
            PopulationCounts((0..h).map(|_| u64::from(rng.random::<bool>())).collect())
        }
        Population::Multinomial { p } => {
            let p: Vec<f64> = p.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
            sample_multinomial(&p, m, rng)
        }
    }
}

pub(crate) fn sample_multinomial<R: Rng>(p: &[f64], m: u64, rng: &mut R) -> PopulationCounts {
    let mut counts = vec![0u64; p.len()];
    let mut remaining = m;
    let mut mass = 1.0f64;
    for (i, &pi) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == p.len() {
            counts[i] = remaining;
            break;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let x = Binomial::new(remaining, q).expect("q in [0,1]").sample(rng);
        counts[i] = x;
        remaining -= x;
        mass -= pi;
    }
    PopulationCounts(counts)
}

/// Sign of a price change as -1, 0 or +1.
pub fn movement<T: Scalar>(change: &T) -> i64 {
    sign_of(change)
}
