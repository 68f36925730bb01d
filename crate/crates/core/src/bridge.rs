//! Conversions between (market, price history) pairs and linear constraint
//! systems over the population variables `X_1..X_h`.
//!
//! Under the fixed-increment rule a day with a price move gives a strict row
//! `sgn(dP) * S_j . X > 0` and a flat day gives `S_j . X = 0`. Under the
//! proportional rule every day gives `S_j . X = dP / alpha`. The reverse
//! direction builds passive strategies whose day-`j` actions are row `j`.

use crate::market::{
    Action, MarketError, MarketModel, Population, PriceRule, PriceSeries, Strategy,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BridgeError {
    #[error("expected a {expected:?} market")]
    WrongRule { expected: PriceRule },
    #[error("day {day}: price change {change} is not 0 or +/- alpha")]
    FixedStep { day: usize, change: String },
    #[error("day {day}: price change {change} is not an integer multiple of alpha")]
    NonIntegralChange { day: usize, change: String },
    #[error("coefficient {value} at row {row}, column {column} is outside {{-1, 0, 1}}")]
    Coefficient {
        row: usize,
        column: usize,
        value: i8,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("a fixed-increment system needs an all-zero right-hand side (row {row} has {value})")]
    NonZeroRhs { row: usize, value: i64 },
    #[error("embedding needs m >= m0 (m = {m}, m0 = {m0})")]
    TooFewTraders { m: u64, m0: u64 },
    #[error("embedding needs a multinomial population")]
    NotMultinomial,
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// `A x > 0`, `B x = b`, plus the target row `c` whose sign gives the next move.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearSystem {
    pub columns: usize,
    /// Rows of `A`.
    pub strict: Vec<Vec<i8>>,
    /// Rows of `B`.
    pub equalities: Vec<Vec<i8>>,
    /// `b`, one entry per row of `B`.
    pub rhs: Vec<i64>,
    /// `c`.
    pub target: Vec<i8>,
}

impl LinearSystem {
    pub fn new(columns: usize) -> Self {
        LinearSystem {
            columns,
            strict: Vec::new(),
            equalities: Vec::new(),
            rhs: Vec::new(),
            target: vec![0; columns],
        }
    }

    /// Total row count `beta`.
    pub fn rows(&self) -> usize {
        self.strict.len() + self.equalities.len()
    }

    pub fn validate(&self) -> Result<(), BridgeError> {
        if self.rhs.len() != self.equalities.len() {
            return Err(BridgeError::Dimension(format!(
                "{} equation rows but {} right-hand sides",
                self.equalities.len(),
                self.rhs.len()
            )));
        }
        if self.target.len() != self.columns {
            return Err(BridgeError::Dimension(format!(
                "target has {} entries for {} columns",
                self.target.len(),
                self.columns
            )));
        }
        for (row, r) in self.strict.iter().chain(&self.equalities).enumerate() {
            if r.len() != self.columns {
                return Err(BridgeError::Dimension(format!(
                    "row {row} has {} entries for {} columns",
                    r.len(),
                    self.columns
                )));
            }
            check_coefficients(row, r)?;
        }
        check_coefficients(self.rows(), &self.target)
    }

    pub fn is_satisfied_by(&self, x: &[i64]) -> bool {
        self.strict.iter().all(|r| dot(r, x) > 0)
            && self
                .equalities
                .iter()
                .zip(&self.rhs)
                .all(|(r, &b)| dot(r, x) == b)
    }

    /// Index of the first row violated by `x`, counting `A` rows then `B` rows.
    pub fn first_violation(&self, x: &[i64]) -> Option<usize> {
        if let Some(i) = self.strict.iter().position(|r| dot(r, x) <= 0) {
            return Some(i);
        }
        self.equalities
            .iter()
            .zip(&self.rhs)
            .position(|(r, &b)| dot(r, x) != b)
            .map(|i| self.strict.len() + i)
    }

    pub fn target_value(&self, x: &[i64]) -> i64 {
        dot(&self.target, x)
    }
}

fn check_coefficients(row: usize, r: &[i8]) -> Result<(), BridgeError> {
    match r.iter().position(|v| !(-1..=1).contains(v)) {
        Some(column) => Err(BridgeError::Coefficient {
            row,
            column,
            value: r[column],
        }),
        None => Ok(()),
    }
}

pub fn dot(row: &[i8], x: &[i64]) -> i64 {
    row.iter().zip(x).map(|(&a, &v)| a as i64 * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Movement {
    Up,
    Down,
    Flat,
}

impl Movement {
    pub fn from_sign(s: i64) -> Movement {
        match s.signum() {
            1 => Movement::Up,
            -1 => Movement::Down,
            _ => Movement::Flat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowRef {
    Strict(usize),
    Equality(usize),
}

/// Which day (and movement) a constraint row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowOrigin {
    pub day: usize,
    pub movement: Movement,
    pub row: RowRef,
}

/// One entry per post-initial day, in day order.
pub type DayProvenance = Vec<RowOrigin>;

fn to_row(actions: &[Action]) -> Vec<i8> {
    actions.iter().map(|a| a.value() as i8).collect()
}

/// Extracts `A x > 0, B x = 0` and the next-day target from a fixed-increment market.
pub fn fi_market_to_system<T: Scalar>(
    model: &MarketModel<T>,
    history: &PriceSeries<T>,
) -> Result<(LinearSystem, DayProvenance), BridgeError> {
    if model.rule != PriceRule::FixedIncrement {
        return Err(BridgeError::WrongRule {
            expected: PriceRule::FixedIncrement,
        });
    }
    let prices = history.prices();
    let mut sys = LinearSystem::new(model.h());
    let mut provenance = Vec::with_capacity(history.trading_days());
    for day in 1..prices.len() {
        let row = to_row(&model.action_row(prices, day)?);
        let change = history.change(day);
        let origin = if change.is_zero() {
            sys.equalities.push(row);
            sys.rhs.push(0);
            RowOrigin {
                day,
                movement: Movement::Flat,
                row: RowRef::Equality(sys.equalities.len() - 1),
            }
        } else if change == model.alpha {
            sys.strict.push(row);
            RowOrigin {
                day,
                movement: Movement::Up,
                row: RowRef::Strict(sys.strict.len() - 1),
            }
        } else if change == -model.alpha.clone() {
            sys.strict.push(row.iter().map(|v| -v).collect());
            RowOrigin {
                day,
                movement: Movement::Down,
                row: RowRef::Strict(sys.strict.len() - 1),
            }
        } else {
            return Err(BridgeError::FixedStep {
                day,
                change: change.to_string(),
            });
        };
        provenance.push(origin);
    }
    sys.target = to_row(&model.action_row(prices, prices.len())?);
    Ok((sys, provenance))
}

/// Extracts `B x = b` and the next-day target from a proportional-increment market.
pub fn pi_market_to_system<T: Scalar>(
    model: &MarketModel<T>,
    history: &PriceSeries<T>,
) -> Result<(LinearSystem, DayProvenance), BridgeError> {
    if model.rule != PriceRule::ProportionalIncrement {
        return Err(BridgeError::WrongRule {
            expected: PriceRule::ProportionalIncrement,
        });
    }
    let prices = history.prices();
    let mut sys = LinearSystem::new(model.h());
    let mut provenance = Vec::with_capacity(history.trading_days());
    for day in 1..prices.len() {
        let change = history.change(day);
        let units = T::exact_integer(&(change.clone() / model.alpha.clone())).ok_or_else(|| {
            BridgeError::NonIntegralChange {
                day,
                change: change.to_string(),
            }
        })?;
        sys.equalities.push(to_row(&model.action_row(prices, day)?));
        sys.rhs.push(units);
        provenance.push(RowOrigin {
            day,
            movement: Movement::from_sign(units),
            row: RowRef::Equality(sys.equalities.len() - 1),
        });
    }
    sys.target = to_row(&model.action_row(prices, prices.len())?);
    Ok((sys, provenance))
}

/// Dispatches on the market's price rule.
pub fn market_to_system<T: Scalar>(
    model: &MarketModel<T>,
    history: &PriceSeries<T>,
) -> Result<(LinearSystem, DayProvenance), BridgeError> {
    match model.rule {
        PriceRule::FixedIncrement => fi_market_to_system(model, history),
        PriceRule::ProportionalIncrement => pi_market_to_system(model, history),
    }
}

/// Price unit and starting price for markets built from systems.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization<T> {
    pub alpha: T,
    pub initial_price: T,
}

impl<T: Scalar> Default for Realization<T> {
    fn default() -> Self {
        Realization {
            alpha: T::one(),
            initial_price: T::from_int(100),
        }
    }
}

fn passive_columns(columns: usize, day_rows: &[&[i8]], target: &[i8]) -> Vec<Strategy> {
    (0..columns)
        .map(|i| {
            Strategy::Passive(
                day_rows
                    .iter()
                    .map(|r| r[i])
                    .chain(std::iter::once(target[i]))
                    .map(|v| Action::from_sign(v as i64))
                    .collect(),
            )
        })
        .collect()
}

/// Builds an FI market whose history forces exactly `A x > 0, B x = 0`.
///
/// `A` rows become up days (in order), then `B` rows become flat days; the
/// target row becomes the strategies' actions on the day after the history.
pub fn system_to_fi_market<T: Scalar>(
    sys: &LinearSystem,
    realization: &Realization<T>,
) -> Result<(MarketModel<T>, PriceSeries<T>, DayProvenance), BridgeError> {
    sys.validate()?;
    if let Some(row) = sys.rhs.iter().position(|&b| b != 0) {
        return Err(BridgeError::NonZeroRhs {
            row,
            value: sys.rhs[row],
        });
    }
    let day_rows: Vec<&[i8]> = sys
        .strict
        .iter()
        .chain(&sys.equalities)
        .map(Vec::as_slice)
        .collect();
    let strategies = passive_columns(sys.columns, &day_rows, &sys.target);
    let model = MarketModel::new(
        sys.columns as u64,
        realization.alpha.clone(),
        strategies,
        PriceRule::FixedIncrement,
        Population::BernoulliSubset,
    )?;

    let mut prices = vec![realization.initial_price.clone()];
    let mut provenance = Vec::with_capacity(sys.rows());
    for i in 0..sys.strict.len() {
        let next = prices.last().unwrap().clone() + realization.alpha.clone();
        prices.push(next);
        provenance.push(RowOrigin {
            day: prices.len() - 1,
            movement: Movement::Up,
            row: RowRef::Strict(i),
        });
    }
    for i in 0..sys.equalities.len() {
        let next = prices.last().unwrap().clone();
        prices.push(next);
        provenance.push(RowOrigin {
            day: prices.len() - 1,
            movement: Movement::Flat,
            row: RowRef::Equality(i),
        });
    }
    Ok((model, PriceSeries::new(prices)?, provenance))
}

/// Builds a PI market whose history forces exactly `B x = b`.
pub fn system_to_pi_market<T: Scalar>(
    sys: &LinearSystem,
    realization: &Realization<T>,
) -> Result<(MarketModel<T>, PriceSeries<T>, DayProvenance), BridgeError> {
    sys.validate()?;
    if !sys.strict.is_empty() {
        return Err(BridgeError::Dimension(
            "a proportional-increment market encodes equations only".into(),
        ));
    }
    let day_rows: Vec<&[i8]> = sys.equalities.iter().map(Vec::as_slice).collect();
    let strategies = passive_columns(sys.columns, &day_rows, &sys.target);
    let model = MarketModel::new(
        sys.columns as u64,
        realization.alpha.clone(),
        strategies,
        PriceRule::ProportionalIncrement,
        Population::BernoulliSubset,
    )?;
    let mut prices = vec![realization.initial_price.clone()];
    let mut provenance = Vec::with_capacity(sys.rows());
    for (i, &b) in sys.rhs.iter().enumerate() {
        let next = prices.last().unwrap().clone() + realization.alpha.clone() * T::from_int(b);
        prices.push(next);
        provenance.push(RowOrigin {
            day: i + 1,
            movement: Movement::from_sign(b),
            row: RowRef::Equality(i),
        });
    }
    Ok((model, PriceSeries::new(prices)?, provenance))
}

/// Re-hosts a PI market with `m0 = model.traders` traders in a market with
/// `m >= m0` traders whose conditional population law is unchanged.
///
/// Every strategy buys on the appended day `t` and replays its original
/// day-`t` action on day `t + 1`; a new hold strategy takes half the
/// probability mass. The appended day's price rises by `alpha * m0`, so
/// exactly `m - m0` traders must be holding.
pub fn embed_pi_fixed_m<T: Scalar>(
    model: &MarketModel<T>,
    history: &PriceSeries<T>,
    m: u64,
) -> Result<(MarketModel<T>, PriceSeries<T>), BridgeError> {
    if model.rule != PriceRule::ProportionalIncrement {
        return Err(BridgeError::WrongRule {
            expected: PriceRule::ProportionalIncrement,
        });
    }
    let Population::Multinomial { p } = &model.population else {
        return Err(BridgeError::NotMultinomial);
    };
    let m0 = model.traders;
    if m < m0 {
        return Err(BridgeError::TooFewTraders { m, m0 });
    }
    let prices = history.prices();
    let t = prices.len();
    let mut strategies = Vec::with_capacity(model.h() + 1);
    for s in &model.strategies {
        let mut table = (1..t)
            .map(|day| s.action(prices, day))
            .collect::<Result<Vec<_>, _>>()?;
        table.push(Action::Buy);
        table.push(s.action(prices, t)?);
        strategies.push(Strategy::Passive(table));
    }
    strategies.push(Strategy::Hold);

    let half = T::one() / T::from_int(2);
    let mut p2: Vec<T> = p.iter().map(|pi| pi.clone() * half.clone()).collect();
    p2.push(half);

    let embedded = MarketModel::new(
        m,
        model.alpha.clone(),
        strategies,
        PriceRule::ProportionalIncrement,
        Population::Multinomial { p: p2 },
    )?;
    let mut extended = history.clone();
    extended.push(history.last().clone() + model.alpha.clone() * T::from_int(m0 as i64));
    Ok((embedded, extended))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::Rational;

    fn passive(actions: &[i64]) -> Strategy {
        Strategy::Passive(
            actions
                .iter()
                .map(|&a| Action::try_from(a).unwrap())
                .collect(),
        )
    }

    fn series(prices: &[Rational]) -> PriceSeries<Rational> {
        PriceSeries::new(prices.to_vec()).unwrap()
    }

    fn int(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn two_passive(
        rule: PriceRule,
        alpha: Rational,
        a: &[i64],
        b: &[i64],
    ) -> MarketModel<Rational> {
        MarketModel::new(
            2,
            alpha,
            vec![passive(a), passive(b)],
            rule,
            Population::BernoulliSubset,
        )
        .unwrap()
    }

    #[test]
    fn fi_up_day_is_a_strict_row() {
        let m = two_passive(PriceRule::FixedIncrement, int(1), &[1], &[-1]);
        let (sys, prov) = fi_market_to_system(&m, &series(&[int(100), int(101)])).unwrap();
        assert_eq!(sys.strict, vec![vec![1, -1]]);
        assert!(sys.equalities.is_empty());
        assert_eq!(
            prov,
            vec![RowOrigin {
                day: 1,
                movement: Movement::Up,
                row: RowRef::Strict(0)
            }]
        );
    }

    #[test]
    fn fi_down_day_negates_the_row() {
        let m = two_passive(PriceRule::FixedIncrement, int(1), &[1], &[-1]);
        let (sys, _) = fi_market_to_system(&m, &series(&[int(100), int(99)])).unwrap();
        assert_eq!(sys.strict, vec![vec![-1, 1]]);
    }

    #[test]
    fn fi_flat_day_is_an_equation() {
        let m = two_passive(PriceRule::FixedIncrement, int(1), &[1], &[-1]);
        let (sys, _) = fi_market_to_system(&m, &series(&[int(100), int(100)])).unwrap();
        assert!(sys.strict.is_empty());
        assert_eq!(sys.equalities, vec![vec![1, -1]]);
        assert_eq!(sys.rhs, vec![0]);
    }

    #[test]
    fn fi_history_of_one_price() {
        let m = two_passive(PriceRule::FixedIncrement, int(1), &[1], &[-1]);
        let (sys, prov) = fi_market_to_system(&m, &series(&[int(100)])).unwrap();
        assert_eq!(sys.rows(), 0);
        assert!(prov.is_empty());
        assert_eq!(sys.target, vec![1, -1]);
    }

    #[test]
    fn fi_rejects_bad_step() {
        let m = two_passive(PriceRule::FixedIncrement, int(1), &[1], &[-1]);
        let err = fi_market_to_system(&m, &series(&[int(100), int(102)])).unwrap_err();
        assert!(matches!(err, BridgeError::FixedStep { day: 1, .. }));
    }

    #[test]
    fn system_to_fi_example() {
        let mut sys = LinearSystem::new(2);
        sys.strict.push(vec![1, -1]);
        let (model, hist, _) = system_to_fi_market(&sys, &Realization::default()).unwrap();
        assert_eq!(hist, series(&[int(100), int(101)]));
        assert_eq!(
            model.action_row(hist.prices(), 1).unwrap(),
            vec![Action::Buy, Action::Sell]
        );
    }

    #[test]
    fn empty_system_gives_a_single_price() {
        let sys = LinearSystem::new(2);
        let (model, hist, prov) = system_to_fi_market(&sys, &Realization::default()).unwrap();
        assert_eq!(hist, series(&[int(100)]));
        assert!(prov.is_empty());
        assert_eq!(model.h(), 2);
    }

    #[test]
    fn system_to_fi_rejects_bad_coefficients() {
        let mut sys = LinearSystem::new(2);
        sys.strict.push(vec![2, 0]);
        assert!(matches!(
            system_to_fi_market::<Rational>(&sys, &Realization::default()),
            Err(BridgeError::Coefficient { .. })
        ));
    }

    #[test]
    fn pi_extraction_normalizes_by_alpha() {
        let m = two_passive(
            PriceRule::ProportionalIncrement,
            rational(1, 2),
            &[1, 0],
            &[1, 1],
        );
        let (sys, _) = pi_market_to_system(&m, &series(&[int(100), int(101), int(101)])).unwrap();
        assert_eq!(sys.equalities, vec![vec![1, 1], vec![0, 1]]);
        assert_eq!(sys.rhs, vec![2, 0]);
    }

    #[test]
    fn pi_extraction_rejects_fractional_units() {
        let m = two_passive(PriceRule::ProportionalIncrement, rational(1, 3), &[1], &[1]);
        let err = pi_market_to_system(&m, &series(&[int(0), rational(1, 2)])).unwrap_err();
        assert!(matches!(err, BridgeError::NonIntegralChange { day: 1, .. }));
    }

    #[test]
    fn system_to_pi_example() {
        let mut sys = LinearSystem::new(2);
        sys.equalities.push(vec![1, 1]);
        sys.rhs.push(1);
        let r = Realization {
            alpha: int(1),
            initial_price: int(0),
        };
        let (model, hist, _) = system_to_pi_market(&sys, &r).unwrap();
        assert_eq!(hist, series(&[int(0), int(1)]));
        assert_eq!(
            model.action_row(hist.prices(), 1).unwrap(),
            vec![Action::Buy, Action::Buy]
        );
    }

    #[test]
    fn system_to_pi_dimension_mismatch() {
        let mut sys = LinearSystem::new(2);
        sys.equalities.push(vec![1, 1]);
        assert!(matches!(
            system_to_pi_market::<Rational>(&sys, &Realization::default()),
            Err(BridgeError::Dimension(_))
        ));
    }

    #[test]
    fn embedding_halves_probabilities() {
        let model = MarketModel::new(
            3,
            int(1),
            vec![passive(&[1, -1]), passive(&[-1, 1])],
            PriceRule::ProportionalIncrement,
            Population::Multinomial {
                p: vec![rational(1, 2), rational(1, 2)],
            },
        )
        .unwrap();
        let hist = series(&[int(10), int(11)]);
        let (emb, ext) = embed_pi_fixed_m(&model, &hist, 5).unwrap();
        assert_eq!(
            emb.population,
            Population::Multinomial {
                p: vec![rational(1, 4), rational(1, 4), rational(1, 2)]
            }
        );
        assert_eq!(ext, series(&[int(10), int(11), int(14)]));
        assert_eq!(
            emb.action_row(ext.prices(), 2).unwrap(),
            vec![Action::Buy, Action::Buy, Action::Hold]
        );
        assert_eq!(
            emb.action_row(ext.prices(), 3).unwrap(),
            vec![Action::Sell, Action::Buy, Action::Hold]
        );
        assert!(matches!(
            embed_pi_fixed_m(&model, &hist, 2),
            Err(BridgeError::TooFewTraders { .. })
        ));
    }
}
