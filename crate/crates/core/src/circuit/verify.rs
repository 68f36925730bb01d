//! End-to-end check of a compiled market against its circuits.
//!
//! For every input assignment `r` (at most 20 inputs):
//! 1. if `cond(r)`, the expected population replays the history exactly and
//!    the target day moves up iff `out(r)`;
//! 2. the number of populations consistent with the history whose input
//!    columns equal `r` is one if `cond(r)` and zero otherwise.
//!
//! Finally the exact predictor must return `#(out and cond) / #cond`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::compile::expected_population;
use super::netlist::NorCircuit;
use super::CircuitError;
use crate::bridge::{market_to_system, LinearSystem};
use crate::market::{net_flow, simulate_as, PopulationCounts, PriceSeries};
use crate::predict::search::count_solutions_with;
use crate::predict::{predict_exact, Prediction};
use crate::{Market, Prices, Rational};

pub const MAX_VERIFY_INPUTS: usize = 20;
/// Up to this many columns uniqueness is audited by enumerating every 0-1 vector.
pub const EXHAUSTIVE_COLUMNS: usize = 20;
const SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniquenessAudit {
    /// Every `2^h` population was checked against the history.
    Exhaustive { columns: usize },
    /// Consistent populations were counted by search with the inputs pinned.
    Search { columns: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerificationFailure {
    /// The expected population diverges from the recorded history on `day`.
    Inconsistent {
        input: Vec<bool>,
        day: usize,
    },
    /// The target day moves the wrong way for the expected population.
    WrongMovement {
        input: Vec<bool>,
        expected_up: bool,
    },
    /// Number of consistent populations extending `input`.
    ExtensionCount {
        input: Vec<bool>,
        found: BigUint,
        expected: u8,
    },
    /// The counter ran out of budget for `input`.
    AuditIncomplete {
        input: Vec<bool>,
    },
    Probability {
        expected: Rational,
        predicted: Rational,
    },
    Predictor(String),
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl fmt::Display for VerificationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerificationFailure::Inconsistent { input, day } => write!(
                f,
                "input x={}: expected population diverges from the history on day {day}",
                bit_string(input)
            ),
            VerificationFailure::WrongMovement { input, expected_up } => write!(
                f,
                "input x={}: target day should {}move up",
                bit_string(input),
                if *expected_up { "" } else { "not " }
            ),
            VerificationFailure::ExtensionCount {
                input,
                found,
                expected,
            } => write!(
                f,
                "input x={}: {found} consistent populations, expected {expected}",
                bit_string(input)
            ),
            VerificationFailure::AuditIncomplete { input } => write!(
                f,
                "input x={}: uniqueness audit exceeded its search budget",
                bit_string(input)
            ),
            VerificationFailure::Probability {
                expected,
                predicted,
            } => write!(f, "predicted p_up {predicted}, circuits give {expected}"),
            VerificationFailure::Predictor(e) => write!(f, "exact predictor failed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub inputs: usize,
    pub columns: usize,
    /// `#{r : cond(r)}`.
    pub conditioned: u64,
    /// `#{r : cond(r) and out(r)}`.
    pub conditioned_up: u64,
    pub expected_p_up: Rational,
    pub predicted: Option<Prediction>,
    pub audit: UniquenessAudit,
    pub failures: Vec<VerificationFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("{0} inputs exceed the verification limit of {MAX_VERIFY_INPUTS}")]
    TooManyInputs(usize),
    #[error("market has {found} strategies but the circuits compile to {expected}")]
    Layout { found: usize, expected: usize },
    #[error("the condition circuit is unsatisfiable: Pr[up | history] is undefined")]
    ProbabilityZero,
}

fn input_bits(r: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| r >> i & 1 == 1).collect()
}

/// First day on which replaying `population` departs from `history`.
fn first_divergence(
    market: &Market,
    history: &Prices,
    population: &[bool],
) -> Result<Option<usize>, CircuitError> {
    let counts = PopulationCounts(population.iter().map(|&b| b as u64).collect());
    let initial = PriceSeries::single(history.prices()[0].clone());
    let replay = simulate_as(market, &counts, &initial, history.trading_days())
        .map_err(crate::bridge::BridgeError::from)?;
    Ok(replay
        .prices()
        .iter()
        .zip(history.prices())
        .position(|(a, b)| a != b))
}

fn target_flow(
    market: &Market,
    history: &Prices,
    population: &[bool],
) -> Result<i64, CircuitError> {
    let actions = market
        .action_row(history.prices(), history.len())
        .map_err(crate::bridge::BridgeError::from)?;
    let counts: Vec<u64> = population.iter().map(|&b| b as u64).collect();
    Ok(net_flow(&actions, &counts))
}

/// Consistent-population counts for every input assignment, indexed by `r`.
fn extension_counts(sys: &LinearSystem, n: usize) -> (UniquenessAudit, Vec<Option<BigUint>>) {
    let h = sys.columns;
    if h <= EXHAUSTIVE_COLUMNS {
        let mut counts = vec![0u64; 1 << n];
        let mut x = vec![0i64; h];
        for v in 0..1u64 << h {
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = (v >> j & 1) as i64;
            }
            if sys.is_satisfied_by(&x) {
                counts[(v & ((1 << n) - 1)) as usize] += 1;
            }
        }
        let counts = counts.into_iter().map(|c| Some(BigUint::from(c))).collect();
        return (UniquenessAudit::Exhaustive { columns: h }, counts);
    }
    let counts = (0..1u64 << n)
        .map(|r| {
            let pins: Vec<(usize, bool)> = input_bits(r, n).into_iter().enumerate().collect();
            count_solutions_with(sys, &pins, SEARCH_BUDGET)
                .ok()
                .map(|t| t.total())
        })
        .collect();
    (UniquenessAudit::Search { columns: h }, counts)
}

/// Checks that `market` with `history` encodes `Pr[out = 1 | cond = 1]`.
///
/// The layout (and the expected population of each input) is recomputed from
/// the circuits, so a market edited after compilation is caught.
pub fn verify_compilation(
    market: &Market,
    history: &Prices,
    out: &NorCircuit,
    cond: Option<&NorCircuit>,
) -> Result<VerificationReport, VerifyError> {
    let n = out.inputs();
    if n > MAX_VERIFY_INPUTS {
        return Err(VerifyError::TooManyInputs(n));
    }
    let mut width = None;
    let mut failures = Vec::new();
    let mut conditioned = 0u64;
    let mut conditioned_up = 0u64;
    for r in 0..1u64 << n {
        let bits = input_bits(r, n);
        let Some(pop) = expected_population(out, cond, market.rule, &bits)? else {
            continue;
        };
        if width.is_none() {
            width = Some(pop.len());
        }
        if pop.len() != market.h() {
            return Err(VerifyError::Layout {
                found: market.h(),
                expected: pop.len(),
            });
        }
        conditioned += 1;
        let up = out.eval(&bits).map_err(CircuitError::from)?;
        conditioned_up += up as u64;
        if let Some(day) = first_divergence(market, history, &pop)? {
            failures.push(VerificationFailure::Inconsistent { input: bits, day });
            continue;
        }
        if (target_flow(market, history, &pop)? > 0) != up {
            failures.push(VerificationFailure::WrongMovement {
                input: bits,
                expected_up: up,
            });
        }
    }
    if conditioned == 0 {
        return Err(VerifyError::ProbabilityZero);
    }
    let columns = width.unwrap_or(market.h());

    let (sys, _) = market_to_system(market, history).map_err(CircuitError::from)?;
    let (audit, counts) = extension_counts(&sys, n);
    for (r, found) in counts.into_iter().enumerate() {
        let bits = input_bits(r as u64, n);
        let expected: u8 = match cond {
            Some(c) => c.eval(&bits).map_err(CircuitError::from)? as u8,
            None => 1,
        };
        match found {
            None => failures.push(VerificationFailure::AuditIncomplete { input: bits }),
            Some(found) => {
                let ok = if expected == 1 {
                    found.is_one()
                } else {
                    found.is_zero()
                };
                if !ok {
                    failures.push(VerificationFailure::ExtensionCount {
                        input: bits,
                        found,
                        expected,
                    });
                }
            }
        }
    }

    let expected_p_up = Rational::new(conditioned_up.into(), conditioned.into());
    let predicted = match predict_exact(market, history) {
        Ok(p) => {
            if p.up != expected_p_up {
                failures.push(VerificationFailure::Probability {
                    expected: expected_p_up.clone(),
                    predicted: p.up.clone(),
                });
            }
            Some(p)
        }
        Err(e) => {
            failures.push(VerificationFailure::Predictor(e.to_string()));
            None
        }
    };

    Ok(VerificationReport {
        inputs: n,
        columns,
        conditioned,
        conditioned_up,
        expected_p_up,
        predicted,
        audit,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{compile_market, parse_netlist};
    use crate::market::PriceRule;
    use crate::predict::PredictError;
    use crate::scalar::rational;

    const OR: &str = "inputs 2\ng1 = NOR(x1, x2)\ng2 = NOR(g1, g1)\n";
    const X1: &str = "inputs 2\ng1 = NOR(x1, x1)\ng2 = NOR(g1, g1)\n";

    #[test]
    fn compiled_or_verifies_under_both_rules() {
        let or = parse_netlist(OR).unwrap();
        for rule in [PriceRule::FixedIncrement, PriceRule::ProportionalIncrement] {
            let cm = compile_market(&or, None, rule).unwrap();
            let rep = verify_compilation(&cm.market, &cm.history, &or, None).unwrap();
            assert!(rep.passed(), "{rule:?}: {:?}", rep.failures);
            assert_eq!(rep.expected_p_up, rational(3, 4));
            let expect_exhaustive = rule == PriceRule::FixedIncrement;
            assert_eq!(
                matches!(rep.audit, UniquenessAudit::Exhaustive { .. }),
                expect_exhaustive
            );
        }
    }

    #[test]
    fn conditioned_compilation_verifies() {
        let or = parse_netlist(OR).unwrap();
        let x1 = parse_netlist(X1).unwrap();
        let cm = compile_market(&x1, Some(&or), PriceRule::FixedIncrement).unwrap();
        let rep = verify_compilation(&cm.market, &cm.history, &x1, Some(&or)).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!((rep.conditioned, rep.conditioned_up), (3, 2));
    }

    #[test]
    fn tampered_history_is_caught_with_its_day() {
        let or = parse_netlist(OR).unwrap();
        let cm = compile_market(&or, None, PriceRule::FixedIncrement).unwrap();
        let mut prices = cm.history.prices().to_vec();
        // Make day 3 flat and shift the rest down so only that day changes.
        let alpha = cm.market.alpha.clone();
        for p in prices.iter_mut().skip(3) {
            *p -= alpha.clone();
        }
        let tampered = PriceSeries::new(prices).unwrap();
        let rep = verify_compilation(&cm.market, &tampered, &or, None).unwrap();
        assert!(!rep.passed());
        assert!(rep
            .failures
            .iter()
            .any(|f| matches!(f, VerificationFailure::Inconsistent { day: 3, .. })));
    }

    #[test]
    fn unsatisfiable_condition_is_an_error() {
        let or = parse_netlist(OR).unwrap();
        // g2 = NOR(not x1, x1) is constant false.
        let never = parse_netlist("inputs 2\ng1 = NOR(x1, x1)\ng2 = NOR(g1, x1)\n").unwrap();
        let cm = compile_market(&or, Some(&never), PriceRule::FixedIncrement).unwrap();
        assert_eq!(
            verify_compilation(&cm.market, &cm.history, &or, Some(&never)),
            Err(VerifyError::ProbabilityZero)
        );
        assert_eq!(
            predict_exact(&cm.market, &cm.history),
            Err(PredictError::ProbabilityZero)
        );
    }

    #[test]
    fn wrong_circuit_is_a_layout_error() {
        let or = parse_netlist(OR).unwrap();
        let nor = parse_netlist("inputs 2\ng1 = NOR(x1, x2)").unwrap();
        let cm = compile_market(&or, None, PriceRule::FixedIncrement).unwrap();
        assert!(matches!(
            verify_compilation(&cm.market, &cm.history, &nor, None),
            Err(VerifyError::Layout { .. })
        ));
    }
}
