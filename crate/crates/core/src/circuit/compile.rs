use super::inequalities::{dummy_rows, push_gate_rows, CircuitTag, InequalitySystem, VarRole};
use super::netlist::NorCircuit;
use super::slack::{extend_solution, inequalities_to_equations, EquationVar};
use super::CircuitError;
use crate::bridge::{
    system_to_fi_market, system_to_pi_market, DayProvenance, LinearSystem, Realization,
};
use crate::market::PriceRule;
use crate::{Market, Prices};

/// A Bernoulli-subset market whose next-day up probability, given its
/// history, equals `Pr[out(x) = 1 | cond(x) = 1]` for uniform inputs `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledMarket {
    pub market: Market,
    pub history: Prices,
    /// Day whose movement is predicted: `history.len()`.
    pub target_day: usize,
    /// Role of each strategy column.
    pub variables: Vec<VarRole>,
    pub rule: PriceRule,
    pub provenance: DayProvenance,
}

/// Inequalities for `out` and, when present, `cond` over shared inputs and
/// shared dummies, plus the row forcing `cond`'s output gate to one.
///
/// Columns: inputs, `out` gates, `cond` gates, `d1`, `d2`. The target selects
/// `out`'s output gate.
pub fn combined_inequalities(
    out: &NorCircuit,
    cond: Option<&NorCircuit>,
) -> Result<InequalitySystem, CircuitError> {
    let n = out.inputs();
    if let Some(c) = cond {
        if c.inputs() != n {
            return Err(CircuitError::InputMismatch {
                output: n,
                condition: c.inputs(),
            });
        }
    }
    let m1 = out.gate_count();
    let m2 = cond.map_or(0, NorCircuit::gate_count);
    let columns = n + m1 + m2 + 2;
    let dummies = [n + m1 + m2, n + m1 + m2 + 1];

    let mut rows: Vec<Vec<i8>> = dummy_rows(columns, dummies).into();
    push_gate_rows(out, columns, |k| n + k, dummies, &mut rows);
    if let Some(c) = cond {
        push_gate_rows(c, columns, |k| n + m1 + k, dummies, &mut rows);
        let mut r = vec![0i8; columns];
        r[n + m1 + m2 - 1] = 1;
        rows.push(r);
    }
    let mut target = vec![0i8; columns];
    target[n + m1 - 1] = 1;

    let gate = |circuit, index| VarRole::Gate { circuit, index };
    let variables = (0..n)
        .map(VarRole::Input)
        .chain((0..m1).map(|k| gate(CircuitTag::Output, k)))
        .chain((0..m2).map(|k| gate(CircuitTag::Condition, k)))
        .chain([VarRole::Dummy(0), VarRole::Dummy(1)])
        .collect();
    Ok(InequalitySystem {
        rows,
        target,
        variables,
    })
}

/// The population a compiled market must have realized for input `bits`:
/// one trader per column set to one. `None` when `cond(bits)` is false, since
/// then no population is consistent with the history.
pub fn expected_population(
    out: &NorCircuit,
    cond: Option<&NorCircuit>,
    rule: PriceRule,
    bits: &[bool],
) -> Result<Option<Vec<bool>>, CircuitError> {
    if let Some(c) = cond {
        if !c.eval(bits)? {
            return Ok(None);
        }
    }
    let mut x: Vec<bool> = bits.to_vec();
    x.extend(out.gate_values(bits)?);
    if let Some(c) = cond {
        x.extend(c.gate_values(bits)?);
    }
    x.extend([true, true]);
    match rule {
        PriceRule::FixedIncrement => Ok(Some(x)),
        PriceRule::ProportionalIncrement => {
            let ineq = combined_inequalities(out, cond)?;
            Ok(extend_solution(&ineq.rows, &x)?)
        }
    }
}

/// Compiles `Pr[out = 1 | cond = 1]` into a market history.
///
/// FI: each inequality becomes an up day. PI: the inequalities are first
/// rewritten as equations with right-hand side one, each of which becomes an
/// up day of exactly `alpha`.
pub fn compile_market(
    out: &NorCircuit,
    cond: Option<&NorCircuit>,
    rule: PriceRule,
) -> Result<CompiledMarket, CircuitError> {
    let ineq = combined_inequalities(out, cond)?;
    let realization = Realization::default();
    let (sys, variables, built) = match rule {
        PriceRule::FixedIncrement => {
            let mut sys = LinearSystem::new(ineq.columns());
            sys.strict = ineq.rows.clone();
            sys.target = ineq.target.clone();
            let built = system_to_fi_market(&sys, &realization)?;
            (sys, ineq.variables.clone(), built)
        }
        PriceRule::ProportionalIncrement => {
            let eq = inequalities_to_equations(&ineq.rows, ineq.columns())?;
            let mut sys = LinearSystem::new(eq.columns());
            sys.rhs = vec![1; eq.rows.len()];
            sys.equalities = eq.rows;
            sys.target[..ineq.columns()].copy_from_slice(&ineq.target);
            let variables = eq
                .variables
                .iter()
                .map(|v| match *v {
                    EquationVar::Original(j) => ineq.variables[j],
                    EquationVar::Unit => VarRole::Unit,
                    EquationVar::Slack { row, index } => VarRole::Slack { row, index },
                    EquationVar::Order { row, index } => VarRole::Order { row, index },
                })
                .collect();
            let built = system_to_pi_market(&sys, &realization)?;
            (sys, variables, built)
        }
    };
    debug_assert_eq!(sys.columns, built.0.h());
    let (market, history, provenance) = built;
    Ok(CompiledMarket {
        target_day: history.len(),
        market,
        history,
        variables,
        rule,
        provenance,
    })
}
