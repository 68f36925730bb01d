//! Compiling conditional probabilities of NOR circuits into market histories.
//!
//! A circuit becomes 0-1 inequalities with a unique extension per input
//! assignment; the inequalities become an FI market directly, or equations
//! (and then a PI market) via unary slack variables.

mod compile;
mod inequalities;
mod netlist;
mod slack;
mod verify;

pub use compile::{combined_inequalities, compile_market, expected_population, CompiledMarket};
pub use inequalities::{
    circuit_extension, circuit_to_inequalities, CircuitTag, InequalitySystem, VarRole,
};
pub use netlist::{
    parse_netlist, InputLengthError, NetlistError, NetlistErrorKind, NorCircuit, Operand,
};
pub use slack::{
    extend_solution, inequalities_to_equations, EquationSystem, EquationVar, SlackError,
};
pub use verify::{
    verify_compilation, UniquenessAudit, VerificationFailure, VerificationReport, VerifyError,
    EXHAUSTIVE_COLUMNS, MAX_VERIFY_INPUTS,
};

use crate::bridge::BridgeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Input(#[from] InputLengthError),
    #[error("output circuit has {output} inputs but the condition has {condition}")]
    InputMismatch { output: usize, condition: usize },
    #[error(transparent)]
    Slack(#[from] SlackError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
}
