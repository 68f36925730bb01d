//! Agent-based stock market models and the computational side of predicting them.
//!
//! * [`market`]: the arbitrary-strategy market, its strategies and price rules.
//! * [`dsmc`]: the deterministic-switching momentum/contrarian market.
//! * [`bridge`]: markets with price histories <-> linear constraint systems.
//! * [`predict`]: exact and many-traders-limit next-day predictors.
//! * [`circuit`]: NOR circuits compiled into markets whose prediction problem
//!   encodes the circuit, plus an exhaustive verifier.
//!
//! Market types are generic over [`Scalar`]; the aliases below fix the exact
//! rational instantiation used throughout the constructions and `f64` for
//! fast simulation.

pub mod bridge;
pub mod circuit;
pub mod dsmc;
pub mod market;
pub mod predict;
pub mod scalar;

pub use scalar::{format_rational, parse_rational, Scalar};

/// Arbitrary-precision exact rational.
pub type Rational = num_rational::BigRational;

pub type Prices = market::PriceSeries<Rational>;
pub type Market = market::MarketModel<Rational>;
pub type Population = market::Population<Rational>;
pub type DsmcParams = dsmc::DsmcParams<Rational>;

pub type PricesF64 = market::PriceSeries<f64>;
pub type MarketF64 = market::MarketModel<f64>;
pub type DsmcParamsF64 = dsmc::DsmcParams<f64>;
