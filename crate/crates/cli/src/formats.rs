//! On-disk formats. Every rational is written as an exact integer or `p/q`
//! string and read back from integer, decimal, `p/q` or exponent notation.

use std::fs;
use std::path::Path;

use marketlab::bridge::{LinearSystem, Movement, RowOrigin, RowRef};
use marketlab::circuit::VarRole;
use marketlab::market::{
    Action, MarketModel, Population, PriceRule, PriceSeries, Strategy, TrendKind,
};
use marketlab::{format_rational, parse_rational, Market, Prices, Rational};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleTag {
    FI,
    PI,
}

impl From<PriceRule> for RuleTag {
    fn from(rule: PriceRule) -> Self {
        match rule {
            PriceRule::FixedIncrement => RuleTag::FI,
            PriceRule::ProportionalIncrement => RuleTag::PI,
        }
    }
}

impl From<RuleTag> for PriceRule {
    fn from(tag: RuleTag) -> Self {
        match tag {
            RuleTag::FI => PriceRule::FixedIncrement,
            RuleTag::PI => PriceRule::ProportionalIncrement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PopulationSpec {
    BernoulliSubset,
    Multinomial { m: u64, p: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Momentum,
    Contrarian,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum StrategySpec {
    /// `actions[j]` in `{-1, 0, 1}` is the action on day `j + 1`.
    Passive {
        actions: Vec<i8>,
    },
    Momentum {
        k: usize,
    },
    Contrarian {
        k: usize,
    },
    Switching {
        initial: KindTag,
        period: usize,
        k: usize,
        start: usize,
    },
    Hold,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpecFile {
    pub alpha: String,
    pub rule: RuleTag,
    pub population: PopulationSpec,
    pub strategies: Vec<StrategySpec>,
}

fn kind_tag(kind: TrendKind) -> KindTag {
    match kind {
        TrendKind::Momentum => KindTag::Momentum,
        TrendKind::Contrarian => KindTag::Contrarian,
    }
}

fn rational_field(name: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::input(format!("{name}: {e}")))
}

impl MarketSpecFile {
    pub fn from_model(model: &Market) -> Self {
        let strategies = model
            .strategies
            .iter()
            .map(|s| match s {
                Strategy::Passive(actions) => StrategySpec::Passive {
                    actions: actions.iter().map(|a| a.value() as i8).collect(),
                },
                Strategy::Momentum { k } => StrategySpec::Momentum { k: *k },
                Strategy::Contrarian { k } => StrategySpec::Contrarian { k: *k },
                Strategy::Switching {
                    initial,
                    period,
                    k,
                    start,
                } => StrategySpec::Switching {
                    initial: kind_tag(*initial),
                    period: *period,
                    k: *k,
                    start: *start,
                },
                Strategy::Hold => StrategySpec::Hold,
            })
            .collect();
        let population = match &model.population {
            Population::BernoulliSubset => PopulationSpec::BernoulliSubset,
            Population::Multinomial { p } => PopulationSpec::Multinomial {
                m: model.traders,
                p: p.iter().map(format_rational).collect(),
            },
        };
        MarketSpecFile {
            alpha: format_rational(&model.alpha),
            rule: model.rule.into(),
            population,
            strategies,
        }
    }

    pub fn to_model(&self) -> Result<Market, CliError> {
        let alpha = rational_field("alpha", &self.alpha)?;
        let mut strategies = Vec::with_capacity(self.strategies.len());
        for (i, s) in self.strategies.iter().enumerate() {
            strategies.push(match s {
                StrategySpec::Passive { actions } => Strategy::Passive(
                    actions
                        .iter()
                        .map(|&a| {
                            Action::try_from(a as i64).map_err(|_| {
                                CliError::input(format!(
                                    "strategy {i}: action {a} is not -1, 0 or 1"
                                ))
                            })
                        })
                        .collect::<Result<_, _>>()?,
                ),
                StrategySpec::Momentum { k } => Strategy::Momentum { k: *k },
                StrategySpec::Contrarian { k } => Strategy::Contrarian { k: *k },
                StrategySpec::Switching {
                    initial,
                    period,
                    k,
                    start,
                } => Strategy::Switching {
                    initial: match initial {
                        KindTag::Momentum => TrendKind::Momentum,
                        KindTag::Contrarian => TrendKind::Contrarian,
                    },
                    period: *period,
                    k: *k,
                    start: *start,
                },
                StrategySpec::Hold => Strategy::Hold,
            });
        }
        let (traders, population) = match &self.population {
            PopulationSpec::BernoulliSubset => {
                (strategies.len() as u64, Population::BernoulliSubset)
            }
            PopulationSpec::Multinomial { m, p } => {
                let p = p
                    .iter()
                    .enumerate()
                    .map(|(i, s)| rational_field(&format!("p[{i}]"), s))
                    .collect::<Result<Vec<_>, _>>()?;
                (*m, Population::Multinomial { p })
            }
        };
        MarketModel::new(traders, alpha, strategies, self.rule.into(), population)
            .map_err(|e| CliError::input(format!("invalid market: {e}")))
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn from_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_market(path: &Path) -> Result<Market, CliError> {
    from_json::<MarketSpecFile>(path)?
        .to_model()
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
}

pub fn write_market(path: &Path, model: &Market) -> Result<(), CliError> {
    write_text(path, &to_json(&MarketSpecFile::from_model(model)))
}

#[derive(Debug, Serialize, Deserialize)]
struct PriceRow {
    day: usize,
    price: String,
}

pub fn prices_to_csv(prices: &Prices) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (day, p) in prices.prices().iter().enumerate() {
        w.serialize(PriceRow {
            day,
            price: format_rational(p),
        })
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
}

pub fn prices_from_csv(text: &str, origin: &str) -> Result<Prices, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| CliError::input(format!("{origin}: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["day", "price"] {
        return Err(CliError::input(format!(
            "{origin}: header must be `day,price`"
        )));
    }
    let mut prices = Vec::new();
    for (i, row) in r.deserialize::<PriceRow>().enumerate() {
        let row = row.map_err(|e| CliError::input(format!("{origin}: {e}")))?;
        if row.day != i {
            return Err(CliError::input(format!(
                "{origin}: days must be consecutive from 0; row {} has day {}",
                i + 1,
                row.day
            )));
        }
        prices.push(rational_field(&format!("{origin}: day {i}"), &row.price)?);
    }
    PriceSeries::new(prices).map_err(|_| CliError::input(format!("{origin}: no prices")))
}

pub fn read_prices(path: &Path) -> Result<Prices, CliError> {
    prices_from_csv(&read_text(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub day: usize,
    /// `up`, `down` or `flat`.
    pub movement: String,
    /// `A` or `B`.
    pub matrix: String,
    pub row: usize,
}

/// `A x > 0`, `B x = b`, target `c`, and the day each row came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub columns: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i8>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i8>>,
    #[serde(rename = "b")]
    pub rhs: Vec<i64>,
    pub c: Vec<i8>,
    pub provenance: Vec<ProvenanceEntry>,
}

impl SystemFile {
    pub fn new(sys: &LinearSystem, provenance: &[RowOrigin]) -> Self {
        SystemFile {
            columns: sys.columns,
            a: sys.strict.clone(),
            b: sys.equalities.clone(),
            rhs: sys.rhs.clone(),
            c: sys.target.clone(),
            provenance: provenance
                .iter()
                .map(|o| {
                    let (matrix, row) = match o.row {
                        RowRef::Strict(i) => ("A", i),
                        RowRef::Equality(i) => ("B", i),
                    };
                    ProvenanceEntry {
                        day: o.day,
                        movement: match o.movement {
                            Movement::Up => "up",
                            Movement::Down => "down",
                            Movement::Flat => "flat",
                        }
                        .into(),
                        matrix: matrix.into(),
                        row,
                    }
                })
                .collect(),
        }
    }

    pub fn to_system(&self) -> LinearSystem {
        LinearSystem {
            columns: self.columns,
            strict: self.a.clone(),
            equalities: self.b.clone(),
            rhs: self.rhs.clone(),
            target: self.c.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        from_json(path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarEntry {
    pub column: usize,
    pub name: String,
}

/// Column names of a compiled market and the netlists it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarMapFile {
    pub rule: RuleTag,
    pub target_day: usize,
    /// Relative to the directory holding this file.
    pub output_netlist: String,
    pub condition_netlist: Option<String>,
    pub variables: Vec<VarEntry>,
}

impl VarMapFile {
    pub fn new(
        rule: PriceRule,
        target_day: usize,
        output_netlist: &str,
        condition_netlist: Option<&str>,
        roles: &[VarRole],
    ) -> Self {
        VarMapFile {
            rule: rule.into(),
            target_day,
            output_netlist: output_netlist.into(),
            condition_netlist: condition_netlist.map(Into::into),
            variables: roles
                .iter()
                .enumerate()
                .map(|(column, r)| VarEntry {
                    column,
                    name: r.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        from_json(path)
    }
}
