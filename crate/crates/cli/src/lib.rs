//! The `marketlab` command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 infeasible history or
//! probability-zero conditioning, 3 verification failure.

pub mod formats;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use marketlab::bridge::{market_to_system, BridgeError};
use marketlab::circuit::{
    compile_market, parse_netlist, verify_compilation, NorCircuit, UniquenessAudit,
    VerificationFailure, VerificationReport, VerifyError,
};
use marketlab::dsmc::{simulate_dsmc, summary_stats};
use marketlab::market::PriceRule;
use marketlab::predict::{predict_exact, predict_limit, ConeOptions, PredictError};
use marketlab::{parse_rational, DsmcParams, Rational, Scalar};

use formats::{
    prices_to_csv, read_market, read_prices, read_text, write_market, write_text, SystemFile,
    VarMapFile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

const OUTPUT_NETLIST: &str = "output.net";
const CONDITION_NETLIST: &str = "condition.net";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::input(format!("{}: {err}", path.display()))
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "marketlab",
    version,
    about = "Agent-based market models and their prediction problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the deterministic-switching momentum/contrarian model.
    SimulateDsmc(SimulateArgs),
    /// Extract the linear system a market history imposes on the population.
    Extract(ExtractArgs),
    /// Predict the next day's movement given a market and its history.
    Predict(PredictArgs),
    /// Compile and verify NOR-circuit markets.
    #[command(subcommand)]
    Circuit(CircuitCommand),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of traders m.
    #[arg(long)]
    pub traders: usize,
    /// Memory size k.
    #[arg(long)]
    pub memory: usize,
    /// Maximum switching period L (at least 2).
    #[arg(long)]
    pub max_period: usize,
    /// Price unit, e.g. `0.25` or `1/4`.
    #[arg(long)]
    pub alpha: String,
    /// Trading days to simulate after the initial prices.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub days: u64,
    #[arg(long)]
    pub seed: u64,
    /// `day,price` CSV with the k + 1 initial prices (default: all 100).
    #[arg(long)]
    pub init_prices: Option<PathBuf>,
    /// Output `day,price` CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional SVG chart of the series.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    pub market: PathBuf,
    pub prices: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictMode {
    Exact,
    Limit,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub market: PathBuf,
    pub prices: PathBuf,
    #[arg(long, value_enum)]
    pub mode: PredictMode,
    /// Additive accuracy of the limit estimate.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Failure probability of the limit estimate.
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    /// Required for `--mode limit`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Fi,
    Pi,
}

impl From<RuleArg> for PriceRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Fi => PriceRule::FixedIncrement,
            RuleArg::Pi => PriceRule::ProportionalIncrement,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum CircuitCommand {
    /// Compile Pr[out = 1 | cond = 1] into market.json, prices.csv and varmap.json.
    Compile {
        netlist: PathBuf,
        #[arg(long)]
        cond: Option<PathBuf>,
        #[arg(long, value_enum)]
        rule: RuleArg,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check a compiled directory against its netlists.
    Verify { dir: PathBuf },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::SimulateDsmc(a) => cmd_simulate(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Circuit(CircuitCommand::Compile {
            netlist,
            cond,
            rule,
            out_dir,
        }) => cmd_compile(&netlist, cond.as_deref(), rule.into(), &out_dir),
        Command::Circuit(CircuitCommand::Verify { dir }) => cmd_verify(&dir),
    }
}

fn lossy_f64<T: Scalar>(x: &T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn cmd_simulate(a: SimulateArgs) -> Result<i32, CliError> {
    let alpha = parse_rational(&a.alpha).map_err(|e| CliError::input(format!("--alpha: {e}")))?;
    let initial_prices = match &a.init_prices {
        Some(path) => read_prices(path)?.into_prices(),
        None => vec![Rational::from_integer(100.into()); a.memory + 1],
    };
    let params = DsmcParams {
        traders: a.traders,
        max_period: a.max_period,
        memory: a.memory,
        alpha,
        days: a.days as usize,
        initial_prices,
        seed: a.seed,
    };
    let run = simulate_dsmc(&params).map_err(|e| CliError::input(e.to_string()))?;
    write_text(&a.out, &prices_to_csv(&run.series))?;
    let floats: Vec<f64> = run.series.prices().iter().map(lossy_f64).collect();
    if let Some(plot) = &a.plot {
        write_text(plot, &svg::price_chart(&floats))?;
    }
    let stats = summary_stats(&run.series).map_err(|e| CliError::input(e.to_string()))?;
    println!("rows {}", run.series.len());
    println!("final_price {}", run.series.last());
    println!("mean_change {:.6}", stats.mean_change);
    println!("change_std {:.6}", stats.change_std);
    println!("lag1_autocorrelation {:.6}", stats.lag1_autocorrelation);
    println!("max_drawup {:.6}", stats.max_drawup);
    println!("max_drawdown {:.6}", stats.max_drawdown);
    println!("longest_monotone_run {}", stats.longest_monotone_run);
    Ok(EXIT_OK)
}

fn bridge_error(e: BridgeError) -> CliError {
    match e {
        BridgeError::FixedStep { .. } | BridgeError::NonIntegralChange { .. } => {
            CliError::infeasible(format!("infeasible history: {e}"))
        }
        other => CliError::input(other.to_string()),
    }
}

fn cmd_extract(a: ExtractArgs) -> Result<i32, CliError> {
    let model = read_market(&a.market)?;
    let prices = read_prices(&a.prices)?;
    let (sys, provenance) = market_to_system(&model, &prices).map_err(bridge_error)?;
    write_text(&a.out, &SystemFile::new(&sys, &provenance).to_json())?;
    println!(
        "columns {} strict_rows {} equality_rows {}",
        sys.columns,
        sys.strict.len(),
        sys.equalities.len()
    );
    Ok(EXIT_OK)
}

fn predict_error(e: PredictError) -> CliError {
    match e {
        PredictError::Bridge(b) => bridge_error(b),
        PredictError::ProbabilityZero | PredictError::HistoryLimitInfeasible => {
            CliError::infeasible(e.to_string())
        }
        other => CliError::input(other.to_string()),
    }
}

fn cmd_predict(a: PredictArgs) -> Result<i32, CliError> {
    let model = read_market(&a.market)?;
    let prices = read_prices(&a.prices)?;
    match a.mode {
        PredictMode::Exact => {
            let p = predict_exact(&model, &prices).map_err(predict_error)?;
            println!("p_up {} p_down {} p_same {}", p.up, p.down, p.same);
        }
        PredictMode::Limit => {
            let seed = a
                .seed
                .ok_or_else(|| CliError::input("--seed is required with --mode limit"))?;
            if !(a.epsilon > 0.0 && a.epsilon < 1.0 && a.eta > 0.0 && a.eta < 1.0) {
                return Err(CliError::input("--epsilon and --eta must lie in (0, 1)"));
            }
            let opts = ConeOptions::new(a.epsilon, a.eta, seed);
            let p = predict_limit(&model, &prices, &opts).map_err(predict_error)?;
            println!("p_up {} half_width {}", p.p_up, p.half_width);
            if let Some(est) = &p.estimate {
                println!(
                    "cone_hits {} up_hits {} samples {}",
                    est.cone_hits, est.numerator_hits, est.samples
                );
            }
        }
    }
    Ok(EXIT_OK)
}

fn read_netlist(path: &Path) -> Result<(String, NorCircuit), CliError> {
    let text = read_text(path)?;
    let circuit =
        parse_netlist(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((text, circuit))
}

fn cmd_compile(
    netlist: &Path,
    cond: Option<&Path>,
    rule: PriceRule,
    out_dir: &Path,
) -> Result<i32, CliError> {
    let (out_text, out) = read_netlist(netlist)?;
    let cond = cond.map(read_netlist).transpose()?;
    let compiled = compile_market(&out, cond.as_ref().map(|c| &c.1), rule)
        .map_err(|e| CliError::input(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    write_market(&out_dir.join("market.json"), &compiled.market)?;
    write_text(
        &out_dir.join("prices.csv"),
        &prices_to_csv(&compiled.history),
    )?;
    write_text(&out_dir.join(OUTPUT_NETLIST), &out_text)?;
    if let Some((text, _)) = &cond {
        write_text(&out_dir.join(CONDITION_NETLIST), text)?;
    }
    let varmap = VarMapFile::new(
        rule,
        compiled.target_day,
        OUTPUT_NETLIST,
        cond.as_ref().map(|_| CONDITION_NETLIST),
        &compiled.variables,
    );
    write_text(&out_dir.join("varmap.json"), &varmap.to_json())?;
    println!(
        "strategies {} history_days {} target_day {}",
        compiled.market.h(),
        compiled.history.trading_days(),
        compiled.target_day
    );
    Ok(EXIT_OK)
}

fn check_line(name: &str, failures: &[&VerificationFailure], detail: &str) {
    if failures.is_empty() {
        println!("check {name}: pass ({detail})");
    } else {
        println!("check {name}: FAIL");
        for f in failures {
            println!("  {f}");
        }
    }
}

fn print_report(rep: &VerificationReport) {
    let (mut ext, mut uniq, mut prob) = (Vec::new(), Vec::new(), Vec::new());
    for f in &rep.failures {
        match f {
            VerificationFailure::Inconsistent { .. }
            | VerificationFailure::WrongMovement { .. } => ext.push(f),
            VerificationFailure::ExtensionCount { .. }
            | VerificationFailure::AuditIncomplete { .. } => uniq.push(f),
            VerificationFailure::Probability { .. } | VerificationFailure::Predictor(_) => {
                prob.push(f)
            }
        }
    }
    check_line(
        "extension",
        &ext,
        &format!("{} conditioned inputs replay the history", rep.conditioned),
    );
    let audit = match rep.audit {
        UniquenessAudit::Exhaustive { columns } => {
            format!("exhaustive over 2^{columns} populations")
        }
        UniquenessAudit::Search { columns } => format!("counted by search over {columns} columns"),
    };
    check_line("uniqueness", &uniq, &audit);
    check_line(
        "probability",
        &prob,
        &format!(
            "{} of {} conditioned inputs satisfy the output",
            rep.conditioned_up, rep.conditioned
        ),
    );
    match &rep.predicted {
        Some(p) => println!("p_up {}", p.up),
        None => println!("p_up unavailable (expected {})", rep.expected_p_up),
    }
}

fn cmd_verify(dir: &Path) -> Result<i32, CliError> {
    let varmap = VarMapFile::read(&dir.join("varmap.json"))?;
    let market = read_market(&dir.join("market.json"))?;
    let history = read_prices(&dir.join("prices.csv"))?;
    let (_, out) = read_netlist(&dir.join(&varmap.output_netlist))?;
    let cond = varmap
        .condition_netlist
        .as_ref()
        .map(|name| read_netlist(&dir.join(name)))
        .transpose()?;
    if PriceRule::from(varmap.rule) != market.rule || varmap.target_day != history.len() {
        println!("check layout: FAIL (varmap.json disagrees with market.json or prices.csv)");
        return Ok(EXIT_VERIFICATION);
    }
    match verify_compilation(&market, &history, &out, cond.as_ref().map(|c| &c.1)) {
        Ok(rep) => {
            print_report(&rep);
            Ok(if rep.passed() {
                EXIT_OK
            } else {
                EXIT_VERIFICATION
            })
        }
        Err(VerifyError::ProbabilityZero) => Err(CliError::infeasible(
            VerifyError::ProbabilityZero.to_string(),
        )),
        Err(e @ VerifyError::Layout { .. }) => {
            println!("check layout: FAIL ({e})");
            Ok(EXIT_VERIFICATION)
        }
        Err(e) => Err(CliError::input(e.to_string())),
    }
}
