//! `dprr`: design, verify and evaluate differentially private randomized
//! response mechanisms from the command line.
//!
//! Every command prints a JSON envelope on stdout; tabular commands also
//! accept `--format csv`. Exit codes: 0 success, 2 invalid input or violated
//! precondition, 3 I/O failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dprr_core::mechanism::{in_region_r_prime, on_boundary_r_double_prime};
use dprr_core::optimizer::optimal_warner_result;
use dprr_core::{
    build_report, contour_sweep, monte_carlo, optimal_relaxed, satisfies_dp, ContourSweep,
    DesignMatrix, DpSlacks, LevelCurve, PrivacyParams, Regime, SimulationConfig, SurveyOutcome,
    DEFAULT_TOLERANCE,
};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "dprr",
    version,
    about = "Differentially private randomized response toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error-minimising mechanism for a privacy budget and prior proportion.
    Optimal(OptimalArgs),
    /// Check a design matrix against an (ε, δ) budget.
    Verify(VerifyArgs),
    /// Estimate the proportion from an observed survey tally.
    Estimate(EstimateArgs),
    /// Monte Carlo check of the estimator for one mechanism.
    Simulate(SimulateArgs),
    /// Sample the threshold g(ε, δ) over a lattice.
    Contour(ContourArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Serialize)]
struct OptimalArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Prior guess of the population proportion, strictly inside (0, 1).
    #[arg(long)]
    pi: f64,
    /// Respondents in the survey.
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// Restrict the search to Warner's symmetric designs.
    #[arg(long)]
    warner: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    p00: f64,
    #[arg(long)]
    p11: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Slack below zero tolerated before a constraint counts as violated.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    p00: f64,
    #[arg(long)]
    p11: f64,
    #[arg(long)]
    n: u64,
    /// Number of respondents who answered 1.
    #[arg(long)]
    count_ones: u64,
    /// Proportion at which to evaluate the variance; defaults to the clamped estimate.
    #[arg(long)]
    reference_pi: Option<f64>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    p00: f64,
    #[arg(long)]
    p11: f64,
    /// True population proportion.
    #[arg(long)]
    pi: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct ContourArgs {
    #[arg(long, default_value_t = 0.01)]
    eps_min: f64,
    #[arg(long, default_value_t = 3.0)]
    eps_max: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    delta_max: f64,
    /// Lattice points per axis.
    #[arg(long, default_value_t = 200)]
    resolution: usize,
    /// Level of g to trace; repeat for several levels.
    #[arg(long = "level")]
    #[serde(rename = "level")]
    levels: Vec<f64>,
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Serialize)]
struct Envelope<'a, I: Serialize, R: Serialize> {
    command: &'a str,
    inputs: &'a I,
    result: R,
    schema_version: u32,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Input(_) => ExitCode::from(2),
            Failure::Io(_) => ExitCode::from(3),
        }
    }
}

impl From<dprr_core::Error> for Failure {
    fn from(e: dprr_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Optimal(a) => cmd_optimal(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Contour(a) => cmd_contour(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Io(msg)) = &f;
            eprintln!("error: {msg}");
            f.exit_code()
        }
    }
}

fn emit<I: Serialize, R: Serialize>(command: &str, inputs: &I, result: R) -> Outcome {
    let envelope = Envelope {
        command,
        inputs,
        result,
        schema_version: SCHEMA_VERSION,
    };
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &envelope).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MechanismOut {
    p00: f64,
    p11: f64,
}

impl From<&DesignMatrix> for MechanismOut {
    fn from(p: &DesignMatrix) -> Self {
        Self {
            p00: p.p00(),
            p11: p.p11(),
        }
    }
}

#[derive(Serialize)]
struct OptimalOut {
    regime: Regime,
    g_value: Option<f64>,
    mechanisms: Vec<MechanismOut>,
    pi: f64,
    n: u64,
    variance: f64,
    variance_per_respondent: f64,
}

fn cmd_optimal(a: &OptimalArgs) -> Outcome {
    if a.n == 0 {
        return Err(Failure::Input("n must be at least 1".into()));
    }
    let privacy = PrivacyParams::new(a.epsilon, a.delta)?;
    let r = if a.warner {
        optimal_warner_result(&privacy, a.pi)?
    } else {
        optimal_relaxed(&privacy, a.pi)?
    };
    let variance = r.variance_for_sample_size(a.n);
    match a.format {
        Format::Json => emit(
            "optimal",
            a,
            OptimalOut {
                regime: r.regime,
                g_value: r.g_value,
                mechanisms: r.mechanisms.iter().map(MechanismOut::from).collect(),
                pi: r.pi,
                n: a.n,
                variance,
                variance_per_respondent: r.variance_at_pi,
            },
        ),
        Format::Csv => {
            let mut w = csv_writer(io::stdout().lock());
            w.write_record(["p00", "p11", "variance"])?;
            for m in &r.mechanisms {
                w.write_record([
                    m.p00().to_string(),
                    m.p11().to_string(),
                    variance.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct VerifyOut {
    slacks: DpSlacks,
    violated: Vec<&'static str>,
    pass: bool,
    in_region_r_prime: bool,
    on_boundary_r_double_prime: bool,
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let p = DesignMatrix::new(a.p00, a.p11)?;
    let privacy = PrivacyParams::new(a.epsilon, a.delta)?;
    if !(a.tolerance >= 0.0 && a.tolerance.is_finite()) {
        return Err(Failure::Input(format!(
            "tolerance must be finite and non-negative, got {}",
            a.tolerance
        )));
    }
    let slacks = DpSlacks::of(p.p00(), p.p11(), &privacy);
    let violated = ["dp1", "dp2", "dp3", "dp4"]
        .into_iter()
        .zip(slacks.as_array())
        .filter(|&(_, s)| s < -a.tolerance)
        .map(|(name, _)| name)
        .collect();
    emit(
        "verify",
        a,
        VerifyOut {
            slacks,
            violated,
            pass: satisfies_dp(&p, &privacy, a.tolerance),
            in_region_r_prime: in_region_r_prime(&p, &privacy, a.tolerance),
            on_boundary_r_double_prime: on_boundary_r_double_prime(&p, &privacy, a.tolerance),
        },
    )
}

fn cmd_estimate(a: &EstimateArgs) -> Outcome {
    let p = DesignMatrix::new(a.p00, a.p11)?;
    let outcome = SurveyOutcome::new(a.n, a.count_ones)?;
    let report = build_report(&p, &outcome, a.reference_pi)?;
    emit("estimate", a, report)
}

fn cmd_simulate(a: &SimulateArgs) -> Outcome {
    let p = DesignMatrix::new(a.p00, a.p11)?;
    p.check_nondegenerate()?;
    let cfg = SimulationConfig::new(a.pi, a.n, a.trials, a.seed)?;
    emit("simulate", a, monte_carlo(&p, &cfg)?)
}

#[derive(Serialize)]
struct ContourRowOut {
    epsilon: f64,
    delta: f64,
    g: Option<f64>,
}

#[derive(Serialize)]
struct ContourFileOut<'a> {
    path: &'a PathBuf,
    rows: usize,
    singular_cells: usize,
    level_curves: &'a [LevelCurve],
}

#[derive(Serialize)]
struct ContourTableOut<'a> {
    rows: Vec<ContourRowOut>,
    level_curves: &'a [LevelCurve],
}

fn cmd_contour(a: &ContourArgs) -> Outcome {
    let sweep = contour_sweep(
        &a.levels,
        (a.eps_min, a.eps_max),
        (a.delta_min, a.delta_max),
        a.resolution,
    )?;
    if let Some(path) = &a.out {
        let file = File::create(path)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        write_contour_csv(&sweep, BufWriter::new(file))?;
        return emit(
            "contour",
            a,
            ContourFileOut {
                path,
                rows: sweep.rows.len(),
                singular_cells: sweep.rows.iter().filter(|r| r.g.is_none()).count(),
                level_curves: &sweep.level_curves,
            },
        );
    }
    match a.format {
        Format::Csv => write_contour_csv(&sweep, io::stdout().lock()),
        Format::Json => emit(
            "contour",
            a,
            ContourTableOut {
                rows: sweep
                    .rows
                    .iter()
                    .map(|r| ContourRowOut {
                        epsilon: r.epsilon,
                        delta: r.delta,
                        g: r.g,
                    })
                    .collect(),
                level_curves: &sweep.level_curves,
            },
        ),
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// `epsilon,delta,g`, ε-major; singular cells carry the literal `nan`.
/// Numbers use Rust's shortest round-trip formatting, independent of locale.
fn write_contour_csv<W: Write>(sweep: &ContourSweep, w: W) -> Outcome {
    let mut w = csv_writer(w);
    w.write_record(["epsilon", "delta", "g"])?;
    for r in &sweep.rows {
        let g = r.g.map_or_else(|| "nan".to_string(), |g| g.to_string());
        w.write_record([r.epsilon.to_string(), r.delta.to_string(), g])?;
    }
    w.flush()?;
    Ok(())
}
