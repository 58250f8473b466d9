use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use steinpc_core::io::{format_column, format_matrix, read_matrix};
use steinpc_core::validation::run_validation;
use steinpc_core::{
    generate, js_estimate, run_sweep, Error, ExperimentConfig, GroundTruthRecord, Layout,
    ScoreDist, SpikedModelSpec,
};

/// James-Stein corrected principal components for wide data.
#[derive(Debug, Parser)]
#[command(name = "steinpc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the corrected leading eigenvector of a data file.
    Estimate(EstimateArgs),
    /// Draw a data set from the spiked covariance model.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo sweep over p and check the limits.
    Sweep(SweepArgs),
    /// Run the built-in self-checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayoutArg {
    RowsAreObservations,
    RowsAreVariables,
}

impl From<LayoutArg> for Layout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::RowsAreObservations => Layout::RowsAreObservations,
            LayoutArg::RowsAreVariables => Layout::RowsAreVariables,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    Rademacher,
    Uniform,
}

impl From<DistArg> for ScoreDist {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Gaussian => ScoreDist::Gaussian,
            DistArg::Rademacher => ScoreDist::Rademacher,
            DistArg::Uniform => ScoreDist::Uniform,
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// CSV file of finite numbers, optionally with one header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "rows-are-observations")]
    layout: LayoutArg,
    /// Number of spikes removed from the noise estimate.
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long, value_enum, default_value = "csv")]
    output: OutputFormat,
    /// Also report the uncorrected eigenvector and the shrinkage inputs.
    #[arg(long)]
    raw: bool,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    dist: DistArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data as CSV, one observation per row.
    #[arg(long)]
    out_data: PathBuf,
    /// Ground truth as JSON.
    #[arg(long)]
    out_truth: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Experiment config as JSON; the built-in default when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for trials.csv and report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct ValidateArgs {
    /// Identity, oracle, duality and perturbation suites only (default).
    #[arg(long)]
    quick: bool,
    /// Also run the convergence sweeps.
    #[arg(long)]
    full: bool,
}

enum Failure {
    Usage(String),
    Numeric(String),
    Verdict(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Verdict(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Verdict(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Numeric(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    if !args.input.exists() {
        return Err(Failure::Usage(format!(
            "{}: no such file",
            args.input.display()
        )));
    }
    let y = read_matrix(&args.input, args.layout.into())?;
    let est = js_estimate(&y, args.q)?;
    eprintln!("p={} n={} q={} c={}", y.p(), y.n(), args.q, est.c);
    if args.raw {
        eprintln!(
            "top_eigenvalue={} nu_hat_sq={} c_raw={} clamped={}",
            est.top_eigenvalue, est.nu_hat_sq, est.c_raw, est.clamped
        );
    }
    let text = match (args.output, args.raw) {
        (OutputFormat::Csv, false) => format_column(None, &est.h_js),
        (OutputFormat::Csv, true) => {
            let mut text = String::from("h_js,h\n");
            for (a, b) in est.h_js.iter().zip(&est.h) {
                text.push_str(&format!("{a},{b}\n"));
            }
            text
        }
        (OutputFormat::Json, raw) => {
            let mut doc = json!({
                "p": y.p(),
                "n": y.n(),
                "q": args.q,
                "c": est.c,
                "h_js": est.h_js,
            });
            if raw {
                doc["h"] = json!(est.h);
                doc["top_eigenvalue"] = json!(est.top_eigenvalue);
                doc["nu_hat_sq"] = json!(est.nu_hat_sq);
                doc["c_raw"] = json!(est.c_raw);
                doc["clamped"] = json!(est.clamped);
            }
            let mut s = serde_json::to_string_pretty(&doc).expect("json value serializes");
            s.push('\n');
            s
        }
    };
    emit(args.out.as_deref(), &text)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let spec = SpikedModelSpec {
        p: args.p,
        n: args.n,
        mu: args.mu,
        sigma: args.sigma,
        delta: args.delta,
        score_dist: args.dist.into(),
        seed: args.seed,
    };
    let (y, truth) = generate(&spec)?;
    write_text(
        &args.out_data,
        &format_matrix(&y, Layout::RowsAreObservations),
    )?;
    let record = GroundTruthRecord::new(&spec, truth);
    let mut json = serde_json::to_string_pretty(&record).map_err(Error::from)?;
    json.push('\n');
    write_text(&args.out_truth, &json)?;
    eprintln!("p={} n={} chi_n={}", spec.p, spec.n, record.truth.chi_n);
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_json(&read_text(path)?)?,
        None => ExperimentConfig::default(),
    };
    config.output_path = Some(args.out.clone());
    let report = run_sweep(&config)?;
    for v in &report.verdicts {
        eprintln!(
            "{} {}: final {:.4} (tolerance {}), inversions {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.final_value,
            v.tolerance,
            v.inversions
        );
    }
    if !report.failures.is_empty() {
        eprintln!("{} trials failed; see report.json", report.failures.len());
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verdict("one or more verdicts failed".into()))
    }
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let report = run_validation(args.full && !args.quick);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(Error::from)?
    );
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verdict("validation failed".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::debug!("exiting with code {}", f.code());
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
