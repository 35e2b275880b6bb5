use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bclab_core::criteria::{CriterionReport, Verdict};
use bclab_core::harness::{
    emit_report, evaluate_criterion, run_experiment, run_experiment_with, CriterionSpec,
    ExperimentConfig, ExperimentReport, Outcome, ReportFormat, RunContext,
};
use bclab_core::mixing::{
    circle_tilde_beta, dmr_beta_bounds, dmr_grid_kernel, kernel_tilde_beta_profile,
    CircleBetaOptions,
};
use bclab_core::Error;
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_PASS: u8 = 0;
const EXIT_RUNTIME: u8 = 1;
const EXIT_FAIL: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "bclab",
    version,
    about = "Borel-Cantelli experiments on stationary processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `out_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to BCLAB_THREADS or all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate criterion specs (one object or an array) and print the reports.
    Criteria {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Tabulate mixing coefficients.
    Mixing {
        #[arg(long, value_enum)]
        task: MixingTask,
        /// Step of the circle walk or exponent of the DMR regeneration law.
        #[arg(long, default_value_t = bclab_core::processes::GOLDEN)]
        a: f64,
        /// Comma-separated lags.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8, 16, 32, 64, 128])]
        lags: Vec<usize>,
        /// Fourier truncation for the circle walk.
        #[arg(long, default_value_t = 100_000)]
        k_max: usize,
        /// Grid points for the circle walk or the DMR kernel.
        #[arg(long, default_value_t = 2048)]
        grid: usize,
        /// JSON file with `matrix` and `marginal` for the kernel task.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Re-emit a persisted run in one format after verifying it.
    Report {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MixingTask {
    Circle,
    Kernel,
    Dmr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
    Md,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Jsonl => ReportFormat::Jsonl,
            Format::Md => ReportFormat::Md,
        }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Persist { .. } => EXIT_RUNTIME,
        Error::Io(_)
        | Error::Json(_)
        | Error::InvalidInput(_)
        | Error::CalibrationMissing
        | Error::Calibration(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn verdict_code(verdicts: impl IntoIterator<Item = Verdict>) -> u8 {
    match verdicts.into_iter().fold(Verdict::Satisfied, Verdict::and) {
        Verdict::Satisfied => EXIT_PASS,
        Verdict::Violated => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn report_code(report: &ExperimentReport) -> u8 {
    match &report.verdict {
        Some(v) => match v.outcome {
            Outcome::Pass => EXIT_PASS,
            Outcome::Fail => EXIT_FAIL,
            Outcome::Inconclusive => EXIT_INCONCLUSIVE,
        },
        None => verdict_code(report.criteria.iter().map(|c| c.verdict)),
    }
}

fn simulate(config: &Path, out: Option<PathBuf>, threads: Option<usize>) -> Result<u8, Error> {
    let mut cfg = ExperimentConfig::load(config)?;
    if out.is_some() {
        cfg.out_dir = out;
    }
    let report = match threads {
        Some(k) => run_experiment_with(&cfg, Some(k))?,
        None => run_experiment(&cfg)?,
    };
    if let Some(last) = report.checkpoints.last() {
        println!(
            "n = {}  E_n = {:.4}  mean ratio = {}  late hit fraction = {:.3}",
            last.n,
            last.e_n,
            last.mean_ratio.map_or("-".into(), |m| format!("{m:.4}")),
            last.hit_frac_late
        );
    }
    for c in &report.criteria {
        println!("{}: {:?}", c.criterion, c.verdict);
    }
    if let Some(v) = &report.verdict {
        println!("prediction {:?}: {:?}", v.prediction, v.outcome);
    }
    if let Some(dir) = &cfg.out_dir {
        println!("written to {}", dir.display());
    }
    Ok(report_code(&report))
}

fn criteria(spec: &Path) -> Result<u8, Error> {
    let value: serde_json::Value = serde_json::from_slice(&std::fs::read(spec)?)?;
    let specs: Vec<CriterionSpec> = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(serde_json::from_value)
            .collect::<Result<_, _>>()?,
        v => vec![serde_json::from_value(v)?],
    };
    let reports = specs
        .iter()
        .map(|s| evaluate_criterion(s, &RunContext::default()))
        .collect::<Result<Vec<CriterionReport>, _>>()?;
    println!("{}", serde_json::to_string_pretty(&reports)?);
    Ok(verdict_code(reports.iter().map(|r| r.verdict)))
}

#[derive(serde::Deserialize)]
struct KernelFile {
    matrix: Vec<Vec<f64>>,
    marginal: Vec<f64>,
}

fn mixing(
    task: MixingTask,
    a: f64,
    lags: &[usize],
    k_max: usize,
    grid: usize,
    matrix: Option<&Path>,
) -> Result<u8, Error> {
    match task {
        MixingTask::Circle => {
            let opts = CircleBetaOptions {
                k_max,
                grid,
                tolerance: None,
            };
            println!("n,value,tail_bound");
            for &n in lags {
                let b = circle_tilde_beta(n, a, &opts)?;
                println!("{},{},{}", b.n, b.value, b.tail_bound);
            }
        }
        MixingTask::Dmr => {
            let kernel = dmr_grid_kernel(a, grid)?;
            let values = kernel.tilde_beta_profile(lags)?;
            println!("n,value,lower,upper");
            for (&n, v) in lags.iter().zip(values) {
                let (lo, hi) = dmr_beta_bounds(a, n)?;
                println!("{n},{v},{lo},{hi}");
            }
        }
        MixingTask::Kernel => {
            let path =
                matrix.ok_or_else(|| Error::InvalidInput("--task kernel needs --matrix".into()))?;
            let k: KernelFile = serde_json::from_slice(&std::fs::read(path)?)?;
            let values = kernel_tilde_beta_profile(&k.matrix, &k.marginal, lags)?;
            println!("n,value");
            for (&n, v) in lags.iter().zip(values) {
                println!("{n},{v}");
            }
        }
    }
    Ok(EXIT_PASS)
}

fn report(run: &Path, format: Format) -> Result<u8, Error> {
    let r = ExperimentReport::load(run)?;
    let path = emit_report(&r, format.into(), run)?;
    println!("{}", path.display());
    Ok(EXIT_PASS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            threads,
        } => simulate(&config, out, threads),
        Command::Criteria { spec } => criteria(&spec),
        Command::Mixing {
            task,
            a,
            lags,
            k_max,
            grid,
            matrix,
        } => mixing(task, a, &lags, k_max, grid, matrix.as_deref()),
        Command::Report { run, format } => report(&run, format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
