//! `zerotemp` command-line runner.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use config::{Experiment, Potential, Report};
use zerotemp::suites::{run_suite, Suite};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "zerotemp", version, about = "Zero-temperature limits of Gibbs measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write one CSV per report plus summary.txt.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "zerotemp-out")]
        out: PathBuf,
    },
    /// Run an acceptance suite: closed-forms, theorem-a, theorem-b, appendix, maxplus-oracle.
    Verify { suite: String },
    /// Print the rate sweep of a configuration.
    Gamma { config: PathBuf },
    /// Print regime, pressure, measure and subaction sweeps of a Walters configuration.
    Walters { config: PathBuf },
    /// Print the two-state perturbation example for beta = 1, 2, ..., beta-max.
    Appendix {
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, allow_hyphen_values = true)]
        eta: String,
        #[arg(long)]
        beta_max: u32,
    },
}

enum Failure {
    Schema(String),
    Numerical(report::NumericalError),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("ZEROTEMP_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::Schema(format!("ZEROTEMP_THREADS must be a positive integer, got '{s}'"))),
    }
}

fn load(path: &Path) -> Result<Experiment, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Schema(format!("cannot read {}: {e}", path.display())))?;
    config::load(&bytes).map_err(Failure::Schema)
}

fn compute(exp: &Experiment) -> Result<report::Output, Failure> {
    report::compute(exp, threads()?).map_err(Failure::Numerical)
}

fn print(out: &report::Output) {
    for (name, body) in &out.files {
        println!("== {name}");
        print!("{body}");
    }
    print!("{}", out.summary);
}

fn run(config: &Path, out_dir: &Path) -> Result<(), Failure> {
    let exp = load(config)?;
    let out = compute(&exp)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (name, body) in &out.files {
        let path = out_dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    std::fs::write(out_dir.join("summary.txt"), &out.summary).context("writing summary.txt")?;
    print!("{}", out.summary);
    Ok(())
}

fn verify(suite: &str) -> Result<bool, Failure> {
    let suite: Suite = suite.parse().map_err(|e: zerotemp::Error| Failure::Schema(e.to_string()))?;
    let results = run_suite(suite);
    for r in &results {
        println!("{r}");
    }
    let pass = results.iter().all(|r| r.pass);
    println!("suite {suite}: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn gamma(config: &Path) -> Result<(), Failure> {
    let mut exp = load(config)?;
    if matches!(exp.potential, Potential::Appendix { .. }) {
        return Err(Failure::Schema("the appendix potential has no rate sweep; use 'appendix'".into()));
    }
    if let Potential::LocallyConstant(a) = &exp.potential {
        if !a.is_normalized() {
            a.clone()
                .require_normalized()
                .map_err(|e| Failure::Schema(e.to_string()))?;
        }
    }
    exp.reports = vec![Report::Gamma];
    print(&compute(&exp)?);
    Ok(())
}

fn walters(config: &Path) -> Result<(), Failure> {
    let mut exp = load(config)?;
    if !matches!(exp.potential, Potential::Walters(_)) {
        return Err(Failure::Schema("'walters' needs a potential of kind walters".into()));
    }
    exp.reports = vec![Report::Pressure, Report::Measure, Report::Subaction, Report::Regime];
    if exp.perturbation.is_some() {
        exp.reports.push(Report::Stability);
    }
    print(&compute(&exp)?);
    Ok(())
}

fn appendix(gamma: &str, eta: &str, beta_max: u32) -> Result<(), Failure> {
    if beta_max < 1 {
        return Err(Failure::Schema("--beta-max must be at least 1".into()));
    }
    let grid: Vec<String> = (1..=beta_max).map(|b| format!("\"{b}\"")).collect();
    let cfg = format!(
        r#"{{"potential": {{"kind": "appendix", "gamma": {}, "eta": {}}}, "beta_grid": [{}], "reports": ["appendix"]}}"#,
        serde_json::to_string(gamma).expect("string"),
        serde_json::to_string(eta).expect("string"),
        grid.join(", ")
    );
    let exp = config::load(cfg.as_bytes()).map_err(Failure::Schema)?;
    print(&compute(&exp)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, out } => run(config, out).map(|_| true),
        Command::Verify { suite } => verify(suite),
        Command::Gamma { config } => gamma(config).map(|_| true),
        Command::Walters { config } => walters(config).map(|_| true),
        Command::Appendix { gamma, eta, beta_max } => appendix(gamma, eta, *beta_max).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(Failure::Schema(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_SCHEMA)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
