//! Command-line front end: each subcommand runs one experiment kind from a
//! JSON config and writes manifest, CSV, and SVG artifacts to an output
//! directory.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use curl_lab_core::experiment::{run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "curl-lab", version, about = "Numerical laboratory for curl-descent learning dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sweep cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Base value for all derived seeds.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar-model phase portraits (gradient vs flipped readout).
    Toy(RunArgs),
    /// Phase diagram over (c, alpha_h) with analytic boundary overlay.
    PhaseHidden(RunArgs),
    /// Phase diagram over (c, alpha_r) with Monte-Carlo boundary overlay.
    PhaseReadout(RunArgs),
    /// Analytic spectrum edges vs sampled eigenvalue extremes.
    Spectrum(RunArgs),
    /// Critical compression ratio as a function of alpha_h.
    Boundary(RunArgs),
    /// Convergence-speed comparison with paired statistics.
    Speed(RunArgs),
    /// Jacobian-symmetry audit of the plasticity-rule corpus.
    Audit(RunArgs),
}

impl Command {
    fn expected_kind(&self) -> &'static str {
        match self {
            Command::Toy(_) => "toy",
            Command::PhaseHidden(_) => "phase-hidden",
            Command::PhaseReadout(_) => "phase-readout",
            Command::Spectrum(_) => "spectrum",
            Command::Boundary(_) => "boundary",
            Command::Speed(_) => "speed",
            Command::Audit(_) => "audit",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Toy(a)
            | Command::PhaseHidden(a)
            | Command::PhaseReadout(a)
            | Command::Spectrum(a)
            | Command::Boundary(a)
            | Command::Speed(a)
            | Command::Audit(a) => a,
        }
    }
}

fn config_kind(cfg: &ExperimentConfig) -> &'static str {
    match cfg {
        ExperimentConfig::Toy { .. } => "toy",
        ExperimentConfig::PhaseHidden { .. } => "phase-hidden",
        ExperimentConfig::PhaseReadout { .. } => "phase-readout",
        ExperimentConfig::Spectrum { .. } => "spectrum",
        ExperimentConfig::Boundary { .. } => "boundary",
        ExperimentConfig::Speed { .. } => "speed",
        ExperimentConfig::Audit { .. } => "audit",
    }
}

fn execute(cmd: &Command) -> Result<serde_json::Value, String> {
    let args = cmd.args();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
    let kind = config_kind(&cfg);
    if kind != cmd.expected_kind() {
        return Err(format!(
            "config kind '{kind}' does not match subcommand '{}'",
            cmd.expected_kind()
        ));
    }
    let out = run(&cfg, &args.out, args.jobs, args.seed_base).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "status": "ok",
        "manifest": out.manifest,
        "results": out.results_csv,
        "plots": out.plots,
        "summary": out.summary,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::SUCCESS
        }
        Err(msg) => {
            let record = serde_json::json!({
                "status": "error",
                "subcommand": cli.command.expected_kind(),
                "message": msg,
            });
            eprintln!("{}", serde_json::to_string(&record).unwrap());
            ExitCode::FAILURE
        }
    }
}
