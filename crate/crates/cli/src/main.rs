//! `qunit` — deterministic experiment runner for the path-entangled
//! photon-pair simulator.
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.

mod config;
mod runner;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::{ExperimentKind, RunConfig};
use runner::{AnalyzeMode, AnalyzeOptions, NumericalError};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qunit", version, about = "Path-entangled photon-pair source simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Corrected,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's root seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a counts CSV (the `setting,i,j,counts,acc_estimate,T` format)
    /// without running a simulation.
    Analyze {
        /// Counts CSV path.
        #[arg(long)]
        input: PathBuf,
        /// Accidental handling; defaults to the inline pipeline behavior
        /// (raw for CHSH, corrected for tomography).
        #[arg(long)]
        mode: Option<ModeArg>,
        /// Root seed for the Monte Carlo uncertainty stage.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comparison-state phase θ of (|1,1'⟩+e^{iθ}|2,2'⟩)/√2 for the
        /// tomography fidelity; defaults to θ = 0 (the balanced source state).
        #[arg(long)]
        target_phase: Option<f64>,
        /// Monte Carlo resamples for tomography uncertainties (0 disables).
        #[arg(long, default_value_t = 100)]
        mc_samples: usize,
        /// Write report.json here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a unitary matrix file into a beam-splitter mesh file.
    Reck {
        /// Matrix file (`dim=<d>` header, rows of re+imj literals).
        #[arg(long)]
        input: PathBuf,
        /// Mesh file destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print (or write) the N EPR correlation tables of the balanced
    /// N-dimensional source.
    Epr {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run only the phase-lock section of a config file.
    Phaselock {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|c| c.is::<NumericalError>()) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => run_command(config, seed, out, None),
        Command::Phaselock { config, seed, out } => {
            run_command(config, seed, out, Some(ExperimentKind::Phaselock))
        }
        Command::Analyze {
            input,
            mode,
            seed,
            target_phase,
            mc_samples,
            out,
        } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let options = AnalyzeOptions {
                mode: mode.map(|m| match m {
                    ModeArg::Raw => AnalyzeMode::Raw,
                    ModeArg::Corrected => AnalyzeMode::Corrected,
                }),
                seed,
                target_phase_rad: target_phase,
                mc_samples,
            };
            let report = runner::analyze(&text, &options)?;
            let json = report.to_json_string();
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)
                        .with_context(|| format!("cannot create {}", dir.display()))?;
                    fs::write(dir.join("report.json"), &json)?;
                }
                None => print!("{json}"),
            }
            Ok(())
        }
        Command::Reck { input, out } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let matrix = qunit_core::linalg::matrix_from_text(&text)
                .map_err(|e| anyhow::anyhow!("{e}"))
                .context("matrix file is not in the `dim=<d>` format")?;
            let mesh = qunit_core::multiport::reck_decompose(&matrix).map_err(|e| {
                anyhow::Error::new(NumericalError(anyhow::anyhow!("{e}")))
            })?;
            let rebuilt = qunit_core::multiport::mesh_to_unitary(&mesh);
            let err = qunit_core::linalg::max_abs_diff(&rebuilt, &matrix);
            eprintln!("mesh with {} cells, reconstruction error {err:.3e}", mesh.cells.len());
            let mesh_text = mesh.to_text();
            match out {
                Some(path) => fs::write(&path, mesh_text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{mesh_text}"),
            }
            Ok(())
        }
        Command::Epr { dim, out } => {
            if dim < 2 {
                anyhow::bail!("--dim must be >= 2, got {dim}");
            }
            let outcome = qunit_core::experiments::epr_experiment(
                &qunit_core::experiments::EprParams { dim },
            )
            .map_err(|e| anyhow::Error::new(NumericalError(anyhow::anyhow!("{e}"))))?;
            let json = runner::epr_json(&outcome);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)
                        .with_context(|| format!("cannot create {}", dir.display()))?;
                    fs::write(dir.join("epr.json"), &json)?;
                }
                None => print!("{json}"),
            }
            Ok(())
        }
    }
}

fn run_command(
    config_path: PathBuf,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
    experiment_override: Option<ExperimentKind>,
) -> Result<()> {
    let raw = fs::read_to_string(&config_path)
        .with_context(|| format!("cannot read {}", config_path.display()))?;
    let mut config = RunConfig::from_json_str(&raw)
        .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", config_path.display()))?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    if let Some(kind) = experiment_override {
        config.experiment = kind;
    }
    config
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", config_path.display()))?;
    let out_dir = out_override
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| anyhow::anyhow!("no output directory: set output_dir in the config or pass --out"))?;
    let sha = runner::sha256_hex(raw.as_bytes());
    runner::run(&config, &out_dir, &sha)
}
