//! Experiment execution and artifact emission.

use crate::config::{ExperimentKind, RunConfig};
use anyhow::{anyhow, Context, Result};
use qunit_core::analysis::AnalysisReport;
use qunit_core::counting::{records_to_csv, CountRecord};
use qunit_core::experiments::{
    self, analyze_chsh, analyze_fringe, analyze_tomography, fringe_plot_csv, TomographyParams,
};
use qunit_core::statecore::QuNitPair;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Numerical/analysis failure (exit code 3), as opposed to configuration
/// errors (exit code 2).
#[derive(Debug)]
pub struct NumericalError(pub anyhow::Error);

impl std::fmt::Display for NumericalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for NumericalError {}

fn numerical<T>(r: std::result::Result<T, impl std::error::Error + Send + Sync + 'static>) -> Result<T> {
    r.map_err(|e| anyhow::Error::new(NumericalError(anyhow!("{e}"))))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    experiment: &'a str,
    seed: u64,
    config_sha256: &'a str,
    outputs: Vec<String>,
}

pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(mut self, experiment: &str, seed: u64, config_sha256: &str) -> Result<()> {
        self.files.sort();
        let manifest = Manifest {
            tool: "qunit",
            version: env!("CARGO_PKG_VERSION"),
            experiment,
            seed,
            config_sha256,
            outputs: self.files.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run the configured experiment end to end, writing count CSVs, the
/// analysis report, auxiliary artifacts, and the manifest.
pub fn run(config: &RunConfig, out_dir: &Path, config_sha256: &str) -> Result<()> {
    let mut out = OutputDir::new(out_dir)?;
    let seed = config.seed;
    match config.experiment {
        ExperimentKind::Fringe => {
            let o = numerical(experiments::fringe_experiment(
                &config.source,
                &config.rates,
                &config.fringe,
                seed,
            ))?;
            out.write("counts.csv", &records_to_csv(&o.records))?;
            out.write("fringe_fit.csv", &fringe_plot_csv(&o.analysis))?;
            let mut report = AnalysisReport::new("fringe", Some(seed));
            report.v = Some(o.analysis.v);
            report.v_c = Some(o.analysis.v_c);
            report.flags = o.analysis.flags.clone();
            out.write("report.json", &report.to_json_string())?;
        }
        ExperimentKind::Chsh => {
            let o = numerical(experiments::chsh_experiment(
                &config.source,
                &config.rates,
                &config.chsh,
                seed,
            ))?;
            out.write("counts.csv", &records_to_csv(&o.records))?;
            let mut report = AnalysisReport::new("chsh", Some(seed));
            report.s = Some(o.s);
            report.sigma_s = Some(o.sigma_s);
            out.write("report.json", &report.to_json_string())?;
        }
        ExperimentKind::Tomography => {
            let o = numerical(experiments::tomography_experiment(
                &config.source,
                &config.rates,
                &config.tomography,
                seed,
            ))?;
            out.write("counts.csv", &records_to_csv(&o.records))?;
            let mut report = AnalysisReport::new("tomography", Some(seed));
            report.rho = Some(o.result.rho.to_text());
            report.fidelity = Some(o.result.fidelity);
            report.tangle = Some(o.result.tangle);
            report.fidelity_err = o.result.fidelity_err;
            report.tangle_err = o.result.tangle_err;
            report.loglikelihood = Some(o.result.loglikelihood);
            out.write("report.json", &report.to_json_string())?;
        }
        ExperimentKind::Epr => {
            let o = numerical(experiments::epr_experiment(&config.epr))?;
            out.write("epr.json", &epr_json(&o))?;
            let mut report = AnalysisReport::new("epr", Some(seed));
            if o.perfect {
                report.flags.push("epr_perfect_correlations".into());
            } else {
                report.flags.push("epr_correlations_imperfect".into());
            }
            out.write("report.json", &report.to_json_string())?;
        }
        ExperimentKind::Phaselock => {
            let o = numerical(experiments::phaselock_experiment(&config.phaselock, seed))?;
            out.write("lock.csv", &o.series.to_csv())?;
            out.write("phaselock.json", &phaselock_json(&o))?;
        }
        ExperimentKind::Full => {
            let o = numerical(experiments::full_experiment(
                &config.source,
                &config.rates,
                &config.fringe,
                &config.chsh,
                &config.tomography,
                seed,
            ))?;
            let mut records: Vec<CountRecord> = Vec::new();
            records.extend(o.fringe.records.iter().cloned());
            records.extend(o.chsh.records.iter().cloned());
            records.extend(o.tomography.records.iter().cloned());
            out.write("counts.csv", &records_to_csv(&records))?;
            out.write("fringe_fit.csv", &fringe_plot_csv(&o.fringe.analysis))?;
            out.write("report.json", &o.report.to_json_string())?;
        }
    }
    out.finish(config.experiment.name(), seed, config_sha256)
}

pub fn epr_json(o: &experiments::EprOutcome) -> String {
    #[derive(Serialize)]
    struct EprJson {
        dim: usize,
        perfect: bool,
        tables: Vec<Vec<Vec<f64>>>,
    }
    let tables = o
        .tables
        .iter()
        .map(|t| {
            (0..o.dim)
                .map(|i| (0..o.dim).map(|j| t[[i, j]]).collect())
                .collect()
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&EprJson {
        dim: o.dim,
        perfect: o.perfect,
        tables,
    })
    .expect("serializes");
    s.push('\n');
    s
}

fn phaselock_json(o: &experiments::PhaselockOutcome) -> String {
    #[derive(Serialize)]
    struct LockJson {
        offset_estimate_rad: f64,
        rms_error_rad: f64,
        wrap_count: usize,
        samples: usize,
    }
    let mut s = serde_json::to_string_pretty(&LockJson {
        offset_estimate_rad: o.offset_estimate,
        rms_error_rad: o.rms_error,
        wrap_count: o.wrap_count,
        samples: o.series.samples.len(),
    })
    .expect("serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzeMode {
    Raw,
    Corrected,
}

pub struct AnalyzeOptions {
    pub mode: Option<AnalyzeMode>,
    pub seed: u64,
    pub target_phase_rad: Option<f64>,
    pub mc_samples: usize,
}

/// Analysis-only path: consume a counts CSV in the exchange format and emit
/// the same report the inline pipeline produces. Record kinds are detected
/// from the setting labels; a CSV holding several kinds (a `full` run)
/// produces the merged report.
pub fn analyze(csv_text: &str, options: &AnalyzeOptions) -> Result<AnalysisReport> {
    let records = qunit_core::counting::records_from_csv(csv_text)
        .map_err(|e| anyhow!("{e}"))
        .context("counts CSV does not match the `setting,i,j,counts,acc_estimate,T` schema")?;
    if records.is_empty() {
        anyhow::bail!("counts CSV contains no records");
    }
    let fringe: Vec<CountRecord> = records
        .iter()
        .filter(|r| r.setting_label.starts_with("fringe:"))
        .cloned()
        .collect();
    let chsh: Vec<CountRecord> = records
        .iter()
        .filter(|r| r.setting_label.starts_with("chsh"))
        .cloned()
        .collect();
    let tomo: Vec<CountRecord> = records
        .iter()
        .filter(|r| r.setting_label.starts_with("tomo:"))
        .cloned()
        .collect();
    let recognized = fringe.len() + chsh.len() + tomo.len();
    if recognized < records.len() {
        let stray = records
            .iter()
            .find(|r| {
                !r.setting_label.starts_with("fringe:")
                    && !r.setting_label.starts_with("chsh")
                    && !r.setting_label.starts_with("tomo:")
                    && !r.setting_label.starts_with("car:")
            })
            .map(|r| r.setting_label.clone());
        if let Some(label) = stray {
            anyhow::bail!(
                "unrecognized setting label `{label}`: expected fringe:, chsh or tomo: records"
            );
        }
    }
    let kinds = [!fringe.is_empty(), !chsh.is_empty(), !tomo.is_empty()];
    let experiment = match kinds {
        [true, false, false] => "fringe",
        [false, true, false] => "chsh",
        [false, false, true] => "tomography",
        [false, false, false] => anyhow::bail!("counts CSV contains no analyzable records"),
        _ => "full",
    };

    let mut report = AnalysisReport::new(experiment, Some(options.seed));
    if !fringe.is_empty() {
        let analysis = numerical(analyze_fringe(&fringe))?;
        report.v = Some(analysis.v);
        report.v_c = Some(analysis.v_c);
        report.flags.extend(analysis.flags);
    }
    if !chsh.is_empty() {
        let subtract = options.mode == Some(AnalyzeMode::Corrected);
        let (s, sigma_s) = numerical(analyze_chsh(&chsh, subtract))?;
        report.s = Some(s);
        report.sigma_s = Some(sigma_s);
        if subtract {
            report.flags.push("accidentals_subtracted".into());
        }
    }
    if !tomo.is_empty() {
        let subtract = options.mode != Some(AnalyzeMode::Raw);
        let params = TomographyParams {
            subtract,
            mc_samples: options.mc_samples,
            target_phase_rad: options.target_phase_rad,
            ..TomographyParams::default()
        };
        let target = match options.target_phase_rad {
            Some(theta) => QuNitPair::bell_target(theta),
            None => QuNitPair::balanced(2),
        };
        let result = numerical(analyze_tomography(&tomo, &params, &target, options.seed))?;
        report.rho = Some(result.rho.to_text());
        report.fidelity = Some(result.fidelity);
        report.tangle = Some(result.tangle);
        report.fidelity_err = result.fidelity_err;
        report.tangle_err = result.tangle_err;
        report.loglikelihood = Some(result.loglikelihood);
    }
    Ok(report)
}
