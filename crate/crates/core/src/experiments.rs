//! Deterministic end-to-end experiment runners.
//!
//! Each runner turns a source + rates configuration into labeled count
//! records (the CSV exchange format) and the corresponding analysis, deriving
//! every random stream from the root seed with a fixed per-stage label. The
//! analysis entry points consume plain count records, so externally produced
//! CSV files take the identical path as simulated data.
//!
//! Setting labels: `fringe:<phase>`, `chsh:<pair>`, `chsh16:<pair>:<ij>`,
//! `tomo:<AB>` with A, B ∈ {Z, X, Y}.

use crate::analysis::{
    chsh_s, fringe_extrema, mle_tomography, monte_carlo_uncertainty, visibility_floored,
    AnalysisError, AnalysisReport, Basis, BasisPairRecord, ChshPair, ChshRecord, ChshSetting,
    FringeExtrema, FringeScan, MleOptions, Objective, TomographyRecord, TomographyResult,
};
use crate::counting::{
    car, expected_rates, sample_counts, subtract_accidentals, CountRecord, CountingError,
    RatesConfig,
};
use crate::linalg::CMat;
use crate::multiport::{analyzer_unitary, AnalyzerSetting};
use crate::phaselock::{characterize, run_lock, DriftModel, LockConfig, LockError, LockSeries};
use crate::seeds::derive_seed_indexed;
use crate::sourcesim::{
    coincidence_probs, effective_density, epr_correlation_table, ideal_state, SourceConfig,
    SourceError,
};
use crate::statecore::QuNitPair;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Lock(#[from] LockError),
    #[error("unrecognized setting label `{0}`")]
    BadLabel(String),
    #[error("record set is not a {0} data set")]
    WrongRecordKind(&'static str),
}

// ---------------------------------------------------------------------------
// Fringe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FringeParams {
    pub n_points: usize,
    pub t_per_point_s: f64,
}

impl Default for FringeParams {
    fn default() -> Self {
        Self {
            n_points: 200,
            t_per_point_s: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FringeAnalysis {
    pub v: f64,
    pub v_c: f64,
    pub raw: FringeExtrema,
    pub corrected: FringeExtrema,
    pub scan_raw: FringeScan,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct FringeOutcome {
    pub records: Vec<CountRecord>,
    pub analysis: FringeAnalysis,
}

/// Scan the A-side analyzer phase over a uniform grid on [0, 2π) with the
/// B side fixed at φ_B = 0, sampling Poisson counts at every point.
pub fn fringe_experiment(
    source: &SourceConfig,
    rates: &RatesConfig,
    params: &FringeParams,
    seed: u64,
) -> Result<FringeOutcome, ExperimentError> {
    let rho = effective_density(source)?;
    let u_b = analyzer_unitary(&AnalyzerSetting::balanced(0.0));
    let mut records = Vec::with_capacity(params.n_points);
    for i in 0..params.n_points {
        let phi = TAU * i as f64 / params.n_points as f64;
        let u_a = analyzer_unitary(&AnalyzerSetting::balanced(phi));
        let probs = coincidence_probs(&rho, &u_a, &u_b)?;
        let er = expected_rates(&probs, rates)?;
        records.push(sample_counts(
            &er,
            &format!("fringe:{phi}"),
            params.t_per_point_s,
            derive_seed_indexed(seed, "fringe.point", i as u64),
        ));
    }
    let analysis = analyze_fringe(&records)?;
    Ok(FringeOutcome { records, analysis })
}

/// Fringe analysis of labeled count records: fit the raw and the
/// accidental-corrected scans, returning both visibilities.
pub fn analyze_fringe(records: &[CountRecord]) -> Result<FringeAnalysis, ExperimentError> {
    let mut phases = Vec::with_capacity(records.len());
    let mut raw = Vec::with_capacity(records.len());
    let mut corrected = Vec::with_capacity(records.len());
    let mut time = None;
    for rec in records {
        let phi: f64 = rec
            .setting_label
            .strip_prefix("fringe:")
            .and_then(|s| s.parse().ok())
            .ok_or(ExperimentError::WrongRecordKind("fringe"))?;
        phases.push(phi);
        raw.push(rec.outcome_counts[[0, 0]] as f64);
        corrected.push(subtract_accidentals(rec)[[0, 0]]);
        time = Some(rec.integration_time_s);
    }
    let t = time.ok_or(ExperimentError::WrongRecordKind("fringe"))?;
    let scan_raw = FringeScan::new(phases.clone(), raw, t)?;
    let scan_corr = FringeScan::new(phases, corrected, t)?;

    let mut flags = Vec::new();
    let ext_raw = fringe_extrema(&scan_raw)?;
    let ext_corr = fringe_extrema(&scan_corr)?;
    if ext_raw.fit.zero_visibility {
        flags.push("raw_zero_visibility".into());
    }
    if ext_corr.fit.zero_visibility {
        flags.push("corrected_zero_visibility".into());
    }
    let (v, raw_floored) = visibility_floored(ext_raw.cc_max, ext_raw.cc_min)?;
    if raw_floored {
        flags.push("raw_min_floored".into());
    }
    let (v_c, corr_floored) = visibility_floored(ext_corr.cc_max, ext_corr.cc_min)?;
    if corr_floored {
        flags.push("corrected_min_floored".into());
    }
    Ok(FringeAnalysis {
        v,
        v_c,
        raw: ext_raw,
        corrected: ext_corr,
        scan_raw,
        flags,
    })
}

/// Plot-ready fringe CSV: `phase,counts,fit` (raw counts, raw fit).
pub fn fringe_plot_csv(analysis: &FringeAnalysis) -> String {
    let mut out = String::from("phase,counts,fit\n");
    for (&phi, &y) in analysis
        .scan_raw
        .phases
        .iter()
        .zip(&analysis.scan_raw.cc_counts)
    {
        out.push_str(&format!("{},{},{}\n", phi, y, analysis.raw.fit.value_at(phi)));
    }
    out
}

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChshParams {
    pub t_per_setting_s: f64,
    /// Replicate the 16-setting protocol: each of the four phase pairs is
    /// measured four more times with the analyzer outputs cycled by π phase
    /// offsets, and only detector pair (0,0) of each setting is used.
    pub projector_cycling: bool,
}

impl Default for ChshParams {
    fn default() -> Self {
        Self {
            t_per_setting_s: 10.0,
            projector_cycling: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChshOutcome {
    pub records: Vec<CountRecord>,
    pub s: f64,
    pub sigma_s: f64,
    /// Infinite-statistics S of the configured source (no accidentals).
    pub expectation_s: f64,
}

pub fn chsh_experiment(
    source: &SourceConfig,
    rates: &RatesConfig,
    params: &ChshParams,
    seed: u64,
) -> Result<ChshOutcome, ExperimentError> {
    let rho = effective_density(source)?;
    let mut records = Vec::new();
    let mut stream = 0u64;
    for pair in ChshPair::ALL {
        let (pa, pb) = pair.phases();
        if params.projector_cycling {
            for (oi, oj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let u_a = analyzer_unitary(&AnalyzerSetting::balanced(pa + PI * oi as f64));
                let u_b = analyzer_unitary(&AnalyzerSetting::balanced(pb + PI * oj as f64));
                let probs = coincidence_probs(&rho, &u_a, &u_b)?;
                let er = expected_rates(&probs, rates)?;
                records.push(sample_counts(
                    &er,
                    &format!("chsh16:{}:{}{}", pair.label(), oi, oj),
                    params.t_per_setting_s,
                    derive_seed_indexed(seed, "chsh.setting", stream),
                ));
                stream += 1;
            }
        } else {
            let u_a = analyzer_unitary(&AnalyzerSetting::balanced(pa));
            let u_b = analyzer_unitary(&AnalyzerSetting::balanced(pb));
            let probs = coincidence_probs(&rho, &u_a, &u_b)?;
            let er = expected_rates(&probs, rates)?;
            records.push(sample_counts(
                &er,
                &format!("chsh:{}", pair.label()),
                params.t_per_setting_s,
                derive_seed_indexed(seed, "chsh.setting", stream),
            ));
            stream += 1;
        }
    }
    let (s, sigma_s) = analyze_chsh(&records, false)?;
    Ok(ChshOutcome {
        records,
        s,
        sigma_s,
        expectation_s: chsh_expectation_s(source)?,
    })
}

/// Assemble a [`ChshRecord`] from labeled count records (either protocol) and
/// evaluate S. With `subtract` set, accidental estimates are removed first.
pub fn analyze_chsh(
    records: &[CountRecord],
    subtract: bool,
) -> Result<(f64, f64), ExperimentError> {
    let record = assemble_chsh(records, subtract)?;
    Ok(chsh_s(&record)?)
}

pub fn assemble_chsh(
    records: &[CountRecord],
    subtract: bool,
) -> Result<ChshRecord, ExperimentError> {
    let counts_of = |rec: &CountRecord| {
        if subtract {
            subtract_accidentals(rec)
        } else {
            rec.outcome_counts.mapv(|c| c as f64)
        }
    };
    let mut settings = Vec::new();
    if records.iter().any(|r| r.setting_label.starts_with("chsh16:")) {
        for pair in ChshPair::ALL {
            let mut cells = Array2::<f64>::zeros((2, 2));
            for (oi, oj) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
                let label = format!("chsh16:{}:{}{}", pair.label(), oi, oj);
                let rec = records
                    .iter()
                    .find(|r| r.setting_label == label)
                    .ok_or_else(|| ExperimentError::BadLabel(label.clone()))?;
                cells[[oi, oj]] = counts_of(rec)[[0, 0]];
            }
            let (pa, pb) = pair.phases();
            settings.push(ChshSetting {
                pair,
                phase_a: pa,
                phase_b: pb,
                counts: cells,
            });
        }
    } else {
        for pair in ChshPair::ALL {
            let label = format!("chsh:{}", pair.label());
            let rec = records
                .iter()
                .find(|r| r.setting_label == label)
                .ok_or(ExperimentError::WrongRecordKind("chsh"))?;
            let (pa, pb) = pair.phases();
            settings.push(ChshSetting {
                pair,
                phase_a: pa,
                phase_b: pb,
                counts: counts_of(rec),
            });
        }
    }
    Ok(ChshRecord::new(settings)?)
}

/// Expectation-level S of the configured source: E values computed from the
/// true (accidental-free) probabilities.
pub fn chsh_expectation_s(source: &SourceConfig) -> Result<f64, ExperimentError> {
    let rho = effective_density(source)?;
    let mut settings = Vec::new();
    for pair in ChshPair::ALL {
        let (pa, pb) = pair.phases();
        let u_a = analyzer_unitary(&AnalyzerSetting::balanced(pa));
        let u_b = analyzer_unitary(&AnalyzerSetting::balanced(pb));
        let probs = coincidence_probs(&rho, &u_a, &u_b)?;
        settings.push(ChshSetting {
            pair,
            phase_a: pa,
            phase_b: pb,
            counts: probs,
        });
    }
    let record = ChshRecord::new(settings)?;
    Ok(chsh_s(&record)?.0)
}

// ---------------------------------------------------------------------------
// Tomography
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyParams {
    pub t_per_basis_s: f64,
    /// Subtract accidentals before fitting.
    pub subtract: bool,
    pub objective: Objective,
    /// Monte Carlo resamples for the uncertainty estimate (0 disables).
    pub mc_samples: usize,
    /// Override the comparison state phase θ of (|1,1'⟩ + e^{iθ}|2,2'⟩)/√2;
    /// by default the ideal state of the source configuration is used.
    pub target_phase_rad: Option<f64>,
}

impl Default for TomographyParams {
    fn default() -> Self {
        Self {
            t_per_basis_s: 10.0,
            subtract: true,
            objective: Objective::Gaussian,
            mc_samples: 100,
            target_phase_rad: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TomographyOutcome {
    pub records: Vec<CountRecord>,
    pub result: TomographyResult,
}

fn basis_label(a: Basis, b: Basis) -> String {
    format!("tomo:{}{}", a.label(), b.label())
}

fn tomography_target(source: &SourceConfig, params: &TomographyParams) -> Result<QuNitPair, ExperimentError> {
    Ok(match params.target_phase_rad {
        Some(theta) => QuNitPair::bell_target(theta),
        None => ideal_state(source)?,
    })
}

pub fn tomography_experiment(
    source: &SourceConfig,
    rates: &RatesConfig,
    params: &TomographyParams,
    seed: u64,
) -> Result<TomographyOutcome, ExperimentError> {
    let rho = effective_density(source)?;
    let mut records = Vec::with_capacity(9);
    let mut stream = 0u64;
    for a in Basis::ALL {
        for b in Basis::ALL {
            let probs = coincidence_probs(&rho, &a.unitary(), &b.unitary())?;
            let er = expected_rates(&probs, rates)?;
            records.push(sample_counts(
                &er,
                &basis_label(a, b),
                params.t_per_basis_s,
                derive_seed_indexed(seed, "tomo.basis", stream),
            ));
            stream += 1;
        }
    }
    let target = tomography_target(source, params)?;
    let result = analyze_tomography(&records, params, &target, seed)?;
    Ok(TomographyOutcome { records, result })
}

/// Build the [`TomographyRecord`] from labeled count records.
pub fn assemble_tomography(records: &[CountRecord]) -> Result<TomographyRecord, ExperimentError> {
    let mut bases = Vec::with_capacity(9);
    let mut time = None;
    for a in Basis::ALL {
        for b in Basis::ALL {
            let label = basis_label(a, b);
            let rec = records
                .iter()
                .find(|r| r.setting_label == label)
                .ok_or(ExperimentError::WrongRecordKind("tomography"))?;
            time = Some(rec.integration_time_s);
            bases.push(BasisPairRecord {
                basis_a: a,
                basis_b: b,
                counts: rec.outcome_counts.mapv(|c| c as f64),
                accidental: rec.accidental_estimate.clone(),
            });
        }
    }
    Ok(TomographyRecord::new(
        bases,
        time.expect("nine records found"),
    )?)
}

/// MLE + Monte Carlo analysis of tomography records.
pub fn analyze_tomography(
    records: &[CountRecord],
    params: &TomographyParams,
    target: &QuNitPair,
    seed: u64,
) -> Result<TomographyResult, ExperimentError> {
    let record = assemble_tomography(records)?;
    let options = MleOptions {
        subtract: params.subtract,
        objective: params.objective,
        ..MleOptions::default()
    };
    let mut result = mle_tomography(&record, &options, target)?;
    if params.mc_samples >= 2 {
        let (f_err, t_err) = monte_carlo_uncertainty(
            &record,
            &options,
            target,
            params.mc_samples,
            derive_seed_indexed(seed, "tomo.mc.root", 0),
        )?;
        result.fidelity_err = Some(f_err);
        result.tangle_err = Some(t_err);
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// EPR correlation tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EprParams {
    pub dim: usize,
}

impl Default for EprParams {
    fn default() -> Self {
        Self { dim: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct EprOutcome {
    pub dim: usize,
    /// One N×N coincidence table per input phase setting k.
    pub tables: Vec<Array2<f64>>,
    /// Every table has exactly N entries of 1/N and the rest below 1e-12.
    pub perfect: bool,
}

pub fn epr_experiment(params: &EprParams) -> Result<EprOutcome, ExperimentError> {
    let n = params.dim;
    let mut tables = Vec::with_capacity(n);
    let mut perfect = true;
    for k in 0..n {
        let table = epr_correlation_table(n, k)?;
        perfect &= table_is_perfect(&table, n);
        tables.push(table);
    }
    Ok(EprOutcome {
        dim: n,
        tables,
        perfect,
    })
}

pub fn table_is_perfect(table: &Array2<f64>, n: usize) -> bool {
    let mut big = 0usize;
    for &v in table.iter() {
        if (v - 1.0 / n as f64).abs() < 1e-10 {
            big += 1;
        } else if v >= 1e-12 {
            return false;
        }
    }
    big == n
}

// ---------------------------------------------------------------------------
// Phase lock
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaselockParams {
    pub lock: LockConfig,
    pub drift: DriftModel,
    pub duration_s: f64,
    pub setpoint_rad: f64,
    pub characterize_s: f64,
}

impl Default for PhaselockParams {
    fn default() -> Self {
        let lock = LockConfig::default();
        Self {
            lock,
            drift: DriftModel::default(),
            duration_s: 60.0,
            setpoint_rad: lock.actuator_range_rad / 2.0,
            characterize_s: 60.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhaselockOutcome {
    pub offset_estimate: f64,
    pub series: LockSeries,
    pub rms_error: f64,
    pub wrap_count: usize,
}

pub fn phaselock_experiment(
    params: &PhaselockParams,
    seed: u64,
) -> Result<PhaselockOutcome, ExperimentError> {
    let offset = characterize(
        &params.lock,
        params.characterize_s,
        derive_seed_indexed(seed, "phaselock.char", 0),
    )?;
    let series = run_lock(
        &params.lock,
        &params.drift,
        params.duration_s,
        params.setpoint_rad,
        derive_seed_indexed(seed, "phaselock.run", 0),
        offset,
    )?;
    let rms_error = series.rms_error(0.0);
    let wrap_count = series.wrap_count();
    Ok(PhaselockOutcome {
        offset_estimate: offset,
        series,
        rms_error,
        wrap_count,
    })
}

// ---------------------------------------------------------------------------
// Full chain
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FullOutcome {
    pub fringe: FringeOutcome,
    pub chsh: ChshOutcome,
    pub tomography: TomographyOutcome,
    pub car: f64,
    pub report: AnalysisReport,
}

/// The complete analysis chain on one configuration: fringe visibility, CHSH,
/// tomography, and the CAR of a computational-basis run, merged into a single
/// report.
pub fn full_experiment(
    source: &SourceConfig,
    rates: &RatesConfig,
    fringe_params: &FringeParams,
    chsh_params: &ChshParams,
    tomo_params: &TomographyParams,
    seed: u64,
) -> Result<FullOutcome, ExperimentError> {
    let fringe = fringe_experiment(source, rates, fringe_params, seed)?;
    let chsh = chsh_experiment(source, rates, chsh_params, seed)?;
    let tomography = tomography_experiment(source, rates, tomo_params, seed)?;

    // CAR from a computational-basis (direct) measurement at 100 s.
    let rho = effective_density(source)?;
    let id: CMat = crate::linalg::identity(source.dim);
    let probs = coincidence_probs(&rho, &id, &id)?;
    let er = expected_rates(&probs, rates)?;
    let car_record = sample_counts(
        &er,
        "car:computational",
        100.0,
        derive_seed_indexed(seed, "car", 0),
    );
    let car_value = car(&car_record)?;

    let mut report = AnalysisReport::new("full", Some(seed));
    report.v = Some(fringe.analysis.v);
    report.v_c = Some(fringe.analysis.v_c);
    report.s = Some(chsh.s);
    report.sigma_s = Some(chsh.sigma_s);
    report.rho = Some(tomography.result.rho.to_text());
    report.fidelity = Some(tomography.result.fidelity);
    report.tangle = Some(tomography.result.tangle);
    report.fidelity_err = tomography.result.fidelity_err;
    report.tangle_err = tomography.result.tangle_err;
    report.loglikelihood = Some(tomography.result.loglikelihood);
    report.flags = fringe.analysis.flags.clone();
    Ok(FullOutcome {
        fringe,
        chsh,
        tomography,
        car: car_value,
        report,
    })
}
