//! Run configuration: one JSON file describing the source, the counting
//! system, and the experiment to execute. Flags only override fields, so a
//! config file is a complete, archivable record of a run.

use qunit_core::counting::RatesConfig;
use qunit_core::experiments::{
    ChshParams, EprParams, FringeParams, PhaselockParams, TomographyParams,
};
use qunit_core::sourcesim::SourceConfig;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Fringe,
    Chsh,
    Tomography,
    Epr,
    Phaselock,
    Full,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fringe => "fringe",
            ExperimentKind::Chsh => "chsh",
            ExperimentKind::Tomography => "tomography",
            ExperimentKind::Epr => "epr",
            ExperimentKind::Phaselock => "phaselock",
            ExperimentKind::Full => "full",
        }
    }
}

/// Top-level run configuration. `experiment` and `seed` are mandatory; every
/// section has working defaults matching the reference source (N = 2, equal
/// split, p = 0.956, 150 Hz coincidences, 1.47 Hz accidentals).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    /// Root seed; all per-stage streams derive from it. No wall-clock
    /// seeding anywhere.
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub fringe: FringeParams,
    #[serde(default)]
    pub chsh: ChshParams,
    #[serde(default)]
    pub tomography: TomographyParams,
    #[serde(default)]
    pub epr: EprParams,
    #[serde(default)]
    pub phaselock: PhaselockParams,
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.source
            .validate()
            .map_err(|e| format!("source: {e}"))?;
        self.rates.validate().map_err(|e| format!("rates: {e}"))?;
        self.phaselock
            .lock
            .validate()
            .map_err(|e| format!("phaselock.lock: {e}"))?;
        self.phaselock
            .drift
            .validate()
            .map_err(|e| format!("phaselock.drift: {e}"))?;
        if self.epr.dim < 2 {
            return Err(format!("epr.dim must be >= 2, got {}", self.epr.dim));
        }
        if self.fringe.n_points < 3 {
            return Err(format!(
                "fringe.n_points must be >= 3, got {}",
                self.fringe.n_points
            ));
        }
        Ok(())
    }
}
