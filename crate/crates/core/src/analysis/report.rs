//! The JSON analysis report shared by every experiment and by the
//! counts-file analyzer.

use serde::{Deserialize, Serialize};

/// Analysis results of one run. Fields not produced by the executed
/// experiment stay `null`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub experiment: String,
    pub seed: Option<u64>,
    /// Raw fringe visibility.
    #[serde(rename = "V")]
    pub v: Option<f64>,
    /// Accidental-corrected fringe visibility.
    #[serde(rename = "V_c")]
    pub v_c: Option<f64>,
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "sigma_S")]
    pub sigma_s: Option<f64>,
    /// Reconstructed density matrix in the `dim=<d>` text format.
    pub rho: Option<String>,
    #[serde(rename = "F")]
    pub fidelity: Option<f64>,
    #[serde(rename = "T")]
    pub tangle: Option<f64>,
    #[serde(rename = "F_err")]
    pub fidelity_err: Option<f64>,
    #[serde(rename = "T_err")]
    pub tangle_err: Option<f64>,
    pub loglikelihood: Option<f64>,
    pub flags: Vec<String>,
}

impl AnalysisReport {
    pub fn new(experiment: &str, seed: Option<u64>) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed,
            ..Self::default()
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
