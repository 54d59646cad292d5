//! CHSH correlation estimation from 2×2 coincidence count tables.

use super::AnalysisError;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::f64::consts::FRAC_PI_4;

/// The four logical analyzer-phase pairs of a CHSH run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChshPair {
    AB,
    ABp,
    ApB,
    ApBp,
}

impl ChshPair {
    pub const ALL: [ChshPair; 4] = [ChshPair::AB, ChshPair::ABp, ChshPair::ApB, ChshPair::ApBp];

    pub fn label(self) -> &'static str {
        match self {
            ChshPair::AB => "ab",
            ChshPair::ABp => "ab'",
            ChshPair::ApB => "a'b",
            ChshPair::ApBp => "a'b'",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.label() == s)
    }

    /// Default analyzer phases (φ_A, φ_B): a = 0, a' = π/2, b = π/4,
    /// b' = −π/4. With the sign pattern in [`chsh_s`] the ideal balanced
    /// state reaches +2√2.
    pub fn phases(self) -> (f64, f64) {
        match self {
            ChshPair::AB => (0.0, FRAC_PI_4),
            ChshPair::ABp => (0.0, -FRAC_PI_4),
            ChshPair::ApB => (FRAC_PI_2, FRAC_PI_4),
            ChshPair::ApBp => (FRAC_PI_2, -FRAC_PI_4),
        }
    }

    /// Sign of this pair's E-value in the CHSH sum.
    pub fn sign(self) -> f64 {
        match self {
            ChshPair::ApB => -1.0,
            _ => 1.0,
        }
    }
}

/// Counts for one logical setting pair (raw or accidental-corrected).
#[derive(Debug, Clone, PartialEq)]
pub struct ChshSetting {
    pub pair: ChshPair,
    pub phase_a: f64,
    pub phase_b: f64,
    pub counts: Array2<f64>,
}

/// A complete CHSH measurement: all four setting pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshRecord {
    settings: Vec<ChshSetting>,
}

impl ChshRecord {
    pub fn new(settings: Vec<ChshSetting>) -> Result<Self, AnalysisError> {
        if settings.len() != 4 {
            return Err(AnalysisError::BadChshRecord(format!(
                "need exactly 4 setting pairs, got {}",
                settings.len()
            )));
        }
        for pair in ChshPair::ALL {
            if !settings.iter().any(|s| s.pair == pair) {
                return Err(AnalysisError::BadChshRecord(format!(
                    "missing setting pair {}",
                    pair.label()
                )));
            }
        }
        for s in &settings {
            if s.counts.dim() != (2, 2) {
                return Err(AnalysisError::BadChshRecord(format!(
                    "setting {} must carry a 2×2 table",
                    s.pair.label()
                )));
            }
        }
        Ok(Self { settings })
    }

    pub fn settings(&self) -> &[ChshSetting] {
        &self.settings
    }

    pub fn setting(&self, pair: ChshPair) -> &ChshSetting {
        self.settings
            .iter()
            .find(|s| s.pair == pair)
            .expect("constructor guarantees all four pairs")
    }
}

/// Correlation E = (N₀₀ − N₀₁ − N₁₀ + N₁₁)/N_total with its Poisson-propagated
/// standard error. For accidental-corrected inputs the underlying raw count
/// variance is approximated by the corrected value clamped at zero.
pub fn correlation_e(counts: &Array2<f64>) -> Result<(f64, f64), AnalysisError> {
    if counts.dim() != (2, 2) {
        return Err(AnalysisError::BadChshRecord(
            "correlation needs a 2×2 table".into(),
        ));
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(AnalysisError::ZeroTotalCounts);
    }
    let signed: f64 = counts[[0, 0]] - counts[[0, 1]] - counts[[1, 0]] + counts[[1, 1]];
    let e = signed / total;
    let mut var = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let sign = if i == j { 1.0 } else { -1.0 };
            let deriv = (sign - e) / total;
            var += deriv * deriv * counts[[i, j]].max(0.0);
        }
    }
    Ok((e, var.sqrt()))
}

/// CHSH sum S = E(a,b) + E(a,b') − E(a',b) + E(a',b'), uncertainty by
/// quadrature.
pub fn chsh_s(record: &ChshRecord) -> Result<(f64, f64), AnalysisError> {
    let mut s = 0.0;
    let mut var = 0.0;
    for pair in ChshPair::ALL {
        let setting = record.setting(pair);
        let (e, sigma) = correlation_e(&setting.counts)?;
        s += pair.sign() * e;
        var += sigma * sigma;
    }
    Ok((s, var.sqrt()))
}
