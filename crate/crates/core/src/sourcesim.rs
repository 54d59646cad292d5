//! From physical source parameters to the effective two-quNit state and
//! coincidence probability tables.
//!
//! The source model: N coherently pumped down-conversion paths produce the
//! state Σᵢ αᵢ e^{−iφᵢ}|i,i'⟩; residual distinguishability between the paths
//! is modeled as pure dephasing of the path coherences with strength
//! p ∈ [0, 1] (p is exactly the interference visibility of the state). The
//! dephasing strength can be given directly or derived from a Gaussian
//! spectral-overlap model of the filter offsets and path-length mismatch.
//! Cross kets |i,j'⟩ (i ≠ j) carry no population: the pair always exits one
//! crystal and is split by wavelength, and accidental counts are injected
//! later at the counting stage, not as state population.

use crate::linalg::{CMat, C64};
use crate::multiport::{self, MultiportError};
use crate::statecore::{dephase, pair_index, DensityMatrix, QuNitPair, StateError};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Center wavelength of the photon pairs, nm (telecom C band).
pub const CENTER_WAVELENGTH_NM: f64 = 1550.0;

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("pump split must have dim {dim} entries, got {got}")]
    BadPumpSplit { dim: usize, got: usize },
    #[error("set_phases must have dim-1 = {expected} entries, got {got}")]
    BadPhaseCount { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("phase setting index {k} out of range for dimension {dim}")]
    BadPhaseIndex { k: usize, dim: usize },
    #[error("density matrix dimension {rho_dim} does not match analyzers of dimension {n}")]
    DimensionMismatch { rho_dim: usize, n: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Multiport(#[from] MultiportError),
}

/// Spectral filter/delay mismatch between the two arms of a path pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralModel {
    /// Intensity FWHM of each filter, GHz.
    #[serde(default = "default_bandwidth")]
    pub filter_bandwidth_ghz: f64,
    /// Center-wavelength offset between the arms' filters, nm.
    #[serde(default)]
    pub center_offset_nm: f64,
    /// Optical path-length mismatch, µm.
    #[serde(default)]
    pub delay_mismatch_um: f64,
    #[serde(default)]
    pub filter_shape: FilterShape,
}

fn default_bandwidth() -> f64 {
    100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    #[default]
    Gaussian,
}

impl SpectralModel {
    pub fn validate(&self) -> Result<(), SourceError> {
        if !self.filter_bandwidth_ghz.is_finite() || self.filter_bandwidth_ghz <= 0.0 {
            return Err(SourceError::BadParameter(format!(
                "filter_bandwidth_ghz must be positive, got {}",
                self.filter_bandwidth_ghz
            )));
        }
        if !self.center_offset_nm.is_finite() || !self.delay_mismatch_um.is_finite() {
            return Err(SourceError::BadParameter(
                "spectral offsets must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Either a direct dephasing strength or a spectral model it derives from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Distinguishability {
    Direct(f64),
    Spectral(SpectralModel),
}

impl Default for Distinguishability {
    fn default() -> Self {
        Distinguishability::Direct(0.956)
    }
}

impl Distinguishability {
    /// The dephasing strength p this setting produces.
    pub fn dephasing(&self) -> Result<f64, SourceError> {
        match self {
            Distinguishability::Direct(p) => {
                if !(0.0..=1.0).contains(p) || p.is_nan() {
                    Err(SourceError::BadParameter(format!(
                        "distinguishability p = {p} outside [0, 1]"
                    )))
                } else {
                    Ok(*p)
                }
            }
            Distinguishability::Spectral(model) => {
                model.validate()?;
                Ok(overlap_visibility(model))
            }
        }
    }
}

/// Complex amplitude in config files: either a plain real number or a
/// `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    ReIm([f64; 2]),
}

impl ComplexSpec {
    pub fn as_c64(&self) -> C64 {
        match self {
            ComplexSpec::Real(r) => C64::new(*r, 0.0),
            ComplexSpec::ReIm([re, im]) => C64::new(*re, *im),
        }
    }
}

/// Full description of the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    /// Number of correlated path pairs N.
    pub dim: usize,
    /// N×N-splitter amplitudes feeding the N crystals (normalized on use).
    pub pump_split: Vec<ComplexSpec>,
    /// Set phases φ₁ … φ_{N−1}; the first path carries phase 0.
    pub set_phases: Vec<f64>,
    /// Direct dephasing strength p or the spectral model that derives it.
    pub distinguishability: Distinguishability,
    /// Loss per arm after pair creation, dB.
    pub arm_loss_db: f64,
    /// Created pair rate, Hz.
    pub pair_rate_hz: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            pump_split: vec![ComplexSpec::Real(1.0); 2],
            set_phases: vec![0.0],
            distinguishability: Distinguishability::default(),
            arm_loss_db: 1.9,
            pair_rate_hz: 150.0,
        }
    }
}

impl SourceConfig {
    /// Balanced N-path source with direct dephasing p and zero set phases.
    pub fn balanced(dim: usize, p: f64) -> Self {
        Self {
            dim,
            pump_split: vec![ComplexSpec::Real(1.0); dim],
            set_phases: vec![0.0; dim.saturating_sub(1)],
            distinguishability: Distinguishability::Direct(p),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if self.dim < 2 {
            return Err(SourceError::BadParameter(format!(
                "dim must be >= 2, got {}",
                self.dim
            )));
        }
        if self.pump_split.len() != self.dim {
            return Err(SourceError::BadPumpSplit {
                dim: self.dim,
                got: self.pump_split.len(),
            });
        }
        if self.set_phases.len() != self.dim - 1 {
            return Err(SourceError::BadPhaseCount {
                expected: self.dim - 1,
                got: self.set_phases.len(),
            });
        }
        if self.arm_loss_db < 0.0 || !self.arm_loss_db.is_finite() {
            return Err(SourceError::BadParameter(format!(
                "arm_loss_db must be >= 0, got {}",
                self.arm_loss_db
            )));
        }
        if self.pair_rate_hz < 0.0 || !self.pair_rate_hz.is_finite() {
            return Err(SourceError::BadParameter(format!(
                "pair_rate_hz must be >= 0, got {}",
                self.pair_rate_hz
            )));
        }
        self.distinguishability.dephasing()?;
        Ok(())
    }

    /// Dephasing strength of this configuration.
    pub fn dephasing(&self) -> Result<f64, SourceError> {
        self.distinguishability.dephasing()
    }
}

/// Ideal (noise-free) state of the source: amplitude `pump_split[i]`, phase
/// e^{−i·set_phases[i−1]} on ket |i,i'⟩, renormalized.
pub fn ideal_state(config: &SourceConfig) -> Result<QuNitPair, SourceError> {
    config.validate()?;
    let amps: Vec<C64> = config
        .pump_split
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let phase = if i == 0 {
                0.0
            } else {
                config.set_phases[i - 1]
            };
            a.as_c64() * C64::from_polar(1.0, -phase)
        })
        .collect();
    Ok(QuNitPair::new(amps)?)
}

/// Modulus of the normalized spectral overlap
/// |∫ f_A*(ν) f_B(ν) e^{2πiν·δτ} dν| for unit-norm Gaussian amplitude
/// spectra with the configured intensity FWHM, center offset (converted from
/// nm at 1550 nm), and delay mismatch δτ = δL/c.
///
/// For Gaussian filters the integral closes to
/// exp(−δν²/(8σ²) − 2π²σ²δτ²) with σ = FWHM/(2√(2 ln 2)).
pub fn overlap_visibility(model: &SpectralModel) -> f64 {
    let sigma_hz = model.filter_bandwidth_ghz * 1e9 / (2.0 * (2.0 * (2.0_f64).ln()).sqrt());
    let lambda_m = CENTER_WAVELENGTH_NM * 1e-9;
    let delta_nu_hz = SPEED_OF_LIGHT * (model.center_offset_nm * 1e-9) / (lambda_m * lambda_m);
    let delta_tau_s = model.delay_mismatch_um * 1e-6 / SPEED_OF_LIGHT;
    match model.filter_shape {
        FilterShape::Gaussian => {
            let detuning_term = delta_nu_hz * delta_nu_hz / (8.0 * sigma_hz * sigma_hz);
            let delay_term =
                2.0 * std::f64::consts::PI.powi(2) * sigma_hz * sigma_hz * delta_tau_s * delta_tau_s;
            (-detuning_term - delay_term).exp()
        }
    }
}

/// Effective (noisy) density matrix: the ideal state dephased with the
/// configured strength.
pub fn effective_density(config: &SourceConfig) -> Result<DensityMatrix, SourceError> {
    let state = ideal_state(config)?;
    let p = config.dephasing()?;
    Ok(dephase(&state, p)?)
}

/// Two-sided measurement operator in the correlated-first pair basis:
/// maps |i,j'⟩ to Σ_{a,b} U_A[a,i]·U_B[b,j] |a,b'⟩.
pub fn two_sided_unitary(u_a: &CMat, u_b: &CMat) -> CMat {
    let n = u_a.nrows();
    let d = n * n;
    let mut m = CMat::zeros((d, d));
    for a in 0..n {
        for b in 0..n {
            let row = pair_index(n, a, b);
            for i in 0..n {
                for j in 0..n {
                    m[[row, pair_index(n, i, j)]] = u_a[[a, i]] * u_b[[b, j]];
                }
            }
        }
    }
    m
}

/// Coincidence probability table P(i,j) = ⟨i,j'|(U_A⊗U_B)ρ(U_A⊗U_B)†|i,j'⟩.
/// Entries are clamped of round-off into [0, 1]; the table sums to one.
pub fn coincidence_probs(
    rho: &DensityMatrix,
    u_a: &CMat,
    u_b: &CMat,
) -> Result<Array2<f64>, SourceError> {
    let n = u_a.nrows();
    if u_a.ncols() != n || u_b.nrows() != n || u_b.ncols() != n || rho.dim() != n * n {
        return Err(SourceError::DimensionMismatch {
            rho_dim: rho.dim(),
            n,
        });
    }
    let mut probs = Array2::<f64>::zeros((n, n));
    let entries = rho.entries();
    let d = n * n;
    // Rank-1 outcome projectors: P(i,j) = v†ρv with
    // v[idx(c,d)] = conj(U_A[i,c]·U_B[j,d]).
    let mut v = vec![C64::new(0.0, 0.0); d];
    for i in 0..n {
        for j in 0..n {
            for c in 0..n {
                for dd in 0..n {
                    v[pair_index(n, c, dd)] = (u_a[[i, c]] * u_b[[j, dd]]).conj();
                }
            }
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                for s in 0..d {
                    acc += v[r].conj() * entries[[r, s]] * v[s];
                }
            }
            probs[[i, j]] = acc.re.clamp(0.0, 1.0);
        }
    }
    Ok(probs)
}

/// EPR correlation table: balanced state with set phases φⱼ = 2πjk/N, Fourier
/// multiports on both sides. Exactly N entries equal 1/N (detector pairs with
/// a + b ≡ k mod N); all others vanish.
pub fn epr_correlation_table(n: usize, k: usize) -> Result<Array2<f64>, SourceError> {
    if n < 2 {
        return Err(SourceError::BadParameter(format!(
            "dimension must be >= 2, got {n}"
        )));
    }
    if k >= n {
        return Err(SourceError::BadPhaseIndex { k, dim: n });
    }
    let mut config = SourceConfig::balanced(n, 1.0);
    config.set_phases = (1..n).map(|j| TAU * (j * k) as f64 / n as f64).collect();
    let rho = effective_density(&config)?;
    let f = multiport::fourier_matrix(n)?;
    coincidence_probs(&rho, &f, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiport::{analyzer_unitary, AnalyzerSetting};
    use crate::statecore::{pure_density, tangle, fidelity};
    use crate::linalg::identity;
    use approx::assert_relative_eq;

    #[test]
    fn ideal_state_examples() {
        // Equal split, zero phase: balanced Bell-type state.
        let s = ideal_state(&SourceConfig::balanced(2, 1.0)).unwrap();
        assert_relative_eq!(s.amps()[0].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.amps()[1].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        // Equal four-way split: the balanced ququart state.
        let s = ideal_state(&SourceConfig::balanced(4, 1.0)).unwrap();
        for a in s.amps() {
            assert_relative_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_relative_eq!(a.im, 0.0, epsilon = 1e-15);
        }

        // Split (1, 0): product state, no entanglement.
        let mut cfg = SourceConfig::balanced(2, 1.0);
        cfg.pump_split = vec![ComplexSpec::Real(1.0), ComplexSpec::Real(0.0)];
        let s = ideal_state(&cfg).unwrap();
        assert_relative_eq!(s.amps()[0].norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(tangle(&pure_density(&s)).unwrap(), 0.0, epsilon = 1e-12);

        // Set phase enters as e^{−iφ}.
        let mut cfg = SourceConfig::balanced(2, 1.0);
        cfg.set_phases = vec![std::f64::consts::FRAC_PI_2];
        let s = ideal_state(&cfg).unwrap();
        assert_relative_eq!(s.amps()[1].im, -1.0 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn ideal_state_rejects_bad_configs() {
        let mut cfg = SourceConfig::balanced(2, 1.0);
        cfg.pump_split = vec![ComplexSpec::Real(0.0), ComplexSpec::Real(0.0)];
        assert!(ideal_state(&cfg).is_err());

        let mut cfg = SourceConfig::balanced(2, 1.0);
        cfg.set_phases = vec![0.0, 0.0];
        assert!(matches!(
            ideal_state(&cfg),
            Err(SourceError::BadPhaseCount { .. })
        ));
    }

    #[test]
    fn overlap_visibility_identical_modes() {
        let model = SpectralModel {
            filter_bandwidth_ghz: 100.0,
            center_offset_nm: 0.0,
            delay_mismatch_um: 0.0,
            filter_shape: FilterShape::Gaussian,
        };
        assert_eq!(overlap_visibility(&model), 1.0);
    }

    #[test]
    fn overlap_visibility_paper_tolerances_are_negligible() {
        let model = SpectralModel {
            filter_bandwidth_ghz: 100.0,
            center_offset_nm: 0.005,
            delay_mismatch_um: 20.0,
            filter_shape: FilterShape::Gaussian,
        };
        let v = overlap_visibility(&model);
        assert!(v > 0.999, "v = {v}");
        assert_relative_eq!(v, quadrature_overlap(&model), epsilon = 1e-9);
    }

    #[test]
    fn overlap_visibility_dies_at_large_delay() {
        // Coherence time of a 100 GHz filter is ~10 ps; 10× that kills the
        // overlap.
        let model = SpectralModel {
            filter_bandwidth_ghz: 100.0,
            center_offset_nm: 0.0,
            delay_mismatch_um: 100e-12 * SPEED_OF_LIGHT * 1e6,
            filter_shape: FilterShape::Gaussian,
        };
        let v = overlap_visibility(&model);
        assert!(v < 0.01, "v = {v}");
    }

    #[test]
    fn overlap_visibility_symmetric_in_offsets() {
        for (dl, dt) in [(0.003, 15.0), (0.008, 40.0)] {
            let base = SpectralModel {
                filter_bandwidth_ghz: 100.0,
                center_offset_nm: dl,
                delay_mismatch_um: dt,
                filter_shape: FilterShape::Gaussian,
            };
            let mut neg_l = base;
            neg_l.center_offset_nm = -dl;
            let mut neg_t = base;
            neg_t.delay_mismatch_um = -dt;
            assert_eq!(overlap_visibility(&base), overlap_visibility(&neg_l));
            assert_eq!(overlap_visibility(&base), overlap_visibility(&neg_t));
        }
    }

    /// Independent quadrature oracle for the overlap integral (Simpson rule,
    /// ≥ 10⁴ points over ±12σ).
    fn quadrature_overlap(model: &SpectralModel) -> f64 {
        let sigma = model.filter_bandwidth_ghz * 1e9 / (2.0 * (2.0 * (2.0_f64).ln()).sqrt());
        let lambda_m = CENTER_WAVELENGTH_NM * 1e-9;
        let delta_nu = SPEED_OF_LIGHT * (model.center_offset_nm * 1e-9) / (lambda_m * lambda_m);
        let delta_tau = model.delay_mismatch_um * 1e-6 / SPEED_OF_LIGHT;
        // Amplitude spectra centered at ±δν/2; normalization cancels in the
        // ratio against the zero-offset integral.
        let f = |nu: f64, center: f64| (-((nu - center).powi(2)) / (4.0 * sigma * sigma)).exp();
        let n = 40_001usize;
        let span = 12.0 * sigma + delta_nu.abs();
        let h = 2.0 * span / (n - 1) as f64;
        let mut acc = C64::new(0.0, 0.0);
        let mut norm = 0.0_f64;
        for i in 0..n {
            let nu = -span + h * i as f64;
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let val = f(nu, -delta_nu / 2.0) * f(nu, delta_nu / 2.0);
            acc += C64::from_polar(val * w, TAU * nu * delta_tau);
            norm += f(nu, 0.0).powi(2) * w;
        }
        acc.norm() / norm
    }

    #[test]
    fn effective_density_matches_statecore_oracles() {
        // p = 1: pure ideal state.
        let cfg = SourceConfig::balanced(2, 1.0);
        let rho = effective_density(&cfg).unwrap();
        assert_eq!(rho, pure_density(&ideal_state(&cfg).unwrap()));

        // p = 0.956: tangle p² and fidelity (1+p)/2 against the ideal state.
        let cfg = SourceConfig::balanced(2, 0.956);
        let rho = effective_density(&cfg).unwrap();
        let ideal = ideal_state(&cfg).unwrap();
        assert_relative_eq!(tangle(&rho).unwrap(), 0.913936, epsilon = 1e-12);
        let cfg2 = SourceConfig::balanced(2, 0.973);
        let rho2 = effective_density(&cfg2).unwrap();
        assert_relative_eq!(fidelity(&rho2, &ideal).unwrap(), 0.9865, epsilon = 1e-12);
    }

    #[test]
    fn coincidence_probs_balanced_analyzers() {
        // Balanced state (θ = 0), both analyzers balanced at φ = 0:
        // perfectly correlated halves.
        let rho = pure_density(&QuNitPair::balanced(2));
        let u = analyzer_unitary(&AnalyzerSetting::balanced(0.0));
        let p = coincidence_probs(&rho, &u, &u).unwrap();
        assert_relative_eq!(p[[0, 0]], 0.5, epsilon = 1e-12);
        assert_relative_eq!(p[[1, 1]], 0.5, epsilon = 1e-12);
        assert!(p[[0, 1]] < 1e-12);
        assert!(p[[1, 0]] < 1e-12);
    }

    #[test]
    fn coincidence_probs_computational_basis() {
        // Identity analyzers read out |αᵢ|² on the diagonal.
        let s = QuNitPair::new(vec![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
        ])
        .unwrap();
        let rho = pure_density(&s);
        let id = identity(2);
        let p = coincidence_probs(&rho, &id, &id).unwrap();
        assert_relative_eq!(p[[0, 0]], 0.36, epsilon = 1e-12);
        assert_relative_eq!(p[[1, 1]], 0.64, epsilon = 1e-12);
        assert!(p[[0, 1]] < 1e-15 && p[[1, 0]] < 1e-15);
    }

    #[test]
    fn coincidence_fringe_of_dephased_state() {
        // Dephased p, balanced analyzers, phase sum χ:
        // P(same outputs) = (1 + p·cos χ)/4 each.
        let p = 0.83;
        let rho = dephase(&QuNitPair::balanced(2), p).unwrap();
        for step in 0..24 {
            let chi = TAU * step as f64 / 24.0;
            let ua = analyzer_unitary(&AnalyzerSetting::balanced(chi));
            let ub = analyzer_unitary(&AnalyzerSetting::balanced(0.0));
            let probs = coincidence_probs(&rho, &ua, &ub).unwrap();
            let expect = (1.0 + p * chi.cos()) / 4.0;
            assert_relative_eq!(probs[[0, 0]], expect, epsilon = 1e-12);
            assert_relative_eq!(probs[[1, 1]], expect, epsilon = 1e-12);
            let total: f64 = probs.iter().sum();
            assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn dephasing_strength_equals_fringe_visibility() {
        // Sweep oracle: scan χ over a grid containing 0 and π; the coincidence
        // fringe visibility of the dephased state is exactly p.
        let p = 0.956;
        let rho = dephase(&QuNitPair::balanced(2), p).unwrap();
        let ub = analyzer_unitary(&AnalyzerSetting::balanced(0.0));
        let mut max = f64::MIN;
        let mut min = f64::MAX;
        for step in 0..360 {
            let chi = TAU * step as f64 / 360.0;
            let ua = analyzer_unitary(&AnalyzerSetting::balanced(chi));
            let probs = coincidence_probs(&rho, &ua, &ub).unwrap();
            max = max.max(probs[[0, 0]]);
            min = min.min(probs[[0, 0]]);
        }
        assert_relative_eq!((max - min) / (max + min), p, epsilon = 1e-12);
    }

    #[test]
    fn probs_invariant_under_global_analyzer_phase() {
        let rho = dephase(&QuNitPair::balanced(2), 0.9).unwrap();
        let ua = analyzer_unitary(&AnalyzerSetting::balanced(0.7));
        let ub = analyzer_unitary(&AnalyzerSetting::balanced(-0.3));
        let g = C64::from_polar(1.0, 1.234);
        let ua_g = ua.mapv(|z| z * g);
        let ub_g = ub.mapv(|z| z * g.conj() * C64::from_polar(1.0, 0.5));
        let p1 = coincidence_probs(&rho, &ua, &ub).unwrap();
        let p2 = coincidence_probs(&rho, &ua_g, &ub_g).unwrap();
        for (a, b) in p1.iter().zip(p2.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn epr_tables_are_perfectly_correlated() {
        for n in 2..=6 {
            for k in 0..n {
                let table = epr_correlation_table(n, k).unwrap();
                let mut big = 0usize;
                for a in 0..n {
                    for b in 0..n {
                        let v = table[[a, b]];
                        if (a + b) % n == k {
                            assert_relative_eq!(v, 1.0 / n as f64, epsilon = 1e-10);
                            big += 1;
                        } else {
                            assert!(v < 1e-12, "n={n} k={k} stray weight {v}");
                        }
                    }
                }
                assert_eq!(big, n);
            }
        }
    }

    #[test]
    fn epr_patterns_distinct_and_complementary() {
        // N = 2: the two patterns have disjoint supports.
        let t0 = epr_correlation_table(2, 0).unwrap();
        let t1 = epr_correlation_table(2, 1).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!(t0[[a, b]] * t1[[a, b]] < 1e-20);
            }
        }
        // N = 4: four pairwise distinct patterns.
        let tables: Vec<_> = (0..4)
            .map(|k| epr_correlation_table(4, k).unwrap())
            .collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let diff: f64 = tables[i]
                    .iter()
                    .zip(tables[j].iter())
                    .map(|(a, b)| (a - b).abs())
                    .sum();
                assert!(diff > 0.5, "patterns {i} and {j} coincide");
            }
        }
        assert!(epr_correlation_table(4, 4).is_err());
    }
}
