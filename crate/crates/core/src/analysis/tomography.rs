//! Maximum-likelihood two-qubit state tomography.
//!
//! The state is measured in the nine basis pairs {Z, X, Y}², four analyzer
//! outcomes each. The physical density matrix is parameterized as
//! ρ(t) = T†T / tr(T†T) with T lower triangular (16 real parameters), which
//! is positive semidefinite and unit trace for every parameter vector. The
//! fit minimizes the Gaussian approximation of the Poisson negative
//! log-likelihood, Σ (n_k − N_β·p_k(ρ))² / (2·max(n_k, 1)), by
//! Levenberg-Marquardt descent with an analytic Jacobian, starting from the
//! linear-inversion estimate projected onto the PSD cone. An exact-Poisson
//! objective (Fisher-scoring reweighting, deviance-based step acceptance) is
//! available as an option.

use super::AnalysisError;
use crate::linalg::{self, dagger, hermitian_eigen, lower_tri_factor, solve_spd_real, CMat, C64};
use crate::multiport::{analyzer_unitary, AnalyzerSetting};
use crate::seeds::derive_seed_indexed;
use crate::statecore::{fidelity, pair_index, tangle, DensityMatrix, QuNitPair};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Single-qubit measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    /// Analyzer unitary realizing the basis: Z is the direct (computational)
    /// measurement, X the balanced splitter at φ = 0, Y at φ = π/2.
    pub fn unitary(self) -> CMat {
        match self {
            Basis::Z => analyzer_unitary(&AnalyzerSetting::computational()),
            Basis::X => analyzer_unitary(&AnalyzerSetting::balanced(0.0)),
            Basis::Y => analyzer_unitary(&AnalyzerSetting::balanced(FRAC_PI_2)),
        }
    }

    pub fn label(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        match c {
            'Z' => Some(Basis::Z),
            'X' => Some(Basis::X),
            'Y' => Some(Basis::Y),
            _ => None,
        }
    }
}

/// Counts for one basis pair: 2×2 outcomes plus their accidental estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPairRecord {
    pub basis_a: Basis,
    pub basis_b: Basis,
    pub counts: Array2<f64>,
    pub accidental: Array2<f64>,
}

/// A complete tomography data set: all nine basis pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRecord {
    bases: Vec<BasisPairRecord>,
    pub integration_time_s: f64,
}

impl TomographyRecord {
    pub fn new(
        bases: Vec<BasisPairRecord>,
        integration_time_s: f64,
    ) -> Result<Self, AnalysisError> {
        if bases.len() != 9 {
            return Err(AnalysisError::BadTomographyRecord(format!(
                "need 9 basis pairs, got {}",
                bases.len()
            )));
        }
        for a in Basis::ALL {
            for b in Basis::ALL {
                if !bases.iter().any(|r| r.basis_a == a && r.basis_b == b) {
                    return Err(AnalysisError::BadTomographyRecord(format!(
                        "missing basis pair {}{}",
                        a.label(),
                        b.label()
                    )));
                }
            }
        }
        for r in &bases {
            if r.counts.dim() != (2, 2) || r.accidental.dim() != (2, 2) {
                return Err(AnalysisError::BadTomographyRecord(format!(
                    "basis pair {}{} must carry 2×2 tables",
                    r.basis_a.label(),
                    r.basis_b.label()
                )));
            }
            if r.counts.iter().any(|c| !c.is_finite()) {
                return Err(AnalysisError::BadTomographyRecord(format!(
                    "non-finite counts in basis pair {}{}",
                    r.basis_a.label(),
                    r.basis_b.label()
                )));
            }
        }
        if !integration_time_s.is_finite() || integration_time_s <= 0.0 {
            return Err(AnalysisError::BadTomographyRecord(format!(
                "integration time must be > 0, got {integration_time_s}"
            )));
        }
        Ok(Self {
            bases,
            integration_time_s,
        })
    }

    pub fn bases(&self) -> &[BasisPairRecord] {
        &self.bases
    }

    /// Expectation-level record: counts are exactly `n_per_basis` times the
    /// Born probabilities of `rho`, no accidentals.
    pub fn expectation_level(
        rho: &DensityMatrix,
        n_per_basis: f64,
    ) -> Result<Self, AnalysisError> {
        let mut bases = Vec::with_capacity(9);
        for a in Basis::ALL {
            for b in Basis::ALL {
                let probs = crate::sourcesim::coincidence_probs(rho, &a.unitary(), &b.unitary())?;
                bases.push(BasisPairRecord {
                    basis_a: a,
                    basis_b: b,
                    counts: probs.mapv(|p| p * n_per_basis),
                    accidental: Array2::zeros((2, 2)),
                });
            }
        }
        Self::new(bases, 1.0)
    }
}

/// Objective function of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Gaussian approximation Σ (n − N·p)²/(2·max(n, 1)).
    Gaussian,
    /// Exact Poisson likelihood via iteratively reweighted least squares.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Subtract the accidental estimates before fitting.
    pub subtract: bool,
    pub objective: Objective,
    pub max_iterations: usize,
    /// Convergence: parameter step below this ends the descent.
    pub step_tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            subtract: false,
            objective: Objective::Gaussian,
            max_iterations: 2000,
            step_tolerance: 1e-9,
        }
    }
}

/// Reconstruction output.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    pub fidelity: f64,
    pub tangle: f64,
    pub fidelity_err: Option<f64>,
    pub tangle_err: Option<f64>,
    /// Log-likelihood of the fitted model (up to an additive constant).
    pub loglikelihood: f64,
}

const DIM: usize = 4;
const NPARAMS: usize = 16;

/// The 36 rank-one outcome projectors |v_k⟩⟨v_k| and effective counts of a
/// record, flattened basis pair by basis pair.
struct FitData {
    vectors: Vec<[C64; DIM]>,
    counts: Vec<f64>,
    basis_totals: Vec<f64>,
    weights: Vec<f64>,
}

fn prepare(record: &TomographyRecord, subtract: bool) -> FitData {
    let mut vectors = Vec::with_capacity(36);
    let mut counts = Vec::with_capacity(36);
    let mut basis_totals = Vec::with_capacity(36);
    for rec in record.bases() {
        let ua = rec.basis_a.unitary();
        let ub = rec.basis_b.unitary();
        let mut total = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let n = if subtract {
                    rec.counts[[i, j]] - rec.accidental[[i, j]]
                } else {
                    rec.counts[[i, j]]
                };
                total += n;
                counts.push(n);
                let mut v = [C64::new(0.0, 0.0); DIM];
                for c in 0..2 {
                    for d in 0..2 {
                        v[pair_index(2, c, d)] = (ua[[i, c]] * ub[[j, d]]).conj();
                    }
                }
                vectors.push(v);
            }
        }
        let total = total.max(1e-9);
        for _ in 0..4 {
            basis_totals.push(total);
        }
    }
    let weights = counts.iter().map(|&n| 1.0 / (2.0 * n.max(1.0))).collect();
    FitData {
        vectors,
        counts,
        basis_totals,
        weights,
    }
}

/// Index map of the 16 parameters onto T entries: 4 real diagonals first,
/// then (re, im) pairs for each lower-triangle entry in row-major order.
fn t_from_params(t: &mut CMat, params: &[f64; NPARAMS]) {
    t.fill(C64::new(0.0, 0.0));
    for i in 0..DIM {
        t[[i, i]] = C64::new(params[i], 0.0);
    }
    let mut k = DIM;
    for i in 1..DIM {
        for j in 0..i {
            t[[i, j]] = C64::new(params[k], params[k + 1]);
            k += 2;
        }
    }
}

fn params_from_t(t: &CMat) -> [f64; NPARAMS] {
    let mut params = [0.0; NPARAMS];
    for i in 0..DIM {
        params[i] = t[[i, i]].re;
    }
    let mut k = DIM;
    for i in 1..DIM {
        for j in 0..i {
            params[k] = t[[i, j]].re;
            params[k + 1] = t[[i, j]].im;
            k += 2;
        }
    }
    params
}

/// Unit direction of parameter k as a matrix increment on T.
fn param_direction(k: usize) -> (usize, usize, C64) {
    if k < DIM {
        (k, k, C64::new(1.0, 0.0))
    } else {
        let mut idx = DIM;
        for i in 1..DIM {
            for j in 0..i {
                if idx == k {
                    return (i, j, C64::new(1.0, 0.0));
                }
                if idx + 1 == k {
                    return (i, j, C64::new(0.0, 1.0));
                }
                idx += 2;
            }
        }
        unreachable!("parameter index out of range")
    }
}

fn rho_from_params(params: &[f64; NPARAMS]) -> (CMat, CMat, f64) {
    let mut t = CMat::zeros((DIM, DIM));
    t_from_params(&mut t, params);
    let s = dagger(&t).dot(&t);
    let tr = linalg::trace(&s).re.max(f64::MIN_POSITIVE);
    let rho = s.mapv(|z| z / tr);
    (t, rho, tr)
}

fn born_probs(rho: &CMat, data: &FitData) -> Vec<f64> {
    data.vectors
        .iter()
        .map(|v| {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..DIM {
                for s in 0..DIM {
                    acc += v[r].conj() * rho[[r, s]] * v[s];
                }
            }
            acc.re.max(0.0)
        })
        .collect()
}

fn objective_value(probs: &[f64], data: &FitData, objective: Objective) -> f64 {
    match objective {
        Objective::Gaussian => probs
            .iter()
            .zip(&data.counts)
            .zip(&data.basis_totals)
            .zip(&data.weights)
            .map(|(((p, n), nb), w)| {
                let r = n - nb * p;
                r * r * w
            })
            .sum(),
        Objective::Poisson => {
            // Poisson deviance up to a model-independent constant; negative
            // effective counts contribute only their expected-rate term.
            probs
                .iter()
                .zip(&data.counts)
                .zip(&data.basis_totals)
                .map(|((p, n), nb)| {
                    let mu = (nb * p).max(1e-12);
                    if *n > 0.0 {
                        2.0 * (mu - n + n * (n / mu).ln())
                    } else {
                        2.0 * mu
                    }
                })
                .sum()
        }
    }
}

/// Maximum-likelihood reconstruction. Returns the fitted state with fidelity
/// against `target` and the tangle; uncertainty fields are left empty (see
/// [`monte_carlo_uncertainty`]).
pub fn mle_tomography(
    record: &TomographyRecord,
    options: &MleOptions,
    target: &QuNitPair,
) -> Result<TomographyResult, AnalysisError> {
    let data = prepare(record, options.subtract);
    let seed_rho = linear_inversion_seed(&data);
    let t0 = lower_tri_factor(&ridge(&seed_rho, 1e-9), 0.0)?;
    let mut params = params_from_t(&t0);

    let mut lambda = 1e-3;
    let (_, mut rho, _) = rho_from_params(&params);
    let mut probs = born_probs(&rho, &data);
    let mut fval = objective_value(&probs, &data, options.objective);
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0usize;

    for iter in 0..options.max_iterations {
        iterations = iter + 1;
        let (hess, grad) = newton_system(&params, &probs, &data, options.objective);
        let mut accepted = false;
        for _ in 0..80 {
            let step = match damped_step(&hess, &grad, lambda) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            let mut trial = params;
            for k in 0..NPARAMS {
                trial[k] += step[k];
            }
            let (_, trial_rho, _) = rho_from_params(&trial);
            let trial_probs = born_probs(&trial_rho, &data);
            let trial_f = objective_value(&trial_probs, &data, options.objective);
            if trial_f <= fval {
                let improvement = fval - trial_f;
                params = trial;
                rho = trial_rho;
                probs = trial_probs;
                fval = trial_f;
                lambda = (lambda / 3.0).max(1e-14);
                accepted = true;
                if step_norm < options.step_tolerance {
                    converged = true;
                }
                // Floating-point floor: flat directions of the T chart can
                // sustain nonzero steps with no real objective change.
                if improvement <= 1e-10 * (1.0 + fval.abs()) {
                    stalled += 1;
                    if stalled >= 3 {
                        converged = true;
                    }
                } else {
                    stalled = 0;
                }
                break;
            }
            // A proposal already below the step tolerance cannot improve the
            // objective: the descent has nowhere to go.
            if step_norm < options.step_tolerance {
                converged = true;
                break;
            }
            lambda *= 3.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged {
            break;
        }
        if !accepted {
            // No damping level yields an improving step: stationary point.
            converged = fval.is_finite();
            break;
        }
    }

    let result = finish(&rho, target, fval)?;
    if !converged {
        return Err(AnalysisError::NonConvergence {
            iterations,
            objective: fval,
            best: Box::new(result),
        });
    }
    Ok(result)
}

fn finish(
    rho: &CMat,
    target: &QuNitPair,
    fval: f64,
) -> Result<TomographyResult, AnalysisError> {
    // ρ = T†T/tr is Hermitian PSD by construction; symmetrize the last few
    // ulps so the DensityMatrix validator sees an exactly Hermitian matrix.
    let mut sym = rho.clone();
    for i in 0..DIM {
        for j in 0..DIM {
            let h = (rho[[i, j]] + rho[[j, i]].conj()) * 0.5;
            sym[[i, j]] = h;
        }
    }
    let tr = linalg::trace(&sym).re;
    let sym = sym.mapv(|z| z / tr);
    let rho = DensityMatrix::new(sym)?;
    let f = fidelity(&rho, target)?;
    let t = tangle(&rho)?;
    Ok(TomographyResult {
        rho,
        fidelity: f,
        tangle: t,
        fidelity_err: None,
        tangle_err: None,
        loglikelihood: -fval,
    })
}

/// Analytic gradient and full Hessian of the objective in the 16 T
/// parameters.
///
/// With S = T†T, τ = tr S = Σⱼ tⱼ², and outcome vector v: the Born
/// probability is p = q/τ with q = ‖T·v‖². Writing each parameter direction
/// as the single-entry matrix E_a = val_a·e_{r_a c_a}:
///   q_a   = 2·Re[conj(val_a·v_{c_a})·(T·v)_{r_a}],
///   s_ab  = 2·Re[conj(val_a·v_{c_a})·(val_b·v_{c_b})]·[r_a = r_b],
///   τ_a   = 2·t_a,   τ_ab = 2·δ_ab,
/// from which dp and d²p follow by the quotient rule. The second-order term
/// of the likelihood is kept: near the PSD boundary the residual curvature
/// dominates and pure Gauss-Newton steps stall.
fn newton_system(
    params: &[f64; NPARAMS],
    probs: &[f64],
    data: &FitData,
    objective: Objective,
) -> (Array2<f64>, Array1<f64>) {
    let (t, _, tau) = rho_from_params(params);
    let directions: Vec<(usize, usize, C64)> = (0..NPARAMS).map(param_direction).collect();

    let mut grad = Array1::<f64>::zeros(NPARAMS);
    let mut hess = Array2::<f64>::zeros((NPARAMS, NPARAMS));

    for (k, v) in data.vectors.iter().enumerate() {
        // (T·v) rows and per-parameter overlaps u_a = val_a·v_{c_a}.
        let mut tv = [C64::new(0.0, 0.0); DIM];
        for r in 0..DIM {
            for y in 0..DIM {
                tv[r] += t[[r, y]] * v[y];
            }
        }
        let q: f64 = tv.iter().map(|z| z.norm_sqr()).sum();
        let u: Vec<C64> = directions.iter().map(|&(_, c, val)| val * v[c]).collect();
        let mut qd = [0.0_f64; NPARAMS];
        for a in 0..NPARAMS {
            qd[a] = 2.0 * (u[a].conj() * tv[directions[a].0]).re;
        }

        let nb = data.basis_totals[k];
        let n = data.counts[k];
        let mu = nb * probs[k];
        // dL/dμ and d²L/dμ² of the per-outcome loss.
        let (dl, d2l) = match objective {
            Objective::Gaussian => {
                let w = data.weights[k];
                (-2.0 * w * (n - mu), 2.0 * w)
            }
            Objective::Poisson => {
                let mu_f = mu.max(1e-12);
                if n > 0.0 {
                    (2.0 * (1.0 - n / mu_f), 2.0 * n / (mu_f * mu_f))
                } else {
                    (2.0, 0.0)
                }
            }
        };

        let mut dp = [0.0_f64; NPARAMS];
        for a in 0..NPARAMS {
            let tau_a = 2.0 * params[a];
            dp[a] = qd[a] / tau - q * tau_a / (tau * tau);
            grad[a] += dl * nb * dp[a];
        }
        for a in 0..NPARAMS {
            let tau_a = 2.0 * params[a];
            for b in a..NPARAMS {
                let tau_b = 2.0 * params[b];
                let s_ab = if directions[a].0 == directions[b].0 {
                    2.0 * (u[a].conj() * u[b]).re
                } else {
                    0.0
                };
                let tau_ab = if a == b { 2.0 } else { 0.0 };
                let d2p = s_ab / tau
                    - (qd[a] * tau_b + qd[b] * tau_a) / (tau * tau)
                    - q * tau_ab / (tau * tau)
                    + 2.0 * q * tau_a * tau_b / (tau * tau * tau);
                hess[[a, b]] += d2l * nb * nb * dp[a] * dp[b] + dl * nb * d2p;
            }
        }
    }
    for a in 0..NPARAMS {
        for b in 0..a {
            hess[[a, b]] = hess[[b, a]];
        }
    }
    (hess, grad)
}

/// Damped Newton step: solve (H + λ·D)·δ = −g with D a positive diagonal
/// regularizer. Cholesky failure (indefinite H at this damping) returns None
/// so the caller can raise λ.
fn damped_step(hess: &Array2<f64>, grad: &Array1<f64>, lambda: f64) -> Option<Array1<f64>> {
    let floor = (0..NPARAMS)
        .map(|k| hess[[k, k]].abs())
        .fold(0.0_f64, f64::max)
        .max(1e-12)
        * 1e-8;
    let mut damped = hess.clone();
    for k in 0..NPARAMS {
        damped[[k, k]] += lambda * hess[[k, k]].abs().max(floor);
    }
    let rhs = grad.mapv(|x| -x);
    solve_spd_real(&damped, &rhs).ok()
}

/// Least-squares linear inversion of the measured frequencies, projected onto
/// the PSD cone (eigenvalue clamping) and renormalized.
fn linear_inversion_seed(data: &FitData) -> CMat {
    // Hermitian parameterization: 4 diagonal entries, then (re, im) of the
    // upper triangle (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
    let upper: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let nobs = data.vectors.len();
    let mut a = Array2::<f64>::zeros((nobs, NPARAMS));
    let mut b = Array1::<f64>::zeros(nobs);
    for (k, v) in data.vectors.iter().enumerate() {
        b[k] = data.counts[k] / data.basis_totals[k];
        for d in 0..DIM {
            a[[k, d]] = v[d].norm_sqr();
        }
        for (m, &(r, s)) in upper.iter().enumerate() {
            let cross = v[r].conj() * v[s];
            a[[k, DIM + 2 * m]] = 2.0 * cross.re;
            a[[k, DIM + 2 * m + 1]] = -2.0 * cross.im;
        }
    }
    let mut ata = Array2::<f64>::zeros((NPARAMS, NPARAMS));
    let mut atb = Array1::<f64>::zeros(NPARAMS);
    for k in 0..nobs {
        for i in 0..NPARAMS {
            atb[i] += a[[k, i]] * b[k];
            for j in i..NPARAMS {
                ata[[i, j]] += a[[k, i]] * a[[k, j]];
            }
        }
    }
    for i in 0..NPARAMS {
        for j in 0..i {
            ata[[i, j]] = ata[[j, i]];
        }
        ata[[i, i]] += 1e-12;
    }
    let x = solve_spd_real(&ata, &atb).unwrap_or_else(|_| Array1::zeros(NPARAMS));

    let mut rho = CMat::zeros((DIM, DIM));
    for d in 0..DIM {
        rho[[d, d]] = C64::new(x[d], 0.0);
    }
    for (m, &(r, s)) in upper.iter().enumerate() {
        let z = C64::new(x[DIM + 2 * m], x[DIM + 2 * m + 1]);
        rho[[r, s]] = z;
        rho[[s, r]] = z.conj();
    }
    project_to_state(&rho)
}

/// Clamp negative eigenvalues to zero and renormalize the trace.
fn project_to_state(rho: &CMat) -> CMat {
    let (w, v) = hermitian_eigen(rho);
    let mut clamped = CMat::zeros((DIM, DIM));
    let mut tr = 0.0;
    for k in 0..DIM {
        let lam = w[k].max(0.0);
        tr += lam;
        if lam == 0.0 {
            continue;
        }
        for i in 0..DIM {
            for j in 0..DIM {
                clamped[[i, j]] += v[[i, k]] * v[[j, k]].conj() * lam;
            }
        }
    }
    if tr <= f64::MIN_POSITIVE {
        return CMat::from_diag_elem(DIM, C64::new(0.25, 0.0));
    }
    clamped.mapv(|z| z / tr)
}

fn ridge(rho: &CMat, eps: f64) -> CMat {
    let mut out = rho.clone();
    for i in 0..DIM {
        out[[i, i]] += C64::new(eps, 0.0);
    }
    let tr = linalg::trace(&out).re;
    out.mapv(|z| z / tr)
}

/// Monte Carlo uncertainty: resample every raw count as Poisson(observed),
/// rerun the reconstruction, and return the sample standard deviations of
/// fidelity and tangle. Per-sample seeds derive deterministically from
/// (seed, sample index), so serial and parallel execution agree.
pub fn monte_carlo_uncertainty(
    record: &TomographyRecord,
    options: &MleOptions,
    target: &QuNitPair,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64), AnalysisError> {
    if n_samples < 2 {
        return Err(AnalysisError::BadTomographyRecord(format!(
            "Monte Carlo needs at least 2 samples, got {n_samples}"
        )));
    }
    let mut fids = Vec::with_capacity(n_samples);
    let mut tangles = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_indexed(seed, "tomo.mc", s as u64));
        let resampled: Vec<BasisPairRecord> = record
            .bases()
            .iter()
            .map(|r| {
                let counts = r.counts.mapv(|n| {
                    if n > 0.0 {
                        let draw: f64 = Poisson::new(n).expect("positive mean").sample(&mut rng);
                        draw
                    } else {
                        0.0
                    }
                });
                BasisPairRecord {
                    counts,
                    ..r.clone()
                }
            })
            .collect();
        let rec = TomographyRecord::new(resampled, record.integration_time_s)?;
        let fit = match mle_tomography(&rec, options, target) {
            Ok(f) => f,
            Err(AnalysisError::NonConvergence { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        fids.push(fit.fidelity);
        tangles.push(fit.tangle);
    }
    Ok((sample_std(&fids), sample_std(&tangles)))
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}
