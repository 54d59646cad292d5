//! Pure two-quNit states, density matrices, and the overlap/entanglement
//! measures used to grade a path-entangled source.
//!
//! A source distributes one photon pair over N correlated path pairs, so a
//! pure state is N complex amplitudes over the kets |1,1'⟩ … |N,N'⟩. Density
//! matrices live in the full d = N² space. The basis is ordered with the N
//! correlated kets first and the N²−N cross kets |i,j'⟩ (i ≠ j) appended in
//! lexicographic order, which keeps the physically populated block contiguous
//! in the top-left N×N corner.

use crate::linalg::{
    self, dagger, hermitian_eigen, matrix_from_text, matrix_to_text, psd_sqrt, CMat, C64,
};
use ndarray::Array2;
use std::f64::consts::PI;
use thiserror::Error;

/// Default comparison phase: the |1,1'⟩ − |2,2'⟩ singlet-like target.
pub const DEFAULT_TARGET_PHASE: f64 = PI;

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = -1e-9;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("degenerate amplitude vector")]
    DegenerateAmplitudes,
    #[error("state needs at least 2 amplitudes, got {0}")]
    TooFewAmplitudes(usize),
    #[error("density matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0:?}, expected 1")]
    BadTrace(C64),
    #[error("density matrix has eigenvalue {0:.3e} below the PSD tolerance")]
    NotPositive(f64),
    #[error("density matrix dimension {0} is not a perfect square")]
    NotPairDimension(usize),
    #[error("dimension mismatch: density matrix dim {rho_dim}, state needs {expected}")]
    DimensionMismatch { rho_dim: usize, expected: usize },
    #[error("tangle defined for two qubits only (got dim {0})")]
    TangleDimension(usize),
    #[error("dephasing strength {0} outside [0, 1]")]
    BadDephasing(f64),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Index of the basis ket |i,j'⟩ in the correlated-first ordering.
///
/// The N correlated kets |i,i'⟩ occupy indices 0..N; the cross kets follow in
/// lexicographic order over ordered pairs (i, j), i ≠ j.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < n && j < n);
    if i == j {
        i
    } else {
        n + i * (n - 1) + if j > i { j - 1 } else { j }
    }
}

/// Inverse of [`pair_index`].
pub fn index_to_pair(n: usize, idx: usize) -> (usize, usize) {
    if idx < n {
        (idx, idx)
    } else {
        let r = idx - n;
        let i = r / (n - 1);
        let jj = r % (n - 1);
        let j = if jj >= i { jj + 1 } else { jj };
        (i, j)
    }
}

/// A normalized pure two-quNit state: amplitude `amps[i]` on the correlated
/// ket |i+1, (i+1)'⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct QuNitPair {
    amps: Vec<C64>,
}

impl QuNitPair {
    /// Build a state from unnormalized amplitudes. Divides by the Euclidean
    /// norm; rejects vectors that are empty, too short, or numerically zero.
    pub fn new(amps: Vec<C64>) -> Result<Self, StateError> {
        if amps.len() < 2 {
            return Err(StateError::TooFewAmplitudes(amps.len()));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !(norm_sq.is_finite()) || norm_sq <= f64::MIN_POSITIVE {
            return Err(StateError::DegenerateAmplitudes);
        }
        let norm = norm_sq.sqrt();
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    /// The balanced maximally entangled state (|1,1'⟩ + … + |N,N'⟩)/√N.
    pub fn balanced(n: usize) -> Self {
        Self::new(vec![C64::new(1.0, 0.0); n]).expect("n >= 2 gives a valid state")
    }

    /// Two-qubit comparison state (|1,1'⟩ + e^{iθ}|2,2'⟩)/√2. The sign of the
    /// relative phase is a convention choice; θ = [`DEFAULT_TARGET_PHASE`]
    /// gives the singlet-like target.
    pub fn bell_target(theta: f64) -> Self {
        Self::new(vec![C64::new(1.0, 0.0), C64::from_polar(1.0, theta)])
            .expect("two nonzero amplitudes")
    }

    /// Amplitudes embedded in the d = N² basis (cross kets carry zero).
    pub fn embedded(&self) -> Vec<C64> {
        let n = self.dim();
        let mut v = vec![C64::new(0.0, 0.0); n * n];
        v[..n].copy_from_slice(&self.amps);
        v
    }
}

/// Build a normalized state from unnormalized amplitudes.
pub fn make_pair_state(amps: Vec<C64>) -> Result<QuNitPair, StateError> {
    QuNitPair::new(amps)
}

/// A d×d Hermitian, unit-trace, positive-semidefinite operator in the
/// correlated-first pair basis (d = N²).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: CMat,
}

impl DensityMatrix {
    /// Validate and wrap a matrix. Hermiticity within 1e-10, trace within
    /// 1e-10 of one, smallest eigenvalue ≥ −1e-9.
    pub fn new(entries: CMat) -> Result<Self, StateError> {
        let dim = entries.nrows();
        if entries.ncols() != dim {
            return Err(StateError::DimensionMismatch {
                rho_dim: entries.ncols(),
                expected: dim,
            });
        }
        let herm = max_hermiticity_defect(&entries);
        if herm > HERMITICITY_TOL {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = linalg::trace(&entries);
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(StateError::BadTrace(tr));
        }
        let (w, _) = hermitian_eigen(&entries);
        if w[0] < PSD_TOL {
            return Err(StateError::NotPositive(w[0]));
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// N such that dim = N², when the dimension is a pair dimension.
    pub fn qunit_dim(&self) -> Result<usize, StateError> {
        let n = (self.dim as f64).sqrt().round() as usize;
        if n * n == self.dim {
            Ok(n)
        } else {
            Err(StateError::NotPairDimension(self.dim))
        }
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.entries).0.to_vec()
    }

    /// Serialize to the `dim=<d>` text format (17 significant digits,
    /// exact round trip).
    pub fn to_text(&self) -> String {
        matrix_to_text(&self.entries)
    }

    /// Parse the text format and re-validate all invariants.
    pub fn from_text(text: &str) -> Result<Self, StateError> {
        Self::new(matrix_from_text(text)?)
    }
}

fn max_hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Outer-product density matrix |ψ⟩⟨ψ| of a pure state, in the d = N² basis.
pub fn pure_density(state: &QuNitPair) -> DensityMatrix {
    dephase(state, 1.0).expect("p = 1 is in range")
}

/// Dephased density matrix: coherences between distinct correlated kets are
/// multiplied by `p`; populations are untouched. `p = 1` reproduces the pure
/// outer product, `p = 0` the fully mixed diagonal of the populations.
pub fn dephase(state: &QuNitPair, p: f64) -> Result<DensityMatrix, StateError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(StateError::BadDephasing(p));
    }
    let n = state.dim();
    let d = n * n;
    let mut m = CMat::zeros((d, d));
    for i in 0..n {
        for j in 0..n {
            let val = state.amps[i] * state.amps[j].conj();
            m[[i, j]] = if i == j { val } else { val * p };
        }
    }
    DensityMatrix::new(m)
}

/// Pure-target fidelity F = ⟨ψ|ρ|ψ⟩ (not its square root).
pub fn fidelity(rho: &DensityMatrix, target: &QuNitPair) -> Result<f64, StateError> {
    let expected = target.dim() * target.dim();
    if rho.dim() != expected {
        return Err(StateError::DimensionMismatch {
            rho_dim: rho.dim(),
            expected,
        });
    }
    let psi = target.embedded();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..expected {
        for j in 0..expected {
            acc += psi[i].conj() * rho.entries[[i, j]] * psi[j];
        }
    }
    Ok(acc.re.clamp(0.0, 1.0))
}

/// Wootters tangle T = C² of a two-qubit density matrix (dim = 4 only).
///
/// C = max(0, λ₁−λ₂−λ₃−λ₄) with λ descending square roots of the eigenvalues
/// of ρ·ρ̃, where ρ̃ is the entrywise conjugate of ρ conjugated by the
/// two-qubit spin flip. The flip operator is the antidiagonal
/// {−1, +1, +1, −1} matrix in the tensor ordering |1,1'⟩,|1,2'⟩,|2,1'⟩,|2,2'⟩;
/// the input is permuted there from the correlated-first ordering and the
/// eigenvalues of ρ·ρ̃ are extracted through the Hermitian form
/// √ρ·ρ̃·√ρ, keeping every eigensolve Hermitian.
pub fn tangle(rho: &DensityMatrix) -> Result<f64, StateError> {
    if rho.dim() != 4 {
        return Err(StateError::TangleDimension(rho.dim()));
    }
    // Correlated-first index -> tensor index: |1,1'⟩,|2,2'⟩,|1,2'⟩,|2,1'⟩
    // land at tensor slots 0, 3, 1, 2.
    let perm = [0usize, 3, 1, 2];
    let mut r = CMat::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            r[[perm[i], perm[j]]] = rho.entries[[i, j]];
        }
    }
    // Spin flip: (F ρ* F) with F = antidiag(−1, +1, +1, −1).
    let sign = [-1.0, 1.0, 1.0, -1.0];
    let mut flipped = CMat::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            flipped[[i, j]] = r[[3 - i, 3 - j]].conj() * sign[i] * sign[j];
        }
    }
    let root = psd_sqrt(&r);
    let m = root.dot(&flipped).dot(&root);
    let (w, _) = hermitian_eigen(&m);
    let mut lambdas: Vec<f64> = w.iter().map(|x| x.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(c * c)
}

/// Trace distance ½‖ρ−σ‖₁ between two density matrices.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    if a.dim() != b.dim() {
        return Err(StateError::DimensionMismatch {
            rho_dim: b.dim(),
            expected: a.dim(),
        });
    }
    Ok(linalg::trace_distance(&a.entries, &b.entries))
}

/// Purity tr(ρ²).
pub fn purity(rho: &DensityMatrix) -> f64 {
    let sq = rho.entries.dot(&rho.entries);
    linalg::trace(&sq).re
}

/// Maximally mixed state I/d.
pub fn maximally_mixed(d: usize) -> DensityMatrix {
    let mut m: Array2<C64> = CMat::zeros((d, d));
    for i in 0..d {
        m[[i, i]] = C64::new(1.0 / d as f64, 0.0);
    }
    DensityMatrix::new(m).expect("I/d satisfies all invariants")
}

/// Conjugate ρ ↦ MρM† and revalidate. Used by tests and the measurement
/// pipeline; M must be unitary for the result to remain a state.
pub fn conjugate(rho: &DensityMatrix, m: &CMat) -> Result<DensityMatrix, StateError> {
    let out = m.dot(&rho.entries).dot(&dagger(m));
    DensityMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pair_index_roundtrip_and_ordering() {
        // N = 2: |1,1'⟩, |2,2'⟩, |1,2'⟩, |2,1'⟩.
        assert_eq!(pair_index(2, 0, 0), 0);
        assert_eq!(pair_index(2, 1, 1), 1);
        assert_eq!(pair_index(2, 0, 1), 2);
        assert_eq!(pair_index(2, 1, 0), 3);
        for n in 2..=6 {
            for idx in 0..n * n {
                let (i, j) = index_to_pair(n, idx);
                assert_eq!(pair_index(n, i, j), idx);
            }
        }
    }

    #[test]
    fn make_pair_state_normalizes() {
        let s = make_pair_state(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(s.amps()[0].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.amps()[1].re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);

        // 3-4-5 normalization.
        let s = make_pair_state(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_relative_eq!(s.amps()[0].re, 0.6, epsilon = 1e-15);
        assert_relative_eq!(s.amps()[1].im, 0.8, epsilon = 1e-15);

        // Balanced ququart: all amplitudes 1/2, phases 0.
        let s = make_pair_state(vec![c(1.0, 0.0); 4]).unwrap();
        for a in s.amps() {
            assert_relative_eq!(a.re, 0.5, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn make_pair_state_rejects_degenerate_input() {
        assert!(matches!(
            make_pair_state(vec![c(0.0, 0.0), c(0.0, 0.0)]),
            Err(StateError::DegenerateAmplitudes)
        ));
        assert!(matches!(
            make_pair_state(vec![c(1.0, 0.0)]),
            Err(StateError::TooFewAmplitudes(1))
        ));
    }

    #[test]
    fn pure_density_of_balanced_qubit_pair() {
        let rho = pure_density(&QuNitPair::balanced(2));
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(rho.entries()[[i, j]].re, 0.5, epsilon = 1e-15);
            }
        }
        // Cross-ket block is empty.
        for i in 2..4 {
            for j in 0..4 {
                assert_eq!(rho.entries()[[i, j]], c(0.0, 0.0));
                assert_eq!(rho.entries()[[j, i]], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn pure_states_have_unit_purity() {
        let s = make_pair_state(vec![c(0.3, 0.1), c(-0.2, 0.7), c(0.5, 0.0)]).unwrap();
        let rho = pure_density(&s);
        assert_relative_eq!(purity(&rho), 1.0, epsilon = 1e-12);
        let sq = rho.entries().dot(rho.entries());
        assert!(linalg::max_abs_diff(&sq, rho.entries()) < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let target = QuNitPair::bell_target(0.0);
        let rho = pure_density(&target);
        assert_relative_eq!(fidelity(&rho, &target).unwrap(), 1.0, epsilon = 1e-12);

        let mixed = maximally_mixed(4);
        assert_relative_eq!(fidelity(&mixed, &target).unwrap(), 0.25, epsilon = 1e-12);

        // Dephased Bell state against its own pure version: (1+p)/2.
        let p = 0.956;
        let rho = dephase(&target, p).unwrap();
        assert_relative_eq!(fidelity(&rho, &target).unwrap(), (1.0 + p) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(fidelity(&rho, &target).unwrap(), 0.978, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let rho = maximally_mixed(9);
        let target = QuNitPair::balanced(2);
        assert!(matches!(
            fidelity(&rho, &target),
            Err(StateError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dephase_limits() {
        let s = QuNitPair::balanced(2);
        let full = dephase(&s, 1.0).unwrap();
        assert_eq!(full, pure_density(&s));

        let none = dephase(&s, 0.0).unwrap();
        let e = none.entries();
        assert_relative_eq!(e[[0, 0]].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e[[1, 1]].re, 0.5, epsilon = 1e-15);
        assert_eq!(e[[0, 1]], c(0.0, 0.0));
        assert_eq!(e[[1, 0]], c(0.0, 0.0));
        assert_eq!(e[[2, 2]], c(0.0, 0.0));
        assert_eq!(e[[3, 3]], c(0.0, 0.0));

        assert!(dephase(&s, 1.5).is_err());
        assert!(dephase(&s, -0.1).is_err());
    }

    #[test]
    fn tangle_examples() {
        // Pure Bell state: maximal entanglement.
        for theta in [0.0, PI, 1.234] {
            let rho = pure_density(&QuNitPair::bell_target(theta));
            assert_relative_eq!(tangle(&rho).unwrap(), 1.0, epsilon = 1e-10);
        }
        // Maximally mixed: separable.
        assert_relative_eq!(tangle(&maximally_mixed(4)).unwrap(), 0.0, epsilon = 1e-12);
        // Dephased Bell state: T = p². Frozen oracle value for p = 0.956.
        let rho = dephase(&QuNitPair::bell_target(0.0), 0.956).unwrap();
        assert_relative_eq!(tangle(&rho).unwrap(), 0.913936, epsilon = 1e-10);
        // Product state |1,1'⟩-heavy: no entanglement.
        let prod = make_pair_state(vec![c(1.0, 0.0), c(1e-13, 0.0)]).unwrap();
        assert!(tangle(&pure_density(&prod)).unwrap() < 1e-9);
    }

    #[test]
    fn tangle_rejects_non_qubit_dimensions() {
        let rho = maximally_mixed(9);
        assert!(matches!(tangle(&rho), Err(StateError::TangleDimension(9))));
    }

    #[test]
    fn tangle_oracle_brute_force() {
        // Independent route: characteristic-polynomial eigenvalues of the
        // non-Hermitian product ρ·ρ̃ via Durand-Kerner, no Jacobi involved.
        let p = 0.73;
        let rho = dephase(&QuNitPair::bell_target(2.1), p).unwrap();
        let perm = [0usize, 3, 1, 2];
        let mut r = CMat::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                r[[perm[i], perm[j]]] = rho.entries()[[i, j]];
            }
        }
        let sign = [-1.0, 1.0, 1.0, -1.0];
        let mut ft = CMat::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                ft[[i, j]] = r[[3 - i, 3 - j]].conj() * sign[i] * sign[j];
            }
        }
        let prod = r.dot(&ft);
        let eigs = durand_kerner_eigenvalues(&prod);
        let mut lambdas: Vec<f64> = eigs.iter().map(|z| z.re.max(0.0).sqrt()).collect();
        lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let c_oracle = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
        // ρ·ρ̃ has a double root at zero, which caps the root finder near
        // sqrt(machine precision); 1e-4 is the honest oracle resolution.
        assert_relative_eq!(c_oracle * c_oracle, p * p, epsilon = 1e-4);
        assert_relative_eq!(tangle(&rho).unwrap(), c_oracle * c_oracle, epsilon = 1e-4);
    }

    /// Roots of det(A − λI) for a 4×4 complex matrix by Durand-Kerner on the
    /// characteristic polynomial (test-only oracle).
    fn durand_kerner_eigenvalues(a: &CMat) -> Vec<C64> {
        let n = a.nrows();
        // Characteristic polynomial via Faddeev-LeVerrier: coefficients of
        // λ^n + c1 λ^{n-1} + ... + cn.
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        let mut m = CMat::zeros((n, n));
        let id = linalg::identity(n);
        for k in 1..=n {
            m = a.dot(&m) + &id * *coeffs.last().unwrap();
            let c_k = linalg::trace(&a.dot(&m)) / C64::new(-(k as f64), 0.0);
            coeffs.push(c_k);
        }
        let eval = |z: C64| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for c_k in &coeffs {
                acc = acc * z + c_k;
            }
            acc
        };
        let mut roots: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(0.7, 0.4 + 2.2 * k as f64))
            .collect();
        for _ in 0..200 {
            let prev = roots.clone();
            for i in 0..n {
                let mut denom = C64::new(1.0, 0.0);
                for j in 0..n {
                    if j != i {
                        denom *= prev[i] - prev[j];
                    }
                }
                roots[i] = prev[i] - eval(prev[i]) / denom;
            }
        }
        roots
    }

    #[test]
    fn fidelity_monotone_in_dephasing() {
        let s = QuNitPair::balanced(2);
        let mut prev = -1.0;
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let f = fidelity(&dephase(&s, p).unwrap(), &s).unwrap();
            assert!(f > prev, "fidelity must increase with p");
            prev = f;
        }
    }

    #[test]
    fn tangle_is_p_squared_for_dephased_bell() {
        let s = QuNitPair::balanced(2);
        let mut x = 0.123_f64;
        for _ in 0..100 {
            x = (x * 1103515245.0 + 12345.0) % 1.0;
            let p = x.abs();
            let t = tangle(&dephase(&s, p).unwrap()).unwrap();
            assert_relative_eq!(t, p * p, epsilon = 1e-10);
        }
    }

    #[test]
    fn measures_invariant_under_global_phase() {
        let s = make_pair_state(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let g = C64::from_polar(1.0, 1.9);
        let s2 = make_pair_state(vec![c(0.6, 0.0) * g, c(0.0, 0.8) * g]).unwrap();
        let rho = dephase(&s, 0.8).unwrap();
        let rho2 = dephase(&s2, 0.8).unwrap();
        assert_relative_eq!(
            fidelity(&rho, &s).unwrap(),
            fidelity(&rho2, &s2).unwrap(),
            epsilon = 1e-12
        );
        assert_relative_eq!(tangle(&rho).unwrap(), tangle(&rho2).unwrap(), epsilon = 1e-12);
        // Global phase on the target alone does not move fidelity either.
        assert_relative_eq!(
            fidelity(&rho, &s).unwrap(),
            fidelity(&rho, &s2).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn density_matrix_invariants_enforced() {
        // Non-Hermitian.
        let mut m = CMat::zeros((2, 2));
        m[[0, 0]] = c(0.5, 0.0);
        m[[1, 1]] = c(0.5, 0.0);
        m[[0, 1]] = c(0.3, 0.0);
        m[[1, 0]] = c(-0.3, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(StateError::NotHermitian(_))));

        // Wrong trace.
        let mut m = CMat::zeros((2, 2));
        m[[0, 0]] = c(0.7, 0.0);
        m[[1, 1]] = c(0.7, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(StateError::BadTrace(_))));

        // Negative eigenvalue beyond tolerance.
        let mut m = CMat::zeros((2, 2));
        m[[0, 0]] = c(1.1, 0.0);
        m[[1, 1]] = c(-0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(StateError::NotPositive(_))));
    }

    #[test]
    fn text_roundtrip_preserves_state() {
        let rho = dephase(&QuNitPair::bell_target(1.1), 0.9).unwrap();
        let text = rho.to_text();
        assert!(text.starts_with("dim=4\n"));
        let back = DensityMatrix::from_text(&text).unwrap();
        assert_eq!(rho, back);
    }

    proptest! {
        #[test]
        fn constructed_densities_satisfy_invariants(
            res in proptest::collection::vec(-1.0f64..1.0, 2..5),
            ims in proptest::collection::vec(-1.0f64..1.0, 2..5),
            p in 0.0f64..=1.0,
        ) {
            let n = res.len().min(ims.len());
            prop_assume!(n >= 2);
            let amps: Vec<C64> = (0..n).map(|i| c(res[i], ims[i])).collect();
            prop_assume!(amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-6);
            let s = make_pair_state(amps).unwrap();
            // DensityMatrix::new re-checks Hermiticity, trace, and PSD.
            let rho = dephase(&s, p).unwrap();
            prop_assert_eq!(rho.dim(), n * n);
            let tr: C64 = linalg::trace(rho.entries());
            prop_assert!((tr.re - 1.0).abs() < 1e-12);
        }
    }
}
