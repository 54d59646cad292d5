//! Beam-splitter/phase-shifter meshes for N-mode path interferometers.
//!
//! Any N×N unitary can be compiled into a triangular array of N(N−1)/2
//! two-mode cells followed by per-mode output phases; `reck_decompose` does
//! the compilation and `mesh_to_unitary` plays it back. The module also
//! provides the balanced N-mode Fourier multiport and the single-qubit
//! analyzer (variable splitter + phase) used by every measurement.

use crate::linalg::{dagger, identity, unitarity_deviation, CMat, C64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MultiportError {
    #[error("mode pair ({a}, {b}) invalid for dimension {dim}")]
    BadModes { a: usize, b: usize, dim: usize },
    #[error("reflectivity {0} outside [0, 1]")]
    BadReflectivity(f64),
    #[error("matrix is not unitary: max |U†U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },
    #[error("mesh for dimension {dim} needs {expected} cells, got {got}")]
    BadCellCount { dim: usize, expected: usize, got: usize },
    #[error("mesh needs {dim} output phases, got {got}")]
    BadPhaseCount { dim: usize, got: usize },
    #[error("dimension {0} too small (need N >= 2)")]
    BadDimension(usize),
    #[error("mesh parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One two-mode beam-splitter cell with reflectivity R and phase φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamsplitterCell {
    pub mode_a: usize,
    pub mode_b: usize,
    pub reflectivity: f64,
    pub phase: f64,
}

impl BeamsplitterCell {
    pub fn new(
        mode_a: usize,
        mode_b: usize,
        reflectivity: f64,
        phase: f64,
    ) -> Result<Self, MultiportError> {
        if mode_a >= mode_b {
            return Err(MultiportError::BadModes {
                a: mode_a,
                b: mode_b,
                dim: usize::MAX,
            });
        }
        if !(0.0..=1.0).contains(&reflectivity) || reflectivity.is_nan() {
            return Err(MultiportError::BadReflectivity(reflectivity));
        }
        Ok(Self {
            mode_a,
            mode_b,
            reflectivity,
            phase: phase.rem_euclid(TAU),
        })
    }
}

/// Triangular mesh of N(N−1)/2 cells plus N output phases realizing an
/// N×N unitary. Cells are applied to the input state in list order, the
/// output phases last.
#[derive(Debug, Clone, PartialEq)]
pub struct ReckMesh {
    pub dim: usize,
    pub cells: Vec<BeamsplitterCell>,
    pub output_phases: Vec<f64>,
}

impl ReckMesh {
    pub fn new(
        dim: usize,
        cells: Vec<BeamsplitterCell>,
        output_phases: Vec<f64>,
    ) -> Result<Self, MultiportError> {
        if dim < 2 {
            return Err(MultiportError::BadDimension(dim));
        }
        let expected = dim * (dim - 1) / 2;
        if cells.len() != expected {
            return Err(MultiportError::BadCellCount {
                dim,
                expected,
                got: cells.len(),
            });
        }
        if output_phases.len() != dim {
            return Err(MultiportError::BadPhaseCount {
                dim,
                got: output_phases.len(),
            });
        }
        for c in &cells {
            if c.mode_b >= dim {
                return Err(MultiportError::BadModes {
                    a: c.mode_a,
                    b: c.mode_b,
                    dim,
                });
            }
        }
        Ok(Self {
            dim,
            cells,
            output_phases,
        })
    }

    /// Serialize: one `a b R phi` line per cell, then `out φ₁ … φ_N`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            out.push_str(&format!(
                "{} {} {} {}\n",
                c.mode_a, c.mode_b, c.reflectivity, c.phase
            ));
        }
        out.push_str("out");
        for p in &self.output_phases {
            out.push_str(&format!(" {p}"));
        }
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MultiportError> {
        let mut cells = Vec::new();
        let mut phases: Option<Vec<f64>> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("out") {
                let ps: Result<Vec<f64>, _> =
                    rest.split_whitespace().map(str::parse::<f64>).collect();
                phases = Some(ps.map_err(|e| MultiportError::Parse {
                    line: line_no,
                    msg: format!("bad output phase: {e}"),
                })?);
                break;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(MultiportError::Parse {
                    line: line_no,
                    msg: format!("expected `a b R phi`, found {} fields", fields.len()),
                });
            }
            let parse_err = |e: String| MultiportError::Parse {
                line: line_no,
                msg: e,
            };
            let a: usize = fields[0].parse().map_err(|e| parse_err(format!("{e}")))?;
            let b: usize = fields[1].parse().map_err(|e| parse_err(format!("{e}")))?;
            let r: f64 = fields[2].parse().map_err(|e| parse_err(format!("{e}")))?;
            let p: f64 = fields[3].parse().map_err(|e| parse_err(format!("{e}")))?;
            cells.push(BeamsplitterCell::new(a, b, r, p).map_err(|e| parse_err(e.to_string()))?);
        }
        let phases = phases.ok_or(MultiportError::Parse {
            line: 0,
            msg: "missing `out` line".into(),
        })?;
        let dim = phases.len();
        Self::new(dim, cells, phases)
    }
}

/// Analyzer setting: variable splitter α plus phase φ. Detection behind
/// output 0 projects onto √α|1⟩ + √(1−α)e^{−iφ}|2⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerSetting {
    pub reflectivity: f64,
    pub phase: f64,
}

impl AnalyzerSetting {
    pub fn new(reflectivity: f64, phase: f64) -> Result<Self, MultiportError> {
        if !(0.0..=1.0).contains(&reflectivity) || reflectivity.is_nan() {
            return Err(MultiportError::BadReflectivity(reflectivity));
        }
        Ok(Self {
            reflectivity,
            phase,
        })
    }

    /// Computational-basis measurement (α = 1).
    pub fn computational() -> Self {
        Self {
            reflectivity: 1.0,
            phase: 0.0,
        }
    }

    /// Balanced splitter with phase φ.
    pub fn balanced(phase: f64) -> Self {
        Self {
            reflectivity: 0.5,
            phase,
        }
    }
}

/// Embed one cell into the N-dimensional identity. The 2×2 block on
/// (mode_a, mode_b) is
/// `[[√R, √(1−R)·e^{−iφ}], [√(1−R)·e^{iφ}, −√R]]`.
pub fn cell_unitary(cell: &BeamsplitterCell, dim: usize) -> Result<CMat, MultiportError> {
    if cell.mode_b >= dim || cell.mode_a >= cell.mode_b {
        return Err(MultiportError::BadModes {
            a: cell.mode_a,
            b: cell.mode_b,
            dim,
        });
    }
    if !(0.0..=1.0).contains(&cell.reflectivity) {
        return Err(MultiportError::BadReflectivity(cell.reflectivity));
    }
    let mut u = identity(dim);
    let sr = cell.reflectivity.sqrt();
    let st = (1.0 - cell.reflectivity).sqrt();
    let (a, b) = (cell.mode_a, cell.mode_b);
    u[[a, a]] = C64::new(sr, 0.0);
    u[[a, b]] = C64::from_polar(st, -cell.phase);
    u[[b, a]] = C64::from_polar(st, cell.phase);
    u[[b, b]] = C64::new(-sr, 0.0);
    Ok(u)
}

/// Compose the mesh: cells applied in list order, then the diagonal of
/// output phases.
pub fn mesh_to_unitary(mesh: &ReckMesh) -> CMat {
    let n = mesh.dim;
    let mut acc = identity(n);
    for cell in &mesh.cells {
        let u = cell_unitary(cell, n).expect("mesh invariants guarantee valid cells");
        acc = u.dot(&acc);
    }
    for j in 0..n {
        let ph = C64::from_polar(1.0, mesh.output_phases[j]);
        for k in 0..n {
            acc[[j, k]] *= ph;
        }
    }
    acc
}

/// Compile a unitary into a triangular mesh.
///
/// Works on V = U†, clearing each column from the bottom row upward with
/// adjacent-mode cells; the residual diagonal becomes the output phases.
/// Entries already below 1e-14 emit a pass-through cell (R = 1, φ = 0) so the
/// cell count is always exactly N(N−1)/2.
pub fn reck_decompose(u: &CMat) -> Result<ReckMesh, MultiportError> {
    let n = u.nrows();
    if n < 2 || u.ncols() != n {
        return Err(MultiportError::BadDimension(n));
    }
    let deviation = unitarity_deviation(u);
    if deviation > 1e-8 {
        return Err(MultiportError::NotUnitary { deviation });
    }

    let mut v = dagger(u);
    let mut cells = Vec::with_capacity(n * (n - 1) / 2);
    for col in 0..(n - 1) {
        for row in ((col + 1)..n).rev() {
            let va = v[[row - 1, col]];
            let vb = v[[row, col]];
            let cell = if vb.norm() < 1e-14 {
                BeamsplitterCell {
                    mode_a: row - 1,
                    mode_b: row,
                    reflectivity: 1.0,
                    phase: 0.0,
                }
            } else {
                let na2 = va.norm_sqr();
                let nb2 = vb.norm_sqr();
                let r = (na2 / (na2 + nb2)).clamp(0.0, 1.0);
                let alpha = if va.norm() == 0.0 { 0.0 } else { va.arg() };
                let phase = (vb.arg() - alpha).rem_euclid(TAU);
                BeamsplitterCell {
                    mode_a: row - 1,
                    mode_b: row,
                    reflectivity: r,
                    phase,
                }
            };
            // Apply the cell to rows (row-1, row) of V.
            let g = cell_unitary(&cell, n).expect("constructed cell is valid");
            let (a, b) = (cell.mode_a, cell.mode_b);
            for k in 0..n {
                let ra = v[[a, k]];
                let rb = v[[b, k]];
                v[[a, k]] = g[[a, a]] * ra + g[[a, b]] * rb;
                v[[b, k]] = g[[b, a]] * ra + g[[b, b]] * rb;
            }
            cells.push(cell);
        }
    }
    // G_M … G_1 · U† = D₀, so U = D₀† · G_M … G_1: output phase −arg(D₀ⱼⱼ).
    let output_phases: Vec<f64> = (0..n).map(|j| (-v[[j, j]].arg()).rem_euclid(TAU)).collect();
    ReckMesh::new(n, cells, output_phases)
}

/// Balanced N-mode Fourier multiport: F_{jk} = e^{2πi·jk/N}/√N.
pub fn fourier_matrix(n: usize) -> Result<CMat, MultiportError> {
    if n < 2 {
        return Err(MultiportError::BadDimension(n));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut f = CMat::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            let angle = TAU * (j as f64) * (k as f64) / (n as f64);
            f[[j, k]] = C64::from_polar(norm, angle);
        }
    }
    Ok(f)
}

/// 2×2 analyzer unitary. Row 0 is the conjugate of the projected state's
/// amplitudes, so the output-0 detection amplitude for a state |ψ⟩ equals
/// ⟨P_{α,φ}|ψ⟩ with |P_{α,φ}⟩ = √α|1⟩ + √(1−α)e^{−iφ}|2⟩ exactly.
pub fn analyzer_unitary(setting: &AnalyzerSetting) -> CMat {
    let sa = setting.reflectivity.sqrt();
    let st = (1.0 - setting.reflectivity).sqrt();
    let mut u = CMat::zeros((2, 2));
    u[[0, 0]] = C64::new(sa, 0.0);
    u[[0, 1]] = C64::from_polar(st, setting.phase);
    u[[1, 0]] = C64::from_polar(st, -setting.phase);
    u[[1, 1]] = C64::new(-sa, 0.0);
    u
}

/// Haar-random unitary: complex Ginibre matrix orthonormalized by modified
/// Gram-Schmidt with positive-real diagonal normalization.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let mut g = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            g[[i, j]] = C64::new(re, im);
        }
    }
    for j in 0..n {
        for k in 0..j {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..n {
                dot += g[[i, k]].conj() * g[[i, j]];
            }
            for i in 0..n {
                let gk = g[[i, k]];
                g[[i, j]] -= dot * gk;
            }
        }
        let norm: f64 = (0..n).map(|i| g[[i, j]].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            g[[i, j]] /= norm;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_reflection_cell_is_diag_1_m1() {
        let cell = BeamsplitterCell::new(0, 1, 1.0, 0.0).unwrap();
        let u = cell_unitary(&cell, 2).unwrap();
        assert_eq!(u[[0, 0]], C64::new(1.0, 0.0));
        assert_eq!(u[[1, 1]], C64::new(-1.0, 0.0));
        assert_eq!(u[[0, 1]], C64::new(0.0, 0.0));
        assert_eq!(u[[1, 0]], C64::new(0.0, 0.0));
    }

    #[test]
    fn balanced_cell_has_uniform_moduli() {
        let cell = BeamsplitterCell::new(0, 1, 0.5, 0.0).unwrap();
        let u = cell_unitary(&cell, 2).unwrap();
        for e in u.iter() {
            assert_relative_eq!(e.norm(), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn random_cells_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let r: f64 = rng.random_range(0.0..=1.0);
            let phi: f64 = rng.random_range(0.0..TAU);
            let cell = BeamsplitterCell::new(1, 2, r, phi).unwrap();
            let u = cell_unitary(&cell, 4).unwrap();
            assert!(unitarity_deviation(&u) < 1e-14);
        }
    }

    #[test]
    fn cell_mode_validation() {
        let cell = BeamsplitterCell {
            mode_a: 2,
            mode_b: 3,
            reflectivity: 0.5,
            phase: 0.0,
        };
        assert!(matches!(
            cell_unitary(&cell, 3),
            Err(MultiportError::BadModes { .. })
        ));
        assert!(BeamsplitterCell::new(2, 1, 0.5, 0.0).is_err());
        assert!(BeamsplitterCell::new(0, 1, 1.2, 0.0).is_err());
    }

    #[test]
    fn empty_effect_mesh_gives_identity() {
        // All cells R = 1, φ = 0 produce a diagonal of ±1; compensating
        // output phases restore the identity.
        let n = 3;
        let cells: Vec<BeamsplitterCell> = vec![
            BeamsplitterCell::new(1, 2, 1.0, 0.0).unwrap(),
            BeamsplitterCell::new(0, 1, 1.0, 0.0).unwrap(),
            BeamsplitterCell::new(1, 2, 1.0, 0.0).unwrap(),
        ];
        let mut acc = identity(n);
        for c in &cells {
            acc = cell_unitary(c, n).unwrap().dot(&acc);
        }
        let phases: Vec<f64> = (0..n).map(|j| -acc[[j, j]].arg()).collect();
        let mesh = ReckMesh::new(n, cells, phases).unwrap();
        assert!(max_abs_diff(&mesh_to_unitary(&mesh), &identity(n)) < 1e-12);
    }

    #[test]
    fn single_cell_mesh_is_the_balanced_analyzer() {
        // One balanced cell and no output phases is exactly the α = 1/2,
        // φ = 0 analyzer.
        let mesh = ReckMesh::new(
            2,
            vec![BeamsplitterCell::new(0, 1, 0.5, 0.0).unwrap()],
            vec![0.0, 0.0],
        )
        .unwrap();
        let u = mesh_to_unitary(&mesh);
        let a = analyzer_unitary(&AnalyzerSetting::balanced(0.0));
        assert!(max_abs_diff(&u, &a) < 1e-15);
    }

    #[test]
    fn decompose_identity() {
        let mesh = reck_decompose(&identity(3)).unwrap();
        assert_eq!(mesh.cells.len(), 3);
        assert!(max_abs_diff(&mesh_to_unitary(&mesh), &identity(3)) < 1e-12);
    }

    #[test]
    fn decompose_fourier4_roundtrip() {
        let f = fourier_matrix(4).unwrap();
        let mesh = reck_decompose(&f).unwrap();
        assert_eq!(mesh.cells.len(), 6);
        assert!(max_abs_diff(&mesh_to_unitary(&mesh), &f) < 1e-10);
    }

    #[test]
    fn decompose_haar_random_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=8 {
            for _ in 0..10 {
                let u = haar_unitary(n, &mut rng);
                assert!(unitarity_deviation(&u) < 1e-12);
                let mesh = reck_decompose(&u).unwrap();
                assert_eq!(mesh.cells.len(), n * (n - 1) / 2);
                assert!(
                    max_abs_diff(&mesh_to_unitary(&mesh), &u) < 1e-10,
                    "round trip failed for n={n}"
                );
            }
        }
    }

    #[test]
    fn decompose_rejects_non_unitary() {
        let mut m = identity(3);
        m[[0, 0]] = C64::new(1.5, 0.0);
        match reck_decompose(&m) {
            Err(MultiportError::NotUnitary { deviation }) => assert!(deviation > 1.0),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn fourier_matrix_examples() {
        let f2 = fourier_matrix(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_relative_eq!(f2[[0, 0]].re, s, epsilon = 1e-15);
        assert_relative_eq!(f2[[1, 1]].re, -s, epsilon = 1e-12);

        let f4 = fourier_matrix(4).unwrap();
        for e in f4.iter() {
            assert_relative_eq!(e.norm(), 0.5, epsilon = 1e-14);
        }

        for n in 2..=16 {
            let f = fourier_matrix(n).unwrap();
            assert!(unitarity_deviation(&f) < 1e-12, "n={n}");
        }
        assert!(fourier_matrix(1).is_err());
    }

    #[test]
    fn analyzer_projects_onto_its_own_state() {
        for &(alpha, phi) in &[(0.5, 0.0), (0.3, 1.2), (0.8, -2.5), (1.0, 0.4)] {
            let u = analyzer_unitary(&AnalyzerSetting::new(alpha, phi).unwrap());
            // The projected state: (√α, √(1−α)e^{−iφ}).
            let psi = [
                C64::new(alpha.sqrt(), 0.0),
                C64::from_polar((1.0 - alpha).sqrt(), -phi),
            ];
            let amp = u[[0, 0]] * psi[0] + u[[0, 1]] * psi[1];
            assert_relative_eq!(amp.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn analyzer_unitary_on_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let alpha = i as f64 / 9.0;
                let phi = TAU * (j as f64) / 10.0;
                let u = analyzer_unitary(&AnalyzerSetting::new(alpha, phi).unwrap());
                assert!(unitarity_deviation(&u) < 1e-14);
            }
        }
        let u = analyzer_unitary(&AnalyzerSetting::computational());
        assert_relative_eq!(u[[0, 0]].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(u[[0, 1]].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mesh_text_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(4, &mut rng);
        let mesh = reck_decompose(&u).unwrap();
        let text = mesh.to_text();
        let back = ReckMesh::from_text(&text).unwrap();
        assert_eq!(mesh.dim, back.dim);
        assert_eq!(mesh.cells.len(), back.cells.len());
        assert!(max_abs_diff(&mesh_to_unitary(&back), &mesh_to_unitary(&mesh)) < 1e-15);
    }

    #[test]
    fn mesh_text_rejects_garbage() {
        assert!(ReckMesh::from_text("0 1 0.5\nout 0 0\n").is_err());
        assert!(ReckMesh::from_text("0 1 0.5 0.0\n").is_err());
    }
}
