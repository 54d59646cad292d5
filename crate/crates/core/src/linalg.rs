//! Small dense complex linear algebra.
//!
//! Everything in this crate works on matrices of dimension at most N² with
//! N ≤ 8 or so, which keeps a hand-rolled Jacobi eigensolver both simple and
//! accurate (off-diagonal norm converges quadratically; no external LAPACK
//! binding needed).

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub fn identity(n: usize) -> CMat {
    let mut m = CMat::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = C64::new(1.0, 0.0);
    }
    m
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    let (r, c) = m.dim();
    let mut out = CMat::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[[j, i]] = m[[i, j]].conj();
        }
    }
    out
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-norm deviation of `U†U` from the identity.
pub fn unitarity_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    let prod = dagger(u).dot(u);
    max_abs_diff(&prod, &identity(n))
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows()).map(|i| m[[i, i]]).sum()
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in ascending order and the matching
/// eigenvector columns, so that `A = V · diag(w) · V†`.
///
/// The input is treated as Hermitian: only the upper triangle and the real
/// part of the diagonal are referenced.
pub fn hermitian_eigen(a: &CMat) -> (Array1<f64>, CMat) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen: matrix must be square");
    let mut m = a.clone();
    // Symmetrize so rounding asymmetry in the input cannot bias the sweep.
    for i in 0..n {
        for j in 0..n {
            let h = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
            m[[i, j]] = h;
            m[[j, i]] = h.conj();
        }
    }
    let mut v = identity(n);
    let scale = m
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = scale * 1e-15;

    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[[p, q]].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m[[p, q]];
                let b = beta.norm();
                if b <= tol * 1e-2 {
                    continue;
                }
                // Phase factor that makes the (p,q) entry real, then a real
                // Jacobi rotation that annihilates it.
                let phase = beta / b; // e^{iθ}
                let alpha = m[[p, p]].re;
                let gamma = m[[q, q]].re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column update: [col_p, col_q] ← [col_p, col_q] · U with
                // U = [[c, s·e^{iθ}], [−s·e^{−iθ}, c]] … derived from
                // W = diag(1, e^{−iθ}) followed by the real rotation.
                let u_pp = C64::new(c, 0.0);
                let u_pq = phase * s;
                let u_qp = phase.conj() * (-s);
                let u_qq = C64::new(c, 0.0);
                // A ← U† A U (apply to rows then columns), V ← V U.
                for k in 0..n {
                    let akp = m[[k, p]];
                    let akq = m[[k, q]];
                    m[[k, p]] = akp * u_pp + akq * u_qp;
                    m[[k, q]] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = m[[p, k]];
                    let aqk = m[[q, k]];
                    m[[p, k]] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    m[[q, k]] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * u_pp + vkq * u_qp;
                    v[[k, q]] = vkp * u_pq + vkq * u_qq;
                }
                // Clean the annihilated pair against rounding drift.
                let h = (m[[p, q]] + m[[q, p]].conj()) * 0.5;
                m[[p, q]] = h;
                m[[q, p]] = h.conj();
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let w = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut vs = CMat::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vs[[k, new]] = v[[k, old]];
        }
    }
    (w, vs)
}

/// Hermitian square root of a positive semidefinite matrix. Eigenvalues
/// below zero (round-off) are clamped to zero.
pub fn psd_sqrt(a: &CMat) -> CMat {
    let n = a.nrows();
    let (w, v) = hermitian_eigen(a);
    let mut out = CMat::zeros((n, n));
    for k in 0..n {
        let s = w[k].max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] += v[[i, k]] * v[[j, k]].conj() * s;
            }
        }
    }
    out
}

/// Trace distance ½·Σ|λᵢ(a−b)|.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    let d = a - b;
    let (w, _) = hermitian_eigen(&d);
    0.5 * w.iter().map(|x| x.abs()).sum::<f64>()
}

/// Cholesky factorization `A = L·L†` with `L` lower triangular. `ridge` is
/// added to the diagonal first (pass 0.0 for an exact factorization).
pub fn cholesky_lower(a: &CMat, ridge: f64) -> Result<CMat, LinalgError> {
    let n = a.nrows();
    let mut l = CMat::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]].re + ridge;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { pivot: d, index: j });
        }
        let dj = d.sqrt();
        l[[j, j]] = C64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / dj;
        }
    }
    Ok(l)
}

/// Lower-triangular factor `T` with `T†·T = A` for Hermitian PSD `A`.
///
/// Obtained from the ordinary Cholesky factorization of the index-reversed
/// matrix: with `J` the exchange permutation and `J·A·J = L·L†`, the matrix
/// `T = J·L†·J` is lower triangular and satisfies `T†T = A`.
pub fn lower_tri_factor(a: &CMat, ridge: f64) -> Result<CMat, LinalgError> {
    let n = a.nrows();
    let mut b = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            b[[i, j]] = a[[n - 1 - i, n - 1 - j]];
        }
    }
    let l = cholesky_lower(&b, ridge)?;
    let mut t = CMat::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            // (J L† J)[i][j] = conj(L[n-1-j][n-1-i])
            t[[i, j]] = l[[n - 1 - j, n - 1 - i]].conj();
        }
    }
    Ok(t)
}

/// Solve the real symmetric positive-definite system `A·x = b` in place via
/// Cholesky. Used by the tomography optimizer's normal equations.
pub fn solve_spd_real(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>, LinalgError> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { pivot: d, index: j });
        }
        let dj = d.sqrt();
        l[[j, j]] = dj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / dj;
        }
    }
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Text serialization: `dim=<d>` header, then d rows of d complex literals
// `<re><+/-><im>j` at 17 significant digits (exact f64 round trip).
// ---------------------------------------------------------------------------

/// Format one complex number as `re+imj` with 17 significant digits.
pub fn format_c64(z: C64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

/// Parse a `re+imj` literal.
pub fn parse_c64(s: &str) -> Result<C64, String> {
    let body = s
        .strip_suffix('j')
        .ok_or_else(|| format!("complex literal `{s}` does not end in j"))?;
    let bytes = body.as_bytes();
    let mut split = None;
    for (i, &b) in bytes.iter().enumerate().skip(1) {
        if (b == b'+' || b == b'-') && bytes[i - 1] != b'e' && bytes[i - 1] != b'E' {
            split = Some(i);
        }
    }
    let i = split.ok_or_else(|| format!("complex literal `{s}` has no imaginary part"))?;
    let re: f64 = body[..i]
        .parse()
        .map_err(|e| format!("bad real part in `{s}`: {e}"))?;
    let im: f64 = body[i..]
        .parse()
        .map_err(|e| format!("bad imaginary part in `{s}`: {e}"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("non-finite entry `{s}`"));
    }
    Ok(C64::new(re, im))
}

/// Serialize a square complex matrix to the text format.
pub fn matrix_to_text(m: &CMat) -> String {
    let n = m.nrows();
    let mut out = format!("dim={n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_c64(m[[i, j]])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parse the text format back into a matrix.
pub fn matrix_from_text(text: &str) -> Result<CMat, LinalgError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(LinalgError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let n: usize = header
        .trim()
        .strip_prefix("dim=")
        .and_then(|v| v.parse().ok())
        .ok_or(LinalgError::Parse {
            line: 1,
            msg: format!("expected `dim=<d>` header, got `{header}`"),
        })?;
    let mut m = CMat::zeros((n, n));
    for i in 0..n {
        let line_no = i + 2;
        let line = lines.next().ok_or(LinalgError::Parse {
            line: line_no,
            msg: format!("expected {n} rows, input ended at row {i}"),
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != n {
            return Err(LinalgError::Parse {
                line: line_no,
                msg: format!("expected {n} entries, found {}", fields.len()),
            });
        }
        for (j, f) in fields.iter().enumerate() {
            m[[i, j]] = parse_c64(f).map_err(|msg| LinalgError::Parse { line: line_no, msg })?;
        }
    }
    Ok(m)
}
