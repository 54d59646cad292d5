//! Fringe-scan fitting and visibility.

use super::AnalysisError;
use serde::{Deserialize, Serialize};

/// A coincidence fringe: counts (raw or accidental-corrected) versus analyzer
/// phase, all at one integration time.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub phases: Vec<f64>,
    pub cc_counts: Vec<f64>,
    pub integration_time_s: f64,
}

impl FringeScan {
    pub fn new(
        phases: Vec<f64>,
        cc_counts: Vec<f64>,
        integration_time_s: f64,
    ) -> Result<Self, AnalysisError> {
        if phases.len() != cc_counts.len() {
            return Err(AnalysisError::BadScan(format!(
                "{} phases vs {} counts",
                phases.len(),
                cc_counts.len()
            )));
        }
        if phases.len() < 2 {
            return Err(AnalysisError::BadScan(format!(
                "need at least 2 points, got {}",
                phases.len()
            )));
        }
        if !integration_time_s.is_finite() || integration_time_s <= 0.0 {
            return Err(AnalysisError::BadScan(format!(
                "integration time must be > 0, got {integration_time_s}"
            )));
        }
        Ok(Self {
            phases,
            cc_counts,
            integration_time_s,
        })
    }
}

/// Least-squares sinusoid A + B·cos(φ + φ₀) fitted to a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase0: f64,
    /// 1σ uncertainty of the amplitude from fit residuals.
    pub amplitude_sigma: f64,
    /// Set when the amplitude is indistinguishable from zero at 2σ.
    pub zero_visibility: bool,
}

impl SinusoidFit {
    pub fn value_at(&self, phase: f64) -> f64 {
        self.offset + self.amplitude * (phase + self.phase0).cos()
    }
}

/// Fitted fringe extrema: counts A ± |B| and the phases they occur at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeExtrema {
    pub cc_max: f64,
    pub cc_min: f64,
    pub phi_max: f64,
    pub phi_min: f64,
    pub fit: SinusoidFit,
}

/// Fit A + B·cos(φ + φ₀) by linear least squares on (A, C, D) with
/// C = B·cos φ₀, D = −B·sin φ₀, then read the extrema off the model.
pub fn fringe_extrema(scan: &FringeScan) -> Result<FringeExtrema, AnalysisError> {
    let n = scan.phases.len();
    if n < 3 {
        return Err(AnalysisError::BadScan(format!(
            "sinusoid fit needs at least 3 points, got {n}"
        )));
    }
    // Normal equations for y = A + C·cosφ + D·sinφ.
    let mut m = [[0.0_f64; 3]; 3];
    let mut rhs = [0.0_f64; 3];
    for (&phi, &y) in scan.phases.iter().zip(&scan.cc_counts) {
        let basis = [1.0, phi.cos(), phi.sin()];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            rhs[r] += basis[r] * y;
        }
    }
    let sol = solve3(&m, &rhs).ok_or_else(|| {
        AnalysisError::BadScan("degenerate phase design (all phases identical?)".into())
    })?;
    let (a, c, d) = (sol[0], sol[1], sol[2]);
    let b = (c * c + d * d).sqrt();
    let phase0 = (-d).atan2(c);

    // Residual variance and the (C, D) covariance delta-propagated onto |B|.
    let dof = (n as f64 - 3.0).max(1.0);
    let ss_res: f64 = scan
        .phases
        .iter()
        .zip(&scan.cc_counts)
        .map(|(&phi, &y)| {
            let fit = a + c * phi.cos() + d * phi.sin();
            (y - fit) * (y - fit)
        })
        .sum();
    let sigma2 = ss_res / dof;
    let inv = invert3(&m).ok_or_else(|| {
        AnalysisError::BadScan("degenerate phase design (all phases identical?)".into())
    })?;
    let amplitude_sigma = if b > 0.0 {
        let gc = c / b;
        let gd = d / b;
        (sigma2 * (gc * gc * inv[1][1] + 2.0 * gc * gd * inv[1][2] + gd * gd * inv[2][2]))
            .max(0.0)
            .sqrt()
    } else {
        (sigma2 * inv[1][1].max(inv[2][2])).max(0.0).sqrt()
    };
    // Noiseless constant scans leave both b and sigma at round-off level;
    // the scale-aware floor still flags them.
    let zero_visibility = b <= 2.0 * amplitude_sigma + 1e-12 * (a.abs() + 1.0);

    let fit = SinusoidFit {
        offset: a,
        amplitude: b,
        phase0,
        amplitude_sigma,
        zero_visibility,
    };
    Ok(FringeExtrema {
        cc_max: a + b,
        cc_min: a - b,
        phi_max: (-phase0).rem_euclid(std::f64::consts::TAU),
        phi_min: (std::f64::consts::PI - phase0).rem_euclid(std::f64::consts::TAU),
        fit,
    })
}

/// Two-point visibility estimator: the scan points nearest phase-difference 0
/// and π stand in for CC_max and CC_min directly, replicating a
/// two-setting measurement instead of the full fit.
pub fn two_point_extrema(
    scan: &FringeScan,
    phi_max_at: f64,
) -> Result<(f64, f64), AnalysisError> {
    let dist = |phi: f64, target: f64| {
        let d = (phi - target).rem_euclid(std::f64::consts::TAU);
        d.min(std::f64::consts::TAU - d)
    };
    let nearest = |target: f64| {
        scan.phases
            .iter()
            .enumerate()
            .min_by(|(_, &p), (_, &q)| {
                dist(p, target)
                    .partial_cmp(&dist(q, target))
                    .expect("finite phases")
            })
            .map(|(i, _)| scan.cc_counts[i])
            .ok_or_else(|| AnalysisError::BadScan("empty scan".into()))
    };
    let cc_max = nearest(phi_max_at)?;
    let cc_min = nearest(phi_max_at + std::f64::consts::PI)?;
    Ok((cc_max, cc_min))
}

/// V = (CC_max − CC_min)/(CC_max + CC_min).
pub fn visibility(cc_max: f64, cc_min: f64) -> Result<f64, AnalysisError> {
    if cc_max + cc_min <= 0.0 {
        return Err(AnalysisError::VisibilityUndefined);
    }
    if cc_min < 0.0 || cc_max < cc_min {
        return Err(AnalysisError::BadScan(format!(
            "extrema must satisfy max >= min >= 0, got ({cc_max}, {cc_min})"
        )));
    }
    Ok((cc_max - cc_min) / (cc_max + cc_min))
}

/// Visibility with the negative-minimum floor applied: corrected fringe
/// minima can dip below zero, in which case the minimum is clamped to zero
/// and the returned flag is set.
pub fn visibility_floored(cc_max: f64, cc_min: f64) -> Result<(f64, bool), AnalysisError> {
    let floored = cc_min < 0.0;
    let v = visibility(cc_max, cc_min.max(0.0))?;
    Ok((v, floored))
}

fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let inv = invert3(m)?;
    let mut x = [0.0; 3];
    for r in 0..3 {
        for c in 0..3 {
            x[r] += inv[r][c] * rhs[c];
        }
    }
    Some(x)
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale = m
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    if det.abs() < 1e-12 * scale * scale * scale {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    inv[0][0] = cof(1, 1, 2, 2) / det;
    inv[0][1] = -cof(0, 1, 2, 2) / det;
    inv[0][2] = cof(0, 1, 1, 2) / det;
    inv[1][0] = -cof(1, 0, 2, 2) / det;
    inv[1][1] = cof(0, 0, 2, 2) / det;
    inv[1][2] = -cof(0, 0, 1, 2) / det;
    inv[2][0] = cof(1, 0, 2, 1) / det;
    inv[2][1] = -cof(0, 0, 2, 1) / det;
    inv[2][2] = cof(0, 0, 1, 1) / det;
    Some(inv)
}
