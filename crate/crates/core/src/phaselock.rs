//! Active interferometer phase stabilization.
//!
//! Residual pump light travels the same fibers as the signal photons and
//! accumulates approximately twice their phase, so its interference intensity
//! at the recombining splitter reads out the signal phase up to a slowly
//! drifting calibration offset. A one-minute characterization sweep fits that
//! offset; a discrete PID loop then drives a piezo phase actuator to hold the
//! phase, subtracting the actuator equivalent of 2π whenever the command
//! leaves the piezo range so the loop can run indefinitely.
//!
//! The drift is a Wiener process plus a linear ramp, the simplest model with
//! both a stochastic and a deterministic component. The pump photodiode sees
//! classical light, so the lock loop itself is measured noiselessly; sensor
//! noise matters only for the characterization fit, where it is configurable.

use crate::seeds::derive_seed_indexed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LockError {
    #[error("invalid lock configuration: {0}")]
    BadConfig(String),
    #[error("characterization sweep covers {got:.3} rad of pump fringe, needs at least {needed:.3}")]
    InsufficientModulation { got: f64, needed: f64 },
    #[error("fringe fit failed: modulation amplitude {0:.3e} too small")]
    FitFailed(f64),
    #[error("lock unstable: |error| = {error:.3} rad at t = {t:.3} s")]
    Unstable { t: f64, error: f64 },
}

/// Fiber phase drift: Wiener process plus linear ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftModel {
    pub random_walk_sigma_rad_per_sqrt_s: f64,
    pub linear_drift_rad_per_s: f64,
    pub seed: u64,
}

impl Default for DriftModel {
    fn default() -> Self {
        Self {
            random_walk_sigma_rad_per_sqrt_s: 0.05,
            linear_drift_rad_per_s: 0.0,
            seed: 0,
        }
    }
}

impl DriftModel {
    pub fn validate(&self) -> Result<(), LockError> {
        if self.random_walk_sigma_rad_per_sqrt_s < 0.0
            || !self.random_walk_sigma_rad_per_sqrt_s.is_finite()
        {
            return Err(LockError::BadConfig(format!(
                "random walk sigma must be >= 0, got {}",
                self.random_walk_sigma_rad_per_sqrt_s
            )));
        }
        if !self.linear_drift_rad_per_s.is_finite() {
            return Err(LockError::BadConfig("linear drift must be finite".into()));
        }
        Ok(())
    }
}

/// PID gains, loop timing, actuator span, and the pump/signal phase relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub sample_interval_s: f64,
    /// Piezo span in signal-phase radians; must exceed 2π for wrap handling.
    pub actuator_range_rad: f64,
    /// Pump phase per signal phase (≈ 2 for 775 nm light in a 1550 nm path).
    pub pump_phase_factor: f64,
    /// Ground-truth pump/signal phase offset; unknown to the controller,
    /// recovered by [`characterize`].
    pub calibration_offset_rad: f64,
    /// Gaussian intensity noise of the characterization photodiode samples.
    pub sensor_noise: f64,
}

impl Default for LockConfig {
    fn default() -> Self {
        Self {
            kp: 0.3,
            ki: 20.0,
            kd: 0.0,
            sample_interval_s: 1e-3,
            actuator_range_rad: 4.0 * PI,
            pump_phase_factor: 2.0,
            calibration_offset_rad: 0.7,
            sensor_noise: 0.01,
        }
    }
}

impl LockConfig {
    pub fn validate(&self) -> Result<(), LockError> {
        if !self.sample_interval_s.is_finite() || self.sample_interval_s <= 0.0 {
            return Err(LockError::BadConfig(format!(
                "sample interval must be > 0, got {}",
                self.sample_interval_s
            )));
        }
        if !self.actuator_range_rad.is_finite() || self.actuator_range_rad <= TAU {
            return Err(LockError::BadConfig(format!(
                "actuator range must exceed 2π, got {}",
                self.actuator_range_rad
            )));
        }
        if !self.pump_phase_factor.is_finite() || self.pump_phase_factor <= 0.0 {
            return Err(LockError::BadConfig(format!(
                "pump phase factor must be > 0, got {}",
                self.pump_phase_factor
            )));
        }
        if self.sensor_noise < 0.0 || !self.sensor_noise.is_finite() {
            return Err(LockError::BadConfig(format!(
                "sensor noise must be >= 0, got {}",
                self.sensor_noise
            )));
        }
        Ok(())
    }
}

/// Normalized pump interference intensity at signal phase φ:
/// (1 + cos(factor·φ + offset))/2.
pub fn pump_signal(signal_phase: f64, cfg: &LockConfig) -> f64 {
    (1.0 + (cfg.pump_phase_factor * signal_phase + cfg.calibration_offset_rad).cos()) / 2.0
}

/// Characterization sweep: drive the actuator across its range at the rate
/// that covers it in 60 s, record the pump intensity, and fit the fringe.
/// Returns the calibration-offset estimate in (−π, π].
pub fn characterize(cfg: &LockConfig, duration_s: f64, seed: u64) -> Result<f64, LockError> {
    cfg.validate()?;
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(LockError::BadConfig(format!(
            "characterization duration must be > 0, got {duration_s}"
        )));
    }
    let sweep_rate = cfg.actuator_range_rad / 60.0;
    let span = (sweep_rate * duration_s).min(cfg.actuator_range_rad);
    let fringe = TAU / cfg.pump_phase_factor;
    if span < fringe {
        return Err(LockError::InsufficientModulation {
            got: span,
            needed: fringe,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_indexed(seed, "phaselock.characterize", 0));
    let noise = Normal::new(0.0, cfg.sensor_noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let n = ((duration_s / cfg.sample_interval_s).floor() as usize).max(8);

    // Linear least squares on y = a + C·cos(f·u) + D·sin(f·u).
    let mut m = [[0.0_f64; 3]; 3];
    let mut rhs = [0.0_f64; 3];
    for i in 0..n {
        let u = span * (i as f64) / (n as f64 - 1.0);
        let mut y = pump_signal(u, cfg);
        if cfg.sensor_noise > 0.0 {
            y += noise.sample(&mut rng);
        }
        let arg = cfg.pump_phase_factor * u;
        let basis = [1.0, arg.cos(), arg.sin()];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            rhs[r] += basis[r] * y;
        }
    }
    let sol = solve3(&m, &rhs).ok_or(LockError::FitFailed(0.0))?;
    let amplitude = (sol[1] * sol[1] + sol[2] * sol[2]).sqrt();
    if amplitude < 0.05 {
        return Err(LockError::FitFailed(amplitude));
    }
    // y = ½ + ½cos(f·u + c) = ½ + (½cos c)·cos(f·u) − (½sin c)·sin(f·u).
    Ok((-sol[2]).atan2(sol[1]))
}

/// One loop sample of a lock run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockSample {
    pub t: f64,
    /// True phase error wrapped to (−π, π].
    pub true_error: f64,
    pub actuator: f64,
    /// A 2π wrap was applied at this step.
    pub wrapped: bool,
}

/// Full time series of a lock run.
#[derive(Debug, Clone, PartialEq)]
pub struct LockSeries {
    pub samples: Vec<LockSample>,
}

impl LockSeries {
    pub fn wrap_count(&self) -> usize {
        self.samples.iter().filter(|s| s.wrapped).count()
    }

    /// RMS of the true error over samples with t ≥ from_t.
    pub fn rms_error(&self, from_t: f64) -> f64 {
        let (sum, n) = self
            .samples
            .iter()
            .filter(|s| s.t >= from_t)
            .fold((0.0, 0usize), |(acc, n), s| {
                (acc + s.true_error * s.true_error, n + 1)
            });
        if n == 0 {
            0.0
        } else {
            (sum / n as f64).sqrt()
        }
    }

    /// CSV time series `t,true_error,actuator,wrapped`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,true_error,actuator,wrapped\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.t,
                s.true_error,
                s.actuator,
                if s.wrapped { 1 } else { 0 }
            ));
        }
        out
    }
}

fn wrap_pm_pi(x: f64) -> f64 {
    x - TAU * (x / TAU).round()
}

/// Run the PID lock for `duration_s` holding `setpoint_rad`, given the
/// calibration-offset estimate from [`characterize`].
///
/// The signal phase is drift + actuator; each step inverts the pump intensity
/// to a phase estimate on the branch nearest the previous estimate (the ×2
/// pump relation makes the inversion two-valued, and the branch chosen at
/// startup is held until a wrap event shifts it). Actuator commands outside
/// [0, range] are wrapped by 2π with the setpoint frame shifted accordingly,
/// so the error signal stays continuous across wraps.
pub fn run_lock(
    cfg: &LockConfig,
    drift: &DriftModel,
    duration_s: f64,
    setpoint_rad: f64,
    seed: u64,
    offset_estimate: f64,
) -> Result<LockSeries, LockError> {
    cfg.validate()?;
    drift.validate()?;
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(LockError::BadConfig(format!(
            "duration must be > 0, got {duration_s}"
        )));
    }
    let dt = cfg.sample_interval_s;
    let steps = (duration_s / dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_indexed(
        seed,
        "phaselock.drift",
        drift.seed,
    ));
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let step_sigma = drift.random_walk_sigma_rad_per_sqrt_s * dt.sqrt();

    let u0 = cfg.actuator_range_rad / 2.0;
    let mut drift_phase = 0.0_f64;
    let mut actuator = u0;
    let mut last_actuator = u0;
    let mut integral = 0.0_f64;
    let mut prev_err: Option<f64> = None;
    // Controller's running phase estimate; starts from its own actuator
    // setting (drift unknown, assumed zero at startup).
    let mut estimate = u0;
    let mut sp_frame = setpoint_rad;
    let integral_clamp = if cfg.ki > 0.0 {
        50.0 * cfg.actuator_range_rad / cfg.ki
    } else {
        f64::INFINITY
    };

    let mut samples = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 * dt;
        if i > 0 {
            let xi: f64 = normal.sample(&mut rng);
            drift_phase += drift.linear_drift_rad_per_s * dt + step_sigma * xi;
        }
        let phase = drift_phase + actuator;

        // Invert the pump intensity onto the branch closest to the predicted
        // phase: f·θ + c = ±ψ (mod 2π). The prediction feeds the controller's
        // own last actuator move forward, so only drift between samples can
        // move the phase off-branch.
        let predicted = estimate + (actuator - last_actuator);
        last_actuator = actuator;
        let y = pump_signal(phase, cfg);
        let psi = (2.0 * y - 1.0).clamp(-1.0, 1.0).acos();
        let period = TAU / cfg.pump_phase_factor;
        let mut best = predicted;
        let mut best_dist = f64::INFINITY;
        for sign in [1.0, -1.0] {
            let base = (sign * psi - offset_estimate) / cfg.pump_phase_factor;
            let k = ((predicted - base) / period).round();
            let cand = base + k * period;
            let dist = (cand - predicted).abs();
            if dist < best_dist {
                best_dist = dist;
                best = cand;
            }
        }
        estimate = best;

        let err = estimate - sp_frame;
        if err.abs() > 10.0 {
            return Err(LockError::Unstable {
                t,
                error: err.abs(),
            });
        }

        integral = (integral + err * dt).clamp(-integral_clamp, integral_clamp);
        let deriv = match prev_err {
            Some(prev) => (err - prev) / dt,
            None => 0.0,
        };
        prev_err = Some(err);
        let mut command = u0 - (cfg.kp * err + cfg.ki * integral + cfg.kd * deriv);

        // 2π wrap: shift the command and the setpoint frame together so the
        // error stays continuous; the integral absorbs the shift so the
        // positional output stays in range on later steps, and the phase
        // estimate follows through the actuator feedforward.
        let mut wrapped = false;
        while command > cfg.actuator_range_rad {
            command -= TAU;
            sp_frame -= TAU;
            if cfg.ki > 0.0 {
                integral += TAU / cfg.ki;
            }
            wrapped = true;
        }
        while command < 0.0 {
            command += TAU;
            sp_frame += TAU;
            if cfg.ki > 0.0 {
                integral -= TAU / cfg.ki;
            }
            wrapped = true;
        }
        actuator = command;

        samples.push(LockSample {
            t,
            true_error: wrap_pm_pi(phase - setpoint_rad),
            actuator,
            wrapped,
        });
    }
    Ok(LockSeries { samples })
}

fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-30 {
        return None;
    }
    let minor = |r1: usize, c1: usize, r2: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    let inv = [
        [minor(1, 1, 2, 2), -minor(0, 1, 2, 2), minor(0, 1, 1, 2)],
        [-minor(1, 0, 2, 2), minor(0, 0, 2, 2), -minor(0, 0, 1, 2)],
        [minor(1, 0, 2, 1), -minor(0, 0, 2, 1), minor(0, 0, 1, 1)],
    ];
    let mut x = [0.0; 3];
    for r in 0..3 {
        for c in 0..3 {
            x[r] += inv[r][c] / det * rhs[c];
        }
    }
    Some(x)
}
