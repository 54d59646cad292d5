//! Poissonian coincidence counting with accidentals.
//!
//! Probability tables from `sourcesim` are converted to detector-pair rates,
//! then to integer count records drawn from independent Poisson laws. The
//! total accidental rate is spread uniformly over the N² detector pairs (the
//! split lives in [`expected_rates`] alone so a non-uniform model can replace
//! it); the per-cell accidental expectation travels with every record so the
//! analysis stage can subtract it.
//!
//! Determinism contract: counts are drawn cell by cell in row-major order
//! from a ChaCha8 stream seeded with the given seed, using the Poisson
//! sampler of the exact `rand_distr` version pinned in the workspace
//! manifest. Identical (rates, T, seed) always reproduce identical records.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("invalid rate parameter: {0}")]
    BadParameter(String),
    #[error("probability table must sum to 1, got {0}")]
    BadProbabilities(f64),
    #[error("negative probability entry {0}")]
    NegativeProbability(f64),
    #[error("CAR undefined: accidental estimate sums to zero")]
    CarUndefined,
    #[error("count CSV error on line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Detected-rate and accidental parameters of the counting system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    /// Total detected true-coincidence rate, Hz.
    pub true_cc_rate_hz: f64,
    /// Total accidental coincidence rate, Hz. Ignored when singles rates are
    /// given.
    pub accidental_rate_hz: f64,
    /// Coincidence window, ns.
    pub coincidence_window_ns: f64,
    /// Optional singles rates (arm A, arm B), Hz; when present the accidental
    /// rate is derived as singles_A × singles_B × window.
    pub singles_rate_hz: Option<[f64; 2]>,
    /// Detector efficiency per arm. Only rescales rates derived from
    /// physical pair rates; never affects normalized probabilities.
    pub detector_efficiency: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            true_cc_rate_hz: 150.0,
            accidental_rate_hz: 1.47,
            coincidence_window_ns: 2.5,
            singles_rate_hz: None,
            detector_efficiency: 0.10,
        }
    }
}

impl RatesConfig {
    pub fn validate(&self) -> Result<(), CountingError> {
        let check = |v: f64, name: &str| {
            if v < 0.0 || !v.is_finite() {
                Err(CountingError::BadParameter(format!(
                    "{name} must be >= 0 and finite, got {v}"
                )))
            } else {
                Ok(())
            }
        };
        check(self.true_cc_rate_hz, "true_cc_rate_hz")?;
        check(self.accidental_rate_hz, "accidental_rate_hz")?;
        check(self.detector_efficiency, "detector_efficiency")?;
        if !self.coincidence_window_ns.is_finite() || self.coincidence_window_ns <= 0.0 {
            return Err(CountingError::BadParameter(format!(
                "coincidence_window_ns must be > 0, got {}",
                self.coincidence_window_ns
            )));
        }
        if let Some([a, b]) = self.singles_rate_hz {
            check(a, "singles_rate_hz[0]")?;
            check(b, "singles_rate_hz[1]")?;
        }
        Ok(())
    }

    /// Total accidental rate: derived from singles × window when singles are
    /// supplied, otherwise the configured value.
    pub fn accidental_total_hz(&self) -> f64 {
        match self.singles_rate_hz {
            Some([a, b]) => a * b * self.coincidence_window_ns * 1e-9,
            None => self.accidental_rate_hz,
        }
    }
}

/// Detected coincidence rate implied by physical source numbers: the created
/// pair rate attenuated by per-arm loss and detector efficiency on both arms.
pub fn detected_cc_rate(pair_rate_hz: f64, arm_loss_db: f64, detector_efficiency: f64) -> f64 {
    let transmission = 10f64.powf(-arm_loss_db / 10.0);
    pair_rate_hz * (transmission * detector_efficiency).powi(2)
}

/// Expected detector-pair rates: the true part proportional to the
/// probability table plus the uniform accidental floor.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedRates {
    /// Total rate per detector pair, Hz.
    pub total: Array2<f64>,
    /// Accidental component per detector pair, Hz.
    pub accidental: Array2<f64>,
}

/// r(i,j) = true_cc · P(i,j) + accidental/N².
pub fn expected_rates(
    probs: &Array2<f64>,
    rates: &RatesConfig,
) -> Result<ExpectedRates, CountingError> {
    rates.validate()?;
    for &p in probs.iter() {
        if p < 0.0 {
            return Err(CountingError::NegativeProbability(p));
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(CountingError::BadProbabilities(sum));
    }
    let cells = probs.len() as f64;
    let acc_cell = rates.accidental_total_hz() / cells;
    let total = probs.mapv(|p| rates.true_cc_rate_hz * p + acc_cell);
    let accidental = Array2::from_elem(probs.dim(), acc_cell);
    Ok(ExpectedRates { total, accidental })
}

/// One integrated measurement setting: integer counts per detector pair and
/// the accidental expectation that was folded into them.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub setting_label: String,
    pub outcome_counts: Array2<u64>,
    pub integration_time_s: f64,
    pub accidental_estimate: Array2<f64>,
}

impl CountRecord {
    pub fn total_counts(&self) -> u64 {
        self.outcome_counts.iter().sum()
    }

    pub fn total_accidental(&self) -> f64 {
        self.accidental_estimate.iter().sum()
    }
}

/// Draw one count record: each cell independently Poisson(rate·T).
pub fn sample_counts(
    rates: &ExpectedRates,
    setting_label: &str,
    integration_time_s: f64,
    seed: u64,
) -> CountRecord {
    assert!(
        integration_time_s > 0.0,
        "integration time must be positive"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = rates.total.mapv(|r| {
        let lambda = r * integration_time_s;
        if lambda > 0.0 {
            let draw: f64 = Poisson::new(lambda)
                .expect("positive finite mean")
                .sample(&mut rng);
            draw as u64
        } else {
            0
        }
    });
    CountRecord {
        setting_label: setting_label.to_string(),
        outcome_counts: counts,
        integration_time_s,
        accidental_estimate: rates.accidental.mapv(|a| a * integration_time_s),
    }
}

/// Counts minus the accidental estimate, per cell. Negative results are
/// preserved; downstream estimators decide how to handle them.
pub fn subtract_accidentals(record: &CountRecord) -> Array2<f64> {
    let mut out = record.outcome_counts.mapv(|c| c as f64);
    out -= &record.accidental_estimate;
    out
}

/// Coincidence-to-accidental ratio of one record:
/// (total − accidentals) / accidentals.
pub fn car(record: &CountRecord) -> Result<f64, CountingError> {
    let acc = record.total_accidental();
    if acc <= 0.0 {
        return Err(CountingError::CarUndefined);
    }
    Ok((record.total_counts() as f64 - acc) / acc)
}

// ---------------------------------------------------------------------------
// CSV: `setting,i,j,counts,acc_estimate,T` — the exchange format every
// analysis entry point consumes, so externally produced count files can be
// analyzed the same way as simulated ones.
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "setting,i,j,counts,acc_estimate,T";

/// Serialize records to CSV text.
pub fn records_to_csv(records: &[CountRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        debug_assert!(
            !r.setting_label.contains(',') && !r.setting_label.contains('\n'),
            "setting labels must stay CSV-safe"
        );
        let (ni, nj) = r.outcome_counts.dim();
        for i in 0..ni {
            for j in 0..nj {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.setting_label,
                    i,
                    j,
                    r.outcome_counts[[i, j]],
                    r.accidental_estimate[[i, j]],
                    r.integration_time_s
                ));
            }
        }
    }
    out
}

/// Parse CSV text back into records. Rows are grouped by consecutive setting
/// label; each group must fill a complete square grid.
pub fn records_from_csv(text: &str) -> Result<Vec<CountRecord>, CountingError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CountingError::Csv {
        line: 1,
        msg: "empty file".into(),
    })?;
    if header.trim() != CSV_HEADER {
        return Err(CountingError::Csv {
            line: 1,
            msg: format!("expected header `{CSV_HEADER}`, got `{}`", header.trim()),
        });
    }

    struct Group {
        label: String,
        rows: Vec<(usize, usize, u64, f64)>,
        time: f64,
        first_line: usize,
    }
    let mut groups: Vec<Group> = Vec::new();

    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CountingError::Csv {
                line: line_no,
                msg: format!("expected 6 columns, found {}", fields.len()),
            });
        }
        let bad = |what: &str, e: String| CountingError::Csv {
            line: line_no,
            msg: format!("bad {what}: {e}"),
        };
        let i: usize = fields[1].parse().map_err(|e| bad("i", format!("{e}")))?;
        let j: usize = fields[2].parse().map_err(|e| bad("j", format!("{e}")))?;
        let counts: u64 = fields[3]
            .parse()
            .map_err(|e| bad("counts", format!("{e}")))?;
        let acc: f64 = fields[4]
            .parse()
            .map_err(|e| bad("acc_estimate", format!("{e}")))?;
        let t: f64 = fields[5].parse().map_err(|e| bad("T", format!("{e}")))?;
        if !t.is_finite() || t <= 0.0 {
            return Err(bad("T", format!("integration time must be > 0, got {t}")));
        }
        if acc < 0.0 {
            return Err(bad("acc_estimate", format!("must be >= 0, got {acc}")));
        }
        let label = fields[0].to_string();
        match groups.last_mut() {
            Some(g) if g.label == label => {
                if (g.time - t).abs() > 0.0 {
                    return Err(CountingError::Csv {
                        line: line_no,
                        msg: format!(
                            "integration time {t} differs from {} earlier in setting `{label}`",
                            g.time
                        ),
                    });
                }
                g.rows.push((i, j, counts, acc));
            }
            _ => groups.push(Group {
                label,
                rows: vec![(i, j, counts, acc)],
                time: t,
                first_line: line_no,
            }),
        }
    }

    let mut records = Vec::with_capacity(groups.len());
    for g in groups {
        let n = g
            .rows
            .iter()
            .map(|&(i, j, _, _)| i.max(j) + 1)
            .max()
            .unwrap_or(0);
        if g.rows.len() != n * n {
            return Err(CountingError::Csv {
                line: g.first_line,
                msg: format!(
                    "setting `{}` has {} rows, expected a full {n}×{n} grid",
                    g.label,
                    g.rows.len()
                ),
            });
        }
        let mut counts = Array2::<u64>::zeros((n, n));
        let mut acc = Array2::<f64>::zeros((n, n));
        let mut seen = Array2::<bool>::from_elem((n, n), false);
        for (i, j, c, a) in g.rows {
            if seen[[i, j]] {
                return Err(CountingError::Csv {
                    line: g.first_line,
                    msg: format!("setting `{}` defines cell ({i},{j}) twice", g.label),
                });
            }
            seen[[i, j]] = true;
            counts[[i, j]] = c;
            acc[[i, j]] = a;
        }
        records.push(CountRecord {
            setting_label: g.label,
            outcome_counts: counts,
            integration_time_s: g.time,
            accidental_estimate: acc,
        });
    }
    Ok(records)
}
