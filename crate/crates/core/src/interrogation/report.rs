use std::fmt::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{log_derivative, ModeProbeResult};
use crate::{Error, Result};

/// `M(k, k') = c_k(t)` of the probe `k'` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossModeMatrix {
    pub time: f64,
    pub probes: Vec<i64>,
    pub n_modes: usize,
    /// `columns[p][k + n_modes]`.
    pub columns: Vec<Vec<Complex64>>,
}

impl CrossModeMatrix {
    pub fn entry(&self, k: i64, column: usize) -> Complex64 {
        self.columns[column][(k + self.n_modes as i64) as usize]
    }

    /// `sum_{k != k'} |M|^2 / sum_k |M|^2` for each column.
    pub fn off_diagonal_ratios(&self) -> Vec<f64> {
        self.probes
            .iter()
            .zip(&self.columns)
            .map(|(&p, col)| off_diagonal_ratio(col, p, self.n_modes))
            .collect()
    }
}

fn off_diagonal_ratio(col: &[Complex64], probe: i64, n_modes: usize) -> f64 {
    let total: f64 = col.iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let diag = col[(probe + n_modes as i64) as usize].norm_sqr();
    (total - diag) / total
}

pub fn cross_mode_matrix(probes: &[ModeProbeResult], time_index: usize) -> Result<CrossModeMatrix> {
    let first = probes
        .first()
        .ok_or_else(|| Error::Precondition("no probes given".into()))?;
    for p in probes {
        if p.grid != first.grid || p.times != first.times {
            return Err(Error::Consistency("probes use different grids or times".into()));
        }
    }
    if time_index >= first.times.len() {
        return Err(Error::Shape(format!("time index {time_index} out of range")));
    }
    Ok(CrossModeMatrix {
        time: first.times[time_index],
        probes: probes.iter().map(|p| p.probe).collect(),
        n_modes: first.grid.n_modes(),
        columns: probes
            .iter()
            .map(|p| p.coefficients[time_index].clone())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Largest admissible off-diagonal energy ratio.
    #[serde(default = "d_shift")]
    pub shift_invariance: f64,
    /// Largest admissible relative variation of the log derivative.
    #[serde(default = "d_time")]
    pub time_independence: f64,
}

fn d_shift() -> f64 {
    1e-8
}
fn d_time() -> f64 {
    1e-2
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            shift_invariance: d_shift(),
            time_independence: d_time(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeVerdict {
    pub probe: i64,
    /// Largest off-diagonal energy ratio over the snapshots.
    pub off_diagonal_ratio: f64,
    pub log_derivative_variation: f64,
    pub real_part_variation: f64,
    pub mean_log_derivative: (f64, f64),
    pub shift_invariant: bool,
    pub time_independent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub thresholds: Thresholds,
    pub modes: Vec<ModeVerdict>,
}

impl AssumptionReport {
    pub fn shift_invariant(&self) -> bool {
        self.modes.iter().all(|m| m.shift_invariant)
    }

    pub fn time_independent(&self) -> bool {
        self.modes.iter().all(|m| m.time_independent)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.modes.iter().map(|m| m.off_diagonal_ratio).fold(0.0, f64::max)
    }

    pub fn max_variation(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.log_derivative_variation)
            .fold(0.0, f64::max)
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
        let mut s = String::new();
        let _ = writeln!(s, "shift_invariance_threshold = {:e}", self.thresholds.shift_invariance);
        let _ = writeln!(s, "time_independence_threshold = {:e}", self.thresholds.time_independence);
        let _ = writeln!(s, "shift_invariance = {}", verdict(self.shift_invariant()));
        let _ = writeln!(s, "time_independence = {}", verdict(self.time_independent()));
        for m in &self.modes {
            let p = m.probe;
            let _ = writeln!(s, "mode.{p}.off_diagonal_ratio = {:.6e}", m.off_diagonal_ratio);
            let _ = writeln!(s, "mode.{p}.log_derivative_variation = {:.6e}", m.log_derivative_variation);
            let _ = writeln!(s, "mode.{p}.real_part_variation = {:.6e}", m.real_part_variation);
            let _ = writeln!(
                s,
                "mode.{p}.mean_log_derivative = {:.6e} {:+.6e}i",
                m.mean_log_derivative.0, m.mean_log_derivative.1
            );
            let _ = writeln!(s, "mode.{p}.shift_invariance = {}", verdict(m.shift_invariant));
            let _ = writeln!(s, "mode.{p}.time_independence = {}", verdict(m.time_independent));
        }
        s
    }
}

/// Per-probe verdicts on shift invariance and time independence.
pub fn assumption_report(probes: &[ModeProbeResult], thresholds: Thresholds) -> Result<AssumptionReport> {
    let modes = probes
        .iter()
        .map(|p| {
            let n = p.grid.n_modes();
            let off = p
                .coefficients
                .iter()
                .skip(1)
                .map(|col| off_diagonal_ratio(col, p.probe, n))
                .fold(0.0, f64::max);
            let ld = log_derivative(p, p.probe)?;
            let variation = if ld.complex_variation.is_nan() {
                f64::INFINITY
            } else {
                ld.complex_variation
            };
            Ok(ModeVerdict {
                probe: p.probe,
                off_diagonal_ratio: off,
                log_derivative_variation: variation,
                real_part_variation: ld.real_variation,
                mean_log_derivative: (ld.mean.re, ld.mean.im),
                shift_invariant: off < thresholds.shift_invariance,
                time_independent: variation < thresholds.time_independence,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AssumptionReport { thresholds, modes })
}
