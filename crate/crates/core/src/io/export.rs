use std::str::FromStr;

use num_complex::Complex64;

use super::ColumnarTable;
use crate::calibration::{histogram, Chain, IterationRecord, ObservationSet, SensitivityReport};
use crate::highfid::UpscaledSeries;
use crate::interrogation::{LogDerivativeSeries, ModeProbeResult};
use crate::spectral::{rescale, OperatorSpectrum, SpectralField, WaveGrid};
use crate::{Error, Result};

pub const SPECTRUM_SCHEMA: &str = "spectrum";
pub const COEFFICIENTS_SCHEMA: &str = "coefficients";
pub const PROFILE_SCHEMA: &str = "profile";
pub const OBSERVATIONS_SCHEMA: &str = "observations";
pub const CHAIN_SCHEMA: &str = "chain";
pub const CONVERGENCE_SCHEMA: &str = "convergence";
pub const HISTOGRAM_SCHEMA: &str = "histogram";
pub const LOG_DERIVATIVE_SCHEMA: &str = "log_derivative";
pub const UPSCALED_SCHEMA: &str = "upscaled";
pub const PROBE_SCHEMA: &str = "probe";
pub const SENSITIVITY_SCHEMA: &str = "sensitivity";

/// Figure-oriented table kinds accepted by `--plot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Spectrum,
    Snapshot,
    Histogram,
    LogDerivative,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrum" => Ok(Self::Spectrum),
            "snapshot" => Ok(Self::Snapshot),
            "histogram" => Ok(Self::Histogram),
            "log-derivative" | "log_derivative" => Ok(Self::LogDerivative),
            other => Err(Error::Config(format!(
                "unknown plot kind `{other}` (expected spectrum, snapshot, histogram, log-derivative)"
            ))),
        }
    }
}

fn stamp(t: &mut ColumnarTable, hash: &str) {
    t.set("config_hash", hash);
}

fn grid_meta(t: &mut ColumnarTable, g: &WaveGrid) {
    t.set("domain_length", format!("{:.16e}", g.domain_length()));
    t.set("n_modes", g.n_modes());
    t.set("n_points", g.n_points());
}

fn read_grid(t: &ColumnarTable) -> Result<WaveGrid> {
    let l = t.get_f64("domain_length")?;
    let n = t.get_f64("n_modes")? as usize;
    let p = t.get_f64("n_points")? as usize;
    WaveGrid::new(l, n, p).map_err(|e| Error::Format(e.to_string()))
}

/// Rows `k = 1..n_modes` with the polar and rescaled coordinates of `mu_k`.
pub fn spectrum_table(spec: &OperatorSpectrum, hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(
        SPECTRUM_SCHEMA,
        &["k", "re_mu", "im_mu", "r", "theta", "r_star", "theta_star"],
    );
    stamp(&mut t, hash);
    grid_meta(&mut t, spec.grid());
    let rs = rescale(spec)?;
    for k in 1..=spec.grid().n_modes() {
        let mu = spec.mu(k as i64);
        t.push(vec![
            k as f64,
            mu.re,
            mu.im,
            spec.radii()[k - 1],
            spec.arguments()[k - 1],
            rs.r_star[k - 1],
            rs.theta_star[k - 1],
        ])?;
    }
    Ok(t)
}

pub fn spectrum_from_table(t: &ColumnarTable) -> Result<OperatorSpectrum> {
    t.require_schema(SPECTRUM_SCHEMA)?;
    let grid = read_grid(t)?;
    let ks = t.column("k")?;
    if ks.len() != grid.n_modes() || ks.iter().enumerate().any(|(i, &k)| k != (i + 1) as f64) {
        return Err(Error::Format("spectrum rows must cover k = 1..n_modes in order".into()));
    }
    OperatorSpectrum::new(grid, t.column("r")?, t.column("theta")?)
        .map_err(|e| Error::Format(e.to_string()))
}

/// Fourier coefficients `k = 0..n_modes` of a real field.
pub fn coefficients_table(field: &SpectralField, hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(COEFFICIENTS_SCHEMA, &["k", "re_c", "im_c"]);
    stamp(&mut t, hash);
    grid_meta(&mut t, field.grid());
    t.set("time", format!("{:.16e}", field.time()));
    for (k, c) in field.half().iter().enumerate() {
        t.push(vec![k as f64, c.re, c.im])?;
    }
    Ok(t)
}

pub fn field_from_table(t: &ColumnarTable) -> Result<SpectralField> {
    t.require_schema(COEFFICIENTS_SCHEMA)?;
    let grid = read_grid(t)?;
    let re = t.column("re_c")?;
    let im = t.column("im_c")?;
    let half: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
    SpectralField::from_half(grid, &half, t.get_f64("time")?).map_err(|e| Error::Format(e.to_string()))
}

/// Real-space samples `(x, c)` at one time.
pub fn profile_table(x: &[f64], values: &[f64], time: f64, hash: &str) -> Result<ColumnarTable> {
    if x.len() != values.len() {
        return Err(Error::Shape("profile coordinates and values differ in length".into()));
    }
    let mut t = ColumnarTable::new(PROFILE_SCHEMA, &["x", "c"]);
    stamp(&mut t, hash);
    t.set("time", format!("{time:.16e}"));
    for (a, b) in x.iter().zip(values) {
        t.push(vec![*a, *b])?;
    }
    Ok(t)
}

pub fn observations_table(obs: &ObservationSet, hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(OBSERVATIONS_SCHEMA, &["x", "t", "value"]);
    stamp(&mut t, hash);
    if let Some(s) = obs.noise {
        t.set("sigma", format!("{s:.16e}"));
    }
    for (p, v) in obs.points.iter().zip(&obs.values) {
        t.push(vec![p.x, p.t, *v])?;
    }
    Ok(t)
}

pub fn observations_from_table(t: &ColumnarTable) -> Result<ObservationSet> {
    use crate::calibration::ObsPoint;
    t.require_schema(OBSERVATIONS_SCHEMA)?;
    let xs = t.column("x")?;
    let ts = t.column("t")?;
    let points = xs.iter().zip(&ts).map(|(&x, &t)| ObsPoint { x, t }).collect();
    let sigma = match t.get("sigma") {
        Some(_) => Some(t.get_f64("sigma")?),
        None => None,
    };
    ObservationSet::new(points, t.column("value")?, sigma)
}

/// One row per recorded state: `step, log_post, p0, p1, ...`.
pub fn chain_table(chain: &Chain, names: &[String], hash: &str) -> Result<ColumnarTable> {
    let mut cols: Vec<&str> = vec!["step", "log_post"];
    cols.extend(names.iter().map(|s| s.as_str()));
    let mut t = ColumnarTable::new(CHAIN_SCHEMA, &cols);
    stamp(&mut t, hash);
    t.set("seed", chain.seed);
    t.set("acceptance_rate", format!("{:.16e}", chain.acceptance_rate));
    t.set("step_size", format!("{:.16e}", chain.step_size));
    for (i, (s, lp)) in chain.states.iter().zip(&chain.log_posterior).enumerate() {
        let mut row = vec![i as f64, *lp];
        row.extend_from_slice(s);
        t.push(row)?;
    }
    Ok(t)
}

pub fn convergence_table(log: &[IterationRecord], hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(
        CONVERGENCE_SCHEMA,
        &["iteration", "objective", "gradient_norm", "step_norm"],
    );
    stamp(&mut t, hash);
    for r in log {
        t.push(vec![r.iteration as f64, r.objective, r.gradient_norm, r.step_norm])?;
    }
    Ok(t)
}

/// Bin centres and counts of `values` over `[lo, hi]`.
pub fn histogram_table(values: &[f64], lo: f64, hi: f64, bins: usize, hash: &str) -> Result<ColumnarTable> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::Domain("histogram needs bins > 0 and hi > lo".into()));
    }
    let mut t = ColumnarTable::new(HISTOGRAM_SCHEMA, &["center", "count"]);
    stamp(&mut t, hash);
    t.set("lo", format!("{lo:.16e}"));
    t.set("hi", format!("{hi:.16e}"));
    let w = (hi - lo) / bins as f64;
    for (i, c) in histogram(values, lo, hi, bins).into_iter().enumerate() {
        t.push(vec![lo + (i as f64 + 0.5) * w, c as f64])?;
    }
    Ok(t)
}

pub fn log_derivative_table(
    series: &[LogDerivativeSeries],
    probes: &[ModeProbeResult],
    hash: &str,
) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(
        LOG_DERIVATIVE_SCHEMA,
        &["probe", "t", "re_c", "im_c", "re_ld", "im_ld", "valid"],
    );
    stamp(&mut t, hash);
    for (s, p) in series.iter().zip(probes) {
        let hist = p.history(s.mode);
        for (i, &time) in s.times.iter().enumerate() {
            t.push(vec![
                s.mode as f64,
                time,
                hist[i].re,
                hist[i].im,
                s.values[i].re,
                s.values[i].im,
                if s.valid[i] { 1.0 } else { 0.0 },
            ])?;
        }
    }
    Ok(t)
}

/// Full coefficient history of one probe run: `t, k, re_c, im_c`.
pub fn probe_table(p: &ModeProbeResult, hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(PROBE_SCHEMA, &["t", "k", "re_c", "im_c"]);
    stamp(&mut t, hash);
    t.set("probe", p.probe);
    t.set("amplitude", format!("{:.16e}", p.amplitude));
    let n = p.grid.n_modes() as i64;
    for (ti, &time) in p.times.iter().enumerate() {
        for k in 0..=n {
            let c = p.coeff(ti, k);
            t.push(vec![time, k as f64, c.re, c.im])?;
        }
    }
    Ok(t)
}

/// Normalized sensitivities per mode; `active` is 1 for `k <= cutoff`.
pub fn sensitivity_table(r: &SensitivityReport, hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(SENSITIVITY_SCHEMA, &["k", "s_r", "s_theta", "active"]);
    stamp(&mut t, hash);
    t.set("tolerance", format!("{:.16e}", r.tolerance));
    t.set("k_r", r.k_r);
    t.set("k_theta", r.k_theta);
    t.set("cutoff", r.cutoff);
    for (i, (a, b)) in r.r_sensitivity.iter().zip(&r.theta_sensitivity).enumerate() {
        let k = i + 1;
        t.push(vec![k as f64, *a, *b, if k <= r.cutoff { 1.0 } else { 0.0 }])?;
    }
    Ok(t)
}

/// Long format `t, x, mean, std_error`.
pub fn upscaled_table(s: &UpscaledSeries, hash: &str) -> Result<ColumnarTable> {
    let mut t = ColumnarTable::new(UPSCALED_SCHEMA, &["t", "x", "mean", "std_error"]);
    stamp(&mut t, hash);
    t.set("domain_length", format!("{:.16e}", s.domain_length));
    t.set("n_x", s.x.len());
    t.set("ensemble_size", s.seeds.len());
    t.set(
        "seeds",
        s.seeds.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
    );
    for (ti, &time) in s.times.iter().enumerate() {
        for (i, &x) in s.x.iter().enumerate() {
            t.push(vec![time, x, s.mean[ti][i], s.std_error[ti][i]])?;
        }
    }
    Ok(t)
}

pub fn upscaled_from_table(t: &ColumnarTable) -> Result<UpscaledSeries> {
    t.require_schema(UPSCALED_SCHEMA)?;
    let nx = t.get_f64("n_x")? as usize;
    if nx == 0 || t.rows.len() % nx != 0 {
        return Err(Error::Format("upscaled rows are not a whole number of profiles".into()));
    }
    let seeds = match t.get("seeds") {
        Some("") | None => Vec::new(),
        Some(s) => s
            .split(',')
            .map(|v| v.parse().map_err(|_| Error::Format(format!("bad seed `{v}`"))))
            .collect::<Result<_>>()?,
    };
    let mut out = UpscaledSeries {
        x: t.rows[..nx].iter().map(|r| r[1]).collect(),
        domain_length: t.get_f64("domain_length")?,
        times: Vec::new(),
        mean: Vec::new(),
        std_error: Vec::new(),
        seeds,
    };
    for block in t.rows.chunks(nx) {
        out.times.push(block[0][0]);
        out.mean.push(block.iter().map(|r| r[2]).collect());
        out.std_error.push(block.iter().map(|r| r[3]).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{analyze, frade_spectrum, synthesize, InitialCondition, TransportConstants};

    #[test]
    fn spectrum_rows_sorted_and_round_trip() {
        let g = WaveGrid::minimal(1.0, 16).unwrap();
        let s = frade_spectrum(&TransportConstants::new(1.0, 0.01, 1.5).unwrap(), &g).unwrap();
        let t = spectrum_table(&s, "h").unwrap();
        let ks = t.column("k").unwrap();
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        let back = spectrum_from_table(&ColumnarTable::parse(&t.to_text()).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn histogram_counts_sum_to_length() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let t = histogram_table(&v, 0.0, 1.0, 20, "h").unwrap();
        let total: f64 = t.column("count").unwrap().iter().sum();
        assert_eq!(total, 1000.0);
    }

    #[test]
    fn snapshot_export_resynthesizes() {
        let g = WaveGrid::minimal(1.0, 32).unwrap();
        let f = analyze(&g, &InitialCondition::gaussian_bump(0.3, 0.05).sample(&g).unwrap()).unwrap();
        let t = coefficients_table(&f, "h").unwrap();
        let back = field_from_table(&ColumnarTable::parse(&t.to_text()).unwrap()).unwrap();
        let a = synthesize(&f).unwrap();
        let b = synthesize(&back).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn unknown_plot_kind_is_usage_error() {
        assert!(matches!("bars".parse::<PlotKind>(), Err(Error::Config(_))));
        assert_eq!("spectrum".parse::<PlotKind>().unwrap(), PlotKind::Spectrum);
    }

    #[test]
    fn upscaled_round_trip() {
        let s = UpscaledSeries {
            x: vec![0.0, 0.5],
            domain_length: 1.0,
            times: vec![0.0, 1.0],
            mean: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            std_error: vec![vec![0.0; 2], vec![0.1, 0.2]],
            seeds: vec![4, 5],
        };
        let t = upscaled_table(&s, "h").unwrap();
        let back = upscaled_from_table(&ColumnarTable::parse(&t.to_text()).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
