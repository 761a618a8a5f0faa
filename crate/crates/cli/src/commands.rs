use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use opspec::calibration::{positivity_diagnostic, ObservationSet, PositivityReport};
use opspec::highfid::{
    evolve_to_times, solve_darcy, Concentration2D, PermeabilityRealization,
};
use opspec::interrogation::log_derivative;
use opspec::io::{
    chain_table, coefficients_table, convergence_table, field_from_table, histogram_table,
    log_derivative_table, observations_from_table, observations_table, probe_table, profile_table,
    read_snapshot, sensitivity_table, spectrum_from_table, spectrum_table, upscaled_from_table,
    upscaled_table, write_snapshot, ColumnarTable, ExperimentConfig, PlotKind, COEFFICIENTS_SCHEMA,
    CHAIN_SCHEMA, LOG_DERIVATIVE_SCHEMA, PROFILE_SCHEMA, SPECTRUM_SCHEMA,
};
use opspec::spectral::{fickian_spectrum, synthesize, OperatorSpectrum, SpectralField};
use opspec::workflow::{self, MapOutcome};
use opspec::{Error, Result};

use crate::Common;

const SNAPSHOT_MAGIC: &[u8] = b"opspec-snapshot";
const POSITIVITY_POINTS: usize = 2048;
const POSITIVITY_TIMES: usize = 21;

/// Effective config, its hash and the output directory.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub hash: String,
    pub out: PathBuf,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, flag: Option<&Path>) -> Result<Self> {
        let hash = cfg.hash()?;
        let out = cfg.resolve_output_dir(flag);
        std::fs::create_dir_all(&out)?;
        let ctx = Self { cfg, hash, out };
        let echo = format!("config.{}.toml", &ctx.hash[..12]);
        std::fs::write(ctx.out.join(echo), ctx.cfg.to_toml()?)?;
        Ok(ctx)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn table(&self, name: &str, t: &ColumnarTable) -> Result<()> {
        let p = self.path(name);
        t.write(&p)?;
        println!("{}", p.display());
        Ok(())
    }

    /// `key = value` summary, config hash first.
    fn summary(&self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, format!("config_hash = {}\n{body}", self.hash))?;
        println!("{}", p.display());
        Ok(())
    }
}

fn read_table(path: &Path) -> Result<ColumnarTable> {
    if !path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input file {} not found", path.display()),
        )));
    }
    ColumnarTable::read(path)
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Observations table; generated from the config when omitted.
    #[arg(long)]
    observations: Option<PathBuf>,

    /// Initial-condition coefficient table; the config's IC when omitted.
    #[arg(long)]
    initial: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Calibrate against an upscaled series instead (MAP only).
    #[arg(long, conflicts_with = "observations")]
    upscaled: Option<PathBuf>,

    /// Snapshot index of the upscaled series used as data.
    #[arg(long, default_value_t = 1, requires = "upscaled")]
    index: usize,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Spectrum table to propagate with.
    #[arg(long, required_unless_present = "fickian", conflicts_with = "fickian")]
    spectrum: Option<PathBuf>,

    /// Use the Fickian spectrum with this diffusivity instead.
    #[arg(long)]
    fickian: Option<f64>,

    /// Initial-condition coefficient table; the config's IC when omitted.
    #[arg(long)]
    initial: Option<PathBuf>,

    /// Output times; `evolve.times` from the config when omitted.
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct Solve2dArgs {
    /// Permeability snapshot from `gen-perm`; sampled from the config when omitted.
    #[arg(long)]
    perm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 12)]
    modes: usize,

    #[arg(long, default_value_t = 25)]
    n_obs: usize,

    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    step: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Artifacts to summarize.
    #[arg(required = true)]
    files: Vec<PathBuf>,

    /// Combine artifacts even when their config hashes differ.
    #[arg(long)]
    force: bool,

    /// Export plot tables: spectrum, snapshot, histogram or log-derivative.
    #[arg(long)]
    plot: Option<String>,

    /// Histogram bins for `--plot histogram`.
    #[arg(long, default_value_t = 50)]
    bins: usize,
}

fn load_initial(ctx: &Context, path: Option<&Path>) -> Result<SpectralField> {
    match path {
        Some(p) => field_from_table(&read_table(p)?),
        None => workflow::initial_field(&ctx.cfg),
    }
}

fn load_data(ctx: &Context, args: &DataArgs) -> Result<(SpectralField, ObservationSet)> {
    let c0 = load_initial(ctx, args.initial.as_deref())?;
    let obs = match &args.observations {
        Some(p) => observations_from_table(&read_table(p)?)?,
        None => workflow::generate_frade(&ctx.cfg)?.observations,
    };
    Ok((c0, obs))
}

fn write_profiles(ctx: &Context, prefix: &str, xs: &[f64], times: &[f64], fields: &[Vec<f64>]) -> Result<()> {
    for (i, (t, v)) in times.iter().zip(fields).enumerate() {
        ctx.table(&format!("{prefix}_{i}.txt"), &profile_table(xs, v, *t, &ctx.hash)?)?;
    }
    Ok(())
}

pub fn gen_frade(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let data = workflow::generate_frade(cfg)?;
    ctx.table("initial.txt", &coefficients_table(&data.initial, &ctx.hash)?)?;
    ctx.table("truth_spectrum.txt", &spectrum_table(&data.truth, &ctx.hash)?)?;
    ctx.table("observations.txt", &observations_table(&data.observations, &ctx.hash)?)?;
    let (xs, fields) = workflow::evolve(
        &data.initial,
        &data.truth,
        &cfg.constants,
        &cfg.evolve.times,
        cfg.evolve.n_points,
    )?;
    write_profiles(ctx, "frade", &xs, &cfg.evolve.times, &fields)
}

pub fn gen_perm(ctx: &Context) -> Result<()> {
    let hf = &ctx.cfg.highfid;
    let seed = hf.permeability.seeds()[0];
    let perm = hf.permeability.realize(hf.grid, seed)?;
    let field = Concentration2D::new(perm.grid, perm.kappa, 0.0)?;
    let p = ctx.path("perm.bin");
    write_snapshot(&p, &field, seed, &ctx.hash)?;
    println!("{}", p.display());
    Ok(())
}

pub fn solve_2d(ctx: &Context, args: &Solve2dArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let hf = &cfg.highfid;
    let perm = match &args.perm {
        Some(p) => {
            if !p.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("input file {} not found", p.display()),
                )));
            }
            let (header, field) = read_snapshot(p)?;
            if header.grid != hf.grid {
                return Err(Error::Precondition(
                    "permeability grid differs from highfid.grid".into(),
                ));
            }
            let mut r = PermeabilityRealization::from_values(field.grid, field.values)?;
            r.seed = header.seed;
            r
        }
        None => hf.permeability.realize(hf.grid, hf.permeability.seeds()[0])?,
    };
    let vel = solve_darcy(&perm, &hf.darcy)?;
    let profile = cfg.initial_condition.sample_points(&hf.grid.xs(), hf.grid.lx)?;
    let c0 = Concentration2D::from_profile(hf.grid, &profile, 0.0)?;
    let snaps = evolve_to_times(&c0, &vel, &hf.transport, &hf.times)?;
    let mut body = String::new();
    let _ = writeln!(body, "seed = {}", perm.seed);
    let _ = writeln!(body, "mean_ux = {:.16e}", vel.mean_ux());
    let _ = writeln!(body, "max_speed = {:.16e}", vel.max_speed());
    let _ = writeln!(body, "max_divergence = {:.16e}", vel.max_divergence());
    for (i, s) in snaps.iter().enumerate() {
        let p = ctx.path(&format!("concentration_{i}.bin"));
        write_snapshot(&p, s, perm.seed, &ctx.hash)?;
        println!("{}", p.display());
        let _ = writeln!(body, "snapshot.{i}.time = {:.16e}", s.time);
        let _ = writeln!(body, "snapshot.{i}.mass = {:.16e}", s.mass());
        let _ = writeln!(body, "snapshot.{i}.min = {:.16e}", s.min());
    }
    ctx.summary("solve2d_summary.txt", &body)
}

pub fn upscale(ctx: &Context) -> Result<()> {
    let series = workflow::upscale(&ctx.cfg)?;
    ctx.table("upscaled.txt", &upscaled_table(&series, &ctx.hash)?)
}

pub fn evolve(ctx: &Context, args: &EvolveArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let c0 = load_initial(ctx, args.initial.as_deref())?;
    let spectrum = match (&args.spectrum, args.fickian) {
        (Some(p), _) => spectrum_from_table(&read_table(p)?)?,
        (None, Some(d)) => fickian_spectrum(d, c0.grid())?,
        (None, None) => unreachable!("clap requires one of --spectrum, --fickian"),
    };
    let times = if args.times.is_empty() {
        cfg.evolve.times.clone()
    } else {
        args.times.clone()
    };
    let (xs, fields) = workflow::evolve(&c0, &spectrum, &cfg.constants, &times, cfg.evolve.n_points)?;
    write_profiles(ctx, "evolved", &xs, &times, &fields)
}

fn positivity(ctx: &Context, spectrum: &OperatorSpectrum, c0: &SpectralField, t_data: f64) -> Result<PositivityReport> {
    let t_max = ctx.cfg.evolve.times.iter().copied().fold(t_data, f64::max);
    let times: Vec<f64> = (0..POSITIVITY_TIMES)
        .map(|i| t_max * i as f64 / (POSITIVITY_TIMES - 1) as f64)
        .collect();
    positivity_diagnostic(spectrum, c0, &ctx.cfg.constants, &times, POSITIVITY_POINTS)
}

fn map_summary(map: &MapOutcome, pos: &PositivityReport) -> String {
    let s = &map.sensitivity;
    let mut b = String::new();
    let _ = writeln!(b, "cutoff = {}", s.cutoff);
    let _ = writeln!(b, "k_r = {}", s.k_r);
    let _ = writeln!(b, "k_theta = {}", s.k_theta);
    let _ = writeln!(b, "optimized_parameters = {}", map.optimized.len());
    let _ = writeln!(b, "termination = {:?}", map.newton.termination);
    let _ = writeln!(b, "iterations = {}", map.newton.iterations);
    let _ = writeln!(b, "gn_fallbacks = {}", map.newton.gn_fallbacks);
    let _ = writeln!(b, "objective = {:.16e}", map.newton.objective);
    let _ = writeln!(b, "positivity.min = {:.16e}", pos.min_value);
    let _ = writeln!(b, "positivity.relative_min = {:.16e}", pos.relative_min());
    let _ = writeln!(b, "positivity.x_at_min = {:.16e}", pos.x_at_min);
    let _ = writeln!(b, "positivity.t_at_min = {:.16e}", pos.t_at_min);
    b
}

fn max_time(obs: &ObservationSet) -> f64 {
    obs.points.iter().map(|p| p.t).fold(0.0, f64::max)
}

fn write_map(ctx: &Context, prefix: &str, map: &MapOutcome) -> Result<()> {
    ctx.table(&format!("{prefix}_spectrum.txt"), &spectrum_table(&map.spectrum, &ctx.hash)?)?;
    ctx.table(&format!("{prefix}_convergence.txt"), &convergence_table(&map.newton.log, &ctx.hash)?)?;
    ctx.table(&format!("{prefix}_sensitivity.txt"), &sensitivity_table(&map.sensitivity, &ctx.hash)?)
}

pub fn calibrate_map(ctx: &Context, args: &CalibrateArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    if let Some(path) = &args.upscaled {
        let series = upscaled_from_table(&read_table(path)?)?;
        let res = workflow::calibrate_upscaled(&cfg.calibration, &cfg.constants, &series, args.index)?;
        write_map(ctx, "map", &res.map)?;
        let t_data = series.times[args.index];
        let pos = positivity(ctx, &res.map.spectrum, &res.initial, t_data)?;
        let mut body = map_summary(&res.map, &pos);
        let _ = writeln!(body, "calibration_time = {t_data:.16e}");
        for (t, e) in series.times.iter().zip(&res.relative_errors) {
            let _ = writeln!(body, "relative_error.t={t} = {e:.16e}");
        }
        return ctx.summary("map_summary.txt", &body);
    }
    let (c0, obs) = load_data(ctx, &args.data)?;
    let map = workflow::calibrate_map(&cfg.calibration, &c0, &cfg.constants, &obs)?;
    write_map(ctx, "map", &map)?;
    let pos = positivity(ctx, &map.spectrum, &c0, max_time(&obs))?;
    ctx.summary("map_summary.txt", &map_summary(&map, &pos))
}

fn parameter_name(i: usize, n_modes: usize) -> String {
    if i < n_modes {
        format!("r_star_{}", i + 1)
    } else {
        format!("theta_star_{}", i - n_modes + 1)
    }
}

pub fn calibrate_mcmc(ctx: &Context, args: &CalibrateArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    if args.upscaled.is_some() {
        return Err(Error::Precondition(
            "sampling needs noisy observations; upscaled data carry no noise level".into(),
        ));
    }
    let (c0, obs) = load_data(ctx, &args.data)?;
    let out = workflow::calibrate_mcmc(&cfg.calibration, &c0, &cfg.constants, &obs)?;
    write_map(ctx, "mcmc_map", &out.map)?;
    let n = c0.grid().n_modes();
    let names: Vec<String> = out.active.iter().map(|&i| parameter_name(i, n)).collect();
    for (c, chain) in out.chains.iter().enumerate() {
        ctx.table(&format!("mcmc_chain_{c}.txt"), &chain_table(chain, &names, &ctx.hash)?)?;
    }
    let mut t = ColumnarTable::new("intervals", &["k", "coordinate", "map", "lo", "hi"]);
    t.set("config_hash", &ctx.hash);
    t.set("level", cfg.calibration.credible_level);
    t.set("coordinate_codes", "0 = r_star, 1 = theta_star");
    for (&i, (lo, hi)) in out.active.iter().zip(&out.intervals) {
        let (k, coord) = if i < n { (i + 1, 0.0) } else { (i - n + 1, 1.0) };
        t.push(vec![k as f64, coord, out.map.params[i], *lo, *hi])?;
    }
    ctx.table("mcmc_intervals.txt", &t)?;
    let pos = positivity(ctx, &out.map.spectrum, &c0, max_time(&obs))?;
    let mut body = map_summary(&out.map, &pos);
    for (c, chain) in out.chains.iter().enumerate() {
        let _ = writeln!(body, "chain.{c}.acceptance_rate = {:.6}", chain.acceptance_rate);
        let _ = writeln!(body, "chain.{c}.step_size = {:.6e}", chain.step_size);
    }
    ctx.summary("mcmc_summary.txt", &body)
}

pub fn sensitivity(ctx: &Context, args: &DataArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let (c0, obs) = load_data(ctx, args)?;
    let r = workflow::start_sensitivity(&cfg.calibration, &c0, &cfg.constants, &obs)?;
    ctx.table("sensitivity.txt", &sensitivity_table(&r, &ctx.hash)?)
}

pub fn interrogate(ctx: &Context) -> Result<()> {
    let (probes, report) = workflow::interrogate(&ctx.cfg)?;
    for p in &probes {
        ctx.table(&format!("probe_{}.txt", p.probe), &probe_table(p, &ctx.hash)?)?;
    }
    let series = probes
        .iter()
        .map(|p| log_derivative(p, p.probe))
        .collect::<Result<Vec<_>>>()?;
    ctx.table("log_derivative.txt", &log_derivative_table(&series, &probes, &ctx.hash)?)?;
    ctx.summary("assumptions.txt", &report.to_text())
}

pub fn check_derivatives(ctx: &Context, args: &CheckArgs) -> Result<()> {
    let r = workflow::random_derivative_check(&ctx.cfg, args.modes, args.n_obs, args.step, ctx.cfg.seed)?;
    let verdict = if r.pass() { "PASS" } else { "FAIL" };
    let mut body = String::new();
    let _ = writeln!(body, "seed = {}", ctx.cfg.seed);
    let _ = writeln!(body, "modes = {}", args.modes);
    let _ = writeln!(body, "step = {:e}", r.step);
    let _ = writeln!(body, "gradient_error = {:.6e}", r.gradient_error);
    let _ = writeln!(body, "hessian_error = {:.6e}", r.hessian_error);
    let _ = writeln!(body, "jacobian_error = {:.6e}", r.jacobian_error);
    let _ = writeln!(body, "verdict = {verdict}");
    ctx.summary("derivatives.txt", &body)?;
    println!(
        "check-derivatives: {verdict} (gradient {:.2e}, hessian {:.2e})",
        r.gradient_error, r.hessian_error
    );
    if r.pass() {
        Ok(())
    } else {
        Err(Error::Numerical(format!(
            "derivative check failed: gradient error {:.3e}, Hessian error {:.3e}",
            r.gradient_error, r.hessian_error
        )))
    }
}

/// What `report` knows about one artifact.
struct Artifact {
    path: PathBuf,
    schema: String,
    hash: Option<String>,
    rows: usize,
    table: Option<ColumnarTable>,
}

fn inspect(path: &Path) -> Result<Artifact> {
    if !path.exists() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input file {} not found", path.display()),
        )));
    }
    let mut head = [0u8; 15];
    let n = std::fs::File::open(path)?.read(&mut head)?;
    if head[..n] == *SNAPSHOT_MAGIC {
        let (h, f) = read_snapshot(path)?;
        return Ok(Artifact {
            path: path.into(),
            schema: "snapshot2d".into(),
            hash: Some(h.config_hash),
            rows: f.values.len(),
            table: None,
        });
    }
    let text = std::fs::read_to_string(path)?;
    if let Ok(t) = ColumnarTable::parse(&text) {
        if t.schema().is_some() {
            return Ok(Artifact {
                path: path.into(),
                schema: t.schema().unwrap_or_default().into(),
                hash: t.get("config_hash").map(String::from),
                rows: t.rows.len(),
                table: Some(t),
            });
        }
    }
    let kv: Vec<(&str, &str)> = text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim(), v.trim()))
        .collect();
    if kv.is_empty() {
        return Err(Error::Format(format!("{} is not an opspec artifact", path.display())));
    }
    Ok(Artifact {
        path: path.into(),
        schema: "summary".into(),
        hash: kv.iter().find(|(k, _)| *k == "config_hash").map(|(_, v)| v.to_string()),
        rows: kv.len(),
        table: None,
    })
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn sorted_by(t: &ColumnarTable, keys: &[&str]) -> Result<ColumnarTable> {
    let idx = keys.iter().map(|k| t.column_index(k)).collect::<Result<Vec<_>>>()?;
    let mut out = t.clone();
    out.rows.sort_by(|a, b| {
        idx.iter()
            .map(|&i| a[i].total_cmp(&b[i]))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn plot_tables(kind: PlotKind, a: &Artifact, bins: usize) -> Result<Vec<(String, ColumnarTable)>> {
    let Some(t) = &a.table else { return Ok(vec![]) };
    let hash = a.hash.clone().unwrap_or_default();
    let name = stem(&a.path);
    let schema = a.schema.as_str();
    Ok(match kind {
        PlotKind::Spectrum if schema == SPECTRUM_SCHEMA => {
            vec![(format!("plot_spectrum_{name}.txt"), sorted_by(t, &["k"])?)]
        }
        PlotKind::Snapshot if schema == PROFILE_SCHEMA => {
            vec![(format!("plot_snapshot_{name}.txt"), sorted_by(t, &["x"])?)]
        }
        PlotKind::Snapshot if schema == COEFFICIENTS_SCHEMA => {
            let field = field_from_table(t)?;
            let values = synthesize(&field)?;
            let xs = field.grid().points();
            vec![(
                format!("plot_snapshot_{name}.txt"),
                profile_table(&xs, &values, field.time(), &hash)?,
            )]
        }
        PlotKind::Histogram if schema == CHAIN_SCHEMA => {
            let mut out = Vec::new();
            for col in t.columns.iter().skip(2) {
                let v = t.column(col)?;
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let hi = if hi > lo { hi } else { lo + 1.0 };
                out.push((
                    format!("plot_histogram_{name}_{col}.txt"),
                    histogram_table(&v, lo, hi, bins, &hash)?,
                ));
            }
            out
        }
        PlotKind::LogDerivative if schema == LOG_DERIVATIVE_SCHEMA => {
            vec![(format!("plot_log_derivative_{name}.txt"), sorted_by(t, &["probe", "t"])?)]
        }
        _ => vec![],
    })
}

pub fn report(common: &Common, args: &ReportArgs) -> Result<()> {
    let kind = args.plot.as_deref().map(PlotKind::from_str).transpose()?;
    let artifacts = args.files.iter().map(|p| inspect(p)).collect::<Result<Vec<_>>>()?;
    let mut hashes: Vec<&str> = artifacts.iter().filter_map(|a| a.hash.as_deref()).collect();
    hashes.sort_unstable();
    hashes.dedup();
    if hashes.len() > 1 && !args.force {
        return Err(Error::Precondition(format!(
            "artifacts come from {} different configs ({}); rerun with --force to combine",
            hashes.len(),
            hashes.iter().map(|h| &h[..h.len().min(12)]).collect::<Vec<_>>().join(", ")
        )));
    }
    let cfg = crate::load_config(common)?;
    let out = cfg.resolve_output_dir(common.output_dir.as_deref());
    std::fs::create_dir_all(&out)?;

    let mut body = String::new();
    let combined = match hashes.as_slice() {
        [h] => h.to_string(),
        [] => "none".into(),
        _ => "mixed".into(),
    };
    let _ = writeln!(body, "config_hash = {combined}");
    let _ = writeln!(body, "forced = {}", args.force && hashes.len() > 1);
    let _ = writeln!(body, "artifacts = {}", artifacts.len());
    for (i, a) in artifacts.iter().enumerate() {
        let _ = writeln!(body, "artifact.{i}.path = {}", a.path.display());
        let _ = writeln!(body, "artifact.{i}.schema = {}", a.schema);
        let _ = writeln!(body, "artifact.{i}.rows = {}", a.rows);
        let _ = writeln!(body, "artifact.{i}.config_hash = {}", a.hash.as_deref().unwrap_or("none"));
    }
    let p = out.join("report.txt");
    std::fs::write(&p, &body)?;
    println!("{}", p.display());

    if let Some(kind) = kind {
        let mut written = 0;
        for a in &artifacts {
            for (name, t) in plot_tables(kind, a, args.bins)? {
                let p = out.join(name);
                t.write(&p)?;
                println!("{}", p.display());
                written += 1;
            }
        }
        if written == 0 {
            return Err(Error::Precondition(format!(
                "none of the artifacts feeds a `{}` plot",
                args.plot.as_deref().unwrap_or_default()
            )));
        }
    }
    Ok(())
}
