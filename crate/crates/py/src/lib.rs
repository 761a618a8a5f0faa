//! Python bindings: configs, spectra and the experiment pipelines.

use num_complex::Complex64;
use opspec::calibration::Termination;
use opspec::io::{spectrum_from_table, spectrum_table, ColumnarTable, ExperimentConfig};
use opspec::spectral::{fickian_spectrum, frade_spectrum, rescale, OperatorSpectrum, TransportConstants, WaveGrid};
use opspec::workflow::{self, MapOutcome};
use opspec::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(opspec_py, OpspecError, PyException);

fn py_err(e: Error) -> PyErr {
    OpspecError::new_err(format!("{}: {e}", e.kind()))
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for opspec::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

/// Experiment configuration; TOML text, defaults for missing entries.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (toml = None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(t) => ExperimentConfig::from_toml_str(t).py()?,
            None => ExperimentConfig::default(),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ExperimentConfig::load(path.as_ref()).py()?,
        })
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().py()
    }

    fn hash(&self) -> PyResult<String> {
        self.inner.hash().py()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.grid.n_modes
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(n_modes={}, nu={}, alpha={})",
            self.inner.grid.n_modes, self.inner.constants.diffusivity, self.inner.constants.fractional_order
        )
    }
}

/// Eigenvalues `mu_k`, `k = 1..n_modes`, of a shift-invariant operator.
#[pyclass(name = "Spectrum", from_py_object)]
#[derive(Clone)]
struct PySpectrum {
    inner: OperatorSpectrum,
}

#[pymethods]
impl PySpectrum {
    #[staticmethod]
    #[pyo3(signature = (nu, alpha, n_modes, domain_length = 1.0, mean_velocity = 1.0))]
    fn frade(nu: f64, alpha: f64, n_modes: usize, domain_length: f64, mean_velocity: f64) -> PyResult<Self> {
        let c = TransportConstants::new(mean_velocity, nu, alpha).py()?;
        let g = WaveGrid::minimal(domain_length, n_modes).py()?;
        Ok(Self {
            inner: frade_spectrum(&c, &g).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (diffusivity, n_modes, domain_length = 1.0))]
    fn fickian(diffusivity: f64, n_modes: usize, domain_length: f64) -> PyResult<Self> {
        let g = WaveGrid::minimal(domain_length, n_modes).py()?;
        Ok(Self {
            inner: fickian_spectrum(diffusivity, &g).py()?,
        })
    }

    #[staticmethod]
    fn from_table(text: &str) -> PyResult<Self> {
        let t = ColumnarTable::parse(text).py()?;
        Ok(Self {
            inner: spectrum_from_table(&t).py()?,
        })
    }

    #[pyo3(signature = (config_hash = ""))]
    fn to_table(&self, config_hash: &str) -> PyResult<String> {
        Ok(spectrum_table(&self.inner, config_hash).py()?.to_text())
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.inner.grid().n_modes()
    }

    fn mu(&self, k: i64) -> Complex64 {
        self.inner.mu(k)
    }

    fn values(&self) -> Vec<Complex64> {
        self.inner.mu_values()
    }

    #[getter]
    fn radii(&self) -> Vec<f64> {
        self.inner.radii().to_vec()
    }

    #[getter]
    fn arguments(&self) -> Vec<f64> {
        self.inner.arguments().to_vec()
    }

    /// `(r_star, theta_star)`.
    fn rescaled(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = rescale(&self.inner).py()?;
        Ok((p.r_star, p.theta_star))
    }

    fn __len__(&self) -> usize {
        self.inner.grid().n_modes()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(n_modes={})", self.inner.grid().n_modes())
    }
}

/// Outcome of sensitivity reduction and projected Newton.
#[pyclass(name = "MapResult", skip_from_py_object)]
struct PyMapResult {
    #[pyo3(get)]
    spectrum: PySpectrum,
    #[pyo3(get)]
    cutoff: usize,
    #[pyo3(get)]
    params: Vec<f64>,
    #[pyo3(get)]
    termination: String,
    #[pyo3(get)]
    objective: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
}

impl From<&MapOutcome> for PyMapResult {
    fn from(m: &MapOutcome) -> Self {
        let termination = match m.newton.termination {
            Termination::GradientTolerance => "gradient_tolerance",
            Termination::StepTolerance => "step_tolerance",
            Termination::IterationLimit => "iteration_limit",
            Termination::LineSearchFailure => "line_search_failure",
        };
        Self {
            spectrum: PySpectrum {
                inner: m.spectrum.clone(),
            },
            cutoff: m.sensitivity.cutoff,
            params: m.params.clone(),
            termination: termination.into(),
            objective: m.newton.objective,
            iterations: m.newton.iterations,
            converged: m.newton.converged(),
        }
    }
}

#[pymethods]
impl PyMapResult {
    fn __repr__(&self) -> String {
        format!(
            "MapResult(cutoff={}, termination={}, objective={:.3e})",
            self.cutoff, self.termination, self.objective
        )
    }
}

/// Synthetic fractional-ADE observations of the configured scenario.
#[pyfunction]
fn generate_frade<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let d = workflow::generate_frade(&config.inner).py()?;
    let out = PyDict::new(py);
    out.set_item("x", d.observations.points.iter().map(|p| p.x).collect::<Vec<_>>())?;
    out.set_item("t", d.observations.points.iter().map(|p| p.t).collect::<Vec<_>>())?;
    out.set_item("values", d.observations.values)?;
    out.set_item("clean", d.clean)?;
    out.set_item("sigma", d.observations.noise)?;
    out.set_item("truth", PySpectrum { inner: d.truth })?;
    Ok(out)
}

/// MAP calibration against the configured synthetic observations.
#[pyfunction]
fn calibrate_map(py: Python<'_>, config: &PyConfig) -> PyResult<PyMapResult> {
    let cfg = config.inner.clone();
    let m = py
        .detach(move || -> opspec::Result<MapOutcome> {
            let d = workflow::generate_frade(&cfg)?;
            workflow::calibrate_map(&cfg.calibration, &d.initial, &cfg.constants, &d.observations)
        })
        .py()?;
    Ok(PyMapResult::from(&m))
}

/// MAP followed by Langevin sampling of the active modes.
#[pyfunction]
fn calibrate_mcmc<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner.clone();
    let o = py
        .detach(move || {
            let d = workflow::generate_frade(&cfg)?;
            workflow::calibrate_mcmc(&cfg.calibration, &d.initial, &cfg.constants, &d.observations)
        })
        .py()?;
    let out = PyDict::new(py);
    out.set_item("map", PyMapResult::from(&o.map))?;
    out.set_item("active", o.active.clone())?;
    out.set_item("intervals", o.intervals.clone())?;
    out.set_item("acceptance", o.chains.iter().map(|c| c.acceptance_rate).collect::<Vec<_>>())?;
    out.set_item("samples", o.chains.iter().map(|c| c.states.clone()).collect::<Vec<_>>())?;
    Ok(out)
}

/// Samples of the configured initial condition evolved under `spectrum`.
#[pyfunction]
#[pyo3(signature = (config, spectrum, times, n_points = None))]
fn evolve(
    config: &PyConfig,
    spectrum: &PySpectrum,
    times: Vec<f64>,
    n_points: Option<usize>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let cfg = &config.inner;
    let c0 = workflow::initial_field(cfg).py()?;
    workflow::evolve(&c0, &spectrum.inner, &cfg.constants, &times, n_points).py()
}

/// Analytic versus finite-difference derivatives at a random point.
#[pyfunction]
#[pyo3(signature = (config, n_modes = 12, n_obs = 25, step = 1e-6, seed = 0))]
fn check_derivatives<'py>(
    py: Python<'py>,
    config: &PyConfig,
    n_modes: usize,
    n_obs: usize,
    step: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = workflow::random_derivative_check(&config.inner, n_modes, n_obs, step, seed).py()?;
    let out = PyDict::new(py);
    out.set_item("gradient_error", r.gradient_error)?;
    out.set_item("hessian_error", r.hessian_error)?;
    out.set_item("jacobian_error", r.jacobian_error)?;
    out.set_item("passed", r.pass())?;
    Ok(out)
}

/// Depth-averaged series of the configured 2D experiment.
#[pyfunction]
fn upscale<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner.clone();
    let s = py.detach(move || workflow::upscale(&cfg)).py()?;
    let out = PyDict::new(py);
    out.set_item("x", s.x)?;
    out.set_item("times", s.times)?;
    out.set_item("mean", s.mean)?;
    out.set_item("std_error", s.std_error)?;
    Ok(out)
}

/// Mode probes of the 2D model; verdicts and the `key = value` report.
#[pyfunction]
fn interrogate<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner.clone();
    let (_, report) = py.detach(move || workflow::interrogate(&cfg)).py()?;
    let out = PyDict::new(py);
    out.set_item("shift_invariant", report.shift_invariant())?;
    out.set_item("time_independent", report.time_independent())?;
    out.set_item("max_off_diagonal", report.max_off_diagonal())?;
    out.set_item("max_variation", report.max_variation())?;
    out.set_item("report", report.to_text())?;
    Ok(out)
}

/// Parse a columnar table: `{"meta": {...}, "columns": [...], "rows": [[...]]}`.
#[pyfunction]
fn read_table<'py>(py: Python<'py>, path: &str) -> PyResult<Bound<'py, PyDict>> {
    let t = ColumnarTable::read(path.as_ref()).py()?;
    let meta = PyDict::new(py);
    for (k, v) in &t.meta {
        meta.set_item(k, v)?;
    }
    let out = PyDict::new(py);
    out.set_item("meta", meta)?;
    out.set_item("columns", t.columns)?;
    out.set_item("rows", t.rows)?;
    Ok(out)
}

#[pymodule]
fn opspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OpspecError", m.py().get_type::<OpspecError>())?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyMapResult>()?;
    m.add_function(wrap_pyfunction!(generate_frade, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_map, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_mcmc, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(check_derivatives, m)?)?;
    m.add_function(wrap_pyfunction!(upscale, m)?)?;
    m.add_function(wrap_pyfunction!(interrogate, m)?)?;
    m.add_function(wrap_pyfunction!(read_table, m)?)?;
    Ok(())
}
