use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{evaluate, misfit, ObservationModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonOptions {
    #[serde(default = "d_iter")]
    pub max_iterations: usize,
    #[serde(default = "d_grad")]
    pub gradient_tolerance: f64,
    #[serde(default = "d_step")]
    pub step_tolerance: f64,
    /// Use only the Gauss-Newton part of the Hessian.
    #[serde(default)]
    pub gn_only: bool,
    #[serde(default = "d_backtracks")]
    pub max_backtracks: usize,
}

fn d_iter() -> usize {
    200
}
fn d_grad() -> f64 {
    1e-8
}
fn d_step() -> f64 {
    1e-12
}
fn d_backtracks() -> usize {
    40
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: d_iter(),
            gradient_tolerance: d_grad(),
            step_tolerance: d_step(),
            gn_only: false,
            max_backtracks: d_backtracks(),
        }
    }
}

/// One accepted iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    IterationLimit,
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub params: Vec<f64>,
    pub objective: f64,
    pub termination: Termination,
    pub iterations: usize,
    pub log: Vec<IterationRecord>,
    /// Iterations where the full Hessian was replaced by its Gauss-Newton part.
    pub gn_fallbacks: usize,
}

impl NewtonResult {
    pub fn converged(&self) -> bool {
        matches!(
            self.termination,
            Termination::GradientTolerance | Termination::StepTolerance
        )
    }
}

/// Box constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::Shape("inconsistent bounds".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: vec![lo; n],
            upper: vec![hi; n],
        }
    }

    pub fn unbounded(n: usize) -> Self {
        Self::uniform(n, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            lower: idx.iter().map(|&i| self.lower[i]).collect(),
            upper: idx.iter().map(|&i| self.upper[i]).collect(),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn project(&self, p: &mut [f64]) {
        for (v, (l, u)) in p.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

/// Solve `(H + damping D) s = -g` with `D = diag(scale)` (identity if
/// absent); `None` if the matrix is not positive definite.
fn newton_step(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    scale: Option<&DVector<f64>>,
    damping: f64,
) -> Option<DVector<f64>> {
    let mut m = h.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += damping * scale.map_or(1.0, |s| s[i]);
    }
    m.cholesky().map(|c| -c.solve(g))
}

/// Projected Newton minimization of `J(p) / sigma^2` over a box.
pub fn newton_map<M: ObservationModel>(
    model: &M,
    p0: &[f64],
    data: &[f64],
    sigma: f64,
    bounds: &Bounds,
    opts: &NewtonOptions,
) -> Result<NewtonResult> {
    let n = model.n_params();
    if p0.len() != n || bounds.lower.len() != n {
        return Err(Error::Shape("initial point or bounds do not match the model".into()));
    }
    if !bounds.contains(p0) {
        return Err(Error::Precondition("initial point lies outside the bounds".into()));
    }
    let w = 1.0 / (sigma * sigma);
    let objective = |p: &[f64]| -> Result<f64> { Ok(w * misfit(model, p, data)?) };

    let mut p = p0.to_vec();
    let mut log = Vec::new();
    let mut gn_fallbacks = 0;
    let mut termination = Termination::IterationLimit;
    let mut iterations = 0;
    let mut f = objective(&p)?;
    let mut damping = 1e-3;

    for iter in 0..=opts.max_iterations {
        let eval = evaluate(model, &p, data, opts.gn_only)?;
        let g = eval.gradient * w;
        let h = eval.hessian * w;

        // Variables held at a bound by the gradient.
        let width = {
            let mut q: Vec<f64> = p.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
            bounds.project(&mut q);
            q.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        let eps = width.min(1e-8);
        let free: Vec<usize> = (0..n)
            .filter(|&i| {
                let at_lo = p[i] <= bounds.lower[i] + eps && g[i] > 0.0;
                let at_hi = p[i] >= bounds.upper[i] - eps && g[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        let g_free = DVector::from_iterator(free.len(), free.iter().map(|&i| g[i]));
        let gnorm = g_free.norm();

        if iter == 0 {
            log.push(IterationRecord {
                iteration: 0,
                objective: f,
                gradient_norm: gnorm,
                step_norm: 0.0,
            });
        }
        if gnorm < opts.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        if iter == opts.max_iterations {
            break;
        }
        iterations = iter + 1;

        let h_free = h.select_rows(&free).select_columns(&free);
        let embed = |d: &DVector<f64>, alpha: f64| -> Vec<f64> {
            let mut trial = p.clone();
            for (a, &i) in free.iter().enumerate() {
                trial[i] += alpha * d[a];
            }
            bounds.project(&mut trial);
            trial
        };
        let decrease = |trial: &[f64]| -> f64 { (0..n).map(|i| g[i] * (trial[i] - p[i])).sum() };

        // Newton step with projected Armijo backtracking.
        let mut accepted = None;
        if let Some(dir) = newton_step(&h_free, &g_free, None, 0.0) {
            if dir.dot(&g_free) < 0.0 {
                let mut alpha = 1.0;
                for _ in 0..opts.max_backtracks {
                    let trial = embed(&dir, alpha);
                    match objective(&trial) {
                        Ok(ft) if ft <= f + 1e-4 * decrease(&trial) && ft < f => {
                            accepted = Some((trial, ft));
                            break;
                        }
                        _ => alpha *= 0.5,
                    }
                }
            }
        }

        // Levenberg-Marquardt on the Gauss-Newton Hessian, damping carried
        // across iterations.
        if accepted.is_none() {
            gn_fallbacks += 1;
            let gn_free = if opts.gn_only {
                h_free.clone()
            } else {
                let gn = evaluate(model, &p, data, true)?.hessian * w;
                gn.select_rows(&free).select_columns(&free)
            };
            let dmax = gn_free.diagonal().amax();
            let scale: DVector<f64> = gn_free.diagonal().map(|v| v.max(1e-12 * dmax).max(1e-300));
            for _ in 0..opts.max_backtracks {
                if let Some(dir) = newton_step(&gn_free, &g_free, Some(&scale), damping) {
                    let trial = embed(&dir, 1.0);
                    if let Ok(ft) = objective(&trial) {
                        if ft < f && ft <= f + 1e-4 * decrease(&trial) {
                            damping = (damping / 3.0).max(1e-12);
                            accepted = Some((trial, ft));
                            break;
                        }
                    }
                }
                damping *= 4.0;
            }
        }
        let Some((next, fnext)) = accepted else {
            termination = Termination::LineSearchFailure;
            log::warn!("line search failed at iteration {}; returning last iterate", iter + 1);
            break;
        };
        let step = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        p = next;
        f = fnext;
        log.push(IterationRecord {
            iteration: iter + 1,
            objective: f,
            gradient_norm: gnorm,
            step_norm: step,
        });
        log::debug!("newton {:>3}: J = {f:.6e}, |g| = {gnorm:.3e}, |s| = {step:.3e}", iter + 1);
        if step < opts.step_tolerance {
            termination = Termination::StepTolerance;
            break;
        }
    }
    Ok(NewtonResult {
        params: p,
        objective: f,
        termination,
        iterations,
        log,
        gn_fallbacks,
    })
}
