use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, misfit_gradient, Bounds, ObservationModel};
use crate::{Error, Result};

/// Unnormalized log density with gradient and a Riemannian metric.
pub trait LogTarget: Sync {
    fn dim(&self) -> usize;
    /// `None` outside the support.
    fn log_density_grad(&self, p: &[f64]) -> Result<Option<(f64, DVector<f64>)>>;
    /// Symmetric metric at `p`, regularized by the sampler.
    fn metric(&self, p: &[f64]) -> Result<DMatrix<f64>>;
}

/// Gaussian likelihood with known noise and a uniform prior on a box.
pub struct PosteriorTarget<'a, M: ObservationModel> {
    pub model: &'a M,
    pub data: &'a [f64],
    pub sigma: f64,
    pub bounds: Bounds,
    /// Use the Gauss-Newton Hessian as metric instead of the full Hessian.
    pub gn_metric: bool,
    /// Added to the metric diagonal: precision of the prior, `12 / width^2`
    /// for a uniform box.
    pub prior_precision: Vec<f64>,
}

impl<'a, M: ObservationModel> PosteriorTarget<'a, M> {
    pub fn new(model: &'a M, data: &'a [f64], sigma: f64, bounds: Bounds) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Precondition("sampling needs a positive noise level".into()));
        }
        if bounds.lower.len() != model.n_params()
            || bounds.lower.iter().chain(&bounds.upper).any(|v| !v.is_finite())
        {
            return Err(Error::Precondition("sampling needs a bounded prior box".into()));
        }
        let prior_precision = bounds
            .lower
            .iter()
            .zip(&bounds.upper)
            .map(|(l, u)| 12.0 / (u - l).powi(2))
            .collect();
        Ok(Self {
            model,
            data,
            sigma,
            bounds,
            gn_metric: false,
            prior_precision,
        })
    }
}

impl<M: ObservationModel> LogTarget for PosteriorTarget<'_, M> {
    fn dim(&self) -> usize {
        self.model.n_params()
    }

    fn log_density_grad(&self, p: &[f64]) -> Result<Option<(f64, DVector<f64>)>> {
        if !self.bounds.contains(p) {
            return Ok(None);
        }
        let w = 1.0 / (self.sigma * self.sigma);
        let (j, g) = misfit_gradient(self.model, p, self.data)?;
        Ok(Some((-w * j, -g * w)))
    }

    fn metric(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let w = 1.0 / (self.sigma * self.sigma);
        let mut h = evaluate(self.model, p, self.data, self.gn_metric)?.hessian * w;
        // Floor the likelihood part before adding the prior precision.
        if h.amax() > 0.0 {
            h = regularize(&h)?;
        }
        for (i, v) in self.prior_precision.iter().enumerate() {
            h[(i, i)] += v;
        }
        Ok(h)
    }
}

/// Uniform density on a box; the prior-only posterior.
pub struct UniformBox {
    pub bounds: Bounds,
}

impl LogTarget for UniformBox {
    fn dim(&self) -> usize {
        self.bounds.lower.len()
    }

    fn log_density_grad(&self, p: &[f64]) -> Result<Option<(f64, DVector<f64>)>> {
        Ok(self
            .bounds
            .contains(p)
            .then(|| (0.0, DVector::zeros(p.len()))))
    }

    fn metric(&self, _p: &[f64]) -> Result<DMatrix<f64>> {
        let d = DVector::from_iterator(
            self.dim(),
            self.bounds
                .lower
                .iter()
                .zip(&self.bounds.upper)
                .map(|(l, u)| 12.0 / (u - l).powi(2)),
        );
        Ok(DMatrix::from_diagonal(&d))
    }
}

/// Relative eigenvalue floor applied to metrics.
pub const METRIC_FLOOR: f64 = 1e-8;

/// Symmetrize and raise eigenvalues below `METRIC_FLOOR * max` to the floor.
pub fn regularize(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.max();
    if !(max > 0.0) || !max.is_finite() {
        let worst = eig.eigenvalues.min();
        return Err(Error::Numerical(format!(
            "metric is not positive definite: largest eigenvalue {max:e}, smallest {worst:e}"
        )));
    }
    let floor = METRIC_FLOOR * max;
    let lam = eig.eigenvalues.map(|l| l.max(floor));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainOptions {
    /// Recorded states after burn-in and thinning.
    pub n_samples: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default = "d_step")]
    pub step_size: f64,
    /// Adapt the step size during burn-in towards `target_acceptance`.
    #[serde(default = "yes")]
    pub adapt: bool,
    #[serde(default = "d_target")]
    pub target_acceptance: f64,
    /// Re-evaluate the metric at every state (simplified manifold MALA).
    #[serde(default)]
    pub position_dependent: bool,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn d_step() -> f64 {
    1.0
}
fn d_target() -> f64 {
    0.574
}

impl ChainOptions {
    pub fn new(n_samples: usize, burn_in: usize, seed: u64) -> Self {
        Self {
            n_samples,
            burn_in,
            thin: 1,
            step_size: d_step(),
            adapt: true,
            target_acceptance: d_target(),
            position_dependent: false,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub states: Vec<Vec<f64>>,
    pub log_posterior: Vec<f64>,
    /// Acceptance rate after burn-in.
    pub acceptance_rate: f64,
    pub step_size: f64,
    pub seed: u64,
}

impl Chain {
    /// Values of parameter `i` across states.
    pub fn marginal(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    /// Central interval holding probability `level`.
    pub fn interval(&self, i: usize, level: f64) -> (f64, f64) {
        let mut v = self.marginal(i);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        let a = 0.5 * (1.0 - level);
        (q(a), q(1.0 - a))
    }
}

/// State with everything the proposal needs.
struct Point {
    x: Vec<f64>,
    logp: f64,
    grad: DVector<f64>,
    metric: Cholesky<f64, Dyn>,
    half_logdet: f64,
}

fn factor(m: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let ch = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("metric Cholesky factorization failed".into()))?;
    let half_logdet = ch.l().diagonal().iter().map(|v| v.ln()).sum();
    Ok((ch, half_logdet))
}

impl Point {
    fn mean(&self, eps: f64) -> DVector<f64> {
        let drift = self.metric.solve(&self.grad) * (0.5 * eps * eps);
        DVector::from_column_slice(&self.x) + drift
    }

    /// `log q(y | self)` up to a constant.
    fn log_q(&self, y: &[f64], eps: f64) -> f64 {
        let d = DVector::from_column_slice(y) - self.mean(eps);
        let l = self.metric.l();
        let ltd = l.tr_mul(&d);
        self.half_logdet - 0.5 * ltd.norm_squared() / (eps * eps)
    }
}

/// Langevin sampler preconditioned by a Hessian metric; fixed at `start`
/// unless `position_dependent`.
pub fn mcmc_sample<T: LogTarget>(target: &T, start: &[f64], opts: &ChainOptions) -> Result<Chain> {
    if start.len() != target.dim() {
        return Err(Error::Shape("start point does not match the target".into()));
    }
    if opts.thin == 0 || !(opts.step_size > 0.0) {
        return Err(Error::Config("thin must be >= 1 and the step size positive".into()));
    }
    let Some((logp, grad)) = target.log_density_grad(start)? else {
        return Err(Error::Precondition("chain start lies outside the support".into()));
    };
    let (fixed, fixed_half) = factor(regularize(&target.metric(start)?)?)?;
    let make = |x: Vec<f64>, logp: f64, grad: DVector<f64>| -> Result<Point> {
        if opts.position_dependent {
            let (metric, half_logdet) = factor(regularize(&target.metric(&x)?)?)?;
            Ok(Point { x, logp, grad, metric, half_logdet })
        } else {
            Ok(Point { x, logp, grad, metric: fixed.clone(), half_logdet: fixed_half })
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unif = Uniform::new(0.0f64, 1.0).expect("unit interval");
    let dim = target.dim();
    let mut cur = make(start.to_vec(), logp, grad)?;
    let mut log_eps = opts.step_size.ln();
    let total = opts.burn_in + opts.n_samples * opts.thin;
    let mut states = Vec::with_capacity(opts.n_samples);
    let mut logs = Vec::with_capacity(opts.n_samples);
    let mut accepted = 0usize;

    for it in 0..total {
        let eps = log_eps.exp();
        let z = DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(&mut rng)));
        let noise = cur
            .metric
            .l()
            .tr_solve_lower_triangular(&z)
            .expect("triangular factor");
        let y: Vec<f64> = (cur.mean(eps) + noise * eps).iter().copied().collect();
        let u: f64 = unif.sample(&mut rng);
        let mut prob = 0.0;
        if let Some((ly, gy)) = target.log_density_grad(&y)? {
            let prop = make(y, ly, gy)?;
            let log_alpha =
                prop.logp - cur.logp + prop.log_q(&cur.x, eps) - cur.log_q(&prop.x, eps);
            prob = log_alpha.exp().min(1.0);
            if u.ln() < log_alpha {
                cur = prop;
                if it >= opts.burn_in {
                    accepted += 1;
                }
            }
        }
        if it < opts.burn_in {
            if opts.adapt {
                log_eps += (prob - opts.target_acceptance) / ((it + 1) as f64).powf(0.6);
            }
        } else if (it - opts.burn_in + 1) % opts.thin == 0 {
            states.push(cur.x.clone());
            logs.push(cur.logp);
        }
    }
    let post = (total - opts.burn_in).max(1);
    Ok(Chain {
        states,
        log_posterior: logs,
        acceptance_rate: accepted as f64 / post as f64,
        step_size: log_eps.exp(),
        seed: opts.seed,
    })
}

/// Independent chains with seeds `opts.seed + i`.
pub fn run_chains<T: LogTarget>(
    target: &T,
    start: &[f64],
    opts: &ChainOptions,
    n_chains: usize,
) -> Result<Vec<Chain>> {
    (0..n_chains as u64)
        .into_par_iter()
        .map(|i| {
            let mut o = opts.clone();
            o.seed = opts.seed + i;
            mcmc_sample(target, start, &o)
        })
        .collect()
}

/// Bin counts on `[lo, hi]`; the right edge belongs to the last bin.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let w = (hi - lo) / bins as f64;
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let b = (((v - lo) / w) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
}

/// Monte Carlo standard error of the mean by non-overlapping batch means.
pub fn batch_means_se(values: &[f64], n_batches: usize) -> f64 {
    let size = values.len() / n_batches;
    let means: Vec<f64> = values
        .chunks_exact(size)
        .take(n_batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    (var / n_batches as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::LinearModel;

    #[test]
    fn regularize_floors_negative_modes() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        let g = regularize(&h).unwrap();
        let e = g.symmetric_eigenvalues();
        assert!((e.min() - 1e-8).abs() < 1e-20);
        assert!(regularize(&(-h)).is_ok());
        assert!(regularize(&DMatrix::from_element(2, 2, -1.0).map(|_| 0.0)).is_err());
    }

    #[test]
    fn chains_stay_in_support_and_reproduce() {
        let t = UniformBox { bounds: Bounds::uniform(2, 0.0, 1.0) };
        let o = ChainOptions::new(500, 200, 9);
        let a = mcmc_sample(&t, &[0.5, 0.5], &o).unwrap();
        let b = mcmc_sample(&t, &[0.5, 0.5], &o).unwrap();
        assert_eq!(a.states, b.states);
        assert!(a.states.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(histogram(&a.marginal(0), 0.0, 1.0, 10).iter().sum::<u64>(), 500);
    }

    #[test]
    fn gaussian_posterior_moments() {
        let m = LinearModel {
            offset: vec![0.0],
            matrix: DMatrix::from_element(1, 1, 1.0),
        };
        let d = [0.5];
        let t = PosteriorTarget::new(&m, &d, 0.05, Bounds::uniform(1, 0.0, 1.0)).unwrap();
        let c = mcmc_sample(&t, &[0.5], &ChainOptions::new(20_000, 2_000, 3)).unwrap();
        let x = c.marginal(0);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!((mean - 0.5).abs() < 4.0 * batch_means_se(&x, 50));
        assert!(c.acceptance_rate > 0.3);
    }

    #[test]
    fn position_dependent_option_runs() {
        let m = LinearModel {
            offset: vec![0.0, 0.0],
            matrix: DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]),
        };
        let d = [0.4, 0.6];
        let t = PosteriorTarget::new(&m, &d, 0.1, Bounds::uniform(2, 0.0, 1.0)).unwrap();
        let mut o = ChainOptions::new(300, 100, 1);
        o.position_dependent = true;
        let c = mcmc_sample(&t, &[0.3, 0.6], &o).unwrap();
        assert_eq!(c.states.len(), 300);
    }
}
