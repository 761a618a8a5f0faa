use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::{Grid2D, PermeabilityRealization};
use crate::{Error, Result};

/// How the flow is driven along x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowDrive {
    /// Imposed mean pressure gradient `G` (pressure `p = -G x + p'`).
    PressureGradient(f64),
    /// Gradient chosen so the mean x-velocity equals the target.
    MeanVelocity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarcyConstants {
    pub porosity: f64,
    pub viscosity: f64,
    pub drive: FlowDrive,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iterations: usize,
}

fn default_tol() -> f64 {
    1e-13
}

fn default_max_iter() -> usize {
    5000
}

impl DarcyConstants {
    pub fn new(porosity: f64, viscosity: f64, drive: FlowDrive) -> Self {
        Self {
            porosity,
            viscosity,
            drive,
            tolerance: default_tol(),
            max_iterations: default_max_iter(),
        }
    }
}

/// Face velocities: `ux[idx(i, j)]` on the face between cells `i` and
/// `i + 1` (periodic), `uy[i * (ny + 1) + j]` on the lower face of cell
/// `(i, j)`; the top and bottom faces carry zero flux.
#[derive(Debug, Clone, PartialEq)]
pub struct DarcyVelocity {
    pub grid: Grid2D,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub pressure_fluctuation: Vec<f64>,
    pub gradient: f64,
    pub porosity: f64,
    pub viscosity: f64,
    pub iterations: usize,
}

impl DarcyVelocity {
    /// Uniform flow, used for transport tests.
    pub fn uniform(grid: Grid2D, ux: f64) -> Self {
        Self {
            grid,
            ux: vec![ux; grid.n_cells()],
            uy: vec![0.0; grid.nx * (grid.ny + 1)],
            pressure_fluctuation: vec![0.0; grid.n_cells()],
            gradient: 0.0,
            porosity: 1.0,
            viscosity: 1.0,
            iterations: 0,
        }
    }

    #[inline]
    pub fn uy_at(&self, i: usize, j: usize) -> f64 {
        self.uy[i * (self.grid.ny + 1) + j]
    }

    /// Discrete divergence per cell.
    pub fn divergence(&self) -> Vec<f64> {
        let g = &self.grid;
        let (dx, dy) = (g.dx(), g.dy());
        let mut div = vec![0.0; g.n_cells()];
        for i in 0..g.nx {
            let iw = (i + g.nx - 1) % g.nx;
            for j in 0..g.ny {
                div[g.idx(i, j)] = (self.ux[g.idx(i, j)] - self.ux[g.idx(iw, j)]) / dx
                    + (self.uy_at(i, j + 1) - self.uy_at(i, j)) / dy;
            }
        }
        div
    }

    pub fn max_divergence(&self) -> f64 {
        self.divergence().iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Domain-averaged x-velocity.
    pub fn mean_ux(&self) -> f64 {
        self.ux.iter().sum::<f64>() / self.ux.len() as f64
    }

    /// Largest face speed.
    pub fn max_speed(&self) -> f64 {
        self.ux
            .iter()
            .chain(&self.uy)
            .fold(0.0, |m, u| m.max(u.abs()))
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Face mobilities `kappa_face / (phi mu)` of the finite-volume operator.
struct Operator {
    grid: Grid2D,
    tx: Vec<f64>,
    ty: Vec<f64>,
}

impl Operator {
    fn new(perm: &PermeabilityRealization, phi_mu: f64) -> Self {
        let g = perm.grid;
        let k = &perm.kappa;
        let mut tx = vec![0.0; g.n_cells()];
        let mut ty = vec![0.0; g.nx * (g.ny + 1)];
        for i in 0..g.nx {
            let ie = (i + 1) % g.nx;
            for j in 0..g.ny {
                tx[g.idx(i, j)] = harmonic(k[g.idx(i, j)], k[g.idx(ie, j)]) / phi_mu;
                if j > 0 {
                    ty[i * (g.ny + 1) + j] =
                        harmonic(k[g.idx(i, j - 1)], k[g.idx(i, j)]) / phi_mu;
                }
            }
        }
        Self { grid: g, tx, ty }
    }

    /// `(A p)_c = sum_f T_f (p_c - p_nb) / h_f^2`.
    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let g = &self.grid;
        let (ix2, iy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
        for i in 0..g.nx {
            let iw = (i + g.nx - 1) % g.nx;
            let ie = (i + 1) % g.nx;
            for j in 0..g.ny {
                let c = g.idx(i, j);
                let pc = p[c];
                let mut acc = self.tx[c] * (pc - p[g.idx(ie, j)]) * ix2
                    + self.tx[g.idx(iw, j)] * (pc - p[g.idx(iw, j)]) * ix2;
                if j > 0 {
                    acc += self.ty[i * (g.ny + 1) + j] * (pc - p[c - 1]) * iy2;
                }
                if j + 1 < g.ny {
                    acc += self.ty[i * (g.ny + 1) + j + 1] * (pc - p[c + 1]) * iy2;
                }
                out[c] = acc;
            }
        }
    }

    /// Right-hand side for unit gradient: `-(T_e - T_w) / dx^2 * dx`.
    fn rhs_unit_gradient(&self) -> Vec<f64> {
        let g = &self.grid;
        let dx = g.dx();
        let mut b = vec![0.0; g.n_cells()];
        for i in 0..g.nx {
            let iw = (i + g.nx - 1) % g.nx;
            for j in 0..g.ny {
                b[g.idx(i, j)] = -(self.tx[g.idx(i, j)] - self.tx[g.idx(iw, j)]) / dx;
            }
        }
        b
    }
}

/// Exact inverse of the constant-coefficient operator (FFT in x, tridiagonal
/// in y), restricted to mean-zero vectors.
struct Preconditioner {
    grid: Grid2D,
    mobility: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Preconditioner {
    fn new(grid: Grid2D, mobility: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            mobility,
            fwd: planner.plan_fft_forward(grid.nx),
            inv: planner.plan_fft_inverse(grid.nx),
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let g = &self.grid;
        let (nx, ny) = (g.nx, g.ny);
        let (ix2, iy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
        let m = self.mobility;
        // Transform each depth row along x.
        let mut hat = vec![Complex64::new(0.0, 0.0); nx * ny];
        let mut buf = vec![Complex64::new(0.0, 0.0); nx];
        for j in 0..ny {
            for i in 0..nx {
                buf[i] = Complex64::new(r[g.idx(i, j)], 0.0);
            }
            self.fwd.process(&mut buf);
            for q in 0..nx {
                hat[q * ny + j] = buf[q];
            }
        }
        let mut cp = vec![0.0; ny];
        let mut dp = vec![Complex64::new(0.0, 0.0); ny];
        for q in 0..nx {
            let col = &mut hat[q * ny..(q + 1) * ny];
            let shift =
                m * ix2 * (2.0 - 2.0 * (2.0 * std::f64::consts::PI * q as f64 / nx as f64).cos());
            let off = -m * iy2;
            if q == 0 {
                // Singular Neumann chain: integrate the flux, then remove the mean.
                let mut flux = Complex64::new(0.0, 0.0);
                let mut p = Complex64::new(0.0, 0.0);
                let rhs: Vec<Complex64> = col.to_vec();
                col[0] = p;
                for jj in 0..ny - 1 {
                    flux += rhs[jj];
                    p -= flux / (m * iy2);
                    col[jj + 1] = p;
                }
                let mean = col.iter().sum::<Complex64>() / ny as f64;
                col.iter_mut().for_each(|c| *c -= mean);
                continue;
            }
            // Thomas algorithm.
            let diag = |jj: usize| -> f64 {
                let nb = if jj == 0 || jj == ny - 1 { 1.0 } else { 2.0 };
                shift + nb * m * iy2
            };
            cp[0] = off / diag(0);
            dp[0] = col[0] / diag(0);
            for jj in 1..ny {
                let den = diag(jj) - off * cp[jj - 1];
                cp[jj] = off / den;
                dp[jj] = (col[jj] - off * dp[jj - 1]) / den;
            }
            col[ny - 1] = dp[ny - 1];
            for jj in (0..ny - 1).rev() {
                col[jj] = dp[jj] - cp[jj] * col[jj + 1];
            }
        }
        for j in 0..ny {
            for q in 0..nx {
                buf[q] = hat[q * ny + j];
            }
            self.inv.process(&mut buf);
            for i in 0..nx {
                z[g.idx(i, j)] = buf[i].re / nx as f64;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Preconditioned conjugate gradients on the mean-zero subspace.
fn pcg(
    op: &Operator,
    pre: &Preconditioner,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    remove_mean(&mut r);
    let bnorm = max_abs(&r);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        op.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if it % 50 == 0 {
            // Replace the recursive residual to limit drift.
            op.apply(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        let res = max_abs(&r);
        if res <= tol * bnorm {
            remove_mean(&mut x);
            return Ok((x, it));
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    op.apply(&x, &mut ap);
    let res: f64 = b
        .iter()
        .zip(&ap)
        .fold(0.0, |m, (bi, ai)| m.max((bi - ai).abs()));
    Err(Error::Solver {
        iterations: max_iter,
        residual: res / bnorm,
    })
}

/// Pressure and face velocities of incompressible Darcy flow.
pub fn solve_darcy(perm: &PermeabilityRealization, constants: &DarcyConstants) -> Result<DarcyVelocity> {
    let g = perm.grid;
    if !(constants.porosity > 0.0 && constants.viscosity > 0.0) {
        return Err(Error::Domain("porosity and viscosity must be positive".into()));
    }
    if perm.kappa.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Domain("permeability must be positive".into()));
    }
    let phi_mu = constants.porosity * constants.viscosity;
    let op = Operator::new(perm, phi_mu);
    let log_mean = perm.kappa.iter().map(|k| k.ln()).sum::<f64>() / g.n_cells() as f64;
    let pre = Preconditioner::new(g, log_mean.exp() / phi_mu);
    let b = op.rhs_unit_gradient();
    let (p1, iterations) = pcg(&op, &pre, &b, constants.tolerance, constants.max_iterations)?;

    let velocities = |gradient: f64, p: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let (dx, dy) = (g.dx(), g.dy());
        let mut ux = vec![0.0; g.n_cells()];
        let mut uy = vec![0.0; g.nx * (g.ny + 1)];
        for i in 0..g.nx {
            let ie = (i + 1) % g.nx;
            for j in 0..g.ny {
                let c = g.idx(i, j);
                ux[c] = op.tx[c] * (gradient - (p[g.idx(ie, j)] - p[c]) / dx);
                if j > 0 {
                    let f = i * (g.ny + 1) + j;
                    uy[f] = -op.ty[f] * (p[c] - p[c - 1]) / dy;
                }
            }
        }
        (ux, uy)
    };

    let unit_mean = {
        let (ux, _) = velocities(1.0, &p1);
        ux.iter().sum::<f64>() / ux.len() as f64
    };
    let gradient = match constants.drive {
        FlowDrive::PressureGradient(gr) => gr,
        FlowDrive::MeanVelocity(u) => u / unit_mean,
    };
    let p: Vec<f64> = p1.iter().map(|v| v * gradient).collect();
    let (ux, uy) = velocities(gradient, &p);
    let vel = DarcyVelocity {
        grid: g,
        ux,
        uy,
        pressure_fluctuation: p,
        gradient,
        porosity: constants.porosity,
        viscosity: constants.viscosity,
        iterations,
    };
    log::debug!(
        "darcy: {iterations} PCG iterations, divergence {:.2e}",
        vel.max_divergence()
    );
    Ok(vel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highfid::{sample_permeability, LogNormalStats};

    fn consts(g: f64) -> DarcyConstants {
        DarcyConstants::new(0.5, 2.0, FlowDrive::PressureGradient(g))
    }

    #[test]
    fn homogeneous_medium() {
        let grid = Grid2D::new(1.0, 0.5, 16, 8).unwrap();
        let perm = PermeabilityRealization::constant(grid, 3.0).unwrap();
        let v = solve_darcy(&perm, &consts(2.0)).unwrap();
        for u in &v.ux {
            assert!((u - 3.0 * 2.0 / 1.0).abs() < 1e-12);
        }
        assert!(v.uy.iter().all(|u| u.abs() < 1e-12));
        assert!(v.pressure_fluctuation.iter().all(|p| p.abs() < 1e-14));
    }

    #[test]
    fn layered_medium() {
        let grid = Grid2D::square(8).unwrap();
        let layers: Vec<f64> = (0..8).map(|j| 1.0 + j as f64).collect();
        let perm = PermeabilityRealization::layered(grid, &layers).unwrap();
        let v = solve_darcy(&perm, &consts(1.0)).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((v.ux[grid.idx(i, j)] - layers[j]).abs() < 1e-12);
            }
        }
        assert!(v.uy.iter().all(|u| u.abs() < 1e-12));
    }

    #[test]
    fn random_medium_is_divergence_free() {
        let grid = Grid2D::square(32).unwrap();
        let stats = LogNormalStats {
            log_mean: 0.0,
            log_variance: 1.0,
            corr_x: 0.1,
            corr_y: 0.1,
        };
        let perm = sample_permeability(grid, stats, 3).unwrap();
        let v = solve_darcy(&perm, &consts(1.0)).unwrap();
        assert!(v.max_divergence() < 1e-10, "{}", v.max_divergence());
        let w = solve_darcy(
            &perm,
            &DarcyConstants::new(0.5, 2.0, FlowDrive::MeanVelocity(1.0)),
        )
        .unwrap();
        assert!((w.mean_ux() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_solver_error() {
        let grid = Grid2D::square(16).unwrap();
        let stats = LogNormalStats {
            log_mean: 0.0,
            log_variance: 2.0,
            corr_x: 0.1,
            corr_y: 0.1,
        };
        let perm = sample_permeability(grid, stats, 1).unwrap();
        let mut c = consts(1.0);
        c.max_iterations = 1;
        assert!(matches!(solve_darcy(&perm, &c), Err(Error::Solver { .. })));
    }
}
