use serde::{Deserialize, Serialize};

use super::{Concentration2D, DarcyVelocity};
use crate::{Error, Result};

/// Slope reconstruction for the advective flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    /// Monotone, positivity preserving.
    #[default]
    VanLeer,
    /// Unlimited centred slope; linear in the data.
    Fromm,
    /// Piecewise constant.
    Upwind,
}

impl Limiter {
    #[inline]
    fn slope(self, back: f64, fwd: f64) -> f64 {
        match self {
            Limiter::VanLeer => {
                if back * fwd > 0.0 {
                    2.0 * back * fwd / (back + fwd)
                } else {
                    0.0
                }
            }
            Limiter::Fromm => 0.5 * (back + fwd),
            Limiter::Upwind => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportOptions {
    pub diffusivity: f64,
    #[serde(default)]
    pub limiter: Limiter,
    /// Target advective Courant number for automatic step selection.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.4
}

impl TransportOptions {
    pub fn new(diffusivity: f64, limiter: Limiter) -> Self {
        Self {
            diffusivity,
            limiter,
            cfl: default_cfl(),
        }
    }
}

/// Advective Courant number `max(|u_x| dt/dx + |u_y| dt/dy)` over cells.
pub fn courant_number(vel: &DarcyVelocity, dt: f64) -> f64 {
    let g = &vel.grid;
    let mut worst: f64 = 0.0;
    for i in 0..g.nx {
        let iw = (i + g.nx - 1) % g.nx;
        for j in 0..g.ny {
            let ux = vel.ux[g.idx(i, j)].abs().max(vel.ux[g.idx(iw, j)].abs());
            let uy = vel.uy_at(i, j).abs().max(vel.uy_at(i, j + 1).abs());
            worst = worst.max(ux * dt / g.dx() + uy * dt / g.dy());
        }
    }
    worst
}

/// Largest stable step for the given options.
pub fn stable_step(vel: &DarcyVelocity, opts: &TransportOptions) -> f64 {
    let g = &vel.grid;
    let c1 = courant_number(vel, 1.0);
    let adv = if c1 > 0.0 { opts.cfl / c1 } else { f64::INFINITY };
    let d = opts.diffusivity * (2.0 / (g.dx() * g.dx()) + 2.0 / (g.dy() * g.dy()));
    let diff = if d > 0.0 { 0.45 / d } else { f64::INFINITY };
    adv.min(diff)
}

/// Right-hand side `-div(u c) + nu lap(c)` in flux form.
fn rhs(c: &[f64], vel: &DarcyVelocity, nu: f64, limiter: Limiter, out: &mut [f64], sx: &mut [f64], sy: &mut [f64]) {
    let g = &vel.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (dx, dy) = (g.dx(), g.dy());
    let (ix, iy) = (1.0 / dx, 1.0 / dy);

    // Limited slopes.
    for i in 0..nx {
        let iw = (i + nx - 1) % nx;
        let ie = (i + 1) % nx;
        for j in 0..ny {
            let cc = c[g.idx(i, j)];
            sx[g.idx(i, j)] = limiter.slope(cc - c[g.idx(iw, j)], c[g.idx(ie, j)] - cc);
            let below = if j > 0 { c[g.idx(i, j - 1)] } else { cc };
            let above = if j + 1 < ny { c[g.idx(i, j + 1)] } else { cc };
            sy[g.idx(i, j)] = limiter.slope(cc - below, above - cc);
        }
    }
    out.iter_mut().for_each(|o| *o = 0.0);

    // x faces (periodic).
    for i in 0..nx {
        let ie = (i + 1) % nx;
        for j in 0..ny {
            let l = g.idx(i, j);
            let r = g.idx(ie, j);
            let u = vel.ux[l];
            let face = if u >= 0.0 {
                c[l] + 0.5 * sx[l]
            } else {
                c[r] - 0.5 * sx[r]
            };
            let flux = (u * face - nu * (c[r] - c[l]) * ix) * ix;
            out[l] -= flux;
            out[r] += flux;
        }
    }
    // Interior y faces.
    for i in 0..nx {
        for j in 1..ny {
            let b = g.idx(i, j - 1);
            let t = g.idx(i, j);
            let u = vel.uy_at(i, j);
            let face = if u >= 0.0 {
                c[b] + 0.5 * sy[b]
            } else {
                c[t] - 0.5 * sy[t]
            };
            let flux = (u * face - nu * (c[t] - c[b]) * iy) * iy;
            out[b] -= flux;
            out[t] += flux;
        }
    }
}

/// Advance by `n_steps` SSP-RK2 steps of size `dt`.
pub fn advance_ade2d(
    c: &Concentration2D,
    vel: &DarcyVelocity,
    opts: &TransportOptions,
    dt: f64,
    n_steps: usize,
) -> Result<Concentration2D> {
    let g = c.grid;
    if g != vel.grid {
        return Err(Error::Shape("concentration and velocity grids differ".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Precondition(format!("time step must be positive, got {dt}")));
    }
    let cfl = courant_number(vel, dt);
    if cfl > 1.0 {
        return Err(Error::Precondition(format!(
            "time step {dt:e} violates the advective CFL condition (Courant number {cfl:.3})"
        )));
    }
    let nu = opts.diffusivity;
    let diff = nu * dt * (2.0 / (g.dx() * g.dx()) + 2.0 / (g.dy() * g.dy()));
    if diff > 1.0 {
        return Err(Error::Precondition(format!(
            "time step {dt:e} violates the explicit diffusion limit (number {diff:.3})"
        )));
    }
    let n = g.n_cells();
    let mut u = c.values.clone();
    let mut k = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut sx = vec![0.0; n];
    let mut sy = vec![0.0; n];
    for _ in 0..n_steps {
        rhs(&u, vel, nu, opts.limiter, &mut k, &mut sx, &mut sy);
        for m in 0..n {
            stage[m] = u[m] + dt * k[m];
        }
        rhs(&stage, vel, nu, opts.limiter, &mut k, &mut sx, &mut sy);
        for m in 0..n {
            u[m] = 0.5 * u[m] + 0.5 * (stage[m] + dt * k[m]);
        }
    }
    Concentration2D::new(g, u, c.time + dt * n_steps as f64)
}

/// Snapshots at increasing `times` (the first may equal the start time),
/// stepping no faster than [`stable_step`] and landing exactly on each time.
pub fn evolve_to_times(
    c0: &Concentration2D,
    vel: &DarcyVelocity,
    opts: &TransportOptions,
    times: &[f64],
) -> Result<Vec<Concentration2D>> {
    let dt_max = stable_step(vel, opts);
    let mut out = Vec::with_capacity(times.len());
    let mut cur = c0.clone();
    for &t in times {
        let span = t - cur.time;
        if span < -1e-12 * t.abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "output times must be increasing and start at or after {}",
                c0.time
            )));
        }
        if span > 1e-14 * t.abs().max(1.0) {
            let n = (span / dt_max).ceil().max(1.0) as usize;
            cur = advance_ade2d(&cur, vel, opts, span / n as f64, n)?;
        }
        cur.time = t;
        out.push(cur.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highfid::{depth_average, Grid2D};

    fn bump(g: Grid2D) -> Concentration2D {
        let f: Vec<f64> = g
            .xs()
            .iter()
            .map(|x| (-((x - 0.5) / 0.1).powi(2)).exp())
            .collect();
        Concentration2D::from_profile(g, &f, 0.0).unwrap()
    }

    #[test]
    fn constant_field_is_fixed_point() {
        let g = Grid2D::square(16).unwrap();
        let vel = DarcyVelocity::uniform(g, 1.3);
        let c = Concentration2D::new(g, vec![2.5; g.n_cells()], 0.0).unwrap();
        let opts = TransportOptions::new(1e-3, Limiter::VanLeer);
        let out = advance_ade2d(&c, &vel, &opts, 0.01, 50).unwrap();
        assert!(out.values.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn mass_is_conserved() {
        let g = Grid2D::square(16).unwrap();
        let vel = DarcyVelocity::uniform(g, 1.0);
        let c = bump(g);
        let opts = TransportOptions::new(1e-3, Limiter::VanLeer);
        let out = advance_ade2d(&c, &vel, &opts, 0.01, 200).unwrap();
        assert!(((out.mass() - c.mass()) / c.mass()).abs() < 1e-12);
        assert!(out.min() >= -1e-15);
    }

    #[test]
    fn cfl_violation_rejected() {
        let g = Grid2D::square(16).unwrap();
        let vel = DarcyVelocity::uniform(g, 1.0);
        let opts = TransportOptions::new(0.0, Limiter::VanLeer);
        let err = advance_ade2d(&bump(g), &vel, &opts, 0.1, 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(m) if m.contains("1e-1")));
    }

    #[test]
    fn full_period_translation_converges() {
        let err = |n: usize| {
            let g = Grid2D::new(1.0, 1.0, n, 2).unwrap();
            let vel = DarcyVelocity::uniform(g, 1.0);
            let c = bump(g);
            let opts = TransportOptions::new(0.0, Limiter::Fromm);
            let out = evolve_to_times(&c, &vel, &opts, &[1.0]).unwrap();
            assert_eq!(out[0].time, 1.0);
            let a = depth_average(&out[0]);
            let b = depth_average(&c);
            a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn fromm_is_linear() {
        let g = Grid2D::square(8).unwrap();
        let vel = DarcyVelocity::uniform(g, 0.7);
        let c = bump(g);
        let mut c3 = c.clone();
        c3.values.iter_mut().for_each(|v| *v *= -3.0);
        let opts = TransportOptions::new(1e-3, Limiter::Fromm);
        let a = advance_ade2d(&c, &vel, &opts, 0.01, 10).unwrap();
        let b = advance_ade2d(&c3, &vel, &opts, 0.01, 10).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((-3.0 * x - y).abs() < 1e-14);
        }
    }
}
