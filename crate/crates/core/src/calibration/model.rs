use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ObsPoint;
use crate::spectral::{OperatorSpectrum, RescaledParameters, SpectralField, TransportConstants, WaveGrid};
use crate::{Error, Result};

/// Parameter-to-observable map `p -> c(p)` with first and second derivatives.
pub trait ObservationModel: Sync {
    fn n_params(&self) -> usize;
    fn n_obs(&self) -> usize;
    fn predict(&self, p: &[f64]) -> Result<Vec<f64>>;
    /// Predictions and the Jacobian `dc_j / dp_i` (`n_obs x n_params`).
    fn linearize(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)>;
    /// `sum_j w_j d^2 c_j / dp dp^T`.
    fn weighted_curvature(&self, p: &[f64], w: &[f64]) -> Result<DMatrix<f64>>;
}

/// Coordinates of the spectral parameter vector `[r_1..r_n, theta_1..theta_n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// Radii and arguments as they are.
    Physical,
    /// `r* = (r - k_x) / (k_x^2 - k_x)`, `theta* = (theta - pi/2) / pi`.
    #[default]
    Rescaled,
}

/// Generalized-ADE observations of a fixed initial condition.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    grid: WaveGrid,
    coords: Coordinates,
    mean: f64,
    points: Vec<ObsPoint>,
    /// `c_k(0) exp(i k_x (x_j - u t_j))`, row-major `[j * n + (k - 1)]`.
    base: Vec<Complex64>,
    /// `(offset, scale)` of the radius map per mode.
    radius_map: Vec<(f64, f64)>,
}

impl SpectralModel {
    pub fn new(
        c0: &SpectralField,
        constants: &TransportConstants,
        points: &[ObsPoint],
        coords: Coordinates,
    ) -> Result<Self> {
        constants.validate()?;
        let grid = *c0.grid();
        let n = grid.n_modes();
        let u = constants.mean_velocity;
        let mut base = Vec::with_capacity(points.len() * n);
        for p in points {
            for k in 1..=n as i64 {
                let kx = grid.wavenumber(k);
                base.push(c0.coeff(k) * Complex64::from_polar(1.0, kx * (p.x - u * p.t)));
            }
        }
        let radius_map = (1..=n as i64)
            .map(|k| match coords {
                Coordinates::Physical => Ok((0.0, 1.0)),
                Coordinates::Rescaled => crate::spectral::radius_map(&grid, k),
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid,
            coords,
            mean: c0.coeff(0).re,
            points: points.to_vec(),
            base,
            radius_map,
        })
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn coordinates(&self) -> Coordinates {
        self.coords
    }

    pub fn n_modes(&self) -> usize {
        self.grid.n_modes()
    }

    pub fn points(&self) -> &[ObsPoint] {
        &self.points
    }

    /// Derivative scale factors `(dr/dp_r, dtheta/dp_theta)` of mode `k`.
    fn scales(&self, k: usize) -> (f64, f64) {
        match self.coords {
            Coordinates::Physical => (1.0, 1.0),
            Coordinates::Rescaled => (self.radius_map[k].1, PI),
        }
    }

    /// Polar eigenvalue components from the parameter vector.
    pub fn polar(&self, p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n_modes();
        if p.len() != 2 * n {
            return Err(Error::Shape(format!(
                "parameter vector has {} entries, expected {}",
                p.len(),
                2 * n
            )));
        }
        let mut r = Vec::with_capacity(n);
        let mut th = Vec::with_capacity(n);
        for k in 0..n {
            let (ri, ti) = match self.coords {
                Coordinates::Physical => (p[k], p[n + k]),
                Coordinates::Rescaled => {
                    let (a, b) = self.radius_map[k];
                    (a + b * p[k], FRAC_PI_2 + PI * p[n + k])
                }
            };
            if !(ri > 0.0) || !ri.is_finite() {
                return Err(Error::Domain(format!("radius of mode {} is {ri}, must be > 0", k + 1)));
            }
            if !(FRAC_PI_2 - 1e-12..=1.5 * PI + 1e-12).contains(&ti) {
                return Err(Error::Domain(format!(
                    "argument of mode {} is {ti}, outside [pi/2, 3pi/2]",
                    k + 1
                )));
            }
            r.push(ri);
            th.push(ti);
        }
        Ok((r, th))
    }

    pub fn spectrum(&self, p: &[f64]) -> Result<OperatorSpectrum> {
        let (r, th) = self.polar(p)?;
        OperatorSpectrum::new(self.grid, r, th)
    }

    /// Parameter vector of a spectrum in this model's coordinates.
    pub fn params_of(&self, spectrum: &OperatorSpectrum) -> Result<Vec<f64>> {
        if !self.grid.same_modes(spectrum.grid()) {
            return Err(Error::Shape("spectrum and model grids differ".into()));
        }
        match self.coords {
            Coordinates::Physical => {
                Ok([spectrum.radii(), spectrum.arguments()].concat())
            }
            Coordinates::Rescaled => {
                let RescaledParameters {
                    r_star, theta_star, ..
                } = crate::spectral::rescale(spectrum)?;
                Ok([r_star, theta_star].concat())
            }
        }
    }

    /// Box of admissible values: `r > r_floor`, `theta in [pi/2, 3pi/2]`.
    pub fn admissible_bounds(&self, r_floor: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_modes();
        let mut lo = vec![0.0; 2 * n];
        let mut hi = vec![0.0; 2 * n];
        for k in 0..n {
            let (a, b) = self.radius_map[k];
            let (rl, rh) = match self.coords {
                Coordinates::Physical => (r_floor, f64::INFINITY),
                Coordinates::Rescaled if b > 0.0 => ((r_floor - a) / b, f64::INFINITY),
                Coordinates::Rescaled => (f64::NEG_INFINITY, (r_floor - a) / b),
            };
            lo[k] = rl;
            hi[k] = rh;
            let (tl, th) = match self.coords {
                Coordinates::Physical => (FRAC_PI_2, 1.5 * PI),
                Coordinates::Rescaled => (0.0, 1.0),
            };
            lo[n + k] = tl;
            hi[n + k] = th;
        }
        (lo, hi)
    }

    /// `T_jk = c_k(t_j) phi_k(x_j)` with `mu_k` from polar form.
    fn terms(&self, r: &[f64], th: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mu: Vec<Complex64> = r
            .iter()
            .zip(th)
            .map(|(&r, &t)| Complex64::from_polar(r, t))
            .collect();
        let n = self.n_modes();
        let mut terms = vec![Complex64::new(0.0, 0.0); self.base.len()];
        for (j, pt) in self.points.iter().enumerate() {
            for k in 0..n {
                let b = self.base[j * n + k];
                terms[j * n + k] = if b == Complex64::new(0.0, 0.0) {
                    b
                } else {
                    b * (mu[k] * pt.t).exp()
                };
            }
        }
        (mu, terms)
    }
}

impl ObservationModel for SpectralModel {
    fn n_params(&self) -> usize {
        2 * self.n_modes()
    }

    fn n_obs(&self) -> usize {
        self.points.len()
    }

    fn predict(&self, p: &[f64]) -> Result<Vec<f64>> {
        let (r, th) = self.polar(p)?;
        let (_, terms) = self.terms(&r, &th);
        let n = self.n_modes();
        Ok((0..self.points.len())
            .map(|j| self.mean + 2.0 * terms[j * n..(j + 1) * n].iter().map(|z| z.re).sum::<f64>())
            .collect())
    }

    fn linearize(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (r, th) = self.polar(p)?;
        let (mu, terms) = self.terms(&r, &th);
        let n = self.n_modes();
        let m = self.points.len();
        let pred: Vec<f64> = (0..m)
            .map(|j| self.mean + 2.0 * terms[j * n..(j + 1) * n].iter().map(|z| z.re).sum::<f64>())
            .collect();
        let mut jac = DMatrix::zeros(m, 2 * n);
        let i = Complex64::new(0.0, 1.0);
        for (j, pt) in self.points.iter().enumerate() {
            let t = pt.t;
            for k in 0..n {
                let tk = terms[j * n + k];
                let (sr, st) = self.scales(k);
                let e = Complex64::from_polar(1.0, th[k]);
                jac[(j, k)] = sr * 2.0 * (e * t * tk).re;
                jac[(j, n + k)] = st * 2.0 * (i * t * mu[k] * tk).re;
            }
        }
        Ok((pred, jac))
    }

    fn weighted_curvature(&self, p: &[f64], w: &[f64]) -> Result<DMatrix<f64>> {
        if w.len() != self.points.len() {
            return Err(Error::Shape("curvature weights do not match observations".into()));
        }
        let (r, th) = self.polar(p)?;
        let (mu, terms) = self.terms(&r, &th);
        let n = self.n_modes();
        let i = Complex64::new(0.0, 1.0);
        let mut rr = vec![0.0; n];
        let mut rt = vec![0.0; n];
        let mut tt = vec![0.0; n];
        for (j, pt) in self.points.iter().enumerate() {
            if w[j] == 0.0 {
                continue;
            }
            let t = pt.t;
            for k in 0..n {
                let tk = terms[j * n + k] * w[j];
                let e = Complex64::from_polar(1.0, th[k]);
                let et = e * t;
                let tm = t * mu[k];
                rr[k] += 2.0 * (et * et * tk).re;
                rt[k] += 2.0 * (i * et * (1.0 + tm) * tk).re;
                tt[k] += 2.0 * (-tm * (1.0 + tm) * tk).re;
            }
        }
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            let (sr, st) = self.scales(k);
            h[(k, k)] = sr * sr * rr[k];
            h[(k, n + k)] = sr * st * rt[k];
            h[(n + k, k)] = sr * st * rt[k];
            h[(n + k, n + k)] = st * st * tt[k];
        }
        Ok(h)
    }
}

/// Model restricted to a subset of parameters, the rest frozen at `base`.
pub struct Subspace<'a, M: ObservationModel> {
    inner: &'a M,
    base: Vec<f64>,
    active: Vec<usize>,
}

impl<'a, M: ObservationModel> Subspace<'a, M> {
    pub fn new(inner: &'a M, base: Vec<f64>, active: Vec<usize>) -> Result<Self> {
        if base.len() != inner.n_params() || active.iter().any(|&a| a >= base.len()) {
            return Err(Error::Shape("subspace does not fit the model".into()));
        }
        Ok(Self {
            inner,
            base,
            active,
        })
    }

    pub fn embed(&self, q: &[f64]) -> Vec<f64> {
        let mut p = self.base.clone();
        for (&a, &v) in self.active.iter().zip(q) {
            p[a] = v;
        }
        p
    }

    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&a| p[a]).collect()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }
}

impl<M: ObservationModel> ObservationModel for Subspace<'_, M> {
    fn n_params(&self) -> usize {
        self.active.len()
    }

    fn n_obs(&self) -> usize {
        self.inner.n_obs()
    }

    fn predict(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.inner.predict(&self.embed(q))
    }

    fn linearize(&self, q: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (pred, jac) = self.inner.linearize(&self.embed(q))?;
        Ok((pred, jac.select_columns(&self.active)))
    }

    fn weighted_curvature(&self, q: &[f64], w: &[f64]) -> Result<DMatrix<f64>> {
        let h = self.inner.weighted_curvature(&self.embed(q), w)?;
        Ok(h.select_rows(&self.active).select_columns(&self.active))
    }
}

/// Affine map `c = c0 + A p`, used to test the optimizer against a linear
/// least-squares oracle.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub offset: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl ObservationModel for LinearModel {
    fn n_params(&self) -> usize {
        self.matrix.ncols()
    }

    fn n_obs(&self) -> usize {
        self.matrix.nrows()
    }

    fn predict(&self, p: &[f64]) -> Result<Vec<f64>> {
        let v = &self.matrix * nalgebra::DVector::from_column_slice(p);
        Ok(v.iter().zip(&self.offset).map(|(a, b)| a + b).collect())
    }

    fn linearize(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        Ok((self.predict(p)?, self.matrix.clone()))
    }

    fn weighted_curvature(&self, _p: &[f64], _w: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(self.n_params(), self.n_params()))
    }
}

/// Samples of the generalized-ADE solution at arbitrary points.
pub fn forward_observe(
    spectrum: &OperatorSpectrum,
    c0: &SpectralField,
    constants: &TransportConstants,
    points: &[ObsPoint],
) -> Result<Vec<f64>> {
    let model = SpectralModel::new(c0, constants, points, Coordinates::Physical)?;
    model.predict(&model.params_of(spectrum)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::spatial_points;
    use crate::spectral::{fickian_spectrum, frade_spectrum, propagate_exact, synthesize, InitialCondition};

    fn setup(n: usize) -> (SpectralField, TransportConstants) {
        let g = WaveGrid::minimal(1.0, n).unwrap();
        let c0 = InitialCondition::gaussian_bump(0.3, 0.1).field(&g).unwrap();
        (c0, TransportConstants::new(0.7, 0.02, 1.5).unwrap())
    }

    #[test]
    fn time_zero_returns_initial_condition() {
        let (c0, c) = setup(8);
        let pts = spatial_points(1.0, 17, 0.0);
        let s = frade_spectrum(&c, c0.grid()).unwrap();
        let v = forward_observe(&s, &c0, &c, &pts).unwrap();
        let ic = synthesize(&c0).unwrap();
        for (a, b) in v.iter().zip(&ic) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn matches_propagate_then_synthesize() {
        let (c0, c) = setup(8);
        let s = fickian_spectrum(0.05, c0.grid()).unwrap();
        let pts = spatial_points(1.0, 17, 0.4);
        let v = forward_observe(&s, &c0, &c, &pts).unwrap();
        let f = synthesize(&propagate_exact(&c0, &s, &c, 0.4).unwrap()).unwrap();
        for (a, b) in v.iter().zip(&f) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_time_rows_vanish() {
        let (c0, c) = setup(4);
        let mut pts = spatial_points(1.0, 3, 0.0);
        pts.push(ObsPoint { x: 0.2, t: 0.3 });
        let m = SpectralModel::new(&c0, &c, &pts, Coordinates::Rescaled).unwrap();
        let p = m.params_of(&frade_spectrum(&c, c0.grid()).unwrap()).unwrap();
        let (_, jac) = m.linearize(&p).unwrap();
        for j in 0..3 {
            assert!(jac.row(j).iter().all(|&v| v == 0.0));
        }
        assert!(jac.row(3).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn out_of_bounds_parameters_rejected() {
        let (c0, c) = setup(2);
        let m = SpectralModel::new(&c0, &c, &spatial_points(1.0, 3, 0.1), Coordinates::Rescaled).unwrap();
        assert!(matches!(m.predict(&[0.5, 0.5, 1.2, 0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn subspace_embeds() {
        let (c0, c) = setup(3);
        let m = SpectralModel::new(&c0, &c, &spatial_points(1.0, 5, 0.1), Coordinates::Rescaled).unwrap();
        let base = vec![0.5; 6];
        let s = Subspace::new(&m, base.clone(), vec![0, 3]).unwrap();
        assert_eq!(s.embed(&[0.2, 0.7]), vec![0.2, 0.5, 0.5, 0.7, 0.5, 0.5]);
        let (_, j) = s.linearize(&[0.2, 0.7]).unwrap();
        assert_eq!(j.ncols(), 2);
    }
}
