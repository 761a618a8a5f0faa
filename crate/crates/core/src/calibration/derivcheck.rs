use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{evaluate, misfit, misfit_gradient, ObservationModel};
use crate::{Error, Result};

pub const GRADIENT_TOL: f64 = 1e-5;
pub const HESSIAN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub step: f64,
    /// `max |g - g_fd| / max |g_fd|`.
    pub gradient_error: f64,
    /// `max |H - H_fd| / max |H_fd|`.
    pub hessian_error: f64,
    /// `max |J - J_fd| / max |J_fd|` for the Jacobian of the predictions.
    pub jacobian_error: f64,
}

impl DerivativeReport {
    pub fn gradient_pass(&self) -> bool {
        self.gradient_error < GRADIENT_TOL
    }

    pub fn hessian_pass(&self) -> bool {
        self.hessian_error < HESSIAN_TOL
    }

    pub fn pass(&self) -> bool {
        self.gradient_pass() && self.hessian_pass()
    }
}

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax();
    let diff = (a - b).amax();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Compare the analytic gradient with central differences of `J`, and the
/// analytic Hessian and Jacobian with central differences of the analytic
/// gradient and predictions.
pub fn check_derivatives<M: ObservationModel>(
    model: &M,
    p: &[f64],
    data: &[f64],
    h: f64,
) -> Result<DerivativeReport> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    let n = model.n_params();
    let eval = evaluate(model, p, data, false)?;
    let (_, jac) = model.linearize(p)?;
    let mut g_fd = DMatrix::zeros(n, 1);
    let mut h_fd = DMatrix::zeros(n, n);
    let mut j_fd = DMatrix::zeros(model.n_obs(), n);
    for i in 0..n {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[i] += h;
        minus[i] -= h;
        g_fd[(i, 0)] = (misfit(model, &plus, data)? - misfit(model, &minus, data)?) / (2.0 * h);
        let (_, gp) = misfit_gradient(model, &plus, data)?;
        let (_, gm) = misfit_gradient(model, &minus, data)?;
        h_fd.set_column(i, &((gp - gm) / (2.0 * h)));
        let cp = model.predict(&plus)?;
        let cm = model.predict(&minus)?;
        for j in 0..model.n_obs() {
            j_fd[(j, i)] = (cp[j] - cm[j]) / (2.0 * h);
        }
    }
    let g = DMatrix::from_column_slice(n, 1, eval.gradient.as_slice());
    Ok(DerivativeReport {
        step: h,
        gradient_error: rel_err(&g, &g_fd),
        hessian_error: rel_err(&eval.hessian, &h_fd),
        jacobian_error: rel_err(&jac, &j_fd),
    })
}

/// Reports for each step in `steps`.
pub fn step_sweep<M: ObservationModel>(
    model: &M,
    p: &[f64],
    data: &[f64],
    steps: &[f64],
) -> Result<Vec<DerivativeReport>> {
    steps.iter().map(|&h| check_derivatives(model, p, data, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{spatial_points, Coordinates, LinearModel, SpectralModel};
    use crate::spectral::{frade_spectrum, InitialCondition, TransportConstants, WaveGrid};

    #[test]
    fn linear_model_passes() {
        let m = LinearModel {
            offset: vec![0.0, 1.0, 2.0],
            matrix: DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 0.3, 0.3]),
        };
        let r = check_derivatives(&m, &[0.2, 0.4], &[1.0, 0.0, -1.0], 1e-4).unwrap();
        assert!(r.pass());
        assert!(r.hessian_error < 1e-9);
    }

    #[test]
    fn spectral_model_passes() {
        let g = WaveGrid::minimal(1.0, 5).unwrap();
        let c0 = InitialCondition::gaussian_bump(0.3, 0.1).field(&g).unwrap();
        let c = TransportConstants::new(1.0, 0.05, 1.5).unwrap();
        let mut pts = spatial_points(1.0, 7, 0.2);
        pts.extend(spatial_points(1.0, 5, 0.35));
        let m = SpectralModel::new(&c0, &c, &pts, Coordinates::Rescaled).unwrap();
        let mut p = m.params_of(&frade_spectrum(&c, &g).unwrap()).unwrap();
        p.iter_mut().enumerate().for_each(|(i, v)| *v += 0.01 * (i as f64).cos());
        let d = vec![0.1; pts.len()];
        let r = check_derivatives(&m, &p, &d, 1e-6).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!(r.jacobian_error < 1e-5);
    }

    #[test]
    fn rejects_bad_step() {
        let m = LinearModel {
            offset: vec![0.0],
            matrix: DMatrix::from_element(1, 1, 1.0),
        };
        assert!(check_derivatives(&m, &[0.0], &[0.0], 0.0).is_err());
    }
}
