use nalgebra::{DMatrix, DVector};

use super::ObservationModel;
use crate::{Error, Result};

/// Misfit `J = 1/2 |c - d|^2` with gradient and Hessian at one point.
#[derive(Debug, Clone)]
pub struct MisfitEvaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub gn_only: bool,
}

impl MisfitEvaluation {
    fn half(&self) -> usize {
        self.gradient.len() / 2
    }

    pub fn h_rr(&self) -> DMatrix<f64> {
        let n = self.half();
        self.hessian.view((0, 0), (n, n)).into_owned()
    }

    pub fn h_rtheta(&self) -> DMatrix<f64> {
        let n = self.half();
        self.hessian.view((0, n), (n, n)).into_owned()
    }

    pub fn h_thetatheta(&self) -> DMatrix<f64> {
        let n = self.half();
        self.hessian.view((n, n), (n, n)).into_owned()
    }

    /// Largest asymmetry `|H - H^T|` relative to `max |H|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.hessian.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.hessian - self.hessian.transpose()).amax() / scale
    }
}

fn check_data<M: ObservationModel>(model: &M, data: &[f64]) -> Result<()> {
    if data.len() != model.n_obs() {
        return Err(Error::Shape(format!(
            "{} data values for {} observations",
            data.len(),
            model.n_obs()
        )));
    }
    Ok(())
}

pub fn misfit<M: ObservationModel>(model: &M, p: &[f64], data: &[f64]) -> Result<f64> {
    check_data(model, data)?;
    let pred = model.predict(p)?;
    Ok(0.5 * pred.iter().zip(data).map(|(c, d)| (c - d) * (c - d)).sum::<f64>())
}

/// Value and gradient `J^T (c - d)`.
pub fn misfit_gradient<M: ObservationModel>(
    model: &M,
    p: &[f64],
    data: &[f64],
) -> Result<(f64, DVector<f64>)> {
    check_data(model, data)?;
    let (pred, jac) = model.linearize(p)?;
    let res = DVector::from_iterator(pred.len(), pred.iter().zip(data).map(|(c, d)| c - d));
    Ok((0.5 * res.norm_squared(), jac.tr_mul(&res)))
}

/// Value, gradient and Hessian `J^T J + sum_j (c_j - d_j) d^2 c_j`.
pub fn evaluate<M: ObservationModel>(
    model: &M,
    p: &[f64],
    data: &[f64],
    gn_only: bool,
) -> Result<MisfitEvaluation> {
    check_data(model, data)?;
    let (pred, jac) = model.linearize(p)?;
    let res: Vec<f64> = pred.iter().zip(data).map(|(c, d)| c - d).collect();
    let rv = DVector::from_column_slice(&res);
    let mut hessian = jac.tr_mul(&jac);
    if !gn_only {
        hessian += model.weighted_curvature(p, &res)?;
    }
    Ok(MisfitEvaluation {
        value: 0.5 * rv.norm_squared(),
        gradient: jac.tr_mul(&rv),
        hessian,
        gn_only,
    })
}

/// Outcome of the Hessian-diagonal sensitivity analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    pub r_sensitivity: Vec<f64>,
    pub theta_sensitivity: Vec<f64>,
    pub k_r: usize,
    pub k_theta: usize,
    /// Highest active mode, `max(k_r, k_theta)`.
    pub cutoff: usize,
    pub tolerance: f64,
}

impl SensitivityReport {
    /// Parameter indices of modes `1..=cutoff`, radii first.
    pub fn active_indices(&self) -> Vec<usize> {
        let n = self.r_sensitivity.len();
        (0..self.cutoff).chain(n..n + self.cutoff).collect()
    }

    pub fn n_active(&self) -> usize {
        2 * self.cutoff
    }
}

/// Largest 1-based index whose value is `>= tol * max`; zero if none.
fn last_above(values: &[f64], tol: f64) -> usize {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return 0;
    }
    values
        .iter()
        .rposition(|&v| v >= tol * max)
        .map_or(0, |i| i + 1)
}

/// Keep modes up to the last whose radius or argument diagonal Hessian
/// entry reaches `tol` times the largest of its kind.
pub fn sensitivity_cutoff<M: ObservationModel>(
    model: &M,
    p: &[f64],
    data: &[f64],
    tol: f64,
    gn_only: bool,
) -> Result<SensitivityReport> {
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(Error::Domain(format!("sensitivity tolerance {tol} outside (0, 1]")));
    }
    let eval = evaluate(model, p, data, gn_only)?;
    let n = p.len() / 2;
    let diag = eval.hessian.diagonal();
    let r_sensitivity: Vec<f64> = diag.iter().take(n).copied().collect();
    let theta_sensitivity: Vec<f64> = diag.iter().skip(n).copied().collect();
    let k_r = last_above(&r_sensitivity, tol);
    let k_theta = last_above(&theta_sensitivity, tol);
    if k_r == 0 && k_theta == 0 {
        return Err(Error::Numerical(
            "all sensitivities vanish; the data carry no information".into(),
        ));
    }
    Ok(SensitivityReport {
        r_sensitivity,
        theta_sensitivity,
        k_r,
        k_theta,
        cutoff: k_r.max(k_theta),
        tolerance: tol,
    })
}
