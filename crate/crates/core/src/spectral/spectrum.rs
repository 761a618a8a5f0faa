use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::{TransportConstants, WaveGrid};
use crate::{Error, Result};

const ARG_TOL: f64 = 1e-12;

/// Eigenvalues `mu_k = r_k exp(i theta_k)`, `k = 1..=n_modes`, of the
/// operator `D`. `mu_0 = 0` and `mu_{-k} = conj(mu_k)` are implied.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpectrum {
    grid: WaveGrid,
    radii: Vec<f64>,
    arguments: Vec<f64>,
}

impl OperatorSpectrum {
    pub fn new(grid: WaveGrid, radii: Vec<f64>, arguments: Vec<f64>) -> Result<Self> {
        let n = grid.n_modes();
        if radii.len() != n || arguments.len() != n {
            return Err(Error::Shape(format!(
                "spectrum needs {n} radii and arguments, got {} and {}",
                radii.len(),
                arguments.len()
            )));
        }
        for (i, (&r, &th)) in radii.iter().zip(&arguments).enumerate() {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Domain(format!("radius r_{} = {r} is not positive", i + 1)));
            }
            if !(FRAC_PI_2 - ARG_TOL..=1.5 * PI + ARG_TOL).contains(&th) {
                return Err(Error::Domain(format!(
                    "argument theta_{} = {th} outside [pi/2, 3pi/2]",
                    i + 1
                )));
            }
        }
        Ok(Self {
            grid,
            radii,
            arguments,
        })
    }

    /// From complex eigenvalues `mu_1 ..= mu_n` with non-positive real part.
    pub fn from_mu(grid: WaveGrid, mu: &[Complex64]) -> Result<Self> {
        let mut radii = Vec::with_capacity(mu.len());
        let mut arguments = Vec::with_capacity(mu.len());
        for m in mu {
            radii.push(m.norm());
            let mut th = m.im.atan2(m.re);
            if th < 0.0 {
                th += 2.0 * PI;
            }
            arguments.push(th);
        }
        Self::new(grid, radii, arguments)
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn arguments(&self) -> &[f64] {
        &self.arguments
    }

    /// `mu_k` for any `|k| <= n_modes`.
    pub fn mu(&self, k: i64) -> Complex64 {
        match k {
            0 => Complex64::new(0.0, 0.0),
            k if k > 0 => {
                let i = k as usize - 1;
                Complex64::from_polar(self.radii[i], self.arguments[i])
            }
            k => self.mu(-k).conj(),
        }
    }

    /// `mu_1 ..= mu_n`.
    pub fn mu_values(&self) -> Vec<Complex64> {
        (1..=self.grid.n_modes() as i64).map(|k| self.mu(k)).collect()
    }

    /// Copy with the eigenvalue of mode `k >= 1` replaced.
    pub fn with_mode(&self, k: usize, radius: f64, argument: f64) -> Result<Self> {
        let mut radii = self.radii.clone();
        let mut arguments = self.arguments.clone();
        radii[k - 1] = radius;
        arguments[k - 1] = argument;
        Self::new(self.grid, radii, arguments)
    }
}

/// Rescaled coordinates `r*_k = (r_k - k_x) / (k_x^2 - k_x)`,
/// `theta*_k = (theta_k - pi/2) / pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledParameters {
    pub grid: WaveGrid,
    pub r_star: Vec<f64>,
    pub theta_star: Vec<f64>,
}

/// Affine map `r = offset + scale * r*` for mode `k >= 1`.
pub fn radius_map(grid: &WaveGrid, k: i64) -> Result<(f64, f64)> {
    if k < 1 {
        return Err(Error::Domain(format!(
            "rescaling is defined for k >= 1 only, got k = {k}"
        )));
    }
    let kx = grid.wavenumber(k);
    let scale = kx * kx - kx;
    if scale.abs() < 1e-300 {
        return Err(Error::Domain(format!(
            "degenerate radius scale at k = {k} (wavenumber {kx})"
        )));
    }
    Ok((kx, scale))
}

pub fn rescale(spectrum: &OperatorSpectrum) -> Result<RescaledParameters> {
    let grid = *spectrum.grid();
    let mut r_star = Vec::with_capacity(grid.n_modes());
    let mut theta_star = Vec::with_capacity(grid.n_modes());
    for k in 1..=grid.n_modes() {
        let (offset, scale) = radius_map(&grid, k as i64)?;
        r_star.push((spectrum.radii[k - 1] - offset) / scale);
        theta_star.push((spectrum.arguments[k - 1] - FRAC_PI_2) / PI);
    }
    Ok(RescaledParameters {
        grid,
        r_star,
        theta_star,
    })
}

pub fn unrescale(params: &RescaledParameters) -> Result<OperatorSpectrum> {
    let grid = params.grid;
    if params.r_star.len() != grid.n_modes() || params.theta_star.len() != grid.n_modes() {
        return Err(Error::Shape("rescaled parameter length mismatch".into()));
    }
    let mut radii = Vec::with_capacity(grid.n_modes());
    let mut arguments = Vec::with_capacity(grid.n_modes());
    for k in 1..=grid.n_modes() {
        let (offset, scale) = radius_map(&grid, k as i64)?;
        radii.push(offset + scale * params.r_star[k - 1]);
        arguments.push(FRAC_PI_2 + PI * params.theta_star[k - 1]);
    }
    OperatorSpectrum::new(grid, radii, arguments)
}

/// Analytic spectrum of the fractional ADE, `mu_k = nu (i k_x)^alpha` on
/// the principal branch.
pub fn frade_spectrum(constants: &TransportConstants, grid: &WaveGrid) -> Result<OperatorSpectrum> {
    let alpha = constants.fractional_order;
    if !(1.0..=2.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "fractional order {alpha} outside [1, 2]"
        )));
    }
    if !(constants.diffusivity > 0.0) {
        return Err(Error::Domain(format!(
            "fractional diffusivity must be positive, got {}",
            constants.diffusivity
        )));
    }
    let n = grid.n_modes();
    let radii = (1..=n as i64)
        .map(|k| constants.diffusivity * grid.wavenumber(k).powf(alpha))
        .collect();
    OperatorSpectrum::new(*grid, radii, vec![alpha * FRAC_PI_2; n])
}

/// Spectrum of `nu d^2/dx^2`: `mu_k = -nu k_x^2`.
pub fn fickian_spectrum(diffusivity: f64, grid: &WaveGrid) -> Result<OperatorSpectrum> {
    let n = grid.n_modes();
    let radii = (1..=n as i64)
        .map(|k| diffusivity * grid.wavenumber(k).powi(2))
        .collect();
    OperatorSpectrum::new(*grid, radii, vec![PI; n])
}

/// Eigenvalues of the inadequacy operator, `lambda_k = (mu_k + nu k_x^2) / (i k_x)`,
/// for `k = 1..=n` given `mu_1..=mu_n`.
pub fn lambda_from_mu(grid: &WaveGrid, mu: &[Complex64], diffusivity: f64) -> Result<Vec<Complex64>> {
    mu.iter()
        .enumerate()
        .map(|(i, &m)| {
            let k = i as i64 + 1;
            let kx = grid.wavenumber(k);
            if kx == 0.0 {
                return Err(Error::Domain("lambda undefined at k = 0".into()));
            }
            Ok((m + diffusivity * kx * kx) / Complex64::new(0.0, kx))
        })
        .collect()
}

/// Inverse of [`lambda_from_mu`]: `mu_k = nu (i k_x)^2 + lambda_k (i k_x)`.
pub fn mu_from_lambda(grid: &WaveGrid, lambda: &[Complex64], diffusivity: f64) -> Vec<Complex64> {
    lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let kx = grid.wavenumber(i as i64 + 1);
            -diffusivity * kx * kx + l * Complex64::new(0.0, kx)
        })
        .collect()
}

impl OperatorSpectrum {
    /// `lambda_k` for the stored spectrum.
    pub fn lambda(&self, constants: &TransportConstants) -> Result<Vec<Complex64>> {
        lambda_from_mu(&self.grid, &self.mu_values(), constants.diffusivity)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn grid() -> WaveGrid {
        WaveGrid::minimal(1.0, 6).unwrap()
    }

    fn frade(alpha: f64, nu: f64) -> TransportConstants {
        TransportConstants::new(1.0, nu, alpha).unwrap()
    }

    #[test]
    fn frade_alpha_two_is_heat_spectrum() {
        let s = frade_spectrum(&frade(2.0, 0.01), &grid()).unwrap();
        let mu1 = s.mu(1);
        assert!((mu1.re + 0.01 * 4.0 * PI * PI).abs() < 1e-14);
        assert!((mu1.re + 0.394_784_176).abs() < 1e-8);
        assert!(mu1.im.abs() < 1e-15);
        let heat = fickian_spectrum(0.01, &grid()).unwrap();
        for k in 1..=6 {
            assert!((s.mu(k) - heat.mu(k)).norm() <= 1e-14 * heat.mu(k).norm());
        }
    }

    #[test]
    fn frade_alpha_one_is_imaginary() {
        let mu1 = frade_spectrum(&frade(1.0, 0.01), &grid()).unwrap().mu(1);
        assert!(mu1.re.abs() < 1e-15);
        assert!((mu1.im - 0.01 * 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn frade_fractional_power_matches_complex_pow() {
        // Independent route: principal-branch complex power in num_complex.
        let nu = 0.03;
        let s = frade_spectrum(&frade(1.5, nu), &grid()).unwrap();
        for k in 1..=6i64 {
            let z = Complex64::new(0.0, 2.0 * PI * k as f64);
            let expect = z.powf(1.5) * nu;
            assert!((s.mu(k) - expect).norm() < 1e-12 * expect.norm());
        }
        let mu1 = s.mu(1);
        assert!((mu1.norm() - nu * (2.0 * PI).powf(1.5)).abs() < 1e-14);
        assert!((mu1.arg() - 0.75 * PI).abs() < 1e-14);
    }

    #[test]
    fn frade_rejects_out_of_range_order() {
        let c = TransportConstants {
            mean_velocity: 1.0,
            diffusivity: 0.01,
            fractional_order: 2.5,
        };
        assert!(matches!(frade_spectrum(&c, &grid()), Err(Error::Domain(_))));
    }

    #[test]
    fn frade_spectrum_decays_and_is_symmetric() {
        for alpha in [1.0, 1.3, 1.7, 2.0] {
            let s = frade_spectrum(&frade(alpha, 0.1), &grid()).unwrap();
            for k in 1..=6 {
                assert!(s.mu(k).re <= 1e-15);
                assert_eq!(s.mu(-k), s.mu(k).conj());
            }
        }
    }

    #[test]
    fn rescale_examples() {
        let g = WaveGrid::minimal(1.0, 1).unwrap();
        let tp = 2.0 * PI;
        let s = OperatorSpectrum::new(g, vec![tp * tp], vec![PI]).unwrap();
        let p = rescale(&s).unwrap();
        assert!((p.r_star[0] - 1.0).abs() < 1e-15);
        assert!((p.theta_star[0] - 0.5).abs() < 1e-15);
        let s = OperatorSpectrum::new(g, vec![tp], vec![FRAC_PI_2]).unwrap();
        let p = rescale(&s).unwrap();
        assert!(p.r_star[0].abs() < 1e-15);
        assert!(p.theta_star[0].abs() < 1e-15);
    }

    #[test]
    fn rescale_rejects_mean_mode() {
        assert!(matches!(radius_map(&grid(), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn argument_bounds_enforced() {
        let g = WaveGrid::minimal(1.0, 1).unwrap();
        assert!(OperatorSpectrum::new(g, vec![1.0], vec![0.1]).is_err());
        assert!(OperatorSpectrum::new(g, vec![0.0], vec![PI]).is_err());
        assert!(OperatorSpectrum::new(g, vec![1.0], vec![1.5 * PI]).is_ok());
    }

    #[test]
    fn lambda_examples() {
        let g = grid();
        let nu = 0.02;
        let heat = fickian_spectrum(nu, &g).unwrap();
        for l in lambda_from_mu(&g, &heat.mu_values(), nu).unwrap() {
            assert!(l.norm() < 1e-15);
        }
        let zero = vec![Complex64::new(0.0, 0.0); 6];
        for (i, l) in lambda_from_mu(&g, &zero, nu).unwrap().iter().enumerate() {
            let kx = g.wavenumber(i as i64 + 1);
            assert!((l - Complex64::new(0.0, -nu * kx)).norm() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn rescale_round_trip(
            r in prop::collection::vec(0.01f64..2000.0, 6),
            th in prop::collection::vec(FRAC_PI_2..1.5 * PI, 6),
        ) {
            let s = OperatorSpectrum::new(grid(), r, th).unwrap();
            let back = unrescale(&rescale(&s).unwrap()).unwrap();
            for k in 1..=6 {
                prop_assert!((back.mu(k) - s.mu(k)).norm() <= 1e-12 * s.mu(k).norm());
            }
            let p = rescale(&s).unwrap();
            prop_assert!(p.theta_star.iter().all(|t| (0.0..=1.0).contains(t)));
        }

        #[test]
        fn lambda_round_trip(
            r in prop::collection::vec(0.01f64..500.0, 6),
            th in prop::collection::vec(FRAC_PI_2..1.5 * PI, 6),
            nu in 0.0f64..1.0,
        ) {
            let g = grid();
            let mu = OperatorSpectrum::new(g, r, th).unwrap().mu_values();
            let back = mu_from_lambda(&g, &lambda_from_mu(&g, &mu, nu).unwrap(), nu);
            for (a, b) in mu.iter().zip(&back) {
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }
}
