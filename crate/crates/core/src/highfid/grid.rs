use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cell-centred grid on `[0, L_x) x [0, L_y]`, periodic in x and no-flux
/// in y. Cell `(i, j)` is centred at `(i dx, (j + 1/2) dy)` and stored at
/// `i * n_y + j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::Domain(format!(
                "domain lengths must be positive, got {lx} x {ly}"
            )));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::Domain(format!("grid needs at least 2x2 cells, got {nx}x{ny}")));
        }
        Ok(Self { lx, ly, nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(1.0, 1.0, n, n)
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.n_cells() {
            return Err(Error::Shape(format!(
                "{what} has {len} entries, grid has {} cells",
                self.n_cells()
            )));
        }
        Ok(())
    }
}

/// Cell values of a concentration field at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Concentration2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Concentration2D {
    pub fn new(grid: Grid2D, values: Vec<f64>, time: f64) -> Result<Self> {
        grid.check_len(values.len(), "concentration")?;
        Ok(Self { grid, values, time })
    }

    /// Field uniform in y with x-profile `f`.
    pub fn from_profile(grid: Grid2D, profile: &[f64], time: f64) -> Result<Self> {
        if profile.len() != grid.nx {
            return Err(Error::Shape(format!(
                "profile has {} entries, grid has {} columns",
                profile.len(),
                grid.nx
            )));
        }
        let mut values = Vec::with_capacity(grid.n_cells());
        for &v in profile {
            values.extend(std::iter::repeat_n(v, grid.ny));
        }
        Ok(Self { grid, values, time })
    }

    /// `sum c dx dy`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Depthwise cell average `(1/L_y) sum_j c_ij dy`.
pub fn depth_average(c: &Concentration2D) -> Vec<f64> {
    let ny = c.grid.ny;
    c.values
        .chunks_exact(ny)
        .map(|col| col.iter().sum::<f64>() / ny as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_of_x_profile_is_profile() {
        let g = Grid2D::new(2.0, 0.5, 8, 5).unwrap();
        let f: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let c = Concentration2D::from_profile(g, &f, 0.0).unwrap();
        let avg = depth_average(&c);
        for (a, b) in avg.iter().zip(&f) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn average_of_linear_y_is_half() {
        let g = Grid2D::new(1.0, 3.0, 4, 7).unwrap();
        let mut v = vec![0.0; g.n_cells()];
        for i in 0..4 {
            for j in 0..7 {
                v[g.idx(i, j)] = g.y(j) / g.ly;
            }
        }
        let avg = depth_average(&Concentration2D::new(g, v, 0.0).unwrap());
        for a in avg {
            assert!((a - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid2D::new(0.0, 1.0, 4, 4).is_err());
        assert!(Grid2D::new(1.0, 1.0, 1, 4).is_err());
    }
}
