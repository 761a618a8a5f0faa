//! Single-mode probes of the high-fidelity model testing shift invariance
//! and time independence of the 1D closure.

mod logderiv;
mod probe;
mod report;

pub use logderiv::{log_derivative, log_derivative_of, LogDerivativeSeries, AMPLITUDE_FLOOR};
pub use probe::{propagate_mode, snapshot_times, ModeProbeResult, ProbeSource};
pub use report::{
    assumption_report, cross_mode_matrix, AssumptionReport, CrossModeMatrix, ModeVerdict,
    Thresholds,
};

/// Default probe set.
pub const DEFAULT_PROBES: [i64; 5] = [1, 2, 4, 8, 16];

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::highfid::{DarcyConstants, FlowDrive, Grid2D, Limiter, PermeabilitySource, Pipeline, TransportOptions};
    use crate::spectral::{frade_spectrum, TransportConstants, WaveGrid};

    fn exact() -> ProbeSource {
        let grid = WaveGrid::minimal(1.0, 8).unwrap();
        let constants = TransportConstants::new(1.0, 0.01, 1.5).unwrap();
        ProbeSource::Exact {
            grid,
            spectrum: frade_spectrum(&constants, &grid).unwrap(),
            constants,
        }
    }

    #[test]
    fn exact_model_is_diagonal_and_recovers_eigenvalue() {
        let src = exact();
        let g = src.analysis_grid().unwrap();
        let times = snapshot_times(&g, 2, 1.0, 0.01, 0.05, 20);
        let probes: Vec<_> = [1, 2]
            .iter()
            .map(|&k| propagate_mode(&src, k, 1.0, &times).unwrap())
            .collect();
        assert!((probes[0].coeff(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let m = cross_mode_matrix(&probes, 10).unwrap();
        assert!(m.off_diagonal_ratios().iter().all(|&r| r < 1e-28));
        let ProbeSource::Exact { spectrum, .. } = &src else { unreachable!() };
        let ld = log_derivative(&probes[1], 2).unwrap();
        let expect = spectrum.mu(2) - Complex64::new(0.0, g.wavenumber(2));
        assert!((ld.mean - expect).norm() / expect.norm() < 1e-3);
        let rep = assumption_report(&probes, Thresholds::default()).unwrap();
        assert!(rep.shift_invariant() && rep.time_independent());
        assert!(rep.to_text().contains("shift_invariance = PASS"));
    }

    #[test]
    fn probe_linearity_and_conjugation() {
        let src = ProbeSource::HighFidelity {
            pipeline: Pipeline {
                grid: Grid2D::square(16).unwrap(),
                darcy: DarcyConstants::new(1.0, 1.0, FlowDrive::MeanVelocity(1.0)),
                transport: TransportOptions::new(1e-3, Limiter::Fromm),
            },
            permeability: PermeabilitySource::Realization {
                stats: crate::highfid::LogNormalStats {
                    log_mean: 0.0,
                    log_variance: 1.0,
                    corr_x: 0.2,
                    corr_y: 0.2,
                },
                seed: 4,
            },
        };
        let times = [0.0, 0.01, 0.02];
        let a = propagate_mode(&src, 2, 1.0, &times).unwrap();
        let b = propagate_mode(&src, 2, 2.5, &times).unwrap();
        let c = propagate_mode(&src, -2, 1.0, &times).unwrap();
        for t in 0..3 {
            for k in -7..=7i64 {
                let x = a.coeff(t, k);
                assert!((b.coeff(t, k) - x * 2.5).norm() < 1e-13);
                assert!((c.coeff(t, -k) - x.conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn probe_outside_grid_rejected() {
        assert!(propagate_mode(&exact(), 9, 1.0, &[0.0, 0.1]).is_err());
    }
}
