mod common;

use common::*;
use num_complex::Complex64;
use opspec::highfid::{
    sample_permeability, solve_darcy, DarcyConstants, FlowDrive, Grid2D, LogNormalStats,
};
use opspec::spectral::{
    analyze, fickian_spectrum, propagate_exact, synthesize, InitialCondition, OperatorSpectrum,
    TransportConstants, WaveGrid,
};

#[test]
fn ks_p_value_matches_tabulated_quantiles() {
    // Asymptotic critical values: p = 0.05 at lambda 1.358, p = 0.01 at 1.628.
    let big = 1_000_000_000;
    let d = |lambda: f64| lambda / (big as f64).sqrt();
    assert!((ks_p_value(d(1.3581), big) - 0.05).abs() < 1e-3);
    assert!((ks_p_value(d(1.6276), big) - 0.01).abs() < 1e-3);
    assert_eq!(ks_p_value(0.0, 100), 1.0);
}

#[test]
fn ks_statistic_of_a_grid_is_half_bin() {
    let v: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
    assert!((ks_uniform(&v, 0.0, 1.0) - 0.005).abs() < 1e-12);
}

#[test]
fn generator_of_heat_equation_is_symmetric_and_conservative() {
    let g = WaveGrid::minimal(1.0, 8).unwrap();
    let a = generator_matrix(&g, &fickian_spectrum(0.1, &g).unwrap(), 0.0);
    assert!((&a - a.transpose()).amax() < 1e-12);
    for j in 0..g.n_points() {
        assert!(a.column(j).sum().abs() < 1e-10);
    }
}

#[test]
fn crank_nicolson_converges_to_exact_propagation() {
    let g = WaveGrid::minimal(1.0, 6).unwrap();
    let c = TransportConstants::new(1.0, 0.01, 1.5).unwrap();
    let s = OperatorSpectrum::from_mu(
        g,
        &(1..=6)
            .map(|k| Complex64::new(-0.3 * k as f64, 0.2))
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let c0 = InitialCondition::gaussian_bump(0.4, 0.15).field(&g).unwrap();
    let exact = synthesize(&propagate_exact(&c0, &s, &c, 0.2).unwrap()).unwrap();
    let a = generator_matrix(&g, &s, 1.0);
    let v0 = synthesize(&c0).unwrap();
    let err = |steps| {
        let v = crank_nicolson(&a, &v0, 0.2, steps);
        v.iter().zip(&exact).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(1000), err(2000));
    assert!(e2 < 1e-6, "{e2}");
    assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
    let back = analyze(&g, &v0).unwrap();
    assert!((back.coeff(3) - c0.coeff(3)).norm() < 1e-14);
}

#[test]
fn darcy_solver_matches_dense_solve() {
    let grid = Grid2D::square(16).unwrap();
    let stats = LogNormalStats {
        log_mean: 0.0,
        log_variance: 1.0,
        corr_x: 0.2,
        corr_y: 0.2,
    };
    let perm = sample_permeability(grid, stats, 3).unwrap();
    let vel = solve_darcy(
        &perm,
        &DarcyConstants::new(1.0, 1.0, FlowDrive::PressureGradient(1.0)),
    )
    .unwrap();
    let dense = dense_darcy_ux(&perm, 1.0);
    let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in vel.ux.iter().zip(&dense) {
        assert!((a - b).abs() < 1e-9 * scale, "{a} vs {b}");
    }
}

#[test]
fn gaussian_solution_reduces_to_initial_bump() {
    let ic = InitialCondition::gaussian_bump(0.25, 0.05);
    for i in 0..50 {
        let x = i as f64 / 50.0;
        let v = ic.sample_points(&[x], 1.0).unwrap()[0];
        assert!((gaussian_solution(x, 0.0, 0.25, 0.05, 1.0, 0.01, 1.0) - v).abs() < 1e-15);
    }
}
