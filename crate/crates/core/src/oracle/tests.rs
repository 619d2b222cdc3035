use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::bench::build_duffing;
use crate::composition::{CoefficientTensor, Integrand};
use crate::model::{ForcingSignal, MultiIndex, PolynomialField};
use crate::spectral::{check_contraction, decompose_general};
use crate::trajectory::{TimeGrid, Trajectory};
use crate::GssError;

fn sine(amp: f64, w: f64, dt: f64, t_end: f64) -> ForcingSignal {
    let len = (t_end / dt).round() as usize + 1;
    ForcingSignal::from_fn(1, dt, 0.0, len, |t, out| out[0] = amp * (w * t).sin()).unwrap()
}

fn tail_peak(z: &Trajectory, row: usize, from: usize) -> f64 {
    z.row(row)[from..].iter().fold(0.0f64, |a, &v| a.max(v.abs()))
}

#[test]
fn newmark_settles_to_the_transfer_amplitude() {
    let (m, c, k, w) = (1.0, 0.1, 4.0, 1.5);
    let s = build_duffing(m, c, k, 0.0).unwrap();
    let dt = 1e-3;
    let f = sine(1.0, w, dt, 260.0);
    let z = newmark_full(&s, &f, &[0.0, 0.0]).unwrap();
    let exact = 1.0 / ((k - m * w * w).powi(2) + (c * w).powi(2)).sqrt();
    let a = tail_peak(&z, 0, (250.0 / dt) as usize);
    assert!((a - exact).abs() <= 1e-4 * exact, "{a} vs {exact}");
}

#[test]
fn newmark_free_decay_follows_the_leading_eigenvalue() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.0).unwrap();
    let rate = -decompose_general(&s).unwrap().eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let dt = 1e-3;
    let z = newmark_full(&s, &sine(0.0, 1.0, dt, 40.0), &[1.0, 0.0]).unwrap();
    // energy-norm envelope: x^2 + v^2 is not constant over a cycle, so compare peaks one period apart
    let period = 2.0 * core::f64::consts::PI / (1.0f64 - 0.01).sqrt();
    let p = (period / dt) as usize;
    let a = tail_peak(&z.tail(0), 0, 0);
    let b = z.row(0)[5 * p..6 * p].iter().fold(0.0f64, |x, &v| x.max(v.abs()));
    let observed = (a / b).ln() / (5.0 * period);
    assert!((observed - rate).abs() <= 0.02 * rate, "{observed} vs {rate}");
}

#[test]
fn newmark_nearly_conserves_energy() {
    let kappa = 0.5;
    let s = build_duffing(1.0, 1e-12, 1.0, kappa).unwrap();
    let period = 2.0 * core::f64::consts::PI;
    let dt = period / 200.0;
    let z = newmark_full(&s, &sine(0.0, 1.0, dt, 100.0 * period), &[0.3, 0.0]).unwrap();
    let energy = |k: usize| {
        let (x, v) = (z.get(0, k), z.get(1, k));
        0.5 * v * v + 0.5 * x * x + 0.25 * kappa * x.powi(4)
    };
    let e0 = energy(0);
    let drift = (energy(z.len() - 1) - e0).abs() / e0;
    assert!(drift <= 1e-3, "{drift}");
}

#[test]
fn newmark_is_second_order() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let t_end = 20.0;
    let run = |dt: f64| newmark_full(&s, &sine(0.8, 0.9, dt, t_end), &[0.0, 0.0]).unwrap();
    let base = 0.02;
    let reference = run(base / 8.0);
    let err = |dt: f64| {
        let z = run(dt);
        let stride = (dt / (base / 8.0)).round() as usize;
        (0..z.len()).map(|k| (z.get(0, k) - reference.get(0, stride * k)).abs()).fold(0.0, f64::max)
    };
    let ratio = err(base) / err(base / 2.0);
    assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
}

#[test]
fn finite_difference_tangent_gives_the_same_response() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let f = sine(1.0, 0.9, 1e-2, 20.0);
    let a = newmark_full(&s, &f, &[0.0, 0.0]).unwrap();
    let opts = NewmarkOptions { finite_difference_tangent: true, ..NewmarkOptions::default() };
    let b = newmark_full_with(&s, &f, &[0.0, 0.0], &opts).unwrap();
    let mut d = a.clone();
    d.axpy(-1.0, &b);
    assert!(d.max_abs() <= 1e-9 * a.max_abs());
}

#[test]
fn newmark_reports_divergence() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let f = sine(1.0, 0.9, 1e-2, 2.0);
    let opts = NewmarkOptions { max_iter: 1, ..NewmarkOptions::default() };
    assert!(matches!(
        newmark_full_with(&s, &f, &[0.0, 0.0], &opts),
        Err(GssError::NewtonDivergence { .. })
    ));
}

#[test]
fn picard_on_a_linear_system_needs_one_extra_iteration() {
    let s = build_duffing(1.0, 0.3, 2.0, 0.0).unwrap();
    let sp = decompose_general(&s).unwrap();
    let f = sine(0.5, 1.3, 1e-2, 30.0);
    let r = picard_gss(&s, &sp, &f, &PicardOptions { tol: 1e-12, max_iter: 10, contraction_factor: None }).unwrap();
    assert_eq!(r.iterations, 2);
    assert_eq!(r.differences[1], 0.0);
}

#[test]
fn picard_contracts_for_small_forcing() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let sp = decompose_general(&s).unwrap();
    let amp = 1e-3;
    let f = sine(amp, 1.0, 1e-2, 80.0);
    let report = check_contraction(&s, &sp, 0.02, amp, 200).unwrap();
    assert!(report.satisfied, "{report:?}");
    let tol = 1e-14;
    let opts = PicardOptions { tol, max_iter: 60, contraction_factor: Some(report.contraction_factor) };
    let r = picard_gss(&s, &sp, &f, &opts).unwrap();
    assert!(r.trajectory.sup_norm() <= report.delta);
    // the observed ratio sits far below the sufficient-condition factor
    assert!(r.contraction_estimate > 0.0 && r.contraction_estimate <= report.contraction_factor);
    assert!(picard_residual(&s, &sp, &f, &r.trajectory).unwrap() <= 2.0 * tol);
    let bound = r.iteration_bound.unwrap();
    assert!(r.iterations <= bound, "{} > {bound}", r.iterations);
}

#[test]
fn picard_failure_carries_the_last_iterate() {
    let s = build_duffing(1.0, 0.05, 1.0, 5.0).unwrap();
    let sp = decompose_general(&s).unwrap();
    let f = sine(20.0, 1.0, 1e-2, 30.0);
    match picard_gss(&s, &sp, &f, &PicardOptions { tol: 1e-12, max_iter: 4, contraction_factor: None }) {
        Err(GssError::NoConvergence { iterations, last_iterate, .. }) => {
            assert_eq!(iterations, 4);
            assert_eq!(last_iterate.len(), f.len());
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn iteration_bound_closed_forms() {
    assert_eq!(iteration_bound(1e-20, 0.5, 1e-12), Some(1));
    assert_eq!(iteration_bound(1.0, 1.5, 1e-12), None);
    // 0.5^{l-1} < 1e-3 first at l - 1 = 10
    assert_eq!(iteration_bound(1.0, 0.5, 1e-3), Some(11));
}

#[test]
fn faa_di_bruno_base_case_and_duffing_order_three() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.7).unwrap();
    let f = sine(1.0, 0.5, 0.1, 5.0);
    let integ = Integrand::mechanical(&s, &f).unwrap();
    let grid = TimeGrid::new(0.1, 0.0, f.len()).unwrap();
    let mut coeffs = CoefficientTensor::new(2, grid, 3);
    let mut z1 = Trajectory::zeros(2, f.len());
    let mut z2 = Trajectory::zeros(2, f.len());
    for k in 0..f.len() {
        z1.set(0, k, 0.1 * k as f64 - 1.0);
        z1.set(1, k, 0.3);
        z2.set(0, k, 0.2);
    }
    coeffs.push_order(z1.clone()).unwrap();
    coeffs.push_order(z2).unwrap();
    let phi1 = faadibruno_phi(&integ, &coeffs, 1).unwrap();
    assert_eq!(phi1.row(0), f.values().row(0));
    let phi3 = faadibruno_phi(&integ, &coeffs, 3).unwrap();
    for k in 0..f.len() {
        let x = z1.get(0, k);
        assert!((phi3.get(0, k) + 0.7 * x * x * x).abs() < 1e-14);
        assert_eq!(phi3.get(1, k), 0.0);
    }
    // p(3, (3, 0)) has the single element k = (3), l = (1)
    let d = decompositions(3, &MultiIndex::new(vec![3, 0]));
    assert_eq!(d, vec![vec![(1usize, vec![3u32, 0])]]);
}

#[test]
fn faa_di_bruno_refuses_large_instances() {
    let mut field = PolynomialField::new(2, 2);
    field.add_scalar_term(MultiIndex::new(vec![5, 0]), 0, 1.0).unwrap();
    let grid = TimeGrid::new(0.1, 0.0, 4).unwrap();
    let integ = Integrand { base: Trajectory::zeros(2, 4), field, state_terms: Vec::new() };
    let coeffs = CoefficientTensor::new(2, grid, 2);
    assert!(matches!(faadibruno_phi(&integ, &coeffs, 2), Err(GssError::InstanceTooLarge(_))));
}
