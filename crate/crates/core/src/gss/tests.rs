use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::*;
use crate::bench::{build_duffing, build_oscillator_chain, nmte};
use crate::composition::CoefficientTensor;
use crate::kernel::{Harmonic, QuasiPeriodicForcing};
use crate::model::{build_system, DampingOverride, ForcingSignal, MultiIndex, PolynomialField, ReducedModel};
use crate::oracle::{exact_pwl_response, newmark_full};
use crate::spectral::{decompose, decompose_general};
use crate::trajectory::{TimeGrid, Trajectory};

fn sine_forcing(n: usize, dofs: &[usize], amp: f64, w: f64, dt: f64, t_on: f64, t_end: f64) -> ForcingSignal {
    let len = ((t_end - 0.0) / dt).round() as usize + 1;
    ForcingSignal::from_fn(n, dt, 0.0, len, |t, out| {
        out.iter_mut().for_each(|o| *o = 0.0);
        if t >= t_on {
            for &d in dofs {
                out[d] = amp * (w * (t - t_on)).sin();
            }
        }
    })
    .unwrap()
}

fn diff_sup(a: &Trajectory, b: &Trajectory) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    d.max_abs()
}

#[test]
fn linear_expansion_terminates() {
    let s = build_duffing(1.0, 0.3, 2.0, 0.0).unwrap();
    let f = sine_forcing(1, &[0], 0.7, 1.3, 1e-2, 0.0, 30.0);
    let e5 = compute_taylor_gss(&s, &f, 5, &GssOptions::default()).unwrap();
    let e1 = compute_taylor_gss(&s, &f, 1, &GssOptions::default()).unwrap();
    for nu in 2..=5 {
        assert_eq!(e5.coeffs.order(nu).unwrap().max_abs(), 0.0);
    }
    assert!(diff_sup(&e5.evaluate_at_amplitude(e5.delta_ref), &e1.evaluate_at_amplitude(e1.delta_ref)) <= 1e-12);
    // summed series equals the exact piecewise-linear convolution
    let phi = Trajectory::from_data(2, f.len(), {
        let mut d = f.values().row(0).to_vec();
        d.extend(core::iter::repeat(0.0).take(f.len()));
        d
    })
    .unwrap();
    let exact = exact_pwl_response(&s.state_matrix(), &{
        let mut u = phi.clone();
        // B^{-1}(g, 0) = (0, g / m)
        u.row_mut(1).copy_from_slice(phi.row(0));
        u.row_mut(0).iter_mut().for_each(|v| *v = 0.0);
        u
    }, 1e-2);
    assert!(diff_sup(&e1.evaluate_at_amplitude(e1.delta_ref), &exact) <= 1e-10);
    // amplitude homogeneity and the zero amplitude
    let half = e1.evaluate_at_amplitude(0.5 * e1.delta_ref);
    let mut full = e1.evaluate_at_amplitude(e1.delta_ref);
    full.scale(0.5);
    assert!(diff_sup(&half, &full) <= 1e-15);
    assert_eq!(e1.evaluate_at_amplitude(0.0).max_abs(), 0.0);
}

#[test]
fn normalized_and_raw_expansions_agree() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let f = sine_forcing(1, &[0], 0.4, 0.5, 1e-2, 0.0, 40.0);
    let norm = compute_taylor_gss(&s, &f, 4, &GssOptions::default()).unwrap();
    let raw = compute_taylor_gss(&s, &f, 4, &GssOptions { normalize: false, ..GssOptions::default() }).unwrap();
    assert!((norm.delta_ref - f.max_magnitude()).abs() == 0.0);
    assert_eq!(raw.delta_ref, 1.0);
    let a = norm.evaluate_at_amplitude(norm.delta_ref);
    let b = raw.evaluate_at_amplitude(1.0);
    assert!(diff_sup(&a, &b) <= 1e-12 * b.max_abs());
    // order-nu homogeneity of the coefficients
    for nu in 1..=4 {
        let mut zn = norm.coeffs.order(nu).unwrap().clone();
        zn.scale(norm.delta_ref.powi(nu as i32));
        assert!(diff_sup(&zn, raw.coeffs.order(nu).unwrap()) <= 1e-12 * (1e-300 + zn.max_abs()));
    }
}

#[test]
fn cache_does_not_change_coefficients() {
    let s = build_oscillator_chain(3, 1.0, 1.0, 2.0, 0.2).unwrap();
    let f = sine_forcing(3, &[0, 2], 0.3, 0.9, 2e-2, 0.0, 20.0);
    let a = compute_taylor_gss(&s, &f, 5, &GssOptions::default()).unwrap();
    let b = compute_taylor_gss(&s, &f, 5, &GssOptions { use_cache: false, ..GssOptions::default() }).unwrap();
    for nu in 1..=5 {
        assert_eq!(a.coeffs.order(nu).unwrap(), b.coeffs.order(nu).unwrap());
    }
}

#[test]
fn velocity_block_of_phi_vanishes() {
    use crate::composition::{assemble_phi, CompositionCache, Integrand};
    let s = build_oscillator_chain(3, 1.0, 1.0, 2.0, 0.2).unwrap();
    let f = sine_forcing(3, &[1], 0.5, 0.9, 2e-2, 0.0, 10.0);
    let e = compute_taylor_gss(&s, &f, 4, &GssOptions { normalize: false, ..GssOptions::default() }).unwrap();
    let integ = Integrand::mechanical(&s, &f).unwrap();
    let mut cache = CompositionCache::new();
    for nu in 2..=4 {
        let phi = assemble_phi(&integ, &e.coeffs, nu, &mut cache).unwrap();
        for i in 3..6 {
            assert!(phi.row(i).iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn duffing_matches_newmark_at_small_amplitude() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let pad = 60.0;
    let fine = sine_forcing(1, &[0], 0.1, 0.5, 1e-4, pad, pad + 40.0);
    let reference = newmark_full(&s, &fine, &[0.0, 0.0]).unwrap();
    let coarse = sine_forcing(1, &[0], 0.1, 0.5, 1e-3, pad, pad + 40.0);
    let e = compute_taylor_gss(&s, &coarse, 3, &GssOptions::default()).unwrap();
    let z = e.evaluate_at_amplitude(e.delta_ref);
    let sub: Vec<usize> = (0..coarse.len()).map(|k| 10 * k).collect();
    let mut r = Trajectory::zeros(2, coarse.len());
    for (k, &j) in sub.iter().enumerate() {
        r.set_column(k, &reference.column(j));
    }
    let skip = (pad / 1e-3) as usize;
    let err = nmte(&z, &r, skip);
    assert!(err <= 1e-3, "NMTE {err}");
    assert!(e.divergence.is_none());
}

#[test]
fn response_decays_after_forcing_stops() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let dt = 1e-2;
    let t_off = 20.0;
    let f = ForcingSignal::from_fn(1, dt, 0.0, 8001, |t, out| {
        out[0] = if t < t_off { 0.5 * (0.8 * t).sin() } else { 0.0 };
    })
    .unwrap();
    let e = compute_taylor_gss(&s, &f, 5, &GssOptions::default()).unwrap();
    let z = e.evaluate_at_amplitude(e.delta_ref);
    let rate = 0.1;
    // envelope over 2 pi windows
    let window = (2.0 * core::f64::consts::PI / dt) as usize;
    let env = |k0: usize| (k0..k0 + window).map(|k| z.norm_at(k)).fold(0.0, f64::max);
    let k1 = (30.0 / dt) as usize;
    let k2 = (70.0 / dt) as usize;
    let observed = (env(k1) / env(k2)).ln() / (40.0);
    assert!(observed >= rate - 0.01, "decay rate {observed}");
}

#[test]
fn divergence_warning_for_large_amplitude() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let f = sine_forcing(1, &[0], 6.0, 1.0, 2e-2, 0.0, 40.0);
    let e = compute_taylor_gss(&s, &f, 12, &GssOptions::default()).unwrap();
    let w = e.divergence.expect("large forcing should trigger the growth check");
    assert!(w.sup_full > DIVERGENCE_GROWTH * w.sup_half);
    let small = compute_taylor_gss(&s, &f.scaled(0.01), 12, &GssOptions::default()).unwrap();
    assert!(small.divergence.is_none());
}

#[test]
fn kernel_and_newmark_backends_agree_on_each_order() {
    let s = build_oscillator_chain(5, 0.1, 100.0, 2500.0, 0.1).unwrap();
    let f = sine_forcing(5, &[0, 4], 1.0, 9.0, 1e-3, 0.0, 15.0);
    let k = compute_taylor_gss(&s, &f, 3, &GssOptions { eps_trunc: 0.0, ..GssOptions::default() }).unwrap();
    let n = compute_taylor_gss(&s, &f, 3, &GssOptions { backend: Backend::Newmark, ..GssOptions::default() }).unwrap();
    assert_eq!(n.backend, BackendTag::Newmark);
    for nu in [1, 3] {
        let err = nmte(n.coeffs.order(nu).unwrap(), k.coeffs.order(nu).unwrap(), 0);
        assert!(err <= 1e-2, "order {nu}: {err}");
    }
}

fn geometric_expansion(r: f64, order: usize) -> GssExpansion {
    let grid = TimeGrid::new(0.1, 0.0, 40).unwrap();
    let mut coeffs = CoefficientTensor::new(2, grid, order);
    for nu in 1..=order {
        let mut z = Trajectory::zeros(2, 40);
        for k in 0..40 {
            let t = k as f64 * 0.1;
            z.set(0, k, (1.0 + t).sin() * r.powi(nu as i32));
            z.set(1, k, (0.3 * t).cos() * (-0.5 * r).powi(nu as i32));
        }
        coeffs.push_order(z).unwrap();
    }
    GssExpansion {
        coeffs,
        delta_ref: 1.0,
        backend: BackendTag::AnalyticKernel,
        pad: 0,
        retained_modes: 0,
        eigenvalues: Vec::new(),
        divergence: None,
    }
}

#[test]
fn pade_recovers_geometric_series() {
    let r = 0.8;
    let e = geometric_expansion(r, 2);
    let p = pade_resum(&e, 1, 1).unwrap();
    assert!((p.denominators[0][0] + r).abs() < 1e-12);
    assert!((p.denominators[1][0] - 0.5 * r).abs() < 1e-12);
    let delta = 1.5 / r;
    let z = evaluate_pade(&p, delta).unwrap();
    for k in 0..40 {
        let t = k as f64 * 0.1;
        let c0 = (1.0 + t).sin() * r * delta / (1.0 - r * delta);
        let q = -0.5 * r;
        let c1 = (0.3 * t).cos() * q * delta / (1.0 - q * delta);
        assert!((z.get(0, k) - c0).abs() <= 1e-10 * (1.0 + c0.abs()));
        assert!((z.get(1, k) - c1).abs() <= 1e-10 * (1.0 + c1.abs()));
    }
    // the pole of coordinate 0 sits at 1 / r
    assert!(matches!(evaluate_pade(&p, 1.0 / r), Err(crate::GssError::DenominatorNearZero { coordinate: 0, .. })));
    assert_eq!(evaluate_pade(&p, 0.0).unwrap().max_abs(), 0.0);
}

#[test]
fn pade_of_linear_expansion_is_first_order() {
    let s = build_duffing(1.0, 0.3, 2.0, 0.0).unwrap();
    let f = sine_forcing(1, &[0], 0.7, 1.3, 1e-2, 0.0, 20.0);
    let e = compute_taylor_gss(&s, &f, 4, &GssOptions::default()).unwrap();
    let p = pade_resum(&e, 2, 2).unwrap();
    assert!(p.denominators.iter().flatten().all(|&b| b == 0.0));
    assert!(diff_sup(&evaluate_pade(&p, e.delta_ref).unwrap(), &e.evaluate_at_amplitude(e.delta_ref)) <= 1e-15);
    assert!(matches!(pade_resum(&e, 3, 2), Err(crate::GssError::OrderUnavailable { .. })));
}

#[test]
fn pade_is_taylor_consistent_and_high_order_close() {
    let s = build_duffing(1.0, 0.2, 1.0, 0.5).unwrap();
    let f = sine_forcing(1, &[0], 1.0, 0.7, 2e-2, 0.0, 40.0);
    let e = compute_taylor_gss(&s, &f, 8, &GssOptions::default()).unwrap();
    let p = pade_resum(&e, 4, 4).unwrap();
    let re = p.reexpand(4);
    let scale = (1..=4).map(|nu| e.coeffs.order(nu).unwrap().max_abs()).fold(0.0, f64::max);
    for nu in 1..=4 {
        let z = e.coeffs.order(nu).unwrap();
        assert!(diff_sup(&re[nu - 1], z) <= 1e-8 * scale, "order {nu}");
    }
    // a least-squares denominator only matches through order L, so the gap to the Taylor sum is O(delta^{L+1})
    let gap = |d: f64| diff_sup(&evaluate_pade(&p, d).unwrap(), &e.evaluate_at_amplitude(d));
    let (g1, g2) = (gap(0.05), gap(0.025));
    assert!(g1 / g2 >= 0.75 * 2f64.powi(5), "{g1} {g2}");
}

#[test]
fn trivial_reduction_reproduces_full_expansion() {
    let s = build_oscillator_chain(3, 1.0, 1.0, 2.0, 0.2).unwrap();
    let f = sine_forcing(3, &[0], 0.4, 0.9, 1e-2, 0.0, 30.0);
    let opts = GssOptions { eps_trunc: 0.0, ..GssOptions::default() };
    let full = compute_taylor_gss(&s, &f, 4, &opts).unwrap();
    let model = ReducedModel::identity(&s);
    let spectral = decompose_general(&s).unwrap();
    let red = reduced_gss(&s, &model, &spectral, &f, 4, &opts).unwrap();
    let z = full.evaluate_at_amplitude(full.delta_ref);
    assert!(diff_sup(&red, &z) <= 1e-10 * z.max_abs(), "{}", diff_sup(&red, &z));
}

#[test]
fn linear_spectral_split_is_exact() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
    let c = DMatrix::from_row_slice(2, 2, &[0.3, -0.1, -0.1, 0.2]);
    let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 6.0]);
    let s = build_system(m, c, k, PolynomialField::new(4, 2), DampingOverride::General).unwrap();
    let f = sine_forcing(2, &[0, 1], 0.6, 1.1, 1e-2, 0.0, 30.0);
    let opts = GssOptions { eps_trunc: 0.0, ..GssOptions::default() };
    let full = compute_taylor_gss(&s, &f, 1, &opts).unwrap();
    let spectral = decompose_general(&s).unwrap().with_retained(vec![0, 1]);
    let model = spectral_subspace_model(&s, &spectral, &[0, 1]).unwrap();
    assert_eq!(model.dim(), 2);
    let red = reduced_gss(&s, &model, &spectral, &f, 1, &opts).unwrap();
    let z = full.evaluate_at_amplitude(full.delta_ref);
    assert!(diff_sup(&red, &z) <= 1e-8 * z.max_abs(), "{}", diff_sup(&red, &z));
}

#[test]
fn slow_mode_reduction_of_a_duffing_dominated_system() {
    // soft Duffing oscillator attached to a stiff linear one
    let m = DMatrix::identity(2, 2);
    let k = DMatrix::from_row_slice(2, 2, &[1.2, -0.2, -0.2, 100.2]);
    let c = &k * 0.02 + &m * 0.05;
    let mut nl = PolynomialField::new(4, 2);
    nl.add_scalar_term(MultiIndex::new(vec![3, 0, 0, 0]), 0, 0.5).unwrap();
    let s = build_system(m, c, k, nl, DampingOverride::General).unwrap();
    let pad = 100.0;
    let dt = 2e-3;
    let f = sine_forcing(2, &[0], 0.3, 0.4, dt, pad, pad + 60.0);
    let spectral = decompose_general(&s).unwrap();
    let slow: Vec<usize> = vec![0, 1];
    let sp = spectral.with_retained(slow.clone());
    let model = spectral_subspace_model(&s, &sp, &slow).unwrap();
    let red = reduced_gss(&s, &model, &sp, &f, 5, &GssOptions::default()).unwrap();
    let reference = newmark_full(&s, &f, &[0.0; 4]).unwrap();
    let err = nmte(&red, &reference, (pad / dt) as usize);
    assert!(err <= 0.05, "NMTE {err}");
}

#[test]
fn substitution_matches_direct_evaluation() {
    let mut f = PolynomialField::new(3, 2);
    f.add_term(MultiIndex::new(vec![2, 1, 0]), &[1.0, -2.0]).unwrap();
    f.add_term(MultiIndex::new(vec![0, 0, 3]), &[0.5, 0.25]).unwrap();
    let c = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 0.7, -1.1]);
    let g = substitute_linear(&f, &c).unwrap();
    let r = [0.4, -0.9];
    let z: Vec<f64> = (0..3).map(|i| c[(i, 0)] * r[0] + c[(i, 1)] * r[1]).collect();
    let a = f.evaluate(&z);
    let b = g.evaluate(&r);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-14);
    }
}

#[test]
fn linear_frc_matches_transfer_function() {
    let (m, c, k) = (1.0, 0.1, 4.0);
    let s = build_duffing(m, c, k, 0.0).unwrap();
    let omegas: Vec<f64> = (1..=12).map(|i| 0.3 * i as f64).collect();
    let pts = frc_sweep(&s, &omegas, &[1.0], 0, 0.5, 1, &TorusOptions::default()).unwrap();
    for p in &pts {
        let w = p.omega;
        let exact = 0.5 / ((k - m * w * w).powi(2) + (c * w).powi(2)).sqrt();
        let a = p.amplitude.unwrap();
        assert!((a - exact).abs() <= 1e-6 * exact, "{w}: {a} vs {exact}");
    }
}

#[test]
fn frc_flags_resonance() {
    let s = build_duffing(1.0, 2e-9, 1.0, 0.5).unwrap();
    let pts = frc_sweep(&s, &[0.5, 1.0], &[1.0], 0, 0.1, 3, &TorusOptions::default()).unwrap();
    assert_eq!(pts[0].status, FrcStatus::Ok);
    assert!(matches!(pts[1].status, FrcStatus::NearResonance { .. }));
    assert!(pts[1].amplitude.is_none());
}

#[test]
fn hardening_shifts_the_peak_right() {
    let lin = build_duffing(1.0, 0.1, 1.0, 0.0).unwrap();
    let hard = build_duffing(1.0, 0.1, 1.0, 0.5).unwrap();
    let omegas: Vec<f64> = (0..41).map(|i| 0.8 + 0.01 * i as f64).collect();
    let peak = |s| {
        let pts = frc_sweep(s, &omegas, &[1.0], 0, 0.03, 5, &TorusOptions::default()).unwrap();
        pts.iter().max_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).unwrap()).unwrap().omega
    };
    assert!(peak(&hard) > peak(&lin));
}

#[test]
fn quasiperiodic_and_piecewise_linear_backends_converge() {
    let s = build_duffing(1.0, 0.3, 1.0, 0.5).unwrap();
    let (w1, w2) = (0.7, 0.7 * 2f64.sqrt());
    let qp = QuasiPeriodicForcing {
        frequencies: vec![w1, w2],
        harmonics: vec![
            Harmonic { k: vec![1, 0], coeff: vec![Complex64::new(0.0, -0.15)] },
            Harmonic { k: vec![0, 1], coeff: vec![Complex64::new(0.0, -0.15)] },
        ],
    };
    let tor = compute_quasiperiodic_gss(&s, &qp, 3, &TorusOptions::default()).unwrap();
    let err_at = |dt: f64| {
        let t_end = 80.0;
        let len = (t_end / dt).round() as usize + 1;
        let f = ForcingSignal::from_fn(1, dt, -150.0, len + (150.0 / dt) as usize, |t, out| {
            let mut v = [0.0];
            qp.evaluate(t, &mut v);
            out[0] = v[0];
        })
        .unwrap();
        let e = compute_taylor_gss(&s, &f, 3, &GssOptions { eps_trunc: 0.0, ..GssOptions::default() }).unwrap();
        let z = e.evaluate_at_amplitude(e.delta_ref);
        let te = tor.to_expansion(f.grid()).unwrap();
        let zq = te.evaluate_at_amplitude(te.delta_ref);
        let skip = (150.0 / dt) as usize;
        diff_sup(&z.tail(skip), &zq.tail(skip))
    };
    let e1 = err_at(0.02);
    let e2 = err_at(0.01);
    let ratio = e1 / e2;
    assert!(ratio > 3.0 && ratio < 5.0, "{e1} {e2} {ratio}");
}

#[test]
fn harmonic_fit_recovers_coefficients() {
    let grid = TimeGrid::new(0.05, 0.0, 2000).unwrap();
    let mut v = Trajectory::zeros(1, grid.len);
    for k in 0..grid.len {
        let t = grid.time(k);
        v.set(0, k, 0.2 + 0.5 * (1.1 * t).cos() - 0.3 * (2.2 * t).sin());
    }
    let fit = fit_quasiperiodic(&v, grid, &[1.1], 3).unwrap();
    let get = |k: i32| fit.harmonics.iter().find(|h| h.k == vec![k]).unwrap().coeff[0];
    assert!((get(0) - Complex64::new(0.2, 0.0)).norm() < 1e-10);
    assert!((get(1) - Complex64::new(0.5, 0.0)).norm() < 1e-10);
    assert!((get(2) - Complex64::new(0.0, 0.3)).norm() < 1e-10);
    assert!(get(3).norm() < 1e-10);
}

#[test]
fn structural_and_general_decompositions_give_one_gss() {
    let s = build_oscillator_chain(3, 1.0, 1.0, 2.0, 0.2).unwrap();
    assert!(decompose(&s).unwrap().is_structural());
    let g = s.with_damping_class(crate::model::DampingClass::General);
    let f = sine_forcing(3, &[0], 0.4, 0.9, 1e-2, 0.0, 30.0);
    let opts = GssOptions { eps_trunc: 0.0, ..GssOptions::default() };
    let a = compute_taylor_gss(&s, &f, 4, &opts).unwrap().evaluate_at_amplitude(0.4);
    let b = compute_taylor_gss(&g, &f, 4, &opts).unwrap().evaluate_at_amplitude(0.4);
    assert!(diff_sup(&a, &b) <= 1e-10 * a.max_abs());
}

