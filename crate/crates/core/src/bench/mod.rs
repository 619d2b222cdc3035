//! Benchmark systems and comparison metrics.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::model::{build_system, DampingOverride, MechanicalSystem, MultiIndex, PolynomialField};
use crate::trajectory::Trajectory;

pub use crate::gss::{frc_sweep, FrcPoint, FrcStatus};

/// Add `kappa (x_b - x_a)^3` as a restoring force between `a` and `b`
/// (`None` is the ground).
fn add_cubic_spring(f: &mut PolynomialField, n: usize, a: Option<usize>, b: Option<usize>, kappa: f64) -> Result<()> {
    // delta = x_b - x_a; force on a is -kappa delta^3, on b +kappa delta^3
    let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
    let idx = |i: usize, j: usize, ei: u32, ej: u32| {
        let mut e = vec![0u32; 2 * n];
        e[i] += ei;
        e[j] += ej;
        e
    };
    match (a, b) {
        (Some(a), Some(b)) => {
            terms.push((idx(b, b, 3, 0), 1.0));
            terms.push((idx(b, a, 2, 1), -3.0));
            terms.push((idx(b, a, 1, 2), 3.0));
            terms.push((idx(a, a, 3, 0), -1.0));
        }
        (None, Some(b)) => terms.push((idx(b, b, 3, 0), 1.0)),
        (Some(a), None) => terms.push((idx(a, a, 3, 0), -1.0)),
        (None, None) => {}
    }
    for (e, c) in terms {
        let m = MultiIndex::new(e);
        if let Some(a) = a {
            f.add_scalar_term(m.clone(), a, -kappa * c)?;
        }
        if let Some(b) = b {
            f.add_scalar_term(m, b, kappa * c)?;
        }
    }
    Ok(())
}

/// `n` equal masses between two walls, joined by springs `k_lin delta + k_cubic delta^3`
/// with a dashpot `c` across every spring.
pub fn build_oscillator_chain(n: usize, mass: f64, k_lin: f64, k_cubic: f64, c: f64) -> Result<MechanicalSystem> {
    if n < 2 || !(mass > 0.0 && k_lin > 0.0 && c >= 0.0 && k_cubic >= 0.0) {
        return Err(crate::GssError::InvalidParameter(alloc::format!(
            "chain needs n >= 2 and positive parameters (n = {n}, m = {mass}, k = {k_lin}, k3 = {k_cubic}, c = {c})"
        )));
    }
    let mut lap = DMatrix::zeros(n, n);
    for i in 0..n {
        lap[(i, i)] = 2.0;
        if i + 1 < n {
            lap[(i, i + 1)] = -1.0;
            lap[(i + 1, i)] = -1.0;
        }
    }
    let mut f = PolynomialField::new(2 * n, n);
    if k_cubic != 0.0 {
        add_cubic_spring(&mut f, n, None, Some(0), k_cubic)?;
        for i in 0..n - 1 {
            add_cubic_spring(&mut f, n, Some(i), Some(i + 1), k_cubic)?;
        }
        add_cubic_spring(&mut f, n, Some(n - 1), None, k_cubic)?;
    }
    build_system(DMatrix::identity(n, n) * mass, &lap * c, &lap * k_lin, f, DampingOverride::Auto)
}

/// `m x'' + c x' + k x + k3 x^3 = g`.
pub fn build_duffing(mass: f64, c: f64, k_lin: f64, k_cubic: f64) -> Result<MechanicalSystem> {
    let mut f = PolynomialField::new(2, 1);
    if k_cubic != 0.0 {
        f.add_scalar_term(MultiIndex::new(vec![3, 0]), 0, k_cubic)?;
    }
    let s = |v: f64| DMatrix::from_element(1, 1, v);
    build_system(s(mass), s(c), s(k_lin), f, DampingOverride::Auto)
}

/// Two coupled oscillators with gyroscopic coupling `spin [[0, 1], [-1, 0]]` in
/// the velocity term and a cubic coupling spring.
pub fn build_gyroscopic_2dof(spin: f64) -> Result<MechanicalSystem> {
    let c = DMatrix::from_row_slice(2, 2, &[0.1, spin, -spin, 0.1]);
    let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
    let mut f = PolynomialField::new(4, 2);
    add_cubic_spring(&mut f, 2, Some(0), Some(1), 0.5)?;
    build_system(DMatrix::identity(2, 2), c, k, f, DampingOverride::Auto)
}

/// `mean_t |pred - ref| / max_t |ref|` over samples `t >= skip` (Euclidean norm over the state).
pub fn nmte(pred: &Trajectory, reference: &Trajectory, skip: usize) -> f64 {
    assert_eq!(pred.dim(), reference.dim(), "trajectories differ in dimension");
    assert_eq!(pred.len(), reference.len(), "trajectories differ in length");
    let len = pred.len();
    if skip >= len {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    for k in skip..len {
        let mut e = 0.0;
        let mut r = 0.0;
        for i in 0..pred.dim() {
            let d = pred.get(i, k) - reference.get(i, k);
            e += d * d;
            r += reference.get(i, k) * reference.get(i, k);
        }
        sum += libm::sqrt(e);
        peak = peak.max(libm::sqrt(r));
    }
    let mean = sum / (len - skip) as f64;
    if peak == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        mean / peak
    }
}
