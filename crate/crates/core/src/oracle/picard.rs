//! Picard iteration of the integral equation `z = K * [F(z) + G(z, t)]` with the full nonlinearity.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{GssError, Result};
use crate::kernel::{compute_kernel_weights, propagate};
use crate::model::{ForcingSignal, MechanicalSystem, MultiIndex};
use crate::par;
use crate::spectral::SpectralData;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub trajectory: Trajectory,
    /// Number of map applications performed.
    pub iterations: usize,
    /// Successive differences `max_t |z_{l+1} - z_l|`.
    pub differences: Vec<f64>,
    /// Ratio of the last two differences.
    pub contraction_estimate: f64,
    /// A priori iteration count from the supplied contraction factor (or the
    /// largest observed ratio), `None` when that factor is not below one.
    pub iteration_bound: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Contraction factor used for the a priori iteration bound.
    pub contraction_factor: Option<f64>,
}

fn monomial(m: &MultiIndex, z: &[f64]) -> f64 {
    let mut v = 1.0;
    for (&e, &zi) in m.exponents().iter().zip(z) {
        for _ in 0..e {
            v *= zi;
        }
    }
    v
}

/// `B`-form right-hand side `(g(z, t) - f(z), 0)` along the trajectory `z`.
fn inhomogeneity(system: &MechanicalSystem, forcing: &ForcingSignal, z: &Trajectory) -> Trajectory {
    let n = system.n();
    let len = z.len();
    let cols: Vec<Vec<f64>> = par::map(len, |k| {
        let zk = z.column(k);
        let f = system.nonlinearity().evaluate(&zk);
        let mut out: Vec<f64> = (0..n).map(|i| forcing.values().get(i, k) - f[i]).collect();
        for term in forcing.state_terms() {
            let s = monomial(&term.index, &zk);
            for (i, o) in out.iter_mut().enumerate() {
                *o += term.values.get(i, k) * s;
            }
        }
        out
    });
    let mut phi = Trajectory::zeros(2 * n, len);
    for (k, c) in cols.iter().enumerate() {
        for i in 0..n {
            phi.set(i, k, c[i]);
        }
    }
    phi
}

fn sup_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    d.sup_norm()
}

/// Fixed point of the Picard map from `z_0 = 0`, stopping when successive
/// iterates differ by less than `tol` in the sup norm.
pub fn picard_gss(
    system: &MechanicalSystem,
    spectral: &SpectralData,
    forcing: &ForcingSignal,
    options: &PicardOptions,
) -> Result<PicardResult> {
    let n = system.n();
    if forcing.n_dofs() != n || spectral.state_dim != 2 * n {
        return Err(GssError::DimensionMismatch("forcing or spectral data does not match the system".into()));
    }
    let weights = compute_kernel_weights(spectral, forcing.dt());
    let mut z = Trajectory::zeros(2 * n, forcing.len());
    let mut differences = Vec::new();
    for l in 1..=options.max_iter {
        let next = propagate(spectral, &weights, &inhomogeneity(system, forcing, &z))?;
        let d = sup_diff(&next, &z);
        differences.push(d);
        z = next;
        if !d.is_finite() {
            break;
        }
        if d < options.tol {
            let contraction_estimate = ratio(&differences);
            let q = options
                .contraction_factor
                .unwrap_or_else(|| differences.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max));
            return Ok(PicardResult {
                trajectory: z,
                iterations: l,
                iteration_bound: iteration_bound(differences[0], q, options.tol),
                contraction_estimate,
                differences,
            });
        }
    }
    Err(GssError::NoConvergence {
        iterations: differences.len(),
        last_difference: differences.last().cloned().unwrap_or(f64::NAN),
        last_iterate: Box::new(z),
    })
}

fn ratio(d: &[f64]) -> f64 {
    match d.len() {
        0 | 1 => 0.0,
        k if d[k - 2] > 0.0 => d[k - 1] / d[k - 2],
        _ => 0.0,
    }
}

/// Smallest `l` with `q^{l-1} d_1 < tol`, counting the first application.
pub fn iteration_bound(first_difference: f64, q: f64, tol: f64) -> Option<usize> {
    if first_difference < tol {
        return Some(1);
    }
    if !(q < 1.0) {
        return None;
    }
    if q <= 0.0 {
        return Some(2);
    }
    // d_l <= q^{l-1} d_1 < tol once l - 1 > ln(tol / d_1) / ln q
    let x = libm::log(tol / first_difference) / libm::log(q);
    Some(2 + libm::floor(x) as usize)
}

/// `max_t |z - K*[F(z) + G]|`.
pub fn picard_residual(system: &MechanicalSystem, spectral: &SpectralData, forcing: &ForcingSignal, z: &Trajectory) -> Result<f64> {
    let weights = compute_kernel_weights(spectral, forcing.dt());
    let next = propagate(spectral, &weights, &inhomogeneity(system, forcing, z))?;
    Ok(sup_diff(&next, z))
}
