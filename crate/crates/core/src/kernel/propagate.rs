//! Response from rest to a sampled inhomogeneity, one linear solve per order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use super::weights::{oscillator_step, qvec_general, KernelWeights};
use crate::error::{GssError, Result};
use crate::model::MechanicalSystem;
use crate::par;
use crate::spectral::{GeneralModes, SpectralData, SpectralKind, StructuralModes};
use crate::trajectory::Trajectory;

/// Relative size of the imaginary part tolerated after modal reconstruction.
pub const COMPLEX_RESIDUE_TOL: f64 = 1e-10;

/// A linear solver `z' = A z + B^{-1} phi(t)`, `z(t_0) = 0`, on the sample grid of `phi`.
pub trait LinearPropagator: Sync {
    fn state_dim(&self) -> usize;
    fn propagate(&self, phi: &Trajectory) -> Result<Trajectory>;
}

/// Step weights of the retained modes.
pub fn compute_kernel_weights(spectral: &SpectralData, dt: f64) -> KernelWeights {
    match &spectral.kind {
        SpectralKind::General(g) => {
            let propagator = spectral.retained.iter().map(|&j| (g.eigenvalues[j] * dt).exp()).collect();
            let weights = spectral.retained.iter().map(|&j| qvec_general(g.eigenvalues[j], dt)).collect();
            KernelWeights::General { dt, propagator, weights }
        }
        SpectralKind::Structural(s) => {
            let steps = spectral.retained.iter().map(|&j| oscillator_step(s.omega[j], s.zeta[j], dt)).collect();
            KernelWeights::Structural { dt, steps }
        }
    }
}

/// Exponential-kernel propagation of `phi` through the retained modes.
pub fn propagate(spectral: &SpectralData, weights: &KernelWeights, phi: &Trajectory) -> Result<Trajectory> {
    if phi.dim() != spectral.state_dim {
        return Err(GssError::DimensionMismatch(format!(
            "inhomogeneity has dimension {}, system state has {}",
            phi.dim(),
            spectral.state_dim
        )));
    }
    match (&spectral.kind, weights) {
        (SpectralKind::General(g), KernelWeights::General { propagator, weights, .. }) => {
            propagate_general(g, &spectral.retained, propagator, weights, phi)
        }
        (SpectralKind::Structural(s), KernelWeights::Structural { steps, .. }) => {
            let e: Vec<_> = steps.iter().map(|s| s.propagator).collect();
            let q: Vec<_> = steps.iter().map(|s| s.weights).collect();
            propagate_structural(s, &spectral.retained, &e, &q, phi)
        }
        _ => Err(GssError::InvalidParameter("kernel weights do not match the spectral data".into())),
    }
}

fn nonzero_rows(phi: &Trajectory) -> Vec<usize> {
    (0..phi.dim()).filter(|&i| phi.row(i).iter().any(|&v| v != 0.0)).collect()
}

fn propagate_general(
    g: &GeneralModes,
    retained: &[usize],
    prop: &[Complex64],
    w: &[[Complex64; 2]],
    phi: &Trajectory,
) -> Result<Trajectory> {
    let len = phi.len();
    let dim = phi.dim();
    let rows = nonzero_rows(phi);
    let etas: Vec<Vec<Complex64>> = par::map(retained.len(), |r| {
        let j = retained[r];
        let mut p = vec![Complex64::new(0.0, 0.0); len];
        for &i in &rows {
            let psi = g.projector[(j, i)];
            for (pk, &x) in p.iter_mut().zip(phi.row(i)) {
                *pk += psi * x;
            }
        }
        let (e, [q0, q1]) = (prop[r], w[r]);
        let mut eta = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..len.saturating_sub(1) {
            eta[k + 1] = e * eta[k] + q0 * p[k] + q1 * p[k + 1];
        }
        eta
    });
    let out_rows: Vec<(Vec<f64>, f64, f64)> = par::map(dim, |i| {
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        let mut mag = vec![0.0f64; len];
        for (r, &j) in retained.iter().enumerate() {
            let v = g.vectors[(i, j)];
            let vn = v.norm();
            if vn == 0.0 {
                continue;
            }
            for k in 0..len {
                acc[k] += v * etas[r][k];
                mag[k] += vn * etas[r][k].norm();
            }
        }
        let imag = acc.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        let scale = mag.iter().cloned().fold(0.0, f64::max);
        (acc.iter().map(|c| c.re).collect(), imag, scale)
    });
    let mut out = Trajectory::zeros(dim, len);
    let mut imag = 0.0f64;
    let mut scale = 0.0f64;
    for (i, (row, im, sc)) in out_rows.into_iter().enumerate() {
        out.row_mut(i).copy_from_slice(&row);
        imag = imag.max(im);
        scale = scale.max(sc);
    }
    if imag > COMPLEX_RESIDUE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(GssError::ComplexResidue { residue: imag, scale });
    }
    Ok(out)
}

fn check_force_block(phi: &Trajectory, n: usize) -> Result<()> {
    if phi.dim() != 2 * n {
        return Err(GssError::DimensionMismatch(format!("expected a {}-dimensional state", 2 * n)));
    }
    if (n..2 * n).any(|i| phi.row(i).iter().any(|&v| v != 0.0)) {
        return Err(GssError::InvalidParameter(
            "second-order propagation needs the inhomogeneity in the force block only".into(),
        ));
    }
    Ok(())
}

fn propagate_structural(
    s: &StructuralModes,
    retained: &[usize],
    e: &[nalgebra::Matrix2<f64>],
    q: &[nalgebra::Matrix2<f64>],
    phi: &Trajectory,
) -> Result<Trajectory> {
    let n = s.shapes.nrows();
    check_force_block(phi, n)?;
    let len = phi.len();
    let rows = nonzero_rows(phi);
    let modal: Vec<(Vec<f64>, Vec<f64>)> = par::map(retained.len(), |r| {
        let j = retained[r];
        let mut f = vec![0.0; len];
        for &i in &rows {
            let u = s.shapes[(i, j)];
            for (fk, &x) in f.iter_mut().zip(phi.row(i)) {
                *fk += u * x;
            }
        }
        let (e, q) = (e[r], q[r]);
        let mut y = vec![0.0; len];
        let mut yd = vec![0.0; len];
        for k in 0..len.saturating_sub(1) {
            let (a, b) = (f[k], f[k + 1]);
            y[k + 1] = e[(0, 0)] * y[k] + e[(0, 1)] * yd[k] + q[(0, 0)] * a + q[(0, 1)] * b;
            yd[k + 1] = e[(1, 0)] * y[k] + e[(1, 1)] * yd[k] + q[(1, 0)] * a + q[(1, 1)] * b;
        }
        (y, yd)
    });
    let out_rows: Vec<Vec<f64>> = par::map(2 * n, |row| {
        let (i, vel) = if row < n { (row, false) } else { (row - n, true) };
        let mut acc = vec![0.0; len];
        for (r, &j) in retained.iter().enumerate() {
            let u = s.shapes[(i, j)];
            let src = if vel { &modal[r].1 } else { &modal[r].0 };
            for (a, &y) in acc.iter_mut().zip(src) {
                *a += u * y;
            }
        }
        acc
    });
    let mut out = Trajectory::zeros(2 * n, len);
    for (i, row) in out_rows.into_iter().enumerate() {
        out.row_mut(i).copy_from_slice(&row);
    }
    Ok(out)
}

/// Kernel propagation bundled with its precomputed weights.
#[derive(Debug, Clone)]
pub struct KernelPropagator {
    spectral: SpectralData,
    weights: KernelWeights,
}

impl KernelPropagator {
    pub fn new(spectral: SpectralData, dt: f64) -> Self {
        let weights = compute_kernel_weights(&spectral, dt);
        Self { spectral, weights }
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }
}

impl LinearPropagator for KernelPropagator {
    fn state_dim(&self) -> usize {
        self.spectral.state_dim
    }

    fn propagate(&self, phi: &Trajectory) -> Result<Trajectory> {
        propagate(&self.spectral, &self.weights, phi)
    }
}

/// Linear average-acceleration Newmark scheme (`beta = 1/4`, `gamma = 1/2`)
/// for `M x'' + C x' + K x = phi(t)`; the effective stiffness is factored once.
#[derive(Debug, Clone)]
pub struct NewmarkPropagator {
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
    effective: Cholesky<f64, Dyn>,
    dt: f64,
}

impl NewmarkPropagator {
    pub fn new(system: &MechanicalSystem, dt: f64) -> Result<Self> {
        let keff = system.stiffness() + system.damping() * (2.0 / dt) + system.mass() * (4.0 / (dt * dt));
        let effective = Cholesky::new(keff).ok_or(GssError::SingularEffectiveStiffness)?;
        Ok(Self {
            mass: system.mass().clone(),
            damping: system.damping().clone(),
            mass_chol: system.mass_cholesky().clone(),
            effective,
            dt,
        })
    }
}

impl LinearPropagator for NewmarkPropagator {
    fn state_dim(&self) -> usize {
        2 * self.mass.nrows()
    }

    fn propagate(&self, phi: &Trajectory) -> Result<Trajectory> {
        let n = self.mass.nrows();
        check_force_block(phi, n)?;
        let len = phi.len();
        let dt = self.dt;
        let mut out = Trajectory::zeros(2 * n, len);
        if len == 0 {
            return Ok(out);
        }
        let force = |k: usize| DVector::from_iterator(n, (0..n).map(|i| phi.get(i, k)));
        let mut x = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        let mut a = self.mass_chol.solve(&force(0));
        for k in 0..len - 1 {
            let rhs = force(k + 1)
                + &self.mass * (&x * (4.0 / (dt * dt)) + &v * (4.0 / dt) + &a)
                + &self.damping * (&x * (2.0 / dt) + &v);
            let xn = self.effective.solve(&rhs);
            let dx = &xn - &x;
            let vn = &dx * (2.0 / dt) - &v;
            let an = &dx * (4.0 / (dt * dt)) - &v * (4.0 / dt) - &a;
            x = xn;
            v = vn;
            a = an;
            for i in 0..n {
                out.set(i, k + 1, x[i]);
                out.set(n + i, k + 1, v[i]);
            }
        }
        Ok(out)
    }
}
