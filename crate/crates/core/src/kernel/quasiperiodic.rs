//! Closed-form kernel steps for quasiperiodic inhomogeneities.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{GssError, Result};
use crate::linalg::cexpm1;
use crate::spectral::GeneralModes;
use crate::trajectory::{TimeGrid, Trajectory};

/// Default resonance guard: `|i<k,Omega> - lambda| < 1e-6 |lambda|`.
pub const DEFAULT_RESONANCE_REL: f64 = 1e-6;

/// One term `g_k e^{i<k,Omega>t}` of a quasiperiodic inhomogeneity.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    pub k: Vec<i32>,
    pub coeff: Vec<Complex64>,
}

/// `Phi(t) = sum_k g_k e^{i<k,Omega>t}` on the state space (B-form).
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPeriodicForcing {
    pub frequencies: Vec<f64>,
    pub harmonics: Vec<Harmonic>,
}

impl QuasiPeriodicForcing {
    pub fn frequency_of(&self, k: &[i32]) -> f64 {
        k.iter().zip(&self.frequencies).map(|(&ki, &w)| ki as f64 * w).sum()
    }

    /// Real part of the sum at time `t`.
    pub fn evaluate(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for h in &self.harmonics {
            let e = Complex64::new(0.0, self.frequency_of(&h.k) * t).exp();
            for (o, c) in out.iter_mut().zip(&h.coeff) {
                *o += (c * e).re;
            }
        }
    }
}

fn guard(lambda: Complex64, freq: f64, rel: f64, mode: usize, k: &[i32]) -> Result<Complex64> {
    let d = Complex64::new(0.0, freq) - lambda;
    if d.norm() < rel * lambda.norm() {
        return Err(GssError::NearResonance { mode, harmonic: k.to_vec(), distance: d.norm() });
    }
    Ok(d)
}

/// Kernel increment of mode `j` over `[t, t + dt]`:
/// `sum_k [psi_j g_k] e^{i w_k t} (e^{i w_k dt} - e^{lambda dt}) / (i w_k - lambda)`.
pub fn quasiperiodic_step(
    forcing: &QuasiPeriodicForcing,
    psi_row: &[Complex64],
    lambda: Complex64,
    dt: f64,
    t: f64,
    resonance_rel: f64,
) -> Result<Complex64> {
    let el = (lambda * dt).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for h in &forcing.harmonics {
        let w = forcing.frequency_of(&h.k);
        let d = guard(lambda, w, resonance_rel, 0, &h.k)?;
        let c: Complex64 = psi_row.iter().zip(&h.coeff).map(|(p, g)| p * g).sum();
        // (e^{i w dt} - e^{lambda dt}) / d = e^{lambda dt} expm1(d dt) / d
        let ratio = el * cexpm1(d * dt) / d;
        acc += c * Complex64::new(0.0, w * t).exp() * ratio;
    }
    Ok(acc)
}

/// Response from rest on `grid` using the closed-form steps for all modes.
pub fn propagate_quasiperiodic(
    modes: &GeneralModes,
    forcing: &QuasiPeriodicForcing,
    grid: TimeGrid,
    resonance_rel: f64,
) -> Result<Trajectory> {
    let dim = modes.vectors.nrows();
    let mut out = Trajectory::zeros(dim, grid.len);
    for (j, &lambda) in modes.eigenvalues.iter().enumerate() {
        let psi: Vec<Complex64> = modes.projector.row(j).iter().cloned().collect();
        let e = (lambda * grid.dt).exp();
        let mut eta = Complex64::new(0.0, 0.0);
        for k in 1..grid.len {
            let inc = quasiperiodic_step(forcing, &psi, lambda, grid.dt, grid.time(k - 1), resonance_rel)
                .map_err(|err| tag_mode(err, j))?;
            eta = e * eta + inc;
            for i in 0..dim {
                let v = out.get(i, k) + (modes.vectors[(i, j)] * eta).re;
                out.set(i, k, v);
            }
        }
    }
    Ok(out)
}

/// Exact steady state `sum_k V diag(1/(i w_k - lambda)) Psi g_k e^{i w_k t}`.
pub fn steady_quasiperiodic(
    modes: &GeneralModes,
    forcing: &QuasiPeriodicForcing,
    grid: TimeGrid,
    resonance_rel: f64,
) -> Result<Trajectory> {
    let dim = modes.vectors.nrows();
    let mut out = Trajectory::zeros(dim, grid.len);
    for h in &forcing.harmonics {
        let w = forcing.frequency_of(&h.k);
        let mut amp = alloc::vec![Complex64::new(0.0, 0.0); dim];
        for (j, &lambda) in modes.eigenvalues.iter().enumerate() {
            let d = guard(lambda, w, resonance_rel, j, &h.k)?;
            let c: Complex64 = (0..dim).map(|i| modes.projector[(j, i)] * h.coeff[i]).sum();
            let eta = c / d;
            for (i, a) in amp.iter_mut().enumerate() {
                *a += modes.vectors[(i, j)] * eta;
            }
        }
        for k in 0..grid.len {
            let e = Complex64::new(0.0, w * grid.time(k)).exp();
            for (i, a) in amp.iter().enumerate() {
                let v = out.get(i, k) + (a * e).re;
                out.set(i, k, v);
            }
        }
    }
    Ok(out)
}

fn tag_mode(err: GssError, j: usize) -> GssError {
    match err {
        GssError::NearResonance { harmonic, distance, .. } => GssError::NearResonance { mode: j, harmonic, distance },
        e => e,
    }
}
