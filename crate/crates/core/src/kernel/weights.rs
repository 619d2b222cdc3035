//! Exact step weights for piecewise-linear forcing.
//!
//! For a scalar mode `eta' = lambda eta + p(t)` with `p` linear on
//! `[t, t + dt]`, one step reads
//! `eta(t+dt) = e^{lambda dt} eta(t) + Q0 p(t) + Q1 p(t+dt)`. For an
//! oscillator block the same holds with a 2x2 propagator and a 2x2 weight
//! matrix acting on `(p(t), p(t+dt))`.

use alloc::vec::Vec;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::linalg::cexpm1;

/// Below this `|lambda dt|` the scalar weights use their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;
/// Tolerance on `|zeta - 1|` for the critical branch tag.
pub const CRITICAL_TOL: f64 = 1e-9;

/// `(Q0, Q1)` with `Q0 = int_0^dt e^{lambda(dt-s)} (1 - s/dt) ds` and
/// `Q1 = int_0^dt e^{lambda(dt-s)} (s/dt) ds`.
pub fn qvec_general(lambda: Complex64, dt: f64) -> [Complex64; 2] {
    let z = lambda * dt;
    if z.norm() < SERIES_THRESHOLD {
        // q0 = dt sum z^k / (k! (k+2)), q1 = dt sum z^k / (k! (k+1)(k+2))
        let z2 = z * z;
        let z3 = z2 * z;
        let q0 = (Complex64::new(0.5, 0.0) + z / 3.0 + z2 / 8.0 + z3 / 30.0) * dt;
        let q1 = (Complex64::new(0.5, 0.0) + z / 6.0 + z2 / 24.0 + z3 / 120.0) * dt;
        return [q0, q1];
    }
    let em1 = cexpm1(z);
    let z2 = z * z;
    let q0 = (z + z * em1 - em1) / z2 * dt;
    let q1 = (em1 - z) / z2 * dt;
    [q0, q1]
}

/// Branch of an oscillator by its damping ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingBranch {
    Underdamped,
    Critical,
    Overdamped,
}

impl DampingBranch {
    pub fn of(zeta: f64) -> Self {
        if (zeta - 1.0).abs() <= CRITICAL_TOL {
            DampingBranch::Critical
        } else if zeta < 1.0 {
            DampingBranch::Underdamped
        } else {
            DampingBranch::Overdamped
        }
    }
}

/// Step data of the oscillator `y'' + 2 zeta omega y' + omega^2 y = p(t)`
/// in the state `(y, y')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorStep {
    /// `e^{Lambda dt}` with `Lambda = [[0, 1], [-omega^2, -2 zeta omega]]`.
    pub propagator: Matrix2<f64>,
    /// `Q[r][c] = int_0^dt [e^{Lambda(dt-s)}]_{r,1} w_c(s) ds`,
    /// `w_0 = 1 - s/dt`, `w_1 = s/dt`.
    pub weights: Matrix2<f64>,
    pub branch: DampingBranch,
}

/// The 2x2 weight matrix and branch tag of one oscillator.
pub fn qmat_structural(omega: f64, zeta: f64, dt: f64) -> (Matrix2<f64>, DampingBranch) {
    let s = oscillator_step(omega, zeta, dt);
    (s.weights, s.branch)
}

pub fn oscillator_step(omega: f64, zeta: f64, dt: f64) -> OscillatorStep {
    let branch = DampingBranch::of(zeta);
    let disc = zeta * zeta - 1.0;
    let rho = omega * (zeta + libm::sqrt(disc.max(0.0))).max(1.0);
    let split = 2.0 * libm::sqrt(disc.abs()) * omega / rho;
    let (propagator, weights) = if rho * dt <= 1.0 {
        series_step(omega, zeta, dt)
    } else if (zeta - 1.0).abs() <= 1e-12 {
        critical_step(omega, dt)
    } else if split > 1e-3 {
        distinct_root_step(omega, zeta, dt)
    } else {
        let mut m = 0;
        let mut h = dt;
        while rho * h > 1.0 {
            h *= 0.5;
            m += 1;
        }
        let (mut e, mut q) = series_step(omega, zeta, h);
        let p1 = Matrix2::new(1.0, 0.0, 0.5, 0.5);
        let p2 = Matrix2::new(0.5, 0.5, 0.0, 1.0);
        for _ in 0..m {
            q = e * q * p1 + q * p2;
            e = e * e;
        }
        (e, q)
    };
    OscillatorStep { propagator, weights, branch }
}

/// Power series in `dt`; every entry of `Lambda^k` follows the recurrence
/// of the characteristic polynomial `mu^2 + 2 zeta omega mu + omega^2`.
/// Used with `rho dt <= 1`, where 30 terms are far below rounding.
fn series_step(omega: f64, zeta: f64, dt: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let c1 = -2.0 * zeta * omega;
    let c2 = -omega * omega;
    let mut a = [0.0f64, 1.0]; // [Lambda^k]_{0,1}, k and k+1
    let mut b = [1.0f64, 0.0]; // [Lambda^k]_{0,0}, k and k+1
    let (mut e00, mut e01, mut e11) = (0.0, 0.0, 0.0);
    let (mut q00, mut q01, mut q10, mut q11) = (0.0, 0.0, 0.0, 0.0);
    let mut fk = 1.0; // dt^k / k!
    for k in 0..30 {
        let kf = k as f64;
        e00 += b[0] * fk;
        e01 += a[0] * fk;
        e11 += a[1] * fk;
        let w0 = fk * dt / (kf + 2.0);
        let w1 = fk * dt / ((kf + 1.0) * (kf + 2.0));
        q00 += a[0] * w0;
        q01 += a[0] * w1;
        q10 += a[1] * w0;
        q11 += a[1] * w1;
        a = [a[1], c1 * a[1] + c2 * a[0]];
        b = [b[1], c1 * b[1] + c2 * b[0]];
        fk *= dt / (kf + 1.0);
    }
    (Matrix2::new(e00, e01, c2 * e01, e11), Matrix2::new(q00, q01, q10, q11))
}

/// Distinct roots: divided differences of the scalar weights.
fn distinct_root_step(omega: f64, zeta: f64, dt: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let disc = zeta * zeta - 1.0;
    if disc < 0.0 {
        let wd = omega * libm::sqrt(-disc);
        let lp = Complex64::new(-zeta * omega, wd);
        let q = qvec_general(lp, dt);
        let ex = (lp * dt).exp();
        let c1 = ex.im / wd;
        let hv = (lp * ex).im / wd;
        let e = Matrix2::new(hv + 2.0 * zeta * omega * c1, c1, -omega * omega * c1, hv);
        let w = Matrix2::new(q[0].im / wd, q[1].im / wd, (lp * q[0]).im / wd, (lp * q[1]).im / wd);
        (e, w)
    } else {
        let s = libm::sqrt(disc);
        let lp = -omega / (zeta + s);
        let lm = -(zeta + s) * omega;
        let d = lp - lm;
        let qp = qvec_general(Complex64::new(lp, 0.0), dt);
        let qm = qvec_general(Complex64::new(lm, 0.0), dt);
        let (ep, em) = (libm::exp(lp * dt), libm::exp(lm * dt));
        let c1 = (ep - em) / d;
        let hv = (lp * ep - lm * em) / d;
        let c0 = (lp * em - lm * ep) / d;
        let e = Matrix2::new(c0, c1, -omega * omega * c1, hv);
        let w = Matrix2::new(
            (qp[0].re - qm[0].re) / d,
            (qp[1].re - qm[1].re) / d,
            (lp * qp[0].re - lm * qm[0].re) / d,
            (lp * qp[1].re - lm * qm[1].re) / d,
        );
        (e, w)
    }
}

/// Repeated root `-omega` (used only when `omega dt > 1`).
fn critical_step(omega: f64, dt: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let mu = -omega;
    let ed = libm::exp(mu * dt);
    // J_n = int_0^dt u^n e^{mu u} du
    let j0 = (ed - 1.0) / mu;
    let j1 = (dt * ed - j0) / mu;
    let j2 = (dt * dt * ed - 2.0 * j1) / mu;
    let q0 = j1 / dt;
    let q1 = j0 - j1 / dt;
    let dq0 = j2 / dt;
    let dq1 = j1 - j2 / dt;
    let c1 = dt * ed;
    let hv = (1.0 + mu * dt) * ed;
    let c0 = (1.0 - mu * dt) * ed;
    let e = Matrix2::new(c0, c1, -omega * omega * c1, hv);
    let w = Matrix2::new(dq0, dq1, q0 + mu * dq0, q1 + mu * dq1);
    (e, w)
}

/// Per-mode step data for the retained modes.
#[derive(Debug, Clone)]
pub enum KernelWeights {
    General { dt: f64, propagator: Vec<Complex64>, weights: Vec<[Complex64; 2]> },
    Structural { dt: f64, steps: Vec<OscillatorStep> },
}

impl KernelWeights {
    pub fn dt(&self) -> f64 {
        match self {
            KernelWeights::General { dt, .. } | KernelWeights::Structural { dt, .. } => *dt,
        }
    }
}
