//! Kernel weights by direct quadrature of their defining integrals.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::quadrature::{integrate, integrate_with};
use crate::error::Result;

/// `(int_0^dt e^{lambda(dt-s)} (1-s/dt) ds, int_0^dt e^{lambda(dt-s)} (s/dt) ds)`.
pub fn general_weights_quadrature(lambda: Complex64, dt: f64, rel_tol: f64) -> Result<[Complex64; 2]> {
    let v = integrate(
        |s| {
            let e = (lambda * (dt - s)).exp();
            let w1 = s / dt;
            let w0 = 1.0 - w1;
            [e.re * w0, e.im * w0, e.re * w1, e.im * w1]
        },
        0.0,
        dt,
        rel_tol,
        1e-300,
    )?;
    Ok([Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])])
}

/// `exp(u [[0, 1], [-omega^2, -2 zeta omega]])` by scaling and squaring of
/// a truncated Taylor series.
pub fn oscillator_exponential(omega: f64, zeta: f64, u: f64) -> Matrix2<f64> {
    let a = Matrix2::new(0.0, 1.0, -omega * omega, -2.0 * zeta * omega) * u;
    let norm = a.abs().max() * 2.0;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * scale;
    let mut term = Matrix2::identity();
    let mut sum = Matrix2::identity();
    for k in 1..25 {
        term = term * a / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `Q[r][c] = int_0^dt [e^{Lambda(dt-s)}]_{r,1} w_c(s) ds`, each row to
/// `rel_tol` of the row's `int |integrand|`.
pub fn structural_weights_quadrature(omega: f64, zeta: f64, dt: f64, rel_tol: f64) -> Result<Matrix2<f64>> {
    let [s0, s1] = integrate(
        |s| {
            let e = oscillator_exponential(omega, zeta, dt - s);
            [e[(0, 1)].abs(), e[(1, 1)].abs()]
        },
        0.0,
        dt,
        1e-3,
        0.0,
    )?;
    let abs = [rel_tol * s0, rel_tol * s0, rel_tol * s1, rel_tol * s1];
    let v = integrate_with(
        |s| {
            let e = oscillator_exponential(omega, zeta, dt - s);
            let w1 = s / dt;
            let w0 = 1.0 - w1;
            [e[(0, 1)] * w0, e[(0, 1)] * w1, e[(1, 1)] * w0, e[(1, 1)] * w1]
        },
        0.0,
        dt,
        rel_tol,
        abs,
    )?;
    Ok(Matrix2::new(v[0], v[1], v[2], v[3]))
}
