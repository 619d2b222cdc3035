//! Dense matrix-exponential stepping of linear systems with piecewise-linear input.

use nalgebra::DMatrix;

use crate::trajectory::Trajectory;

/// `exp(a)` by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.abs().row_sum().max();
    let mut s = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        s += 1;
    }
    let a = a * scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Response from rest of `z' = a z + u(t)` with `u` linear between samples,
/// stepped exactly through the exponential of the augmented matrix
/// `[[a, I, 0], [0, 0, I/dt], [0, 0, 0]]`.
pub fn exact_pwl_response(a: &DMatrix<f64>, u: &Trajectory, dt: f64) -> Trajectory {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(3 * n, 3 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, n)).fill_with_identity();
    for i in 0..n {
        aug[(n + i, 2 * n + i)] = 1.0 / dt;
    }
    let e = expm(&(aug * dt));
    let phi = e.view((0, 0), (n, n)).into_owned();
    let g0 = e.view((0, n), (n, n)).into_owned();
    let g1 = e.view((0, 2 * n), (n, n)).into_owned();
    let len = u.len();
    let mut out = Trajectory::zeros(n, len);
    let mut z = nalgebra::DVector::zeros(n);
    for k in 0..len.saturating_sub(1) {
        let uk = nalgebra::DVector::from_iterator(n, (0..n).map(|i| u.get(i, k)));
        let uk1 = nalgebra::DVector::from_iterator(n, (0..n).map(|i| u.get(i, k + 1)));
        // state (z, u, u') with u' = (u_{k+1} - u_k) / dt * dt on the scaled axis
        z = &phi * &z + &g0 * &uk + &g1 * (&uk1 - &uk);
        for i in 0..n {
            out.set(i, k + 1, z[i]);
        }
    }
    out
}
