//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

pub fn spectral_norm_c(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// 2-norm condition number (infinite if singular).
pub fn condition_c(a: &DMatrix<Complex64>) -> f64 {
    let s = a.clone().svd(false, false).singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let em1 = libm::expm1(z.re);
    let (s, c) = (libm::sin(z.im), libm::cos(z.im));
    // cos y - 1 = -2 sin^2(y/2)
    let half = libm::sin(0.5 * z.im);
    let cm1 = -2.0 * half * half;
    Complex64::new(em1 * c + cm1, (em1 + 1.0) * s)
}
