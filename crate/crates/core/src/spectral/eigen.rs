//! Eigendecomposition of real nonsymmetric matrices via complex Schur form.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{GssError, Result};
use crate::linalg::to_complex;

/// Eigenvalues and unit eigenvectors of a real matrix.
///
/// Ordering: descending real part; complex pairs adjacent with the positive
/// imaginary part first and exactly conjugate; real eigenvalues carry a zero
/// imaginary part and real eigenvectors. Each eigenvector has unit 2-norm and
/// its largest-magnitude entry real and positive.
pub fn real_eigen(a: &DMatrix<f64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(to_complex(a), f64::EPSILON, 10_000)
        .ok_or(GssError::LinearAlgebra("Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();

    let mut pairs: Vec<(Complex64, nalgebra::DVector<Complex64>)> = Vec::with_capacity(n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut y = nalgebra::DVector::<Complex64>::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < f64::EPSILON * scale {
                den = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            y[i] = -s / den;
        }
        let v = &q * y;
        pairs.push((lam, normalize(v)));
    }

    let real_tol = |l: Complex64| l.im.abs() <= 1e-10 * l.norm().max(1e-300);
    let mut reps: Vec<(Complex64, nalgebra::DVector<Complex64>)> = Vec::new();
    let mut negatives = 0usize;
    for (lam, v) in pairs {
        if real_tol(lam) {
            let v = normalize(v.map(|c| Complex64::new(c.re, 0.0)));
            reps.push((Complex64::new(lam.re, 0.0), v));
        } else if lam.im > 0.0 {
            reps.push((lam, v));
        } else {
            negatives += 1;
        }
    }
    let positives = reps.iter().filter(|(l, _)| l.im != 0.0).count();
    if positives != negatives {
        return Err(GssError::LinearAlgebra("complex eigenvalues do not pair up"));
    }
    reps.sort_by(|(a, _), (b, _)| {
        b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    });

    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::<Complex64>::zeros(n, n);
    let mut col = 0;
    for (lam, v) in reps {
        vals.push(lam);
        vecs.set_column(col, &v);
        col += 1;
        if lam.im != 0.0 {
            vals.push(lam.conj());
            vecs.set_column(col, &v.map(|c| c.conj()));
            col += 1;
        }
    }
    Ok((vals, vecs))
}

fn normalize(v: nalgebra::DVector<Complex64>) -> nalgebra::DVector<Complex64> {
    let norm = v.norm();
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, c) in v.iter().enumerate() {
        // first entry within a relative whisker of the maximum, for stable ties
        if c.norm() > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = c.norm();
        }
    }
    let phase = v[best] / v[best].norm();
    v.map(|c| c / (phase * norm))
}
