//! Adaptive Gauss-Kronrod (7/15) quadrature of small vector integrands.

use alloc::vec::Vec;

use crate::error::{GssError, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 20_000;

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for i in 0..N {
        k[i] = WGK[7] * fc[i];
        g[i] = WG[3] * fc[i];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for i in 0..N {
            let s = f1[i] + f2[i];
            k[i] += WGK[j] * s;
            if j % 2 == 1 {
                g[i] += WG[j / 2] * s;
            }
        }
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for i in 0..N {
        val[i] = k[i] * h;
        err[i] = ((k[i] - g[i]) * h).abs();
    }
    (val, err)
}

/// `int_a^b f(x) dx`, componentwise to `rel_tol |I_i| + abs_tol`.
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<[f64; N]> {
    integrate_with(f, a, b, rel_tol, [abs_tol; N])
}

/// As [`integrate`] with a separate absolute tolerance per component.
pub fn integrate_with<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: [f64; N],
) -> Result<[f64; N]> {
    let mut intervals: Vec<(f64, f64, [f64; N], [f64; N])> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    intervals.push((a, b, v, e));
    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for (_, _, v, e) in &intervals {
            for i in 0..N {
                total[i] += v[i];
                err[i] += e[i];
            }
        }
        let tol: [f64; N] = core::array::from_fn(|i| rel_tol * total[i].abs() + abs_tol[i]);
        if (0..N).all(|i| err[i] <= tol[i]) {
            return Ok(total);
        }
        let worst = (0..N).map(|i| err[i]).fold(0.0, f64::max);
        if intervals.len() >= MAX_INTERVALS {
            return Err(GssError::QuadratureFailure { error_estimate: worst });
        }
        let score = |e: &[f64; N]| (0..N).map(|i| e[i] / tol[i].max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        let mut idx = 0;
        let mut best = -1.0;
        for (j, iv) in intervals.iter().enumerate() {
            let s = score(&iv.3);
            if s > best {
                best = s;
                idx = j;
            }
        }
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(GssError::QuadratureFailure { error_estimate: worst });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        let [v] = integrate(|x| [x * x * x], 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let [v, w] = integrate(|x| [libm::exp(-x), libm::sin(40.0 * x)], 0.0, 3.0, 1e-13, 1e-300).unwrap();
        assert!((v - (1.0 - libm::exp(-3.0))).abs() < 1e-13);
        assert!((w - (1.0 - libm::cos(120.0)) / 40.0).abs() < 1e-13);
    }
}
