//! Vector Pade resummation of the amplitude expansion.
//!
//! Per state coordinate `j` the series `sum_nu z^j_nu(t) Delta^nu` is replaced by
//! `(sum_{nu<=L} a^j_nu(t) Delta^nu) / (1 + sum_{mu<=M} b^j_mu Delta^mu)` with a
//! scalar denominator shared by all time samples. The `b^j` solve the
//! overdetermined system `z^j_nu(t) + sum_mu b^j_mu z^j_{nu-mu}(t) = 0`,
//! `nu = L+1..L+M`, stacked over every sample, in the least-squares sense.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::expansion::GssExpansion;
use crate::composition::CoefficientTensor;
use crate::error::{GssError, Result};
use crate::par;
use crate::trajectory::{TimeGrid, Trajectory};

/// Relative singular-value cutoff of the denominator solve.
pub const PADE_RCOND: f64 = 1e-12;
/// Smallest admissible `|1 + sum b_mu Delta^mu|`.
pub const DENOMINATOR_MIN: f64 = 1e-8;

/// Rows folded into the running triangular factor at a time.
const BLOCK_ROWS: usize = 512;

/// Conditioning of one coordinate's denominator system.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeConditioning {
    /// Singular values of the column-equilibrated system, descending.
    pub singular_values: Vec<f64>,
    /// Truncated-SVD solve was used.
    pub ill_conditioned: bool,
    /// Least-squares residual norm relative to the right-hand side.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct PadeGss {
    pub l: usize,
    pub m: usize,
    /// `numerators[nu - 1]` holds `a_nu` for all coordinates (`dim x T`).
    pub numerators: Vec<Trajectory>,
    /// `denominators[j][mu - 1] = b^j_mu`.
    pub denominators: Vec<Vec<f64>>,
    pub conditioning: Vec<PadeConditioning>,
    pub grid: TimeGrid,
    pub delta_ref: f64,
}

impl PadeGss {
    pub fn dim(&self) -> usize {
        self.denominators.len()
    }

    pub fn any_ill_conditioned(&self) -> bool {
        self.conditioning.iter().any(|c| c.ill_conditioned)
    }

    /// `1 + sum_mu b^j_mu Delta^mu`.
    pub fn denominator(&self, j: usize, delta: f64) -> f64 {
        let mut q = 0.0;
        for &b in self.denominators[j].iter().rev() {
            q = (q + b) * delta;
        }
        1.0 + q
    }

    /// Taylor coefficients of the rational form through order `n`.
    pub fn reexpand(&self, n: usize) -> Vec<Trajectory> {
        let dim = self.dim();
        let len = self.grid.len;
        let mut out: Vec<Trajectory> = Vec::with_capacity(n);
        for nu in 1..=n {
            let mut c = if nu <= self.l { self.numerators[nu - 1].clone() } else { Trajectory::zeros(dim, len) };
            for j in 0..dim {
                let row = c.row_mut(j);
                for mu in 1..=self.m.min(nu - 1) {
                    let b = self.denominators[j][mu - 1];
                    let prev = out[nu - mu - 1].row(j);
                    for (x, &p) in row.iter_mut().zip(prev) {
                        *x -= b * p;
                    }
                }
            }
            out.push(c);
        }
        out
    }
}

/// Fold `rows` (each `[a_1..a_M | rhs]`) into the upper-triangular factor `r`.
fn fold_rows(r: &mut DMatrix<f64>, rows: &DMatrix<f64>) {
    let k = r.ncols();
    let mut stacked = DMatrix::zeros(k + rows.nrows(), k);
    stacked.view_mut((0, 0), (k, k)).copy_from(r);
    stacked.view_mut((k, 0), (rows.nrows(), k)).copy_from(rows);
    let qr = stacked.qr();
    let rr = qr.r();
    r.fill(0.0);
    let h = rr.nrows().min(k);
    r.view_mut((0, 0), (h, k)).copy_from(&rr.view((0, 0), (h, k)));
}

fn solve_coordinate(coeffs: &CoefficientTensor, j: usize, l: usize, m: usize) -> (Vec<f64>, PadeConditioning) {
    let len = coeffs.len();
    let slice = |nu: usize| -> Option<&[f64]> {
        if nu == 0 {
            None
        } else {
            Some(coeffs.slice(nu, j))
        }
    };
    // column scales for equilibration
    let mut scale = vec![0.0f64; m + 1];
    for nu in l + 1..=l + m {
        for mu in 1..=m {
            if let Some(z) = slice(nu.saturating_sub(mu)) {
                scale[mu - 1] += z.iter().map(|v| v * v).sum::<f64>();
            }
        }
        scale[m] += slice(nu).unwrap().iter().map(|v| v * v).sum::<f64>();
    }
    let scale: Vec<f64> = scale.iter().map(|s| if *s > 0.0 { libm::sqrt(*s) } else { 1.0 }).collect();

    let mut r = DMatrix::zeros(m + 1, m + 1);
    let mut block = Vec::with_capacity(BLOCK_ROWS * (m + 1));
    let mut nrows = 0;
    let flush = |r: &mut DMatrix<f64>, block: &mut Vec<f64>, nrows: &mut usize| {
        if *nrows > 0 {
            let rows = DMatrix::from_row_slice(*nrows, m + 1, block);
            fold_rows(r, &rows);
            block.clear();
            *nrows = 0;
        }
    };
    for nu in l + 1..=l + m {
        let target = slice(nu).unwrap();
        for t in 0..len {
            for mu in 1..=m {
                let v = slice(nu.saturating_sub(mu)).map_or(0.0, |z| z[t]);
                block.push(v / scale[mu - 1]);
            }
            block.push(-target[t] / scale[m]);
            nrows += 1;
            if nrows == BLOCK_ROWS {
                flush(&mut r, &mut block, &mut nrows);
            }
        }
    }
    flush(&mut r, &mut block, &mut nrows);

    let a = r.view((0, 0), (m, m)).into_owned();
    let rhs = DVector::from_iterator(m, (0..m).map(|i| r[(i, m)]));
    let svd = a.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    let smax = sv.first().cloned().unwrap_or(0.0);
    let smin = sv.last().cloned().unwrap_or(0.0);
    let ill = !(smin >= PADE_RCOND * smax) || smax == 0.0;
    let y = if smax == 0.0 { DVector::zeros(m) } else { svd.solve(&rhs, PADE_RCOND * smax).unwrap_or_else(|_| DVector::zeros(m)) };
    let b: Vec<f64> = (0..m).map(|i| y[i] * scale[m] / scale[i]).collect();
    let res_tail = r[(m, m)].abs();
    let rhs_norm = libm::sqrt(rhs.norm_squared() + res_tail * res_tail);
    let fitted = (&a * &y - &rhs).norm();
    let residual = if rhs_norm > 0.0 { libm::sqrt(fitted * fitted + res_tail * res_tail) / rhs_norm } else { 0.0 };
    (b, PadeConditioning { singular_values: sv, ill_conditioned: ill, residual })
}

/// `[L/M]` vector Pade approximant from an expansion of order `>= L + M`.
pub fn pade_resum(expansion: &GssExpansion, l: usize, m: usize) -> Result<PadeGss> {
    let coeffs = &expansion.coeffs;
    if l == 0 {
        return Err(GssError::InvalidParameter("numerator order must be at least 1".into()));
    }
    if coeffs.orders_complete() < l + m {
        return Err(GssError::OrderUnavailable { requested: l + m, available: coeffs.orders_complete() });
    }
    let dim = coeffs.dim();
    let solved: Vec<(Vec<f64>, PadeConditioning)> = if m == 0 {
        (0..dim).map(|_| (Vec::new(), PadeConditioning { singular_values: Vec::new(), ill_conditioned: false, residual: 0.0 })).collect()
    } else {
        par::map(dim, |j| solve_coordinate(coeffs, j, l, m))
    };
    let (denominators, conditioning): (Vec<_>, Vec<_>) = solved.into_iter().unzip();

    let len = coeffs.len();
    let mut numerators = Vec::with_capacity(l);
    for nu in 1..=l {
        let mut a = coeffs.order(nu)?.clone();
        for (j, b) in denominators.iter().enumerate() {
            let row = a.row_mut(j);
            for mu in 1..=m.min(nu - 1) {
                let z = coeffs.slice(nu - mu, j);
                let bm = b[mu - 1];
                for (x, &zv) in row.iter_mut().zip(z) {
                    *x += bm * zv;
                }
            }
        }
        debug_assert_eq!(a.len(), len);
        numerators.push(a);
    }
    Ok(PadeGss { l, m, numerators, denominators, conditioning, grid: coeffs.grid(), delta_ref: expansion.delta_ref })
}

/// Rational approximant at forcing amplitude `delta`.
pub fn evaluate_pade(pade: &PadeGss, delta: f64) -> Result<Trajectory> {
    let dim = pade.dim();
    let len = pade.grid.len;
    let mut out = Trajectory::zeros(dim, len);
    for j in 0..dim {
        let q = pade.denominator(j, delta);
        if !(q.abs() >= DENOMINATOR_MIN) {
            return Err(GssError::DenominatorNearZero { value: q.abs(), coordinate: j, delta });
        }
        let row = out.row_mut(j);
        for nu in (1..=pade.l).rev() {
            let a = pade.numerators[nu - 1].row(j);
            for (o, &c) in row.iter_mut().zip(a) {
                *o = (*o + c) * delta;
            }
        }
        for o in row.iter_mut() {
            *o /= q;
        }
    }
    Ok(out)
}
