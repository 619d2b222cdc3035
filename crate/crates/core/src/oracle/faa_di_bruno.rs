//! `Phi_nu` from the explicit multivariate Faa di Bruno sum.
//!
//! The coefficient of `eps^nu` in `z(eps)^gamma` is
//! `sum gamma! prod_j z_{l_j}^{k_j} / k_j!` over all `s`, strictly increasing
//! orders `l_1 < ... < l_s` and nonzero `k_j` with `sum_j k_j = gamma` and
//! `sum_j |k_j| l_j = nu`.

use alloc::vec;
use alloc::vec::Vec;

use crate::composition::{CoefficientTensor, Integrand};
use crate::error::{GssError, Result};
use crate::model::{factorial, MultiIndex};
use crate::trajectory::Trajectory;

/// One admissible decomposition: `(l_j, k_j)` pairs.
pub type Decomposition = Vec<(usize, Vec<u32>)>;

/// All elements of `p(nu, gamma)`.
pub fn decompositions(nu: usize, gamma: &MultiIndex) -> Vec<Decomposition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let remaining: Vec<u32> = gamma.exponents().to_vec();
    walk(1, nu, &remaining, &mut current, &mut out);
    out
}

fn walk(l: usize, nu_left: usize, gamma_left: &[u32], current: &mut Decomposition, out: &mut Vec<Decomposition>) {
    let deg_left: usize = gamma_left.iter().map(|&e| e as usize).sum();
    if deg_left == 0 {
        if nu_left == 0 {
            out.push(current.clone());
        }
        return;
    }
    if l > nu_left || deg_left * l > nu_left {
        return;
    }
    // order l unused
    walk(l + 1, nu_left, gamma_left, current, out);
    // order l used with every nonzero k <= gamma_left
    let mut k = vec![0u32; gamma_left.len()];
    loop {
        // increment k as a mixed-radix counter bounded by gamma_left
        let mut pos = 0;
        loop {
            if pos == k.len() {
                return;
            }
            if k[pos] < gamma_left[pos] {
                k[pos] += 1;
                break;
            }
            k[pos] = 0;
            pos += 1;
        }
        let size: usize = k.iter().map(|&e| e as usize).sum();
        if size * l > nu_left {
            continue;
        }
        let rest: Vec<u32> = gamma_left.iter().zip(&k).map(|(g, x)| g - x).collect();
        current.push((l, k.clone()));
        walk(l + 1, nu_left - size * l, &rest, current, out);
        current.pop();
    }
}

/// `[z(eps)^gamma]_nu` over time from the explicit sum.
pub fn monomial_coefficient(coeffs: &CoefficientTensor, gamma: &MultiIndex, nu: usize) -> Vec<f64> {
    let len = coeffs.len();
    let mut out = vec![0.0; len];
    let gfact = gamma.factorial();
    for dec in decompositions(nu, gamma) {
        let mut prod = vec![gfact; len];
        for (l, k) in &dec {
            let kfact: f64 = k.iter().map(|&e| factorial(e as usize)).product();
            for (i, &e) in k.iter().enumerate() {
                let z = coeffs.slice(*l, i);
                for _ in 0..e {
                    for (p, &x) in prod.iter_mut().zip(z) {
                        *p *= x;
                    }
                }
            }
            for p in prod.iter_mut() {
                *p /= kfact;
            }
        }
        for (o, p) in out.iter_mut().zip(&prod) {
            *o += p;
        }
    }
    out
}

/// Reference `Phi_nu` for comparison with the recursive assembly.
pub fn faadibruno_phi(integrand: &Integrand, coeffs: &CoefficientTensor, nu: usize) -> Result<Trajectory> {
    if nu == 0 {
        return Err(GssError::InvalidParameter("orders start at 1".into()));
    }
    if nu == 1 {
        return Ok(integrand.base.clone());
    }
    let degree = integrand.field.max_degree();
    if integrand.dim() > 8 || nu > 6 || degree > 4 {
        return Err(GssError::InstanceTooLarge(alloc::format!(
            "brute-force enumeration limited to state dimension 8, order 6, degree 4 (got {}, {nu}, {degree})",
            integrand.dim()
        )));
    }
    if coeffs.orders_complete() < nu - 1 {
        return Err(GssError::OrderUnavailable { requested: nu - 1, available: coeffs.orders_complete() });
    }
    let dim = integrand.dim();
    let len = coeffs.len();
    let mut out = Trajectory::zeros(dim, len);
    for (m, c) in integrand.field.terms() {
        let h = monomial_coefficient(coeffs, m, nu);
        for (r, &cr) in c.iter().enumerate() {
            for (o, &x) in out.row_mut(r).iter_mut().zip(&h) {
                *o += cr * x;
            }
        }
    }
    for (m, g) in &integrand.state_terms {
        let h = monomial_coefficient(coeffs, m, nu - 1);
        for r in 0..dim {
            let gr = g.row(r).to_vec();
            for ((o, &x), gv) in out.row_mut(r).iter_mut().zip(&h).zip(gr) {
                *o += gv * x;
            }
        }
    }
    Ok(out)
}
