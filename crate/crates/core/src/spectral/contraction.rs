//! Sufficient conditions for the Picard map to contract on a ball.

use alloc::vec;
use alloc::vec::Vec;

use super::{decompose_general, SpectralData};
use crate::error::Result;
use crate::linalg::spectral_norm;
use crate::model::{ForcingSignal, MechanicalSystem, PolynomialField};

/// Outcome of the contraction check on the ball `|z| <= delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub delta: f64,
    /// Sampled maximum of `|DF|_2` over the ball (an estimate).
    pub lipschitz_f: f64,
    /// Analytic bound `sum_m |m| |F_m| delta^{|m|-1}`.
    pub lipschitz_f_bound: f64,
    pub lipschitz_g: f64,
    /// Sampled maximum of `|F|` over the ball.
    pub sup_f: f64,
    pub gamma: f64,
    /// `|V|_2 |Psi|_2`.
    pub vnorm_product: f64,
    /// `a = 2 |V||Psi| Gamma (L^F + L^G)`.
    pub contraction_factor: f64,
    /// Largest forcing magnitude allowed by the ball condition.
    pub admissible_delta_bound: f64,
    pub forcing_delta: f64,
    pub satisfied: bool,
    /// Stricter variant `4 (L^F + L^G) |V||Psi| Gamma <= 1`.
    pub strict_factor: f64,
    pub strict_admissible_delta_bound: f64,
    pub strict_satisfied: bool,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Halton points mapped into the ball of radius `delta` (points outside the
/// unit ball are projected onto its boundary), followed by `±delta e_i`.
pub fn ball_samples(dim: usize, delta: f64, count: usize) -> Vec<Vec<f64>> {
    let bases = primes(dim);
    let mut pts = Vec::with_capacity(count + 2 * dim);
    for k in 1..=count as u64 {
        let mut p: Vec<f64> = bases.iter().map(|&b| 2.0 * radical_inverse(k, b) - 1.0).collect();
        let norm = libm::sqrt(p.iter().map(|x| x * x).sum::<f64>());
        let s = if norm > 1.0 { delta / norm } else { delta };
        p.iter_mut().for_each(|x| *x *= s);
        pts.push(p);
    }
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut p = vec![0.0; dim];
            p[i] = sign * delta;
            pts.push(p);
        }
    }
    pts
}

fn sampled_lipschitz(field: &PolynomialField, pts: &[Vec<f64>]) -> (f64, f64) {
    let mut lip = 0.0f64;
    let mut sup = 0.0f64;
    for p in pts {
        lip = lip.max(spectral_norm(&field.jacobian(p)));
        let v = field.evaluate(p);
        sup = sup.max(libm::sqrt(v.iter().map(|x| x * x).sum::<f64>()));
    }
    (lip, sup)
}

/// Check both contraction inequalities for time-only forcing of size `forcing_delta`.
pub fn check_contraction(
    system: &MechanicalSystem,
    spectral: &SpectralData,
    delta: f64,
    forcing_delta: f64,
    sample_count: usize,
) -> Result<ContractionReport> {
    check_contraction_with_forcing(system, spectral, delta, forcing_delta, sample_count, None)
}

/// As [`check_contraction`], with `L^G` taken from the state-dependent
/// terms of `forcing` (bounded analytically over time and the ball).
pub fn check_contraction_with_forcing(
    system: &MechanicalSystem,
    spectral: &SpectralData,
    delta: f64,
    forcing_delta: f64,
    sample_count: usize,
    forcing: Option<&ForcingSignal>,
) -> Result<ContractionReport> {
    let general;
    let modes = match spectral.general() {
        Some(_) => spectral,
        None => {
            general = decompose_general(system)?;
            &general
        }
    };
    let vnorm_product = modes.mode_norm_product();
    let gamma = modes.gamma;

    let field = system.first_order_field();
    let pts = ball_samples(field.nvars(), delta, sample_count);
    let (lipschitz_f, sup_f) = sampled_lipschitz(&field, &pts);
    let lipschitz_f_bound = field.lipschitz_bound(delta);

    let mut lipschitz_g = 0.0;
    if let Some(f) = forcing {
        for term in f.state_terms() {
            let sup_t = term.values.sup_norm();
            let m = term.index.degree();
            lipschitz_g += m as f64 * sup_t * libm::pow(delta, (m - 1) as f64);
        }
    }

    let lip = lipschitz_f + lipschitz_g;
    let kg = vnorm_product * gamma;
    let contraction_factor = 2.0 * kg * lip;
    let admissible_delta_bound = delta * (1.0 / kg - 2.0 * lip) - sup_f;
    let satisfied = contraction_factor < 1.0 && forcing_delta <= admissible_delta_bound;
    let strict_factor = 4.0 * kg * lip;
    let strict_admissible_delta_bound = delta / (2.0 * kg) - sup_f;
    let strict_satisfied = strict_factor <= 1.0 && forcing_delta <= strict_admissible_delta_bound;

    Ok(ContractionReport {
        delta,
        lipschitz_f,
        lipschitz_f_bound,
        lipschitz_g,
        sup_f,
        gamma,
        vnorm_product,
        contraction_factor,
        admissible_delta_bound,
        forcing_delta,
        satisfied,
        strict_factor,
        strict_admissible_delta_bound,
        strict_satisfied,
    })
}
