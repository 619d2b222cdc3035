//! Order-`nu` inhomogeneity `Phi_nu` from lower-order coefficients.
//!
//! `H_{gamma,nu}` is the coefficient of `eps^nu` in `z(eps)^gamma` with
//! `z(eps) = sum_mu z_mu eps^mu`. Splitting `z^gamma = z_i z^{gamma - e_i}` at the
//! first nonzero coordinate `i` gives
//! `H_{gamma,nu} = sum_{mu=1}^{nu-1} z_{mu,i} H_{gamma-e_i, nu-mu}`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use super::tensor::CoefficientTensor;
use crate::error::{GssError, Result};
use crate::model::{ForcingSignal, MechanicalSystem, MultiIndex, PolynomialField};
use crate::par;
use crate::trajectory::Trajectory;

/// Ingredients of `Phi`: the field `F` (B-form, `dim -> dim`), the
/// state-independent forcing `G_0(t)` and parametric terms `G_m(t) z^m`.
#[derive(Debug, Clone)]
pub struct Integrand {
    pub field: PolynomialField,
    pub base: Trajectory,
    pub state_terms: Vec<(MultiIndex, Trajectory)>,
}

impl Integrand {
    /// `F = (-f, 0)`, `G_0 = (g, 0)`, `G_m = (g_m, 0)` for a mechanical system.
    pub fn mechanical(system: &MechanicalSystem, forcing: &ForcingSignal) -> Result<Self> {
        let n = system.n();
        if forcing.n_dofs() != n {
            return Err(GssError::DimensionMismatch(format!(
                "forcing has {} columns, system has {n} degrees of freedom",
                forcing.n_dofs()
            )));
        }
        let lift = |t: &Trajectory| {
            let mut out = Trajectory::zeros(2 * n, t.len());
            for i in 0..n {
                out.row_mut(i).copy_from_slice(t.row(i));
            }
            out
        };
        Ok(Self {
            field: system.first_order_field(),
            base: lift(forcing.values()),
            state_terms: forcing.state_terms().iter().map(|s| (s.index.clone(), lift(&s.values))).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.field.nout()
    }

    /// Multi-indices whose `H` values are kept between orders: every parent
    /// of a needed index, plus the parametric-term indices.
    fn stored_indices(&self) -> Vec<MultiIndex> {
        let mut needed: BTreeSet<MultiIndex> = BTreeSet::new();
        let mut stack: Vec<MultiIndex> = self.field.terms().map(|(m, _)| m.clone()).collect();
        stack.extend(self.state_terms.iter().map(|(m, _)| m.clone()));
        let mut keep: BTreeSet<MultiIndex> = self.state_terms.iter().map(|(m, _)| m.clone()).collect();
        while let Some(m) = stack.pop() {
            if !needed.insert(m.clone()) {
                continue;
            }
            if let Some((_, p)) = m.parent() {
                if p.degree() >= 2 {
                    keep.insert(p.clone());
                }
                stack.push(p);
            }
        }
        let mut out: Vec<MultiIndex> = keep.into_iter().filter(|m| m.degree() >= 2).collect();
        out.sort_by(|a, b| a.graded_cmp(b));
        out
    }
}

/// Memo of `H_{gamma,nu}` values, tied to one coefficient tensor.
#[derive(Debug)]
pub struct CompositionCache {
    enabled: bool,
    tensor_id: Option<u64>,
    levels_done: usize,
    store: BTreeMap<MultiIndex, Vec<Vec<f64>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl Default for CompositionCache {
    fn default() -> Self {
        Self::new()
    }
}

impl CompositionCache {
    pub fn new() -> Self {
        Self {
            enabled: true,
            tensor_id: None,
            levels_done: 1,
            store: BTreeMap::new(),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// A cache that never stores; every `H` is recomputed recursively.
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::new() }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Number of stored `H` slices.
    pub fn stored_slices(&self) -> usize {
        self.store.values().map(|v| v.iter().filter(|s| !s.is_empty()).count()).sum()
    }

    fn bind(&mut self, coeffs: &CoefficientTensor) {
        if self.tensor_id != Some(coeffs.id()) {
            self.store.clear();
            self.levels_done = 1;
            self.tensor_id = Some(coeffs.id());
        }
    }

    fn lookup(&self, gamma: &MultiIndex, nu: usize) -> Option<&Vec<f64>> {
        if !self.enabled {
            return None;
        }
        let v = self.store.get(gamma)?.get(nu)?;
        if v.is_empty() {
            None
        } else {
            Some(v)
        }
    }

    /// Store `H_{gamma,nu}` for all `gamma` in `stored` and `nu <= target`.
    fn fill(&mut self, coeffs: &CoefficientTensor, stored: &[MultiIndex], target: usize) {
        if !self.enabled {
            return;
        }
        self.bind(coeffs);
        while self.levels_done < target {
            let nu = self.levels_done + 1;
            let this: &CompositionCache = self;
            let values: Vec<Vec<f64>> = par::map(stored.len(), |g| h_value(coeffs, &stored[g], nu, Some(this)));
            for (g, v) in stored.iter().zip(values) {
                let slot = self.store.entry(g.clone()).or_default();
                if slot.len() <= nu {
                    slot.resize(nu + 1, Vec::new());
                }
                if g.degree() <= nu {
                    slot[nu] = v;
                }
            }
            self.levels_done = nu;
        }
    }
}

fn h_value(coeffs: &CoefficientTensor, gamma: &MultiIndex, nu: usize, cache: Option<&CompositionCache>) -> Vec<f64> {
    let len = coeffs.len();
    let d = gamma.degree();
    if d == 0 || d > nu {
        return vec![if d == 0 && nu == 0 { 1.0 } else { 0.0 }; len];
    }
    if d == 1 {
        let i = gamma.first_nonzero().unwrap();
        return coeffs.slice(nu, i).to_vec();
    }
    if let Some(c) = cache {
        if let Some(v) = c.lookup(gamma, nu) {
            c.hits.fetch_add(1, Ordering::Relaxed);
            return v.clone();
        }
        c.misses.fetch_add(1, Ordering::Relaxed);
    }
    let (i, parent) = gamma.parent().unwrap();
    let pd = parent.degree();
    let pi = parent.first_nonzero().unwrap();
    let mut out = vec![0.0; len];
    for mu in 1..=nu - pd {
        let z = coeffs.slice(mu, i);
        let owned;
        let h: &[f64] = if pd == 1 {
            coeffs.slice(nu - mu, pi)
        } else if let Some(v) = cache.and_then(|c| c.lookup(&parent, nu - mu)) {
            cache.unwrap().hits.fetch_add(1, Ordering::Relaxed);
            v
        } else {
            owned = h_value(coeffs, &parent, nu - mu, cache);
            &owned
        };
        for ((o, &a), &b) in out.iter_mut().zip(z).zip(h) {
            *o += a * b;
        }
    }
    out
}

/// `H_{gamma,nu}`; needs orders `< nu` (order `nu` itself when `|gamma| = 1`).
pub fn assemble_h(
    coeffs: &CoefficientTensor,
    gamma: &MultiIndex,
    nu: usize,
    cache: &mut CompositionCache,
) -> Result<Vec<f64>> {
    let need = if gamma.degree() == 1 { nu } else { nu.saturating_sub(1) };
    if coeffs.orders_complete() < need {
        return Err(GssError::OrderUnavailable { requested: need, available: coeffs.orders_complete() });
    }
    if gamma.nvars() != coeffs.dim() {
        return Err(GssError::DimensionMismatch(format!("multi-index {gamma} does not match state dimension {}", coeffs.dim())));
    }
    if cache.enabled {
        cache.bind(coeffs);
    }
    let c: &CompositionCache = cache;
    Ok(h_value(coeffs, gamma, nu, if c.enabled { Some(c) } else { None }))
}

/// `Phi_1 = G_0`; for `nu > 1`,
/// `Phi_nu = sum_m F_m H_{m,nu} + sum_m G_m(t) H_{m,nu-1}`.
pub fn assemble_phi(
    integrand: &Integrand,
    coeffs: &CoefficientTensor,
    nu: usize,
    cache: &mut CompositionCache,
) -> Result<Trajectory> {
    if nu == 0 {
        return Err(GssError::InvalidParameter("orders start at 1".into()));
    }
    if coeffs.dim() != integrand.dim() || coeffs.len() != integrand.base.len() {
        return Err(GssError::GridMismatch("coefficient tensor does not match the integrand".into()));
    }
    if nu == 1 {
        return Ok(integrand.base.clone());
    }
    if coeffs.orders_complete() < nu - 1 {
        return Err(GssError::OrderUnavailable { requested: nu - 1, available: coeffs.orders_complete() });
    }
    let stored = integrand.stored_indices();
    if cache.enabled {
        cache.fill(coeffs, &stored, nu);
    }
    let cache: &CompositionCache = cache;
    let cref = if cache.enabled { Some(cache) } else { None };

    let terms: Vec<(&MultiIndex, &Vec<f64>)> = integrand.field.terms().collect();
    let h_terms: Vec<Vec<f64>> = par::map(terms.len(), |t| h_value(coeffs, terms[t].0, nu, cref));
    let h_state: Vec<Vec<f64>> =
        par::map(integrand.state_terms.len(), |t| h_value(coeffs, &integrand.state_terms[t].0, nu - 1, cref));

    let dim = integrand.dim();
    let len = coeffs.len();
    let rows: Vec<Vec<f64>> = par::map(dim, |r| {
        let mut acc = vec![0.0; len];
        for ((_, c), h) in terms.iter().zip(&h_terms) {
            let cr = c[r];
            if cr != 0.0 {
                for (a, &x) in acc.iter_mut().zip(h) {
                    *a += cr * x;
                }
            }
        }
        for ((_, g), h) in integrand.state_terms.iter().zip(&h_state) {
            for ((a, &gv), &x) in acc.iter_mut().zip(g.row(r)).zip(h) {
                *a += gv * x;
            }
        }
        acc
    });
    let mut out = Trajectory::zeros(dim, len);
    for (r, row) in rows.into_iter().enumerate() {
        out.row_mut(r).copy_from_slice(&row);
    }
    Ok(out)
}
