//! Order-by-order Taylor expansion of the generalized steady state in the forcing amplitude.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::composition::{assemble_phi, CoefficientTensor, CompositionCache, Integrand};
use crate::error::{GssError, Result};
use crate::kernel::{KernelPropagator, LinearPropagator, NewmarkPropagator};
use crate::model::{ForcingSignal, MechanicalSystem};
use crate::spectral::{decompose, select_modes};
use crate::trajectory::{TimeGrid, Trajectory};

/// Linear solver used for each order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Exponential kernel with piecewise-linear inhomogeneity.
    #[default]
    Kernel,
    /// Average-acceleration Newmark on the linear part.
    Newmark,
}

/// Provenance of the coefficients of an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendTag {
    AnalyticKernel,
    Newmark,
    Quasiperiodic,
}

impl BackendTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendTag::AnalyticKernel => "analytic-kernel",
            BackendTag::Newmark => "newmark",
            BackendTag::Quasiperiodic => "quasiperiodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic-kernel" => Some(BackendTag::AnalyticKernel),
            "newmark" => Some(BackendTag::Newmark),
            "quasiperiodic" => Some(BackendTag::Quasiperiodic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GssOptions {
    pub backend: Backend,
    /// Modes with one-step decay factor `exp(dt Re lambda) <= eps_trunc` are dropped.
    pub eps_trunc: f64,
    /// Expand in the amplitude of the unit-supremum forcing `g / Delta`.
    pub normalize: bool,
    pub use_cache: bool,
}

impl Default for GssOptions {
    fn default() -> Self {
        Self { backend: Backend::Kernel, eps_trunc: 1e-3, normalize: true, use_cache: true }
    }
}

/// Partial sums grew by more than `DIVERGENCE_GROWTH` between orders `N/2` and `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceWarning {
    pub half_order: usize,
    pub sup_half: f64,
    pub sup_full: f64,
}

pub const DIVERGENCE_GROWTH: f64 = 10.0;

/// Coefficients `z_nu(t)` of `z(t) = sum_nu z_nu(t) Delta^nu`.
#[derive(Debug, Clone)]
pub struct GssExpansion {
    pub coeffs: CoefficientTensor,
    /// Amplitude of the forcing the expansion was built from.
    pub delta_ref: f64,
    pub backend: BackendTag,
    pub pad: usize,
    pub retained_modes: usize,
    pub eigenvalues: Vec<Complex64>,
    pub divergence: Option<DivergenceWarning>,
}

impl GssExpansion {
    pub fn order(&self) -> usize {
        self.coeffs.orders_complete()
    }

    pub fn grid(&self) -> TimeGrid {
        self.coeffs.grid()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    /// `sum_nu z_nu Delta^nu` over all computed orders.
    pub fn evaluate_at_amplitude(&self, delta: f64) -> Trajectory {
        self.coeffs.partial_sum(self.order(), delta).expect("all orders present")
    }

    /// Partial sum through order `n`.
    pub fn partial_sum(&self, n: usize, delta: f64) -> Result<Trajectory> {
        self.coeffs.partial_sum(n, delta)
    }

    /// `max_t |sum_{nu <= k} z_nu Delta^nu|` for `k = 1..=N`.
    pub fn partial_sum_sups(&self, delta: f64) -> Vec<f64> {
        (1..=self.order()).map(|k| self.coeffs.partial_sum(k, delta).unwrap().sup_norm()).collect()
    }
}

/// Growth check of the partial sums at `delta`.
pub fn divergence_check(coeffs: &CoefficientTensor, delta: f64) -> Option<DivergenceWarning> {
    let n = coeffs.orders_complete();
    if n < 2 {
        return None;
    }
    let half = (n / 2).max(1);
    let sup_half = coeffs.partial_sum(half, delta).ok()?.sup_norm();
    let sup_full = coeffs.partial_sum(n, delta).ok()?.sup_norm();
    if sup_full > DIVERGENCE_GROWTH * sup_half {
        Some(DivergenceWarning { half_order: half, sup_half, sup_full })
    } else {
        None
    }
}

/// Solve `z_nu = L^{-1} Phi_nu` for `nu = 1..=order`.
pub fn expand_integrand(
    integrand: &Integrand,
    propagator: &dyn LinearPropagator,
    grid: TimeGrid,
    order: usize,
    cache: &mut CompositionCache,
) -> Result<CoefficientTensor> {
    if order == 0 {
        return Err(GssError::InvalidParameter("expansion order must be at least 1".into()));
    }
    if integrand.base.len() != grid.len {
        return Err(GssError::GridMismatch("forcing samples do not match the grid".into()));
    }
    let dim = integrand.dim();
    let mut coeffs = CoefficientTensor::new(dim, grid, order);
    for nu in 1..=order {
        let phi = assemble_phi(integrand, &coeffs, nu, cache)?;
        let z = if phi.data().iter().all(|&v| v == 0.0) {
            Trajectory::zeros(dim, grid.len)
        } else {
            propagator.propagate(&phi)?
        };
        if !z.all_finite() {
            return Err(GssError::NonFinite("expansion coefficient"));
        }
        coeffs.push_order(z)?;
    }
    Ok(coeffs)
}

/// Taylor coefficients of the generalized steady state through `order`.
pub fn compute_taylor_gss(
    system: &MechanicalSystem,
    forcing: &ForcingSignal,
    order: usize,
    options: &GssOptions,
) -> Result<GssExpansion> {
    if order == 0 {
        return Err(GssError::InvalidParameter("expansion order must be at least 1".into()));
    }
    if !(options.eps_trunc >= 0.0 && options.eps_trunc < 1.0) {
        return Err(GssError::InvalidParameter(alloc::format!("eps_trunc must lie in [0, 1), got {}", options.eps_trunc)));
    }
    let spectral = decompose(system)?;
    let eigenvalues = spectral.eigenvalues();
    let delta_ref = forcing.max_magnitude();
    let (scaled, delta_ref) = if options.normalize && delta_ref > 0.0 {
        (forcing.normalized(), delta_ref)
    } else {
        (forcing.clone(), 1.0)
    };
    let integrand = Integrand::mechanical(system, &scaled)?;
    let grid = forcing.grid();
    let mut cache = if options.use_cache { CompositionCache::new() } else { CompositionCache::disabled() };

    let (coeffs, tag, retained) = match options.backend {
        Backend::Kernel => {
            let retained = select_modes(&spectral, grid.dt, options.eps_trunc);
            let count = retained.len();
            let prop = KernelPropagator::new(spectral.with_retained(retained), grid.dt);
            (expand_integrand(&integrand, &prop, grid, order, &mut cache)?, BackendTag::AnalyticKernel, count)
        }
        Backend::Newmark => {
            let prop = NewmarkPropagator::new(system, grid.dt)?;
            (expand_integrand(&integrand, &prop, grid, order, &mut cache)?, BackendTag::Newmark, spectral.mode_count())
        }
    };
    let divergence = divergence_check(&coeffs, delta_ref);
    Ok(GssExpansion { coeffs, delta_ref, backend: tag, pad: forcing.pad(), retained_modes: retained, eigenvalues, divergence })
}
