//! Steady states of reduced models on slow spectral subspaces, lifted back to the full state.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::expansion::{expand_integrand, GssOptions};
use crate::composition::{CompositionCache, Integrand};
use crate::error::{GssError, Result};
use crate::kernel::{compute_kernel_weights, propagate, KernelPropagator};
use crate::model::{ForcingSignal, MechanicalSystem, MultiIndex, PolynomialField, ReducedModel};
use crate::par;
use crate::spectral::{decompose_first_order, select_modes, SpectralData, SpectralKind};
use crate::trajectory::Trajectory;

type Poly = BTreeMap<MultiIndex, f64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let e: Vec<u32> = ma.exponents().iter().zip(mb.exponents()).map(|(x, y)| x + y).collect();
            *out.entry(MultiIndex::new(e)).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// `F(C r)` for a linear substitution `z = C r`.
pub fn substitute_linear(field: &PolynomialField, c: &DMatrix<f64>) -> Result<PolynomialField> {
    if c.nrows() != field.nvars() {
        return Err(GssError::DimensionMismatch(format!(
            "substitution has {} rows, field has {} variables",
            c.nrows(),
            field.nvars()
        )));
    }
    let d = c.ncols();
    let linear: Vec<Poly> = (0..c.nrows())
        .map(|i| (0..d).filter(|&j| c[(i, j)] != 0.0).map(|j| (MultiIndex::unit(d, j), c[(i, j)])).collect())
        .collect();
    let mut out = PolynomialField::new(d, field.nout());
    for (m, coeff) in field.terms() {
        let mut p = Poly::new();
        p.insert(MultiIndex::zeros(d), 1.0);
        for (i, &e) in m.exponents().iter().enumerate() {
            for _ in 0..e {
                p = poly_mul(&p, &linear[i]);
            }
        }
        for (mi, s) in p {
            if s != 0.0 {
                let v: Vec<f64> = coeff.iter().map(|x| x * s).collect();
                out.add_term(mi, &v)?;
            }
        }
    }
    Ok(out)
}

/// Real basis of the modal subspace of `modes` (general decomposition):
/// `(rows, cols)` with `rows * cols = I`, `cols` spanning the subspace and
/// `rows` the matching projection `Re/Im(Psi B z)`.
pub fn real_modal_basis(spectral: &SpectralData, b: &DMatrix<f64>, modes: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let g = spectral.general().ok_or(GssError::InvalidParameter("a general decomposition is required".into()))?;
    let dim = spectral.state_dim;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; g.eigenvalues.len()];
    for &j in modes {
        if used[j] {
            continue;
        }
        used[j] = true;
        let lambda = g.eigenvalues[j];
        let psi_b: Vec<_> = (0..dim).map(|c| (0..dim).map(|i| g.projector[(j, i)] * b[(i, c)]).sum()).collect::<Vec<num_complex::Complex64>>();
        if lambda.im == 0.0 {
            rows.push(psi_b.iter().map(|v| v.re).collect());
            cols.push((0..dim).map(|i| g.vectors[(i, j)].re).collect());
        } else {
            // the conjugate partner must be selected too
            let partner = (0..g.eigenvalues.len())
                .find(|&k| k != j && g.eigenvalues[k] == lambda.conj())
                .ok_or(GssError::InvalidParameter("complex mode without conjugate partner".into()))?;
            if !modes.contains(&partner) {
                return Err(GssError::InvalidParameter(format!("mode {j} selected without its conjugate {partner}")));
            }
            used[partner] = true;
            rows.push(psi_b.iter().map(|v| v.re).collect());
            rows.push(psi_b.iter().map(|v| v.im).collect());
            cols.push((0..dim).map(|i| 2.0 * g.vectors[(i, j)].re).collect());
            cols.push((0..dim).map(|i| -2.0 * g.vectors[(i, j)].im).collect());
        }
    }
    let d = rows.len();
    let r = DMatrix::from_fn(d, dim, |a, c| rows[a][c]);
    let c = DMatrix::from_fn(dim, d, |a, k| cols[k][a]);
    Ok((r, c))
}

/// Linear-tangent reduction onto the modes `modes` of a general decomposition:
/// `W(r) = P r`, `R(r) = P^* B^{-1}(A P r + F(P r))`.
pub fn spectral_subspace_model(system: &MechanicalSystem, spectral: &SpectralData, modes: &[usize]) -> Result<ReducedModel> {
    let (rows, cols) = real_modal_basis(spectral, &system.first_order_b(), modes)?;
    let rhs = substitute_linear(&system.state_field(), &cols)?;
    let reduced = rhs.left_multiply(&rows);
    let d = cols.ncols();
    let mut w = PolynomialField::new(d, cols.nrows());
    for j in 0..d {
        let col: Vec<f64> = cols.column(j).iter().cloned().collect();
        w.add_term(MultiIndex::unit(d, j), &col)?;
    }
    // drop round-off terms of exactly cancelled coefficients
    let cleaned = PolynomialField::from_terms(
        d,
        d,
        reduced.terms().filter(|(_, c)| c.iter().any(|&v| v != 0.0)).map(|(m, c)| (m.clone(), c.clone())),
    )?;
    ReducedModel::new(cleaned, w, rows, cols)
}

fn lift_force_block(n: usize, g: &Trajectory) -> Trajectory {
    let mut out = Trajectory::zeros(2 * n, g.len());
    for i in 0..n {
        out.row_mut(i).copy_from_slice(g.row(i));
    }
    out
}

/// Reduced steady state lifted through `W`, plus the linear response of the
/// complement modes (those not in `spectral.retained`) to the forcing.
pub fn reduced_gss(
    system: &MechanicalSystem,
    model: &ReducedModel,
    spectral: &SpectralData,
    forcing: &ForcingSignal,
    order: usize,
    options: &GssOptions,
) -> Result<Trajectory> {
    let n = system.n();
    let d = model.dim();
    if model.full_dim() != 2 * n || forcing.n_dofs() != n || spectral.state_dim != 2 * n {
        return Err(GssError::DimensionMismatch("reduced model, system and forcing dimensions differ".into()));
    }
    let slow_dim = match &spectral.kind {
        SpectralKind::General(_) => spectral.retained.len(),
        SpectralKind::Structural(_) => 2 * spectral.retained.len(),
    };
    if slow_dim != d {
        return Err(GssError::DimensionMismatch(format!(
            "reduced model has dimension {d}, the retained spectral subspace has {slow_dim}"
        )));
    }
    if !forcing.state_terms().is_empty() {
        return Err(GssError::InvalidParameter("reduced models accept state-independent forcing only".into()));
    }
    let delta = forcing.max_magnitude();
    let unit = if options.normalize && delta > 0.0 { forcing.normalized() } else { forcing.clone() };
    let delta_eval = if options.normalize && delta > 0.0 { delta } else { 1.0 };
    let len = forcing.len();
    let grid = forcing.grid();

    // reduced forcing rows * (0, M^{-1} g)
    let rows = model.tangent_rows();
    let mut base = Trajectory::zeros(d, len);
    let g = unit.values();
    let acc: Vec<Vec<f64>> = par::map(len, |k| system.mass_solve(&g.column(k)));
    for (k, a) in acc.iter().enumerate() {
        for r in 0..d {
            let v: f64 = (0..n).map(|i| rows[(r, n + i)] * a[i]).sum();
            base.set(r, k, v);
        }
    }
    let a_red = model.reduced_dynamics().linear_part();
    let field = model.reduced_dynamics().degree_range(2, usize::MAX);
    let rspec = decompose_first_order(&a_red, None)?;
    let keep = select_modes(&rspec, grid.dt, options.eps_trunc);
    let prop = KernelPropagator::new(rspec.with_retained(keep), grid.dt);
    let integrand = Integrand { field, base, state_terms: Vec::new() };
    let mut cache = if options.use_cache { CompositionCache::new() } else { CompositionCache::disabled() };
    let coeffs = expand_integrand(&integrand, &prop, grid, order, &mut cache)?;
    let r = coeffs.partial_sum(order, delta_eval)?;

    let w = model.parametrization();
    let lifted: Vec<Vec<f64>> = par::map(len, |k| w.evaluate(&r.column(k)));
    let mut out = Trajectory::zeros(2 * n, len);
    for (k, z) in lifted.iter().enumerate() {
        out.set_column(k, z);
    }

    let complement = spectral.complement();
    if !complement.is_empty() {
        let fast = spectral.with_retained(complement);
        let weights = compute_kernel_weights(&fast, grid.dt);
        let corr = propagate(&fast, &weights, &lift_force_block(n, forcing.values()))?;
        out.axpy(1.0, &corr);
    }
    Ok(out)
}
