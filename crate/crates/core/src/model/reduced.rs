//! Externally supplied reduced-order models.

use alloc::format;

use nalgebra::DMatrix;

use super::field::PolynomialField;
use super::multi_index::MultiIndex;
use super::system::MechanicalSystem;
use crate::error::{GssError, Result};

/// Reduced dynamics `r' = R(r) + b(t)` on a `d`-dimensional invariant
/// manifold `z = W(r)` of the unforced first-order system.
///
/// `tangent_cols = DW(0)` spans the tangent space at the origin and
/// `tangent_rows` projects full states onto it (`rows * cols = I`). The
/// reduced forcing is the projection of the full forcing by `tangent_rows`.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    reduced_dynamics: PolynomialField,
    parametrization: PolynomialField,
    tangent_rows: DMatrix<f64>,
    tangent_cols: DMatrix<f64>,
}

impl ReducedModel {
    pub fn new(
        reduced_dynamics: PolynomialField,
        parametrization: PolynomialField,
        tangent_rows: DMatrix<f64>,
        tangent_cols: DMatrix<f64>,
    ) -> Result<Self> {
        let d = reduced_dynamics.nvars();
        let full = parametrization.nout();
        if reduced_dynamics.nout() != d || parametrization.nvars() != d {
            return Err(GssError::DimensionMismatch(format!(
                "reduced dynamics R^{} -> R^{}, parametrization R^{} -> R^{}",
                reduced_dynamics.nvars(),
                reduced_dynamics.nout(),
                parametrization.nvars(),
                full
            )));
        }
        if tangent_rows.shape() != (d, full) || tangent_cols.shape() != (full, d) {
            return Err(GssError::DimensionMismatch("tangent projections have the wrong shape".into()));
        }
        let zero = MultiIndex::zeros(d);
        if reduced_dynamics.coefficient(&zero).is_some() || parametrization.coefficient(&zero).is_some() {
            return Err(GssError::InvalidParameter("reduced model must fix the origin (no constant terms)".into()));
        }
        let biorth = (&tangent_rows * &tangent_cols - DMatrix::identity(d, d)).norm();
        if biorth > 1e-8 {
            return Err(GssError::InvalidParameter(format!("tangent_rows * tangent_cols deviates from I by {biorth:.3e}")));
        }
        let dw = parametrization.linear_part();
        if (&dw - &tangent_cols).norm() > 1e-8 * (1.0 + tangent_cols.norm()) {
            return Err(GssError::InvalidParameter("linear part of the parametrization differs from tangent_cols".into()));
        }
        Ok(Self { reduced_dynamics, parametrization, tangent_rows, tangent_cols })
    }

    /// The trivial reduction `W = id`, `R = B^{-1}(A z + F(z))`.
    pub fn identity(system: &MechanicalSystem) -> Self {
        let n2 = 2 * system.n();
        let mut w = PolynomialField::new(n2, n2);
        for i in 0..n2 {
            w.add_scalar_term(MultiIndex::unit(n2, i), i, 1.0).unwrap();
        }
        Self {
            reduced_dynamics: system.state_field(),
            parametrization: w,
            tangent_rows: DMatrix::identity(n2, n2),
            tangent_cols: DMatrix::identity(n2, n2),
        }
    }

    pub fn dim(&self) -> usize {
        self.reduced_dynamics.nvars()
    }

    pub fn full_dim(&self) -> usize {
        self.parametrization.nout()
    }

    pub fn reduced_dynamics(&self) -> &PolynomialField {
        &self.reduced_dynamics
    }

    pub fn parametrization(&self) -> &PolynomialField {
        &self.parametrization
    }

    pub fn tangent_rows(&self) -> &DMatrix<f64> {
        &self.tangent_rows
    }

    pub fn tangent_cols(&self) -> &DMatrix<f64> {
        &self.tangent_cols
    }
}
