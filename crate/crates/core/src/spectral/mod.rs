//! Linear spectral data: eigenvalues, modes, projections, truncation and
//! the contraction check.

mod contraction;
mod eigen;

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub use contraction::{check_contraction, ContractionReport};
pub use eigen::real_eigen;

use crate::error::{GssError, Result};
use crate::linalg::{condition_c, spectral_norm_c, to_complex};
use crate::model::{DampingClass, MechanicalSystem};

/// Largest acceptable condition number of the eigenvector matrix.
pub const MAX_MODE_CONDITION: f64 = 1e12;

/// Complex modes of a first-order system `B z' = A z`.
///
/// `projector` is `Psi = (B V)^{-1}`; row `j` extracts the modal coordinate of
/// mode `j` from `B`-weighted data, and `Psi B V = I`.
#[derive(Debug, Clone)]
pub struct GeneralModes {
    pub eigenvalues: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub projector: DMatrix<Complex64>,
    /// `|Psi B V - I|_F`.
    pub normalization_residual: f64,
}

/// Real second-order modes of a proportionally damped system.
#[derive(Debug, Clone)]
pub struct StructuralModes {
    pub omega: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Mass-normalized mode shapes as columns (`U^T M U = I`).
    pub shapes: DMatrix<f64>,
    pub mass_coeff: f64,
    pub stiffness_coeff: f64,
}

impl StructuralModes {
    /// The two first-order eigenvalues of oscillator `j`, slow one first.
    pub fn eigenvalue_pair(&self, j: usize) -> (Complex64, Complex64) {
        let (w, z) = (self.omega[j], self.zeta[j]);
        if z < 1.0 {
            let wd = w * libm::sqrt(1.0 - z * z);
            (Complex64::new(-z * w, wd), Complex64::new(-z * w, -wd))
        } else {
            let s = libm::sqrt(z * z - 1.0);
            // slow root written without cancellation: -w / (z + s)
            (Complex64::new(-w / (z + s), 0.0), Complex64::new(-(z + s) * w, 0.0))
        }
    }
}

#[derive(Debug, Clone)]
pub enum SpectralKind {
    General(GeneralModes),
    Structural(StructuralModes),
}

/// Spectral decomposition plus the retained-mode set.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub kind: SpectralKind,
    /// Retained mode indices (general: eigenvalue index; structural: oscillator index).
    pub retained: Vec<usize>,
    /// `max_j 1 / |Re lambda_j|` over all modes.
    pub gamma: f64,
    /// State dimension.
    pub state_dim: usize,
}

impl SpectralData {
    pub fn mode_count(&self) -> usize {
        match &self.kind {
            SpectralKind::General(g) => g.eigenvalues.len(),
            SpectralKind::Structural(s) => s.omega.len(),
        }
    }

    /// Slowest decay rate `-max Re lambda` of each mode.
    pub fn decay_rates(&self) -> Vec<f64> {
        match &self.kind {
            SpectralKind::General(g) => g.eigenvalues.iter().map(|l| -l.re).collect(),
            SpectralKind::Structural(s) => (0..s.omega.len()).map(|j| -s.eigenvalue_pair(j).0.re).collect(),
        }
    }

    /// All first-order eigenvalues.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        match &self.kind {
            SpectralKind::General(g) => g.eigenvalues.clone(),
            SpectralKind::Structural(s) => {
                let mut out = Vec::with_capacity(2 * s.omega.len());
                for j in 0..s.omega.len() {
                    let (a, b) = s.eigenvalue_pair(j);
                    out.push(a);
                    out.push(b);
                }
                out
            }
        }
    }

    pub fn is_structural(&self) -> bool {
        matches!(self.kind, SpectralKind::Structural(_))
    }

    pub fn general(&self) -> Option<&GeneralModes> {
        match &self.kind {
            SpectralKind::General(g) => Some(g),
            _ => None,
        }
    }

    pub fn structural(&self) -> Option<&StructuralModes> {
        match &self.kind {
            SpectralKind::Structural(s) => Some(s),
            _ => None,
        }
    }

    pub fn with_retained(&self, retained: Vec<usize>) -> Self {
        let mut s = self.clone();
        s.retained = retained;
        s
    }

    /// Complement of the retained set.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.mode_count()).filter(|j| !self.retained.contains(j)).collect()
    }

    /// `|V|_2 |Psi|_2` for general modes; for structural modes the same
    /// product of the equivalent first-order modal matrices.
    pub fn mode_norm_product(&self) -> f64 {
        match &self.kind {
            SpectralKind::General(g) => spectral_norm_c(&g.vectors) * spectral_norm_c(&g.projector),
            SpectralKind::Structural(_) => f64::NAN,
        }
    }
}

fn gamma_of(rates: &[f64]) -> f64 {
    rates.iter().map(|r| 1.0 / r.abs()).fold(0.0, f64::max)
}

/// Modes of `B z' = A z` from `A_hat = B^{-1} A`; `b = None` means `B = I`.
pub fn decompose_first_order(a_hat: &DMatrix<f64>, b: Option<&DMatrix<f64>>) -> Result<SpectralData> {
    let n = a_hat.nrows();
    let (vals, vecs) = real_eigen(a_hat)?;
    if let Some(l) = vals.first() {
        if l.re >= -1e-12 * a_hat.norm().max(1.0) {
            return Err(GssError::UnstableLinearPart { real_part: l.re });
        }
    }
    let condition = condition_c(&vecs);
    if !(condition <= MAX_MODE_CONDITION) {
        return Err(GssError::DefectiveSpectrum { condition });
    }
    let bv = match b {
        Some(b) => to_complex(b) * &vecs,
        None => vecs.clone(),
    };
    let projector = bv.clone().lu().try_inverse().ok_or(GssError::DefectiveSpectrum { condition: f64::INFINITY })?;
    let normalization_residual = (&projector * &bv - DMatrix::<Complex64>::identity(n, n)).norm();
    let rates: Vec<f64> = vals.iter().map(|l| -l.re).collect();
    Ok(SpectralData {
        gamma: gamma_of(&rates),
        retained: (0..n).collect(),
        state_dim: n,
        kind: SpectralKind::General(GeneralModes { eigenvalues: vals, vectors: vecs, projector, normalization_residual }),
    })
}

/// General (complex) modes of the first-order form of a mechanical system.
pub fn decompose_general(system: &MechanicalSystem) -> Result<SpectralData> {
    decompose_first_order(&system.state_matrix(), Some(&system.first_order_b()))
}

/// Real modes of a proportionally damped system.
pub fn decompose_structural(system: &MechanicalSystem) -> Result<SpectralData> {
    let (mass_coeff, stiffness_coeff) = match system.damping_class() {
        DampingClass::Structural { mass_coeff, stiffness_coeff } => (mass_coeff, stiffness_coeff),
        DampingClass::General => return Err(GssError::NotStructural),
    };
    let n = system.n();
    let chol: &Cholesky<f64, nalgebra::Dyn> = system.mass_cholesky();
    let l = chol.l();
    // K~ = L^{-1} K L^{-T}
    let linv_k = l.solve_lower_triangular(system.stiffness()).ok_or(GssError::LinearAlgebra("mass factor singular"))?;
    let kt = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or(GssError::LinearAlgebra("mass factor singular"))?;
    let kt = (&kt + kt.transpose()) * 0.5;
    let eig = SymmetricEigen::new(kt);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(core::cmp::Ordering::Equal));
    let lt = l.transpose();
    let mut shapes = DMatrix::zeros(n, n);
    let mut omega = Vec::with_capacity(n);
    let mut zeta = Vec::with_capacity(n);
    for (col, &j) in order.iter().enumerate() {
        let w2 = eig.eigenvalues[j];
        if !(w2 > 0.0) {
            return Err(GssError::ZeroEigenvalue { mode: col });
        }
        let y = eig.eigenvectors.column(j).into_owned();
        let mut u = lt.solve_upper_triangular(&y).ok_or(GssError::LinearAlgebra("mass factor singular"))?;
        let imax = u.iamax();
        if u[imax] < 0.0 {
            u = -u;
        }
        shapes.set_column(col, &u);
        let w = libm::sqrt(w2);
        omega.push(w);
        zeta.push(0.5 * (mass_coeff / w + stiffness_coeff * w));
    }
    let modes = StructuralModes { omega, zeta, shapes, mass_coeff, stiffness_coeff };
    let rates: Vec<f64> = (0..n).map(|j| -modes.eigenvalue_pair(j).0.re).collect();
    if let Some((j, r)) = rates.iter().enumerate().find(|(_, r)| !(**r > 0.0)) {
        let _ = j;
        return Err(GssError::UnstableLinearPart { real_part: -r });
    }
    Ok(SpectralData { gamma: gamma_of(&rates), retained: (0..n).collect(), state_dim: 2 * n, kind: SpectralKind::Structural(modes) })
}

/// Decomposition matching the system's damping class.
pub fn decompose(system: &MechanicalSystem) -> Result<SpectralData> {
    match system.damping_class() {
        DampingClass::Structural { .. } => decompose_structural(system),
        DampingClass::General => decompose_general(system),
    }
}

/// Indices `j` with `exp(-rate_j dt) > eps`; the slowest mode is always kept.
pub fn select_by_rates(rates: &[f64], dt: f64, eps: f64) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..rates.len()).filter(|&j| libm::exp(-rates[j] * dt) > eps).collect();
    if keep.is_empty() && !rates.is_empty() {
        let slowest = (0..rates.len())
            .min_by(|&a, &b| rates[a].partial_cmp(&rates[b]).unwrap_or(core::cmp::Ordering::Equal))
            .unwrap();
        keep.push(slowest);
    }
    keep
}

/// Retain modes whose one-step decay factor exceeds `eps`.
pub fn select_modes(spectral: &SpectralData, dt: f64, eps: f64) -> Vec<usize> {
    select_by_rates(&spectral.decay_rates(), dt, eps)
}
