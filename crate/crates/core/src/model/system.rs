//! Second-order mechanical systems and their first-order form.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::field::PolynomialField;
use super::multi_index::MultiIndex;
use crate::error::{GssError, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const STRUCTURAL_FIT_TOL: f64 = 1e-10;

/// How the damping matrix relates to mass and stiffness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingClass {
    General,
    /// `C = mass_coeff M + stiffness_coeff K`.
    Structural { mass_coeff: f64, stiffness_coeff: f64 },
}

/// Override for the automatic proportional-damping detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DampingOverride {
    #[default]
    Auto,
    General,
    Structural,
}

/// `M x'' + C x' + K x + f(x, x') = g(t)`.
///
/// The nonlinearity takes the `2n` variables `(x, x')` and returns `n` forces.
#[derive(Debug, Clone)]
pub struct MechanicalSystem {
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    nonlinearity: PolynomialField,
    damping_class: DampingClass,
    mass_chol: Cholesky<f64, Dyn>,
}

fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (a - a.transpose()).norm() / norm
}

fn check_square(a: &DMatrix<f64>, n: usize, which: &'static str) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(GssError::DimensionMismatch(format!(
            "{which} matrix is {}x{}, expected {n}x{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(GssError::NonFinite(which));
    }
    Ok(())
}

fn check_symmetric(a: &DMatrix<f64>, which: &'static str) -> Result<()> {
    let asym = relative_asymmetry(a);
    if asym > SYMMETRY_TOL {
        return Err(GssError::NotSymmetric { which, asymmetry: asym });
    }
    Ok(())
}

fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Least-squares fit `C ~ a M + b K` in the Frobenius inner product.
/// Returns `(a, b, relative residual)`.
pub fn fit_proportional_damping(m: &DMatrix<f64>, c: &DMatrix<f64>, k: &DMatrix<f64>) -> (f64, f64, f64) {
    let mm = m.dot(m);
    let mk = m.dot(k);
    let kk = k.dot(k);
    let cm = c.dot(m);
    let ck = c.dot(k);
    let det = mm * kk - mk * mk;
    let (a, b) = if det.abs() > 1e-12 * mm * kk {
        ((cm * kk - ck * mk) / det, (ck * mm - cm * mk) / det)
    } else {
        // M and K collinear: any split works, attribute everything to K.
        (0.0, ck / kk)
    };
    let resid = (c - m * a - k * b).norm();
    let cn = c.norm();
    let rel = if cn == 0.0 { resid } else { resid / cn };
    (a, b, rel)
}

/// Validate and assemble a mechanical system.
pub fn build_system(
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    nonlinearity: PolynomialField,
    damping_override: DampingOverride,
) -> Result<MechanicalSystem> {
    let n = mass.nrows();
    if n == 0 {
        return Err(GssError::DimensionMismatch("system has no degrees of freedom".into()));
    }
    check_square(&mass, n, "mass")?;
    check_square(&damping, n, "damping")?;
    check_square(&stiffness, n, "stiffness")?;
    check_symmetric(&mass, "mass")?;
    check_symmetric(&stiffness, "stiffness")?;
    let mass = symmetrize(&mass);
    let stiffness = symmetrize(&stiffness);
    // skew (gyroscopic) parts of C are kept; semi-definiteness applies to the symmetric part
    let damping = if relative_asymmetry(&damping) <= SYMMETRY_TOL { symmetrize(&damping) } else { damping };

    let mass_chol = Cholesky::new(mass.clone()).ok_or(GssError::NotPositiveDefinite { which: "mass" })?;
    if Cholesky::new(stiffness.clone()).is_none() {
        return Err(GssError::NotPositiveDefinite { which: "stiffness" });
    }
    let c_norm = damping.norm();
    if c_norm > 0.0 {
        let eig = SymmetricEigen::new(symmetrize(&damping));
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 * c_norm {
            return Err(GssError::DampingIndefinite { min_eigenvalue: min });
        }
    }

    if nonlinearity.nvars() != 2 * n || nonlinearity.nout() != n {
        return Err(GssError::DimensionMismatch(format!(
            "nonlinearity maps R^{} -> R^{}, expected R^{} -> R^{n}",
            nonlinearity.nvars(),
            nonlinearity.nout(),
            2 * n
        )));
    }
    for (m, _) in nonlinearity.terms() {
        if m.degree() < 2 {
            return Err(GssError::NonlinearTermDegreeTooLow { term: format!("{m}"), degree: m.degree() });
        }
    }

    let (a, b, resid) = fit_proportional_damping(&mass, &damping, &stiffness);
    let proportional = resid <= STRUCTURAL_FIT_TOL;
    let damping_class = match damping_override {
        DampingOverride::General => DampingClass::General,
        DampingOverride::Structural if !proportional => return Err(GssError::NotStructural),
        _ if proportional => DampingClass::Structural { mass_coeff: a, stiffness_coeff: b },
        _ => DampingClass::General,
    };

    Ok(MechanicalSystem { mass, damping, stiffness, nonlinearity, damping_class, mass_chol })
}

impl MechanicalSystem {
    pub fn n(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn damping(&self) -> &DMatrix<f64> {
        &self.damping
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn nonlinearity(&self) -> &PolynomialField {
        &self.nonlinearity
    }

    pub fn damping_class(&self) -> DampingClass {
        self.damping_class
    }

    pub fn mass_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.mass_chol
    }

    /// Copy with the damping class replaced (used to force the general path).
    pub fn with_damping_class(&self, class: DampingClass) -> Self {
        let mut s = self.clone();
        s.damping_class = class;
        s
    }

    /// `M^{-1} v`.
    pub fn mass_solve(&self, v: &[f64]) -> Vec<f64> {
        let x = self.mass_chol.solve(&DVector::from_column_slice(v));
        x.iter().cloned().collect()
    }

    /// `B = [[C, M], [M, 0]]`.
    pub fn first_order_b(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        b.view_mut((0, 0), (n, n)).copy_from(&self.damping);
        b.view_mut((0, n), (n, n)).copy_from(&self.mass);
        b.view_mut((n, 0), (n, n)).copy_from(&self.mass);
        b
    }

    /// `A = [[-K, 0], [0, M]]`.
    pub fn first_order_a(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, 0), (n, n)).copy_from(&(-&self.stiffness));
        a.view_mut((n, n), (n, n)).copy_from(&self.mass);
        a
    }

    /// `B^{-1} A = [[0, I], [-M^{-1}K, -M^{-1}C]]`, built from solves with `M`.
    pub fn state_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mk = self.mass_chol.solve(&self.stiffness);
        let mc = self.mass_chol.solve(&self.damping);
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).fill_with_identity();
        a.view_mut((n, 0), (n, n)).copy_from(&(-mk));
        a.view_mut((n, n), (n, n)).copy_from(&(-mc));
        a
    }

    /// First-order nonlinearity `F(z) = (-f(z), 0)` on `z = (x, x')`.
    pub fn first_order_field(&self) -> PolynomialField {
        self.nonlinearity.embed_outputs(2 * self.n(), 0, -1.0)
    }

    /// Explicit right-hand side `B^{-1}(A z + F(z))` without forcing.
    pub fn state_field(&self) -> PolynomialField {
        let n = self.n();
        let a = self.state_matrix();
        let mut field = PolynomialField::new(2 * n, 2 * n);
        for j in 0..2 * n {
            let col: Vec<f64> = a.column(j).iter().cloned().collect();
            if col.iter().any(|&v| v != 0.0) {
                field.add_term(MultiIndex::unit(2 * n, j), &col).unwrap();
            }
        }
        for (m, c) in self.nonlinearity.terms() {
            let acc = self.mass_solve(c);
            let mut v = vec![0.0; 2 * n];
            for i in 0..n {
                v[n + i] = -acc[i];
            }
            field.add_term(m.clone(), &v).unwrap();
        }
        field
    }

    /// Nonlinear force `f(x, v)`.
    pub fn nonlinear_force(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.n());
        z.extend_from_slice(x);
        z.extend_from_slice(v);
        self.nonlinearity.evaluate(&z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn duffing(c: f64) -> MechanicalSystem {
        let mut f = PolynomialField::new(2, 1);
        f.add_scalar_term(MultiIndex::new(vec![3, 0]), 0, 1.0).unwrap();
        build_system(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, 1.0),
            f,
            DampingOverride::Auto,
        )
        .unwrap()
    }

    #[test]
    fn single_dof_is_structural() {
        let s = duffing(0.2);
        match s.damping_class() {
            DampingClass::Structural { mass_coeff, stiffness_coeff } => {
                assert!((mass_coeff + stiffness_coeff - 0.2).abs() < 1e-14);
            }
            DampingClass::General => panic!("expected proportional damping"),
        }
    }

    #[test]
    fn gyroscopic_damping_is_general() {
        let eye = DMatrix::<f64>::identity(2, 2);
        let c = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.1]);
        let s = build_system(eye.clone(), c.clone(), eye, PolynomialField::new(4, 2), DampingOverride::Auto).unwrap();
        assert_eq!(s.damping_class(), DampingClass::General);
        assert_eq!(s.damping(), &c);
    }

    #[test]
    fn first_order_blocks() {
        let s = duffing(0.2);
        let b = s.first_order_b();
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[0.2, 1.0, 1.0, 0.0]));
        let a = s.first_order_a();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]));
        let bia = b.clone().lu().solve(&a).unwrap();
        assert!((bia - s.state_matrix()).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = PolynomialField::new(4, 2);
        let eye = DMatrix::<f64>::identity(2, 2);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            build_system(asym, eye.clone(), eye.clone(), f.clone(), DampingOverride::Auto),
            Err(GssError::NotSymmetric { which: "mass", .. })
        ));
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            build_system(eye.clone(), eye.clone(), neg.clone(), f.clone(), DampingOverride::Auto),
            Err(GssError::NotPositiveDefinite { which: "stiffness" })
        ));
        assert!(matches!(
            build_system(eye.clone(), neg, eye.clone(), f.clone(), DampingOverride::Auto),
            Err(GssError::DampingIndefinite { .. })
        ));
        let mut lin = PolynomialField::new(4, 2);
        lin.add_scalar_term(MultiIndex::unit(4, 0), 0, 1.0).unwrap();
        assert!(matches!(
            build_system(eye.clone(), eye.clone(), eye.clone(), lin, DampingOverride::Auto),
            Err(GssError::NonlinearTermDegreeTooLow { .. })
        ));
        let bad = PolynomialField::new(3, 2);
        assert!(matches!(
            build_system(eye.clone(), eye.clone(), eye.clone(), bad, DampingOverride::Auto),
            Err(GssError::DimensionMismatch(_))
        ));
        let nonprop = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5]);
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert!(matches!(
            build_system(eye.clone(), nonprop, k, f, DampingOverride::Structural),
            Err(GssError::NotStructural)
        ));
    }

    #[test]
    fn proportional_fit_recovers_coefficients() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let k = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 2.0]);
        let c = &m * 0.3 + &k * 0.02;
        let (a, b, r) = fit_proportional_damping(&m, &c, &k);
        assert!((a - 0.3).abs() < 1e-12 && (b - 0.02).abs() < 1e-12 && r < 1e-12);
    }
}
