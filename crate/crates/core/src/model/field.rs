//! Sparse vector-valued polynomials in multi-index form.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::multi_index::MultiIndex;
use crate::error::{GssError, Result};

/// `F(z) = sum_m F_m z^m` with `z` in R^nvars and `F_m` in R^nout.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    nvars: usize,
    nout: usize,
    terms: BTreeMap<MultiIndex, Vec<f64>>,
}

impl PolynomialField {
    pub fn new(nvars: usize, nout: usize) -> Self {
        Self { nvars, nout, terms: BTreeMap::new() }
    }

    /// Build from `(exponents, coefficient vector)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(nvars: usize, nout: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Vec<f64>)>,
    {
        let mut f = Self::new(nvars, nout);
        for (m, c) in terms {
            f.add_term(m, &c)?;
        }
        Ok(f)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nout(&self) -> usize {
        self.nout
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, index: MultiIndex, coeffs: &[f64]) -> Result<()> {
        if index.nvars() != self.nvars {
            return Err(GssError::DimensionMismatch(format!(
                "monomial {index} has {} variables, field has {}",
                index.nvars(),
                self.nvars
            )));
        }
        if coeffs.len() != self.nout {
            return Err(GssError::DimensionMismatch(format!(
                "coefficient of {index} has {} entries, field has {} outputs",
                coeffs.len(),
                self.nout
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(GssError::NonFinite("polynomial coefficient"));
        }
        let slot = self.terms.entry(index).or_insert_with(|| vec![0.0; coeffs.len()]);
        for (s, c) in slot.iter_mut().zip(coeffs) {
            *s += c;
        }
        Ok(())
    }

    /// Add `c z^m` to output `out`.
    pub fn add_scalar_term(&mut self, index: MultiIndex, out: usize, c: f64) -> Result<()> {
        if out >= self.nout {
            return Err(GssError::DimensionMismatch(format!("output {out} out of range ({} outputs)", self.nout)));
        }
        let mut v = vec![0.0; self.nout];
        v[out] = c;
        self.add_term(index, &v)
    }

    /// Terms in lexicographic order of the exponents.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<f64>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, index: &MultiIndex) -> Option<&Vec<f64>> {
        self.terms.get(index)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).min().unwrap_or(0)
    }

    /// Terms whose degree lies in `lo..=hi`.
    pub fn degree_range(&self, lo: usize, hi: usize) -> PolynomialField {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| (lo..=hi).contains(&m.degree()))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        PolynomialField { nvars: self.nvars, nout: self.nout, terms }
    }

    /// Matrix of the degree-one terms (`nout x nvars`).
    pub fn linear_part(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.nout, self.nvars);
        for (m, c) in &self.terms {
            if m.degree() == 1 {
                let j = m.first_nonzero().unwrap();
                for (i, &v) in c.iter().enumerate() {
                    a[(i, j)] += v;
                }
            }
        }
        a
    }

    /// Constant term, if any.
    pub fn constant_part(&self) -> Vec<f64> {
        self.terms.get(&MultiIndex::zeros(self.nvars)).cloned().unwrap_or_else(|| vec![0.0; self.nout])
    }

    /// Outputs scaled by `a` and placed at rows `offset..offset+nout` of a
    /// field with `nout_total` outputs.
    pub fn embed_outputs(&self, nout_total: usize, offset: usize, a: f64) -> PolynomialField {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut v = vec![0.0; nout_total];
                for (i, x) in c.iter().enumerate() {
                    v[offset + i] = a * x;
                }
                (m.clone(), v)
            })
            .collect();
        PolynomialField { nvars: self.nvars, nout: nout_total, terms }
    }

    /// `self + other` (same shape).
    pub fn sum(&self, other: &PolynomialField) -> Result<PolynomialField> {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c)?;
        }
        Ok(out)
    }

    /// Coefficients multiplied on the left by `a` (`a.ncols() == nout`).
    pub fn left_multiply(&self, a: &DMatrix<f64>) -> PolynomialField {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let v: Vec<f64> = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * c[j]).sum()).collect();
                (m.clone(), v)
            })
            .collect();
        PolynomialField { nvars: self.nvars, nout: a.nrows(), terms }
    }

    fn power_table(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let d = self.max_degree();
        z.iter()
            .map(|&x| {
                let mut p = Vec::with_capacity(d + 1);
                let mut acc = 1.0;
                for _ in 0..=d {
                    p.push(acc);
                    acc *= x;
                }
                p
            })
            .collect()
    }

    pub fn evaluate(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        let pows = self.power_table(z);
        let mut out = vec![0.0; self.nout];
        for (m, c) in &self.terms {
            let mut mono = 1.0;
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    mono *= pows[i][e as usize];
                }
            }
            for (o, &ci) in out.iter_mut().zip(c) {
                *o += ci * mono;
            }
        }
        out
    }

    /// Jacobian `dF/dz` (`nout x nvars`).
    pub fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        let pows = self.power_table(z);
        let mut jac = DMatrix::zeros(self.nout, self.nvars);
        for (m, c) in &self.terms {
            let e = m.exponents();
            for j in 0..self.nvars {
                if e[j] == 0 {
                    continue;
                }
                let mut d = e[j] as f64;
                for (i, &ei) in e.iter().enumerate() {
                    let p = if i == j { ei - 1 } else { ei };
                    if p > 0 {
                        d *= pows[i][p as usize];
                    }
                }
                for (o, &ci) in c.iter().enumerate() {
                    jac[(o, j)] += ci * d;
                }
            }
        }
        jac
    }

    /// `sum_m |m| ||F_m||_2 r^{|m|-1}`, a Lipschitz bound for the field on
    /// the ball of radius `r` (terms of degree zero are skipped).
    pub fn lipschitz_bound(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.degree() > 0)
            .map(|(m, c)| {
                let norm = libm::sqrt(c.iter().map(|x| x * x).sum::<f64>());
                m.degree() as f64 * norm * libm::pow(r, (m.degree() - 1) as f64)
            })
            .sum()
    }

    /// `sum_m ||F_m||_2 r^{|m|}`, a bound for `|F|` on the ball of radius `r`.
    pub fn magnitude_bound(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| libm::sqrt(c.iter().map(|x| x * x).sum::<f64>()) * libm::pow(r, m.degree() as f64))
            .sum()
    }
}
