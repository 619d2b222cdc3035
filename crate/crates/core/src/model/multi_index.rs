//! Exponent vectors of monomials.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Exponent vector `m` of the monomial `z^m = prod_i z_i^{m_i}`.
///
/// The derived ordering is lexicographic on the exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn zeros(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e)
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    #[inline]
    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }

    /// `(i, self - e_i)` with `i` the first nonzero coordinate, for degree >= 2.
    pub fn parent(&self) -> Option<(usize, MultiIndex)> {
        if self.degree() < 2 {
            return None;
        }
        let i = self.first_nonzero()?;
        let mut e = self.0.clone();
        e[i] -= 1;
        Some((i, MultiIndex(e)))
    }

    /// `gamma!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }

    /// Same exponents embedded into `nvars` variables starting at `offset`.
    pub fn embed(&self, nvars: usize, offset: usize) -> MultiIndex {
        let mut e = vec![0; nvars];
        e[offset..offset + self.0.len()].copy_from_slice(&self.0);
        MultiIndex(e)
    }

    /// Graded order key: total degree first, then lexicographic.
    pub fn graded_cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.cmp(other))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}
