//! Uniform time grids and sampled vector-valued histories.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GssError, Result};

/// Uniform grid `t_k = t_start + k dt`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub t_start: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, t_start: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(GssError::InvalidParameter(alloc::format!("time step must be positive, got {dt}")));
        }
        Ok(Self { dt, t_start, len })
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.len.saturating_sub(1))
    }
}

/// A `dim`-vector sampled on `len` grid points. Each coordinate is stored
/// contiguously in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    len: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn zeros(dim: usize, len: usize) -> Self {
        Self { dim, len, data: vec![0.0; dim * len] }
    }

    /// Build from coordinate-major data (`data[i * len + k]`).
    pub fn from_data(dim: usize, len: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * len {
            return Err(GssError::DimensionMismatch(alloc::format!(
                "trajectory data has {} values, expected {dim} x {len}",
                data.len()
            )));
        }
        Ok(Self { dim, len, data })
    }

    /// Build from time-major rows (`rows[k][i]`).
    pub fn from_time_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let len = rows.len();
        let mut out = Self::zeros(dim, len);
        for (k, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(GssError::DimensionMismatch(alloc::format!("row {k} has {} entries, expected {dim}", r.len())));
            }
            for (i, &v) in r.iter().enumerate() {
                out.data[i * len + k] = v;
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.len + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, v: f64) {
        self.data[i * self.len + k] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.len..(i + 1) * self.len]
    }

    pub fn rows_mut(&mut self) -> core::slice::ChunksMut<'_, f64> {
        self.data.chunks_mut(self.len.max(1))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// State vector at sample `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, k)).collect()
    }

    pub fn set_column(&mut self, k: usize, v: &[f64]) {
        for (i, &x) in v.iter().enumerate() {
            self.set(i, k, x);
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Trajectory) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    /// Euclidean norm of the state at sample `k`.
    pub fn norm_at(&self, k: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let v = self.get(i, k);
            s += v * v;
        }
        libm::sqrt(s)
    }

    /// `max_k |z(t_k)|_2`.
    pub fn sup_norm(&self) -> f64 {
        (0..self.len).map(|k| self.norm_at(k)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Restrict to coordinates `rows` (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Trajectory {
        let mut out = Trajectory::zeros(rows.len(), self.len);
        for (o, &i) in rows.iter().enumerate() {
            out.row_mut(o).copy_from_slice(self.row(i));
        }
        out
    }

    /// Samples `from..len`, all coordinates.
    pub fn tail(&self, from: usize) -> Trajectory {
        let from = from.min(self.len);
        let len = self.len - from;
        let mut out = Trajectory::zeros(self.dim, len);
        for i in 0..self.dim {
            out.row_mut(i).copy_from_slice(&self.row(i)[from..]);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
