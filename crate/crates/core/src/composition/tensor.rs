//! Storage of the expansion coefficients `z_nu(t)`, one order at a time.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{GssError, Result};
use crate::trajectory::{TimeGrid, Trajectory};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// `z_nu(t_k)` for `nu = 1..=orders_complete`, each a `dim x len` trajectory.
///
/// Orders are appended in sequence and never modified, so a composition cache
/// keyed on the tensor identity stays valid while orders are added.
#[derive(Debug)]
pub struct CoefficientTensor {
    id: u64,
    dim: usize,
    grid: TimeGrid,
    max_order: usize,
    orders: Vec<Trajectory>,
}

impl Clone for CoefficientTensor {
    fn clone(&self) -> Self {
        Self { id: fresh_id(), dim: self.dim, grid: self.grid, max_order: self.max_order, orders: self.orders.clone() }
    }
}

impl CoefficientTensor {
    pub fn new(dim: usize, grid: TimeGrid, max_order: usize) -> Self {
        Self { id: fresh_id(), dim, grid, max_order, orders: Vec::with_capacity(max_order) }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len
    }

    pub fn is_empty(&self) -> bool {
        self.grid.len == 0
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn orders_complete(&self) -> usize {
        self.orders.len()
    }

    /// Append order `orders_complete + 1`.
    pub fn push_order(&mut self, z: Trajectory) -> Result<()> {
        if z.dim() != self.dim || z.len() != self.grid.len {
            return Err(GssError::GridMismatch(alloc::format!(
                "order slice is {}x{}, tensor expects {}x{}",
                z.dim(),
                z.len(),
                self.dim,
                self.grid.len
            )));
        }
        if self.orders.len() >= self.max_order {
            return Err(GssError::InvalidParameter(alloc::format!("tensor already holds {} orders", self.max_order)));
        }
        self.orders.push(z);
        Ok(())
    }

    /// `z_nu`, `1 <= nu <= orders_complete`.
    pub fn order(&self, nu: usize) -> Result<&Trajectory> {
        if nu == 0 || nu > self.orders.len() {
            return Err(GssError::OrderUnavailable { requested: nu, available: self.orders.len() });
        }
        Ok(&self.orders[nu - 1])
    }

    /// Coordinate `i` of `z_nu` over time.
    #[inline]
    pub fn slice(&self, nu: usize, i: usize) -> &[f64] {
        self.orders[nu - 1].row(i)
    }

    /// Tensor restricted to the first `n` orders.
    pub fn truncated(&self, n: usize) -> Result<CoefficientTensor> {
        if n > self.orders.len() {
            return Err(GssError::OrderUnavailable { requested: n, available: self.orders.len() });
        }
        Ok(Self { id: fresh_id(), dim: self.dim, grid: self.grid, max_order: n, orders: self.orders[..n].to_vec() })
    }

    /// `sum_{nu <= n} z_nu delta^nu`, evaluated per sample by Horner's rule.
    pub fn partial_sum(&self, n: usize, delta: f64) -> Result<Trajectory> {
        if n > self.orders.len() {
            return Err(GssError::OrderUnavailable { requested: n, available: self.orders.len() });
        }
        let mut out = Trajectory::zeros(self.dim, self.grid.len);
        for i in 0..self.dim {
            let row = out.row_mut(i);
            for nu in (1..=n).rev() {
                let z = self.orders[nu - 1].row(i);
                for (o, &c) in row.iter_mut().zip(z) {
                    *o = (*o + c) * delta;
                }
            }
        }
        Ok(out)
    }
}
