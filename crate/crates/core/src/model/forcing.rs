//! Sampled forcing histories.

use alloc::format;
use alloc::vec::Vec;

use super::multi_index::MultiIndex;
use crate::error::{GssError, Result};
use crate::trajectory::{TimeGrid, Trajectory};

/// Relative tolerance on the spacing of a supplied time column.
pub const TIME_SPACING_TOL: f64 = 1e-9;

/// State-dependent forcing term `G_m(t) z^m` (`|m| >= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateForcingTerm {
    pub index: MultiIndex,
    /// `n x len` samples of the force coefficient.
    pub values: Trajectory,
}

/// External forcing `g(t)` on a uniform grid, with leading zero padding.
///
/// Sample `k` sits at `t0 + (k - pad) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSignal {
    values: Trajectory,
    grid: TimeGrid,
    pad: usize,
    max_magnitude: f64,
    state_terms: Vec<StateForcingTerm>,
}

/// Build a forcing signal from time-major samples (`samples[k * n + i]`).
///
/// `times`, when given, must be uniformly spaced with step `dt`. `pad` zero
/// rows are prepended so that transients of the initial condition decay
/// before the forcing record starts.
pub fn load_forcing(
    samples: &[f64],
    n_dofs: usize,
    dt: f64,
    t0: f64,
    pad: usize,
    times: Option<&[f64]>,
) -> Result<ForcingSignal> {
    if n_dofs == 0 || samples.len() % n_dofs != 0 {
        return Err(GssError::DimensionMismatch(format!(
            "{} samples do not form rows of {n_dofs} forces",
            samples.len()
        )));
    }
    let rows = samples.len() / n_dofs;
    if rows < 2 {
        return Err(GssError::EmptySignal);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(GssError::NonFinite("forcing samples"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(GssError::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if let Some(t) = times {
        if t.len() != rows {
            return Err(GssError::DimensionMismatch(format!("{} times for {rows} rows", t.len())));
        }
        for k in 1..rows {
            let step = t[k] - t[k - 1];
            if (step - dt).abs() > TIME_SPACING_TOL * dt.abs().max(t[k].abs()) {
                return Err(GssError::NonuniformInput { row: k, step, expected: dt });
            }
        }
    }
    let len = rows + pad;
    let mut values = Trajectory::zeros(n_dofs, len);
    for k in 0..rows {
        for i in 0..n_dofs {
            values.set(i, pad + k, samples[k * n_dofs + i]);
        }
    }
    let grid = TimeGrid::new(dt, t0 - pad as f64 * dt, len)?;
    let max_magnitude = values.sup_norm();
    Ok(ForcingSignal { values, grid, pad, max_magnitude, state_terms: Vec::new() })
}

impl ForcingSignal {
    /// Forcing given directly as an `n x len` trajectory on `grid` (no padding).
    pub fn from_trajectory(values: Trajectory, grid: TimeGrid) -> Result<Self> {
        if values.len() != grid.len {
            return Err(GssError::GridMismatch(format!("{} samples on a grid of {}", values.len(), grid.len)));
        }
        if values.len() < 2 {
            return Err(GssError::EmptySignal);
        }
        if !values.all_finite() {
            return Err(GssError::NonFinite("forcing samples"));
        }
        let max_magnitude = values.sup_norm();
        Ok(Self { values, grid, pad: 0, max_magnitude, state_terms: Vec::new() })
    }

    /// Sample `g(t)` on `len` points starting at `t_start`.
    pub fn from_fn<F: Fn(f64, &mut [f64])>(n_dofs: usize, dt: f64, t_start: f64, len: usize, g: F) -> Result<Self> {
        let grid = TimeGrid::new(dt, t_start, len)?;
        let mut values = Trajectory::zeros(n_dofs, len);
        let mut buf = alloc::vec![0.0; n_dofs];
        for k in 0..len {
            g(grid.time(k), &mut buf);
            values.set_column(k, &buf);
        }
        Self::from_trajectory(values, grid)
    }

    /// Add a parametric term `G_m(t) z^m`; `values` is `n x len`.
    pub fn with_state_term(mut self, index: MultiIndex, values: Trajectory) -> Result<Self> {
        if index.degree() == 0 {
            return Err(GssError::InvalidParameter("state-dependent forcing needs degree >= 1".into()));
        }
        if index.nvars() != 2 * self.n_dofs() {
            return Err(GssError::DimensionMismatch(format!(
                "forcing term {index} has {} variables, expected {}",
                index.nvars(),
                2 * self.n_dofs()
            )));
        }
        if values.dim() != self.n_dofs() || values.len() != self.len() {
            return Err(GssError::GridMismatch("state forcing term does not match the forcing grid".into()));
        }
        self.state_terms.push(StateForcingTerm { index, values });
        Ok(self)
    }

    pub fn n_dofs(&self) -> usize {
        self.values.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    /// `Delta = max_t |g(t)|_2`.
    pub fn max_magnitude(&self) -> f64 {
        self.max_magnitude
    }

    pub fn values(&self) -> &Trajectory {
        &self.values
    }

    pub fn state_terms(&self) -> &[StateForcingTerm] {
        &self.state_terms
    }

    pub fn time(&self, k: usize) -> f64 {
        self.grid.time(k)
    }

    /// All coefficients multiplied by `a`.
    pub fn scaled(&self, a: f64) -> ForcingSignal {
        let mut out = self.clone();
        out.values.scale(a);
        for t in &mut out.state_terms {
            t.values.scale(a);
        }
        out.max_magnitude = self.max_magnitude * a.abs();
        out
    }

    /// Forcing divided by its magnitude (unchanged if identically zero).
    pub fn normalized(&self) -> ForcingSignal {
        if self.max_magnitude > 0.0 {
            self.scaled(1.0 / self.max_magnitude)
        } else {
            self.clone()
        }
    }

    /// Piecewise-linear interpolation of `g` at time `t` (clamped to the grid).
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        let s = (t - self.grid.t_start) / self.grid.dt;
        let last = self.len() - 1;
        let (k, w) = if s <= 0.0 {
            (0, 0.0)
        } else if s >= last as f64 {
            (last - 1, 1.0)
        } else {
            let k = libm::floor(s) as usize;
            (k.min(last - 1), s - k as f64)
        };
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.values.get(i, k);
            let b = self.values.get(i, k + 1);
            *o = a + w * (b - a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn padding_and_magnitude() {
        let f = load_forcing(&[3.0, 4.0, 0.0, 1.0, 1.0, 0.0], 2, 0.1, 1.0, 2, None).unwrap();
        assert_eq!(f.len(), 5);
        assert_eq!(f.values().column(0), vec![0.0, 0.0]);
        assert_eq!(f.values().column(2), vec![3.0, 4.0]);
        assert!((f.time(2) - 1.0).abs() < 1e-15);
        assert!((f.time(0) - 0.8).abs() < 1e-15);
        assert_eq!(f.max_magnitude(), 5.0);
        assert!((f.normalized().max_magnitude() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonuniform_and_empty() {
        let t = [0.0, 0.1, 0.25];
        assert!(matches!(
            load_forcing(&[1.0, 2.0, 3.0], 1, 0.1, 0.0, 0, Some(&t)),
            Err(GssError::NonuniformInput { row: 2, .. })
        ));
        assert!(matches!(load_forcing(&[1.0], 1, 0.1, 0.0, 0, None), Err(GssError::EmptySignal)));
        let ok = [0.0, 0.1, 0.2];
        assert!(load_forcing(&[1.0, 2.0, 3.0], 1, 0.1, 0.0, 0, Some(&ok)).is_ok());
    }

    #[test]
    fn interpolation_is_piecewise_linear() {
        let f = load_forcing(&[0.0, 1.0, 3.0], 1, 1.0, 0.0, 0, None).unwrap();
        let mut out = [0.0];
        f.interpolate(1.5, &mut out);
        assert_eq!(out[0], 2.0);
        f.interpolate(5.0, &mut out);
        assert_eq!(out[0], 3.0);
    }
}
