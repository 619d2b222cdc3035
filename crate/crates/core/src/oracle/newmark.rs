//! Fully nonlinear implicit Newmark integration (average acceleration) with Newton iterations.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{GssError, Result};
use crate::model::{ForcingSignal, MechanicalSystem, MultiIndex};
use crate::trajectory::Trajectory;

pub const NEWTON_RTOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewmarkOptions {
    pub rtol: f64,
    pub max_iter: usize,
    /// Central finite differences instead of the analytic tangent.
    pub finite_difference_tangent: bool,
}

impl Default for NewmarkOptions {
    fn default() -> Self {
        Self { rtol: NEWTON_RTOL, max_iter: NEWTON_MAX_ITER, finite_difference_tangent: false }
    }
}

/// `d(z^m)/dz` at `z`.
fn monomial_gradient(m: &MultiIndex, z: &[f64]) -> Vec<f64> {
    let e = m.exponents();
    (0..z.len())
        .map(|i| {
            if e[i] == 0 {
                return 0.0;
            }
            let mut v = e[i] as f64;
            for (j, (&ej, &zj)) in e.iter().zip(z).enumerate() {
                let p = if j == i { ej - 1 } else { ej };
                for _ in 0..p {
                    v *= zj;
                }
            }
            v
        })
        .collect()
}

fn monomial(m: &MultiIndex, z: &[f64]) -> f64 {
    let mut v = 1.0;
    for (&e, &zi) in m.exponents().iter().zip(z) {
        for _ in 0..e {
            v *= zi;
        }
    }
    v
}

struct Model<'a> {
    system: &'a MechanicalSystem,
    forcing: &'a ForcingSignal,
    n: usize,
}

impl Model<'_> {
    /// `f(z) - g(z, t_k)` (internal minus external nonlinear/forcing part).
    fn load(&self, z: &[f64], k: usize) -> Vec<f64> {
        let mut r = self.system.nonlinearity().evaluate(z);
        let g = self.forcing.values();
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= g.get(i, k);
        }
        for term in self.forcing.state_terms() {
            let s = monomial(&term.index, z);
            for (i, ri) in r.iter_mut().enumerate() {
                *ri -= term.values.get(i, k) * s;
            }
        }
        r
    }

    /// `d(load)/dz` (`n x 2n`).
    fn load_jacobian(&self, z: &[f64], k: usize) -> DMatrix<f64> {
        let mut j = self.system.nonlinearity().jacobian(z);
        for term in self.forcing.state_terms() {
            let grad = monomial_gradient(&term.index, z);
            for i in 0..self.n {
                let gi = term.values.get(i, k);
                for (c, gc) in grad.iter().enumerate() {
                    j[(i, c)] -= gi * gc;
                }
            }
        }
        j
    }

    fn load_jacobian_fd(&self, z: &[f64], k: usize) -> DMatrix<f64> {
        let m = z.len();
        let mut j = DMatrix::zeros(self.n, m);
        for c in 0..m {
            let h = 1e-6 * (1.0 + z[c].abs());
            let mut zp = z.to_vec();
            let mut zm = z.to_vec();
            zp[c] += h;
            zm[c] -= h;
            let fp = self.load(&zp, k);
            let fm = self.load(&zm, k);
            for i in 0..self.n {
                j[(i, c)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        j
    }
}

/// Nonlinear response from the state `z0` on the forcing grid.
pub fn newmark_full(system: &MechanicalSystem, forcing: &ForcingSignal, z0: &[f64]) -> Result<Trajectory> {
    newmark_full_with(system, forcing, z0, &NewmarkOptions::default())
}

pub fn newmark_full_with(
    system: &MechanicalSystem,
    forcing: &ForcingSignal,
    z0: &[f64],
    options: &NewmarkOptions,
) -> Result<Trajectory> {
    let n = system.n();
    if z0.len() != 2 * n || forcing.n_dofs() != n {
        return Err(GssError::DimensionMismatch("initial state or forcing does not match the system".into()));
    }
    let model = Model { system, forcing, n };
    let dt = forcing.dt();
    let len = forcing.len();
    let m = system.mass();
    let c = system.damping();
    let k = system.stiffness();
    let lin_tangent = k + c * (2.0 / dt) + m * (4.0 / (dt * dt));

    let mut out = Trajectory::zeros(2 * n, len);
    let mut x = DVector::from_column_slice(&z0[..n]);
    let mut v = DVector::from_column_slice(&z0[n..]);
    out.set_column(0, z0);
    let load0 = DVector::from_vec(model.load(z0, 0));
    let mut a = system.mass_cholesky().solve(&(-(c * &v) - k * &x - load0));

    for step in 0..len.saturating_sub(1) {
        let kn = step + 1;
        // predictor: constant acceleration
        let xp = &x + &v * dt + &a * (0.25 * dt * dt);
        let mut xn = xp.clone();
        let mut converged = false;
        let mut last_res = f64::INFINITY;
        for _ in 0..options.max_iter {
            let dx = &xn - &x;
            let vn = &dx * (2.0 / dt) - &v;
            let an = &dx * (4.0 / (dt * dt)) - &v * (4.0 / dt) - &a;
            let z = vec_concat(&xn, &vn);
            let load = DVector::from_vec(model.load(&z, kn));
            let inertia = m * &an;
            let damp = c * &vn;
            let elast = k * &xn;
            let res = &inertia + &damp + &elast + &load;
            let scale = inertia.norm() + damp.norm() + elast.norm() + load.norm();
            last_res = res.norm();
            if last_res <= options.rtol * scale || last_res == 0.0 {
                converged = true;
                break;
            }
            let jl = if options.finite_difference_tangent {
                model.load_jacobian_fd(&z, kn)
            } else {
                model.load_jacobian(&z, kn)
            };
            // dz/dx_{n+1} = [I; (2/dt) I]
            let tangent = &lin_tangent + jl.columns(0, n) + jl.columns(n, n) * (2.0 / dt);
            let delta = tangent.lu().solve(&res).ok_or(GssError::NewtonDivergence { step: kn, residual: last_res })?;
            xn -= &delta;
            // the correction has reached round-off in the state
            if delta.norm() <= 4.0 * f64::EPSILON * xn.norm() {
                converged = true;
                break;
            }
        }
        if !converged || !xn.iter().all(|v| v.is_finite()) {
            return Err(GssError::NewtonDivergence { step: kn, residual: last_res });
        }
        let dx = &xn - &x;
        let vn = &dx * (2.0 / dt) - &v;
        let an = &dx * (4.0 / (dt * dt)) - &v * (4.0 / dt) - &a;
        x = xn;
        v = vn;
        a = an;
        for i in 0..n {
            out.set(i, kn, x[i]);
            out.set(n + i, kn, v[i]);
        }
    }
    Ok(out)
}

fn vec_concat(x: &DVector<f64>, v: &DVector<f64>) -> Vec<f64> {
    x.iter().chain(v.iter()).cloned().collect()
}
