//! Generalized steady state under quasiperiodic forcing, computed on the torus.
//!
//! Each coefficient is a truncated Fourier series `z_nu(t) = sum_k a_{nu,k}
//! e^{i<k,Omega>t}` over the box `|k_i| <= K`. The nonlinearity is composed on
//! a uniform torus grid, transformed back to harmonics, and each harmonic is
//! propagated by the closed-form modal response `1 / (i<k,Omega> - lambda)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::expansion::{divergence_check, BackendTag, GssExpansion};
use crate::composition::{assemble_phi, CoefficientTensor, CompositionCache, Integrand};
use crate::error::{GssError, Result};
use crate::kernel::{Harmonic, QuasiPeriodicForcing, DEFAULT_RESONANCE_REL};
use crate::model::MechanicalSystem;
use crate::spectral::{decompose_general, GeneralModes};
use crate::trajectory::{TimeGrid, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusOptions {
    /// Harmonic box half-width `K` per frequency.
    pub max_harmonic: usize,
    /// Torus samples per angle; `None` picks an alias-free count.
    pub samples_per_angle: Option<usize>,
    pub resonance_rel: f64,
    pub normalize: bool,
}

impl Default for TorusOptions {
    fn default() -> Self {
        Self { max_harmonic: 5, samples_per_angle: None, resonance_rel: DEFAULT_RESONANCE_REL, normalize: true }
    }
}

/// Harmonic coefficients of every order, state in the first-order coordinates.
#[derive(Debug, Clone)]
pub struct TorusExpansion {
    pub frequencies: Vec<f64>,
    pub harmonics: Vec<Vec<i32>>,
    /// `orders[nu - 1][h]` is the `2n` complex amplitude of harmonic `h`.
    pub orders: Vec<Vec<Vec<Complex64>>>,
    pub delta_ref: f64,
    pub eigenvalues: Vec<Complex64>,
}

fn harmonic_box(m: usize, k: i32) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * (2 * k as usize + 1));
        for h in &out {
            for ki in -k..=k {
                let mut v = h.clone();
                v.push(ki);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

impl TorusExpansion {
    pub fn order(&self) -> usize {
        self.orders.len()
    }

    pub fn dim(&self) -> usize {
        self.orders.first().map(|o| o.first().map_or(0, |v| v.len())).unwrap_or(0)
    }

    fn frequency_of(&self, k: &[i32]) -> f64 {
        k.iter().zip(&self.frequencies).map(|(&ki, &w)| ki as f64 * w).sum()
    }

    /// Coefficient `z_nu` sampled on `grid`.
    pub fn coefficient_on(&self, nu: usize, grid: TimeGrid) -> Trajectory {
        let dim = self.dim();
        let mut out = Trajectory::zeros(dim, grid.len);
        for (h, amp) in self.harmonics.iter().zip(&self.orders[nu - 1]) {
            if amp.iter().all(|a| a.norm_sqr() == 0.0) {
                continue;
            }
            let w = self.frequency_of(h);
            for k in 0..grid.len {
                let e = Complex64::new(0.0, w * grid.time(k)).exp();
                for (i, a) in amp.iter().enumerate() {
                    let v = out.get(i, k) + (a * e).re;
                    out.set(i, k, v);
                }
            }
        }
        out
    }

    /// All coefficients on `grid`, as a time-domain expansion.
    pub fn to_expansion(&self, grid: TimeGrid) -> Result<GssExpansion> {
        let mut coeffs = CoefficientTensor::new(self.dim(), grid, self.order());
        for nu in 1..=self.order() {
            coeffs.push_order(self.coefficient_on(nu, grid))?;
        }
        let divergence = divergence_check(&coeffs, self.delta_ref);
        Ok(GssExpansion {
            coeffs,
            delta_ref: self.delta_ref,
            backend: BackendTag::Quasiperiodic,
            pad: 0,
            retained_modes: self.eigenvalues.len(),
            eigenvalues: self.eigenvalues.clone(),
            divergence,
        })
    }

    /// Harmonic amplitudes of `sum_{nu <= n} z_nu Delta^nu`.
    pub fn summed_harmonics(&self, n: usize, delta: f64) -> Vec<Vec<Complex64>> {
        let dim = self.dim();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; self.harmonics.len()];
        for nu in (1..=n.min(self.order())).rev() {
            for (o, a) in out.iter_mut().zip(&self.orders[nu - 1]) {
                for (x, y) in o.iter_mut().zip(a) {
                    *x = (*x + y) * delta;
                }
            }
        }
        out
    }

    /// `max_t |z_i(t)|` of the order-`n` sum over one period of `frequencies[0]`
    /// (single-frequency forcing): the best of `samples` points, refined by
    /// golden-section search around it.
    pub fn periodic_amplitude(&self, coordinate: usize, n: usize, delta: f64, samples: usize) -> f64 {
        let amps = self.summed_harmonics(n, delta);
        let period = 2.0 * core::f64::consts::PI / self.frequencies[0];
        let value = |t: f64| {
            let mut v = 0.0;
            for (h, a) in self.harmonics.iter().zip(&amps) {
                v += (a[coordinate] * Complex64::new(0.0, self.frequency_of(h) * t).exp()).re;
            }
            v.abs()
        };
        let step = period / samples.max(1) as f64;
        let (mut t_best, mut best) = (0.0, value(0.0));
        for s in 1..samples {
            let t = step * s as f64;
            let v = value(t);
            if v > best {
                best = v;
                t_best = t;
            }
        }
        let inv_phi = 0.5 * (libm::sqrt(5.0) - 1.0);
        let (mut a, mut b) = (t_best - step, t_best + step);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (value(c), value(d));
        for _ in 0..60 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = value(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = value(d);
            }
        }
        best.max(fc).max(fd)
    }
}

struct TorusGrid {
    points: usize,
    /// `e^{-i<k,theta>}` per harmonic and point.
    table: Vec<Vec<Complex64>>,
}

impl TorusGrid {
    fn new(m: usize, p: usize, harmonics: &[Vec<i32>]) -> Self {
        let points = p.pow(m as u32);
        let angles = |idx: usize| {
            let mut a = Vec::with_capacity(m);
            let mut r = idx;
            for _ in 0..m {
                a.push(2.0 * core::f64::consts::PI * (r % p) as f64 / p as f64);
                r /= p;
            }
            a
        };
        let thetas: Vec<Vec<f64>> = (0..points).map(angles).collect();
        let table = harmonics
            .iter()
            .map(|k| {
                thetas
                    .iter()
                    .map(|th| {
                        let phase: f64 = k.iter().zip(th).map(|(&ki, &t)| ki as f64 * t).sum();
                        Complex64::new(0.0, -phase).exp()
                    })
                    .collect()
            })
            .collect();
        Self { points, table }
    }

    /// Real samples of `sum_h a_h e^{i<k_h,theta>}`.
    fn synthesize(&self, amps: &[Vec<Complex64>], dim: usize) -> Trajectory {
        let mut out = Trajectory::zeros(dim, self.points);
        for (row, amp) in self.table.iter().zip(amps) {
            for (i, a) in amp.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for (p, e) in row.iter().enumerate() {
                    // e is e^{-i phase}; conj gives e^{+i phase}
                    let v = out.get(i, p) + (a * e.conj()).re;
                    out.set(i, p, v);
                }
            }
        }
        out
    }

    /// Discrete Fourier coefficients of real torus samples.
    fn analyze(&self, samples: &Trajectory) -> Vec<Vec<Complex64>> {
        let scale = 1.0 / self.points as f64;
        self.table
            .iter()
            .map(|row| {
                (0..samples.dim())
                    .map(|i| {
                        let s: Complex64 = samples.row(i).iter().zip(row).map(|(&x, e)| e * x).sum();
                        s * scale
                    })
                    .collect()
            })
            .collect()
    }
}

/// Steady harmonic response `V diag(1/(i w - lambda)) Psi c` for each harmonic.
fn modal_solve(
    modes: &GeneralModes,
    freqs: &[f64],
    harmonics: &[Vec<i32>],
    rhs: &[Vec<Complex64>],
    rel: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let dim = modes.vectors.nrows();
    let mut out = Vec::with_capacity(rhs.len());
    // round-off from the torus transform is not a forced harmonic
    let floor = 1e-13 * rhs.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    for (k, c) in harmonics.iter().zip(rhs) {
        if c.iter().all(|v| v.norm() <= floor) {
            out.push(vec![Complex64::new(0.0, 0.0); dim]);
            continue;
        }
        let w: f64 = k.iter().zip(freqs).map(|(&ki, &f)| ki as f64 * f).sum();
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        for (j, &lambda) in modes.eigenvalues.iter().enumerate() {
            let d = Complex64::new(0.0, w) - lambda;
            if d.norm() < rel * lambda.norm() {
                return Err(GssError::NearResonance { mode: j, harmonic: k.clone(), distance: d.norm() });
            }
            let eta: Complex64 = (0..dim).map(|i| modes.projector[(j, i)] * c[i]).sum::<Complex64>() / d;
            for (i, a) in amp.iter_mut().enumerate() {
                *a += modes.vectors[(i, j)] * eta;
            }
        }
        out.push(amp);
    }
    Ok(out)
}

/// Taylor coefficients of the quasiperiodic steady state for the force
/// `g(t) = Re sum_k c_k e^{i<k,Omega>t}` (`c_k` of length `n`).
pub fn compute_quasiperiodic_gss(
    system: &MechanicalSystem,
    forcing: &QuasiPeriodicForcing,
    order: usize,
    options: &TorusOptions,
) -> Result<TorusExpansion> {
    let modes_data = decompose_general(system)?;
    let modes = modes_data.general().expect("general decomposition");
    quasiperiodic_with_modes(system, modes, &modes_data.eigenvalues(), forcing, order, options)
}

fn quasiperiodic_with_modes(
    system: &MechanicalSystem,
    modes: &GeneralModes,
    eigenvalues: &[Complex64],
    forcing: &QuasiPeriodicForcing,
    order: usize,
    options: &TorusOptions,
) -> Result<TorusExpansion> {
    let n = system.n();
    let m = forcing.frequencies.len();
    if order == 0 {
        return Err(GssError::InvalidParameter("expansion order must be at least 1".into()));
    }
    if m == 0 {
        return Err(GssError::InvalidParameter("quasiperiodic forcing needs at least one frequency".into()));
    }
    for h in &forcing.harmonics {
        if h.k.len() != m || h.coeff.len() != n {
            return Err(GssError::DimensionMismatch(format!(
                "harmonic {:?} has {} coefficients, expected {n} for {m} frequencies",
                h.k,
                h.coeff.len()
            )));
        }
    }
    let k_in = forcing.harmonics.iter().flat_map(|h| h.k.iter().map(|k| k.unsigned_abs() as usize)).max().unwrap_or(0);
    let kmax = options.max_harmonic.max(k_in);
    let harmonics = harmonic_box(m, kmax as i32);
    let degree = system.nonlinearity().max_degree().max(1);
    let p = options.samples_per_angle.unwrap_or(2 * degree * kmax + 2).max(2 * kmax + 1);
    let grid = TorusGrid::new(m, p, &harmonics);
    let dim = 2 * n;

    // forcing harmonics in the box, lifted to the force block; Re(c e^{i w t}) = (c e^{iwt} + conj(c) e^{-iwt}) / 2
    let mut base_h = vec![vec![Complex64::new(0.0, 0.0); dim]; harmonics.len()];
    let index_of = |k: &[i32]| harmonics.iter().position(|h| h.as_slice() == k);
    for h in &forcing.harmonics {
        let neg: Vec<i32> = h.k.iter().map(|k| -k).collect();
        let pos = index_of(&h.k).unwrap();
        let negi = index_of(&neg).unwrap();
        for i in 0..n {
            base_h[pos][i] += h.coeff[i] * 0.5;
            base_h[negi][i] += h.coeff[i].conj() * 0.5;
        }
    }
    let base = grid.synthesize(&base_h, dim);
    let delta_ref = if options.normalize {
        let sup = (0..base.len())
            .map(|k| libm::sqrt((0..n).map(|i| base.get(i, k) * base.get(i, k)).sum::<f64>()))
            .fold(0.0, f64::max);
        if sup > 0.0 {
            sup
        } else {
            1.0
        }
    } else {
        1.0
    };
    let inv = 1.0 / delta_ref;
    let mut integrand = Integrand { field: system.first_order_field(), base, state_terms: Vec::new() };
    integrand.base.scale(inv);
    for h in base_h.iter_mut() {
        for v in h.iter_mut() {
            *v *= inv;
        }
    }

    let tgrid = TimeGrid::new(1.0, 0.0, grid.points)?;
    let mut coeffs = CoefficientTensor::new(dim, tgrid, order);
    let mut cache = CompositionCache::new();
    let mut orders = Vec::with_capacity(order);
    for nu in 1..=order {
        let rhs = if nu == 1 {
            base_h.clone()
        } else {
            let phi = assemble_phi(&integrand, &coeffs, nu, &mut cache)?;
            grid.analyze(&phi)
        };
        let amps = modal_solve(modes, &forcing.frequencies, &harmonics, &rhs, options.resonance_rel)?;
        coeffs.push_order(grid.synthesize(&amps, dim))?;
        orders.push(amps);
    }
    Ok(TorusExpansion {
        frequencies: forcing.frequencies.clone(),
        harmonics,
        orders,
        delta_ref,
        eigenvalues: eigenvalues.to_vec(),
    })
}

/// Single-frequency force `Re(pattern e^{i omega t})`.
pub fn harmonic_forcing(omega: f64, pattern: &[f64]) -> QuasiPeriodicForcing {
    QuasiPeriodicForcing {
        frequencies: vec![omega],
        harmonics: vec![Harmonic { k: vec![1], coeff: pattern.iter().map(|&p| Complex64::new(p, 0.0)).collect() }],
    }
}

/// Outcome of one frequency of a forced-response sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum FrcStatus {
    Ok,
    NearResonance { mode: usize, harmonic: Vec<i32>, distance: f64 },
    Failed(alloc::string::String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrcPoint {
    pub omega: f64,
    /// Peak `|x_probe|` over one forcing period; `None` when flagged.
    pub amplitude: Option<f64>,
    pub status: FrcStatus,
}

/// Forced response curve of `probe` under `delta * pattern * cos(omega t)`.
pub fn frc_sweep(
    system: &MechanicalSystem,
    omegas: &[f64],
    pattern: &[f64],
    probe: usize,
    delta: f64,
    order: usize,
    options: &TorusOptions,
) -> Result<Vec<FrcPoint>> {
    if pattern.len() != system.n() || probe >= 2 * system.n() {
        return Err(GssError::DimensionMismatch("forcing pattern or probe does not match the system".into()));
    }
    let modes_data = decompose_general(system)?;
    let modes = modes_data.general().expect("general decomposition");
    let eig = modes_data.eigenvalues();
    let norm = libm::sqrt(pattern.iter().map(|p| p * p).sum::<f64>());
    let unit: Vec<f64> = pattern.iter().map(|p| if norm > 0.0 { p / norm } else { 0.0 }).collect();
    Ok(crate::par::map(omegas.len(), |w| {
        let omega = omegas[w];
        let forcing = harmonic_forcing(omega, &unit);
        let opts = TorusOptions { normalize: false, ..*options };
        match quasiperiodic_with_modes(system, modes, &eig, &forcing, order, &opts) {
            Ok(exp) => FrcPoint {
                omega,
                amplitude: Some(exp.periodic_amplitude(probe, order, delta, 512)),
                status: FrcStatus::Ok,
            },
            Err(GssError::NearResonance { mode, harmonic, distance }) => {
                FrcPoint { omega, amplitude: None, status: FrcStatus::NearResonance { mode, harmonic, distance } }
            }
            Err(e) => FrcPoint { omega, amplitude: None, status: FrcStatus::Failed(format!("{e}")) },
        }
    }))
}

/// Least-squares harmonic content of sampled forces on the box `|k_i| <= max_harmonic`.
pub fn fit_quasiperiodic(values: &Trajectory, grid: TimeGrid, frequencies: &[f64], max_harmonic: usize) -> Result<QuasiPeriodicForcing> {
    let m = frequencies.len();
    if m == 0 {
        return Err(GssError::InvalidParameter("at least one frequency is required".into()));
    }
    // half box: k with first nonzero entry positive, plus k = 0
    let all = harmonic_box(m, max_harmonic as i32);
    let half: Vec<Vec<i32>> = all.into_iter().filter(|k| k.iter().find(|&&x| x != 0).map_or(true, |&x| x > 0)).collect();
    let cols: usize = half.iter().map(|k| if k.iter().all(|&x| x == 0) { 1 } else { 2 }).sum();
    let len = grid.len;
    if len < cols {
        return Err(GssError::InvalidParameter("too few samples for the requested harmonics".into()));
    }
    let mut a = DMatrix::zeros(len, cols);
    for s in 0..len {
        let t = grid.time(s);
        let mut c = 0;
        for k in &half {
            let w: f64 = k.iter().zip(frequencies).map(|(&ki, &f)| ki as f64 * f).sum();
            if k.iter().all(|&x| x == 0) {
                a[(s, c)] = 1.0;
                c += 1;
            } else {
                a[(s, c)] = libm::cos(w * t);
                a[(s, c + 1)] = libm::sin(w * t);
                c += 2;
            }
        }
    }
    let svd = a.svd(true, true);
    let mut harmonics: Vec<Harmonic> = half.iter().map(|k| Harmonic { k: k.clone(), coeff: Vec::new() }).collect();
    for i in 0..values.dim() {
        let b = nalgebra::DVector::from_column_slice(values.row(i));
        let x = svd.solve(&b, 1e-12).map_err(|_| GssError::LinearAlgebra("harmonic fit failed"))?;
        let mut c = 0;
        for (h, k) in harmonics.iter_mut().zip(&half) {
            if k.iter().all(|&x| x == 0) {
                h.coeff.push(Complex64::new(x[c], 0.0));
                c += 1;
            } else {
                // a cos + b sin = Re((a - i b) e^{iwt})
                h.coeff.push(Complex64::new(x[c], -x[c + 1]));
                c += 2;
            }
        }
    }
    Ok(QuasiPeriodicForcing { frequencies: frequencies.to_vec(), harmonics })
}
