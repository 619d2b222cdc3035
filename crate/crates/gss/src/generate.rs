//! Forcing generators: chirp, low-pass filtered Gaussian noise, a Rossler
//! signal and a two-tone signal.
//!
//! Deterministic signals are spread over the target dofs with weight
//! `1/sqrt(k)` so the row norm equals the scalar signal.

use gss_core::model::ForcingSignal;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{config, CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingKind {
    /// `sin(2 pi (t^2/2 + omega0 t))`.
    Chirp { omega0: f64 },
    /// White noise of deviation `sigma`, spectrally cut above `cutoff` Hz,
    /// independent per dof, rescaled to row-norm supremum `delta`.
    FilteredGaussian { sigma: f64, cutoff: f64, seed: u64 },
    /// `x` of the Rossler system after 100 time units, normalized by its
    /// supremum over the retained window.
    Rossler { a: f64, b: f64, c: f64, seed: u64 },
    /// `(sin omega1 t + sin omega2 t) / 2`.
    TwoTone { omega1: f64, omega2: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSpec {
    pub kind: ForcingKind,
    pub duration: f64,
    pub dt: f64,
    pub delta: f64,
    pub n_dofs: usize,
    pub dofs: Vec<usize>,
}

pub const ROSSLER_DISCARD: f64 = 100.0;

fn rossler_x(a: f64, b: f64, c: f64, seed: u64, dt: f64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(-1.0, 1.0);
    let mut s = [1.0 + u.sample(&mut rng), 1.0 + u.sample(&mut rng), u.sample(&mut rng)];
    let rhs = |s: &[f64; 3]| [-s[1] - s[2], s[0] + a * s[1], b + s[2] * (s[0] - c)];
    let step = |s: &mut [f64; 3]| {
        let add = |s: &[f64; 3], k: &[f64; 3], h: f64| [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]];
        let k1 = rhs(s);
        let k2 = rhs(&add(s, &k1, 0.5 * dt));
        let k3 = rhs(&add(s, &k2, 0.5 * dt));
        let k4 = rhs(&add(s, &k3, dt));
        for i in 0..3 {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    };
    for _ in 0..(ROSSLER_DISCARD / dt).round() as usize {
        step(&mut s);
    }
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(s[0]);
        step(&mut s);
    }
    out
}

fn lowpass_noise(rng: &mut ChaCha8Rng, sigma: f64, cutoff: f64, dt: f64, len: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    let mut buf: Vec<Complex<f64>> = (0..len).map(|_| Complex::new(normal.sample(rng), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let df = 1.0 / (len as f64 * dt);
    for (j, v) in buf.iter_mut().enumerate() {
        if j.min(len - j) as f64 * df > cutoff {
            *v = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.iter().map(|v| v.re / len as f64).collect()
}

pub fn generate_forcing(spec: &GenerateSpec) -> Result<ForcingSignal> {
    if !(spec.duration > 0.0) || !(spec.dt > 0.0) || !(spec.delta >= 0.0) {
        return Err(config("duration and time step must be positive, amplitude non-negative"));
    }
    if spec.dofs.is_empty() || spec.dofs.iter().any(|&d| d >= spec.n_dofs) {
        return Err(config(format!("target dofs {:?} invalid for {} dofs", spec.dofs, spec.n_dofs)));
    }
    let len = (spec.duration / spec.dt).round() as usize + 1;
    let dt = spec.dt;
    let time = |k: usize| k as f64 * dt;
    // one column of samples per target dof
    let columns: Vec<Vec<f64>> = match spec.kind {
        ForcingKind::Chirp { omega0 } => {
            let s: Vec<f64> = (0..len)
                .map(|k| {
                    let t = time(k);
                    (2.0 * std::f64::consts::PI * (0.5 * t * t + omega0 * t)).sin()
                })
                .collect();
            vec![s; spec.dofs.len()]
        }
        ForcingKind::TwoTone { omega1, omega2 } => {
            let s: Vec<f64> = (0..len).map(|k| 0.5 * ((omega1 * time(k)).sin() + (omega2 * time(k)).sin())).collect();
            vec![s; spec.dofs.len()]
        }
        ForcingKind::Rossler { a, b, c, seed } => {
            let x = rossler_x(a, b, c, seed, dt, len);
            let sup = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            vec![x.iter().map(|v| v / sup).collect(); spec.dofs.len()]
        }
        ForcingKind::FilteredGaussian { sigma, cutoff, seed } => {
            let nyquist = 0.5 / dt;
            if !(cutoff > 0.0 && cutoff < nyquist) {
                return Err(CliError::InvalidCutoff { cutoff, nyquist });
            }
            if !(sigma > 0.0) {
                return Err(config("sigma must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            spec.dofs.iter().map(|_| lowpass_noise(&mut rng, sigma, cutoff, dt, len)).collect()
        }
    };
    let weight = match spec.kind {
        ForcingKind::FilteredGaussian { .. } => {
            let sup = (0..len)
                .map(|k| columns.iter().map(|c| c[k] * c[k]).sum::<f64>().sqrt())
                .fold(0.0f64, f64::max);
            if sup == 0.0 { 0.0 } else { spec.delta / sup }
        }
        _ => spec.delta / (spec.dofs.len() as f64).sqrt(),
    };
    let mut samples = vec![0.0; len * spec.n_dofs];
    for (c, &d) in columns.iter().zip(&spec.dofs) {
        for k in 0..len {
            samples[k * spec.n_dofs + d] += weight * c[k];
        }
    }
    Ok(gss_core::model::load_forcing(&samples, spec.n_dofs, dt, 0.0, 0, None)?)
}
