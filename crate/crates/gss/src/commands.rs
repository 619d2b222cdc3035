//! The work behind each CLI command, independent of argument parsing.

use std::time::{Duration, Instant};

use gss_core::bench::nmte;
use gss_core::gss::{
    compute_quasiperiodic_gss, compute_taylor_gss, evaluate_pade, fit_quasiperiodic, frc_sweep, pade_resum, Backend,
    FrcPoint, GssExpansion, GssOptions, PadeGss, TorusOptions,
};
use gss_core::model::{ForcingSignal, MechanicalSystem};
use gss_core::oracle::newmark_full;
use gss_core::spectral::{check_contraction, decompose, decompose_general, select_modes, ContractionReport};
use gss_core::{Complex64, TimeGrid, Trajectory};

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    #[default]
    Kernel,
    Newmark,
    /// Closed-form quasiperiodic kernel on harmonics fitted to the forcing.
    Qp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputeSettings {
    pub order: usize,
    pub backend: BackendChoice,
    pub eps_trunc: f64,
    /// Evaluation amplitude; defaults to the forcing's own.
    pub delta: Option<f64>,
    /// Base frequencies for the `Qp` backend.
    pub frequencies: Vec<f64>,
    pub max_harmonic: usize,
}

impl Default for ComputeSettings {
    fn default() -> Self {
        Self {
            order: 5,
            backend: BackendChoice::Kernel,
            eps_trunc: 1e-3,
            delta: None,
            frequencies: Vec::new(),
            max_harmonic: 5,
        }
    }
}

pub struct ComputeOutput {
    pub expansion: GssExpansion,
    pub delta: f64,
    pub trajectory: Trajectory,
    pub wall: Duration,
}

pub fn compute(system: &MechanicalSystem, forcing: &ForcingSignal, s: &ComputeSettings) -> Result<ComputeOutput> {
    if s.order == 0 {
        return Err(config("order must be at least 1"));
    }
    let start = Instant::now();
    let expansion = match s.backend {
        BackendChoice::Kernel | BackendChoice::Newmark => {
            let options = GssOptions {
                backend: if s.backend == BackendChoice::Kernel { Backend::Kernel } else { Backend::Newmark },
                eps_trunc: s.eps_trunc,
                ..GssOptions::default()
            };
            compute_taylor_gss(system, forcing, s.order, &options)?
        }
        BackendChoice::Qp => {
            if s.frequencies.is_empty() {
                return Err(config("the qp backend needs base frequencies"));
            }
            // fit on the recorded part, evaluate on the whole grid
            let pad = forcing.pad();
            let grid = forcing.grid();
            let rec = TimeGrid::new(grid.dt, grid.time(pad), grid.len - pad)?;
            let qp = fit_quasiperiodic(&forcing.values().tail(pad), rec, &s.frequencies, s.max_harmonic)?;
            let options = TorusOptions { max_harmonic: s.max_harmonic, ..TorusOptions::default() };
            let mut e = compute_quasiperiodic_gss(system, &qp, s.order, &options)?.to_expansion(grid)?;
            e.pad = pad;
            e
        }
    };
    let delta = s.delta.unwrap_or(forcing.max_magnitude());
    let trajectory = expansion.evaluate_at_amplitude(delta);
    Ok(ComputeOutput { expansion, delta, trajectory, wall: start.elapsed() })
}

pub struct CompareOutput {
    pub gss: ComputeOutput,
    pub newmark: Trajectory,
    pub newmark_wall: Duration,
    pub nmte: f64,
}

impl CompareOutput {
    /// Newmark wall time over GSS wall time.
    pub fn speedup(&self) -> f64 {
        self.newmark_wall.as_secs_f64() / self.gss.wall.as_secs_f64().max(1e-12)
    }
}

/// GSS and full Newmark from rest on the same grid; NMTE after the padding.
pub fn compare(system: &MechanicalSystem, forcing: &ForcingSignal, s: &ComputeSettings) -> Result<CompareOutput> {
    let gss = compute(system, forcing, s)?;
    let scaled;
    let f = match s.delta {
        Some(d) if forcing.max_magnitude() > 0.0 => {
            scaled = forcing.scaled(d / forcing.max_magnitude());
            &scaled
        }
        _ => forcing,
    };
    let start = Instant::now();
    let newmark = newmark_full(system, f, &vec![0.0; 2 * system.n()])?;
    let newmark_wall = start.elapsed();
    let err = nmte(&gss.trajectory, &newmark, forcing.pad());
    Ok(CompareOutput { gss, newmark, newmark_wall, nmte: err })
}

pub fn pade(expansion: &GssExpansion, l: usize, m: usize, delta: f64) -> Result<(PadeGss, Trajectory)> {
    let p = pade_resum(expansion, l, m)?;
    let z = evaluate_pade(&p, delta)?;
    Ok((p, z))
}

pub fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn frc(
    system: &MechanicalSystem,
    omegas: &[f64],
    dofs: &[usize],
    probe: usize,
    delta: f64,
    order: usize,
    max_harmonic: usize,
) -> Result<Vec<FrcPoint>> {
    let n = system.n();
    if dofs.is_empty() || dofs.iter().any(|&d| d >= n) {
        return Err(config(format!("forced dofs {dofs:?} invalid for {n} dofs")));
    }
    if probe >= n {
        return Err(config(format!("probe dof {probe} out of range")));
    }
    let mut pattern = vec![0.0; n];
    for &d in dofs {
        pattern[d] = 1.0;
    }
    let options = TorusOptions { max_harmonic, ..TorusOptions::default() };
    Ok(frc_sweep(system, omegas, &pattern, probe, delta, order, &options)?)
}

pub struct Diagnosis {
    pub eigenvalues: Vec<Complex64>,
    pub structural: bool,
    pub gamma: f64,
    pub report: ContractionReport,
    /// Modes kept at (dt, eps) when a time step is given.
    pub retained: Option<Vec<usize>>,
}

pub fn diagnose(system: &MechanicalSystem, ball: f64, delta: f64, dt: Option<f64>, eps: f64) -> Result<Diagnosis> {
    let sp = decompose(system)?;
    let general = decompose_general(system)?;
    let report = check_contraction(system, &general, ball, delta, 256)?;
    Ok(Diagnosis {
        eigenvalues: general.eigenvalues(),
        structural: sp.is_structural(),
        gamma: general.gamma,
        report,
        retained: dt.map(|dt| select_modes(&sp, dt, eps)),
    })
}
