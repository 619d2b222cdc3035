//! Expansion and Pade containers: a directory holding `manifest.toml` plus one
//! CSV per coefficient (`order_001.csv`, ... or `numerator_001.csv`, ...).

use std::path::Path;

use gss_core::composition::CoefficientTensor;
use gss_core::gss::{BackendTag, DivergenceWarning, GssExpansion, PadeConditioning, PadeGss};
use gss_core::{Complex64, TimeGrid, Trajectory};
use serde::{Deserialize, Serialize};

use crate::csvio::{read_trajectory, state_header, write_trajectory};
use crate::error::{config, io_error, Result};

const EXPANSION_FORMAT: &str = "gss-expansion";
const PADE_FORMAT: &str = "gss-pade";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct GridEntry {
    dt: f64,
    t_start: f64,
    len: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct DivergenceEntry {
    half_order: usize,
    sup_half: f64,
    sup_full: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExpansionManifest {
    format: String,
    version: u32,
    dim: usize,
    order: usize,
    delta_ref: f64,
    backend: String,
    pad: usize,
    retained_modes: usize,
    /// `[re, im]` pairs.
    eigenvalues: Vec<[f64; 2]>,
    grid: GridEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    divergence: Option<DivergenceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConditioningEntry {
    singular_values: Vec<f64>,
    ill_conditioned: bool,
    residual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PadeManifest {
    format: String,
    version: u32,
    dim: usize,
    l: usize,
    m: usize,
    delta_ref: f64,
    /// One row of `b_1..b_M` per coordinate.
    denominators: Vec<Vec<f64>>,
    grid: GridEntry,
    conditioning: Vec<ConditioningEntry>,
}

fn write_manifest<T: Serialize>(dir: &Path, m: &T) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let text = toml::to_string(m).map_err(|e| config(format!("manifest: {e}")))?;
    let p = dir.join("manifest.toml");
    std::fs::write(&p, text).map_err(|e| io_error(&p, e))
}

fn read_manifest<T: for<'de> Deserialize<'de>>(dir: &Path) -> Result<T> {
    let p = dir.join("manifest.toml");
    let text = std::fs::read_to_string(&p).map_err(|e| io_error(&p, e))?;
    toml::from_str(&text).map_err(|e| config(format!("{}: {e}", p.display())))
}

fn grid_entry(g: TimeGrid) -> GridEntry {
    GridEntry { dt: g.dt, t_start: g.t_start, len: g.len }
}

fn payload(dir: &Path, stem: &str, nu: usize) -> std::path::PathBuf {
    dir.join(format!("{stem}_{nu:03}.csv"))
}

fn read_payload(dir: &Path, stem: &str, nu: usize, dim: usize, grid: TimeGrid) -> Result<Trajectory> {
    let p = payload(dir, stem, nu);
    let (_, z) = read_trajectory(&p, dim)?;
    if z.len() != grid.len {
        return Err(config(format!("{}: {} rows, manifest says {}", p.display(), z.len(), grid.len)));
    }
    Ok(z)
}

pub fn save_expansion(dir: &Path, e: &GssExpansion) -> Result<()> {
    let grid = e.grid();
    let manifest = ExpansionManifest {
        format: EXPANSION_FORMAT.into(),
        version: VERSION,
        dim: e.dim(),
        order: e.order(),
        delta_ref: e.delta_ref,
        backend: e.backend.as_str().into(),
        pad: e.pad,
        retained_modes: e.retained_modes,
        eigenvalues: e.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
        grid: grid_entry(grid),
        divergence: e.divergence.as_ref().map(|d| DivergenceEntry {
            half_order: d.half_order,
            sup_half: d.sup_half,
            sup_full: d.sup_full,
        }),
    };
    write_manifest(dir, &manifest)?;
    let header = state_header(e.dim());
    for nu in 1..=e.order() {
        write_trajectory(&payload(dir, "order", nu), &header, grid, e.coeffs.order(nu)?, 0)?;
    }
    Ok(())
}

pub fn load_expansion(dir: &Path) -> Result<GssExpansion> {
    let m: ExpansionManifest = read_manifest(dir)?;
    if m.format != EXPANSION_FORMAT || m.version != VERSION {
        return Err(config(format!("{}: not a version {VERSION} expansion container", dir.display())));
    }
    let backend = BackendTag::parse(&m.backend).ok_or_else(|| config(format!("unknown backend tag `{}`", m.backend)))?;
    let grid = TimeGrid::new(m.grid.dt, m.grid.t_start, m.grid.len)?;
    let mut coeffs = CoefficientTensor::new(m.dim, grid, m.order);
    for nu in 1..=m.order {
        coeffs.push_order(read_payload(dir, "order", nu, m.dim, grid)?)?;
    }
    Ok(GssExpansion {
        coeffs,
        delta_ref: m.delta_ref,
        backend,
        pad: m.pad,
        retained_modes: m.retained_modes,
        eigenvalues: m.eigenvalues.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        divergence: m.divergence.map(|d| DivergenceWarning {
            half_order: d.half_order,
            sup_half: d.sup_half,
            sup_full: d.sup_full,
        }),
    })
}

pub fn save_pade(dir: &Path, p: &PadeGss) -> Result<()> {
    let manifest = PadeManifest {
        format: PADE_FORMAT.into(),
        version: VERSION,
        dim: p.dim(),
        l: p.l,
        m: p.m,
        delta_ref: p.delta_ref,
        denominators: p.denominators.clone(),
        grid: grid_entry(p.grid),
        conditioning: p
            .conditioning
            .iter()
            .map(|c| ConditioningEntry {
                singular_values: c.singular_values.clone(),
                ill_conditioned: c.ill_conditioned,
                residual: c.residual,
            })
            .collect(),
    };
    write_manifest(dir, &manifest)?;
    let header = state_header(p.dim());
    for (nu, a) in p.numerators.iter().enumerate() {
        write_trajectory(&payload(dir, "numerator", nu + 1), &header, p.grid, a, 0)?;
    }
    Ok(())
}

pub fn load_pade(dir: &Path) -> Result<PadeGss> {
    let m: PadeManifest = read_manifest(dir)?;
    if m.format != PADE_FORMAT || m.version != VERSION {
        return Err(config(format!("{}: not a version {VERSION} Pade container", dir.display())));
    }
    if m.denominators.len() != m.dim || m.denominators.iter().any(|b| b.len() != m.m) {
        return Err(config("denominator table does not match dim and M"));
    }
    let grid = TimeGrid::new(m.grid.dt, m.grid.t_start, m.grid.len)?;
    let numerators = (1..=m.l).map(|nu| read_payload(dir, "numerator", nu, m.dim, grid)).collect::<Result<Vec<_>>>()?;
    Ok(PadeGss {
        l: m.l,
        m: m.m,
        numerators,
        denominators: m.denominators,
        conditioning: m
            .conditioning
            .into_iter()
            .map(|c| PadeConditioning { singular_values: c.singular_values, ill_conditioned: c.ill_conditioned, residual: c.residual })
            .collect(),
        grid,
        delta_ref: m.delta_ref,
    })
}
