//! System description files (TOML).
//!
//! ```toml
//! n = 1
//! mass = [[1.0]]
//! damping = [[0.2]]
//! stiffness = [[1.0]]
//! damping_class = "auto"   # or "general", "structural"
//!
//! [[terms]]                 # f(x, v) entries: coefficient * z^exponents on `target_dof`
//! exponents = [3, 0]
//! target_dof = 0
//! coefficient = 0.5
//! ```
//!
//! Instead of matrices a `[preset]` table may name one of the bundled systems:
//! `kind = "chain"` (`n`, `mass`, `k_lin`, `k_cubic`, `c`), `kind = "duffing"`
//! (`mass`, `c`, `k_lin`, `k_cubic`) or `kind = "gyroscopic"` (`spin`).

use std::path::Path;

use gss_core::bench::{build_duffing, build_gyroscopic_2dof, build_oscillator_chain};
use gss_core::model::{build_system, DampingClass, DampingOverride, MechanicalSystem, MultiIndex, PolynomialField};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{config, io_error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingChoice {
    #[default]
    Auto,
    General,
    Structural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub target_dof: usize,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    Chain { n: usize, mass: f64, k_lin: f64, k_cubic: f64, c: f64 },
    Duffing { mass: f64, c: f64, k_lin: f64, k_cubic: f64 },
    Gyroscopic { spin: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub damping_class: DampingChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<Term>,
}

fn matrix(name: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(config(format!("{name} must be {n} x {n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl SystemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config(format!("system config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("system config serializes")
    }

    pub fn build(&self) -> Result<MechanicalSystem> {
        if let Some(p) = &self.preset {
            if self.mass.is_some() || self.damping.is_some() || self.stiffness.is_some() || !self.terms.is_empty() {
                return Err(config("a preset excludes explicit matrices and terms"));
            }
            let s = match *p {
                Preset::Chain { n, mass, k_lin, k_cubic, c } => build_oscillator_chain(n, mass, k_lin, k_cubic, c)?,
                Preset::Duffing { mass, c, k_lin, k_cubic } => build_duffing(mass, c, k_lin, k_cubic)?,
                Preset::Gyroscopic { spin } => build_gyroscopic_2dof(spin)?,
            };
            return Ok(s);
        }
        let n = self.n.ok_or_else(|| config("missing key `n`"))?;
        let get = |name: &str, m: &Option<Vec<Vec<f64>>>| {
            m.as_ref().ok_or_else(|| config(format!("missing key `{name}`"))).and_then(|r| matrix(name, r, n))
        };
        let m = get("mass", &self.mass)?;
        let c = get("damping", &self.damping)?;
        let k = get("stiffness", &self.stiffness)?;
        let mut field = PolynomialField::new(2 * n, n);
        for (i, t) in self.terms.iter().enumerate() {
            if t.exponents.len() != 2 * n {
                return Err(config(format!("term {i}: {} exponents for {} state variables", t.exponents.len(), 2 * n)));
            }
            if t.target_dof >= n {
                return Err(config(format!("term {i}: target_dof {} out of range", t.target_dof)));
            }
            field.add_scalar_term(MultiIndex::new(t.exponents.clone()), t.target_dof, t.coefficient)?;
        }
        let over = match self.damping_class {
            DampingChoice::Auto => DampingOverride::Auto,
            DampingChoice::General => DampingOverride::General,
            DampingChoice::Structural => DampingOverride::Structural,
        };
        Ok(build_system(m, c, k, field, over)?)
    }

    /// Explicit description of `system` (matrices, one term per nonzero entry).
    pub fn from_system(system: &MechanicalSystem) -> Self {
        let rows = |a: &DMatrix<f64>| (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
        let mut terms = Vec::new();
        for (m, c) in system.nonlinearity().terms() {
            for (dof, &v) in c.iter().enumerate() {
                if v != 0.0 {
                    terms.push(Term { exponents: m.exponents().to_vec(), target_dof: dof, coefficient: v });
                }
            }
        }
        SystemConfig {
            n: Some(system.n()),
            mass: Some(rows(system.mass())),
            damping: Some(rows(system.damping())),
            stiffness: Some(rows(system.stiffness())),
            damping_class: match system.damping_class() {
                DampingClass::General => DampingChoice::General,
                DampingClass::Structural { .. } => DampingChoice::Structural,
            },
            preset: None,
            terms,
        }
    }
}

pub fn load_system(path: &Path) -> Result<MechanicalSystem> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    SystemConfig::parse(&text)?.build()
}
