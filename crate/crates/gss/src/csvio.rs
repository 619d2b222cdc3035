//! CSV files: forcing input, trajectories and expansion payloads.
//!
//! Numbers are written as `{:.16e}` (17 significant digits, exact round trip)
//! with a header row. Readers accept an optional header and `#` comments.

use std::io::Write;
use std::path::Path;

use gss_core::model::{load_forcing, ForcingSignal};
use gss_core::{TimeGrid, Trajectory};

use crate::error::{config, io_error, Result};

pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| config(format!("csv: {e}")))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if let Some(first) = rows.first() {
                    if first.len() != v.len() {
                        return Err(config(format!("csv row {}: {} columns, expected {}", i + 1, v.len(), first.len())));
                    }
                }
                rows.push(v);
            }
            Err(_) if i == 0 => header = Some(rec.iter().map(str::to_string).collect()),
            Err(e) => return Err(config(format!("csv row {}: {e}", i + 1))),
        }
    }
    Ok(Table { header, rows })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Forcing from CSV text with `n_dofs` force columns, optionally preceded by a
/// time column. Without a time column `dt` is required.
pub fn parse_forcing(text: &str, n_dofs: usize, dt: Option<f64>, pad_seconds: f64) -> Result<ForcingSignal> {
    let table = parse_table(text)?;
    let cols = table.rows.first().map_or(0, |r| r.len());
    let (times, first_force) = if cols == n_dofs + 1 {
        (Some(table.rows.iter().map(|r| r[0]).collect::<Vec<_>>()), 1)
    } else if cols == n_dofs {
        (None, 0)
    } else {
        return Err(config(format!("forcing has {cols} columns; expected {n_dofs} forces with an optional time column")));
    };
    let dt = match (dt, &times) {
        (Some(dt), _) => dt,
        (None, Some(t)) if t.len() >= 2 => t[1] - t[0],
        (None, Some(_)) => return Err(config("forcing needs at least two samples")),
        (None, None) => return Err(config("forcing has no time column; pass the time step")),
    };
    if !(pad_seconds >= 0.0) {
        return Err(config("padding must be non-negative"));
    }
    let pad = (pad_seconds / dt).round() as usize;
    let samples: Vec<f64> = table.rows.iter().flat_map(|r| r[first_force..].iter().copied()).collect();
    let t0 = times.as_ref().map_or(0.0, |t| t[0]);
    Ok(load_forcing(&samples, n_dofs, dt, t0, pad, times.as_deref())?)
}

pub fn read_forcing(path: &Path, n_dofs: usize, dt: Option<f64>, pad_seconds: f64) -> Result<ForcingSignal> {
    parse_forcing(&read(path)?, n_dofs, dt, pad_seconds)
}

fn write_rows<W: Write>(mut w: W, header: &[String], grid: TimeGrid, data: &Trajectory, from: usize) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for k in from..data.len() {
        line.clear();
        line.push_str(&format!("{:.16e}", grid.time(k)));
        for i in 0..data.dim() {
            line.push_str(&format!(",{:.16e}", data.get(i, k)));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| io_error(path, e))
}

pub fn forcing_header(n: usize) -> Vec<String> {
    std::iter::once("t".to_string()).chain((0..n).map(|i| format!("g{i}"))).collect()
}

/// `t, x0..x{n-1}, v0..v{n-1}` for a mechanical state of dimension `2n`.
pub fn state_header(dim: usize) -> Vec<String> {
    let n = dim / 2;
    let mut h = vec!["t".to_string()];
    if dim == 2 * n {
        h.extend((0..n).map(|i| format!("x{i}")));
        h.extend((0..n).map(|i| format!("v{i}")));
    } else {
        h.extend((0..dim).map(|i| format!("z{i}")));
    }
    h
}

/// All rows, padding included.
pub fn write_forcing(path: &Path, forcing: &ForcingSignal) -> Result<()> {
    let w = create(path)?;
    write_rows(w, &forcing_header(forcing.n_dofs()), forcing.grid(), forcing.values(), 0).map_err(|e| io_error(path, e))
}

/// Trajectory samples from index `from` on.
pub fn write_trajectory(path: &Path, header: &[String], grid: TimeGrid, data: &Trajectory, from: usize) -> Result<()> {
    if header.len() != data.dim() + 1 {
        return Err(config("header does not match the trajectory"));
    }
    let w = create(path)?;
    write_rows(w, header, grid, data, from).map_err(|e| io_error(path, e))
}

/// Trajectory with a leading time column; returns the time samples too.
pub fn read_trajectory(path: &Path, dim: usize) -> Result<(Vec<f64>, Trajectory)> {
    let table = parse_table(&read(path)?)?;
    if table.rows.iter().any(|r| r.len() != dim + 1) {
        return Err(config(format!("{}: expected {} columns", path.display(), dim + 1)));
    }
    let times = table.rows.iter().map(|r| r[0]).collect();
    let rows: Vec<Vec<f64>> = table.rows.into_iter().map(|r| r[1..].to_vec()).collect();
    Ok((times, Trajectory::from_time_rows(dim, &rows)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_time_column_are_optional() {
        let a = parse_forcing("t,g0\n0.0,1.0\n0.5,2.0\n1.0,3.0\n", 1, None, 1.0).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a.pad(), 2);
        assert_eq!(a.dt(), 0.5);
        assert_eq!(a.values().row(0), &[0.0, 0.0, 1.0, 2.0, 3.0]);
        let b = parse_forcing("1.0\n2.0\n3.0\n", 1, Some(0.5), 0.0).unwrap();
        assert_eq!(b.values().row(0), &[1.0, 2.0, 3.0]);
        assert!(parse_forcing("1.0\n2.0\n", 1, None, 0.0).is_err());
        assert!(parse_forcing("0.0,1.0\n0.5,2.0\n1.2,3.0\n", 1, None, 0.0).is_err());
        assert!(parse_forcing("1,2,3\n4,5,6\n", 1, None, 0.0).is_err());
    }

    #[test]
    fn forcing_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = ForcingSignal::from_fn(2, 0.1, 0.3, 50, |t, out| {
            out[0] = (t * 1.7).sin() / 3.0;
            out[1] = 1e-300 * t - 7.0 / 9.0;
        })
        .unwrap();
        let p = dir.path().join("f.csv");
        write_forcing(&p, &f).unwrap();
        let g = read_forcing(&p, 2, Some(0.1), 0.0).unwrap();
        assert_eq!(g.values(), f.values());
    }
}
