//! CSV and JSON files.
//!
//! Floats in CSV use `{:.16e}`, i.e. 17 significant digits, which re-parse
//! to the same `f64`. JSON numbers use serde_json's shortest round-trip
//! form.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use inls_core::dynamics::Trajectory;
use inls_core::grid::make_grid;
use inls_core::{Complex64, RadialField, RadialGrid};
use serde::Serialize;

use crate::error::{LabError, LabResult};

pub const FIELD_HEADER: [&str; 3] = ["r", "re", "im"];
pub const TRAJECTORY_HEADER: [&str; 9] =
    ["t", "mass", "energy", "kinetic", "potential", "virial", "variance", "grad_norm", "dist_to_Q"];

/// Relative tolerance when matching file nodes to a cell-centred grid.
const NODE_RTOL: f64 = 1e-12;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => LabError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        LabError::Invalid(format!("{}: {e}", path.display()))
    }
}

/// Writes a table of pre-formatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> LabResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn write_field(path: &Path, u: &RadialField) -> LabResult<()> {
    let rows: Vec<Vec<String>> =
        u.grid().nodes().iter().zip(u.values()).map(|(r, v)| vec![fmt_f64(*r), fmt_f64(v.re), fmt_f64(v.im)]).collect();
    write_table(path, &FIELD_HEADER, &rows)
}

/// Reads an `r,re,im` file and rebuilds the cell-centred grid it lives on.
pub fn read_field(path: &Path, dim: u32) -> LabResult<RadialField> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().map(str::trim).ne(FIELD_HEADER) {
        return Err(LabError::Invalid(format!(
            "{}: expected header r,re,im, found {}",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut r = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |k: usize| -> LabResult<f64> {
            rec.get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| LabError::Invalid(format!("{}: bad number in row {}", path.display(), line + 2)))
        };
        r.push(num(0)?);
        values.push(Complex64::new(num(1)?, num(2)?));
    }
    let grid = grid_from_nodes(&r, dim).map_err(|msg| LabError::Invalid(format!("{}: {msg}", path.display())))?;
    Ok(RadialField::new(grid, values)?)
}

fn grid_from_nodes(r: &[f64], dim: u32) -> Result<Arc<RadialGrid>, String> {
    let m = r.len();
    if m < 2 {
        return Err(format!("{m} rows is too few for a grid"));
    }
    let h = (r[m - 1] - r[0]) / (m - 1) as f64;
    if !(h > 0.0) {
        return Err("radii must be strictly increasing".into());
    }
    let grid = make_grid(dim, m as f64 * h, m).map_err(|e| e.to_string())?;
    let radius = grid.radius();
    for (i, (a, b)) in r.iter().zip(grid.nodes()).enumerate() {
        if (a - b).abs() > NODE_RTOL * radius {
            return Err(format!("row {} radius {a} is not on the cell-centred grid (expected {b})", i + 2));
        }
    }
    Ok(grid)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> LabResult<()> {
    let rows: Vec<Vec<String>> = traj
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt_f64(s.t),
                fmt_f64(s.mass),
                fmt_f64(s.energy),
                fmt_f64(s.kinetic),
                fmt_f64(s.potential),
                fmt_f64(s.virial),
                fmt_f64(s.variance),
                fmt_f64(s.grad_norm),
                s.distance.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(path, &TRAJECTORY_HEADER, &rows)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> LabResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Invalid(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> LabResult<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -2.2250738585072014e-308, 5e-324, f64::MAX] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let g = make_grid(3, 7.5, 300).unwrap();
        let u = RadialField::from_fn(g, |r| Complex64::new((-r * r).exp(), r.sin() / 3.0)).unwrap();
        write_field(&path, &u).unwrap();
        let v = read_field(&path, 3).unwrap();
        assert_eq!(v.grid().len(), 300);
        assert!((v.grid().radius() - 7.5).abs() < 1e-12);
        assert_eq!(u.values(), v.values());
    }

    #[test]
    fn off_grid_nodes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(&path, "r,re,im\n0.5,1,0\n1.5,1,0\n2.7,1,0\n").unwrap();
        assert!(matches!(read_field(&path, 3), Err(LabError::Invalid(_))));
        std::fs::write(&path, "x,re,im\n0.5,1,0\n").unwrap();
        assert!(matches!(read_field(&path, 3), Err(LabError::Invalid(_))));
    }
}
