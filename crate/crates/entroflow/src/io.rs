//! Profile CSV files (`r,value`) and generic table writing.

use std::path::Path;
use std::sync::Arc;

use entroflow_core::model::{RadialGrid, RadialProfile};

use crate::error::{CliError, CliResult};
use crate::format::num;

/// Reads `(r, value)` rows from a CSV with header `r,value`.
pub fn read_pairs(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let head = rd.headers()?.clone();
    if head.len() != 2 || &head[0] != "r" || &head[1] != "value" {
        return Err(CliError::input(format!("{}: expected header r,value", path.display())));
    }
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (i, row) in rd.records().enumerate() {
        let row = row?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("{}: row {}: not a number: {s:?}", path.display(), i + 2)))
        };
        r.push(parse(&row[0])?);
        v.push(parse(&row[1])?);
    }
    Ok((r, v))
}

/// Reads a radial profile in dimension `dim`; the grid is the file's nodes.
pub fn read_profile(path: &Path, dim: f64) -> CliResult<RadialProfile> {
    let (r, v) = read_pairs(path)?;
    let grid = Arc::new(RadialGrid::from_nodes(r)?);
    Ok(RadialProfile::new(grid, v, dim)?)
}

pub fn profile_csv(p: &RadialProfile) -> String {
    let rows = p.nodes().iter().zip(p.values()).map(|(r, v)| vec![num(*r), num(*v)]);
    table(&["r", "value"], rows)
}

pub fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV is UTF-8")
}

/// Piecewise linear interpolant of tabulated data, constant beyond the ends.
pub fn interpolant(x: Vec<f64>, y: Vec<f64>) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let n = x.len();
        if t <= x[0] {
            return y[0];
        }
        if t >= x[n - 1] {
            return y[n - 1];
        }
        let k = x.partition_point(|v| *v <= t) - 1;
        let s = (t - x[k]) / (x[k + 1] - x[k]);
        y[k] + s * (y[k + 1] - y[k])
    }
}
