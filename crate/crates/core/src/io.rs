//! Plain-text exchange formats. Every CSV starts with a `#` metadata line;
//! tabular files follow it with one schema line, matrix files go straight
//! to comma-separated rows.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::recovery::RecoveryResult;
use crate::signal::{SampleStats, SignDataset};

fn meta_line(pairs: &[(&str, String)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# {}", body.join(","))
}

/// Parse `# k=v,k=v` into pairs.
pub fn parse_meta(line: &str) -> Result<Vec<(String, String)>> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("expected a '#' metadata line, got '{line}'")))?;
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("metadata entry '{kv}' is not key=value")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn meta_value<T: std::str::FromStr>(meta: &[(String, String)], key: &str) -> Result<T> {
    let raw = meta
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Parse(format!("metadata is missing '{key}'")))?;
    raw.parse().map_err(|_| Error::Parse(format!("metadata '{key}' has invalid value '{raw}'")))
}

pub fn write_dataset<W: Write>(mut w: W, ds: &SignDataset) -> Result<()> {
    writeln!(
        w,
        "{}",
        meta_line(&[
            ("N", ds.dim().to_string()),
            ("N_x", ds.snapshots().to_string()),
            ("seed", ds.seed.to_string()),
            ("d", ds.d.to_string()),
            ("sigma", ds.sigma_diag.to_string()),
        ])
    )?;
    for row in ds.y.row_iter() {
        let cells: Vec<&str> = row.iter().map(|&v| if v > 0 { "1" } else { "-1" }).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Read a dataset written by [`write_dataset`]; thresholds and inputs are not stored.
pub fn read_dataset<R: BufRead>(r: R) -> Result<SignDataset> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty dataset file".into()))??;
    let meta = parse_meta(&header)?;
    let n: usize = meta_value(&meta, "N")?;
    let n_x: usize = meta_value(&meta, "N_x")?;
    let mut values = Vec::with_capacity(n * n_x);
    let mut rows = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = values.len();
        for cell in line.split(',') {
            values.push(match cell.trim() {
                "1" | "+1" => 1i8,
                "-1" => -1i8,
                other => return Err(Error::Parse(format!("row {rows}: sign entry '{other}' is not ±1"))),
            });
        }
        if values.len() - before != n_x {
            return Err(Error::Parse(format!("row {rows} has {} entries, expected {n_x}", values.len() - before)));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!("dataset has {rows} rows, expected {n}")));
    }
    Ok(SignDataset {
        y: DMatrix::from_row_slice(n, n_x, &values),
        tau: None,
        x: None,
        seed: meta_value(&meta, "seed")?,
        d: meta_value(&meta, "d")?,
        sigma_diag: meta_value(&meta, "sigma")?,
    })
}

pub fn write_stats<W: Write>(mut w: W, stats: &SampleStats, n_x: usize) -> Result<()> {
    writeln!(w, "{}", meta_line(&[("N", stats.r_y_lag.len().to_string()), ("N_x", n_x.to_string())]))?;
    writeln!(w, "lag,r_y_lag,mu_hat")?;
    for (l, v) in stats.r_y_lag.iter().enumerate() {
        writeln!(w, "{l},{v},{}", stats.mu_hat)?;
    }
    Ok(())
}

/// Matrix file: `# N=..,N=..,d=..,sigma=..,p0=..` then row-major values.
pub fn write_matrix<W: Write>(mut w: W, m: &DMatrix<f64>, d: f64, sigma: f64, p0: f64) -> Result<()> {
    writeln!(
        w,
        "# N={},N={},d={d},sigma={sigma},p0={p0}",
        m.nrows(),
        m.ncols()
    )?;
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))??;
    parse_meta(&header)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad matrix entry '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("matrix rows differ in length".into()));
    }
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

/// Generic table: metadata line, schema line, rows.
pub fn write_table<W: Write>(mut w: W, meta: &[(&str, String)], columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(w, "{}", meta_line(meta))?;
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::Shape(format!("row has {} cells, schema has {}", row.len(), columns.len())));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_result_json<W: Write>(w: W, res: &RecoveryResult) -> Result<()> {
    serde_json::to_writer_pretty(w, res).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_result_json<R: std::io::Read>(r: R) -> Result<RecoveryResult> {
    serde_json::from_reader(r).map_err(|e| Error::Parse(e.to_string()))
}
