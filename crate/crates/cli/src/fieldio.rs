//! Text field files and CSV tables.
//!
//! A field file is a fixed header followed by the `(n_times, n_nodes)` nodal
//! values, one time level per line:
//!
//! ```text
//! fracwave-field 1
//! dim 1
//! lengths 3.141592653589793
//! nodes 64
//! t_final 4
//! steps 256
//! values 257 64
//! 0e0 0e0 ...
//! ```
//!
//! Values use the shortest exponent form that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use fracwave::spectral::{DomainSpec, GridSeries, TimeGrid};
use fracwave::GridSeries64;
use ndarray::Array2;

use crate::error::{CliError, Result};

const MAGIC: &str = "fracwave-field 1";

fn join(values: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v:e}").unwrap();
    }
    s
}

pub fn format_field(g: &GridSeries64) -> String {
    let d = &g.domain;
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "dim {}", d.dim()).unwrap();
    writeln!(out, "lengths {}", join(d.lengths().iter().copied())).unwrap();
    let nodes: Vec<String> = d.n_interior().iter().map(|n| n.to_string()).collect();
    writeln!(out, "nodes {}", nodes.join(" ")).unwrap();
    writeln!(out, "t_final {:e}", g.time.t_final()).unwrap();
    writeln!(out, "steps {}", g.time.n_steps()).unwrap();
    writeln!(out, "values {} {}", g.values.nrows(), g.values.ncols()).unwrap();
    for row in g.values.rows() {
        writeln!(out, "{}", join(row.iter().copied())).unwrap();
    }
    out
}

pub fn parse_field(text: &str, path: &Path) -> Result<GridSeries64> {
    let bad = |message: String| CliError::Artifact {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines().enumerate();
    let mut next = |key: &str| -> Result<Vec<String>> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| bad(format!("truncated before `{key}`")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(bad(format!("line {}: expected `{key}`", i + 1)));
        }
        Ok(parts.map(str::to_string).collect())
    };
    let floats = |v: Vec<String>| -> Result<Vec<f64>> {
        v.iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("bad number `{s}`")))
            })
            .collect()
    };
    let ints = |v: Vec<String>| -> Result<Vec<usize>> {
        v.iter()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| bad(format!("bad integer `{s}`")))
            })
            .collect()
    };
    if next("fracwave-field")? != ["1"] {
        return Err(bad("unsupported field file version".into()));
    }
    let dim = ints(next("dim")?)?;
    let lengths = floats(next("lengths")?)?;
    let nodes = ints(next("nodes")?)?;
    if dim.len() != 1 || lengths.len() != dim[0] || nodes.len() != dim[0] {
        return Err(bad("inconsistent dimension header".into()));
    }
    let t_final = floats(next("t_final")?)?;
    let steps = ints(next("steps")?)?;
    let shape = ints(next("values")?)?;
    if t_final.len() != 1 || steps.len() != 1 || shape.len() != 2 {
        return Err(bad("malformed time or shape header".into()));
    }
    let domain = DomainSpec::new(lengths, nodes).map_err(|e| bad(e.to_string()))?;
    let time = TimeGrid::new(t_final[0], steps[0]).map_err(|e| bad(e.to_string()))?;
    let mut values = Vec::with_capacity(shape[0] * shape[1]);
    let mut rows = 0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = floats(line.split_whitespace().map(str::to_string).collect())?;
        if row.len() != shape[1] {
            return Err(bad(format!(
                "line {}: expected {} values, got {}",
                i + 1,
                shape[1],
                row.len()
            )));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != shape[0] {
        return Err(bad(format!("expected {} rows, got {rows}", shape[0])));
    }
    let values =
        Array2::from_shape_vec((shape[0], shape[1]), values).map_err(|e| bad(e.to_string()))?;
    GridSeries::new(domain, time, values).map_err(|e| bad(e.to_string()))
}

pub fn read_field(path: &Path) -> Result<GridSeries64> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse_field(&text, path)
}

/// A header line plus rows; numbers in shortest round-trip form.
pub fn format_csv(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let bad = |message: String| CliError::Artifact {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("empty table".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("line {}: bad number `{s}`", i + 2)))
            })
            .collect::<Result<_>>()?;
        if row.len() != columns.len() {
            return Err(bad(format!(
                "line {}: expected {} columns",
                i + 2,
                columns.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}
