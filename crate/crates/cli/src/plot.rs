//! CSV series for external plotting tools.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::fieldio::{format_csv, read_csv, read_field};
use crate::manifest::RunManifest;

/// Header of each series.
pub fn schema(series: &str) -> Option<&'static [&'static str]> {
    match series {
        "energy" => Some(&["t", "kinetic", "potential", "damping_integral"]),
        "residuals" => Some(&["iter", "residual"]),
        "snapshot" => Some(&["x", "u"]),
        _ => None,
    }
}

/// `time_index` selects the snapshot level (default: the last one).
pub fn emit(dir: &Path, series: &str, time_index: Option<usize>) -> Result<String> {
    let manifest = RunManifest::load(dir)?;
    let missing = || CliError::MissingSeries {
        series: series.to_string(),
        dir: dir.to_path_buf(),
        available: if manifest.series.is_empty() {
            "none".into()
        } else {
            manifest
                .series
                .keys()
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        },
    };
    let columns = schema(series).ok_or_else(missing)?;
    let file = dir.join(manifest.series.get(series).ok_or_else(missing)?);
    if series == "snapshot" {
        let g = read_field(&file)?;
        if g.domain.dim() != 1 {
            return Err(CliError::Artifact {
                path: file,
                message: "snapshots are available for 1D fields only".into(),
            });
        }
        let last = g.values.nrows() - 1;
        let n = time_index.unwrap_or(last);
        if n > last {
            return Err(CliError::Config(format!(
                "time index {n} exceeds the last level {last}"
            )));
        }
        let rows =
            (0..g.domain.n_nodes()).map(|j| vec![g.domain.coordinate(0, j), g.values[[n, j]]]);
        return Ok(format_csv(columns, rows));
    }
    let table = read_csv(&file)?;
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| {
            table.column(c).ok_or_else(|| CliError::Artifact {
                path: file.clone(),
                message: format!("missing column `{c}`"),
            })
        })
        .collect::<Result<_>>()?;
    Ok(format_csv(
        columns,
        table
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect()),
    ))
}
