//! Cartesian parameter sweeps over independent networks.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{ConfigError, HarnessError};
use crate::substrate::Params;

use super::config::ExperimentConfig;
use super::golden;
use super::run::{label_set_hash, run_experiment};

/// Parameter name to candidate values. Keys are `Params` field names.
pub type Grid = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: BTreeMap<String, f64>,
    pub fixated_chunks: usize,
    pub label_hash: String,
    pub fig1a: bool,
    pub fig1b: bool,
}

/// Parse a grid file: a TOML table of arrays, optionally under `[grid]`.
pub fn parse_grid(text: &str, origin: &str) -> Result<Grid, ConfigError> {
    let parse_err = |m: String| ConfigError::Parse { path: origin.into(), message: m };
    let mut table: toml::Table = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if let Some(toml::Value::Table(inner)) = table.remove("grid") {
        table = inner;
    }
    let mut grid = Grid::new();
    for (k, v) in table {
        let arr = v.as_array().ok_or_else(|| ConfigError::invalid(format!("grid.{k}"), "expected an array"))?;
        let vals = arr
            .iter()
            .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| ConfigError::invalid(format!("grid.{k}"), "values must be numbers"))?;
        grid.insert(k, vals);
    }
    Ok(grid)
}

pub fn load_grid(path: &Path) -> Result<Grid, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_grid(&text, &path.display().to_string())
}

/// `base` with the named fields replaced.
pub fn apply_cell(base: &Params, cell: &BTreeMap<String, f64>) -> Result<Params, ConfigError> {
    let mut v = toml::Value::try_from(base).expect("params serialize");
    let t = v.as_table_mut().expect("table");
    for (k, x) in cell {
        if !t.contains_key(k) {
            return Err(ConfigError::invalid(format!("grid.{k}"), "not a substrate parameter"));
        }
        t.insert(k.clone(), toml::Value::Float(*x));
    }
    let p: Params = v.try_into().map_err(|e: toml::de::Error| ConfigError::invalid("grid", e))?;
    p.validate().map_err(|e| ConfigError::invalid("grid", e))?;
    Ok(p)
}

/// All cells of the grid, in key order with the last key varying fastest.
pub fn cells(grid: &Grid) -> Vec<BTreeMap<String, f64>> {
    let mut out = vec![BTreeMap::new()];
    for (k, vals) in grid {
        out = out
            .into_iter()
            .flat_map(|c| {
                vals.iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(k.clone(), *v);
                    c
                })
            })
            .collect();
    }
    out
}

/// Run every cell (in parallel); rows come back in cell order.
pub fn sweep(grid: &Grid, base: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let cells = cells(grid);
    let cfgs = cells
        .iter()
        .map(|c| {
            let mut cfg = base.clone();
            cfg.params = apply_cell(&base.params, c)?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    cfgs.par_iter()
        .zip(cells.par_iter())
        .map(|(cfg, cell)| {
            let out = run_experiment(cfg)?;
            let labels = golden::fixated_chunk_labels(&out.network);
            Ok(SweepRow {
                cell: cell.clone(),
                fixated_chunks: labels.len(),
                label_hash: label_set_hash(&labels),
                fig1a: golden::check_fig1a(&out.network, false).is_ok(),
                fig1b: golden::check_fig1b(&out.network).is_ok(),
            })
        })
        .collect()
}

/// CSV table: one column per grid key, then the result columns.
pub fn to_csv(grid: &Grid, rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = grid.keys().cloned().collect();
    header.extend(["fixated_chunks", "label_hash", "fig1a", "fig1b"].map(String::from));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec: Vec<String> = grid.keys().map(|k| r.cell[k].to_string()).collect();
        rec.extend([r.fixated_chunks.to_string(), r.label_hash.clone(), r.fig1a.to_string(), r.fig1b.to_string()]);
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
