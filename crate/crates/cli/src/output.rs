//! Output files. Floats use the shortest round-trip representation, so
//! identical runs produce identical bytes.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::run::Outputs;

#[derive(Serialize)]
struct BondRow {
    i: usize,
    node_id: usize,
    j: usize,
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "R")]
    r: f64,
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_all(out: &Outputs, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_report(out, dir)?;
    let bonds: Vec<BondRow> = out.bonds.iter().map(|q| BondRow { i: q.i, node_id: q.node, j: q.j, p: q.price, r: q.rate }).collect();
    write_csv(&dir.join("bonds.csv"), &["i", "node_id", "j", "P", "R"], &bonds)?;
    write_csv(&dir.join("kernel.csv"), &["i", "node_id", "parent_id", "t", "prob", "pi", "mma", "short_rate"], &out.kernel)?;
    write_csv(&dir.join("economy.csv"), &["i", "node_id", "t", "k", "M", "lambda", "C", "pi", "real_pi", "velocity"], &out.economy)?;
    write_csv(&dir.join("ensemble.csv"), &["path_id", "i", "xi", "filtered", "factor"], &out.ensemble)?;
    Ok(())
}

pub fn write_report(out: &Outputs, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut json = serde_json::to_string_pretty(&out.report)?;
    json.push('\n');
    fs::write(dir.join("report.json"), json).context("writing report.json")
}
