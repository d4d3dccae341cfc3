//! Result bundle layout and writers.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use phonon_core::qcore::CMatrix;

use crate::error::CliResult;

/// Tabular output; `labels`, when present, becomes a leading text column.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            labels: None,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOut {
    pub name: String,
    pub basis: Vec<String>,
    pub matrix: CMatrix,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub metrics: BTreeMap<String, Value>,
    pub series: Vec<Series>,
    pub matrices: Vec<MatrixOut>,
}

impl ExperimentOutput {
    pub fn metric(&mut self, key: &str, v: impl Serialize) {
        self.metrics.insert(key.into(), serde_json::to_value(v).expect("serializable metric"));
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).and_then(Value::as_f64)
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn matrix_json(m: &MatrixOut) -> Value {
    let (r, c) = m.matrix.shape();
    let data: Vec<[f64; 2]> = (0..r)
        .flat_map(|i| (0..c).map(move |j| (i, j)))
        .map(|(i, j)| {
            let z = m.matrix[(i, j)];
            [z.re, z.im]
        })
        .collect();
    json!({ "name": m.name, "shape": [r, c], "basis": m.basis, "order": "row-major", "data": data })
}

fn write_json(path: &Path, v: &impl Serialize) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| crate::error::CliError::Io(e.to_string()))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Writes the bundle into `dir`:
/// config.toml, metadata.json, metrics.json, series/*.csv, matrices/*.json.
/// Wall time goes to timing.json so the rest is reproducible byte for byte.
pub fn write_bundle(
    dir: &Path,
    config_toml: &str,
    experiment: &str,
    seed: u64,
    out: &ExperimentOutput,
    wall_time_s: f64,
) -> CliResult<()> {
    fs::create_dir_all(dir.join("series"))?;
    fs::create_dir_all(dir.join("matrices"))?;
    fs::write(dir.join("config.toml"), config_toml)?;
    write_json(
        &dir.join("metadata.json"),
        &json!({
            "experiment": experiment,
            "config_sha256": sha256_hex(config_toml),
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "series": out.series.iter().map(|s| format!("series/{}.csv", s.name)).collect::<Vec<_>>(),
            "matrices": out.matrices.iter().map(|m| format!("matrices/{}.json", m.name)).collect::<Vec<_>>(),
        }),
    )?;
    write_json(&dir.join("metrics.json"), &out.metrics)?;
    write_json(&dir.join("timing.json"), &json!({ "wall_time_s": wall_time_s }))?;
    for s in &out.series {
        let mut w = csv::Writer::from_path(dir.join("series").join(format!("{}.csv", s.name)))?;
        let mut header: Vec<String> = Vec::new();
        if s.labels.is_some() {
            header.push("label".into());
        }
        header.extend(s.columns.iter().cloned());
        w.write_record(&header)?;
        for (i, row) in s.rows.iter().enumerate() {
            let mut rec: Vec<String> = Vec::new();
            if let Some(l) = &s.labels {
                rec.push(l[i].clone());
            }
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    for m in &out.matrices {
        write_json(&dir.join("matrices").join(format!("{}.json", m.name)), &matrix_json(m))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use phonon_core::qcore::C64;

    #[test]
    fn matrix_layout() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.5, -0.25);
        let v = matrix_json(&MatrixOut { name: "x".into(), basis: vec!["g".into(), "e".into()], matrix: m });
        assert_eq!(v["shape"], json!([2, 2]));
        assert_eq!(v["data"][1], json!([0.5, -0.25]));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
