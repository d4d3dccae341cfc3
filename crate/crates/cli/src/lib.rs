//! Experiment runner: TOML configs in, deterministic result bundles out.

pub mod bundle;
pub mod config;
pub mod error;
pub mod experiments;

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use bundle::{write_bundle, ExperimentOutput, MatrixOut, Series};
pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, scalar_metrics};

/// Reads and validates a config file, applying an optional seed override.
pub fn load_config(path: &Path, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs one experiment and writes its bundle into `out_dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<ExperimentOutput> {
    cfg.validate()?;
    let toml = cfg.to_toml()?;
    let start = Instant::now();
    let out = run_experiment(cfg)?;
    write_bundle(out_dir, &toml, cfg.experiment.name(), cfg.seed, &out, start.elapsed().as_secs_f64())?;
    Ok(out)
}

/// Runs `cfg` once per value of `param`, each into `out_dir/point_NNN`, and
/// writes `summary.csv` with the swept value and every scalar metric.
pub fn sweep(cfg: &ExperimentConfig, param: &str, values: &[f64], out_dir: &Path) -> CliResult<Vec<ExperimentOutput>> {
    if values.is_empty() {
        return Err(CliError::Validation("sweep needs at least one value".into()));
    }
    // validate every point before running any of them
    let cfgs = values.iter().map(|&v| cfg.with_param(param, v)).collect::<CliResult<Vec<_>>>()?;
    let outs = cfgs
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_to_dir(c, &out_dir.join(format!("point_{i:03}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let keys: Vec<String> = scalar_metrics(&outs[0]).into_iter().map(|(k, _)| k).collect();
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    let mut header = vec!["index".to_string(), param.to_string()];
    header.extend(keys.iter().cloned());
    w.write_record(&header)?;
    for (i, (v, o)) in values.iter().zip(&outs).enumerate() {
        let mut rec = vec![i.to_string(), v.to_string()];
        rec.extend(keys.iter().map(|k| o.scalar(k).map_or(String::new(), |x| x.to_string())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(outs)
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| CliError::Validation(format!("bad value `{t}`: {e}"))))
        .collect()
}
