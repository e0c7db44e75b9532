//! Monte-Carlo benchmark: manifest, per-filter RMSE CSVs and a summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twoframes::scenarios::monte_carlo::{run_monte_carlo, FilterTrace, MonteCarloResult};
use twoframes::TfgError;

use crate::config::Config;

pub const CSV_HEADER: [&str; 6] = [
    "time_s",
    "rmse_att_deg",
    "rmse_vel",
    "rmse_pos",
    "rmse_bw_degps",
    "rmse_ba",
];
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Everything needed to reproduce a benchmark run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_path: Option<String>,
    pub seed: u64,
    pub out_dir: String,
    pub csv: Vec<String>,
    pub summary_csv: String,
    /// Fully resolved configuration.
    pub config: Config,
}

impl RunManifest {
    pub fn new(config: &Config, config_path: Option<&Path>, out_dir: &Path) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed: config.monte_carlo.seed,
            out_dir: out_dir.display().to_string(),
            csv: config
                .monte_carlo
                .filters
                .iter()
                .map(|k| {
                    out_dir
                        .join(format!("{}.csv", k.name()))
                        .display()
                        .to_string()
                })
                .collect(),
            summary_csv: out_dir.join(SUMMARY_FILE).display().to_string(),
            config: config.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, TfgError> {
        let text = fs::read_to_string(path)
            .map_err(|e| TfgError::Config(format!("cannot read {}: {e}", path.display())))?;
        let m: RunManifest = toml::from_str(&text).map_err(|e| TfgError::Config(e.to_string()))?;
        m.config.validate()?;
        Ok(m)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }
}

/// Full double precision: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> TfgError {
    TfgError::Io(std::io::Error::other(e))
}

pub fn write_trace(path: &Path, times: &[f64], trace: &FilterTrace) -> Result<(), TfgError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for (t, row) in times.iter().zip(&trace.rmse) {
        let mut rec = vec![format_f64(*t)];
        rec.extend(row.iter().map(|v| format_f64(*v)));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, result: &MonteCarloResult) -> Result<(), TfgError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header = vec!["filter"];
    header.extend(CSV_HEADER);
    w.write_record(&header).map_err(csv_error)?;
    let t = result.times.last().copied().unwrap_or(0.0);
    for trace in &result.traces {
        let mut rec = vec![trace.kind.name().to_string(), format_f64(t)];
        rec.extend(trace.final_rmse().iter().map(|v| format_f64(*v)));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the manifest, runs the experiment and writes the CSVs.
pub fn run_bench(manifest: &RunManifest) -> Result<(MonteCarloResult, Vec<PathBuf>), TfgError> {
    let out = Path::new(&manifest.out_dir);
    fs::create_dir_all(out)?;
    fs::write(out.join(MANIFEST_FILE), manifest.to_toml())?;
    let cfg = &manifest.config;
    let result = run_monte_carlo(&cfg.inertial_nav, &cfg.monte_carlo)?;
    let mut written = Vec::new();
    for (trace, path) in result.traces.iter().zip(&manifest.csv) {
        let path = PathBuf::from(path);
        write_trace(&path, &result.times, trace)?;
        written.push(path);
    }
    let summary = PathBuf::from(&manifest.summary_csv);
    write_summary(&summary, &result)?;
    written.push(summary);
    Ok((result, written))
}

/// Human-readable final-time table.
pub fn summary_table(result: &MonteCarloResult) -> String {
    let mut s = format!(
        "{:<10} {:>14} {:>10} {:>10} {:>14} {:>10}\n",
        "filter", "att [deg]", "vel [m/s]", "pos [m]", "b_w [deg/s]", "b_a [m/s2]"
    );
    for t in &result.traces {
        let r = t.final_rmse();
        s += &format!(
            "{:<10} {:>14.6} {:>10.5} {:>10.5} {:>14.6} {:>10.5}\n",
            t.kind.name(),
            r[0],
            r[1],
            r[2],
            r[3],
            r[4]
        );
    }
    s
}
