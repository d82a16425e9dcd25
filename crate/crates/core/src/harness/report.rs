use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentConfig, ExperimentId, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: ExperimentId,
    pub n: u32,
    pub trial: u64,
    pub seed: u64,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub n: u32,
    pub quantity: String,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

/// A bound or constant computed from the config for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub n: u32,
    pub name: String,
    pub value: f64,
}

/// Mean of a per-trial 0/1 quantity compared against a required rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub n: u32,
    pub name: String,
    pub quantity: String,
    pub observed: f64,
    pub required: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentId,
    pub config: ExperimentConfig,
    pub derived: Vec<Derived>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub aggregates: Vec<Aggregate>,
    pub rows: Vec<Row>,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    /// True when every check passes (vacuously when there are none).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn values(&self, n: u32, quantity: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n && r.quantity == quantity)
            .map(|r| r.value)
            .collect()
    }

    pub fn aggregate_for(&self, n: u32, quantity: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.n == n && a.quantity == quantity)
    }

    pub fn csv_string(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn json_string(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per `(n, quantity)` statistics, sorted by `n` then quantity.
pub fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(u32, &str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.n, r.quantity.as_str())).or_default().push(r.value);
    }
    groups
        .into_iter()
        .map(|((n, q), mut v)| {
            let count = v.len();
            let mean = v.iter().sum::<f64>() / count as f64;
            v.sort_by(f64::total_cmp);
            let median = if count % 2 == 1 {
                v[count / 2]
            } else {
                (v[count / 2 - 1] + v[count / 2]) / 2.0
            };
            Aggregate {
                n,
                quantity: q.to_string(),
                count,
                mean,
                min: v[0],
                max: v[count - 1],
                median,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub timing: PathBuf,
}

#[derive(Serialize)]
struct Timing {
    experiment: ExperimentId,
    wall_clock_seconds: f64,
    workers: Option<usize>,
}

/// Writes `<id>.csv`, `<id>.json` and `<id>_timing.json` into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<ReportPaths, HarnessError> {
    fs::create_dir_all(dir)?;
    let id = report.experiment.as_str();
    let paths = ReportPaths {
        csv: dir.join(format!("{id}.csv")),
        json: dir.join(format!("{id}.json")),
        timing: dir.join(format!("{id}_timing.json")),
    };
    fs::write(&paths.csv, report.csv_string()?)?;
    fs::write(&paths.json, report.json_string()? + "\n")?;
    let timing = Timing {
        experiment: report.experiment,
        wall_clock_seconds: report.wall_clock_seconds,
        workers: ExperimentConfig::workers(),
    };
    fs::write(&paths.timing, serde_json::to_string_pretty(&timing)? + "\n")?;
    Ok(paths)
}
