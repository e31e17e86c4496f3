//! Fidelity sweeps over address widths and random datasets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qramsim::bounds::bounds;
use qramsim::circuits::{CircuitSummary, ClassicalData, Query};
use qramsim::trajectory::{NoiseLocations, TrajectoryRunner};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::write_atomic;

/// Name written into output metadata.
pub const TOOL: &str = "qramsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of sweep CSV files.
pub const CSV_COLUMNS: [&str; 13] = [
    "variant",
    "n",
    "M",
    "channel",
    "epsilon",
    "T",
    "dataset_seed",
    "samples",
    "mean_fidelity",
    "std_error",
    "bound_eq28",
    "bound_twolevel",
    "bound_general",
];

/// `2^n` fair bits from ChaCha8 seeded with `seed` through `seed_from_u64`.
pub fn gen_dataset(n: usize, seed: u64) -> ClassicalData {
    ClassicalData::random(n, seed)
}

/// `(dataset_seed, trajectory_seed)` for each dataset at width `n`.
///
/// Both come from ChaCha8 seeded with `master_seed` on stream `n`, so adding widths
/// or datasets never changes the seeds of existing points.
pub fn point_seeds(master_seed: u64, n: usize, datasets: usize) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(n as u64);
    (0..datasets).map(|_| (rng.next_u64(), rng.next_u64())).collect()
}

/// Floats in output files carry 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variant: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub channel: String,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t: u32,
    pub dataset_seed: u64,
    pub samples: usize,
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub bound_eq28: f64,
    pub bound_twolevel: f64,
    pub bound_general: f64,
}

impl SweepRow {
    fn csv_record(&self) -> [String; 13] {
        [
            self.variant.clone(),
            self.n.to_string(),
            self.big_m.to_string(),
            self.channel.clone(),
            fmt_float(self.epsilon),
            self.t.to_string(),
            self.dataset_seed.to_string(),
            self.samples.to_string(),
            fmt_float(self.mean_fidelity),
            fmt_float(self.std_error),
            fmt_float(self.bound_eq28),
            fmt_float(self.bound_twolevel),
            fmt_float(self.bound_general),
        ]
    }
}

/// Dataset-averaged infidelity at one width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    #[serde(rename = "T")]
    pub t: u32,
    pub datasets: usize,
    pub mean_infidelity: f64,
    /// `sqrt(sum_d se_d^2) / D` over the dataset estimates.
    pub std_error: f64,
    pub bound_eq28: f64,
    pub bound_twolevel: f64,
    pub bound_general: f64,
}

/// Averages rows that share a width, in order of first appearance.
pub fn aggregate(rows: &[SweepRow]) -> Vec<SweepPoint> {
    let mut widths: Vec<usize> = Vec::new();
    for r in rows {
        if !widths.contains(&r.n) {
            widths.push(r.n);
        }
    }
    widths
        .into_iter()
        .map(|n| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.n == n).collect();
            let d = group.len() as f64;
            let mean_fidelity = qramsim::trajectory::compensated_sum(group.iter().map(|r| r.mean_fidelity)) / d;
            let var = qramsim::trajectory::compensated_sum(group.iter().map(|r| r.std_error * r.std_error));
            SweepPoint {
                n,
                t: group[0].t,
                datasets: group.len(),
                mean_infidelity: 1.0 - mean_fidelity,
                std_error: var.sqrt() / d,
                bound_eq28: group[0].bound_eq28,
                bound_twolevel: group[0].bound_twolevel,
                bound_general: group[0].bound_general,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub config: ExperimentConfig,
    pub circuits: Vec<CircuitSummary>,
    pub rows: Vec<SweepRow>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        let m = &self.metadata;
        writeln!(out, "# tool={} version={} config_hash={}", m.tool, m.version, m.config_hash).expect("string write");
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Config(format!("csv encoding: {e}"));
        w.write_record(CSV_COLUMNS).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.csv_record()).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv encoding: {e}")))?;
        out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    /// Writes `sweep.csv` and `sweep.json` into `dir`, each replaced atomically.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let csv_path = dir.join("sweep.csv");
        let json_path = dir.join("sweep.json");
        write_atomic(&csv_path, self.to_csv()?.as_bytes())?;
        let json = serde_json::to_string_pretty(self).expect("sweep result serializes");
        write_atomic(&json_path, json.as_bytes())?;
        Ok(vec![csv_path, json_path])
    }
}

/// Runs the sweep described by `config`, calling `progress` after every row.
pub fn run_sweep(config: &ExperimentConfig, mut progress: impl FnMut(&SweepRow)) -> Result<SweepResult, CliError> {
    config.validate()?;
    let channel = config.channel()?;
    let mut rows = Vec::new();
    let mut circuits = Vec::new();
    for n in config.widths() {
        let circuit = config.circuit(n)?;
        let summary = circuit.summary();
        let t = circuit.t();
        let b = bounds(config.channel.epsilon, channel.epsilon_w, t, n, summary.big_m);
        let query = Query::uniform(n);
        for (dataset_seed, trajectory_seed) in point_seeds(config.master_seed, n, config.datasets) {
            let data = gen_dataset(n, dataset_seed);
            let runner = TrajectoryRunner::new(&circuit, &channel, &NoiseLocations::Circuit, &data, &query)?;
            let est = runner.estimate(config.samples, trajectory_seed, config.workers)?;
            let row = SweepRow {
                variant: summary.variant.clone(),
                n,
                big_m: summary.big_m,
                channel: config.channel.kind.name().to_string(),
                epsilon: config.channel.epsilon,
                t,
                dataset_seed,
                samples: config.samples,
                mean_fidelity: est.mean,
                std_error: est.std_error,
                bound_eq28: b.eq28,
                bound_twolevel: b.two_level,
                bound_general: b.general,
            };
            progress(&row);
            rows.push(row);
        }
        circuits.push(summary);
    }
    let points = aggregate(&rows);
    Ok(SweepResult {
        metadata: Metadata { tool: TOOL.into(), version: VERSION.into(), config_hash: config.hash() },
        config: config.clone(),
        circuits,
        rows,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_has_twelve_significant_digits() {
        assert_eq!(fmt_float(0.5), "5.00000000000e-1");
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_float(0.0), "0.00000000000e0");
    }

    #[test]
    fn seeds_are_stable_under_extension() {
        let a = point_seeds(7, 3, 2);
        let b = point_seeds(7, 3, 5);
        assert_eq!(a[..], b[..2]);
        assert_ne!(point_seeds(7, 4, 2), a);
    }

    #[test]
    fn aggregation_combines_standard_errors() {
        let row = |n, f, se| SweepRow {
            variant: "bb3".into(),
            n,
            big_m: 1,
            channel: "dephasing".into(),
            epsilon: 0.1,
            t: 3,
            dataset_seed: 0,
            samples: 10,
            mean_fidelity: f,
            std_error: se,
            bound_eq28: 0.0,
            bound_twolevel: 0.0,
            bound_general: 0.0,
        };
        let p = aggregate(&[row(2, 0.9, 0.03), row(2, 0.7, 0.04), row(3, 0.5, 0.0)]);
        assert_eq!(p.len(), 2);
        assert!((p[0].mean_infidelity - 0.2).abs() < 1e-12);
        assert!((p[0].std_error - 0.025).abs() < 1e-12);
        assert_eq!(p[1].datasets, 1);
    }
}
