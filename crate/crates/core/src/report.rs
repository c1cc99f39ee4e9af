//! Benchmark rows and their CSV form.

use std::io::Write;
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;

/// Column order of every report. Times are microseconds; `estimated_mb` is
/// `memory_units` times the assumed bytes per label.
pub const CSV_HEADER: &str = "map,budget_percent,mode,outcome,memory_units,estimated_mb,build_seconds,queries,mean_us,median_us,p99_us,mean_labels_inspected,median_labels_inspected,verify_pass_rate";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub map: String,
    pub budget_percent: f64,
    pub mode: String,
    pub outcome: String,
    pub memory_units: usize,
    pub estimated_mb: f64,
    pub build_seconds: f64,
    pub queries: usize,
    pub mean_us: f64,
    pub median_us: f64,
    pub p99_us: f64,
    pub mean_labels_inspected: f64,
    pub median_labels_inspected: f64,
    /// Empty when no verification ran.
    pub verify_pass_rate: Option<f64>,
}

/// Summary statistics over per-query samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub p99: f64,
}

impl Stats {
    /// Nearest-rank percentiles; all zero for no samples.
    pub fn of(samples: &[f64]) -> Stats {
        if samples.is_empty() {
            return Stats::default();
        }
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let rank = |q: f64| v[((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        let median = if v.len() % 2 == 1 {
            v[v.len() / 2]
        } else {
            (v[v.len() / 2 - 1] + v[v.len() / 2]) / 2.0
        };
        Stats {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median,
            p99: rank(0.99),
        }
    }
}

pub fn micros(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1_000.0
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
