//! End-to-end offline build.

use std::time::{Duration, Instant};

use crate::compress::{
    compress, initialize_scores, CompressionConfig, Mode, Outcome, DEFAULT_ALPHA,
};
use crate::error::{Error, Result};
use crate::grid_index::build_ehl;
use crate::hub_label::{build_hub_labels, vertex_ordering};
use crate::index_file::{BuildMeta, IndexBundle};
use crate::map::PolygonalMap;
use crate::visibility::build_visibility_graph;
use crate::workload::ClusterSpec;

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub cell_size: f64,
    /// Share of the uncompressed memory to keep; 100 skips compression.
    pub budget_percent: f64,
    pub mode: Mode,
    pub alpha: f64,
    pub seed: u64,
    pub workload: Option<Vec<u64>>,
    pub clusters: Option<ClusterSpec>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            cell_size: 1.0,
            budget_percent: 100.0,
            mode: Mode::Uniform,
            alpha: DEFAULT_ALPHA,
            seed: 0,
            workload: None,
            clusters: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildTimings {
    pub graph: Duration,
    pub labels: Duration,
    pub grid: Duration,
    pub compress: Duration,
}

impl BuildTimings {
    pub fn total(&self) -> Duration {
        self.graph + self.labels + self.grid + self.compress
    }
}

/// Label budget for a percentage of `initial` units, rounded down.
pub fn budget_units(initial: usize, percent: f64) -> usize {
    (initial as f64 * percent / 100.0).floor() as usize
}

pub fn build_index(map: PolygonalMap, opts: &BuildOptions) -> Result<(IndexBundle, BuildTimings)> {
    if !(opts.budget_percent > 0.0 && opts.budget_percent <= 100.0) {
        return Err(Error::Invalid(format!(
            "budget percent {} not in (0, 100]",
            opts.budget_percent
        )));
    }
    if !(0.0..=1.0).contains(&opts.alpha) {
        return Err(Error::Invalid(format!(
            "alpha {} not in [0, 1]",
            opts.alpha
        )));
    }
    if (opts.mode == Mode::WorkloadAware) != opts.workload.is_some() {
        return Err(Error::Invalid(
            "a workload is required exactly in workload-aware mode".into(),
        ));
    }
    let mut t = BuildTimings::default();
    let clock = Instant::now();
    let graph = build_visibility_graph(&map);
    t.graph = clock.elapsed();

    let clock = Instant::now();
    let labels = build_hub_labels(&graph, &vertex_ordering(&graph));
    t.labels = clock.elapsed();

    let clock = Instant::now();
    let mut index = build_ehl(&map, &labels, opts.cell_size)?;
    t.grid = clock.elapsed();

    let initial = index.memory_units();
    let budget = budget_units(initial, opts.budget_percent);
    let cfg = CompressionConfig {
        budget_units: budget,
        mode: opts.mode,
        alpha: opts.alpha,
        workload: opts.workload.clone(),
    };
    let clock = Instant::now();
    let (merges, outcome) = if opts.budget_percent >= 100.0 {
        initialize_scores(&mut index, &cfg)?;
        (0, Outcome::Fit)
    } else {
        let stats = compress(&mut index, &cfg)?;
        (stats.merges, stats.outcome)
    };
    t.compress = clock.elapsed();

    let meta = BuildMeta {
        mode: opts.mode,
        budget_percent: opts.budget_percent,
        budget_units: budget as u64,
        alpha: opts.alpha,
        seed: opts.seed,
        initial_units: initial as u64,
        merges: merges as u64,
        outcome,
    };
    let bundle = IndexBundle {
        map,
        labels,
        index,
        meta,
        clusters: opts.clusters.clone(),
    };
    Ok((bundle, t))
}
