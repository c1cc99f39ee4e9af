//! Greedy region merging until the index fits a label budget.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid_index::{EhlIndex, Region, RegionMapper};
use crate::hub_label::Dist;

pub const DEFAULT_ALPHA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    WorkloadAware,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Uniform => "uniform",
            Mode::WorkloadAware => "workload",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressionConfig {
    pub budget_units: usize,
    pub mode: Mode,
    pub alpha: f64,
    /// Expected endpoint count per cell, required in workload-aware mode.
    pub workload: Option<Vec<u64>>,
}

impl CompressionConfig {
    pub fn uniform(budget_units: usize) -> Self {
        CompressionConfig {
            budget_units,
            mode: Mode::Uniform,
            alpha: DEFAULT_ALPHA,
            workload: None,
        }
    }

    pub fn workload_aware(budget_units: usize, workload: Vec<u64>) -> Self {
        CompressionConfig {
            budget_units,
            mode: Mode::WorkloadAware,
            alpha: DEFAULT_ALPHA,
            workload: Some(workload),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Fit,
    SingleRegionOverflow,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Fit => "fit",
            Outcome::SingleRegionOverflow => "single_region_overflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionStats {
    pub outcome: Outcome,
    pub merges: usize,
    pub initial_units: usize,
    pub final_units: usize,
}

/// Sets every region's score: 1 in uniform mode, `1 + w_c` summed over its
/// cells in workload-aware mode.
pub fn initialize_scores(index: &mut EhlIndex, cfg: &CompressionConfig) -> Result<()> {
    let cells = index.nx * index.ny;
    match (cfg.mode, &cfg.workload) {
        (Mode::Uniform, _) => {
            for r in &mut index.regions {
                r.score = r.cells.len() as f64;
            }
        }
        (Mode::WorkloadAware, Some(w)) => {
            if w.len() != cells {
                return Err(Error::Invalid(format!(
                    "workload has {} cells, index has {cells}",
                    w.len()
                )));
            }
            for r in &mut index.regions {
                r.score = r.cells.iter().map(|&c| 1.0 + w[c] as f64).sum();
            }
        }
        (Mode::WorkloadAware, None) => {
            return Err(Error::Invalid(
                "workload-aware mode needs a workload".into(),
            ))
        }
    }
    Ok(())
}

/// Jaccard similarity of the two regions' hub sets; two empty sets give 1.
pub fn jaccard(a: &Region, b: &Region) -> f64 {
    if a.hubs.is_empty() && b.hubs.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.hubs.len() && j < b.hubs.len() {
        match a.hubs[i].cmp(&b.hubs[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common as f64 / (a.hubs.len() + b.hubs.len() - common) as f64
}

/// Distinct live regions owning a cell edge-adjacent to region `e`, ascending.
pub fn adjacent_regions(index: &EhlIndex, e: usize) -> Vec<usize> {
    let mut out: Vec<usize> = index.regions[e]
        .cells
        .iter()
        .flat_map(|&c| index.neighbor_cells(c))
        .filter_map(|c| index.mapper.get(c))
        .filter(|&r| r != e)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Best neighbor of `e` to merge: highest Jaccard in uniform mode, highest
/// `(1 - alpha) J + alpha / s(r)` in workload-aware mode; ties to the smaller id.
pub fn adjacent_region_selection(
    index: &EhlIndex,
    e: usize,
    cfg: &CompressionConfig,
) -> Option<usize> {
    let region = &index.regions[e];
    let mut best: Option<(f64, usize)> = None;
    for r in adjacent_regions(index, e) {
        let other = &index.regions[r];
        let j = jaccard(region, other);
        let value = match cfg.mode {
            Mode::Uniform => j,
            Mode::WorkloadAware => (1.0 - cfg.alpha) * j + cfg.alpha / other.score,
        };
        if best.is_none_or(|(b, _)| value > b) {
            best = Some((value, r));
        }
    }
    best.map(|(_, r)| r)
}

/// Merges region `r` into `e` and remaps `r`'s cells. `r` is left empty.
/// Returns how many of `r`'s labels were duplicates.
pub fn merge_regions(index: &mut EhlIndex, e: usize, r: usize) -> Result<usize> {
    if e == r {
        return Err(Error::Invalid(format!(
            "cannot merge region {e} with itself"
        )));
    }
    let taken = std::mem::take(&mut index.regions[r]);
    let added = index.regions[e].absorb(&taken);
    for &c in &taken.cells {
        index.mapper.map[c] = Some(e as u32);
    }
    index.regions[r].id = r;
    Ok(taken.label_count() - added)
}

/// Runs the merge loop until `memory_units <= budget_units` or no merge is
/// possible, then renumbers the surviving regions densely.
pub fn compress(index: &mut EhlIndex, cfg: &CompressionConfig) -> Result<CompressionStats> {
    initialize_scores(index, cfg)?;
    let initial_units = index.memory_units();
    let mut units = initial_units;
    let n = index.regions.len();
    let mut generation = vec![0u32; n];
    let mut heap: BinaryHeap<Reverse<(Dist, usize, u32)>> = index
        .regions
        .iter()
        .map(|r| Reverse((Dist(r.score), r.id, 0)))
        .collect();
    let mut merges = 0;
    while units > cfg.budget_units {
        let Some(Reverse((_, e, gen))) = heap.pop() else {
            break;
        };
        if gen != generation[e] || index.regions[e].cells.is_empty() {
            continue;
        }
        let Some(r) = adjacent_region_selection(index, e, cfg) else {
            // whole component already merged: set aside
            generation[e] += 1;
            continue;
        };
        units -= merge_regions(index, e, r)?;
        merges += 1;
        generation[r] += 1;
        generation[e] += 1;
        heap.push(Reverse((Dist(index.regions[e].score), e, generation[e])));
    }
    debug_assert_eq!(units, index.memory_units());
    compact(index);
    Ok(CompressionStats {
        outcome: if units <= cfg.budget_units {
            Outcome::Fit
        } else {
            Outcome::SingleRegionOverflow
        },
        merges,
        initial_units,
        final_units: units,
    })
}

/// Drops emptied regions and renumbers the rest in id order.
fn compact(index: &mut EhlIndex) {
    let old = std::mem::take(&mut index.regions);
    let mut map = vec![None; index.nx * index.ny];
    for mut r in old.into_iter().filter(|r| !r.cells.is_empty()) {
        r.id = index.regions.len();
        for &c in &r.cells {
            map[c] = Some(r.id as u32);
        }
        index.regions.push(r);
    }
    index.mapper = RegionMapper { map };
}
