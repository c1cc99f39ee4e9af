//! Uniform-grid index of via-labels.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hub_label::HubLabelSet;
use crate::map::PolygonalMap;
use crate::visibility::cell_visibility_lists;

/// Bytes per via-label used for human-readable size estimates.
pub const DEFAULT_LABEL_BYTES: usize = 16;

/// `hub: (via, dist)` stored for a cell or region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViaLabel {
    pub hub: u32,
    pub via: u32,
    pub dist: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViaEntry {
    pub via: u32,
    pub dist: f64,
}

/// Connected cells sharing one via-label table. Labels are grouped by hub:
/// group `i` holds hub `hubs[i]` and spans `entries[offsets[i]..offsets[i+1]]`,
/// sorted by via id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub id: usize,
    pub cells: Vec<usize>,
    pub hubs: Vec<u32>,
    pub offsets: Vec<u32>,
    pub entries: Vec<ViaEntry>,
    pub score: f64,
}

impl Region {
    /// Builds a region from unordered labels, dropping duplicate `(hub, via)` pairs.
    pub fn from_labels(id: usize, mut cells: Vec<usize>, mut labels: Vec<ViaLabel>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        labels.sort_by_key(|l| (l.hub, l.via));
        labels.dedup_by(|a, b| a.hub == b.hub && a.via == b.via);
        let mut hubs = Vec::new();
        let mut offsets = vec![0u32];
        let mut entries = Vec::with_capacity(labels.len());
        for l in labels {
            if hubs.last() != Some(&l.hub) {
                if !hubs.is_empty() {
                    offsets.push(entries.len() as u32);
                }
                hubs.push(l.hub);
            }
            entries.push(ViaEntry {
                via: l.via,
                dist: l.dist,
            });
        }
        if !hubs.is_empty() {
            offsets.push(entries.len() as u32);
        }
        Region {
            id,
            cells,
            hubs,
            offsets,
            entries,
            score: 0.0,
        }
    }

    /// Region whose labels come from a visibility list: every label of every
    /// listed vertex, keyed through that vertex.
    pub fn from_visibility_list(
        id: usize,
        cells: Vec<usize>,
        list: &[usize],
        hl: &HubLabelSet,
    ) -> Self {
        let labels = list
            .iter()
            .flat_map(|&v| {
                hl.of(v).iter().map(move |l| ViaLabel {
                    hub: l.hub as u32,
                    via: v as u32,
                    dist: l.dist,
                })
            })
            .collect();
        Region::from_labels(id, cells, labels)
    }

    pub fn label_count(&self) -> usize {
        self.entries.len()
    }

    pub fn hub_count(&self) -> usize {
        self.hubs.len()
    }

    pub fn group(&self, i: usize) -> &[ViaEntry] {
        &self.entries[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn group_of(&self, hub: u32) -> Option<&[ViaEntry]> {
        self.hubs.binary_search(&hub).ok().map(|i| self.group(i))
    }

    pub fn via_labels(&self) -> impl Iterator<Item = ViaLabel> + '_ {
        (0..self.hubs.len()).flat_map(move |i| {
            self.group(i).iter().map(move |e| ViaLabel {
                hub: self.hubs[i],
                via: e.via,
                dist: e.dist,
            })
        })
    }

    /// Adds `other`'s cells, labels and score. Returns the number of labels
    /// newly inserted.
    pub fn absorb(&mut self, other: &Region) -> usize {
        let before = self.entries.len();
        let mut hubs = Vec::with_capacity(self.hubs.len() + other.hubs.len());
        let mut offsets = Vec::with_capacity(hubs.capacity() + 1);
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        offsets.push(0u32);
        let (mut i, mut j) = (0, 0);
        while i < self.hubs.len() || j < other.hubs.len() {
            let ord = match (self.hubs.get(i), other.hubs.get(j)) {
                (Some(a), Some(b)) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    hubs.push(self.hubs[i]);
                    entries.extend_from_slice(self.group(i));
                    i += 1;
                }
                Ordering::Greater => {
                    hubs.push(other.hubs[j]);
                    entries.extend_from_slice(other.group(j));
                    j += 1;
                }
                Ordering::Equal => {
                    hubs.push(self.hubs[i]);
                    merge_group(self.group(i), other.group(j), &mut entries);
                    i += 1;
                    j += 1;
                }
            }
            offsets.push(entries.len() as u32);
        }
        self.hubs = hubs;
        self.offsets = if self.hubs.is_empty() {
            Vec::new()
        } else {
            offsets
        };
        self.entries = entries;
        self.cells.extend_from_slice(&other.cells);
        self.cells.sort_unstable();
        self.score += other.score;
        self.entries.len() - before
    }

    /// Checks the grouping invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(format!("region {}: {m}", self.id)));
        if self.hubs.windows(2).any(|w| w[0] >= w[1]) {
            return bad("hubs not strictly ascending");
        }
        if self.hubs.is_empty() {
            return if self.entries.is_empty() {
                Ok(())
            } else {
                bad("entries without hubs")
            };
        }
        if self.offsets.len() != self.hubs.len() + 1 || self.offsets[0] != 0 {
            return bad("offset table malformed");
        }
        if *self.offsets.last().unwrap() as usize != self.entries.len() {
            return bad("offset table does not cover entries");
        }
        for i in 0..self.hubs.len() {
            if self.offsets[i] >= self.offsets[i + 1] {
                return bad("empty hub group");
            }
            if self.group(i).windows(2).any(|w| w[0].via >= w[1].via) {
                return bad("duplicate or unsorted via in group");
            }
        }
        Ok(())
    }
}

fn merge_group(a: &[ViaEntry], b: &[ViaEntry], out: &mut Vec<ViaEntry>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].via.cmp(&b[j].via) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Cell id to region id; `None` for fully blocked cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMapper {
    pub map: Vec<Option<u32>>,
}

impl RegionMapper {
    pub fn get(&self, cell: usize) -> Option<usize> {
        self.map.get(cell).copied().flatten().map(|r| r as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EhlIndex {
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    pub regions: Vec<Region>,
    pub mapper: RegionMapper,
}

impl EhlIndex {
    /// Assembles an index from regions, deriving the mapper from their cells.
    pub fn from_regions(
        cell_size: f64,
        nx: usize,
        ny: usize,
        regions: Vec<Region>,
    ) -> Result<Self> {
        let mut map = vec![None; nx * ny];
        for (i, r) in regions.iter().enumerate() {
            if r.id != i {
                return Err(Error::Invalid(format!(
                    "region {} stored at slot {i}",
                    r.id
                )));
            }
            for &c in &r.cells {
                let slot = map
                    .get_mut(c)
                    .ok_or_else(|| Error::Invalid(format!("cell {c} outside grid")))?;
                if slot.is_some() {
                    return Err(Error::Invalid(format!("cell {c} in two regions")));
                }
                *slot = Some(i as u32);
            }
        }
        Ok(EhlIndex {
            cell_size,
            nx,
            ny,
            regions,
            mapper: RegionMapper { map },
        })
    }

    pub fn memory_units(&self) -> usize {
        self.regions.iter().map(Region::label_count).sum()
    }

    pub fn estimated_bytes(&self, label_bytes: usize) -> usize {
        self.memory_units() * label_bytes
    }

    pub fn region_of_cell(&self, cell: usize) -> Option<&Region> {
        self.mapper.get(cell).map(|r| &self.regions[r])
    }

    /// Edge-adjacent cells inside the grid.
    pub fn neighbor_cells(&self, cell: usize) -> impl Iterator<Item = usize> {
        let (x, y, nx, ny) = (cell % self.nx, cell / self.nx, self.nx, self.ny);
        [
            (x > 0).then(|| cell - 1),
            (x + 1 < nx).then(|| cell + 1),
            (y > 0).then(|| cell - nx),
            (y + 1 < ny).then(|| cell + nx),
        ]
        .into_iter()
        .flatten()
    }
}

/// One region per cell that has traversable area, labelled from the cell's
/// visibility list.
pub fn build_ehl(map: &PolygonalMap, hl: &HubLabelSet, cell_size: f64) -> Result<EhlIndex> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::Invalid("cell size must be positive".into()));
    }
    let (nx, ny) = map.cell_dims(cell_size);
    let lists = cell_visibility_lists(map, cell_size);
    let open: Vec<usize> = (0..nx * ny)
        .filter(|&c| !map.cell_fully_blocked(c, cell_size))
        .collect();
    let regions: Vec<Region> = open
        .par_iter()
        .enumerate()
        .map(|(id, &c)| Region::from_visibility_list(id, vec![c], &lists[c], hl))
        .collect();
    EhlIndex::from_regions(cell_size, nx, ny, regions)
}
