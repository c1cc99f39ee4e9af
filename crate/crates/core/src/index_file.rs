//! Binary index container.
//!
//! Little-endian throughout. A fixed header (magic, version, section count)
//! is followed by a table of `(tag, offset, length)` entries and the section
//! bodies. The map travels with the index so queries can run from the file
//! alone; its SHA-256 is stored to detect a mismatched map.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::compress::{Mode, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::grid_index::{EhlIndex, Region, RegionMapper, ViaEntry};
use crate::hub_label::{HubLabel, HubLabelSet};
use crate::map::{extract_obstacles, GridMap, PolygonalMap};
use crate::workload::ClusterSpec;

pub const MAGIC: [u8; 8] = *b"EHLSTAR\0";
pub const VERSION: u32 = 1;

const META: [u8; 4] = *b"META";
const MAP: [u8; 4] = *b"MAP_";
const HUBS: [u8; 4] = *b"HUBS";
const REGIONS: [u8; 4] = *b"REGN";
const MAPPER: [u8; 4] = *b"MAPR";
const CLUSTERS: [u8; 4] = *b"CLST";

/// Parameters the index was built with. Timings are reported by the CLI but
/// kept out of the file so identical builds give identical bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildMeta {
    pub mode: Mode,
    pub budget_percent: f64,
    pub budget_units: u64,
    pub alpha: f64,
    pub seed: u64,
    pub initial_units: u64,
    pub merges: u64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct IndexBundle {
    pub map: PolygonalMap,
    pub labels: HubLabelSet,
    pub index: EhlIndex,
    pub meta: BuildMeta,
    pub clusters: Option<ClusterSpec>,
}

/// SHA-256 of the map's canonical encoding.
pub fn map_hash(map: &PolygonalMap) -> [u8; 32] {
    Sha256::digest(encode_map(map)).into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn len(&mut self, n: usize) {
        self.u32(n as u32);
    }
    fn point(&mut self, p: Point) {
        self.f64(p.x);
        self.f64(p.y);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], what: &'static str) -> Self {
        Reader { buf, pos: 0, what }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format(format!("{} section truncated", self.what)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// A count, rejected early if it could not fit in the rest of the buffer.
    fn len(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item) > self.buf.len() - self.pos {
            return Err(Error::Format(format!(
                "{} count {n} exceeds section",
                self.what
            )));
        }
        Ok(n)
    }
    fn point(&mut self) -> Result<Point> {
        Ok(Point::new(self.f64()?, self.f64()?))
    }
    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!(
                "{} section has trailing bytes",
                self.what
            )));
        }
        Ok(())
    }
}

fn encode_map(map: &PolygonalMap) -> Vec<u8> {
    let mut w = Writer::default();
    match &map.grid {
        Some(g) => {
            w.u8(0);
            w.len(g.width);
            w.len(g.height);
            let mut bits = vec![0u8; g.blocked.len().div_ceil(8)];
            for (i, _) in g.blocked.iter().enumerate().filter(|(_, &b)| b) {
                bits[i / 8] |= 1 << (i % 8);
            }
            w.0.extend_from_slice(&bits);
        }
        None => {
            w.u8(1);
            w.f64(map.width);
            w.f64(map.height);
            w.len(map.obstacles.len());
            for o in &map.obstacles {
                w.len(o.loops[0].len());
                for &p in &o.loops[0] {
                    w.point(p);
                }
            }
        }
    }
    w.0
}

fn decode_map(buf: &[u8]) -> Result<PolygonalMap> {
    let mut r = Reader::new(buf, "map");
    let map = match r.u8()? {
        0 => {
            let width = r.u32()? as usize;
            let height = r.u32()? as usize;
            let cells = width
                .checked_mul(height)
                .ok_or_else(|| Error::Format("grid too large".into()))?;
            let bits = r.take(cells.div_ceil(8))?;
            let blocked = (0..cells)
                .map(|i| bits[i / 8] >> (i % 8) & 1 == 1)
                .collect();
            extract_obstacles(&GridMap::new(width, height, blocked)?)
        }
        1 => {
            let (width, height) = (r.f64()?, r.f64()?);
            let n = r.len(4)?;
            let mut polys = Vec::with_capacity(n);
            for _ in 0..n {
                let k = r.len(16)?;
                polys.push((0..k).map(|_| r.point()).collect::<Result<Vec<_>>>()?);
            }
            PolygonalMap::from_polygons(width, height, polys)?
        }
        k => return Err(Error::Format(format!("unknown map kind {k}"))),
    };
    r.finish()?;
    Ok(map)
}

fn mode_code(m: Mode) -> u8 {
    match m {
        Mode::Uniform => 0,
        Mode::WorkloadAware => 1,
    }
}

fn encode_meta(meta: &BuildMeta, hash: &[u8; 32], cell_size: f64, nx: usize, ny: usize) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(hash);
    w.f64(cell_size);
    w.len(nx);
    w.len(ny);
    w.u8(mode_code(meta.mode));
    w.f64(meta.budget_percent);
    w.u64(meta.budget_units);
    w.f64(meta.alpha);
    w.u64(meta.seed);
    w.u64(meta.initial_units);
    w.u64(meta.merges);
    w.u8(match meta.outcome {
        Outcome::Fit => 0,
        Outcome::SingleRegionOverflow => 1,
    });
    w.0
}

struct MetaSection {
    hash: [u8; 32],
    cell_size: f64,
    nx: usize,
    ny: usize,
    meta: BuildMeta,
}

fn decode_meta(buf: &[u8]) -> Result<MetaSection> {
    let mut r = Reader::new(buf, "meta");
    let hash: [u8; 32] = r.take(32)?.try_into().unwrap();
    let cell_size = r.f64()?;
    let nx = r.u32()? as usize;
    let ny = r.u32()? as usize;
    let mode = match r.u8()? {
        0 => Mode::Uniform,
        1 => Mode::WorkloadAware,
        k => return Err(Error::Format(format!("unknown mode {k}"))),
    };
    let meta = BuildMeta {
        mode,
        budget_percent: r.f64()?,
        budget_units: r.u64()?,
        alpha: r.f64()?,
        seed: r.u64()?,
        initial_units: r.u64()?,
        merges: r.u64()?,
        outcome: match r.u8()? {
            0 => Outcome::Fit,
            1 => Outcome::SingleRegionOverflow,
            k => return Err(Error::Format(format!("unknown outcome {k}"))),
        },
    };
    r.finish()?;
    Ok(MetaSection {
        hash,
        cell_size,
        nx,
        ny,
        meta,
    })
}

fn encode_hubs(hl: &HubLabelSet) -> Vec<u8> {
    let mut w = Writer::default();
    w.len(hl.len());
    for list in &hl.labels {
        w.len(list.len());
        for l in list {
            w.len(l.hub);
            w.f64(l.dist);
            w.len(l.next_hop);
        }
    }
    w.0
}

fn decode_hubs(buf: &[u8]) -> Result<HubLabelSet> {
    let mut r = Reader::new(buf, "hub label");
    let n = r.len(4)?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = r.len(16)?;
        let mut list = Vec::with_capacity(k);
        for _ in 0..k {
            let hub = r.u32()? as usize;
            let dist = r.f64()?;
            let next_hop = r.u32()? as usize;
            if hub >= n || next_hop >= n {
                return Err(Error::Format(format!("label refers to vertex beyond {n}")));
            }
            list.push(HubLabel {
                hub,
                dist,
                next_hop,
            });
        }
        labels.push(list);
    }
    r.finish()?;
    Ok(HubLabelSet { labels })
}

fn encode_regions(regions: &[Region]) -> Vec<u8> {
    let mut w = Writer::default();
    w.len(regions.len());
    for r in regions {
        w.f64(r.score);
        w.len(r.cells.len());
        for &c in &r.cells {
            w.len(c);
        }
        w.len(r.hubs.len());
        for &h in &r.hubs {
            w.u32(h);
        }
        for &o in &r.offsets {
            w.u32(o);
        }
        w.len(r.entries.len());
        for e in &r.entries {
            w.u32(e.via);
            w.f64(e.dist);
        }
    }
    w.0
}

fn decode_regions(buf: &[u8], vertices: usize) -> Result<Vec<Region>> {
    let mut r = Reader::new(buf, "region");
    let n = r.len(16)?;
    let mut regions = Vec::with_capacity(n);
    for id in 0..n {
        let score = r.f64()?;
        let nc = r.len(4)?;
        let cells = (0..nc)
            .map(|_| Ok(r.u32()? as usize))
            .collect::<Result<Vec<_>>>()?;
        let nh = r.len(4)?;
        let hubs = (0..nh).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let no = if nh == 0 { 0 } else { nh + 1 };
        let offsets = (0..no).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let ne = r.len(12)?;
        let entries = (0..ne)
            .map(|_| {
                Ok(ViaEntry {
                    via: r.u32()?,
                    dist: r.f64()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let region = Region {
            id,
            cells,
            hubs,
            offsets,
            entries,
            score,
        };
        region.validate()?;
        let out_of_range = region.hubs.iter().any(|&h| h as usize >= vertices)
            || region.entries.iter().any(|e| e.via as usize >= vertices);
        if out_of_range {
            return Err(Error::Format(format!(
                "region {id} refers to a missing vertex"
            )));
        }
        regions.push(region);
    }
    r.finish()?;
    Ok(regions)
}

fn encode_mapper(m: &RegionMapper) -> Vec<u8> {
    let mut w = Writer::default();
    w.len(m.map.len());
    for c in &m.map {
        w.u32(c.unwrap_or(u32::MAX));
    }
    w.0
}

fn decode_mapper(buf: &[u8]) -> Result<RegionMapper> {
    let mut r = Reader::new(buf, "mapper");
    let n = r.len(4)?;
    let map = (0..n)
        .map(|_| Ok(Some(r.u32()?).filter(|&v| v != u32::MAX)))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(RegionMapper { map })
}

fn encode_clusters(spec: &ClusterSpec) -> Vec<u8> {
    let mut w = Writer::default();
    w.u64(spec.seed);
    w.len(spec.rects.len());
    for r in &spec.rects {
        w.point(r.min);
        w.point(r.max);
    }
    w.0
}

fn decode_clusters(buf: &[u8]) -> Result<ClusterSpec> {
    let mut r = Reader::new(buf, "cluster");
    let seed = r.u64()?;
    let n = r.len(32)?;
    let rects = (0..n)
        .map(|_| Ok(Rect::new(r.point()?, r.point()?)))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(ClusterSpec { rects, seed })
}

impl IndexBundle {
    pub fn map_hash(&self) -> [u8; 32] {
        map_hash(&self.map)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let map_bytes = encode_map(&self.map);
        let hash: [u8; 32] = Sha256::digest(&map_bytes).into();
        let idx = &self.index;
        let mut sections = vec![
            (
                META,
                encode_meta(&self.meta, &hash, idx.cell_size, idx.nx, idx.ny),
            ),
            (MAP, map_bytes),
            (HUBS, encode_hubs(&self.labels)),
            (REGIONS, encode_regions(&idx.regions)),
            (MAPPER, encode_mapper(&idx.mapper)),
        ];
        if let Some(c) = &self.clusters {
            sections.push((CLUSTERS, encode_clusters(c)));
        }
        let mut w = Writer::default();
        w.0.extend_from_slice(&MAGIC);
        w.u32(VERSION);
        w.len(sections.len());
        let mut offset = (16 + sections.len() * 20) as u64;
        for (tag, body) in &sections {
            w.0.extend_from_slice(tag);
            w.u64(offset);
            w.u64(body.len() as u64);
            offset += body.len() as u64;
        }
        for (_, body) in &sections {
            w.0.extend_from_slice(body);
        }
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        if buf.len() < 16 || buf[..8] != MAGIC {
            return Err(Error::Format("not an index file".into()));
        }
        let mut r = Reader::new(&buf[8..], "header");
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let count = r.u32()? as usize;
        let mut table = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let tag: [u8; 4] = r.take(4)?.try_into().unwrap();
            let (off, len) = (r.u64()? as usize, r.u64()? as usize);
            let body = off
                .checked_add(len)
                .and_then(|end| buf.get(off..end))
                .ok_or_else(|| Error::Format("section outside file".into()))?;
            table.push((tag, body));
        }
        let section = |tag: [u8; 4]| table.iter().find(|(t, _)| *t == tag).map(|(_, b)| *b);
        let need = |tag: [u8; 4]| {
            section(tag).ok_or_else(|| {
                Error::Format(format!("missing {} section", String::from_utf8_lossy(&tag)))
            })
        };

        let meta = decode_meta(need(META)?)?;
        let map_bytes = need(MAP)?;
        let hash: [u8; 32] = Sha256::digest(map_bytes).into();
        if hash != meta.hash {
            return Err(Error::Format("map section does not match its hash".into()));
        }
        let map = decode_map(map_bytes)?;
        let labels = decode_hubs(need(HUBS)?)?;
        if labels.len() != map.vertices().len() {
            return Err(Error::Format(format!(
                "{} label lists for {} vertices",
                labels.len(),
                map.vertices().len()
            )));
        }
        if !meta.cell_size.is_finite()
            || meta.cell_size <= 0.0
            || map.cell_dims(meta.cell_size) != (meta.nx, meta.ny)
        {
            return Err(Error::Format("cell grid does not match the map".into()));
        }
        let regions = decode_regions(need(REGIONS)?, labels.len())?;
        let index = EhlIndex::from_regions(meta.cell_size, meta.nx, meta.ny, regions)?;
        if decode_mapper(need(MAPPER)?)? != index.mapper {
            return Err(Error::Format("mapper disagrees with region cells".into()));
        }
        let clusters = section(CLUSTERS).map(decode_clusters).transpose()?;
        Ok(IndexBundle {
            map,
            labels,
            index,
            meta: meta.meta,
            clusters,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
