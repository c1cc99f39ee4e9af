//! Query generators: clustered and uniform pairs, historical workloads and
//! query-file formats.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::map::{GridMap, PolygonalMap};

pub const MAX_CLUSTER_ATTEMPTS: usize = 10_000;
const MAX_PAIR_ATTEMPTS: usize = 1_000_000;

pub type Query = (Point, Point);

/// Axis-aligned rectangles, each 10% of the map's width and height.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub rects: Vec<Rect>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub enum Distribution<'a> {
    Uniform,
    Cluster(&'a ClusterSpec),
}

/// Per-cell endpoint counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    pub counts: Vec<u64>,
    pub queries: usize,
}

/// Free cells labelled by 4-connected component.
#[derive(Debug, Clone)]
pub struct Components {
    width: usize,
    height: usize,
    label: Vec<Option<u32>>,
    free: Vec<usize>,
}

impl Components {
    pub fn new(grid: &GridMap) -> Self {
        let (w, h) = (grid.width, grid.height);
        let mut label = vec![None; w * h];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..w * h {
            if grid.blocked[start] || label[start].is_some() {
                continue;
            }
            label[start] = Some(next);
            stack.push(start);
            while let Some(c) = stack.pop() {
                let (x, y) = (c % w, c / w);
                let around = [
                    (x > 0).then(|| c - 1),
                    (x + 1 < w).then(|| c + 1),
                    (y > 0).then(|| c - w),
                    (y + 1 < h).then(|| c + w),
                ];
                for n in around.into_iter().flatten() {
                    if !grid.blocked[n] && label[n].is_none() {
                        label[n] = Some(next);
                        stack.push(n);
                    }
                }
            }
            next += 1;
        }
        let free = (0..w * h).filter(|&c| !grid.blocked[c]).collect();
        Components {
            width: w,
            height: h,
            label,
            free,
        }
    }

    /// Component of the free cell containing `p`, if any.
    pub fn of(&self, p: Point) -> Option<u32> {
        if !(p.is_finite() && p.x >= 0.0 && p.y >= 0.0) {
            return None;
        }
        let (x, y) = (p.x.floor() as usize, p.y.floor() as usize);
        if x > self.width || y > self.height {
            return None;
        }
        let (x, y) = (x.min(self.width - 1), y.min(self.height - 1));
        self.label[y * self.width + x]
    }

    pub fn free_area(&self) -> usize {
        self.free.len()
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Point {
        let c = self.free[rng.gen_range(0..self.free.len())];
        Point::new(
            (c % self.width) as f64 + rng.gen::<f64>(),
            (c / self.width) as f64 + rng.gen::<f64>(),
        )
    }
}

fn grid_of(map: &PolygonalMap) -> Result<&GridMap> {
    map.grid
        .as_ref()
        .ok_or_else(|| Error::Invalid("query generation needs a grid map".into()))
}

/// Places `x` rectangles centred on random traversable points so that every
/// centre shares its component with another centre.
pub fn gen_cluster_spec(map: &PolygonalMap, x: usize, seed: u64) -> Result<ClusterSpec> {
    let grid = grid_of(map)?;
    let comps = Components::new(grid);
    let (w, h) = (0.1 * map.width, 0.1 * map.height);
    if x == 0 {
        return Err(Error::Invalid("cluster count must be positive".into()));
    }
    if (comps.free_area() as f64) < x as f64 * w * h {
        return Err(Error::Invalid(format!(
            "traversable area {} cannot host {x} rectangles of {w}x{h}",
            comps.free_area()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_CLUSTER_ATTEMPTS {
        let centers: Vec<Point> = (0..x).map(|_| comps.random_point(&mut rng)).collect();
        let labels: Vec<Option<u32>> = centers.iter().map(|&c| comps.of(c)).collect();
        let linked = x == 1 || (0..x).all(|i| (0..x).any(|j| j != i && labels[j] == labels[i]));
        if !linked {
            continue;
        }
        let rects = centers
            .iter()
            .map(|c| {
                let min_x = (c.x - w / 2.0).clamp(0.0, map.width - w);
                let min_y = (c.y - h / 2.0).clamp(0.0, map.height - h);
                Rect::new(Point::new(min_x, min_y), Point::new(min_x + w, min_y + h))
            })
            .collect();
        return Ok(ClusterSpec { rects, seed });
    }
    Err(Error::Invalid(format!(
        "no reachable placement of {x} rectangles after {MAX_CLUSTER_ATTEMPTS} attempts"
    )))
}

/// Stateful pair sampler over one distribution.
pub struct Sampler<'a> {
    comps: Components,
    dist: Distribution<'a>,
    width: f64,
    height: f64,
}

impl<'a> Sampler<'a> {
    pub fn new(map: &PolygonalMap, dist: Distribution<'a>) -> Result<Self> {
        let comps = Components::new(grid_of(map)?);
        if comps.free_area() == 0 {
            return Err(Error::Invalid("map has no traversable cell".into()));
        }
        if let Distribution::Cluster(spec) = dist {
            if spec.rects.is_empty() {
                return Err(Error::Invalid("cluster spec has no rectangles".into()));
            }
        }
        Ok(Sampler {
            comps,
            dist,
            width: map.width,
            height: map.height,
        })
    }

    pub fn components(&self) -> &Components {
        &self.comps
    }

    fn point_in(&self, r: &Rect, rng: &mut ChaCha8Rng) -> Option<Point> {
        for _ in 0..1000 {
            let p = Point::new(
                rng.gen_range(r.min.x..=r.max.x),
                rng.gen_range(r.min.y..=r.max.y),
            );
            if self.comps.of(p).is_some() {
                return Some(p);
            }
        }
        None
    }

    fn endpoint(&self, rng: &mut ChaCha8Rng) -> Option<Point> {
        let r = match self.dist {
            Distribution::Uniform => {
                Rect::new(Point::new(0.0, 0.0), Point::new(self.width, self.height))
            }
            Distribution::Cluster(spec) => spec.rects[rng.gen_range(0..spec.rects.len())],
        };
        self.point_in(&r, rng)
    }

    /// Draws one reachable pair.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Query> {
        for _ in 0..MAX_PAIR_ATTEMPTS {
            let (Some(s), Some(t)) = (self.endpoint(rng), self.endpoint(rng)) else {
                continue;
            };
            if self.comps.of(s) == self.comps.of(t) {
                return Ok((s, t));
            }
        }
        Err(Error::Invalid("could not draw a reachable pair".into()))
    }
}

pub fn sample_queries(
    map: &PolygonalMap,
    dist: Distribution,
    n: usize,
    seed: u64,
) -> Result<Vec<Query>> {
    let sampler = Sampler::new(map, dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

/// Counts both endpoints of `n` sampled pairs per cell.
pub fn build_workload(
    map: &PolygonalMap,
    dist: Distribution,
    n: usize,
    cell_size: f64,
    seed: u64,
) -> Result<Workload> {
    let (nx, ny) = map.cell_dims(cell_size);
    let mut counts = vec![0u64; nx * ny];
    for (s, t) in sample_queries(map, dist, n, seed)? {
        counts[map.cell_of(s, cell_size)?] += 1;
        counts[map.cell_of(t, cell_size)?] += 1;
    }
    Ok(Workload { counts, queries: n })
}

/// `floor(n * y / 100)` pairs from `spec`, the rest uniform, shuffled.
pub fn gen_mixed_queries(
    map: &PolygonalMap,
    spec: &ClusterSpec,
    n: usize,
    adherence: u32,
    seed: u64,
) -> Result<Vec<Query>> {
    if adherence > 100 {
        return Err(Error::Invalid(format!("adherence {adherence}% above 100")));
    }
    let clustered = n * adherence as usize / 100;
    let cluster = Sampler::new(map, Distribution::Cluster(spec))?;
    let uniform = Sampler::new(map, Distribution::Uniform)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = if i < clustered { &cluster } else { &uniform };
        out.push(s.sample(&mut rng)?);
    }
    out.shuffle(&mut rng);
    Ok(out)
}

/// One `sx sy tx ty` line per query.
pub fn write_queries(queries: &[Query]) -> String {
    let mut out = String::new();
    for (s, t) in queries {
        out.push_str(&format!("{} {} {} {}\n", s.x, s.y, t.x, t.y));
    }
    out
}

/// Parses `sx sy tx ty` lines; blank lines and `#` comments are skipped.
pub fn parse_queries(text: &str) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse_floats(line, i + 1)?;
        if v.len() != 4 {
            return Err(Error::parse(
                i + 1,
                format!("expected 4 numbers, got {}", v.len()),
            ));
        }
        out.push((Point::new(v[0], v[1]), Point::new(v[2], v[3])));
    }
    Ok(out)
}

fn parse_floats(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("bad number {tok:?}")))
        })
        .collect()
}

/// Reads a MovingAI scenario: start and goal cells become their centres.
pub fn parse_scen(text: &str) -> Result<Vec<Query>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_start().starts_with("version") => {}
        _ => return Err(Error::parse(1, "missing version line")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(Error::parse(
                i + 1,
                format!("expected at least 8 columns, got {}", cols.len()),
            ));
        }
        let mut v = [0f64; 4];
        for (k, col) in cols[4..8].iter().enumerate() {
            v[k] = col
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::parse(i + 1, format!("bad coordinate {col:?}")))?
                as f64
                + 0.5;
        }
        out.push((Point::new(v[0], v[1]), Point::new(v[2], v[3])));
    }
    Ok(out)
}

impl ClusterSpec {
    /// Text form: a `# seed N` line then `minx miny maxx maxy` per rectangle.
    pub fn to_text(&self) -> String {
        let mut out = format!("# seed {}\n", self.seed);
        for r in &self.rects {
            out.push_str(&format!(
                "{} {} {} {}\n",
                r.min.x, r.min.y, r.max.x, r.max.y
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = 0;
        let mut rects = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# seed") {
                seed = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(i + 1, "bad seed"))?;
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v = parse_floats(line, i + 1)?;
            if v.len() != 4 || v[0] > v[2] || v[1] > v[3] {
                return Err(Error::parse(i + 1, "expected minx miny maxx maxy"));
            }
            rects.push(Rect::new(Point::new(v[0], v[1]), Point::new(v[2], v[3])));
        }
        Ok(ClusterSpec { rects, seed })
    }
}
