//! Grid maps, their polygonal obstacle representation and point predicates.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{segment_hits, signed_area, Point, Rect, EPS};

/// Row-major occupancy grid. Cell `(x, y)` covers `[x, x+1] × [y, y+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Invalid("grid dimensions must be positive".into()));
        }
        if blocked.len() != width * height {
            return Err(Error::Invalid(format!(
                "expected {} cells, got {}",
                width * height,
                blocked.len()
            )));
        }
        Ok(GridMap {
            width,
            height,
            blocked,
        })
    }

    /// Builds a grid from rows of `.` (free) and `@` (blocked); row 0 is `y = 0`.
    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut blocked = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::parse(i + 1, "ragged row"));
            }
            for (j, ch) in row.chars().enumerate() {
                blocked.push(symbol_blocked(ch).ok_or_else(|| {
                    Error::parse(i + 1, format!("unknown symbol {ch:?} at column {j}"))
                })?);
            }
        }
        GridMap::new(width, height, blocked)
    }

    /// Random grid where each cell is blocked with probability `density`.
    pub fn random(width: usize, height: usize, density: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocked = (0..width * height).map(|_| rng.gen_bool(density)).collect();
        GridMap::new(width, height, blocked)
    }

    /// Out-of-bounds cells count as blocked.
    pub fn is_blocked(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return true;
        }
        self.blocked[y as usize * self.width + x as usize]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    /// Blocked flags of the four cells around lattice point `(x, y)`, ordered
    /// SW, SE, NE, NW.
    fn corner_cells(&self, x: i64, y: i64) -> [bool; 4] {
        [
            self.is_blocked(x - 1, y - 1),
            self.is_blocked(x, y - 1),
            self.is_blocked(x, y),
            self.is_blocked(x - 1, y),
        ]
    }

    /// A lattice point where exactly two diagonally opposite cells are blocked.
    pub fn is_pinch(&self, x: i64, y: i64) -> bool {
        let c = self.corner_cells(x, y);
        (c == [true, false, true, false]) || (c == [false, true, false, true])
    }
}

fn symbol_blocked(ch: char) -> Option<bool> {
    match ch {
        '.' | 'G' => Some(false),
        '@' | 'O' | 'T' | 'S' | 'W' => Some(true),
        _ => None,
    }
}

/// Parses the MovingAI `.map` text format.
pub fn parse_movingai_map(text: &[u8]) -> Result<GridMap> {
    let text = std::str::from_utf8(text).map_err(|_| Error::Format("map is not UTF-8".into()))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let mut height = None;
    let mut width = None;
    let mut saw_type = false;
    loop {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing `map` header line"))?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("type") => saw_type = true,
            Some("height") => height = Some(header_value(no, parts.next())?),
            Some("width") => width = Some(header_value(no, parts.next())?),
            Some("map") => {
                if !saw_type {
                    return Err(Error::parse(no, "missing `type` header line"));
                }
                break;
            }
            Some(other) => {
                return Err(Error::parse(
                    no,
                    format!("unexpected header field {other:?}"),
                ))
            }
            None => continue,
        }
    }
    let height = height.ok_or_else(|| Error::parse(0, "missing height"))?;
    let width = width.ok_or_else(|| Error::parse(0, "missing width"))?;
    let mut blocked = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if rows == height {
            return Err(Error::parse(
                no,
                "row count mismatch: more rows than header height",
            ));
        }
        if line.chars().count() != width {
            return Err(Error::parse(
                no,
                format!("row width {} != {width}", line.chars().count()),
            ));
        }
        for ch in line.chars() {
            blocked.push(
                symbol_blocked(ch)
                    .ok_or_else(|| Error::parse(no, format!("unknown symbol {ch:?}")))?,
            );
        }
        rows += 1;
    }
    if rows != height {
        return Err(Error::parse(
            0,
            format!("row count mismatch: header says {height}, found {rows}"),
        ));
    }
    GridMap::new(width, height, blocked)
}

/// Parses the polygon text format: a `polygons <width> <height>` line, then
/// one obstacle per line as `x1 y1 x2 y2 ...`. `#` starts a comment line.
pub fn parse_polygon_map(text: &str) -> Result<PolygonalMap> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (no, header) = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty polygon map"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let (width, height) = match dims.as_slice() {
        ["polygons", w, h] => match (w.parse::<f64>(), h.parse::<f64>()) {
            (Ok(w), Ok(h)) => (w, h),
            _ => return Err(Error::parse(no, "bad map dimensions")),
        },
        _ => return Err(Error::parse(no, "expected `polygons <width> <height>`")),
    };
    let mut polys = Vec::new();
    for (no, line) in lines {
        let v = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::parse(no, format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if v.len() % 2 != 0 || v.len() < 6 {
            return Err(Error::parse(
                no,
                "polygon needs at least 3 coordinate pairs",
            ));
        }
        polys.push(v.chunks(2).map(|c| Point::new(c[0], c[1])).collect());
    }
    PolygonalMap::from_polygons(width, height, polys)
}

/// Reads either a MovingAI grid map or a polygon map, by the first keyword.
pub fn load_map(bytes: &[u8]) -> Result<PolygonalMap> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("map is not UTF-8".into()))?;
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    if first.is_some_and(|l| l.starts_with("polygons")) {
        parse_polygon_map(text)
    } else {
        Ok(extract_obstacles(&parse_movingai_map(bytes)?))
    }
}

fn header_value(line: usize, v: Option<&str>) -> Result<usize> {
    v.and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .ok_or_else(|| Error::parse(line, "expected a positive integer"))
}

/// One obstacle: its outer boundary loop first, then any holes.
/// Loops keep the obstacle interior on their left.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub loops: Vec<Vec<Point>>,
}

impl Obstacle {
    /// Even-odd containment over all loops; `None` when `p` lies on the boundary.
    fn contains(&self, p: Point) -> Option<bool> {
        let mut inside = false;
        for ring in &self.loops {
            let n = ring.len();
            for i in 0..n {
                let a = ring[i];
                let b = ring[(i + 1) % n];
                if on_segment(p, a, b) {
                    return None;
                }
                if (a.y > p.y) != (b.y > p.y) {
                    let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                    if x > p.x {
                        inside = !inside;
                    }
                }
            }
        }
        Some(inside)
    }
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return p.dist(a) <= EPS;
    }
    let scale = len.max(1.0);
    if ((p - a).cross(d) / len).abs() > EPS * scale {
        return false;
    }
    let t = (p - a).dot(d) / (len * len);
    (-EPS..=1.0 + EPS).contains(&t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexVertex {
    pub id: usize,
    pub pos: Point,
    pub obstacle: usize,
}

/// Traversable plane bounded by `[0, width] × [0, height]` with polygonal obstacles.
#[derive(Debug, Clone)]
pub struct PolygonalMap {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Obstacle>,
    pub grid: Option<GridMap>,
    vertices: Vec<ConvexVertex>,
    pinches: Vec<Point>,
    edges: Vec<(Point, Point)>,
}

impl PolygonalMap {
    pub fn vertices(&self) -> &[ConvexVertex] {
        &self.vertices
    }

    /// Corner points where obstacles touch diagonally; never traversable.
    pub fn pinches(&self) -> &[Point] {
        &self.pinches
    }

    /// All directed obstacle boundary edges.
    pub fn edges(&self) -> &[(Point, Point)] {
        &self.edges
    }

    pub fn in_bounds(&self, p: Point) -> bool {
        p.is_finite() && p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }

    /// True when `p` is in bounds and not strictly inside an obstacle.
    /// Boundary points are traversable, diagonal pinch corners are not.
    pub fn is_traversable(&self, p: Point) -> bool {
        self.in_bounds(p) && !self.strictly_blocked(p) && !self.is_pinch_point(p)
    }

    pub(crate) fn is_pinch_point(&self, p: Point) -> bool {
        match &self.grid {
            Some(g) => {
                let (rx, ry) = (p.x.round(), p.y.round());
                (p.x - rx).abs() <= EPS
                    && (p.y - ry).abs() <= EPS
                    && g.is_pinch(rx as i64, ry as i64)
            }
            None => self.pinches.iter().any(|q| q.approx_eq(p, EPS)),
        }
    }

    /// Whether `p` lies in the open interior of an obstacle. Points within
    /// `EPS` of a boundary are treated as on it.
    pub fn strictly_blocked(&self, p: Point) -> bool {
        match &self.grid {
            Some(g) => grid_point_blocked(g, p),
            None => self.obstacles.iter().any(|o| o.contains(p) == Some(true)),
        }
    }

    /// Row-major cell index of `p` for square cells of side `cell_size`.
    pub fn cell_of(&self, p: Point, cell_size: f64) -> Result<usize> {
        if !self.in_bounds(p) {
            return Err(Error::Domain(format!(
                "point ({}, {}) outside map",
                p.x, p.y
            )));
        }
        let (nx, ny) = self.cell_dims(cell_size);
        let cx = ((p.x / cell_size).floor() as usize).min(nx - 1);
        let cy = ((p.y / cell_size).floor() as usize).min(ny - 1);
        Ok(cy * nx + cx)
    }

    /// Number of cell columns and rows for the given cell size.
    pub fn cell_dims(&self, cell_size: f64) -> (usize, usize) {
        let nx = ((self.width / cell_size) - 1e-9).ceil().max(1.0) as usize;
        let ny = ((self.height / cell_size) - 1e-9).ceil().max(1.0) as usize;
        (nx, ny)
    }

    /// Closed square of a cell, clipped to the map bounds.
    pub fn cell_rect(&self, cell: usize, cell_size: f64) -> Rect {
        let (nx, _) = self.cell_dims(cell_size);
        let (cx, cy) = ((cell % nx) as f64, (cell / nx) as f64);
        Rect::new(
            Point::new(cx * cell_size, cy * cell_size),
            Point::new(
                ((cx + 1.0) * cell_size).min(self.width),
                ((cy + 1.0) * cell_size).min(self.height),
            ),
        )
    }

    /// Whether a cell has no traversable area.
    pub fn cell_fully_blocked(&self, cell: usize, cell_size: f64) -> bool {
        let r = self.cell_rect(cell, cell_size);
        match &self.grid {
            Some(g) => {
                let (x0, x1) = (r.min.x.floor() as i64, (r.max.x - EPS).ceil() as i64);
                let (y0, y1) = (r.min.y.floor() as i64, (r.max.y - EPS).ceil() as i64);
                (y0..y1.max(y0 + 1)).all(|y| (x0..x1.max(x0 + 1)).all(|x| g.is_blocked(x, y)))
            }
            None => {
                let center = r.min.lerp(r.max, 0.5);
                let crosses = self
                    .edges
                    .iter()
                    .any(|&(a, b)| r.intersects_segment(a, b, 0.0));
                !crosses && self.inside_polygons(center)
            }
        }
    }

    /// Strict interior test against the traced polygons only, ignoring the grid.
    pub fn inside_polygons(&self, p: Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(p) == Some(true))
    }

    /// Points at which the visible region around a vertex can change shape:
    /// polygon corners, pinches, frame corners and crossings of overlapping
    /// polygons.
    pub fn critical_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self
            .obstacles
            .iter()
            .flat_map(|o| o.loops.iter().flatten().copied())
            .collect();
        pts.extend_from_slice(&self.pinches);
        pts.extend(Rect::new(Point::new(0.0, 0.0), Point::new(self.width, self.height)).corners());
        if self.grid.is_none() {
            let mut hits = Vec::new();
            for (i, &(a, b)) in self.edges.iter().enumerate() {
                for &(c, d) in &self.edges[i + 1..] {
                    hits.clear();
                    segment_hits(a, b, c, d, &mut hits);
                    pts.extend(hits.iter().map(|&t| a.lerp(b, t)));
                }
            }
        }
        pts
    }

    /// Builds a map from simple polygons, each an obstacle without holes.
    ///
    /// Convex vertices keep the input order. A corner is dropped when it lies
    /// on the frame or on or inside another polygon.
    pub fn from_polygons(width: f64, height: f64, polygons: Vec<Vec<Point>>) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::Invalid("map bounds must be positive".into()));
        }
        let mut obstacles = Vec::with_capacity(polygons.len());
        for mut poly in polygons {
            if poly.len() < 3 || poly.iter().any(|p| !p.is_finite()) {
                return Err(Error::Invalid(
                    "polygon needs at least 3 finite points".into(),
                ));
            }
            if signed_area(&poly) < 0.0 {
                poly.reverse();
            }
            obstacles.push(Obstacle { loops: vec![poly] });
        }
        let on_frame = |p: Point| {
            p.x.abs() <= EPS
                || p.y.abs() <= EPS
                || (p.x - width).abs() <= EPS
                || (p.y - height).abs() <= EPS
        };
        let mut vertices: Vec<ConvexVertex> = Vec::new();
        let mut pinches: Vec<Point> = Vec::new();
        for (oi, o) in obstacles.iter().enumerate() {
            let ring = &o.loops[0];
            let n = ring.len();
            for i in 0..n {
                let prev = ring[(i + n - 1) % n];
                let v = ring[i];
                let next = ring[(i + 1) % n];
                if (v - prev).cross(next - v) <= 0.0 || on_frame(v) {
                    continue;
                }
                let touched = obstacles
                    .iter()
                    .enumerate()
                    .any(|(oj, other)| oj != oi && other.contains(v) != Some(false));
                if touched {
                    if !pinches.iter().any(|q| q.approx_eq(v, EPS)) {
                        pinches.push(v);
                    }
                    continue;
                }
                if vertices.iter().any(|c| c.pos.approx_eq(v, EPS)) {
                    continue;
                }
                vertices.push(ConvexVertex {
                    id: vertices.len(),
                    pos: v,
                    obstacle: oi,
                });
            }
        }
        Ok(Self::assemble(
            width, height, obstacles, None, vertices, pinches,
        ))
    }

    fn assemble(
        width: f64,
        height: f64,
        obstacles: Vec<Obstacle>,
        grid: Option<GridMap>,
        vertices: Vec<ConvexVertex>,
        pinches: Vec<Point>,
    ) -> Self {
        let edges = obstacles
            .iter()
            .flat_map(|o| o.loops.iter())
            .flat_map(|ring| (0..ring.len()).map(move |i| (ring[i], ring[(i + 1) % ring.len()])))
            .collect();
        PolygonalMap {
            width,
            height,
            obstacles,
            grid,
            vertices,
            pinches,
            edges,
        }
    }
}

/// A point is blocked iff every cell whose closed square contains it is blocked.
pub(crate) fn grid_point_blocked(g: &GridMap, p: Point) -> bool {
    let xs = axis_cells(p.x);
    let ys = axis_cells(p.y);
    for &cx in xs.iter().flatten() {
        for &cy in ys.iter().flatten() {
            if !g.is_blocked(cx, cy) {
                return false;
            }
        }
    }
    true
}

/// Cell indices along one axis whose closed interval contains `v`.
fn axis_cells(v: f64) -> [Option<i64>; 2] {
    let r = v.round();
    if (v - r).abs() <= EPS {
        [Some(r as i64 - 1), Some(r as i64)]
    } else {
        [Some(v.floor() as i64), None]
    }
}

/// Traces blocked components into rectilinear polygons and finds convex vertices.
pub fn extract_obstacles(grid: &GridMap) -> PolygonalMap {
    let (w, h) = (grid.width as i64, grid.height as i64);
    let comp = label_components(grid);
    let n_comp = comp.iter().flatten().max().map_or(0, |&c| c + 1);

    // directed unit edges keyed by start point, interior on the left
    let mut out: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let mut starts: Vec<Vec<(i64, i64)>> = vec![Vec::new(); n_comp];
    for y in 0..h {
        for x in 0..w {
            let Some(c) = comp[(y * w + x) as usize] else {
                continue;
            };
            let mut add = |a: (i64, i64), b: (i64, i64)| {
                out.entry(a).or_default().push(b);
                starts[c].push(a);
            };
            if !grid.is_blocked(x, y - 1) || y == 0 {
                add((x, y), (x + 1, y));
            }
            if !grid.is_blocked(x + 1, y) || x == w - 1 {
                add((x + 1, y), (x + 1, y + 1));
            }
            if !grid.is_blocked(x, y + 1) || y == h - 1 {
                add((x + 1, y + 1), (x, y + 1));
            }
            if !grid.is_blocked(x - 1, y) || x == 0 {
                add((x, y + 1), (x, y));
            }
        }
    }

    let mut obstacles = Vec::with_capacity(n_comp);
    for mut s in starts {
        s.sort_unstable();
        s.dedup();
        let mut loops = Vec::new();
        for start in s {
            while out.get(&start).is_some_and(|v| !v.is_empty()) {
                loops.push(trace_loop(&mut out, start));
            }
        }
        loops.sort_by(|a, b| signed_area(b).total_cmp(&signed_area(a)));
        obstacles.push(Obstacle { loops });
    }

    let mut vertices = Vec::new();
    let mut pinches = Vec::new();
    for y in 0..=h {
        for x in 0..=w {
            let cells = grid.corner_cells(x, y);
            if grid.is_pinch(x, y) {
                pinches.push(Point::new(x as f64, y as f64));
            }
            if cells.iter().filter(|&&b| b).count() != 1 {
                continue;
            }
            let k = cells.iter().position(|&b| b).unwrap();
            let (cx, cy) = [(x - 1, y - 1), (x, y - 1), (x, y), (x - 1, y)][k];
            let obstacle = comp[(cy * w + cx) as usize].expect("blocked in-bounds cell");
            vertices.push(ConvexVertex {
                id: vertices.len(),
                pos: Point::new(x as f64, y as f64),
                obstacle,
            });
        }
    }
    PolygonalMap::assemble(
        w as f64,
        h as f64,
        obstacles,
        Some(grid.clone()),
        vertices,
        pinches,
    )
}

fn label_components(grid: &GridMap) -> Vec<Option<usize>> {
    let (w, h) = (grid.width, grid.height);
    let mut comp = vec![None; w * h];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if !grid.blocked[i] || comp[i].is_some() {
            continue;
        }
        comp[i] = Some(next);
        queue.push_back(i);
        while let Some(c) = queue.pop_front() {
            let (x, y) = (c % w, c / w);
            let nbrs = [
                (x > 0).then(|| c - 1),
                (x + 1 < w).then(|| c + 1),
                (y > 0).then(|| c - w),
                (y + 1 < h).then(|| c + w),
            ];
            for n in nbrs.into_iter().flatten() {
                if grid.blocked[n] && comp[n].is_none() {
                    comp[n] = Some(next);
                    queue.push_back(n);
                }
            }
        }
        next += 1;
    }
    comp
}

fn trace_loop(out: &mut HashMap<(i64, i64), Vec<(i64, i64)>>, start: (i64, i64)) -> Vec<Point> {
    let mut pts = vec![start];
    let mut cur = start;
    let mut dir: Option<(i64, i64)> = None;
    loop {
        let cands = out.get_mut(&cur).expect("dangling boundary edge");
        let pick = match dir {
            None => 0,
            Some(d) => {
                // prefer left turn, then straight, then right
                let rank = |n: &(i64, i64)| {
                    let e = (n.0 - cur.0, n.1 - cur.1);
                    let cross = d.0 * e.1 - d.1 * e.0;
                    match cross.signum() {
                        1 => 0,
                        0 => 1,
                        _ => 2,
                    }
                };
                (0..cands.len()).min_by_key(|&i| rank(&cands[i])).unwrap()
            }
        };
        let next = cands.swap_remove(pick);
        dir = Some((next.0 - cur.0, next.1 - cur.1));
        cur = next;
        if cur == start {
            // a second edge leaving a pinch start is traced as its own loop
            break;
        }
        pts.push(cur);
    }
    simplify(pts)
}

/// Drops lattice points where the boundary continues straight.
fn simplify(pts: Vec<(i64, i64)>) -> Vec<Point> {
    let n = pts.len();
    let mut res = Vec::with_capacity(n);
    for i in 0..n {
        let a = pts[(i + n - 1) % n];
        let b = pts[i];
        let c = pts[(i + 1) % n];
        let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
        if cross != 0 {
            res.push(Point::new(b.0 as f64, b.1 as f64));
        }
    }
    res
}
