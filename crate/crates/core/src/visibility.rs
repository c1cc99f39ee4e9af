//! Visibility predicates, visible regions of convex vertices and the
//! visibility graph.

use std::f64::consts::{FRAC_PI_4, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{segment_hits, Point, Rect, EPS};
use crate::map::{grid_point_blocked, ConvexVertex, GridMap, PolygonalMap};

/// Angular offset used to probe just inside a wedge between two critical rays.
const RAY_DELTA: f64 = 1e-10;
/// Slack when deciding whether a visible piece touches a cell.
const CELL_TOL: f64 = 1e-6;

/// Whether `p` and `q` see each other. Grazing edges and touching corners is
/// allowed, crossing an obstacle interior or a pinch corner is not.
pub fn co_visible(map: &PolygonalMap, p: Point, q: Point) -> Result<bool> {
    check_endpoint(map, p)?;
    check_endpoint(map, q)?;
    Ok(segment_clear(map, p, q))
}

pub(crate) fn check_endpoint(map: &PolygonalMap, p: Point) -> Result<()> {
    if !map.in_bounds(p) {
        return Err(Error::Domain(format!(
            "point ({}, {}) outside map",
            p.x, p.y
        )));
    }
    if map.strictly_blocked(p) || map.is_pinch_point(p) {
        return Err(Error::Domain(format!(
            "point ({}, {}) is inside an obstacle",
            p.x, p.y
        )));
    }
    Ok(())
}

/// Unchecked form of [`co_visible`].
pub fn segment_clear(map: &PolygonalMap, p: Point, q: Point) -> bool {
    first_block(map, p, q).is_none()
}

/// Same predicate as [`segment_clear`], always evaluated against the polygon
/// edges rather than the source grid.
pub fn segment_clear_by_edges(map: &PolygonalMap, p: Point, q: Point) -> bool {
    p == q || edge_first_block(map, p, q).is_none()
}

/// Parameter along `p -> q` where the segment first enters an obstacle
/// interior or meets a pinch corner.
pub fn first_block(map: &PolygonalMap, p: Point, q: Point) -> Option<f64> {
    if p == q {
        return None;
    }
    match &map.grid {
        Some(g) => grid_first_block(map, g, p, q),
        None => edge_first_block(map, p, q),
    }
}

/// Successive crossings of a segment with the lines `coord = k`, k integer.
struct Crossings {
    origin: f64,
    delta: f64,
    k: f64,
    step: f64,
}

impl Crossings {
    fn new(origin: f64, delta: f64) -> Self {
        let (k, step) = if delta > 0.0 {
            (origin.floor() + 1.0, 1.0)
        } else {
            (origin.ceil() - 1.0, -1.0)
        };
        Crossings {
            origin,
            delta,
            k,
            step,
        }
    }

    fn peek(&self) -> f64 {
        if self.delta == 0.0 {
            f64::INFINITY
        } else {
            (self.k - self.origin) / self.delta
        }
    }

    fn advance(&mut self) {
        self.k += self.step;
    }
}

fn grid_first_block(map: &PolygonalMap, g: &GridMap, p: Point, q: Point) -> Option<f64> {
    let d = q - p;
    let mut xs = Crossings::new(p.x, d.x);
    let mut ys = Crossings::new(p.y, d.y);
    let mut prev = 0.0;
    loop {
        let (tx, ty) = (xs.peek(), ys.peek());
        let t = tx.min(ty).min(1.0);
        if tx <= t {
            xs.advance();
        }
        if ty <= t {
            ys.advance();
        }
        if t > prev && grid_point_blocked(g, p.lerp(q, 0.5 * (prev + t))) {
            return Some(prev);
        }
        if t >= 1.0 {
            return None;
        }
        if t > 0.0 && map.is_pinch_point(p.lerp(q, t)) {
            return Some(t);
        }
        prev = t.max(prev);
    }
}

fn edge_first_block(map: &PolygonalMap, p: Point, q: Point) -> Option<f64> {
    let mut ts = vec![0.0, 1.0];
    for &(a, b) in map.edges() {
        segment_hits(p, q, a, b, &mut ts);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut first = ts
        .windows(2)
        .find(|w| map.inside_polygons(p.lerp(q, 0.5 * (w[0] + w[1]))))
        .map(|w| w[0]);
    let d = q - p;
    let dd = d.dot(d);
    for &c in map.pinches() {
        let t = (c - p).dot(d) / dd;
        if t > EPS && t < 1.0 - EPS && p.lerp(q, t).dist(c) <= EPS * d.norm().max(1.0) {
            first = Some(first.map_or(t, |f: f64| f.min(t)));
        }
    }
    first
}

/// Ids of all convex vertices visible from `p`, ascending.
pub fn visible_vertices_from_point(map: &PolygonalMap, p: Point) -> Result<Vec<usize>> {
    check_endpoint(map, p)?;
    Ok(map
        .vertices()
        .iter()
        .filter(|v| segment_clear(map, p, v.pos))
        .map(|v| v.id)
        .collect())
}

/// Closed triangles (segments are degenerate triangles) whose union covers
/// every point visible from `p`.
pub fn visible_region(map: &PolygonalMap, critical: &[Point], p: Point) -> Vec<[Point; 3]> {
    let mut angles: Vec<f64> = critical
        .iter()
        .filter(|c| c.dist(p) > EPS)
        .map(|c| (c.y - p.y).atan2(c.x - p.x).rem_euclid(TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| *a - *b <= 1e-13);
    if angles.is_empty() {
        angles.push(0.0);
    }
    // keep every wedge narrower than a quarter turn
    let mut full = Vec::with_capacity(angles.len() + 8);
    for (i, &a) in angles.iter().enumerate() {
        full.push(a);
        let next = angles.get(i + 1).copied().unwrap_or(angles[0] + TAU);
        let parts = ((next - a) / FRAC_PI_4).ceil() as usize;
        for k in 1..parts {
            full.push(a + (next - a) * k as f64 / parts as f64);
        }
    }
    let mut pieces = Vec::with_capacity(full.len() * 2);
    for (i, &a) in full.iter().enumerate() {
        let h = ray_hit(map, p, a);
        pieces.push([p, h, h]);
        let next = full.get(i + 1).copied().unwrap_or(full[0] + TAU);
        if next - a > 2.0 * RAY_DELTA {
            let h0 = ray_hit(map, p, a + RAY_DELTA);
            let h1 = ray_hit(map, p, next - RAY_DELTA);
            pieces.push([p, h0, h1]);
        }
    }
    pieces
}

/// First obstacle point along the ray from `p` at angle `a`, or the frame.
fn ray_hit(map: &PolygonalMap, p: Point, a: f64) -> Point {
    let u = Point::new(a.cos(), a.sin());
    let reach = |pos: f64, dir: f64, hi: f64| {
        if dir > 0.0 {
            (hi - pos) / dir
        } else if dir < 0.0 {
            -pos / dir
        } else {
            f64::INFINITY
        }
    };
    let len = reach(p.x, u.x, map.width)
        .min(reach(p.y, u.y, map.height))
        .max(0.0);
    let far = p + u * len;
    let far = Point::new(far.x.clamp(0.0, map.width), far.y.clamp(0.0, map.height));
    match first_block(map, p, far) {
        Some(t) => p.lerp(far, t),
        None => far,
    }
}

/// Calls `mark` with every cell whose closed square touches the convex hull of `pts`.
fn rasterize(pts: &[Point], cell_size: f64, dims: (usize, usize), mark: &mut impl FnMut(usize)) {
    let (nx, ny) = dims;
    let tol = CELL_TOL;
    let clamp_cell = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
    let (ymin, ymax) = pts.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
        (lo.min(p.y), hi.max(p.y))
    });
    let r0 = clamp_cell((ymin - tol) / cell_size, ny);
    let r1 = clamp_cell((ymax + tol) / cell_size, ny);
    for row in r0..=r1 {
        let y0 = row as f64 * cell_size - tol;
        let y1 = (row + 1) as f64 * cell_size + tol;
        let (mut xmin, mut xmax) = (f64::MAX, f64::MIN);
        let mut take = |x: f64| {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        };
        for (i, a) in pts.iter().enumerate() {
            if a.y >= y0 && a.y <= y1 {
                take(a.x);
            }
            let b = pts[(i + 1) % pts.len()];
            if a.y != b.y {
                for yl in [y0, y1] {
                    if (a.y - yl) * (b.y - yl) <= 0.0 {
                        take(a.x + (yl - a.y) / (b.y - a.y) * (b.x - a.x));
                    }
                }
            }
        }
        if xmin > xmax {
            continue;
        }
        let c0 = clamp_cell((xmin - tol) / cell_size, nx);
        let c1 = clamp_cell((xmax + tol) / cell_size, nx);
        for c in c0..=c1 {
            mark(row * nx + c);
        }
    }
}

/// Visibility list of a single cell: vertices that see some point of it.
pub fn cell_visibility_list(map: &PolygonalMap, cell: usize, cell_size: f64) -> Vec<usize> {
    if map.cell_fully_blocked(cell, cell_size) {
        return Vec::new();
    }
    let rect: Rect = map.cell_rect(cell, cell_size);
    let critical = map.critical_points();
    map.vertices()
        .iter()
        .filter(|v| {
            visible_region(map, &critical, v.pos)
                .iter()
                .any(|tri| rect.intersects_triangle(*tri, CELL_TOL))
        })
        .map(|v| v.id)
        .collect()
}

/// Visibility lists of every cell, indexed row-major. Fully blocked cells get
/// empty lists.
pub fn cell_visibility_lists(map: &PolygonalMap, cell_size: f64) -> Vec<Vec<usize>> {
    let dims = map.cell_dims(cell_size);
    let n_cells = dims.0 * dims.1;
    let critical = map.critical_points();
    let words = n_cells.div_ceil(64);
    let marks: Vec<Vec<u64>> = map
        .vertices()
        .par_iter()
        .map(|v| {
            let mut bits = vec![0u64; words];
            for tri in visible_region(map, &critical, v.pos) {
                rasterize(&tri, cell_size, dims, &mut |c| {
                    bits[c / 64] |= 1 << (c % 64)
                });
            }
            bits
        })
        .collect();
    let open: Vec<bool> = (0..n_cells)
        .into_par_iter()
        .map(|c| !map.cell_fully_blocked(c, cell_size))
        .collect();
    let mut lists = vec![Vec::new(); n_cells];
    for (v, bits) in marks.iter().enumerate() {
        for (w, &word) in bits.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let c = w * 64 + word.trailing_zeros() as usize;
                word &= word - 1;
                if open[c] {
                    lists[c].push(v);
                }
            }
        }
    }
    lists
}

/// Convex vertices joined by every co-visible pair, weighted by Euclidean length.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    pub vertices: Vec<ConvexVertex>,
    /// Neighbor lists sorted by neighbor id.
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl VisibilityGraph {
    /// Builds a graph from an explicit undirected edge list.
    pub fn from_edges(vertices: Vec<ConvexVertex>, edges: &[(usize, usize, f64)]) -> Self {
        let mut adj = vec![Vec::new(); vertices.len()];
        for &(u, v, w) in edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by_key(|&mut (v, _)| v);
        }
        VisibilityGraph { vertices, adj }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_visibility_graph(map: &PolygonalMap) -> VisibilityGraph {
    let vs = map.vertices();
    let n = vs.len();
    let upper: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|u| {
            (u + 1..n)
                .filter(|&v| segment_clear(map, vs[u].pos, vs[v].pos))
                .collect()
        })
        .collect();
    let mut adj = vec![Vec::new(); n];
    for (u, list) in upper.iter().enumerate() {
        for &v in list {
            let w = vs[u].pos.dist(vs[v].pos);
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
    }
    for list in &mut adj {
        list.sort_by_key(|&(v, _)| v);
    }
    VisibilityGraph {
        vertices: vs.to_vec(),
        adj,
    }
}
