//! Brute-force shortest paths used to check the index.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Result;
use crate::geometry::Point;
use crate::hub_label::Dist;
use crate::map::PolygonalMap;
use crate::visibility::{check_endpoint, segment_clear, VisibilityGraph};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleAnswer {
    pub dist: Option<f64>,
    pub path: Vec<Point>,
}

/// Dijkstra over the visibility graph with `s` and `t` attached to every
/// vertex they see.
pub fn oracle_query(
    map: &PolygonalMap,
    graph: &VisibilityGraph,
    s: Point,
    t: Point,
) -> Result<OracleAnswer> {
    check_endpoint(map, s)?;
    check_endpoint(map, t)?;
    if segment_clear(map, s, t) {
        return Ok(OracleAnswer {
            dist: Some(s.dist(t)),
            path: vec![s, t],
        });
    }
    let n = graph.len();
    let pos = |v: usize| graph.vertices[v].pos;
    let to_t: Vec<Option<f64>> = (0..n)
        .map(|v| segment_clear(map, pos(v), t).then(|| pos(v).dist(t)))
        .collect();
    let src = n;
    let dst = n + 1;
    let mut dist = vec![f64::INFINITY; n + 2];
    let mut prev = vec![usize::MAX; n + 2];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    for v in 0..n {
        if segment_clear(map, s, pos(v)) {
            dist[v] = s.dist(pos(v));
            prev[v] = src;
            heap.push(Reverse((Dist(dist[v]), v)));
        }
    }
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == dst {
            break;
        }
        let mut relax = |v: usize, w: f64, heap: &mut BinaryHeap<_>| {
            if d + w < dist[v] {
                dist[v] = d + w;
                prev[v] = u;
                heap.push(Reverse((Dist(d + w), v)));
            }
        };
        for &(v, w) in &graph.adj[u] {
            relax(v, w, &mut heap);
        }
        if let Some(w) = to_t[u] {
            relax(dst, w, &mut heap);
        }
    }
    if dist[dst].is_infinite() {
        return Ok(OracleAnswer::default());
    }
    let mut path = vec![t];
    let mut cur = prev[dst];
    while cur != src {
        path.push(pos(cur));
        cur = prev[cur];
    }
    path.push(s);
    path.reverse();
    Ok(OracleAnswer {
        dist: Some(dist[dst]),
        path,
    })
}

/// Shortest `s`-`t` distance by enumerating every ordered sequence of
/// distinct convex vertices. Only practical for a handful of vertices.
pub fn exhaustive_distance(map: &PolygonalMap, s: Point, t: Point) -> Result<Option<f64>> {
    check_endpoint(map, s)?;
    check_endpoint(map, t)?;
    let pts: Vec<Point> = map.vertices().iter().map(|v| v.pos).collect();
    let mut best: Option<f64> = None;
    let mut used = vec![false; pts.len()];
    extend(map, &pts, s, t, 0.0, &mut used, &mut best);
    Ok(best)
}

fn extend(
    map: &PolygonalMap,
    pts: &[Point],
    at: Point,
    t: Point,
    so_far: f64,
    used: &mut [bool],
    best: &mut Option<f64>,
) {
    if segment_clear(map, at, t) {
        let d = so_far + at.dist(t);
        if best.is_none_or(|b| d < b) {
            *best = Some(d);
        }
    }
    for i in 0..pts.len() {
        if used[i] || !segment_clear(map, at, pts[i]) {
            continue;
        }
        used[i] = true;
        extend(map, pts, pts[i], t, so_far + at.dist(pts[i]), used, best);
        used[i] = false;
    }
}
