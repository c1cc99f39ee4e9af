//! The worked example shared by the golden and acceptance suites.
#![allow(dead_code)]

use ehlstar::geometry::Point;
use ehlstar::grid_index::{EhlIndex, Region};
use ehlstar::hub_label::{build_hub_labels, HubLabelSet};
use ehlstar::map::{ConvexVertex, PolygonalMap};
use ehlstar::visibility::VisibilityGraph;

pub const TOL: f64 = 1e-9;
pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;
pub const D: usize = 3;
pub const E: usize = 4;

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

/// The example graph on vertex ids `ids` (A..E) with `n` vertices in total.
pub fn example_graph(vertices: Vec<ConvexVertex>, ids: [usize; 5]) -> VisibilityGraph {
    let [a, b, c, d, e] = ids;
    let edges = [
        (a, b, 5.1),
        (b, c, 5.1),
        (b, d, 5.4),
        (b, e, 6.1),
        (d, e, 5.3),
        (a, e, 10.0),
    ];
    VisibilityGraph::from_edges(vertices, &edges)
}

pub fn example_labels(vertices: Vec<ConvexVertex>, ids: [usize; 5]) -> HubLabelSet {
    let n = vertices.len();
    let g = example_graph(vertices, ids);
    let [a, b, c, d, e] = ids;
    let mut order = vec![b, c, d, e, a];
    order.extend((0..n).filter(|v| !ids.contains(v)));
    build_hub_labels(&g, &order)
}

pub fn abstract_vertices() -> Vec<ConvexVertex> {
    (0..5)
        .map(|id| ConvexVertex {
            id,
            pos: Point::new(id as f64, 0.0),
            obstacle: id,
        })
        .collect()
}

pub fn pairs(hl: &HubLabelSet, v: usize) -> Vec<(usize, f64)> {
    hl.of(v).iter().map(|l| (l.hub, l.dist)).collect()
}

pub fn assert_pairs(got: Vec<(usize, f64)>, want: &[(usize, f64)]) {
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (g, w) in got.iter().zip(want) {
        assert!(g.0 == w.0 && close(g.1, w.1), "{got:?} vs {want:?}");
    }
}

/// `c_s` in the middle of a 3x3 block with `c_1..c_4` as regions 1..4.
pub fn merge_example() -> EhlIndex {
    let hl = example_labels(abstract_vertices(), [A, B, C, D, E]);
    let lists: [(usize, &[usize]); 5] = [
        (4, &[A, B, E]),
        (1, &[A, B]),
        (5, &[A, B, E]),
        (7, &[A, D, E]),
        (3, &[A]),
    ];
    let regions = lists
        .iter()
        .enumerate()
        .map(|(id, (cell, list))| Region::from_visibility_list(id, vec![*cell], list, &hl))
        .collect();
    EhlIndex::from_regions(1.0, 3, 3, regions).unwrap()
}

pub fn tip(p: Point, away: Point) -> Vec<Point> {
    let u = away * (1.0 / away.norm());
    let n = Point::new(-u.y, u.x);
    vec![p, p + u * 0.6 + n * 0.25, p + u * 0.6 - n * 0.25]
}

/// A map realising the point visibilities of the example: `s` sees A and E
/// but not B, `t` sees B and D, and a wall separates `s` from `t`. Edge
/// lengths come from the example graph, not from these positions.
pub struct PointScene {
    pub map: PolygonalMap,
    pub ids: [usize; 5],
    pub s: Point,
    pub t: Point,
}

pub fn point_scene() -> PointScene {
    let s = Point::new(2.0, 10.0);
    let t = Point::new(18.0, 10.0);
    let a = s + Point::new(0.0, 2.8);
    let e = Point::new(9.0, 10.0 + (11.2f64 * 11.2 - 49.0).sqrt());
    let b = t - Point::new(6.1, 0.0);
    let c = Point::new(14.0, 14.0);
    let d = t + Point::new(0.0, 2.7);
    let up = Point::new(0.0, 1.0);
    let polys = vec![
        tip(a, up),
        tip(b, Point::new(-1.0, 0.0)),
        tip(c, up),
        tip(d, up),
        tip(e, e - s),
        vec![
            Point::new(9.9, 4.0),
            Point::new(10.1, 4.0),
            Point::new(10.1, 16.0),
            Point::new(9.9, 16.0),
        ],
    ];
    let map = PolygonalMap::from_polygons(20.0, 20.0, polys).unwrap();
    let id = |p: Point| {
        map.vertices()
            .iter()
            .position(|v| v.pos.approx_eq(p, TOL))
            .unwrap()
    };
    let ids = [id(a), id(b), id(c), id(d), id(e)];
    PointScene { map, ids, s, t }
}

pub fn scene_index(sc: &PointScene) -> (HubLabelSet, EhlIndex) {
    let hl = example_labels(sc.map.vertices().to_vec(), sc.ids);
    let [a, b, c, d, e] = sc.ids;
    let cell_s = sc.map.cell_of(sc.s, 1.0).unwrap();
    let cell_t = sc.map.cell_of(sc.t, 1.0).unwrap();
    let rs = Region::from_visibility_list(0, vec![cell_s], &[a, b, e], &hl);
    let rt = Region::from_visibility_list(1, vec![cell_t], &[b, c, d], &hl);
    let idx = EhlIndex::from_regions(1.0, 20, 20, vec![rs, rt]).unwrap();
    (hl, idx)
}

pub const EXAMPLE_MAP: &str = include_str!("../data/example3.poly");

pub fn example_endpoints() -> (Point, Point) {
    let q = ehlstar::workload::parse_queries(include_str!("../data/example3.queries")).unwrap();
    q[0]
}
