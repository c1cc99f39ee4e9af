//! Distance and path queries over a (possibly compressed) index.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Point, EPS};
use crate::grid_index::{EhlIndex, Region};
use crate::hub_label::HubLabelSet;
use crate::map::PolygonalMap;
use crate::visibility::{check_endpoint, segment_clear};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QueryResult {
    /// `None` when `t` is unreachable from `s`.
    pub dist: Option<f64>,
    /// Filled by path queries only.
    pub path: Vec<Point>,
    pub hub: Option<usize>,
    pub via_s: Option<usize>,
    pub via_t: Option<usize>,
    /// Hub entries of both regions plus via entries touched.
    pub labels_inspected: usize,
}

/// Region owning the cell of `p`. On a cell border the half-open owner may be
/// fully blocked, in which case another cell touching `p` is used.
pub fn locate_region<'a>(index: &'a EhlIndex, map: &PolygonalMap, p: Point) -> Result<&'a Region> {
    check_endpoint(map, p)?;
    let cell = map.cell_of(p, index.cell_size)?;
    if let Some(r) = index.region_of_cell(cell) {
        return Ok(r);
    }
    let cs = index.cell_size;
    let (cx, cy) = (cell % index.nx, cell / index.nx);
    let near = |v: f64, k: usize| (v - k as f64 * cs).abs() <= EPS;
    let xs = [Some(cx), (cx > 0 && near(p.x, cx)).then(|| cx - 1)];
    let ys = [Some(cy), (cy > 0 && near(p.y, cy)).then(|| cy - 1)];
    for y in ys.into_iter().flatten() {
        for x in xs.into_iter().flatten() {
            if let Some(r) = index.region_of_cell(y * index.nx + x) {
                return Ok(r);
            }
        }
    }
    Err(Error::Domain(format!(
        "no region covers ({}, {})",
        p.x, p.y
    )))
}

/// Per-query memo of point-to-vertex visibility.
struct Sight<'a> {
    map: &'a PolygonalMap,
    from: Point,
    seen: HashMap<u32, bool>,
}

impl<'a> Sight<'a> {
    fn new(map: &'a PolygonalMap, from: Point) -> Self {
        Sight {
            map,
            from,
            seen: HashMap::new(),
        }
    }

    fn sees(&mut self, v: u32) -> bool {
        let (map, from) = (self.map, self.from);
        *self
            .seen
            .entry(v)
            .or_insert_with(|| segment_clear(map, from, map.vertices()[v as usize].pos))
    }
}

/// Shortest `p -> hub` distance through a via vertex of the hub's group that
/// `p` can see, with that via vertex.
pub fn vdist_min(
    map: &PolygonalMap,
    p: Point,
    hub: usize,
    region: &Region,
) -> Result<Option<(f64, usize)>> {
    let group = region
        .group_of(hub as u32)
        .ok_or_else(|| Error::Invalid(format!("hub {hub} not in region {}", region.id)))?;
    let mut sight = Sight::new(map, p);
    let mut touched = 0;
    Ok(best_via(&mut sight, group, &mut touched))
}

fn best_via(
    sight: &mut Sight,
    group: &[crate::grid_index::ViaEntry],
    touched: &mut usize,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for e in group {
        *touched += 1;
        if !sight.sees(e.via) {
            continue;
        }
        let d = sight.from.dist(sight.map.vertices()[e.via as usize].pos) + e.dist;
        if best.is_none_or(|(b, _)| d < b) {
            best = Some((d, e.via as usize));
        }
    }
    best
}

/// Distance from `s` to `t`, with the meeting hub and via vertices.
pub fn shortest_distance(
    index: &EhlIndex,
    map: &PolygonalMap,
    s: Point,
    t: Point,
) -> Result<QueryResult> {
    let rs = locate_region(index, map, s)?;
    let rt = locate_region(index, map, t)?;
    if segment_clear(map, s, t) {
        return Ok(QueryResult {
            dist: Some(s.dist(t)),
            ..QueryResult::default()
        });
    }
    let mut out = QueryResult {
        labels_inspected: rs.hub_count() + rt.hub_count(),
        ..QueryResult::default()
    };
    let mut sight_s = Sight::new(map, s);
    let mut sight_t = Sight::new(map, t);
    let (mut i, mut j) = (0, 0);
    while i < rs.hubs.len() && j < rt.hubs.len() {
        match rs.hubs[i].cmp(&rt.hubs[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                let a = best_via(&mut sight_s, rs.group(i), &mut out.labels_inspected);
                if let Some((da, va)) = a {
                    if let Some((db, vb)) =
                        best_via(&mut sight_t, rt.group(j), &mut out.labels_inspected)
                    {
                        let d = da + db;
                        if out.dist.is_none_or(|best| d < best) {
                            out.dist = Some(d);
                            out.hub = Some(rs.hubs[i] as usize);
                            out.via_s = Some(va);
                            out.via_t = Some(vb);
                        }
                    }
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(out)
}

/// Like [`shortest_distance`], also reconstructing the path as points.
pub fn shortest_path(
    index: &EhlIndex,
    map: &PolygonalMap,
    labels: &HubLabelSet,
    s: Point,
    t: Point,
) -> Result<QueryResult> {
    let mut res = shortest_distance(index, map, s, t)?;
    if res.dist.is_none() {
        return Ok(res);
    }
    let mut verts = Vec::new();
    if let (Some(h), Some(vs), Some(vt)) = (res.hub, res.via_s, res.via_t) {
        verts = labels.walk_to_hub(vs, h)?;
        let mut back = labels.walk_to_hub(vt, h)?;
        back.pop();
        verts.extend(back.into_iter().rev());
    }
    let mut path = vec![s];
    path.extend(verts.iter().map(|&v| map.vertices()[v].pos));
    path.push(t);
    path.dedup();
    if path.len() == 1 {
        path.push(t);
    }
    res.path = path;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_index::build_ehl;
    use crate::hub_label::{build_hub_labels, vertex_ordering};
    use crate::map::{extract_obstacles, GridMap};
    use crate::visibility::build_visibility_graph;

    fn setup(rows: &[&str]) -> (PolygonalMap, HubLabelSet, EhlIndex) {
        let map = extract_obstacles(&GridMap::from_rows(rows).unwrap());
        let g = build_visibility_graph(&map);
        let hl = build_hub_labels(&g, &vertex_ordering(&g));
        let idx = build_ehl(&map, &hl, 1.0).unwrap();
        (map, hl, idx)
    }

    #[test]
    fn same_point_is_zero() {
        let (map, _, idx) = setup(&["....", ".@@.", "...."]);
        let p = Point::new(0.5, 0.5);
        assert_eq!(shortest_distance(&idx, &map, p, p).unwrap().dist, Some(0.0));
    }

    #[test]
    fn co_visible_pair_is_straight() {
        let (map, hl, idx) = setup(&["....", ".@@.", "...."]);
        let (s, t) = (Point::new(0.5, 0.5), Point::new(3.5, 0.5));
        let r = shortest_path(&idx, &map, &hl, s, t).unwrap();
        assert_eq!(r.dist, Some(3.0));
        assert_eq!(r.path, vec![s, t]);
    }

    #[test]
    fn detour_around_wall() {
        let (map, hl, idx) = setup(&["....", ".@@.", "...."]);
        let (s, t) = (Point::new(1.5, 0.5), Point::new(1.5, 2.5));
        let r = shortest_path(&idx, &map, &hl, s, t).unwrap();
        let expect = 2.0 * (0.5f64.powi(2) + 0.5f64.powi(2)).sqrt() + 0.0 + 1.0;
        let d = r.dist.unwrap();
        assert!((d - expect).abs() < 1e-9, "{d} vs {expect}");
        let len: f64 = r.path.windows(2).map(|w| w[0].dist(w[1])).sum();
        assert!((len - d).abs() < 1e-9);
    }

    #[test]
    fn blocked_endpoint_is_domain_error() {
        let (map, _, idx) = setup(&["....", ".@@.", "...."]);
        assert!(shortest_distance(&idx, &map, Point::new(1.5, 1.5), Point::new(0.5, 0.5)).is_err());
    }

    #[test]
    fn point_on_blocked_cell_border_finds_region() {
        let (map, _, idx) = setup(&["....", ".@@.", "...."]);
        let r = locate_region(&idx, &map, Point::new(1.5, 1.0)).unwrap();
        assert_eq!(r.cells, vec![1]);
    }

    #[test]
    fn separated_rooms_unreachable() {
        let (map, _, idx) = setup(&["..@..", "..@..", "..@.."]);
        let r = shortest_distance(&idx, &map, Point::new(0.5, 0.5), Point::new(4.5, 2.5)).unwrap();
        assert_eq!(r.dist, None);
    }
}
