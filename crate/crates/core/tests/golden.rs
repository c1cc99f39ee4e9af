//! Worked example: five convex vertices A..E, two cells `c_s` and `c_t`, and
//! a merge of `c_s` with one of four neighbours.

mod common;

use common::*;
use ehlstar::compress::{adjacent_region_selection, jaccard, merge_regions, CompressionConfig};
use ehlstar::geometry::Point;
use ehlstar::grid_index::{EhlIndex, Region, ViaLabel};
use ehlstar::hub_label::hl_distance;
use ehlstar::map::load_map;
use ehlstar::oracle::oracle_query;
use ehlstar::pipeline::{build_index, BuildOptions};
use ehlstar::query::{shortest_distance, shortest_path, vdist_min};
use ehlstar::visibility::{build_visibility_graph, visible_vertices_from_point};

#[test]
fn hub_labels_of_five_vertex_graph() {
    let hl = example_labels(abstract_vertices(), [A, B, C, D, E]);
    assert_pairs(pairs(&hl, A), &[(A, 0.0), (B, 5.1), (E, 10.0)]);
    assert_pairs(pairs(&hl, B), &[(B, 0.0)]);
    assert_pairs(pairs(&hl, C), &[(B, 5.1), (C, 0.0)]);
    assert_pairs(pairs(&hl, D), &[(B, 5.4), (D, 0.0)]);
    assert_pairs(pairs(&hl, E), &[(B, 6.1), (D, 5.3), (E, 0.0)]);
}

#[test]
fn e_to_a_meets_at_e() {
    let hl = example_labels(abstract_vertices(), [A, B, C, D, E]);
    let (d, hub) = hl_distance(hl.of(E), hl.of(A)).unwrap();
    assert!(close(d, 10.0));
    assert_eq!(hub, E);
}

fn groups(r: &Region) -> Vec<(u32, Vec<(u32, f64)>)> {
    (0..r.hub_count())
        .map(|i| {
            (
                r.hubs[i],
                r.group(i).iter().map(|e| (e.via, e.dist)).collect(),
            )
        })
        .collect()
}

fn assert_groups(r: &Region, want: &[(usize, &[(usize, f64)])]) {
    let got = groups(r);
    assert_eq!(got.len(), want.len(), "{got:?}");
    for ((gh, gv), (wh, wv)) in got.iter().zip(want) {
        assert_eq!(*gh as usize, *wh, "{got:?}");
        assert_eq!(gv.len(), wv.len(), "{got:?}");
        for (g, w) in gv.iter().zip(wv.iter()) {
            assert!(g.0 as usize == w.0 && close(g.1, w.1), "{got:?}");
        }
    }
}

#[test]
fn via_labels_of_two_cells() {
    let hl = example_labels(abstract_vertices(), [A, B, C, D, E]);
    let cs = Region::from_visibility_list(0, vec![0], &[A, B, E], &hl);
    let ct = Region::from_visibility_list(1, vec![1], &[B, C, D], &hl);
    assert_groups(
        &cs,
        &[
            (A, &[(A, 0.0)]),
            (B, &[(A, 5.1), (B, 0.0), (E, 6.1)]),
            (D, &[(E, 5.3)]),
            (E, &[(A, 10.0), (E, 0.0)]),
        ],
    );
    assert_groups(
        &ct,
        &[
            (B, &[(B, 0.0), (C, 5.1), (D, 5.4)]),
            (C, &[(C, 0.0)]),
            (D, &[(D, 0.0)]),
        ],
    );
    let idx = EhlIndex::from_regions(1.0, 2, 1, vec![cs, ct]).unwrap();
    assert_eq!(idx.memory_units(), 12);
}

#[test]
fn jaccard_of_neighbours() {
    let idx = merge_example();
    let r = &idx.regions;
    assert!(close(jaccard(&r[0], &r[1]), 0.75));
    assert!(close(jaccard(&r[0], &r[4]), 0.75));
    assert_eq!(jaccard(&r[0], &r[2]), 1.0);
    assert_eq!(jaccard(&r[0], &r[3]), 1.0);
}

#[test]
fn uniform_selection_takes_smallest_tied_id() {
    let idx = merge_example();
    assert_eq!(
        adjacent_region_selection(&idx, 0, &CompressionConfig::uniform(0)),
        Some(2)
    );
}

#[test]
fn merging_c3_adds_two_labels() {
    let mut idx = merge_example();
    let before: Vec<ViaLabel> = idx.regions[0].via_labels().collect();
    assert_eq!(before.len(), 7);
    merge_regions(&mut idx, 0, 3).unwrap();
    let after: Vec<ViaLabel> = idx.regions[0].via_labels().collect();
    assert_eq!(after.len(), 9);
    let mut added: Vec<(u32, u32, f64)> = after
        .iter()
        .filter(|l| !before.contains(l))
        .map(|l| (l.hub, l.via, l.dist))
        .collect();
    added.sort_by_key(|a| (a.0, a.1));
    assert_eq!(added.len(), 2);
    assert_eq!((added[0].0, added[0].1), (B as u32, D as u32));
    assert!(close(added[0].2, 5.4));
    assert_eq!(added[1], (D as u32, D as u32, 0.0));
    assert_eq!(idx.mapper.get(7), Some(0));
}

#[test]
fn s_sees_a_and_e_but_not_b() {
    let sc = point_scene();
    let [a, b, _, _, e] = sc.ids;
    let seen = visible_vertices_from_point(&sc.map, sc.s).unwrap();
    assert!(seen.contains(&a) && seen.contains(&e));
    assert!(!seen.contains(&b));
}

#[test]
fn via_distances_to_hubs() {
    let sc = point_scene();
    let (_, idx) = scene_index(&sc);
    let [a, b, _, d, e] = sc.ids;
    let (rs, rt) = (&idx.regions[0], &idx.regions[1]);
    let (v, via) = vdist_min(&sc.map, sc.s, b, rs).unwrap().unwrap();
    assert!(close(v, 7.9));
    assert_eq!(via, a);
    let (v, via) = vdist_min(&sc.map, sc.t, b, rt).unwrap().unwrap();
    assert!(close(v, 6.1));
    assert_eq!(via, b);
    let (vs, via) = vdist_min(&sc.map, sc.s, d, rs).unwrap().unwrap();
    assert!(close(vs, 16.5));
    assert_eq!(via, e);
    let (vt, _) = vdist_min(&sc.map, sc.t, d, rt).unwrap().unwrap();
    assert!(close(vt, 2.7));
    assert!(close(vs + vt, 19.2));
}

#[test]
fn s_to_t_is_fourteen_through_b() {
    let sc = point_scene();
    let (hl, idx) = scene_index(&sc);
    let [a, b, ..] = sc.ids;
    let r = shortest_distance(&idx, &sc.map, sc.s, sc.t).unwrap();
    assert!(close(r.dist.unwrap(), 14.0));
    assert_eq!((r.hub, r.via_s, r.via_t), (Some(b), Some(a), Some(b)));
    let p = shortest_path(&idx, &sc.map, &hl, sc.s, sc.t).unwrap();
    let pos = |v: usize| sc.map.vertices()[v].pos;
    assert_eq!(p.path, vec![sc.s, pos(a), pos(b), sc.t]);
}

#[test]
fn built_map_answers_fourteen() {
    let map = load_map(EXAMPLE_MAP.as_bytes()).unwrap();
    let (s, t) = example_endpoints();
    let graph = build_visibility_graph(&map);
    let oracle = oracle_query(&map, &graph, s, t).unwrap();
    assert!(close(oracle.dist.unwrap(), 14.0));
    for percent in [100.0, 5.0] {
        let opts = BuildOptions {
            budget_percent: percent,
            ..BuildOptions::default()
        };
        let (bundle, _) = build_index(map.clone(), &opts).unwrap();
        let r = shortest_path(&bundle.index, &bundle.map, &bundle.labels, s, t).unwrap();
        assert!(close(r.dist.unwrap(), 14.0), "{percent}%: {:?}", r.dist);
        let apexes = [
            Point::new(10.0, 12.0),
            Point::new(10.885605706101344, 6.977480459637739),
        ];
        assert_eq!(r.path.len(), 4);
        assert!(r.path[1].approx_eq(apexes[0], TOL) && r.path[2].approx_eq(apexes[1], TOL));
    }
}
