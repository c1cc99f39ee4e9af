use ehlstar::geometry::Point;
use ehlstar::map::{extract_obstacles, GridMap, PolygonalMap};
use ehlstar::visibility::{
    build_visibility_graph, cell_visibility_lists, segment_clear, segment_clear_by_edges,
    visible_vertices_from_point,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_map(seed: u64) -> PolygonalMap {
    extract_obstacles(&GridMap::random(16, 16, 0.25, seed).unwrap())
}

fn free_point(m: &PolygonalMap, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = Point::new(rng.gen_range(0.0..m.width), rng.gen_range(0.0..m.height));
        if m.is_traversable(p) {
            return p;
        }
    }
}

#[test]
fn grid_walk_agrees_with_edge_test() {
    for seed in 0..12 {
        let m = random_map(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..300 {
            let p = free_point(&m, &mut rng);
            let q = free_point(&m, &mut rng);
            assert_eq!(
                segment_clear(&m, p, q),
                segment_clear_by_edges(&m, p, q),
                "{p:?} {q:?}"
            );
            assert_eq!(segment_clear(&m, p, q), segment_clear(&m, q, p));
        }
        let vs = m.vertices();
        for a in vs.iter().step_by(3) {
            for b in vs {
                assert_eq!(
                    segment_clear(&m, a.pos, b.pos),
                    segment_clear_by_edges(&m, a.pos, b.pos),
                    "seed {seed} {a:?} {b:?}"
                );
            }
        }
    }
}

#[test]
fn visible_vertices_match_brute_force() {
    for seed in 20..30 {
        let m = random_map(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let p = free_point(&m, &mut rng);
            let brute: Vec<usize> = m
                .vertices()
                .iter()
                .filter(|v| segment_clear_by_edges(&m, p, v.pos))
                .map(|v| v.id)
                .collect();
            assert_eq!(visible_vertices_from_point(&m, p).unwrap(), brute);
        }
    }
}

#[test]
fn graph_edges_match_naive_pairs() {
    for seed in 40..45 {
        let m = random_map(seed);
        let g = build_visibility_graph(&m);
        let vs = m.vertices();
        for u in 0..vs.len() {
            let naive: Vec<usize> = (0..vs.len())
                .filter(|&v| v != u && segment_clear_by_edges(&m, vs[u].pos, vs[v].pos))
                .collect();
            let got: Vec<usize> = g.adj[u].iter().map(|&(v, _)| v).collect();
            assert_eq!(got, naive, "seed {seed} vertex {u}");
        }
    }
}

fn assert_lists_cover_samples(m: &PolygonalMap, cell_size: f64, per_axis: usize) {
    let lists = cell_visibility_lists(m, cell_size);
    let (nx, ny) = m.cell_dims(cell_size);
    for cy in 0..ny {
        for cx in 0..nx {
            let cell = cy * nx + cx;
            if m.cell_fully_blocked(cell, cell_size) {
                assert!(lists[cell].is_empty());
                continue;
            }
            for i in 0..=per_axis {
                for j in 0..=per_axis {
                    let p = Point::new(
                        ((cx as f64 + i as f64 / per_axis as f64) * cell_size).min(m.width),
                        ((cy as f64 + j as f64 / per_axis as f64) * cell_size).min(m.height),
                    );
                    if !m.is_traversable(p) {
                        continue;
                    }
                    for v in m.vertices() {
                        if segment_clear(m, p, v.pos) {
                            assert!(
                                lists[cell].contains(&v.id),
                                "cell {cell} misses vertex {} seen from {p:?}",
                                v.id
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn cell_lists_have_no_false_negatives() {
    for seed in 60..66 {
        assert_lists_cover_samples(&random_map(seed), 1.0, 4);
    }
    assert_lists_cover_samples(&random_map(70), 2.0, 6);
    assert_lists_cover_samples(&random_map(71), 0.5, 3);
}
