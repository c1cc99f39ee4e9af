use ehlstar::compress::Mode;
use ehlstar::index_file::{map_hash, IndexBundle};
use ehlstar::map::{extract_obstacles, load_map, GridMap};
use ehlstar::pipeline::{build_index, BuildOptions};
use ehlstar::query::shortest_distance;
use ehlstar::workload::{build_workload, gen_cluster_spec, sample_queries, Distribution};

fn random_bundle(percent: f64) -> IndexBundle {
    let map = extract_obstacles(&GridMap::random(24, 24, 0.2, 5).unwrap());
    let opts = BuildOptions {
        budget_percent: percent,
        seed: 5,
        ..BuildOptions::default()
    };
    build_index(map, &opts).unwrap().0
}

#[test]
fn reload_answers_bit_identically() {
    let bundle = random_bundle(40.0);
    let loaded = IndexBundle::from_bytes(&bundle.to_bytes()).unwrap();
    assert_eq!(loaded.index, bundle.index);
    assert_eq!(loaded.labels, bundle.labels);
    assert_eq!(loaded.meta, bundle.meta);
    let queries = sample_queries(&bundle.map, Distribution::Uniform, 1000, 17).unwrap();
    for (s, t) in queries {
        let a = shortest_distance(&bundle.index, &bundle.map, s, t).unwrap();
        let b = shortest_distance(&loaded.index, &loaded.map, s, t).unwrap();
        assert_eq!(a.dist.map(f64::to_bits), b.dist.map(f64::to_bits));
    }
}

#[test]
fn identical_builds_give_identical_bytes() {
    assert_eq!(
        random_bundle(20.0).to_bytes(),
        random_bundle(20.0).to_bytes()
    );
}

#[test]
fn workload_build_keeps_clusters() {
    let map = extract_obstacles(&GridMap::random(30, 30, 0.15, 2).unwrap());
    let spec = gen_cluster_spec(&map, 2, 2).unwrap();
    let w = build_workload(&map, Distribution::Cluster(&spec), 2000, 1.0, 3).unwrap();
    let opts = BuildOptions {
        budget_percent: 20.0,
        mode: Mode::WorkloadAware,
        workload: Some(w.counts),
        clusters: Some(spec.clone()),
        ..BuildOptions::default()
    };
    let (bundle, _) = build_index(map, &opts).unwrap();
    let loaded = IndexBundle::from_bytes(&bundle.to_bytes()).unwrap();
    assert_eq!(loaded.clusters, Some(spec));
    assert_eq!(loaded.meta.mode, Mode::WorkloadAware);
}

#[test]
fn polygon_map_round_trips() {
    let map = load_map(include_bytes!("data/example3.poly")).unwrap();
    let hash = map_hash(&map);
    let (bundle, _) = build_index(map, &BuildOptions::default()).unwrap();
    let loaded = IndexBundle::from_bytes(&bundle.to_bytes()).unwrap();
    assert_eq!(loaded.map_hash(), hash);
    assert_eq!(loaded.map.vertices(), bundle.map.vertices());
}

#[test]
fn damaged_files_are_rejected() {
    let bytes = random_bundle(100.0).to_bytes();
    assert!(IndexBundle::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    assert!(IndexBundle::from_bytes(b"not an index").is_err());
    let mut bad_version = bytes.clone();
    bad_version[8] = 99;
    assert!(IndexBundle::from_bytes(&bad_version).is_err());
    // flip one bit somewhere in the map section
    let mut flipped = bytes.clone();
    let map_off = u64::from_le_bytes(bytes[16 + 20 + 4..16 + 20 + 12].try_into().unwrap()) as usize;
    flipped[map_off + 12] ^= 1;
    assert!(IndexBundle::from_bytes(&flipped).is_err());
}

#[test]
fn different_maps_hash_differently() {
    let a = extract_obstacles(&GridMap::from_rows(&["..", ".@"]).unwrap());
    let b = extract_obstacles(&GridMap::from_rows(&["..", "@."]).unwrap());
    assert_ne!(map_hash(&a), map_hash(&b));
}
