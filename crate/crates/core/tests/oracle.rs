mod common;

use htpc_core::{
    cluster_discovery, connected_components, modified_cluster_discovery, sample, TorusSpec,
    VertexId,
};

const SHAPES: &[&[usize]] = &[
    &[1, 1],
    &[2, 2],
    &[3, 5],
    &[8, 8],
    &[1, 7],
    &[2, 2, 2],
    &[3, 4, 5],
    &[8, 8, 8],
    &[2, 2, 2, 2],
];

#[test]
fn census_matches_bfs_on_every_small_shape() {
    for &sides in SHAPES {
        let spec = TorusSpec::from_sides(sides).unwrap();
        for (k, &p) in [0.0, 0.05, 0.15, 0.3, 0.6, 1.0].iter().enumerate() {
            for seed in 0..12u64 {
                let config = sample(&spec, p, seed * 31 + k as u64).unwrap();
                let (_, sizes) = common::bfs_census(&config);
                let stats = connected_components(&config);
                assert_eq!(
                    stats.component_sizes, sizes,
                    "sides {sides:?} p {p} seed {seed}"
                );
            }
        }
    }
}

#[test]
fn discovery_reveals_the_bfs_component() {
    for &sides in SHAPES {
        let spec = TorusSpec::from_sides(sides).unwrap();
        for seed in 0..6u64 {
            let config = sample(&spec, 0.25, 1000 + seed).unwrap();
            let (labels, _) = common::bfs_census(&config);
            for v in 0..spec.volume() {
                let found: Vec<usize> = cluster_discovery(&config, VertexId(v))
                    .unwrap()
                    .into_iter()
                    .map(|u| u.0)
                    .collect();
                let modified: Vec<usize> = modified_cluster_discovery(&config, VertexId(v))
                    .unwrap()
                    .into_iter()
                    .map(|u| u.0)
                    .collect();
                if !config.is_occupied(VertexId(v)) {
                    assert!(found.is_empty() && modified.is_empty());
                    continue;
                }
                let mut sorted = found.clone();
                sorted.sort_unstable();
                let truth = common::component_members(&labels, v);
                assert_eq!(sorted, truth);
                assert!(modified.iter().all(|u| truth.binary_search(u).is_ok()));
            }
        }
    }
}

#[test]
fn sampling_is_independent_of_thread_count() {
    let spec = TorusSpec::new(3, &[1.0, 0.5, 1.5], 60).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample(&spec, 0.013, 99).unwrap())
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        let other = run(threads);
        assert_eq!(one.words(), other.words());
        assert_eq!(one.occupied_count(), other.occupied_count());
    }
    let stats_one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| connected_components(&one));
    let stats_many = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(|| connected_components(&one));
    assert_eq!(stats_one, stats_many);
}

#[test]
fn dump_round_trip_preserves_census() {
    let spec = TorusSpec::new(2, &[1.0, 2.0], 40).unwrap();
    let config = sample(&spec, 0.04, 5).unwrap();
    let mut buf = Vec::new();
    config.write_dump(&mut buf).unwrap();
    let back = htpc_core::SiteConfig::read_dump(buf.as_slice()).unwrap();
    assert_eq!(back.words(), config.words());
    assert_eq!(back.spec().sides(), config.spec().sides());
    assert_eq!(connected_components(&back), connected_components(&config));
}
