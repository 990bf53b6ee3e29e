//! Max-flow duality and path-enumeration properties cross-checked against
//! exhaustive reference oracles on randomized small instances.

mod common;

use std::collections::BTreeSet;

use pathcut::graph::ArcLabel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn max_flow_equals_exhaustive_subset_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A1);
    for _ in 0..50 {
        let g = common::random_instance(&mut rng, 14);
        let cut = g.max_flow_min_cut();
        let reference = common::exhaustive_min_cut_value(&g);
        assert_eq!(cut.value, reference, "duality violated on {g:?}");
    }
}

#[test]
fn min_cut_arcs_disconnect_and_sum_to_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A2);
    for _ in 0..50 {
        let g = common::random_instance(&mut rng, 14);
        let cut = g.max_flow_min_cut();
        assert_eq!(g.weight_of(&cut.arcs), cut.value);
        assert!(!g.remove_arcs(&cut.arcs).unwrap().has_st_path());
    }
}

#[test]
fn enumerated_paths_are_unique_and_hitting_sets_disconnect() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A3);
    let mut checked = 0;
    while checked < 20 {
        let g = common::random_instance(&mut rng, 12);
        let paths = g.enumerate_paths(4096);
        if !paths.complete() || paths.is_empty() {
            continue;
        }
        checked += 1;

        // each path exactly once
        let mut seen = BTreeSet::new();
        for p in paths.iter() {
            assert!(seen.insert(p.arc_labels().to_vec()), "duplicate path {p:?}");
        }

        // with complete enumeration, hitting all paths implies disconnection
        let m = g.arcs().len();
        for mask in 0u32..1 << m {
            let labels: BTreeSet<ArcLabel> = g
                .arcs()
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> *i & 1 == 1)
                .map(|(_, a)| a.label)
                .collect();
            let hits_all = paths.iter().all(|p| p.arc_labels().iter().any(|l| labels.contains(l)));
            if hits_all {
                assert!(
                    !g.remove_arcs(&labels).unwrap().has_st_path(),
                    "hitting set {labels:?} left a path"
                );
            }
        }
    }
}

#[test]
fn removed_arcs_never_reappear() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A4);
    for _ in 0..30 {
        let g = common::random_instance(&mut rng, 14);
        if g.arcs().is_empty() {
            continue;
        }
        let drop: BTreeSet<ArcLabel> = g
            .arcs()
            .iter()
            .filter(|_| rng.gen_bool(0.4))
            .map(|a| a.label)
            .collect();
        let reduced = g.remove_arcs(&drop).unwrap();
        for path in reduced.enumerate_paths(2048).iter() {
            assert!(path.arc_labels().iter().all(|l| !drop.contains(l)));
        }
    }
}
