//! The instance-file parser must never panic, and anything it accepts must
//! satisfy the graph invariants end to end (on small accepted inputs the
//! classical pipeline is exercised too).

#![no_main]

use libfuzzer_sys::fuzz_target;
use pathcut::graph::Graph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = Graph::parse(text) else { return };

    // accepted graphs satisfy the load-time invariants
    assert!(g.source() != g.sink());
    for (i, arc) in g.arcs().iter().enumerate() {
        assert_eq!(arc.label as usize, i + 1);
        assert!(arc.tail != arc.head);
        assert!(!arc.weight.is_zero());
    }

    if g.arcs().len() <= 24 && g.vertex_count() <= 64 {
        let paths = g.enumerate_paths(32);
        for p in paths.iter() {
            let vertices = p.vertices(&g);
            assert_eq!(vertices.first(), Some(&g.source()));
            assert_eq!(vertices.last(), Some(&g.sink()));
        }
        let cut = g.max_flow_min_cut();
        assert_eq!(g.weight_of(&cut.arcs), cut.value);
        assert!(!g.remove_arcs(&cut.arcs).unwrap().has_st_path());
    }
});
