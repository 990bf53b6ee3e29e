//! Instances bundled with the repository (see `instances/` at the repo root).

use crate::graph::Graph;

/// 7-vertex, 10-arc instance; source 4, sink 2, optimal cut {1, 3} of cost 5.
pub const G7: &str = include_str!("../../../instances/g7.cut");

/// 10-vertex, 14-arc instance; source 4, sink 10, optimal cut value 7.
pub const G10: &str = include_str!("../../../instances/g10.cut");

pub fn g7() -> Graph {
    Graph::parse(G7).expect("bundled g7 instance must parse")
}

pub fn g10() -> Graph {
    Graph::parse(G10).expect("bundled g10 instance must parse")
}
