//! Variational s-t minimum-cut solver built on a path-register one-hot encoding.
//!
//! The crate is organised as a pipeline:
//!
//! * [`graph`] — weighted directed instances, simple-path enumeration, and the
//!   classical max-flow/min-cut oracle used for cross-validation.
//! * [`encoding`] — the one-hot path-register layout, the deduplicated cut
//!   cost function, its Pauli-Z expansion, and a brute-force oracle over the
//!   feasible subspace.
//! * [`sim`] — a dense statevector simulator restricted to the three gate
//!   families the ansatz needs (basis preparation, diagonal cost phase, XY
//!   partial swaps) plus warm-start preparation and sampling.
//! * [`objective`] — cost distributions and the scalar training objectives
//!   (expectation, CVaR, quantiles, the composite `f1`).
//! * [`optimize`] — derivative-free parameter search: coordinate-descent line
//!   minimisation and a plain genetic algorithm.
//! * [`vqa`] — glue between parameter vectors and ansatz execution.
//! * [`solver`] — the iterative path-batch resolution loop.
//! * [`report`] — serialisable report types shared with the CLI.
//!
//! Bitstring convention: qubit 0 is the leftmost character of a bitstring and
//! the most significant bit of a basis-state index. All public I/O uses this
//! convention.

pub mod encoding;
pub mod graph;
pub mod instances;
pub mod objective;
pub mod optimize;
pub mod report;
pub mod sim;
pub mod solver;
pub mod vqa;

pub use encoding::{Configuration, DiagonalCost, PauliTermSum, QubitLayout};
pub use graph::{Graph, MinCut, Path, PathSet, Weight};
pub use objective::{CostDistribution, ObjectiveKind, ObjectiveSpec};
pub use optimize::{GaConfig, OptimizationTrace, OptimizerConfig, PowellConfig};
pub use sim::{AnsatzParams, MixerTopology, StateVector, WarmStart};
pub use solver::{IterativeConfig, IterativeResult};
