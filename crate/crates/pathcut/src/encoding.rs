//! Path-register one-hot encoding of arc-removal configurations.
//!
//! Each enumerated path owns a register of one qubit per arc position;
//! registers are concatenated in path order. A configuration is feasible when
//! every register has Hamming weight exactly one (one removed arc per path).
//! An arc selected by several registers is paid for once: the removed-arc
//! indicator for arc `k` is `y_k = 1 - prod (1 - x)` over all of its
//! occurrence qubits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ArcLabel, Graph, PathSet, Weight};

/// Default cap on the feasible-space size [`brute_force_min`] will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Default cap on per-arc occurrence multiplicity in [`pauli_cost_terms`];
/// the expansion emits `2^multiplicity` Z-monomials per arc.
pub const DEFAULT_MULTIPLICITY_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("path set is empty")]
    EmptyPathSet,
    #[error("path {index} is empty")]
    EmptyPath { index: usize },
    #[error("configuration has {got} bits, layout has {expected} qubits")]
    LengthMismatch { expected: usize, got: usize },
    #[error("feasible space of {size} configurations exceeds cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },
    #[error("arc {label} occurs {count} times, exceeding multiplicity cap {cap}")]
    MultiplicityTooLarge { label: ArcLabel, count: usize, cap: usize },
    #[error("layout has {total} qubits, more than the supported {max}")]
    TooManyQubits { total: usize, max: usize },
    #[error("bitstring contains characters other than 0/1")]
    InvalidBitstring,
}

/// Mapping from (path, position) pairs to qubit indices.
///
/// Qubit `offsets[i] + (j - 1)` encodes position `j` (1-based) of path `i`;
/// qubit 0 is the leftmost character of every reported bitstring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    paths: PathSet,
    offsets: Vec<usize>,
    total_qubits: usize,
    arc_positions: BTreeMap<ArcLabel, Vec<usize>>,
}

impl QubitLayout {
    pub fn new(paths: PathSet) -> Result<QubitLayout, EncodingError> {
        if paths.is_empty() {
            return Err(EncodingError::EmptyPathSet);
        }
        let mut offsets = Vec::with_capacity(paths.len());
        let mut arc_positions: BTreeMap<ArcLabel, Vec<usize>> = BTreeMap::new();
        let mut next = 0usize;
        for (i, path) in paths.iter().enumerate() {
            if path.is_empty() {
                return Err(EncodingError::EmptyPath { index: i });
            }
            offsets.push(next);
            for (j, &label) in path.arc_labels().iter().enumerate() {
                arc_positions.entry(label).or_default().push(next + j);
            }
            next += path.len();
        }
        Ok(QubitLayout { paths, offsets, total_qubits: next, arc_positions })
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn arc_positions(&self) -> &BTreeMap<ArcLabel, Vec<usize>> {
        &self.arc_positions
    }

    pub fn register_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn register_len(&self, path: usize) -> usize {
        self.paths.paths()[path].len()
    }

    pub fn register_range(&self, path: usize) -> Range<usize> {
        let start = self.offsets[path];
        start..start + self.register_len(path)
    }

    /// Qubit index of 1-based position `position` on path `path`.
    pub fn qubit_index(&self, path: usize, position: usize) -> usize {
        assert!(
            position >= 1 && position <= self.register_len(path),
            "position {position} out of range for register {path}"
        );
        self.offsets[path] + position - 1
    }

    /// Size of the feasible subspace, `prod n_i`.
    pub fn feasible_count(&self) -> u128 {
        self.paths.iter().map(|p| p.len() as u128).product()
    }
}

/// A bit assignment over the layout's qubits. Bit `q` corresponds to qubit
/// `q`; the bitstring form lists qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Configuration {
    bits: Vec<bool>,
}

impl Configuration {
    pub fn new(bits: Vec<bool>) -> Configuration {
        Configuration { bits }
    }

    pub fn zeros(n: usize) -> Configuration {
        Configuration { bits: vec![false; n] }
    }

    pub fn from_ones(n: usize, ones: &[usize]) -> Configuration {
        let mut bits = vec![false; n];
        for &q in ones {
            bits[q] = true;
        }
        Configuration { bits }
    }

    /// Interprets `index` with qubit 0 as the most significant bit.
    pub fn from_basis_index(n: usize, index: u64) -> Configuration {
        let bits = (0..n).map(|q| index >> (n - 1 - q) & 1 == 1).collect();
        Configuration { bits }
    }

    pub fn basis_index(&self) -> u64 {
        assert!(self.bits.len() <= 64, "configuration too wide for a basis index");
        self.bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64)
    }

    pub fn from_bitstring(s: &str) -> Result<Configuration, EncodingError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(EncodingError::InvalidBitstring),
            }
        }
        Ok(Configuration { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

fn check_len(c: &Configuration, layout: &QubitLayout) -> Result<(), EncodingError> {
    if c.len() != layout.total_qubits() {
        return Err(EncodingError::LengthMismatch { expected: layout.total_qubits(), got: c.len() });
    }
    Ok(())
}

/// The decoded removed-arc set: arc `k` is present iff any of its occurrence
/// qubits is set. Total on all configurations, feasible or not.
pub fn decode(c: &Configuration, layout: &QubitLayout) -> Result<BTreeSet<ArcLabel>, EncodingError> {
    check_len(c, layout)?;
    Ok(layout
        .arc_positions()
        .iter()
        .filter(|(_, qubits)| qubits.iter().any(|&q| c.bits[q]))
        .map(|(&label, _)| label)
        .collect())
}

/// Total weight of the decoded arc set; each arc counted once regardless of
/// how many registers select it.
pub fn cost(c: &Configuration, layout: &QubitLayout, g: &Graph) -> Result<Weight, EncodingError> {
    let removed = decode(c, layout)?;
    Ok(Weight::sum(removed.iter().map(|&label| {
        &g.arc(label).expect("layout arc must exist in graph").weight
    })))
}

/// True iff every path register has Hamming weight exactly one.
pub fn is_feasible(c: &Configuration, layout: &QubitLayout) -> Result<bool, EncodingError> {
    check_len(c, layout)?;
    Ok((0..layout.register_count())
        .all(|i| layout.register_range(i).filter(|&q| c.bits[q]).count() == 1))
}

/// Exhaustive minimum over all feasible configurations with the default
/// enumeration cap. Returns the minimal cost and the lexicographically first
/// minimizing bitstring.
pub fn brute_force_min(layout: &QubitLayout, g: &Graph) -> Result<(Weight, Configuration), EncodingError> {
    brute_force_min_with_cap(layout, g, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_min_with_cap(
    layout: &QubitLayout,
    g: &Graph,
    cap: u128,
) -> Result<(Weight, Configuration), EncodingError> {
    let size = layout.feasible_count();
    if size > cap {
        return Err(EncodingError::EnumerationTooLarge { size, cap });
    }
    let registers = layout.register_count();
    // Weight of each (path, position) choice, and its arc label.
    let choice: Vec<Vec<(ArcLabel, Weight)>> = layout
        .paths()
        .iter()
        .map(|p| {
            p.arc_labels()
                .iter()
                .map(|&l| (l, g.arc(l).expect("layout arc must exist in graph").weight))
                .collect()
        })
        .collect();

    let mut positions = vec![0usize; registers]; // 0-based position per register
    let mut best: Option<(Weight, Configuration)> = None;
    loop {
        let mut labels = BTreeSet::new();
        for (i, &pos) in positions.iter().enumerate() {
            labels.insert(choice[i][pos].0);
        }
        let total = Weight::sum(labels.iter().map(|&l| &g.arc(l).unwrap().weight));
        let better = match &best {
            None => true,
            Some((cost, config)) => {
                total < *cost || (total == *cost && configuration_of(layout, &positions) < *config)
            }
        };
        if better {
            best = Some((total, configuration_of(layout, &positions)));
        }

        // mixed-radix increment, last register fastest
        let mut i = registers;
        loop {
            if i == 0 {
                return Ok(best.expect("feasible space is nonempty"));
            }
            i -= 1;
            positions[i] += 1;
            if positions[i] < choice[i].len() {
                break;
            }
            positions[i] = 0;
        }
    }
}

fn configuration_of(layout: &QubitLayout, positions: &[usize]) -> Configuration {
    let ones: Vec<usize> = positions.iter().enumerate().map(|(i, &p)| layout.offsets()[i] + p).collect();
    Configuration::from_ones(layout.total_qubits(), &ones)
}

/// One Z-monomial: `coeff * prod_{q in support} Z_q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub support: Vec<usize>,
}

/// A diagonal operator `offset + sum_T coeff_T * prod_{q in T} Z_q`.
/// Z has eigenvalue +1 on bit 0 and -1 on bit 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliTermSum {
    pub offset: f64,
    pub terms: Vec<PauliTerm>,
}

impl PauliTermSum {
    pub fn evaluate(&self, c: &Configuration) -> f64 {
        let mut value = self.offset;
        for term in &self.terms {
            let parity = term.support.iter().filter(|&&q| c.bits[q]).count() % 2;
            value += if parity == 1 { -term.coeff } else { term.coeff };
        }
        value
    }

    /// Precomputes bitmasks so basis states can be evaluated by popcount.
    pub fn compile(&self, n: usize) -> Result<CompiledPauliSum, EncodingError> {
        if n > 64 {
            return Err(EncodingError::TooManyQubits { total: n, max: 64 });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mask = t.support.iter().fold(0u64, |m, &q| m | 1 << (n - 1 - q));
                (t.coeff, mask)
            })
            .collect();
        Ok(CompiledPauliSum { offset: self.offset, terms })
    }
}

#[derive(Debug, Clone)]
pub struct CompiledPauliSum {
    offset: f64,
    terms: Vec<(f64, u64)>,
}

impl CompiledPauliSum {
    pub fn evaluate_index(&self, index: u64) -> f64 {
        let mut value = self.offset;
        for &(coeff, mask) in &self.terms {
            value += if (index & mask).count_ones() % 2 == 1 { -coeff } else { coeff };
        }
        value
    }
}

/// Symbolic Z-expansion of the cut cost: for each arc `k` with occurrence
/// qubits `Q`, `w_k * (1 - prod_{q in Q} (1 + Z_q) / 2)` expanded into
/// monomials and merged across arcs.
pub fn pauli_cost_terms(layout: &QubitLayout, g: &Graph) -> Result<PauliTermSum, EncodingError> {
    pauli_cost_terms_with_cap(layout, g, DEFAULT_MULTIPLICITY_CAP)
}

pub fn pauli_cost_terms_with_cap(
    layout: &QubitLayout,
    g: &Graph,
    cap: usize,
) -> Result<PauliTermSum, EncodingError> {
    let mut offset = 0.0;
    let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (&label, qubits) in layout.arc_positions() {
        let m = qubits.len();
        if m > cap {
            return Err(EncodingError::MultiplicityTooLarge { label, count: m, cap });
        }
        let w = g.arc(label).expect("layout arc must exist in graph").weight.to_f64();
        let scale = w / (1u64 << m) as f64;
        offset += w - scale;
        for subset in 1u64..1 << m {
            let support: Vec<usize> =
                qubits.iter().enumerate().filter(|(j, _)| subset >> j & 1 == 1).map(|(_, &q)| q).collect();
            *merged.entry(support).or_insert(0.0) -= scale;
        }
    }
    let terms = merged
        .into_iter()
        .filter(|(_, coeff)| *coeff != 0.0)
        .map(|(support, coeff)| PauliTerm { coeff, support })
        .collect();
    Ok(PauliTermSum { offset, terms })
}

/// Fast per-basis-state evaluation used by the simulator (layouts of at most
/// 64 qubits): one occurrence bitmask per arc, one register mask per path.
#[derive(Debug, Clone)]
pub struct DiagonalCost {
    n: usize,
    arcs: Vec<ArcMask>,
    register_masks: Vec<u64>,
}

#[derive(Debug, Clone)]
struct ArcMask {
    label: ArcLabel,
    mask: u64,
    weight: Weight,
    weight_f64: f64,
}

impl DiagonalCost {
    pub fn new(layout: &QubitLayout, g: &Graph) -> Result<DiagonalCost, EncodingError> {
        let n = layout.total_qubits();
        if n > 64 {
            return Err(EncodingError::TooManyQubits { total: n, max: 64 });
        }
        let qubit_mask = |q: usize| 1u64 << (n - 1 - q);
        let arcs = layout
            .arc_positions()
            .iter()
            .map(|(&label, qubits)| {
                let weight = g.arc(label).expect("layout arc must exist in graph").weight;
                ArcMask {
                    label,
                    mask: qubits.iter().fold(0, |m, &q| m | qubit_mask(q)),
                    weight,
                    weight_f64: weight.to_f64(),
                }
            })
            .collect();
        let register_masks = (0..layout.register_count())
            .map(|i| layout.register_range(i).fold(0, |m, q| m | qubit_mask(q)))
            .collect();
        Ok(DiagonalCost { n, arcs, register_masks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost_f64(&self, index: u64) -> f64 {
        self.arcs.iter().filter(|a| index & a.mask != 0).map(|a| a.weight_f64).sum()
    }

    pub fn cost_weight(&self, index: u64) -> Weight {
        Weight::sum(self.arcs.iter().filter(|a| index & a.mask != 0).map(|a| &a.weight))
    }

    pub fn decode_index(&self, index: u64) -> BTreeSet<ArcLabel> {
        self.arcs.iter().filter(|a| index & a.mask != 0).map(|a| a.label).collect()
    }

    pub fn is_feasible_index(&self, index: u64) -> bool {
        self.register_masks.iter().all(|&m| (index & m).count_ones() == 1)
    }
}
