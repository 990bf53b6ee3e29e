//! Dense statevector simulation of the feasibility-preserving ansatz.
//!
//! Only the gate families the ansatz needs exist here: basis-state
//! preparation, the diagonal cost phase, and the XY partial swap. All three
//! are unitary and conserve per-register Hamming weight, so a feasible start
//! stays inside the feasible subspace by construction.
//!
//! Warm-start preparation additionally uses the first-order bond factor
//! `cos(a)*Id - i*sin(a)*H_bond`. That operator rotates the one-excitation
//! pair exactly like the partial swap but scales the untouched sectors by
//! `cos(a)`, so it is not unitary: the prepared state has L2 norm <= 1. Its
//! squared amplitudes are reported as-is; distribution extraction and
//! sampling normalise by the total mass.
//!
//! Basis-state index convention: qubit 0 is the most significant bit, so the
//! bitstring of index `b` reads left to right as qubits 0, 1, ....

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::encoding::DiagonalCost;
use crate::encoding::QubitLayout;
use crate::graph::Graph;
use crate::objective::{CostDistribution, DistributionSource};

/// Hard cap on simulated qubits (a 2^26 statevector is 1 GiB).
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("{n} qubits exceed the simulator cap of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate addresses qubit {0} twice")]
    DuplicateQubit(usize),
    #[error("state has {state} qubits but layout has {layout}")]
    LayoutMismatch { state: usize, layout: usize },
    #[error("trotter sweep count must be at least 1")]
    ZeroSweeps,
    #[error("warm start names {got} positions for {expected} registers")]
    PositionCount { expected: usize, got: usize },
    #[error("warm-start position {position} out of range 1..={len} on path {path}")]
    PositionOutOfRange { path: usize, position: usize, len: usize },
    #[error("warm start carries {got} angle vectors for {expected} registers")]
    AngleVectorCount { expected: usize, got: usize },
    #[error("path {path} needs {expected} bond angles, got {got}")]
    AngleCount { path: usize, expected: usize, got: usize },
    #[error("state has no probability mass")]
    ZeroState,
}

/// Mixer bond structure of a path register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixerTopology {
    /// Bonds (j, j+1) plus the closing bond (last, first). A two-qubit ring
    /// visits its single pair twice, matching the wrap-around bond sum.
    Ring,
    OpenChain,
}

impl MixerTopology {
    pub fn bond_count(&self, register_len: usize) -> usize {
        match self {
            MixerTopology::Ring => {
                if register_len >= 2 {
                    register_len
                } else {
                    0
                }
            }
            MixerTopology::OpenChain => register_len.saturating_sub(1),
        }
    }

    /// In-register bond pairs, ascending position, ring bond last.
    pub fn bonds(&self, register_len: usize) -> Vec<(usize, usize)> {
        let mut bonds = Vec::new();
        if register_len >= 2 {
            for j in 0..register_len - 1 {
                bonds.push((j, j + 1));
            }
            if *self == MixerTopology::Ring {
                bonds.push((register_len - 1, 0));
            }
        }
        bonds
    }
}

/// Warm-start choice: one classical position per register plus the per-bond
/// angle vector of each register.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    /// 1-based removed-arc position per path.
    pub positions: Vec<usize>,
    /// Per path, one angle per bond of the configured topology.
    pub angles: Vec<Vec<f64>>,
}

impl WarmStart {
    /// All-zero angles: the prepared state is exactly the chosen basis state.
    pub fn basis_only(positions: Vec<usize>, layout: &QubitLayout, topology: MixerTopology) -> WarmStart {
        let angles =
            (0..layout.register_count()).map(|i| vec![0.0; topology.bond_count(layout.register_len(i))]).collect();
        WarmStart { positions, angles }
    }

    /// One shared angle on every bond of every register.
    pub fn uniform_angle(
        positions: Vec<usize>,
        layout: &QubitLayout,
        topology: MixerTopology,
        angle: f64,
    ) -> WarmStart {
        let angles = (0..layout.register_count())
            .map(|i| vec![angle; topology.bond_count(layout.register_len(i))])
            .collect();
        WarmStart { positions, angles }
    }
}

/// Full variational parameter set: warm start plus `p` (gamma, beta) layers.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams {
    pub warm_start: WarmStart,
    pub layers: Vec<(f64, f64)>,
    pub topology: MixerTopology,
    pub trotter_sweeps: u32,
}

impl AnsatzParams {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

/// Dense complex amplitude vector over the 2^n basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The basis state with exactly the qubits in `ones` set.
    pub fn basis(n: usize, ones: &[usize]) -> Result<StateVector, SimError> {
        if n > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n, max: MAX_QUBITS });
        }
        let mut index = 0usize;
        let mut seen = 0u64;
        for &q in ones {
            if q >= n {
                return Err(SimError::QubitOutOfRange { qubit: q, n });
            }
            if seen >> q & 1 == 1 {
                return Err(SimError::DuplicateQubit(q));
            }
            seen |= 1 << q;
            index |= 1 << (n - 1 - q);
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[index] = Complex64::ONE;
        Ok(StateVector { n, amps })
    }

    /// Wraps an explicit amplitude vector (length must be 2^n).
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<StateVector, SimError> {
        if n > MAX_QUBITS {
            return Err(SimError::TooManyQubits { n, max: MAX_QUBITS });
        }
        assert_eq!(amps.len(), 1 << n, "amplitude vector length must be 2^n");
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    /// Squared amplitude of one basis state, unnormalised.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(usize, usize), SimError> {
        if a >= self.n {
            return Err(SimError::QubitOutOfRange { qubit: a, n: self.n });
        }
        if b >= self.n {
            return Err(SimError::QubitOutOfRange { qubit: b, n: self.n });
        }
        if a == b {
            return Err(SimError::DuplicateQubit(a));
        }
        Ok((1 << (self.n - 1 - a), 1 << (self.n - 1 - b)))
    }

    fn xy_kernel(&mut self, mask_a: usize, mask_b: usize, angle: f64, scale_idle: bool) {
        let c = angle.cos();
        let ms = Complex64::new(0.0, -angle.sin()); // -i sin(a)
        for index in 0..self.amps.len() {
            let bit_a = index & mask_a != 0;
            let bit_b = index & mask_b != 0;
            if !bit_a && bit_b {
                let partner = index ^ mask_a ^ mask_b;
                let x = self.amps[index];
                let y = self.amps[partner];
                self.amps[index] = c * x + ms * y;
                self.amps[partner] = ms * x + c * y;
            } else if bit_a == bit_b && scale_idle {
                self.amps[index] *= c;
            }
        }
    }

    /// The exact partial-swap unitary `exp(-i
    /// angle * (X_a X_b + Y_a Y_b)/2)`: identity on the |00> and |11>
    /// sectors, the rotation [[cos, -i sin], [-i sin, cos]] on
    /// span{|01>, |10>}.
    pub fn apply_xy(&mut self, a: usize, b: usize, angle: f64) -> Result<(), SimError> {
        let (ma, mb) = self.check_pair(a, b)?;
        self.xy_kernel(ma, mb, angle, false);
        Ok(())
    }

    /// The first-order bond factor `cos(angle)*Id - i*sin(angle)*H_bond` used
    /// by warm-start preparation. Not unitary: |00>/|11> sectors shrink by
    /// `cos(angle)`.
    pub fn apply_xy_factor(&mut self, a: usize, b: usize, angle: f64) -> Result<(), SimError> {
        let (ma, mb) = self.check_pair(a, b)?;
        self.xy_kernel(ma, mb, angle, true);
        Ok(())
    }
}

/// Multiplies each basis amplitude by `exp(-i * gamma * cost(b))`.
pub fn apply_cost_phase(state: &mut StateVector, diag: &DiagonalCost, gamma: f64) -> Result<(), SimError> {
    if diag.n() != state.n {
        return Err(SimError::LayoutMismatch { state: state.n, layout: diag.n() });
    }
    for index in 0..state.amps.len() {
        if state.amps[index] != Complex64::ZERO {
            let cost = diag.cost_f64(index as u64);
            state.amps[index] *= Complex64::from_polar(1.0, -gamma * cost);
        }
    }
    Ok(())
}

/// One mixer layer: per register, `sweeps` repetitions of the ordered bond
/// product of partial swaps with angle `beta / sweeps`. Feasibility is exact
/// at any sweep count; only the in-subspace rotation is Trotter-approximate.
pub fn apply_mixer_layer(
    state: &mut StateVector,
    layout: &QubitLayout,
    beta: f64,
    topology: MixerTopology,
    sweeps: u32,
) -> Result<(), SimError> {
    if state.n != layout.total_qubits() {
        return Err(SimError::LayoutMismatch { state: state.n, layout: layout.total_qubits() });
    }
    if sweeps == 0 {
        return Err(SimError::ZeroSweeps);
    }
    let theta = beta / sweeps as f64;
    for i in 0..layout.register_count() {
        let offset = layout.offsets()[i];
        let bonds = topology.bonds(layout.register_len(i));
        for _ in 0..sweeps {
            for &(u, v) in &bonds {
                state.apply_xy(offset + u, offset + v, theta)?;
            }
        }
    }
    Ok(())
}

/// Builds the chosen basis state, then applies each register's ordered bond
/// factor product with its per-bond angles (ascending bond, ring bond last).
pub fn prepare_warm_start(
    layout: &QubitLayout,
    warm: &WarmStart,
    topology: MixerTopology,
) -> Result<StateVector, SimError> {
    let registers = layout.register_count();
    if warm.positions.len() != registers {
        return Err(SimError::PositionCount { expected: registers, got: warm.positions.len() });
    }
    if warm.angles.len() != registers {
        return Err(SimError::AngleVectorCount { expected: registers, got: warm.angles.len() });
    }
    let mut ones = Vec::with_capacity(registers);
    for (i, &pos) in warm.positions.iter().enumerate() {
        let len = layout.register_len(i);
        if pos < 1 || pos > len {
            return Err(SimError::PositionOutOfRange { path: i, position: pos, len });
        }
        ones.push(layout.qubit_index(i, pos));
    }
    for (i, angles) in warm.angles.iter().enumerate() {
        let expected = topology.bond_count(layout.register_len(i));
        if angles.len() != expected {
            return Err(SimError::AngleCount { path: i, expected, got: angles.len() });
        }
    }

    let mut state = StateVector::basis(layout.total_qubits(), &ones)?;
    for i in 0..registers {
        let offset = layout.offsets()[i];
        for (&(u, v), &angle) in topology.bonds(layout.register_len(i)).iter().zip(&warm.angles[i]) {
            state.apply_xy_factor(offset + u, offset + v, angle)?;
        }
    }
    Ok(state)
}

/// Warm start, then `p` alternating cost-phase and mixer layers.
pub fn run_ansatz(layout: &QubitLayout, g: &Graph, params: &AnsatzParams) -> Result<StateVector, SimError> {
    let diag = DiagonalCost::new(layout, g).map_err(|_| SimError::TooManyQubits {
        n: layout.total_qubits(),
        max: MAX_QUBITS,
    })?;
    let mut state = prepare_warm_start(layout, &params.warm_start, params.topology)?;
    for &(gamma, beta) in &params.layers {
        apply_cost_phase(&mut state, &diag, gamma)?;
        apply_mixer_layer(&mut state, layout, beta, params.topology, params.trotter_sweeps)?;
    }
    Ok(state)
}

/// Total squared amplitude on basis states that violate the one-hot
/// constraint. Exhaustive over all 2^n amplitudes.
pub fn infeasible_mass(state: &StateVector, diag: &DiagonalCost) -> Result<f64, SimError> {
    if diag.n() != state.n {
        return Err(SimError::LayoutMismatch { state: state.n, layout: diag.n() });
    }
    Ok(state
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| !diag.is_feasible_index(*i as u64))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Pushforward of the measured-bitstring distribution through the classical
/// cost: cost value -> total probability, normalised by the state's mass.
/// The per-bitstring distribution is retained for solution extraction.
pub fn exact_distribution(
    state: &StateVector,
    layout: &QubitLayout,
    g: &Graph,
) -> Result<CostDistribution, SimError> {
    if state.n != layout.total_qubits() {
        return Err(SimError::LayoutMismatch { state: state.n, layout: layout.total_qubits() });
    }
    let diag = DiagonalCost::new(layout, g).expect("layout fits in the simulator");
    let total = state.norm_sq();
    if total <= 0.0 {
        return Err(SimError::ZeroState);
    }
    let mut per_bitstring = std::collections::BTreeMap::new();
    let mut support = std::collections::BTreeMap::new();
    for (index, amp) in state.amps.iter().enumerate() {
        let p = amp.norm_sqr();
        if p > 0.0 {
            let mass = p / total;
            per_bitstring.insert(index as u64, mass);
            *support.entry(diag.cost_weight(index as u64)).or_insert(0.0) += mass;
        }
    }
    Ok(CostDistribution::new(support, DistributionSource::Exact, Some(per_bitstring), state.n))
}

/// Multinomial sample of basis-state indices from the normalised squared
/// amplitudes. Deterministic for a fixed seed; the generator is ChaCha8
/// keyed directly with the 64-bit seed.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<Vec<u64>, SimError> {
    let mut cumulative: Vec<(u64, f64)> = Vec::new();
    let mut total = 0.0;
    for (index, amp) in state.amps.iter().enumerate() {
        let p = amp.norm_sqr();
        if p > 0.0 {
            total += p;
            cumulative.push((index as u64, total));
        }
    }
    if cumulative.is_empty() {
        return Err(SimError::ZeroState);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(shots as usize);
    for _ in 0..shots {
        let r = rng.gen::<f64>() * total;
        let at = cumulative.partition_point(|&(_, cum)| cum <= r).min(cumulative.len() - 1);
        draws.push(cumulative[at].0);
    }
    Ok(draws)
}
