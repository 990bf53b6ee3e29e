//! Weighted directed problem instances and the classical min-cut machinery.
//!
//! Weights are exact decimals (`mantissa / 10^dp`), so cut values, flow
//! residuals, and the brute-force oracles all compare bit-exactly; floating
//! point only enters downstream where probabilities do.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub type VertexId = u32;
pub type ArcLabel = u32;

/// Largest vertex count / arc count an instance file may declare.
pub const MAX_INSTANCE_SIZE: u32 = 1_000_000;

const MAX_INT_DIGITS: usize = 18;
const MAX_FRAC_DIGITS: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate arc label {label}")]
    DuplicateLabel { line: usize, label: ArcLabel },
    #[error("line {line}: nonpositive weight")]
    NonpositiveWeight { line: usize },
    #[error("missing `v` vertex-count directive")]
    MissingVertexCount,
    #[error("missing source (`s`) declaration")]
    MissingSource,
    #[error("missing sink (`t`) declaration")]
    MissingSink,
    #[error("source equals sink")]
    SourceEqualsSink,
    #[error("arc labels must be contiguous 1..={expected}; label {missing} is missing")]
    NonContiguousLabels { expected: u32, missing: u32 },
    #[error("unknown arc label {0}")]
    UnknownLabel(ArcLabel),
}

/// Exact nonnegative decimal, `mantissa / 10^dp`, normalized so `dp` carries
/// no trailing zeros. Instance files cap weights at 18 integer and 6
/// fractional digits, which keeps every sum and comparison inside `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Weight {
    mantissa: u128,
    dp: u8,
}

impl Weight {
    pub const ZERO: Weight = Weight { mantissa: 0, dp: 0 };

    pub fn from_int(value: u64) -> Weight {
        Weight { mantissa: value as u128, dp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.mantissa as f64 / 10f64.powi(self.dp as i32)
    }

    fn normalized(mut mantissa: u128, mut dp: u8) -> Weight {
        while dp > 0 && mantissa % 10 == 0 {
            mantissa /= 10;
            dp -= 1;
        }
        if mantissa == 0 {
            dp = 0;
        }
        Weight { mantissa, dp }
    }

    /// Mantissa rescaled to `dp` decimal places (`dp >= self.dp`).
    fn scaled(&self, dp: u8) -> u128 {
        self.mantissa * 10u128.pow((dp - self.dp) as u32)
    }

    pub fn checked_add(&self, other: &Weight) -> Option<Weight> {
        let dp = self.dp.max(other.dp);
        let sum = self.scaled(dp).checked_add(other.scaled(dp))?;
        Some(Weight::normalized(sum, dp))
    }

    pub fn checked_sub(&self, other: &Weight) -> Option<Weight> {
        let dp = self.dp.max(other.dp);
        let diff = self.scaled(dp).checked_sub(other.scaled(dp))?;
        Some(Weight::normalized(diff, dp))
    }

    /// Exact sum; panics on overflow, which the per-weight digit caps make
    /// unreachable for any instance the parser accepts.
    pub fn sum<'a>(weights: impl IntoIterator<Item = &'a Weight>) -> Weight {
        weights
            .into_iter()
            .fold(Weight::ZERO, |acc, w| acc.checked_add(w).expect("weight sum overflow"))
    }

    fn parse(s: &str) -> Result<Weight, String> {
        if s.starts_with('-') {
            return Err("negative weight".into());
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("invalid weight `{s}`"));
        }
        if s.contains('.') && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit())) {
            return Err(format!("invalid weight `{s}`"));
        }
        if int_part.trim_start_matches('0').len() > MAX_INT_DIGITS {
            return Err(format!("weight `{s}` exceeds {MAX_INT_DIGITS} integer digits"));
        }
        if frac_part.len() > MAX_FRAC_DIGITS {
            return Err(format!("weight `{s}` exceeds {MAX_FRAC_DIGITS} decimal places"));
        }
        let mut mantissa: u128 = 0;
        for b in int_part.bytes().chain(frac_part.bytes()) {
            mantissa = mantissa * 10 + (b - b'0') as u128;
        }
        Ok(Weight::normalized(mantissa, frac_part.len() as u8))
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let dp = self.dp.max(other.dp);
        self.scaled(dp).cmp(&other.scaled(dp))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dp == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            let base = 10u128.pow(self.dp as u32);
            write!(f, "{}.{:0width$}", self.mantissa / base, self.mantissa % base, width = self.dp as usize)
        }
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Weight::parse(s)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub label: ArcLabel,
    pub tail: VertexId,
    pub head: VertexId,
    pub weight: Weight,
}

/// Immutable weighted directed graph with designated source and sink.
///
/// Arc labels are assigned by the instance file and survive arc removal, so
/// they are stable identifiers across the iterative solver's rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: u32,
    arcs: Vec<Arc>, // sorted by label
    source: VertexId,
    sink: VertexId,
    out: Vec<Vec<usize>>, // vertex -> indices into `arcs`, ascending label
}

impl Graph {
    /// Parses the line-oriented instance format: `v <count>`, one
    /// `a <label> <tail> <head> <weight>` per arc, `s <id>`, `t <id>`,
    /// `#` comments. `;` also separates statements within a line.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut vertex_count: Option<u32> = None;
        let mut source: Option<VertexId> = None;
        let mut sink: Option<VertexId> = None;
        let mut arcs: Vec<(Arc, usize)> = Vec::new();

        let parse_err = |line: usize, msg: String| GraphError::Parse { line, msg };
        let parse_id = |line: usize, token: &str, what: &str| -> Result<u32, GraphError> {
            token
                .parse::<u32>()
                .ok()
                .filter(|&v| v >= 1 && v <= MAX_INSTANCE_SIZE)
                .ok_or_else(|| parse_err(line, format!("invalid {what} `{token}`")))
        };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            for stmt in raw.split(';') {
                let stmt = stmt.trim();
                if stmt.is_empty() {
                    continue;
                }
                if stmt.starts_with('#') {
                    break; // rest of the physical line is a comment
                }
                let tokens: Vec<&str> = stmt.split_whitespace().collect();
                match tokens[0] {
                    "v" => {
                        if tokens.len() != 2 {
                            return Err(parse_err(line, "expected `v <count>`".into()));
                        }
                        if vertex_count.is_some() {
                            return Err(parse_err(line, "duplicate `v` directive".into()));
                        }
                        vertex_count = Some(parse_id(line, tokens[1], "vertex count")?);
                    }
                    "a" => {
                        if tokens.len() != 5 {
                            return Err(parse_err(line, "expected `a <label> <tail> <head> <weight>`".into()));
                        }
                        let label = parse_id(line, tokens[1], "arc label")?;
                        let tail = parse_id(line, tokens[2], "tail vertex")?;
                        let head = parse_id(line, tokens[3], "head vertex")?;
                        if tail == head {
                            return Err(parse_err(line, format!("self-loop on vertex {tail}")));
                        }
                        let weight = match Weight::parse(tokens[4]) {
                            Ok(w) => w,
                            Err(msg) if msg == "negative weight" => {
                                return Err(GraphError::NonpositiveWeight { line })
                            }
                            Err(msg) => return Err(parse_err(line, msg)),
                        };
                        if weight.is_zero() {
                            return Err(GraphError::NonpositiveWeight { line });
                        }
                        if arcs.iter().any(|(a, _)| a.label == label) {
                            return Err(GraphError::DuplicateLabel { line, label });
                        }
                        if arcs.len() as u32 >= MAX_INSTANCE_SIZE {
                            return Err(parse_err(line, "too many arcs".into()));
                        }
                        arcs.push((Arc { label, tail, head, weight }, line));
                    }
                    "s" => {
                        if tokens.len() != 2 || source.is_some() {
                            return Err(parse_err(line, "expected a single `s <id>`".into()));
                        }
                        source = Some(parse_id(line, tokens[1], "source vertex")?);
                    }
                    "t" => {
                        if tokens.len() != 2 || sink.is_some() {
                            return Err(parse_err(line, "expected a single `t <id>`".into()));
                        }
                        sink = Some(parse_id(line, tokens[1], "sink vertex")?);
                    }
                    other => {
                        return Err(parse_err(line, format!("unknown directive `{other}`")));
                    }
                }
            }
        }

        let vertex_count = vertex_count.ok_or(GraphError::MissingVertexCount)?;
        let source = source.ok_or(GraphError::MissingSource)?;
        let sink = sink.ok_or(GraphError::MissingSink)?;
        if source == sink {
            return Err(GraphError::SourceEqualsSink);
        }
        for (&id, what) in [(&source, "source"), (&sink, "sink")] {
            if id > vertex_count {
                return Err(GraphError::Parse { line: 0, msg: format!("{what} vertex {id} out of range") });
            }
        }
        for (arc, line) in &arcs {
            if arc.tail > vertex_count || arc.head > vertex_count {
                return Err(parse_err(*line, format!("arc {} endpoint out of range", arc.label)));
            }
        }
        let expected = arcs.len() as u32;
        let mut seen = vec![false; arcs.len() + 1];
        for (arc, _) in &arcs {
            if arc.label > expected {
                return Err(GraphError::NonContiguousLabels {
                    expected,
                    missing: (1..=expected).find(|&l| arcs.iter().all(|(a, _)| a.label != l)).unwrap_or(expected),
                });
            }
            seen[arc.label as usize] = true;
        }
        debug_assert!(seen.iter().skip(1).all(|&s| s));

        let mut arcs: Vec<Arc> = arcs.into_iter().map(|(a, _)| a).collect();
        arcs.sort_by_key(|a| a.label);
        Ok(Graph::assemble(vertex_count, arcs, source, sink))
    }

    fn assemble(vertex_count: u32, arcs: Vec<Arc>, source: VertexId, sink: VertexId) -> Graph {
        let mut out = vec![Vec::new(); vertex_count as usize + 1];
        for (i, arc) in arcs.iter().enumerate() {
            out[arc.tail as usize].push(i); // arcs are label-sorted, so lists are too
        }
        Graph { vertex_count, arcs, source, sink, out }
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, label: ArcLabel) -> Option<&Arc> {
        self.arcs.binary_search_by_key(&label, |a| a.label).ok().map(|i| &self.arcs[i])
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn weight_of(&self, labels: &BTreeSet<ArcLabel>) -> Weight {
        Weight::sum(labels.iter().filter_map(|&l| self.arc(l)).map(|a| &a.weight))
    }

    /// All simple source-to-sink paths in depth-first order, exploring arcs in
    /// ascending label order, truncated to `limit`. The `complete` flag is set
    /// when nothing was truncated.
    pub fn enumerate_paths(&self, limit: usize) -> PathSet {
        let mut paths = Vec::new();
        let mut complete = true;
        let mut on_path = vec![false; self.vertex_count as usize + 1];
        // (vertex, next out-arc slot); the arc trail runs parallel to it.
        let mut stack: Vec<(VertexId, usize)> = vec![(self.source, 0)];
        let mut trail: Vec<usize> = Vec::new();
        on_path[self.source as usize] = true;

        'dfs: while let Some(&mut (v, ref mut child)) = stack.last_mut() {
            let slots = &self.out[v as usize];
            if *child >= slots.len() {
                stack.pop();
                on_path[v as usize] = false;
                trail.pop();
                continue;
            }
            let arc_idx = slots[*child];
            *child += 1;
            let head = self.arcs[arc_idx].head;
            if head == self.sink {
                if paths.len() == limit {
                    complete = false;
                    break 'dfs;
                }
                let mut labels: Vec<ArcLabel> = trail.iter().map(|&i| self.arcs[i].label).collect();
                labels.push(self.arcs[arc_idx].label);
                paths.push(Path { arc_labels: labels });
            } else if !on_path[head as usize] {
                on_path[head as usize] = true;
                stack.push((head, 0));
                trail.push(arc_idx);
            }
        }
        PathSet { paths, complete }
    }

    /// Maximum s-t flow / minimum cut via shortest augmenting paths
    /// (Edmonds-Karp) on weights rescaled to exact integers.
    pub fn max_flow_min_cut(&self) -> MinCut {
        let scale_dp = self.arcs.iter().map(|a| a.weight.dp).max().unwrap_or(0);
        let cap: Vec<u128> = self.arcs.iter().map(|a| a.weight.scaled(scale_dp)).collect();
        let mut flow = vec![0u128; self.arcs.len()];

        // Per-vertex incidence: forward slots (ascending label), then
        // backward slots (ascending label) - fixed order keeps BFS
        // deterministic.
        let mut incidence: Vec<Vec<(usize, bool)>> = vec![Vec::new(); self.vertex_count as usize + 1];
        for (i, arc) in self.arcs.iter().enumerate() {
            incidence[arc.tail as usize].push((i, true));
        }
        for (i, arc) in self.arcs.iter().enumerate() {
            incidence[arc.head as usize].push((i, false));
        }

        let mut visited = vec![false; self.vertex_count as usize + 1];
        loop {
            visited.fill(false);
            let mut parent: Vec<Option<(usize, bool)>> = vec![None; self.vertex_count as usize + 1];
            let mut queue = VecDeque::new();
            visited[self.source as usize] = true;
            queue.push_back(self.source);
            'bfs: while let Some(v) = queue.pop_front() {
                for &(i, forward) in &incidence[v as usize] {
                    let residual = if forward { cap[i] - flow[i] } else { flow[i] };
                    if residual == 0 {
                        continue;
                    }
                    let next = if forward { self.arcs[i].head } else { self.arcs[i].tail };
                    if visited[next as usize] {
                        continue;
                    }
                    visited[next as usize] = true;
                    parent[next as usize] = Some((i, forward));
                    if next == self.sink {
                        break 'bfs;
                    }
                    queue.push_back(next);
                }
            }
            if !visited[self.sink as usize] {
                break;
            }
            let mut bottleneck = u128::MAX;
            let mut v = self.sink;
            while v != self.source {
                let (i, forward) = parent[v as usize].unwrap();
                let residual = if forward { cap[i] - flow[i] } else { flow[i] };
                bottleneck = bottleneck.min(residual);
                v = if forward { self.arcs[i].tail } else { self.arcs[i].head };
            }
            let mut v = self.sink;
            while v != self.source {
                let (i, forward) = parent[v as usize].unwrap();
                if forward {
                    flow[i] += bottleneck;
                    v = self.arcs[i].tail;
                } else {
                    flow[i] -= bottleneck;
                    v = self.arcs[i].head;
                }
            }
        }

        // `visited` now holds the residual-reachable side of the cut.
        let cut: BTreeSet<ArcLabel> = self
            .arcs
            .iter()
            .filter(|a| visited[a.tail as usize] && !visited[a.head as usize])
            .map(|a| a.label)
            .collect();
        let value = self.weight_of(&cut);
        debug_assert_eq!(
            cut.iter().map(|&l| self.arc(l).unwrap().weight.scaled(scale_dp)).sum::<u128>(),
            flow.iter().enumerate().filter(|(i, _)| self.arcs[*i].tail == self.source).map(|(_, f)| f).sum::<u128>()
                - flow.iter().enumerate().filter(|(i, _)| self.arcs[*i].head == self.source).map(|(_, f)| f).sum::<u128>()
        );
        MinCut { value, arcs: cut }
    }

    /// Returns the graph with `labels` deleted; surviving arcs keep their
    /// original labels.
    pub fn remove_arcs(&self, labels: &BTreeSet<ArcLabel>) -> Result<Graph, GraphError> {
        for &label in labels {
            if self.arc(label).is_none() {
                return Err(GraphError::UnknownLabel(label));
            }
        }
        let arcs: Vec<Arc> = self.arcs.iter().filter(|a| !labels.contains(&a.label)).cloned().collect();
        Ok(Graph::assemble(self.vertex_count, arcs, self.source, self.sink))
    }

    /// Breadth-first reachability from source to sink.
    pub fn has_st_path(&self) -> bool {
        let mut visited = vec![false; self.vertex_count as usize + 1];
        let mut queue = VecDeque::new();
        visited[self.source as usize] = true;
        queue.push_back(self.source);
        while let Some(v) = queue.pop_front() {
            if v == self.sink {
                return true;
            }
            for &i in &self.out[v as usize] {
                let head = self.arcs[i].head;
                if !visited[head as usize] {
                    visited[head as usize] = true;
                    queue.push_back(head);
                }
            }
        }
        false
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Graph::parse(s)
    }
}

/// Result of [`Graph::max_flow_min_cut`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinCut {
    pub value: Weight,
    pub arcs: BTreeSet<ArcLabel>,
}

/// A simple source-to-sink path, stored as its arc-label sequence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Path {
    arc_labels: Vec<ArcLabel>,
}

impl Path {
    pub fn arc_labels(&self) -> &[ArcLabel] {
        &self.arc_labels
    }

    pub fn len(&self) -> usize {
        self.arc_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arc_labels.is_empty()
    }

    pub fn contains(&self, label: ArcLabel) -> bool {
        self.arc_labels.contains(&label)
    }

    /// Vertex sequence `source, ..., sink` under `g`.
    pub fn vertices(&self, g: &Graph) -> Vec<VertexId> {
        let mut v = Vec::with_capacity(self.arc_labels.len() + 1);
        for (i, &label) in self.arc_labels.iter().enumerate() {
            let arc = g.arc(label).expect("path arc must exist in graph");
            if i == 0 {
                v.push(arc.tail);
            }
            v.push(arc.head);
        }
        v
    }

    pub(crate) fn from_labels(arc_labels: Vec<ArcLabel>) -> Path {
        Path { arc_labels }
    }
}

/// Ordered collection of simple s-t paths plus a complete-enumeration flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSet {
    paths: Vec<Path>,
    complete: bool,
}

impl PathSet {
    pub fn new(paths: Vec<Path>, complete: bool) -> PathSet {
        PathSet { paths, complete }
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Path> {
        self.paths.iter()
    }
}
