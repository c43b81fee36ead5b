//! Ising spin-glass instances: generators, classical energies and exhaustive
//! ground-state search.
//!
//! Bit convention used across the crate: bit 0 is spin `s = +1`, bit 1 is
//! spin `s = -1`, matching `σ^z|0⟩ = +|0⟩`. Basis-state indices put qubit 0 in
//! the most significant position.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::PinnedRng;

/// Largest spin count accepted by [`exact_ground_state`].
pub const MAX_EXACT_SPINS: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    #[serde(rename = "all-to-all")]
    AllToAll,
    #[serde(rename = "heavy-hex")]
    HeavyHex,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::AllToAll => "all-to-all",
            Topology::HeavyHex => "heavy-hex",
            Topology::Custom => "custom",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-to-all" => Ok(Topology::AllToAll),
            "heavy-hex" => Ok(Topology::HeavyHex),
            "custom" => Ok(Topology::Custom),
            other => Err(Error::InvalidArgument(format!("unknown topology '{other}'"))),
        }
    }
}

/// One `J_ij σ^z_i σ^z_j` term with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// `H_f = Σ_{i<j} J_ij σ^z_i σ^z_j + Σ_i h_i σ^z_i`, plus a constant offset
/// that is carried along but never included in [`SpinGlassInstance::energy`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpinGlassInstance {
    h: Vec<f64>,
    couplings: Vec<Coupling>,
    topology: Topology,
    offset: f64,
}

impl SpinGlassInstance {
    /// Validates and builds an instance. Couplings are stored sorted by pair.
    pub fn new(h: Vec<f64>, couplings: Vec<Coupling>, topology: Topology) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::InvalidInstance("instance needs at least one spin".into()));
        }
        if let Some(i) = h.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance(format!("field h[{i}] is not finite")));
        }
        let mut couplings = couplings;
        couplings.sort_by_key(|c| (c.i, c.j));
        for (k, c) in couplings.iter().enumerate() {
            if c.i >= c.j {
                return Err(Error::InvalidInstance(format!(
                    "coupling ({}, {}) must satisfy i < j",
                    c.i, c.j
                )));
            }
            if c.j >= n {
                return Err(Error::InvalidInstance(format!(
                    "coupling ({}, {}) out of range for n = {n}",
                    c.i, c.j
                )));
            }
            if !c.value.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "coupling ({}, {}) is not finite",
                    c.i, c.j
                )));
            }
            if k > 0 && couplings[k - 1].i == c.i && couplings[k - 1].j == c.j {
                return Err(Error::InvalidInstance(format!(
                    "duplicate coupling ({}, {})",
                    c.i, c.j
                )));
            }
        }
        Ok(Self {
            h,
            couplings,
            topology,
            offset: 0.0,
        })
    }

    /// Convenience constructor from `(i, j, J_ij)` triples.
    pub fn from_triples(h: Vec<f64>, triples: &[(usize, usize, f64)], topology: Topology) -> Result<Self> {
        let couplings = triples
            .iter()
            .map(|&(i, j, value)| Coupling { i, j, value })
            .collect();
        Self::new(h, couplings, topology)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Symmetric dense coupling matrix with zero diagonal.
    pub fn coupling_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut m = vec![vec![0.0; n]; n];
        for c in &self.couplings {
            m[c.i][c.j] = c.value;
            m[c.j][c.i] = c.value;
        }
        m
    }

    /// Adjacency lists `(neighbor, J)` for every spin.
    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for c in &self.couplings {
            adj[c.i].push((c.j, c.value));
            adj[c.j].push((c.i, c.value));
        }
        adj
    }

    /// Classical energy of a bitstring given as a slice of 0/1 values.
    pub fn energy(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.n() {
            return Err(Error::Dimension {
                what: "bitstring length",
                expected: self.n(),
                got: bits.len(),
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("bitstring entries must be 0 or 1".into()));
        }
        let spin = |b: u8| 1.0 - 2.0 * f64::from(b);
        let mut e: f64 = self.h.iter().zip(bits).map(|(h, &b)| h * spin(b)).sum();
        for c in &self.couplings {
            e += c.value * spin(bits[c.i]) * spin(bits[c.j]);
        }
        Ok(e)
    }

    /// Classical energy of the basis state with index `index` (qubit 0 = MSB).
    pub fn energy_of_index(&self, index: u64) -> f64 {
        let n = self.n();
        let spin = |q: usize| -> f64 {
            if (index >> (n - 1 - q)) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let mut e = 0.0;
        for (q, h) in self.h.iter().enumerate() {
            e += h * spin(q);
        }
        for c in &self.couplings {
            e += c.value * spin(c.i) * spin(c.j);
        }
        e
    }

    /// Energies of all `2^n` basis states, indexed like the statevector.
    pub fn energy_diagonal(&self) -> Result<Vec<f64>> {
        if self.n() > MAX_EXACT_SPINS {
            return Err(Error::TooLarge {
                what: "energy diagonal",
                limit: MAX_EXACT_SPINS,
                n: self.n(),
            });
        }
        Ok((0..1u64 << self.n()).map(|z| self.energy_of_index(z)).collect())
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n(),
            h: self.h.clone(),
            j: self.couplings.iter().map(|c| (c.i, c.j, c.value)).collect(),
            topology: self.topology,
            offset: self.offset,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// On-disk JSON layout of an instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub h: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<(usize, usize, f64)>,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    #[serde(default)]
    pub offset: f64,
}

fn default_topology() -> Topology {
    Topology::Custom
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<SpinGlassInstance> {
        if self.h.len() != self.n {
            return Err(Error::Dimension {
                what: "field vector h",
                expected: self.n,
                got: self.h.len(),
            });
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidInstance("offset is not finite".into()));
        }
        // Reject reversed pairs here instead of silently reordering them.
        Ok(SpinGlassInstance::from_triples(self.h, &self.j, self.topology)?.with_offset(self.offset))
    }
}

/// Format a basis-state index as a bitstring, qubit 0 first.
pub fn index_to_bitstring(index: u64, n: usize) -> String {
    (0..n)
        .map(|q| if (index >> (n - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parse a bitstring of '0'/'1' characters, qubit 0 first.
pub fn bitstring_to_index(bits: &str) -> Result<u64> {
    if bits.len() > 64 {
        return Err(Error::InvalidArgument("bitstring longer than 64".into()));
    }
    bits.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::InvalidArgument(format!("invalid bit character '{other}'"))),
    })
}

pub fn index_to_bits(index: u64, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((index >> (n - 1 - q)) & 1) as u8).collect()
}

/// Gaussian random instance. Draw order: all `h_i` by index, then `J_ij` over
/// the topology's edges in lexicographic `(i, j)` order, each from N(0, 1)
/// using [`PinnedRng`] seeded with `seed`.
pub fn random_gaussian_instance(n: usize, seed: u64, topology: Topology) -> Result<SpinGlassInstance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let edges: Vec<(usize, usize)> = match topology {
        Topology::AllToAll => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        Topology::HeavyHex => heavy_hex_edges(n)?,
        Topology::Custom => {
            return Err(Error::InvalidArgument(
                "random instances need all-to-all or heavy-hex topology".into(),
            ))
        }
    };
    let mut rng = PinnedRng::new(seed);
    let h: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let triples: Vec<(usize, usize, f64)> = edges.into_iter().map(|(i, j)| (i, j, rng.normal())).collect();
    SpinGlassInstance::from_triples(h, &triples, topology)
}

/// Width of one heavy-hex chain row.
pub const HEAVY_HEX_ROW: usize = 15;

/// Edge set of a heavy-hex fragment with `n` nodes, sorted lexicographically.
///
/// The lattice is a stack of chains of [`HEAVY_HEX_ROW`] nodes joined by
/// degree-2 bridge nodes. Bridges below even-numbered rows sit at columns
/// 0, 4, 8, 12 and below odd-numbered rows at 2, 6, 10, 14. Nodes are numbered
/// row by row: a chain, then the bridges beneath it, then the next chain. A
/// chain is numbered left to right when the bridges above it start at column
/// 0 and right to left otherwise, so every node touches an earlier one and any
/// truncation stays connected. Every node has degree at most 3.
pub fn heavy_hex_edges(n: usize) -> Result<Vec<(usize, usize)>> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "heavy-hex fragment needs n >= 3, got {n}"
        )));
    }
    let w = HEAVY_HEX_ROW;
    let mut edges = Vec::new();
    let mut next = 0usize;
    // Node ids of the bridges hanging below the previous chain, keyed by column.
    let mut pending: Vec<(usize, usize)> = Vec::new();
    let mut row = 0usize;
    'outer: loop {
        // Bridges above odd rows start at column 0, above even rows (> 0) they
        // end at column w - 1; walk from that end.
        let cols: Vec<usize> = if row == 0 || row % 2 == 1 {
            (0..w).collect()
        } else {
            (0..w).rev().collect()
        };
        let mut row_ids = vec![usize::MAX; w];
        let mut prev: Option<usize> = None;
        for &c in &cols {
            if next == n {
                break 'outer;
            }
            let id = next;
            next += 1;
            row_ids[c] = id;
            if let Some(p) = prev {
                edges.push((p.min(id), p.max(id)));
            }
            if let Some(&(_, b)) = pending.iter().find(|(col, _)| *col == c) {
                edges.push((b.min(id), b.max(id)));
            }
            prev = Some(id);
        }
        pending.clear();
        let bridge_cols: Vec<usize> = if row.is_multiple_of(2) {
            (0..w).step_by(4).collect()
        } else {
            (2..w).step_by(4).collect()
        };
        for c in bridge_cols {
            if next == n {
                break 'outer;
            }
            let id = next;
            next += 1;
            edges.push((row_ids[c], id));
            pending.push((c, id));
        }
        row += 1;
    }
    edges.sort_unstable();
    Ok(edges)
}

/// Minimum energy of `H_f` and every bitstring attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub energy: f64,
    /// Minimizing bitstrings, qubit 0 first, in increasing index order.
    pub states: Vec<String>,
}

impl GroundTruth {
    pub fn indices(&self) -> Result<Vec<u64>> {
        self.states.iter().map(|s| bitstring_to_index(s)).collect()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Exhaustive minimization of `H_f` over all `2^n` bitstrings.
///
/// Walks the reflected Gray code so each step flips one spin and updates the
/// energy from cached local fields in O(degree). Candidates within a small
/// relative band of the running minimum are re-evaluated directly at the end,
/// which keeps exact degeneracies (e.g. the global flip symmetry at zero
/// field) intact despite accumulated rounding.
pub fn exact_ground_state(inst: &SpinGlassInstance) -> Result<GroundTruth> {
    let n = inst.n();
    if n > MAX_EXACT_SPINS {
        return Err(Error::TooLarge {
            what: "exhaustive ground-state search",
            limit: MAX_EXACT_SPINS,
            n,
        });
    }
    let adj = inst.neighbors();
    let scale = 1.0
        + inst.h().iter().map(|x| x.abs()).sum::<f64>()
        + inst.couplings().iter().map(|c| c.value.abs()).sum::<f64>();
    let band = 1e-9 * scale;

    // All spins +1 (index 0).
    let mut spins = vec![1.0f64; n];
    let mut local: Vec<f64> = (0..n)
        .map(|q| inst.h()[q] + adj[q].iter().map(|&(_, j)| j).sum::<f64>())
        .collect();
    let mut e = inst.energy_of_index(0);
    let mut index: u64 = 0;

    let mut best = e;
    let mut candidates: Vec<(u64, f64)> = vec![(0, e)];

    let total: u64 = 1u64 << n;
    for k in 1..total {
        let bit = k.trailing_zeros() as usize;
        let q = n - 1 - bit;
        let s = spins[q];
        e -= 2.0 * s * local[q];
        spins[q] = -s;
        for &(p, j) in &adj[q] {
            local[p] -= 2.0 * j * s;
        }
        index ^= 1u64 << bit;

        if e < best - band {
            best = e;
            candidates.retain(|&(_, ce)| ce <= best + band);
            candidates.push((index, e));
        } else if e <= best + band {
            if e < best {
                best = e;
            }
            candidates.push((index, e));
        }
    }

    let exact: Vec<(u64, f64)> = candidates
        .into_iter()
        .map(|(idx, _)| (idx, inst.energy_of_index(idx)))
        .collect();
    let emin = exact.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * scale;
    let mut states: Vec<u64> = exact
        .into_iter()
        .filter(|&(_, e)| e <= emin + tie)
        .map(|(idx, _)| idx)
        .collect();
    states.sort_unstable();
    states.dedup();
    Ok(GroundTruth {
        energy: emin,
        states: states.into_iter().map(|idx| index_to_bitstring(idx, n)).collect(),
    })
}

/// Weighted maximum independent set problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WmisInstance {
    pub vertex_count: usize,
    pub weights: Vec<f64>,
    /// Unordered edges stored as `(min, max)`, sorted and deduplicated.
    pub edges: Vec<(usize, usize)>,
}

impl WmisInstance {
    pub fn new(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self> {
        let vertex_count = weights.len();
        if vertex_count == 0 {
            return Err(Error::InvalidInstance("WMIS needs at least one vertex".into()));
        }
        if let Some(v) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInstance(format!(
                "weight of vertex {v} must be positive and finite"
            )));
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self {
            vertex_count,
            weights,
            edges: set.into_iter().collect(),
        })
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Penalty used when none is given: max weight + 1.
    pub fn default_penalty(&self) -> f64 {
        self.max_weight() + 1.0
    }

    /// Total weight of the selected vertices, or `None` if the selection
    /// violates an edge.
    pub fn independent_weight(&self, selected: &[bool]) -> Option<f64> {
        if self.edges.iter().any(|&(u, v)| selected[u] && selected[v]) {
            return None;
        }
        Some(
            selected
                .iter()
                .zip(&self.weights)
                .filter(|(s, _)| **s)
                .map(|(_, w)| w)
                .sum(),
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let raw: WmisInstance = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::new(raw.weights, &raw.edges)
    }
}

/// Random WMIS graph: each pair is an edge with probability `edge_probability`
/// (pairs in lexicographic order), then weights uniform in
/// `[weight_min, weight_max)`.
pub fn random_wmis(
    vertex_count: usize,
    edge_probability: f64,
    weight_min: f64,
    weight_max: f64,
    seed: u64,
) -> Result<WmisInstance> {
    if !(0.0..=1.0).contains(&edge_probability) {
        return Err(Error::InvalidArgument("edge probability must lie in [0, 1]".into()));
    }
    if !(weight_min > 0.0 && weight_max >= weight_min) {
        return Err(Error::InvalidArgument("weight range must be positive".into()));
    }
    let mut rng = PinnedRng::new(seed);
    let mut edges = Vec::new();
    for u in 0..vertex_count {
        for v in u + 1..vertex_count {
            if rng.uniform() < edge_probability {
                edges.push((u, v));
            }
        }
    }
    let weights = (0..vertex_count)
        .map(|_| rng.uniform_range(weight_min, weight_max))
        .collect();
    WmisInstance::new(weights, &edges)
}

/// Encodes WMIS as an Ising instance with `x_v = (1 - s_v)/2` (bit 1 means
/// the vertex is selected). The objective
/// `-Σ w_v x_v + penalty Σ_{(u,v)∈E} x_u x_v` is expanded into `h`, `J` and a
/// constant offset, so `energy + offset` equals the objective.
pub fn wmis_to_ising(w: &WmisInstance, penalty: f64) -> Result<SpinGlassInstance> {
    if !(penalty.is_finite() && penalty > w.max_weight()) {
        return Err(Error::InvalidArgument(format!(
            "penalty {penalty} must exceed the maximum vertex weight {}",
            w.max_weight()
        )));
    }
    let mut h = vec![0.0; w.vertex_count];
    let mut offset = 0.0;
    for (v, &wv) in w.weights.iter().enumerate() {
        h[v] += wv / 2.0;
        offset -= wv / 2.0;
    }
    let quarter = penalty / 4.0;
    let mut triples = Vec::with_capacity(w.edges.len());
    for &(u, v) in &w.edges {
        triples.push((u, v, quarter));
        h[u] -= quarter;
        h[v] -= quarter;
        offset += quarter;
    }
    Ok(SpinGlassInstance::from_triples(h, &triples, Topology::Custom)?.with_offset(offset))
}

/// Vertex selection encoded by a bitstring (bit 1 = selected).
pub fn decode_wmis(bits: &str) -> Result<Vec<bool>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidArgument(format!("invalid bit character '{other}'"))),
        })
        .collect()
}
