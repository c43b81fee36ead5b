//! Gate-level circuit representation, native decompositions, angle pruning
//! and nearest-neighbor layering.
//!
//! Rotations follow `R_P(θ) = exp(−i θ/2 · P)` for a Pauli word `P`. For two
//! qubit gates the first listed qubit is the left tensor factor, so
//! `RYZ(θ)` on `(a, b)` is `exp(−i θ/2 · Y_a Z_b)`.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    RZZ,
    RYZ,
    RZY,
    GPI,
    GPI2,
    ZZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::GPI | GateKind::GPI2 => 1,
            GateKind::RZZ | GateKind::RYZ | GateKind::RZY | GateKind::ZZ => 2,
        }
    }

    /// Whether the angle is a rotation magnitude (prunable). GPI/GPI2 carry
    /// a phase instead and are never pruned.
    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::GPI | GateKind::GPI2)
    }

    /// Pauli generator per qubit for rotation gates.
    fn generator(self) -> Option<&'static [char]> {
        match self {
            GateKind::RX => Some(&['X']),
            GateKind::RY => Some(&['Y']),
            GateKind::RZ => Some(&['Z']),
            GateKind::RZZ | GateKind::ZZ => Some(&['Z', 'Z']),
            GateKind::RYZ => Some(&['Y', 'Z']),
            GateKind::RZY => Some(&['Z', 'Y']),
            GateKind::GPI | GateKind::GPI2 => None,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: f64,
}

impl Gate {
    pub fn one(kind: GateKind, q: usize, angle: f64) -> Self {
        Self {
            kind,
            qubits: vec![q],
            angle,
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize, angle: f64) -> Self {
        Self {
            kind,
            qubits: vec![a, b],
            angle,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} expects {} qubit(s), got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        if let Some(&q) = self.qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidGate(format!(
                "{} acts on qubit {q} but the circuit has {n_qubits}",
                self.kind
            )));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{} acts twice on qubit {}",
                self.kind, self.qubits[0]
            )));
        }
        if !self.angle.is_finite() {
            return Err(Error::InvalidGate(format!("{} has a non-finite angle", self.kind)));
        }
        Ok(())
    }

    /// Whether two gates can be swapped without changing the product.
    pub fn commutes_with(&self, other: &Gate) -> bool {
        let shared = self.qubits.iter().any(|q| other.qubits.contains(q));
        if !shared {
            return true;
        }
        let (Some(ga), Some(gb)) = (self.kind.generator(), other.kind.generator()) else {
            return false;
        };
        // Pauli words commute iff they differ (both non-identity) on an even
        // number of qubits.
        let mut differing = 0;
        for (qa, pa) in self.qubits.iter().zip(ga) {
            if let Some(pos) = other.qubits.iter().position(|q| q == qa) {
                if gb[pos] != *pa {
                    differing += 1;
                }
            }
        }
        differing % 2 == 0
    }
}

/// Ordered gate list; the first gate acts first on the state.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    layers: Option<Vec<usize>>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            layers: None,
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        self.layers = None;
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Layer index of each gate, if the circuit has been layered.
    pub fn layers(&self) -> Option<&[usize]> {
        self.layers.as_deref()
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            n_qubits: self.n_qubits,
            gates: self.gates.clone(),
            layers: self.layers.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CircuitFile = serde_json::from_str(text)?;
        let mut c = Circuit::from_gates(file.n_qubits, file.gates)?;
        if let Some(layers) = file.layers {
            if layers.len() != c.len() {
                return Err(Error::Dimension {
                    what: "layer annotations",
                    expected: c.len(),
                    got: layers.len(),
                });
            }
            c.layers = Some(layers);
        }
        Ok(c)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// JSON layout used by `--dump-circuit`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Vec<usize>>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Row-major 2×2 or 4×4 matrix of a gate. For two-qubit gates the basis is
/// `|q0 q1⟩` with the first listed qubit as the high bit.
pub fn unitary_of(g: &Gate) -> Vec<Complex64> {
    let half = g.angle / 2.0;
    let (cs, sn) = (half.cos(), half.sin());
    let e_minus = Complex64::from_polar(1.0, -half);
    let e_plus = Complex64::from_polar(1.0, half);
    let zero = c(0.0, 0.0);
    match g.kind {
        GateKind::RX => vec![c(cs, 0.0), c(0.0, -sn), c(0.0, -sn), c(cs, 0.0)],
        GateKind::RY => vec![c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0)],
        GateKind::RZ => vec![e_minus, zero, zero, e_plus],
        GateKind::GPI => {
            let phi = g.angle;
            vec![zero, Complex64::from_polar(1.0, -phi), Complex64::from_polar(1.0, phi), zero]
        }
        GateKind::GPI2 => {
            let phi = g.angle;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let minus_i = c(0.0, -1.0);
            vec![
                c(r, 0.0),
                minus_i * Complex64::from_polar(r, -phi),
                minus_i * Complex64::from_polar(r, phi),
                c(r, 0.0),
            ]
        }
        GateKind::RZZ | GateKind::ZZ => {
            let mut m = vec![zero; 16];
            m[0] = e_minus;
            m[5] = e_plus;
            m[10] = e_plus;
            m[15] = e_minus;
            m
        }
        GateKind::RYZ | GateKind::RZY => {
            // cos(θ/2) I − i sin(θ/2) P with P = Y⊗Z or Z⊗Y
            let y = [zero, c(0.0, -1.0), c(0.0, 1.0), zero];
            let z = [c(1.0, 0.0), zero, zero, c(-1.0, 0.0)];
            let (left, right) = if g.kind == GateKind::RYZ { (y, z) } else { (z, y) };
            let mut m = vec![zero; 16];
            for r0 in 0..2 {
                for r1 in 0..2 {
                    for c0 in 0..2 {
                        for c1 in 0..2 {
                            let p = left[r0 * 2 + c0] * right[r1 * 2 + c1];
                            let id = if r0 == c0 && r1 == c1 { cs } else { 0.0 };
                            m[(r0 * 2 + r1) * 4 + (c0 * 2 + c1)] = c(id, 0.0) + c(0.0, -sn) * p;
                        }
                    }
                }
            }
            m
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// {RX, RY, RZ, RZZ}
    #[serde(rename = "generic")]
    Generic,
    /// {GPI, GPI2, ZZ}
    #[serde(rename = "ionq")]
    IonQ,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Generic => "generic",
            Target::IonQ => "ionq",
        })
    }
}

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

/// Rewrites a circuit into the gate set of `target`. Sequences are listed in
/// execution order. The result equals the input up to a global phase.
///
/// * generic: `RZY(θ)` on `(a, b)` becomes `RX(π/2)_b, RZZ(θ), RX(−π/2)_b`;
///   `RYZ` conjugates qubit `a` instead. RX, RY, RZ, RZZ pass through.
/// * ionq: `RY(θ)` becomes `GPI2(π), GPI(θ/2), GPI2(π)`; `RX(θ)` becomes
///   `GPI2(3π/2), GPI(π/2 − θ/2), GPI2(3π/2)`; `RZY`/`RYZ` conjugate
///   `ZZ(θ)` with `GPI2(0)` before and `GPI2(π)` after. RZ has no native
///   form here and is rejected.
pub fn decompose_native(c: &Circuit, target: Target) -> Result<Circuit> {
    let mut out = Circuit::new(c.n_qubits());
    let unsupported = |kind: GateKind| Error::UnsupportedGate {
        kind: kind.to_string(),
        target: target.to_string(),
    };
    for g in c.gates() {
        let q = &g.qubits;
        let theta = g.angle;
        match (target, g.kind) {
            (Target::Generic, GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ) => {
                out.push(g.clone())?
            }
            (Target::Generic, GateKind::ZZ) => out.push(Gate::two(GateKind::RZZ, q[0], q[1], theta))?,
            (Target::Generic, GateKind::RZY | GateKind::RYZ) => {
                let conj = if g.kind == GateKind::RZY { q[1] } else { q[0] };
                out.push(Gate::one(GateKind::RX, conj, HALF_PI))?;
                out.push(Gate::two(GateKind::RZZ, q[0], q[1], theta))?;
                out.push(Gate::one(GateKind::RX, conj, -HALF_PI))?;
            }
            (Target::IonQ, GateKind::GPI | GateKind::GPI2 | GateKind::ZZ) => out.push(g.clone())?,
            (Target::IonQ, GateKind::RZZ) => out.push(Gate::two(GateKind::ZZ, q[0], q[1], theta))?,
            (Target::IonQ, GateKind::RY) => {
                out.push(Gate::one(GateKind::GPI2, q[0], PI))?;
                out.push(Gate::one(GateKind::GPI, q[0], theta / 2.0))?;
                out.push(Gate::one(GateKind::GPI2, q[0], PI))?;
            }
            (Target::IonQ, GateKind::RX) => {
                // The RY sequence with every phase advanced by π/2 rotates
                // about −X; negating the GPI phase offset gives RX(θ).
                out.push(Gate::one(GateKind::GPI2, q[0], 3.0 * HALF_PI))?;
                out.push(Gate::one(GateKind::GPI, q[0], HALF_PI - theta / 2.0))?;
                out.push(Gate::one(GateKind::GPI2, q[0], 3.0 * HALF_PI))?;
            }
            (Target::IonQ, GateKind::RZY | GateKind::RYZ) => {
                let conj = if g.kind == GateKind::RZY { q[1] } else { q[0] };
                out.push(Gate::one(GateKind::GPI2, conj, 0.0))?;
                out.push(Gate::two(GateKind::ZZ, q[0], q[1], theta))?;
                out.push(Gate::one(GateKind::GPI2, conj, PI))?;
            }
            (_, kind) => return Err(unsupported(kind)),
        }
    }
    Ok(out)
}

/// Drops every rotation whose angle magnitude is below `theta_cutoff`,
/// keeping the order of the survivors.
pub fn prune(c: &Circuit, theta_cutoff: f64) -> Circuit {
    let gates = c
        .gates()
        .iter()
        .filter(|g| !g.kind.is_rotation() || g.angle.abs() >= theta_cutoff)
        .cloned()
        .collect();
    Circuit {
        n_qubits: c.n_qubits(),
        gates,
        layers: None,
    }
}

/// Groups gates into layers of disjoint qubits where every two-qubit layer
/// holds only `(k, k+1)` pairs of one parity of `k`. A gate may move ahead of
/// an earlier gate on a shared qubit only if the two commute, so the
/// circuit's unitary is unchanged. Gates are returned sorted by layer.
pub fn layer_nearest_neighbor(c: &Circuit) -> Result<Circuit> {
    struct Layer {
        busy: Vec<bool>,
        parity: Option<usize>,
    }
    let n = c.n_qubits();
    let mut layers: Vec<Layer> = Vec::new();
    let mut assigned: Vec<usize> = Vec::with_capacity(c.len());

    for (idx, g) in c.gates().iter().enumerate() {
        let parity = if g.qubits.len() == 2 {
            let (a, b) = (g.qubits[0].min(g.qubits[1]), g.qubits[0].max(g.qubits[1]));
            if b != a + 1 {
                return Err(Error::InvalidGate(format!(
                    "{} on ({}, {}) is not a nearest-neighbor chain pair",
                    g.kind, g.qubits[0], g.qubits[1]
                )));
            }
            Some(a % 2)
        } else {
            None
        };
        let lower = c.gates()[..idx]
            .iter()
            .zip(&assigned)
            .filter(|(prev, _)| !prev.commutes_with(g))
            .map(|(_, &l)| l + 1)
            .max()
            .unwrap_or(0);
        let mut l = lower;
        loop {
            if l == layers.len() {
                layers.push(Layer {
                    busy: vec![false; n],
                    parity: None,
                });
            }
            let layer = &layers[l];
            let free = g.qubits.iter().all(|&q| !layer.busy[q]);
            let parity_ok = match (parity, layer.parity) {
                (Some(p), Some(lp)) => p == lp,
                _ => true,
            };
            if free && parity_ok {
                break;
            }
            l += 1;
        }
        let layer = &mut layers[l];
        for &q in &g.qubits {
            layer.busy[q] = true;
        }
        if parity.is_some() {
            layer.parity = parity;
        }
        assigned.push(l);
    }

    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by_key(|&i| (assigned[i], i));
    Ok(Circuit {
        n_qubits: n,
        gates: order.iter().map(|&i| c.gates()[i].clone()).collect(),
        layers: Some(order.iter().map(|&i| assigned[i]).collect()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateStats {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

/// Gate counts by arity and as-soon-as-possible depth.
pub fn gate_stats(c: &Circuit) -> GateStats {
    let mut frontier = vec![0usize; c.n_qubits()];
    let mut stats = GateStats {
        one_qubit: 0,
        two_qubit: 0,
        depth: 0,
    };
    for g in c.gates() {
        if g.qubits.len() == 1 {
            stats.one_qubit += 1;
        } else {
            stats.two_qubit += 1;
        }
        let level = g.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            frontier[q] = level;
        }
        stats.depth = stats.depth.max(level);
    }
    stats
}
