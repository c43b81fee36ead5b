//! Independent reference implementations shared by the integration tests.
//!
//! Everything here is built from dense matrices and Pauli words, without
//! going through the statevector kernels, `unitary_of` or the builder's
//! angle formulas.

#![allow(dead_code)]

use bfdcqo_core::circuit::{Circuit, Gate, GateKind};
use bfdcqo_core::dense::{self, CMatrix, Pauli};
use bfdcqo_core::instances::SpinGlassInstance;
use bfdcqo_core::rng::PinnedRng;
use bfdcqo_core::schedule::{gamma_oracle, Schedule};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(1 << n, 1 << n)
}

/// `exp(−iθ/2 P) = cos(θ/2) I − i sin(θ/2) P` for a Pauli word `P`.
fn rotation(n: usize, word: &[(usize, Pauli)], theta: f64) -> CMatrix {
    let p = dense::pauli_word(n, word);
    identity(n) * c((theta / 2.0).cos(), 0.0) + p * c(0.0, -(theta / 2.0).sin())
}

/// Full `2^n × 2^n` matrix of a gate.
pub fn gate_matrix(n: usize, g: &Gate) -> CMatrix {
    let q = &g.qubits;
    let t = g.angle;
    match g.kind {
        GateKind::RX => rotation(n, &[(q[0], Pauli::X)], t),
        GateKind::RY => rotation(n, &[(q[0], Pauli::Y)], t),
        GateKind::RZ => rotation(n, &[(q[0], Pauli::Z)], t),
        GateKind::RZZ | GateKind::ZZ => rotation(n, &[(q[0], Pauli::Z), (q[1], Pauli::Z)], t),
        GateKind::RYZ => rotation(n, &[(q[0], Pauli::Y), (q[1], Pauli::Z)], t),
        GateKind::RZY => rotation(n, &[(q[0], Pauli::Z), (q[1], Pauli::Y)], t),
        GateKind::GPI => {
            dense::pauli_word(n, &[(q[0], Pauli::X)]) * c(t.cos(), 0.0)
                + dense::pauli_word(n, &[(q[0], Pauli::Y)]) * c(t.sin(), 0.0)
        }
        GateKind::GPI2 => {
            let axis = dense::pauli_word(n, &[(q[0], Pauli::X)]) * c(t.cos(), 0.0)
                + dense::pauli_word(n, &[(q[0], Pauli::Y)]) * c(t.sin(), 0.0);
            (identity(n) - axis * c(0.0, 1.0)) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
        }
    }
}

/// Product of all gate matrices, first gate rightmost.
pub fn circuit_unitary(c: &Circuit) -> CMatrix {
    let n = c.n_qubits();
    c.gates().iter().fold(identity(n), |u, g| gate_matrix(n, g) * u)
}

/// Final state from `|0…0⟩` by dense matrix-vector products.
pub fn evolve(circuit: &Circuit) -> Vec<Complex64> {
    let n = circuit.n_qubits();
    let mut psi = nalgebra::DVector::from_element(1 << n, c0());
    psi[0] = c(1.0, 0.0);
    for g in circuit.gates() {
        psi = gate_matrix(n, g) * psi;
    }
    psi.iter().copied().collect()
}

fn c0() -> Complex64 {
    c(0.0, 0.0)
}

/// Largest `|a_k − e^{iφ} b_k|` with `φ` aligning the two vectors.
pub fn distance_up_to_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c(1.0, 0.0)
    };
    a.iter().zip(b).map(|(x, y)| (x - y * phase).norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `min_φ ‖A − e^{iφ} B‖_max` for equally sized matrices.
pub fn matrix_distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let av: Vec<Complex64> = a.iter().copied().collect();
    let bv: Vec<Complex64> = b.iter().copied().collect();
    distance_up_to_phase(&av, &bv)
}

/// Energy from explicit spin products over the full coupling matrix, with
/// bit `b` mapped to `s = 1 − 2b`.
pub fn brute_energy(inst: &SpinGlassInstance, bits: &[u8]) -> f64 {
    let s: Vec<f64> = bits.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
    let jm = inst.coupling_matrix();
    let mut e = 0.0;
    for i in 0..s.len() {
        e += inst.h()[i] * s[i];
        for j in (i + 1)..s.len() {
            e += jm[i][j] * s[i] * s[j];
        }
    }
    e
}

/// Best total weight of an independent set by subset enumeration.
pub fn brute_wmis(weights: &[f64], edges: &[(usize, usize)]) -> f64 {
    let n = weights.len();
    let mut best = 0.0;
    for mask in 0u32..(1 << n) {
        if edges.iter().any(|&(u, v)| mask >> u & 1 == 1 && mask >> v & 1 == 1) {
            continue;
        }
        let w: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
        if w > best {
            best = w;
        }
    }
    best
}

/// Random circuit over every gate kind the simulator accepts.
pub fn random_circuit(rng: &mut PinnedRng, n: usize, n_gates: usize) -> Circuit {
    let kinds = [
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::GPI,
        GateKind::GPI2,
        GateKind::RZZ,
        GateKind::ZZ,
        GateKind::RYZ,
        GateKind::RZY,
    ];
    let mut gates = Vec::with_capacity(n_gates);
    while gates.len() < n_gates {
        let kind = kinds[rng.below(kinds.len() as u64) as usize];
        let angle = rng.uniform_range(-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI);
        let a = rng.below(n as u64) as usize;
        if kind.arity() == 1 {
            gates.push(Gate::one(kind, a, angle));
        } else if n > 1 {
            let mut b = rng.below(n as u64 - 1) as usize;
            if b >= a {
                b += 1;
            }
            gates.push(Gate::two(kind, a, b, angle));
        }
    }
    Circuit::from_gates(n, gates).unwrap()
}

/// Ground eigenvector of the 2×2 matrix `hx σ^x − hb σ^z` by direct
/// diagonalization (nalgebra symmetric eigensolver).
pub fn single_qubit_ground(hx: f64, hb: f64) -> (f64, [f64; 2]) {
    let m = nalgebra::Matrix2::new(-hb, hx, hx, hb);
    let eig = m.symmetric_eigen();
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let v = eig.eigenvectors.column(k);
    (eig.eigenvalues[k], [v[0], v[1]])
}

/// Product state of the per-qubit ground vectors (qubit 0 most significant).
pub fn product_ground_state(hx: &[f64], hb: &[f64]) -> Vec<Complex64> {
    let mut psi = vec![c(1.0, 0.0)];
    for (&x, &b) in hx.iter().zip(hb) {
        let (_, v) = single_qubit_ground(x, b);
        let mut next = Vec::with_capacity(psi.len() * 2);
        for a in &psi {
            next.push(a * v[0]);
            next.push(a * v[1]);
        }
        psi = next;
    }
    psi
}

/// Time-dependent Hamiltonian `(1−λ)H_i + λH_f + λ̇ A` with the first-order
/// gauge potential `A = i α₁ [H_ad, ∂_λ H_ad]`, `α₁ = −Γ₁/Γ₂` from dense
/// nested commutators. `with_cd = false` drops `A`.
pub struct CdHamiltonian {
    inst: SpinGlassInstance,
    hx: Vec<f64>,
    hb: Vec<f64>,
    hi: CMatrix,
    hf: CMatrix,
    schedule: Schedule,
    with_cd: bool,
}

impl CdHamiltonian {
    pub fn new(inst: &SpinGlassInstance, hx: &[f64], hb: &[f64], total_time: f64, with_cd: bool) -> Self {
        Self {
            inst: inst.clone(),
            hx: hx.to_vec(),
            hb: hb.to_vec(),
            hi: dense::initial_hamiltonian(inst.n(), hx, hb),
            hf: dense::problem_hamiltonian(inst),
            schedule: Schedule::new(total_time).unwrap(),
            with_cd,
        }
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let lam = self.schedule.lambda(t).unwrap();
        let had = &self.hi * c(1.0 - lam, 0.0) + &self.hf * c(lam, 0.0);
        if !self.with_cd {
            return had;
        }
        let lam_dot = self.schedule.lambda_dot(t).unwrap();
        let g = gamma_oracle(&self.inst, &self.hx, &self.hb, lam, true).unwrap();
        let alpha = if g.gamma1 == 0.0 { 0.0 } else { g.alpha1() };
        let o1 = dense::commutator(&had, &(&self.hf - &self.hi));
        had + o1 * c(0.0, alpha * lam_dot)
    }
}

/// Classical RK4 for `i dψ/dt = H(t) ψ` from `t0` to `t1`.
pub fn rk4(h: &CdHamiltonian, psi0: &[Complex64], t0: f64, t1: f64, steps: usize) -> Vec<Complex64> {
    let mut psi = nalgebra::DVector::from_vec(psi0.to_vec());
    let dt = (t1 - t0) / steps as f64;
    let mi = c(0.0, -1.0);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let hm = h.at(t);
        let hh = h.at(t + dt / 2.0);
        let he = h.at((t + dt).min(t1));
        let k1 = &hm * &psi * mi;
        let k2 = &hh * (&psi + &k1 * c(dt / 2.0, 0.0)) * mi;
        let k3 = &hh * (&psi + &k2 * c(dt / 2.0, 0.0)) * mi;
        let k4 = &he * (&psi + &k3 * c(dt, 0.0)) * mi;
        psi += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
    }
    psi.iter().copied().collect()
}
