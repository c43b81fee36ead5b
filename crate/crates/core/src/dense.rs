//! Dense `2^n × 2^n` operators for small systems. Used by verification
//! oracles, never by the production simulation path.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::instances::SpinGlassInstance;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Matrix of the Pauli word `Π_k P_k` acting on the listed qubits
/// (qubit 0 = most significant bit of the basis index).
pub fn pauli_word(n: usize, word: &[(usize, Pauli)]) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = col;
        let mut phase = Complex64::new(1.0, 0.0);
        for &(q, p) in word {
            let shift = n - 1 - q;
            let bit = (row >> shift) & 1;
            match p {
                Pauli::X => row ^= 1 << shift,
                Pauli::Y => {
                    // Y|0> = i|1>, Y|1> = -i|0>
                    phase *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                    row ^= 1 << shift;
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        m[(row, col)] += phase;
    }
    m
}

/// `H_f` of the instance as a dense diagonal matrix.
pub fn problem_hamiltonian(inst: &SpinGlassInstance) -> CMatrix {
    let dim = 1usize << inst.n();
    let mut m = CMatrix::zeros(dim, dim);
    for z in 0..dim {
        m[(z, z)] = Complex64::new(inst.energy_of_index(z as u64), 0.0);
    }
    m
}

/// `Σ_i [hx_i σ^x_i − hb_i σ^z_i]`.
pub fn initial_hamiltonian(n: usize, hx: &[f64], hb: &[f64]) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for q in 0..n {
        if hx[q] != 0.0 {
            m += pauli_word(n, &[(q, Pauli::X)]) * Complex64::new(hx[q], 0.0);
        }
        if hb[q] != 0.0 {
            m -= pauli_word(n, &[(q, Pauli::Z)]) * Complex64::new(hb[q], 0.0);
        }
    }
    m
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `Tr(A† A)`.
pub fn frobenius_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Kronecker product with `a` as the left (more significant) factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
