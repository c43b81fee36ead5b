//! Annealing schedule and the first-order counterdiabatic coefficient.
//!
//! The adiabatic Hamiltonian is
//! `H_ad(λ) = (1 − λ) Σ_i [hx_i σ^x_i − hb_i σ^z_i] + λ H_f`, and the
//! first-order gauge potential is `A = i α₁ O₁` with `O₁ = [H_ad, ∂_λ H_ad]`.
//! Minimizing the action gives `α₁ = −Γ₁/Γ₂` with `Γ_k = ‖O_k‖²`, which for
//! this Hamiltonian reduces to a ratio of a constant and a quadratic in λ:
//!
//! `α₁(λ) = −A / (B(1−λ)² + Cλ(1−λ) + Dλ²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::instances::SpinGlassInstance;

/// `λ(t) = sin²[(π/2) sin²(πt / 2T)]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time: f64,
}

impl Schedule {
    pub fn new(total_time: f64) -> Result<Self> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        Ok(Self { total_time })
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(0.0..=self.total_time).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                total: self.total_time,
            });
        }
        Ok(())
    }

    pub fn lambda(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let inner = (PI * t / (2.0 * self.total_time)).sin().powi(2);
        Ok((0.5 * PI * inner).sin().powi(2))
    }

    pub fn lambda_dot(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let total = self.total_time;
        let u = PI * t / (2.0 * total);
        let v = 0.5 * PI * u.sin().powi(2);
        Ok(PI * PI / total * v.sin() * v.cos() * u.sin() * u.cos())
    }
}

/// Coefficients of the closed-form `α₁(λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdPolynomial {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl CdPolynomial {
    pub fn denominator(&self, lambda: f64) -> f64 {
        let mu = 1.0 - lambda;
        self.b * mu * mu + self.c * lambda * mu + self.d * lambda * lambda
    }

    /// `α₁(λ)`. When `A = 0` the first commutator vanishes identically and
    /// the coefficient is 0. Otherwise a non-positive denominator is reported
    /// as degenerate.
    pub fn alpha1(&self, lambda: f64) -> Result<f64> {
        if self.a == 0.0 {
            return Ok(0.0);
        }
        let den = self.denominator(lambda);
        if den.is_nan() || den <= 0.0 {
            return Err(Error::DegenerateCd { lambda });
        }
        Ok(-self.a / den)
    }
}

fn check_len(what: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension {
            what,
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

/// Closed-form `A, B, C, D` for the instance with transverse fields `hx` and
/// bias fields `hb`.
///
/// The expansion of `Γ₂` is written for an initial Hamiltonian with `+b σ^z`;
/// ours carries `−hb σ^z`, so `b = −hb` enters the only odd term, `C`. Sums
/// over `i ≠ j` run over ordered pairs. The three-spin term of `D` uses
/// `Σ_{j<k} J_ij² J_ik² = ((Σ_j J_ij²)² − Σ_j J_ij⁴) / 2` per center spin.
/// Normalized trace (`Tr/2^n`) is implied; the ratio is unaffected.
pub fn cd_polynomial(inst: &SpinGlassInstance, hx: &[f64], hb: &[f64]) -> Result<CdPolynomial> {
    let n = inst.n();
    check_len("transverse field hx", hx, n)?;
    check_len("bias field hb", hb, n)?;
    let z = inst.h();
    let adj = inst.neighbors();

    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let x2 = hx[i] * hx[i];
        let x4 = x2 * x2;
        let zi = z[i];
        let z2 = zi * zi;
        let bi = -hb[i];

        // single-site terms
        a += 4.0 * x2 * z2;
        b += 16.0 * x4 * z2 + 16.0 * bi * bi * x2 * z2;
        c += 32.0 * bi * x2 * z2 * zi;
        d += 16.0 * z2 * z2 * x2;

        // ordered pairs (i, j), j != i
        let mut s2 = 0.0;
        let mut s4 = 0.0;
        for &(j, jij) in &adj[i] {
            let j2 = jij * jij;
            let xj2 = hx[j] * hx[j];
            s2 += j2;
            s4 += j2 * j2;
            a += 4.0 * x2 * j2;
            b += 48.0 * x2 * xj2 * j2 + 16.0 * x4 * j2 + 16.0 * j2 * x2 * bi * bi;
            c += 96.0 * bi * zi * x2 * j2;
            d += 96.0 * x2 * z2 * j2 + 16.0 * j2 * j2 * x2;
        }
        // three-spin terms centered on i
        d += 96.0 * x2 * 0.5 * (s2 * s2 - s4);
    }
    Ok(CdPolynomial { a, b, c, d })
}

/// `Γ₁`, `Γ₂` from dense nested commutators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gammas {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Gammas {
    pub fn alpha1(&self) -> f64 {
        -self.gamma1 / self.gamma2
    }
}

/// Largest system accepted by [`gamma_oracle`].
pub const MAX_ORACLE_SPINS: usize = 8;

/// Builds `H_ad(λ)` densely, forms `O₁ = [H_ad, ∂_λ H_ad]`,
/// `O₂ = [H_ad, O₁]` and returns `Γ_k = Tr(O_k† O_k)`. With `normalized`
/// the traces are divided by `2^n`.
pub fn gamma_oracle(
    inst: &SpinGlassInstance,
    hx: &[f64],
    hb: &[f64],
    lambda: f64,
    normalized: bool,
) -> Result<Gammas> {
    let n = inst.n();
    if n > MAX_ORACLE_SPINS {
        return Err(Error::TooLarge {
            what: "dense commutator oracle",
            limit: MAX_ORACLE_SPINS,
            n,
        });
    }
    check_len("transverse field hx", hx, n)?;
    check_len("bias field hb", hb, n)?;
    let hi = dense::initial_hamiltonian(n, hx, hb);
    let hf = dense::problem_hamiltonian(inst);
    let had = &hi * Complex64::new(1.0 - lambda, 0.0) + &hf * Complex64::new(lambda, 0.0);
    let dh = &hf - &hi;
    let o1 = dense::commutator(&had, &dh);
    let o2 = dense::commutator(&had, &o1);
    let norm = if normalized {
        (1u64 << n) as f64
    } else {
        1.0
    };
    Ok(Gammas {
        gamma1: dense::frobenius_sq(&o1) / norm,
        gamma2: dense::frobenius_sq(&o2) / norm,
    })
}
