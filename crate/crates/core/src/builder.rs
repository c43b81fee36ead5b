//! Circuit construction: initial-state preparation, Trotterized
//! counterdiabatic / adiabatic evolution, and QAOA.
//!
//! The evolved Hamiltonian is
//!
//! `H(t) = (1 − λ) Σ_i [hx_i σ^x_i − hb_i σ^z_i] + λ H_f + λ̇ A`
//!
//! with `A = 2α₁ [Σ_i hx_i h_i σ^y_i + Σ_{i<j} J_ij (hx_i σ^y_i σ^z_j + hx_j σ^z_i σ^y_j)]`.
//! Step `k = 1..n_trot` evaluates every coefficient at `t_k = k·dt`, and a term
//! `c·P` becomes the rotation `R_P(2·c·dt)`.

use serde::{Deserialize, Serialize};

use crate::circuit::{prune, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::instances::SpinGlassInstance;
use crate::schedule::{cd_polynomial, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdMode {
    /// Counterdiabatic terms only.
    Impulse,
    /// Adiabatic plus counterdiabatic terms.
    Full,
    /// Adiabatic terms only (digitized annealing baseline).
    Adiabatic,
}

impl std::str::FromStr for CdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "impulse" => Ok(CdMode::Impulse),
            "full" => Ok(CdMode::Full),
            "adiabatic" => Ok(CdMode::Adiabatic),
            other => Err(Error::InvalidArgument(format!("unknown cd mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    /// Total schedule time `T`; enters only through `λ(t)` and `λ̇(t)`.
    /// `None` means `n_trot·dt`, so the last step lands on `λ = 1`.
    pub total_time: Option<f64>,
    pub dt: f64,
    pub n_trot: usize,
    /// Transverse fields; `None` means all −1.
    pub hx: Option<Vec<f64>>,
    pub cd_mode: CdMode,
    pub theta_cutoff: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            total_time: None,
            dt: 0.1,
            n_trot: 3,
            hx: None,
            cd_mode: CdMode::Impulse,
            theta_cutoff: 0.0,
        }
    }
}

impl BuildConfig {
    pub fn hx_for(&self, n: usize) -> Result<Vec<f64>> {
        match &self.hx {
            None => Ok(vec![-1.0; n]),
            Some(v) if v.len() == n => Ok(v.clone()),
            Some(v) => Err(Error::Dimension {
                what: "transverse field hx",
                expected: n,
                got: v.len(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_trot == 0 {
            return Err(Error::InvalidArgument("n_trot must be at least 1".into()));
        }
        if !(self.theta_cutoff.is_finite() && self.theta_cutoff >= 0.0) {
            return Err(Error::InvalidArgument("theta_cutoff must be nonnegative".into()));
        }
        let total = self.total_time();
        Schedule::new(total)?;
        if self.n_trot as f64 * self.dt > total * (1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "n_trot * dt = {} exceeds T = {total}",
                self.n_trot as f64 * self.dt
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.total_time.unwrap_or(self.n_trot as f64 * self.dt)
    }

    /// Step times `t_k = k·dt`, clamped to `T` against rounding.
    pub fn step_times(&self) -> Vec<f64> {
        let total = self.total_time();
        (1..=self.n_trot)
            .map(|k| (k as f64 * self.dt).min(total))
            .collect()
    }
}

/// Longitudinal bias fields `hb_i ∈ [−1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasField(Vec<f64>);

impl BiasField {
    pub fn new(hb: Vec<f64>) -> Result<Self> {
        if let Some(i) = hb.iter().position(|v| !(v.is_finite() && v.abs() <= 1.0)) {
            return Err(Error::InvalidArgument(format!(
                "bias field entry {i} = {} is outside [-1, 1]",
                hb[i]
            )));
        }
        Ok(Self(hb))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// RY angles preparing the ground state of each `hx_i σ^x − hb_i σ^z`.
///
/// The eigenvector is taken from whichever row of the 2×2 eigen-equation is
/// better conditioned, normalized with `v₀ ≥ 0`, and `θ = 2·atan2(v₁, v₀)`.
pub fn initial_state_angles(hx: &[f64], hb: &[f64]) -> Result<Vec<f64>> {
    if hx.len() != hb.len() {
        return Err(Error::Dimension {
            what: "bias field hb",
            expected: hx.len(),
            got: hb.len(),
        });
    }
    hx.iter()
        .zip(hb)
        .enumerate()
        .map(|(i, (&x, &b))| {
            if x == 0.0 && b == 0.0 {
                return Err(Error::DegeneratePrep(i));
            }
            let lmin = -(b * b + x * x).sqrt();
            // rows of [[-b, x], [x, b]] v = lmin v
            let r1 = (x, b + lmin);
            let r2 = (lmin - b, x);
            let (mut v0, mut v1) = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) { r1 } else { r2 };
            let norm = v0.hypot(v1);
            v0 /= norm;
            v1 /= norm;
            if v0 < 0.0 || (v0 == 0.0 && v1 < 0.0) {
                v0 = -v0;
                v1 = -v1;
            }
            Ok(2.0 * v1.atan2(v0))
        })
        .collect()
}

/// Preparation layer followed by `n_trot` Trotter steps; only the Trotter
/// gates are subject to the angle cutoff.
pub fn build_dcqo_circuit(inst: &SpinGlassInstance, cfg: &BuildConfig, bias: &BiasField) -> Result<Circuit> {
    cfg.validate()?;
    let n = inst.n();
    let hx = cfg.hx_for(n)?;
    if bias.len() != n {
        return Err(Error::Dimension {
            what: "bias field hb",
            expected: n,
            got: bias.len(),
        });
    }
    let hb = bias.values();
    let schedule = Schedule::new(cfg.total_time())?;
    let with_cd = cfg.cd_mode != CdMode::Adiabatic;
    let with_adiabatic = cfg.cd_mode != CdMode::Impulse;
    let poly = if with_cd {
        Some(cd_polynomial(inst, &hx, hb)?)
    } else {
        None
    };
    let h = inst.h();

    let mut prep = Circuit::new(n);
    for (q, theta) in initial_state_angles(&hx, hb)?.into_iter().enumerate() {
        prep.push(Gate::one(GateKind::RY, q, theta))?;
    }

    let mut trotter = Circuit::new(n);
    let dt = cfg.dt;
    for t in cfg.step_times() {
        let lam = schedule.lambda(t)?;
        if with_adiabatic {
            for (q, x) in hx.iter().enumerate() {
                trotter.push(Gate::one(GateKind::RX, q, 2.0 * dt * (1.0 - lam) * x))?;
            }
            for q in 0..n {
                let coeff = lam * h[q] - (1.0 - lam) * hb[q];
                trotter.push(Gate::one(GateKind::RZ, q, 2.0 * dt * coeff))?;
            }
            for c in inst.couplings() {
                trotter.push(Gate::two(GateKind::RZZ, c.i, c.j, 2.0 * dt * lam * c.value))?;
            }
        }
        if let Some(poly) = &poly {
            // A = 0 means O₁ vanishes: no counterdiabatic drive at all.
            let alpha = poly.alpha1(lam)?;
            let drive = 2.0 * alpha * schedule.lambda_dot(t)?;
            for q in 0..n {
                trotter.push(Gate::one(GateKind::RY, q, 2.0 * dt * drive * hx[q] * h[q]))?;
            }
            for c in inst.couplings() {
                let base = 2.0 * dt * drive * c.value;
                trotter.push(Gate::two(GateKind::RYZ, c.i, c.j, base * hx[c.i]))?;
                trotter.push(Gate::two(GateKind::RZY, c.i, c.j, base * hx[c.j]))?;
            }
        }
    }

    let mut out = prep;
    for g in prune(&trotter, cfg.theta_cutoff).gates() {
        out.push(g.clone())?;
    }
    Ok(out)
}

/// Standard QAOA: `RY(π/2)` on every qubit, then for each layer the cost
/// unitary (`RZ(2γ h_i)`, `RZZ(2γ J_ij)`) and the mixer `RX(2β)`.
pub fn build_qaoa_circuit(inst: &SpinGlassInstance, gammas: &[f64], betas: &[f64]) -> Result<Circuit> {
    if gammas.len() != betas.len() || gammas.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "QAOA needs equal, nonzero numbers of gammas and betas (got {} and {})",
            gammas.len(),
            betas.len()
        )));
    }
    let n = inst.n();
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.push(Gate::one(GateKind::RY, q, std::f64::consts::FRAC_PI_2))?;
    }
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        for (q, &hq) in inst.h().iter().enumerate() {
            c.push(Gate::one(GateKind::RZ, q, 2.0 * gamma * hq))?;
        }
        for cp in inst.couplings() {
            c.push(Gate::two(GateKind::RZZ, cp.i, cp.j, 2.0 * gamma * cp.value))?;
        }
        for q in 0..n {
            c.push(Gate::one(GateKind::RX, q, 2.0 * beta))?;
        }
    }
    Ok(c)
}
