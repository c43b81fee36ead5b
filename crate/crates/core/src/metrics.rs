//! Derived metrics: time-to-solution, approximation and enhancement ratios,
//! exponential scaling fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Target confidence of time-to-solution.
pub const TTS_CONFIDENCE: f64 = 0.99;

/// Shots needed to see a ground state with 99% confidence, counting every
/// iteration: `n_iter·n_shots·ln(0.01)/ln(1 − p_gs)`. Units are shots.
///
/// `p_gs = 0` gives `+∞` and `p_gs = 1` gives `0`. Above 0.99 the log factor
/// drops below one, so the result can be smaller than a single iteration's
/// shot count.
pub fn tts(p_gs: f64, n_iter: u64, n_shots: u64) -> f64 {
    if p_gs <= 0.0 {
        return f64::INFINITY;
    }
    if p_gs >= 1.0 {
        return 0.0;
    }
    let budget = (n_iter * n_shots) as f64;
    budget * (1.0 - TTS_CONFIDENCE).ln() / (-p_gs).ln_1p()
}

/// `energy / ground_energy`.
pub fn approximation_ratio(energy: f64, ground_energy: f64) -> Result<f64> {
    if ground_energy == 0.0 || !ground_energy.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "approximation ratio needs a finite nonzero ground energy, got {ground_energy}"
        )));
    }
    Ok(energy / ground_energy)
}

/// `a / b`, or `None` when `b` is not positive.
pub fn enhancement_ratio(a: f64, b: f64) -> Option<f64> {
    if b > 0.0 && a.is_finite() && b.is_finite() {
        Some(a / b)
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(n, ln p_gs)`. Points with `p_gs <= 0` are
/// skipped; at least two usable points at distinct `n` are required.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, p)| *p > 0.0 && p.is_finite())
        .map(|&(n, p)| (n, p.ln()))
        .collect();
    let m = usable.len() as f64;
    if usable.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least 2 points with p_gs > 0, got {}",
            usable.len()
        )));
    }
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("scaling fit needs at least two distinct sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}
