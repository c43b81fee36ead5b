//! BF-DCQO iteration protocol and the baseline algorithms it is compared
//! against.
//!
//! Iteration 1 runs plain DCQO (zero bias). After each iteration the Z
//! magnetization of the output, taken either exactly from the statevector or
//! from the shots, becomes the bias field of the next iteration (negated in
//! anti-bias mode). The bias changes the initial Hamiltonian, so preparation
//! angles, the CD coefficient and the whole circuit are rebuilt every time.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::builder::{build_dcqo_circuit, build_qaoa_circuit, BiasField, BuildConfig, CdMode};
use crate::circuit::{gate_stats, Circuit, GateStats};
use crate::error::{Error, Result};
use crate::instances::{GroundTruth, SpinGlassInstance};
use crate::optimize::NelderMead;
use crate::rng::PinnedRng;
use crate::simulator::{energy_statistics, Histogram, Measurement, SampleSet, Simulator, Statevector, DEFAULT_HISTOGRAM_BINS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    Bias,
    Antibias,
    None,
}

impl std::str::FromStr for BiasMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bias" => Ok(BiasMode::Bias),
            "antibias" => Ok(BiasMode::Antibias),
            "none" => Ok(BiasMode::None),
            other => Err(Error::InvalidArgument(format!("unknown bias mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasSource {
    /// `⟨σ^z⟩` from the exact statevector.
    Exact,
    /// Empirical `⟨σ^z⟩` over the shots.
    Sampled,
}

impl std::str::FromStr for BiasSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exact-expectation" => Ok(BiasSource::Exact),
            "sampled" => Ok(BiasSource::Sampled),
            other => Err(Error::InvalidArgument(format!("unknown bias source '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub build: BuildConfig,
    pub n_shots: u64,
    pub n_iter: usize,
    pub bias_mode: BiasMode,
    pub bias_source: BiasSource,
    pub seed: u64,
    /// Bias applied in iteration 1 instead of zero. Used to steer the first
    /// iteration in tests; `None` for normal runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_bias: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            build: BuildConfig::default(),
            n_shots: 1000,
            n_iter: 10,
            bias_mode: BiasMode::Bias,
            bias_source: BiasSource::Sampled,
            seed: 0,
            initial_bias: None,
        }
    }
}

/// Metrics of one iteration (or one baseline run).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub hb_used: Vec<f64>,
    pub samples: SampleSet,
    /// Exact ground-state overlap `Σ_gs |⟨gs|ψ⟩|²`.
    pub p_gs: Option<f64>,
    /// Fraction of shots that hit a ground state.
    pub p_gs_sampled: Option<f64>,
    /// `⟨ψ|H_f|ψ⟩`.
    pub expected_energy: f64,
    pub mean_energy: f64,
    pub min_energy: f64,
    /// `mean_energy / E_gs`.
    pub approximation_ratio_mean: Option<f64>,
    /// `min_energy / E_gs`.
    pub approximation_ratio_best: Option<f64>,
    pub histogram: Histogram,
    pub gates: GateStats,
}

fn ratio(e: f64, gt: Option<&GroundTruth>) -> Option<f64> {
    gt.and_then(|g| crate::metrics::approximation_ratio(e, g.energy).ok())
}

fn record(
    index: usize,
    inst: &SpinGlassInstance,
    circuit: &Circuit,
    sv: &Statevector,
    samples: SampleSet,
    hb_used: Vec<f64>,
    gt: Option<&GroundTruth>,
) -> Result<IterationRecord> {
    let stats = energy_statistics(&samples, inst, DEFAULT_HISTOGRAM_BINS)?;
    let (p_gs, p_gs_sampled) = match gt {
        Some(g) => (Some(sv.success_probability(g)?), Some(samples.success_probability(g)?)),
        None => (None, None),
    };
    Ok(IterationRecord {
        index,
        hb_used,
        p_gs,
        p_gs_sampled,
        expected_energy: sv.expected_energy(inst),
        mean_energy: stats.mean,
        min_energy: stats.min,
        approximation_ratio_mean: ratio(stats.mean, gt),
        approximation_ratio_best: ratio(stats.min, gt),
        histogram: stats.histogram,
        gates: gate_stats(circuit),
        samples,
    })
}

/// Shot-sampling seed of iteration `index` (stream `index` of the run seed).
pub fn iteration_sample_seed(seed: u64, index: usize) -> u64 {
    PinnedRng::with_stream(seed, index as u64).next_u64()
}

fn check_run(inst: &SpinGlassInstance, cfg: &RunConfig, gt: Option<&GroundTruth>) -> Result<()> {
    if cfg.n_iter == 0 {
        return Err(Error::InvalidArgument("n_iter must be at least 1".into()));
    }
    if cfg.n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be at least 1".into()));
    }
    if let Some(g) = gt {
        if let Some(s) = g.states.iter().find(|s| s.len() != inst.n()) {
            return Err(Error::Dimension {
                what: "ground-state bitstring",
                expected: inst.n(),
                got: s.len(),
            });
        }
    }
    Ok(())
}

/// Runs `cfg.n_iter` feedback iterations and returns one record per
/// iteration, in order.
pub fn bfdcqo_run(inst: &SpinGlassInstance, cfg: &RunConfig, gt: Option<&GroundTruth>) -> Result<Vec<IterationRecord>> {
    check_run(inst, cfg, gt)?;
    let n = inst.n();
    let sim = Simulator::default();
    let mut hb = match &cfg.initial_bias {
        Some(v) => BiasField::new(v.clone())?,
        None => BiasField::zeros(n),
    };
    let mut records = Vec::with_capacity(cfg.n_iter);
    for index in 0..cfg.n_iter {
        let circuit = build_dcqo_circuit(inst, &cfg.build, &hb)?;
        let sv = sim.run(&circuit)?;
        let samples = sv.sample(cfg.n_shots, iteration_sample_seed(cfg.seed, index));
        let magnetization = match cfg.bias_source {
            BiasSource::Exact => sv.expectation_z(),
            BiasSource::Sampled => samples.expectation_z(),
        };
        records.push(record(index + 1, inst, &circuit, &sv, samples, hb.values().to_vec(), gt)?);
        hb = match cfg.bias_mode {
            BiasMode::Bias => BiasField::new(magnetization)?,
            BiasMode::Antibias => BiasField::new(magnetization.into_iter().map(|m| -m).collect())?,
            BiasMode::None => BiasField::zeros(n),
        };
    }
    Ok(records)
}

/// Single DCQO iteration with zero bias (or annealing only, if
/// `cfg.build.cd_mode` is adiabatic).
pub fn dcqo_run(inst: &SpinGlassInstance, cfg: &RunConfig, gt: Option<&GroundTruth>) -> Result<IterationRecord> {
    let single = RunConfig {
        n_iter: 1,
        bias_mode: BiasMode::None,
        initial_bias: None,
        ..cfg.clone()
    };
    Ok(bfdcqo_run(inst, &single, gt)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaoaConfig {
    pub p: usize,
    pub n_inits: usize,
    pub max_evals: usize,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self {
            p: 3,
            n_inits: 20,
            max_evals: 300,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaOutcome {
    pub record: IterationRecord,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Lowest `⟨H_f⟩` over all initializations.
    pub best_energy: f64,
    /// Final `⟨H_f⟩` of each initialization, in order.
    pub trajectory_energies: Vec<f64>,
    pub evaluations: usize,
}

/// QAOA with `n_inits` random starts in `[0, 2π)^{2p}`, each locally
/// optimized on the exact `⟨H_f⟩` with at most `max_evals` evaluations.
/// The best parameters are sampled with `n_shots` shots.
pub fn qaoa_run(
    inst: &SpinGlassInstance,
    qcfg: &QaoaConfig,
    n_shots: u64,
    seed: u64,
    gt: Option<&GroundTruth>,
) -> Result<QaoaOutcome> {
    if qcfg.p == 0 || qcfg.n_inits == 0 {
        return Err(Error::InvalidArgument("QAOA needs p >= 1 and n_inits >= 1".into()));
    }
    if n_shots == 0 {
        return Err(Error::InvalidArgument("n_shots must be at least 1".into()));
    }
    let p = qcfg.p;
    let sim = Simulator::default();
    let diag = inst.energy_diagonal()?;
    let objective = |x: &[f64]| -> f64 {
        let c = build_qaoa_circuit(inst, &x[..p], &x[p..]).expect("parameter layout is fixed");
        let sv = sim.run(&c).expect("width checked by energy_diagonal");
        sv.amplitudes().iter().zip(&diag).map(|(a, e)| a.norm_sqr() * e).sum()
    };
    let optimizer = NelderMead {
        max_evals: qcfg.max_evals,
        ..NelderMead::default()
    };
    let mut rng = PinnedRng::new(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trajectory_energies = Vec::with_capacity(qcfg.n_inits);
    let mut evaluations = 0;
    for _ in 0..qcfg.n_inits {
        let x0: Vec<f64> = (0..2 * p).map(|_| rng.uniform_range(0.0, two_pi)).collect();
        let m = optimizer.minimize(objective, &x0);
        evaluations += m.evals;
        trajectory_energies.push(m.fx);
        if best.as_ref().is_none_or(|(_, fx)| m.fx < *fx) {
            best = Some((m.x, m.fx));
        }
    }
    let (x, best_energy) = best.expect("n_inits >= 1");
    let circuit = build_qaoa_circuit(inst, &x[..p], &x[p..])?;
    let sv = sim.run(&circuit)?;
    let samples = sv.sample(n_shots, iteration_sample_seed(seed, 0));
    let rec = record(1, inst, &circuit, &sv, samples, vec![0.0; inst.n()], gt)?;
    Ok(QaoaOutcome {
        record: rec,
        gammas: x[..p].to_vec(),
        betas: x[p..].to_vec(),
        best_energy,
        trajectory_energies,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Bias,
    Antibias,
    None,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Bias => "bias",
            Classification::Antibias => "antibias",
            Classification::None => "none",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    pub label: Classification,
    /// Exact p_gs of iteration 1 (the DCQO reference).
    pub dcqo_p_gs: f64,
    pub bias_p_gs: f64,
    /// Only run when the bias run did not improve.
    pub antibias_p_gs: Option<f64>,
}

/// Labels an instance by which feedback sign improves the final exact p_gs
/// over iteration 1. Both runs share iteration 1; strict improvement is
/// required and ties fall through to `None`.
pub fn classify_instance(inst: &SpinGlassInstance, cfg: &RunConfig, gt: &GroundTruth) -> Result<ClassifyOutcome> {
    let final_p = |records: &[IterationRecord]| -> f64 {
        records.last().and_then(|r| r.p_gs).expect("ground truth supplied")
    };
    let bias_cfg = RunConfig {
        bias_mode: BiasMode::Bias,
        ..cfg.clone()
    };
    let bias = bfdcqo_run(inst, &bias_cfg, Some(gt))?;
    let dcqo_p_gs = bias[0].p_gs.expect("ground truth supplied");
    let bias_p_gs = final_p(&bias);
    if bias_p_gs > dcqo_p_gs {
        return Ok(ClassifyOutcome {
            label: Classification::Bias,
            dcqo_p_gs,
            bias_p_gs,
            antibias_p_gs: None,
        });
    }
    let anti_cfg = RunConfig {
        bias_mode: BiasMode::Antibias,
        ..cfg.clone()
    };
    let anti = bfdcqo_run(inst, &anti_cfg, Some(gt))?;
    let antibias_p_gs = final_p(&anti);
    let label = if antibias_p_gs > dcqo_p_gs {
        Classification::Antibias
    } else {
        Classification::None
    };
    Ok(ClassifyOutcome {
        label,
        dcqo_p_gs,
        bias_p_gs,
        antibias_p_gs: Some(antibias_p_gs),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bfdcqo,
    Dcqo,
    Adiabatic,
    Qaoa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Bfdcqo, Algorithm::Dcqo, Algorithm::Adiabatic, Algorithm::Qaoa];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bfdcqo => "bfdcqo",
            Algorithm::Dcqo => "dcqo",
            Algorithm::Adiabatic => "adiabatic",
            Algorithm::Qaoa => "qaoa",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bfdcqo" => Ok(Algorithm::Bfdcqo),
            "dcqo" => Ok(Algorithm::Dcqo),
            "adiabatic" => Ok(Algorithm::Adiabatic),
            "qaoa" => Ok(Algorithm::Qaoa),
            other => Err(Error::InvalidArgument(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Output of one algorithm run: the `run` command's JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qaoa: Option<QaoaConfig>,
    pub n: usize,
    pub ground_energy: Option<f64>,
    pub records: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qaoa_parameters: Option<(Vec<f64>, Vec<f64>)>,
}

impl RunReport {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("a report has at least one record")
    }

    /// Number of circuit executions charged to the run (for time-to-solution).
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Rebuilds the circuit that produced the final record.
    pub fn final_circuit(&self, inst: &SpinGlassInstance) -> Result<Circuit> {
        match (&self.algorithm, &self.qaoa_parameters) {
            (Algorithm::Qaoa, Some((gammas, betas))) => build_qaoa_circuit(inst, gammas, betas),
            (Algorithm::Qaoa, None) => Err(Error::InvalidArgument("QAOA report without parameters".into())),
            _ => {
                let hb = BiasField::new(self.final_record().hb_used.clone())?;
                build_dcqo_circuit(inst, &self.config.build, &hb)
            }
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Runs `algorithm`. For `dcqo` and `adiabatic` only one iteration is made;
/// `adiabatic` forces the annealing-only circuit.
pub fn run_algorithm(
    algorithm: Algorithm,
    inst: &SpinGlassInstance,
    cfg: &RunConfig,
    qcfg: &QaoaConfig,
    gt: Option<&GroundTruth>,
) -> Result<RunReport> {
    let mut config = cfg.clone();
    let mut qaoa = None;
    let mut qaoa_parameters = None;
    let records = match algorithm {
        Algorithm::Bfdcqo => bfdcqo_run(inst, cfg, gt)?,
        Algorithm::Dcqo => {
            config.n_iter = 1;
            config.bias_mode = BiasMode::None;
            vec![dcqo_run(inst, &config, gt)?]
        }
        Algorithm::Adiabatic => {
            config.n_iter = 1;
            config.bias_mode = BiasMode::None;
            config.build.cd_mode = CdMode::Adiabatic;
            vec![dcqo_run(inst, &config, gt)?]
        }
        Algorithm::Qaoa => {
            let out = qaoa_run(inst, qcfg, cfg.n_shots, cfg.seed, gt)?;
            config.n_iter = 1;
            qaoa = Some(qcfg.clone());
            qaoa_parameters = Some((out.gammas, out.betas));
            vec![out.record]
        }
    };
    Ok(RunReport {
        algorithm,
        config,
        qaoa,
        n: inst.n(),
        ground_energy: gt.map(|g| g.energy),
        records,
        qaoa_parameters,
    })
}
