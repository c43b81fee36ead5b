//! Ensemble sweeps over (size, seed, algorithm) cells with a resumable
//! manifest and a deterministic CSV table.
//!
//! Output directory layout:
//!
//! * `manifest.jsonl` one JSON row per finished cell. Appended while the
//!   sweep runs, rewritten in sorted order once it completes.
//! * `results.csv` one row per cell, sorted by size, seed, algorithm.
//! * `runs/n{n}_s{seed}_{algorithm}.json` the full run report of each cell
//!   (when `save_runs` is set).
//!
//! Cell `(n, seed)` uses the Gaussian instance generated with that seed, so
//! `generate --n N --seed S` reproduces it. Run seeds are derived from the
//! base seed and the cell coordinates.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{exact_ground_state, random_gaussian_instance, Topology};
use crate::metrics::{fit_scaling, tts, ScalingFit};
use crate::rng::PinnedRng;
use crate::runner::{run_algorithm, Algorithm, QaoaConfig, RunConfig, RunReport};
use crate::simulator::DEFAULT_MAX_QUBITS;

/// Token written for undefined metrics.
pub const UNDEFINED: &str = "undefined";
/// Token written for an infinite time-to-solution.
pub const INFINITE: &str = "inf";

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RESULTS_FILE: &str = "results.csv";
pub const RUNS_DIR: &str = "runs";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub sizes: Vec<usize>,
    pub seeds_per_size: usize,
    /// Instances use seeds `first_seed .. first_seed + seeds_per_size`.
    #[serde(default)]
    pub first_seed: u64,
    #[serde(default = "default_topology")]
    pub topology: Topology,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub base: RunConfig,
    #[serde(default)]
    pub qaoa: QaoaConfig,
    #[serde(default = "default_true")]
    pub save_runs: bool,
}

fn default_topology() -> Topology {
    Topology::AllToAll
}

fn default_true() -> bool {
    true
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one size".into()));
        }
        if self.seeds_per_size == 0 {
            return Err(Error::InvalidArgument("seeds_per_size must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("sweep needs at least one algorithm".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n == 0 || n > DEFAULT_MAX_QUBITS) {
            return Err(Error::TooLarge {
                what: "sweep size",
                limit: DEFAULT_MAX_QUBITS,
                n,
            });
        }
        Ok(())
    }

    /// All cells in output order, without duplicates.
    pub fn cells(&self) -> Vec<Cell> {
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        let mut algorithms = self.algorithms.clone();
        algorithms.sort_unstable();
        algorithms.dedup();
        let mut cells = Vec::new();
        for &n in &sizes {
            for seed in self.first_seed..self.first_seed + self.seeds_per_size as u64 {
                for &algorithm in &algorithms {
                    cells.push(Cell { n, seed, algorithm });
                }
            }
        }
        cells
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl Cell {
    pub fn run_seed(&self, base_seed: u64) -> u64 {
        PinnedRng::with_stream(base_seed, ((self.n as u64) << 40) ^ self.seed).next_u64()
    }

    pub fn run_file_name(&self) -> String {
        format!("n{}_s{}_{}.json", self.n, self.seed, self.algorithm)
    }
}

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: Cell,
    pub iterations: Option<usize>,
    pub n_shots: u64,
    pub ground_energy: Option<f64>,
    pub p_gs_first: Option<f64>,
    pub p_gs: Option<f64>,
    pub p_gs_sampled: Option<f64>,
    pub expected_energy: Option<f64>,
    pub mean_energy: Option<f64>,
    pub min_energy: Option<f64>,
    pub approximation_ratio_mean: Option<f64>,
    pub approximation_ratio_best: Option<f64>,
    pub two_qubit_gates: Option<usize>,
    pub depth: Option<usize>,
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 18] = [
    "n",
    "seed",
    "algorithm",
    "status",
    "iterations",
    "n_shots",
    "ground_energy",
    "p_gs_first",
    "p_gs",
    "p_gs_sampled",
    "expected_energy",
    "mean_energy",
    "min_energy",
    "approximation_ratio_mean",
    "approximation_ratio_best",
    "tts",
    "two_qubit_gates",
    "depth",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| UNDEFINED.to_string(), |x| x.to_string())
}

impl SweepRow {
    fn from_report(cell: Cell, report: &RunReport) -> Self {
        let first = &report.records[0];
        let last = report.final_record();
        SweepRow {
            cell,
            iterations: Some(report.iterations()),
            n_shots: report.config.n_shots,
            ground_energy: report.ground_energy,
            p_gs_first: first.p_gs,
            p_gs: last.p_gs,
            p_gs_sampled: last.p_gs_sampled,
            expected_energy: Some(last.expected_energy),
            mean_energy: Some(last.mean_energy),
            min_energy: Some(last.min_energy),
            approximation_ratio_mean: last.approximation_ratio_mean,
            approximation_ratio_best: last.approximation_ratio_best,
            two_qubit_gates: Some(last.gates.two_qubit),
            depth: Some(last.gates.depth),
            error: None,
        }
    }

    fn failed(cell: Cell, n_shots: u64, err: &Error) -> Self {
        SweepRow {
            cell,
            iterations: None,
            n_shots,
            ground_energy: None,
            p_gs_first: None,
            p_gs: None,
            p_gs_sampled: None,
            expected_energy: None,
            mean_energy: None,
            min_energy: None,
            approximation_ratio_mean: None,
            approximation_ratio_best: None,
            two_qubit_gates: None,
            depth: None,
            error: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// Time-to-solution in shots, from the exact final p_gs.
    pub fn tts(&self) -> Option<f64> {
        match (self.p_gs, self.iterations) {
            (Some(p), Some(k)) => Some(tts(p, k as u64, self.n_shots)),
            _ => None,
        }
    }

    /// CSV fields matching [`CSV_HEADER`]. Floats use the shortest
    /// round-trip representation.
    pub fn csv_fields(&self) -> Vec<String> {
        let status = match &self.error {
            None => "ok".to_string(),
            Some(e) => format!("error: {e}"),
        };
        let tts = match self.tts() {
            Some(t) if t.is_infinite() => INFINITE.to_string(),
            other => opt(&other),
        };
        vec![
            self.cell.n.to_string(),
            self.cell.seed.to_string(),
            self.cell.algorithm.to_string(),
            status,
            opt(&self.iterations),
            self.n_shots.to_string(),
            opt(&self.ground_energy),
            opt(&self.p_gs_first),
            opt(&self.p_gs),
            opt(&self.p_gs_sampled),
            opt(&self.expected_energy),
            opt(&self.mean_energy),
            opt(&self.min_energy),
            opt(&self.approximation_ratio_mean),
            opt(&self.approximation_ratio_best),
            tts,
            opt(&self.two_qubit_gates),
            opt(&self.depth),
        ]
    }
}

/// Runs one cell. Failures become error rows.
pub fn run_cell(spec: &SweepSpec, cell: Cell) -> (SweepRow, Option<RunReport>) {
    let attempt = || -> Result<RunReport> {
        let inst = random_gaussian_instance(cell.n, cell.seed, spec.topology)?;
        let gt = exact_ground_state(&inst)?;
        let cfg = RunConfig {
            seed: cell.run_seed(spec.base.seed),
            ..spec.base.clone()
        };
        run_algorithm(cell.algorithm, &inst, &cfg, &spec.qaoa, Some(&gt))
    };
    match attempt() {
        Ok(report) => (SweepRow::from_report(cell, &report), Some(report)),
        Err(e) => (SweepRow::failed(cell, spec.base.n_shots, &e), None),
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
}

fn read_manifest(path: &Path) -> Result<BTreeMap<Cell, SweepRow>> {
    let mut done = BTreeMap::new();
    if !path.exists() {
        return Ok(done);
    }
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // a torn final line from an interrupted append is dropped and rerun
        if let Ok(row) = serde_json::from_str::<SweepRow>(&line) {
            done.insert(row.cell, row);
        }
    }
    Ok(done)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Renders rows (already in output order) as CSV.
pub fn results_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_fields())?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Executes every cell of `spec`, skipping cells already recorded in the
/// manifest of `out_dir`. Returns all rows sorted by cell.
pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells = spec.cells();
    let mut done = BTreeMap::new();
    let mut manifest = None;
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir)?;
        if spec.save_runs {
            fs::create_dir_all(dir.join(RUNS_DIR))?;
        }
        let path = dir.join(MANIFEST_FILE);
        done = read_manifest(&path)?;
        done.retain(|cell, _| cells.contains(cell));
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        manifest = Some(Mutex::new(file));
    }

    let pending: Vec<Cell> = cells.iter().copied().filter(|c| !done.contains_key(c)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start workers: {e}")))?;
    let fresh: Vec<Result<SweepRow>> = pool.install(|| {
        pending
            .par_iter()
            .map(|&cell| {
                let (row, report) = run_cell(spec, cell);
                if let (Some(dir), Some(report)) = (&opts.out_dir, &report) {
                    if spec.save_runs {
                        report.write(dir.join(RUNS_DIR).join(cell.run_file_name()))?;
                    }
                }
                if let Some(m) = &manifest {
                    let line = serde_json::to_string(&row)? + "\n";
                    let mut file = m.lock().expect("manifest lock poisoned");
                    file.write_all(line.as_bytes())?;
                    file.flush()?;
                }
                Ok(row)
            })
            .collect()
    });
    for row in fresh {
        let row = row?;
        done.insert(row.cell, row);
    }
    let rows: Vec<SweepRow> = cells.iter().map(|c| done[c].clone()).collect();

    if let Some(dir) = &opts.out_dir {
        drop(manifest);
        let mut text = String::new();
        for r in &rows {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())?;
        write_atomic(&dir.join(RESULTS_FILE), &results_csv(&rows)?)?;
    }
    Ok(rows)
}

/// Reads the rows of a finished sweep directory (from its manifest).
pub fn read_rows(dir: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    Ok(read_manifest(&dir.as_ref().join(MANIFEST_FILE))?.into_values().collect())
}

/// Per-(algorithm, size) averages over successful cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub cells: usize,
    pub errors: usize,
    pub mean_p_gs: Option<f64>,
    pub mean_p_gs_first: Option<f64>,
    pub mean_approximation_ratio_mean: Option<f64>,
    pub mean_approximation_ratio_best: Option<f64>,
    /// Time-to-solution of the mean p_gs.
    pub tts_of_mean: Option<f64>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Algorithm, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.cell.algorithm, r.cell.n)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((algorithm, n), rs)| {
            let ok: Vec<&&SweepRow> = rs.iter().filter(|r| r.is_ok()).collect();
            let mean_p_gs = mean(ok.iter().map(|r| r.p_gs));
            let iterations = ok.first().and_then(|r| r.iterations);
            let n_shots = ok.first().map(|r| r.n_shots);
            let tts_of_mean = match (mean_p_gs, iterations, n_shots) {
                (Some(p), Some(k), Some(s)) => Some(tts(p, k as u64, s)),
                _ => None,
            };
            SummaryRow {
                algorithm,
                n,
                cells: rs.len(),
                errors: rs.len() - ok.len(),
                mean_p_gs,
                mean_p_gs_first: mean(ok.iter().map(|r| r.p_gs_first)),
                mean_approximation_ratio_mean: mean(ok.iter().map(|r| r.approximation_ratio_mean)),
                mean_approximation_ratio_best: mean(ok.iter().map(|r| r.approximation_ratio_best)),
                tts_of_mean,
            }
        })
        .collect()
}

/// Exponential fit of mean p_gs against size, per algorithm. Algorithms with
/// fewer than two usable sizes are omitted.
pub fn scaling_fits(summary: &[SummaryRow]) -> BTreeMap<Algorithm, ScalingFit> {
    let mut points: BTreeMap<Algorithm, Vec<(f64, f64)>> = BTreeMap::new();
    for s in summary {
        if let Some(p) = s.mean_p_gs {
            points.entry(s.algorithm).or_default().push((s.n as f64, p));
        }
    }
    points
        .into_iter()
        .filter_map(|(a, pts)| fit_scaling(&pts).ok().map(|f| (a, f)))
        .collect()
}
