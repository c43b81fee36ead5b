use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bfdcqo_core::builder::{BuildConfig, CdMode};
use bfdcqo_core::instances::{
    exact_ground_state, random_gaussian_instance, wmis_to_ising, GroundTruth, SpinGlassInstance, Topology, WmisInstance,
};
use bfdcqo_core::runner::{run_algorithm, Algorithm, BiasMode, BiasSource, QaoaConfig, RunConfig};
use bfdcqo_core::sweep::{run_sweep, SweepOptions, SweepSpec};

mod report;

#[derive(Parser)]
#[command(name = "bfdcqo", version, about = "Bias-field digitized counterdiabatic optimization of Ising spin glasses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian spin-glass instance (h, J ~ N(0, 1)).
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// all-to-all | heavy-hex
        #[arg(long, default_value = "all-to-all")]
        topology: Topology,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a weighted independent-set problem as an Ising instance.
    WmisEncode {
        #[arg(long = "in")]
        input: PathBuf,
        /// Edge penalty; defaults to max weight + 1.
        #[arg(long)]
        penalty: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive ground-state search (n <= 26).
    SolveExact {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on one instance and write the run JSON.
    Run(RunArgs),
    /// Run an ensemble sweep described by a JSON spec.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render summary tables and SVG plots from a sweep directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// bfdcqo | dcqo | adiabatic | qaoa
    #[arg(long)]
    algo: Algorithm,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    /// Total schedule time; defaults to n_trot * dt.
    #[arg(long = "T")]
    total_time: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, default_value_t = 3)]
    n_trot: usize,
    #[arg(long, default_value_t = 1000)]
    n_shots: u64,
    #[arg(long, default_value_t = 10)]
    n_iter: usize,
    #[arg(long, default_value_t = 0.0)]
    theta_cutoff: f64,
    /// bias | antibias | none
    #[arg(long, default_value = "bias")]
    bias_mode: BiasMode,
    /// exact | sampled
    #[arg(long, default_value = "sampled")]
    bias_source: BiasSource,
    /// impulse | full | adiabatic
    #[arg(long, default_value = "impulse")]
    cd_mode: CdMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// QAOA depth.
    #[arg(long, default_value_t = 3)]
    p: usize,
    /// QAOA random initializations.
    #[arg(long, default_value_t = 20)]
    n_inits: usize,
    /// QAOA evaluation cap per initialization.
    #[arg(long, default_value_t = 300)]
    max_evals: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the circuit of the final iteration.
    #[arg(long)]
    dump_circuit: Option<PathBuf>,
    /// Also write the final shots as CSV (bitstring,count,energy).
    #[arg(long)]
    samples: Option<PathBuf>,
}

fn run(args: RunArgs) -> Result<()> {
    let inst = SpinGlassInstance::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let gt = match &args.ground_truth {
        Some(p) => Some(GroundTruth::read(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let cfg = RunConfig {
        build: BuildConfig {
            total_time: args.total_time,
            dt: args.dt,
            n_trot: args.n_trot,
            hx: None,
            cd_mode: args.cd_mode,
            theta_cutoff: args.theta_cutoff,
        },
        n_shots: args.n_shots,
        n_iter: args.n_iter,
        bias_mode: args.bias_mode,
        bias_source: args.bias_source,
        seed: args.seed,
        initial_bias: None,
    };
    let qcfg = QaoaConfig {
        p: args.p,
        n_inits: args.n_inits,
        max_evals: args.max_evals,
    };
    let report = run_algorithm(args.algo, &inst, &cfg, &qcfg, gt.as_ref())?;
    report.write(&args.out)?;
    if let Some(path) = &args.dump_circuit {
        report.final_circuit(&inst)?.write(path)?;
    }
    if let Some(path) = &args.samples {
        let file = fs::File::create(path)?;
        report.final_record().samples.write_csv(&inst, std::io::BufWriter::new(file))?;
    }
    let last = report.final_record();
    match last.p_gs {
        Some(p) => eprintln!("{}: {} record(s), final p_gs = {p:.6}", report.algorithm, report.records.len()),
        None => eprintln!("{}: {} record(s), final mean energy = {:.6}", report.algorithm, report.records.len(), last.mean_energy),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { n, seed, topology, out } => {
            if topology == Topology::Custom {
                bail!("custom topology instances are written by hand, not generated");
            }
            random_gaussian_instance(n, seed, topology)?.write(&out)?;
        }
        Command::WmisEncode { input, penalty, out } => {
            let w = WmisInstance::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let penalty = penalty.unwrap_or_else(|| w.default_penalty());
            wmis_to_ising(&w, penalty)?.write(&out)?;
        }
        Command::SolveExact { input, out } => {
            let inst = SpinGlassInstance::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let gt = exact_ground_state(&inst)?;
            eprintln!("ground energy {} ({} state(s))", gt.energy, gt.states.len());
            gt.write(&out)?;
        }
        Command::Run(args) => run(args)?,
        Command::Sweep { spec, workers, out } => {
            let spec = SweepSpec::read(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let rows = run_sweep(
                &spec,
                &SweepOptions {
                    workers,
                    out_dir: Some(out.clone()),
                },
            )?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            eprintln!("{} cells written to {} ({failed} failed)", rows.len(), out.display());
        }
        Command::Report { input, out } => report::render(&input, &out)?,
    }
    Ok(())
}
