mod common;

use std::fs;

use bfdcqo_core::builder::{build_dcqo_circuit, initial_state_angles, BiasField, BuildConfig, CdMode};
use bfdcqo_core::circuit::{prune, Circuit, GateKind};
use bfdcqo_core::instances::{
    decode_wmis, exact_ground_state, index_to_bits, random_gaussian_instance, wmis_to_ising, SpinGlassInstance, Topology,
    WmisInstance,
};
use bfdcqo_core::metrics::tts;
use bfdcqo_core::rng::PinnedRng;
use bfdcqo_core::runner::{bfdcqo_run, qaoa_run, Algorithm, BiasMode, BiasSource, QaoaConfig, RunConfig};
use bfdcqo_core::schedule::{cd_polynomial, gamma_oracle, Schedule};
use bfdcqo_core::simulator::{Measurement, Simulator};
use bfdcqo_core::sweep::{results_csv, run_sweep, SweepOptions, SweepSpec, CSV_HEADER, MANIFEST_FILE, RESULTS_FILE};
use common::*;
use proptest::prelude::*;

/// Random instance with `n` spins and a dense coupling list.
fn instance(max_n: usize) -> impl Strategy<Value = SpinGlassInstance> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-2.0..2.0f64, pairs),
        )
            .prop_map(move |(h, j)| {
                let mut triples = Vec::with_capacity(pairs);
                let mut k = 0;
                for a in 0..n {
                    for b in (a + 1)..n {
                        triples.push((a, b, j[k]));
                        k += 1;
                    }
                }
                SpinGlassInstance::from_triples(h, &triples, Topology::Custom).unwrap()
            })
    })
}

fn fields(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.5..-0.1f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
    )
}

fn instance_with_fields(max_n: usize) -> impl Strategy<Value = (SpinGlassInstance, Vec<f64>, Vec<f64>)> {
    instance(max_n).prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), fields(n)).prop_map(|(i, (hx, hb))| (i, hx, hb))
    })
}

fn small_config() -> impl Strategy<Value = BuildConfig> {
    (1usize..=4, 0.02..0.2f64, prop::sample::select(vec![CdMode::Impulse, CdMode::Full, CdMode::Adiabatic])).prop_map(
        |(n_trot, dt, cd_mode)| BuildConfig {
            n_trot,
            dt,
            cd_mode,
            ..BuildConfig::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_ignores_coupling_storage_order(inst in instance(7), perm_seed in any::<u64>(), z in any::<u64>()) {
        let n = inst.n();
        let mut triples: Vec<(usize, usize, f64)> =
            inst.couplings().iter().map(|c| (c.i, c.j, c.value)).collect();
        let mut rng = PinnedRng::new(perm_seed);
        for k in (1..triples.len()).rev() {
            triples.swap(k, rng.below(k as u64 + 1) as usize);
        }
        let shuffled = SpinGlassInstance::from_triples(inst.h().to_vec(), &triples, Topology::Custom).unwrap();
        let bits = index_to_bits(z % (1 << n), n);
        let (a, b) = (inst.energy(&bits).unwrap(), shuffled.energy(&bits).unwrap());
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((a - brute_energy(&inst, &bits)).abs() < 1e-12);
    }

    #[test]
    fn zero_field_energy_is_complement_symmetric(inst in instance(8), z in any::<u64>()) {
        let n = inst.n();
        let triples: Vec<(usize, usize, f64)> = inst.couplings().iter().map(|c| (c.i, c.j, c.value)).collect();
        let free = SpinGlassInstance::from_triples(vec![0.0; n], &triples, Topology::Custom).unwrap();
        let mask = (1u64 << n) - 1;
        let z = z & mask;
        prop_assert!((free.energy_of_index(z) - free.energy_of_index(!z & mask)).abs() < 1e-12);
    }

    #[test]
    fn ground_energy_lower_bounds_random_states(seed in 0u64..1000, n in 2usize..=12) {
        let inst = random_gaussian_instance(n, seed, Topology::AllToAll).unwrap();
        let gt = exact_ground_state(&inst).unwrap();
        let mut rng = PinnedRng::new(seed ^ 0x5eed);
        for _ in 0..1000 {
            let z = rng.below(1 << n);
            prop_assert!(gt.energy <= inst.energy_of_index(z) + 1e-12);
        }
        for s in &gt.states {
            let bits: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
            prop_assert!((inst.energy(&bits).unwrap() - gt.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn wmis_encoding_recovers_best_weight(
        weights in prop::collection::vec(0.1..3.0f64, 2..=10),
        density in 0.0..0.7f64,
        edge_seed in any::<u64>(),
    ) {
        let n = weights.len();
        let mut rng = PinnedRng::new(edge_seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.uniform() < density {
                    edges.push((u, v));
                }
            }
        }
        let w = WmisInstance::new(weights.clone(), &edges).unwrap();
        let inst = wmis_to_ising(&w, w.default_penalty()).unwrap();
        let gt = exact_ground_state(&inst).unwrap();
        let chosen = decode_wmis(&gt.states[0]).unwrap();
        let got = w.independent_weight(&chosen);
        prop_assert!(got.is_some());
        prop_assert!((got.unwrap() - brute_wmis(&weights, &edges)).abs() < 1e-9);
    }

    #[test]
    fn alpha_is_nonpositive((inst, hx, hb) in instance_with_fields(8), lam in 0.0..=1.0f64) {
        let poly = cd_polynomial(&inst, &hx, &hb).unwrap();
        prop_assume!(poly.a > 0.0 && poly.denominator(lam) > 0.0);
        prop_assert!(poly.alpha1(lam).unwrap() <= 0.0);
        prop_assert!(poly.b >= 0.0 && poly.d >= 0.0);
    }

    #[test]
    fn alpha_matches_oracle_on_grid((inst, hx, hb) in instance_with_fields(4)) {
        let poly = cd_polynomial(&inst, &hx, &hb).unwrap();
        for k in 0..=100 {
            let lam = k as f64 / 100.0;
            let g = gamma_oracle(&inst, &hx, &hb, lam, true).unwrap();
            if g.gamma1 == 0.0 {
                continue;
            }
            let rel = (poly.alpha1(lam).unwrap() - g.alpha1()).abs() / g.alpha1().abs();
            prop_assert!(rel < 1e-9, "λ={lam} rel={rel}");
        }
    }

    #[test]
    fn oracle_ratio_ignores_trace_normalization((inst, hx, hb) in instance_with_fields(4), lam in 0.0..=1.0f64) {
        let a = gamma_oracle(&inst, &hx, &hb, lam, true).unwrap();
        let b = gamma_oracle(&inst, &hx, &hb, lam, false).unwrap();
        let scale = (1u64 << inst.n()) as f64;
        prop_assert!((a.gamma1 * scale - b.gamma1).abs() <= 1e-9 * b.gamma1.abs());
        prop_assume!(b.gamma1 > 0.0);
        prop_assert!((a.alpha1() - b.alpha1()).abs() <= 1e-12 * b.alpha1().abs());
    }

    #[test]
    fn alpha_even_under_global_sign_flip(inst in instance(7), hx in -1.5..-0.1f64, lam in 0.0..=1.0f64) {
        let n = inst.n();
        let neg: Vec<(usize, usize, f64)> = inst.couplings().iter().map(|c| (c.i, c.j, -c.value)).collect();
        let flipped = SpinGlassInstance::from_triples(inst.h().iter().map(|h| -h).collect(), &neg, Topology::Custom).unwrap();
        let hxv = vec![hx; n];
        let hb = vec![0.0; n];
        let a = cd_polynomial(&inst, &hxv, &hb).unwrap().alpha1(lam).unwrap();
        let b = cd_polynomial(&flipped, &hxv, &hb).unwrap().alpha1(lam).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
    }

    #[test]
    fn gate_matrices_are_unitary(kind in prop::sample::select(vec![
        GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::RZZ, GateKind::ZZ,
        GateKind::RYZ, GateKind::RZY, GateKind::GPI, GateKind::GPI2,
    ]), theta in -10.0..10.0f64) {
        use bfdcqo_core::circuit::{unitary_of, Gate};
        let g = if kind.arity() == 1 { Gate::one(kind, 0, theta) } else { Gate::two(kind, 0, 1, theta) };
        let d = 1 << kind.arity();
        let u = bfdcqo_core::dense::CMatrix::from_row_slice(d, d, &unitary_of(&g));
        let id = bfdcqo_core::dense::CMatrix::identity(d, d);
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn prune_idempotent_and_monotone(seed in any::<u64>(), t1 in 0.0..1.5f64, t2 in 0.0..1.5f64) {
        let mut rng = PinnedRng::new(seed);
        let c = random_circuit(&mut rng, 4, 40);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let once = prune(&c, hi);
        prop_assert_eq!(prune(&once, hi), once.clone());
        let loose = prune(&c, lo);
        // survivors of the stricter cutoff appear, in order, among the looser ones
        let mut it = loose.gates().iter();
        for g in once.gates() {
            prop_assert!(it.any(|x| x == g));
        }
    }

    #[test]
    fn preparation_energy_is_single_spin_minimum(hx in -3.0..3.0f64, hb in -1.0..=1.0f64) {
        prop_assume!(hx.abs() + hb.abs() > 1e-6);
        let theta = initial_state_angles(&[hx], &[hb]).unwrap()[0];
        let (c0, s0) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let energy = -hb * (c0 * c0 - s0 * s0) + 2.0 * hx * c0 * s0;
        prop_assert!((energy + (hx * hx + hb * hb).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn impulse_gates_subset_of_full((inst, hx, hb) in instance_with_fields(6), n_trot in 1usize..=4) {
        let base = BuildConfig { n_trot, hx: Some(hx), ..BuildConfig::default() };
        let hb = BiasField::new(hb).unwrap();
        let full = build_dcqo_circuit(&inst, &BuildConfig { cd_mode: CdMode::Full, ..base.clone() }, &hb).unwrap();
        let imp = build_dcqo_circuit(&inst, &BuildConfig { cd_mode: CdMode::Impulse, ..base }, &hb).unwrap();
        prop_assert!(imp.len() <= full.len());
        for g in imp.gates() {
            prop_assert!(full.gates().contains(g), "{g:?} missing from full mode");
        }
    }

    #[test]
    fn zero_bias_prepares_plus_states(inst in instance(7), cfg in small_config()) {
        let c = build_dcqo_circuit(&inst, &cfg, &BiasField::zeros(inst.n())).unwrap();
        let prep = &c.gates()[..inst.n()];
        for (q, g) in prep.iter().enumerate() {
            prop_assert_eq!(g.kind, GateKind::RY);
            prop_assert_eq!(&g.qubits[..], &[q][..]);
            prop_assert!((g.angle - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        }
        // no single-qubit Z rotations beyond those from the problem fields
        let rz = c.gates().iter().filter(|g| g.kind == GateKind::RZ).count();
        let with_field = inst.h().iter().filter(|h| **h != 0.0).count();
        prop_assert!(rz <= with_field * cfg.n_trot);
    }

    #[test]
    fn emitted_angles_finite((inst, hx, hb) in instance_with_fields(7), cfg in small_config()) {
        let cfg = BuildConfig { hx: Some(hx), ..cfg };
        let c = build_dcqo_circuit(&inst, &cfg, &BiasField::new(hb).unwrap()).unwrap();
        prop_assert!(c.gates().iter().all(|g| g.angle.is_finite()));
    }

    #[test]
    fn simulation_preserves_norm(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = PinnedRng::new(seed);
        let c = random_circuit(&mut rng, n, 50);
        let sv = Simulator::default().run(&c).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-10);
        for m in sv.expectation_z() {
            prop_assert!((-1.0..=1.0).contains(&m));
        }
        let samples = sv.sample(257, seed);
        prop_assert_eq!(samples.counts.values().sum::<u64>(), 257);
        for m in samples.expectation_z() {
            prop_assert!((-1.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn tts_nonincreasing_in_success(p1 in 0.0..=1.0f64, p2 in 0.0..=1.0f64, iters in 1u64..20, shots in 1u64..5000) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(tts(hi, iters, shots) <= tts(lo, iters, shots));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bias_stays_in_unit_range(seed in 0u64..500, n in 2usize..=6, source in prop::sample::select(vec![BiasSource::Exact, BiasSource::Sampled]),
                                mode in prop::sample::select(vec![BiasMode::Bias, BiasMode::Antibias])) {
        let inst = random_gaussian_instance(n, seed, Topology::AllToAll).unwrap();
        let cfg = RunConfig { n_iter: 4, n_shots: 100, bias_mode: mode, bias_source: source, seed, ..RunConfig::default() };
        let recs = bfdcqo_run(&inst, &cfg, None).unwrap();
        let sign = if mode == BiasMode::Bias { 1.0 } else { -1.0 };
        for w in recs.windows(2) {
            prop_assert!(w[1].hb_used.iter().all(|h| (-1.0..=1.0).contains(h)));
            let source_z = match source {
                BiasSource::Exact => {
                    let c = build_dcqo_circuit(&inst, &cfg.build, &BiasField::new(w[0].hb_used.clone()).unwrap()).unwrap();
                    Simulator::default().run(&c).unwrap().expectation_z()
                }
                BiasSource::Sampled => w[0].samples.expectation_z(),
            };
            let want: Vec<f64> = source_z.iter().map(|z| sign * z).collect();
            prop_assert_eq!(&w[1].hb_used, &want);
        }
    }

    #[test]
    fn exact_feedback_path_ignores_sampling_seed(seed in 0u64..500, s1 in any::<u64>(), s2 in any::<u64>()) {
        let inst = random_gaussian_instance(5, seed, Topology::AllToAll).unwrap();
        let run = |s: u64| {
            let cfg = RunConfig { n_iter: 3, n_shots: 50, bias_source: BiasSource::Exact, seed: s, ..RunConfig::default() };
            bfdcqo_run(&inst, &cfg, None).unwrap()
        };
        let (a, b) = (run(s1), run(s2));
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.hb_used, &y.hb_used);
            prop_assert_eq!(x.expected_energy, y.expected_energy);
        }
        prop_assert_eq!(run(s1), a);
    }

    #[test]
    fn qaoa_best_is_minimum_of_trajectories(seed in 0u64..500, p in 1usize..=2) {
        let inst = random_gaussian_instance(4, seed, Topology::AllToAll).unwrap();
        let q = QaoaConfig { p, n_inits: 4, max_evals: 40 };
        let out = qaoa_run(&inst, &q, 64, seed, None).unwrap();
        prop_assert_eq!(out.trajectory_energies.len(), 4);
        let best = out.trajectory_energies.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(out.best_energy, best);
    }

    #[test]
    fn csv_rows_keep_schema(seed in 0u64..100, algo in prop::sample::select(Algorithm::ALL.to_vec())) {
        let spec = SweepSpec {
            sizes: vec![3],
            seeds_per_size: 1,
            first_seed: seed,
            topology: Topology::AllToAll,
            algorithms: vec![algo],
            base: RunConfig { n_shots: 20, n_iter: 2, ..RunConfig::default() },
            qaoa: QaoaConfig { p: 1, n_inits: 1, max_evals: 10 },
            save_runs: false,
        };
        let rows = run_sweep(&spec, &SweepOptions { workers: 1, out_dir: None }).unwrap();
        let bytes = results_csv(&rows).unwrap();
        let mut rdr = csv::Reader::from_reader(&bytes[..]);
        prop_assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
        for rec in rdr.records() {
            let rec = rec.unwrap();
            prop_assert_eq!(rec.len(), CSV_HEADER.len());
            prop_assert!(rec.iter().all(|f| !f.is_empty()));
        }
    }
}

#[test]
fn none_mode_circuits_identical() {
    let inst = random_gaussian_instance(6, 2, Topology::AllToAll).unwrap();
    let cfg = RunConfig {
        n_iter: 3,
        n_shots: 64,
        bias_mode: BiasMode::None,
        ..RunConfig::default()
    };
    let recs = bfdcqo_run(&inst, &cfg, None).unwrap();
    let circuits: Vec<Circuit> = recs
        .iter()
        .map(|r| build_dcqo_circuit(&inst, &cfg.build, &BiasField::new(r.hb_used.clone()).unwrap()).unwrap())
        .collect();
    assert!(circuits.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn lambda_dot_matches_central_difference() {
    for total in [0.3, 1.0, 2.5] {
        let s = Schedule::new(total).unwrap();
        let h = 1e-6;
        for k in 0..=1000 {
            let t = total * k as f64 / 1000.0;
            let (a, b) = ((t - h).max(0.0), (t + h).min(total));
            let fd = (s.lambda(b).unwrap() - s.lambda(a).unwrap()) / (b - a);
            assert!((fd - s.lambda_dot(t).unwrap()).abs() < 1e-8, "T={total} t={t}");
        }
        assert_eq!(s.lambda(0.0).unwrap(), 0.0);
        assert!((s.lambda(total).unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn tts_monotone_on_grid() {
    let grid: Vec<f64> = (0..1000).map(|k| k as f64 / 999.0).collect();
    let values: Vec<f64> = grid.iter().map(|&p| tts(p, 10, 1000)).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
}

fn small_spec() -> SweepSpec {
    SweepSpec {
        sizes: vec![3, 4],
        seeds_per_size: 2,
        first_seed: 0,
        topology: Topology::AllToAll,
        algorithms: vec![Algorithm::Bfdcqo, Algorithm::Dcqo, Algorithm::Qaoa],
        base: RunConfig {
            n_shots: 50,
            n_iter: 3,
            bias_source: BiasSource::Exact,
            seed: 7,
            ..RunConfig::default()
        },
        qaoa: QaoaConfig {
            p: 1,
            n_inits: 2,
            max_evals: 20,
        },
        save_runs: true,
    }
}

fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn sweep_output_is_byte_identical() {
    let spec = small_spec();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_sweep(&spec, &SweepOptions { workers: 1, out_dir: Some(a.path().into()) }).unwrap();
    run_sweep(&spec, &SweepOptions { workers: 3, out_dir: Some(b.path().into()) }).unwrap();
    let sa = snapshot(a.path());
    assert!(sa.iter().any(|(name, _)| name == RESULTS_FILE));
    assert_eq!(sa, snapshot(b.path()));
}

#[test]
fn resumed_sweep_matches_uninterrupted() {
    let spec = small_spec();
    let full = tempfile::tempdir().unwrap();
    run_sweep(&spec, &SweepOptions { workers: 2, out_dir: Some(full.path().into()) }).unwrap();

    // an interrupted run: half the manifest survives plus a torn line
    let part = tempfile::tempdir().unwrap();
    run_sweep(&spec, &SweepOptions { workers: 2, out_dir: Some(part.path().into()) }).unwrap();
    let manifest = part.path().join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut kept = lines[..lines.len() / 2].join("\n");
    kept.push_str("\n{\"cell\":{\"n\":4,");
    fs::write(&manifest, kept).unwrap();
    fs::remove_file(part.path().join(RESULTS_FILE)).unwrap();

    run_sweep(&spec, &SweepOptions { workers: 1, out_dir: Some(part.path().into()) }).unwrap();
    assert_eq!(snapshot(full.path()), snapshot(part.path()));
}
