//! Exact statevector simulation and shot sampling.
//!
//! Amplitude index `z` encodes the computational basis state with qubit 0 as
//! the most significant bit: on two qubits, index 2 is `|10⟩`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{unitary_of, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::instances::{bitstring_to_index, index_to_bitstring, GroundTruth, SpinGlassInstance};
use crate::rng::PinnedRng;

pub const DEFAULT_MAX_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1
    /// within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let sv = Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        };
        if (sv.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument("statevector is not normalized".into()));
        }
        Ok(sv)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn mask(&self, q: usize) -> usize {
        1usize << (self.n_qubits - 1 - q)
    }

    pub fn apply(&mut self, g: &Gate) {
        match g.kind {
            GateKind::RZ => self.apply_diag1(g.qubits[0], g.angle),
            GateKind::RZZ | GateKind::ZZ => self.apply_zz(g.qubits[0], g.qubits[1], g.angle),
            _ if g.qubits.len() == 1 => {
                let u = unitary_of(g);
                self.apply_1q(g.qubits[0], [u[0], u[1], u[2], u[3]]);
            }
            _ => {
                let u = unitary_of(g);
                self.apply_2q(g.qubits[0], g.qubits[1], &u);
            }
        }
    }

    fn apply_1q(&mut self, q: usize, u: [Complex64; 4]) {
        let m = self.mask(q);
        for i0 in 0..self.amps.len() {
            if i0 & m != 0 {
                continue;
            }
            let i1 = i0 | m;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = u[0] * a0 + u[1] * a1;
            self.amps[i1] = u[2] * a0 + u[3] * a1;
        }
    }

    fn apply_diag1(&mut self, q: usize, theta: f64) {
        let m = self.mask(q);
        let e0 = Complex64::from_polar(1.0, -theta / 2.0);
        let e1 = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & m == 0 { e0 } else { e1 };
        }
    }

    fn apply_zz(&mut self, qa: usize, qb: usize, theta: f64) {
        let (ma, mb) = (self.mask(qa), self.mask(qb));
        let same = Complex64::from_polar(1.0, -theta / 2.0);
        let diff = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            let parity = ((i & ma) != 0) ^ ((i & mb) != 0);
            *a *= if parity { diff } else { same };
        }
    }

    fn apply_2q(&mut self, qa: usize, qb: usize, u: &[Complex64]) {
        let (ma, mb) = (self.mask(qa), self.mask(qb));
        for base in 0..self.amps.len() {
            if base & (ma | mb) != 0 {
                continue;
            }
            let idx = [base, base | mb, base | ma, base | ma | mb];
            let v = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for (r, &target) in idx.iter().enumerate() {
                let row = &u[r * 4..r * 4 + 4];
                self.amps[target] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
            }
        }
    }

    /// Draws `n_shots` outcomes by inverse-CDF lookup with a [`PinnedRng`]
    /// seeded by `seed`.
    pub fn sample(&self, n_shots: u64, seed: u64) -> SampleSet {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let last_nonzero = self
            .amps
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0);
        let mut rng = PinnedRng::new(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..n_shots {
            let u = rng.uniform() * total;
            let idx = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
            *counts.entry(idx as u64).or_insert(0u64) += 1;
        }
        SampleSet {
            n_qubits: self.n_qubits,
            counts,
            n_shots,
            seed,
        }
    }

    /// `⟨ψ|H_f|ψ⟩`.
    pub fn expected_energy(&self, inst: &SpinGlassInstance) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(z, a)| a.norm_sqr() * inst.energy_of_index(z as u64))
            .sum()
    }
}

/// Runs circuits from `|0…0⟩` up to a width budget.
#[derive(Clone, Copy, Debug)]
pub struct Simulator {
    pub max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl Simulator {
    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self { max_qubits }
    }

    pub fn run(&self, c: &Circuit) -> Result<Statevector> {
        if c.n_qubits() > self.max_qubits {
            return Err(Error::TooLarge {
                what: "statevector simulation",
                limit: self.max_qubits,
                n: c.n_qubits(),
            });
        }
        let mut sv = Statevector::zero(c.n_qubits());
        for g in c.gates() {
            sv.apply(g);
        }
        Ok(sv)
    }
}

/// Runs `c` on `|0…0⟩` with the default 26-qubit budget.
pub fn run_circuit(c: &Circuit) -> Result<Statevector> {
    Simulator::default().run(c)
}

/// Measurement outcomes keyed by basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub n_qubits: usize,
    pub counts: BTreeMap<u64, u64>,
    pub n_shots: u64,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SampleSetFile {
    n_qubits: usize,
    counts: BTreeMap<String, u64>,
    n_shots: u64,
    seed: u64,
}

impl Serialize for SampleSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SampleSetFile {
            n_qubits: self.n_qubits,
            counts: self
                .counts
                .iter()
                .map(|(&k, &v)| (index_to_bitstring(k, self.n_qubits), v))
                .collect(),
            n_shots: self.n_shots,
            seed: self.seed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampleSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SampleSetFile::deserialize(d)?;
        let mut counts = BTreeMap::new();
        for (bits, v) in f.counts {
            let idx = bitstring_to_index(&bits).map_err(serde::de::Error::custom)?;
            counts.insert(idx, v);
        }
        Ok(SampleSet {
            n_qubits: f.n_qubits,
            counts,
            n_shots: f.n_shots,
            seed: f.seed,
        })
    }
}

impl SampleSet {
    /// CSV with header `bitstring,count,energy`, rows in index order.
    pub fn write_csv<W: Write>(&self, inst: &SpinGlassInstance, mut w: W) -> Result<()> {
        writeln!(w, "bitstring,count,energy")?;
        for (&idx, &count) in &self.counts {
            writeln!(
                w,
                "{},{},{:?}",
                index_to_bitstring(idx, self.n_qubits),
                count,
                inst.energy_of_index(idx)
            )?;
        }
        Ok(())
    }
}

/// Anything that yields Z expectations and ground-state hit rates.
pub trait Measurement {
    fn n_qubits(&self) -> usize;

    /// `⟨σ^z_i⟩` for every qubit, with `s = +1` for bit 0.
    fn expectation_z(&self) -> Vec<f64>;

    /// Probability mass on the basis states listed in `gt`.
    fn ground_mass(&self, indices: &[u64]) -> f64;

    fn success_probability(&self, gt: &GroundTruth) -> Result<f64> {
        if let Some(s) = gt.states.iter().find(|s| s.len() != self.n_qubits()) {
            return Err(Error::Dimension {
                what: "ground-state bitstring",
                expected: self.n_qubits(),
                got: s.len(),
            });
        }
        Ok(self.ground_mass(&gt.indices()?))
    }
}

impl Measurement for Statevector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn expectation_z(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut out = vec![0.0; n];
        for (z, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (q, o) in out.iter_mut().enumerate() {
                if (z >> (n - 1 - q)) & 1 == 0 {
                    *o += p;
                } else {
                    *o -= p;
                }
            }
        }
        out.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
    }

    fn ground_mass(&self, indices: &[u64]) -> f64 {
        indices.iter().map(|&i| self.amps[i as usize].norm_sqr()).sum()
    }
}

impl Measurement for SampleSet {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn expectation_z(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut sums = vec![0i64; n];
        for (&z, &count) in &self.counts {
            for (q, s) in sums.iter_mut().enumerate() {
                if (z >> (n - 1 - q)) & 1 == 0 {
                    *s += count as i64;
                } else {
                    *s -= count as i64;
                }
            }
        }
        let shots = self.n_shots.max(1) as f64;
        sums.into_iter().map(|s| s as f64 / shots).collect()
    }

    fn ground_mass(&self, indices: &[u64]) -> f64 {
        let hits: u64 = indices.iter().filter_map(|i| self.counts.get(i)).sum();
        hits as f64 / self.n_shots.max(1) as f64
    }
}

/// Equal-width histogram of sampled energies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; bin `k` covers `[edges[k], edges[k+1])`, the last
    /// bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyStats {
    pub mean: f64,
    pub min: f64,
    pub histogram: Histogram,
}

pub const DEFAULT_HISTOGRAM_BINS: usize = 20;

/// Mean and minimum classical energy over the shots, plus a histogram with
/// `bins` equal-width bins spanning `[min, max]` (one bin when all shots
/// share an energy).
pub fn energy_statistics(samples: &SampleSet, inst: &SpinGlassInstance, bins: usize) -> Result<EnergyStats> {
    if samples.n_qubits != inst.n() {
        return Err(Error::Dimension {
            what: "sample width",
            expected: inst.n(),
            got: samples.n_qubits,
        });
    }
    if samples.counts.is_empty() {
        return Err(Error::InvalidArgument("sample set is empty".into()));
    }
    let energies: Vec<(f64, u64)> = samples
        .counts
        .iter()
        .map(|(&z, &c)| (inst.energy_of_index(z), c))
        .collect();
    let shots: u64 = energies.iter().map(|&(_, c)| c).sum();
    let mean = energies.iter().map(|&(e, c)| e * c as f64).sum::<f64>() / shots as f64;
    let min = energies.iter().map(|&(e, _)| e).fold(f64::INFINITY, f64::min);
    let max = energies.iter().map(|&(e, _)| e).fold(f64::NEG_INFINITY, f64::max);
    let bins = if max > min { bins.max(1) } else { 1 };
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { max } else { min + width * k as f64 })
        .collect();
    let mut counts = vec![0u64; bins];
    for (e, c) in energies {
        let k = if width > 0.0 {
            (((e - min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += c;
    }
    Ok(EnergyStats {
        mean,
        min,
        histogram: Histogram { edges, counts },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Topology;

    #[test]
    fn empty_circuit_is_zero_state() {
        let sv = run_circuit(&Circuit::new(3)).unwrap();
        assert_eq!(sv.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(sv.expectation_z(), vec![1.0; 3]);
    }

    #[test]
    fn ry_half_pi() {
        let c = Circuit::from_gates(1, vec![Gate::one(GateKind::RY, 0, std::f64::consts::FRAC_PI_2)]).unwrap();
        let sv = run_circuit(&c).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sv.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((sv.amplitudes()[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn bit_order_canary() {
        let c = Circuit::from_gates(2, vec![Gate::one(GateKind::RY, 0, std::f64::consts::PI)]).unwrap();
        let sv = run_circuit(&c).unwrap();
        assert!((sv.amplitudes()[2].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn width_budget() {
        let c = Circuit::new(5);
        assert!(Simulator::with_max_qubits(4).run(&c).is_err());
    }

    #[test]
    fn deterministic_state_sampling() {
        let sv = Statevector::zero(3);
        let s = sv.sample(100, 9);
        assert_eq!(s.counts.len(), 1);
        assert_eq!(s.counts[&0], 100);
        assert_eq!(sv.sample(100, 9), sv.sample(100, 9));
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let c = Circuit::from_gates(
            2,
            (0..2).map(|q| Gate::one(GateKind::RY, q, std::f64::consts::FRAC_PI_2)).collect(),
        )
        .unwrap();
        let shots = 40_000u64;
        let s = run_circuit(&c).unwrap().sample(shots, 1);
        let sigma = (0.25f64 * 0.75 / shots as f64).sqrt();
        for z in 0..4u64 {
            let f = s.counts[&z] as f64 / shots as f64;
            assert!((f - 0.25).abs() < 4.0 * sigma, "freq {f}");
        }
        assert_eq!(s.counts.values().sum::<u64>(), shots);
    }

    #[test]
    fn plus_state_has_zero_magnetization() {
        let c = Circuit::from_gates(
            3,
            (0..3).map(|q| Gate::one(GateKind::RY, q, std::f64::consts::FRAC_PI_2)).collect(),
        )
        .unwrap();
        for m in run_circuit(&c).unwrap().expectation_z() {
            assert!(m.abs() < 1e-15);
        }
    }

    #[test]
    fn success_probability_basic() {
        let gt = GroundTruth {
            energy: -1.0,
            states: vec!["10".into()],
        };
        let c = Circuit::from_gates(2, vec![Gate::one(GateKind::RY, 0, std::f64::consts::PI)]).unwrap();
        let sv = run_circuit(&c).unwrap();
        assert!((sv.success_probability(&gt).unwrap() - 1.0).abs() < 1e-15);

        let uni = Circuit::from_gates(
            2,
            (0..2).map(|q| Gate::one(GateKind::RY, q, std::f64::consts::FRAC_PI_2)).collect(),
        )
        .unwrap();
        let sv = run_circuit(&uni).unwrap();
        assert!((sv.success_probability(&gt).unwrap() - 0.25).abs() < 1e-15);

        let bad = GroundTruth {
            energy: 0.0,
            states: vec!["1".into()],
        };
        assert!(sv.success_probability(&bad).is_err());
    }

    #[test]
    fn energy_stats_single_outcome() {
        let inst = SpinGlassInstance::from_triples(vec![1.0, -0.5], &[(0, 1, 0.25)], Topology::Custom).unwrap();
        let s = Statevector::zero(2).sample(10, 0);
        let st = energy_statistics(&s, &inst, 20).unwrap();
        let e = inst.energy(&[0, 0]).unwrap();
        assert_eq!(st.mean, e);
        assert_eq!(st.min, e);
        assert_eq!(st.histogram.counts, vec![10]);
    }

    #[test]
    fn sample_csv_and_json() {
        let inst = SpinGlassInstance::from_triples(vec![1.0], &[], Topology::Custom).unwrap();
        let s = Statevector::zero(1).sample(5, 3);
        let mut buf = Vec::new();
        s.write_csv(&inst, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bitstring,count,energy\n0,5,1.0\n");
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"0\":5"));
        let back: SampleSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
