//! Python bindings. Instances, circuits and ground truths are wrapped as
//! classes; run reports are handed over as plain dicts via their JSON form.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bfdcqo_core::builder::{self, BiasField, BuildConfig, CdMode};
use bfdcqo_core::circuit;
use bfdcqo_core::instances::{self, Topology};
use bfdcqo_core::metrics;
use bfdcqo_core::runner::{self, Algorithm, BiasMode, BiasSource, QaoaConfig, RunConfig};
use bfdcqo_core::schedule;
use bfdcqo_core::simulator::{Measurement, Simulator};

fn err(e: bfdcqo_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = bfdcqo_core::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "SpinGlassInstance", module = "bfdcqo")]
struct PyInstance {
    inner: instances::SpinGlassInstance,
}

#[pymethods]
impl PyInstance {
    /// `h` local fields, `couplings` as (i, j, J) triples.
    #[new]
    #[pyo3(signature = (h, couplings, topology = "custom"))]
    fn new(h: Vec<f64>, couplings: Vec<(usize, usize, f64)>, topology: &str) -> PyResult<Self> {
        let topology: Topology = parse(topology)?;
        let inner = instances::SpinGlassInstance::from_triples(h, &couplings, topology).map_err(err)?;
        Ok(Self { inner })
    }

    /// Gaussian instance; `topology` is "all-to-all" or "heavy-hex".
    #[staticmethod]
    #[pyo3(signature = (n, seed, topology = "all-to-all"))]
    fn random(n: usize, seed: u64, topology: &str) -> PyResult<Self> {
        let inner = instances::random_gaussian_instance(n, seed, parse(topology)?).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = instances::SpinGlassInstance::from_json(text).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn h(&self) -> Vec<f64> {
        self.inner.h().to_vec()
    }

    #[getter]
    fn couplings(&self) -> Vec<(usize, usize, f64)> {
        self.inner.couplings().iter().map(|c| (c.i, c.j, c.value)).collect()
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.inner.offset()
    }

    /// Energy of a bitstring such as "0110" (bit 0 is spin +1).
    fn energy(&self, bits: &str) -> PyResult<f64> {
        let index = instances::bitstring_to_index(bits).map_err(err)?;
        if bits.len() != self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "expected {} bits, got {}",
                self.inner.n(),
                bits.len()
            )));
        }
        Ok(self.inner.energy_of_index(index))
    }

    fn ground_truth(&self) -> PyResult<PyGroundTruth> {
        let inner = instances::exact_ground_state(&self.inner).map_err(err)?;
        Ok(PyGroundTruth { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "SpinGlassInstance(n={}, couplings={}, topology='{}')",
            self.inner.n(),
            self.inner.couplings().len(),
            self.inner.topology()
        )
    }
}

#[pyclass(name = "GroundTruth", module = "bfdcqo")]
struct PyGroundTruth {
    inner: instances::GroundTruth,
}

#[pymethods]
impl PyGroundTruth {
    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.states.clone()
    }

    fn __repr__(&self) -> String {
        format!("GroundTruth(energy={}, states={:?})", self.inner.energy, self.inner.states)
    }
}

#[pyclass(name = "Circuit", module = "bfdcqo")]
struct PyCircuit {
    inner: circuit::Circuit,
}

#[pymethods]
impl PyCircuit {
    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    /// Gates as (kind, qubits, angle) tuples.
    fn gates(&self) -> Vec<(String, Vec<usize>, f64)> {
        self.inner
            .gates()
            .iter()
            .map(|g| (format!("{:?}", g.kind), g.qubits.clone(), g.angle))
            .collect()
    }

    /// One- and two-qubit gate counts and depth.
    fn stats(&self) -> (usize, usize, usize) {
        let s = circuit::gate_stats(&self.inner);
        (s.one_qubit, s.two_qubit, s.depth)
    }

    /// Rewrites into the native gate set of "generic" or "ionq".
    fn decompose(&self, target: &str) -> PyResult<Self> {
        let target = match target {
            "generic" => circuit::Target::Generic,
            "ionq" => circuit::Target::IonQ,
            other => return Err(PyValueError::new_err(format!("unknown target '{other}'"))),
        };
        let inner = circuit::decompose_native(&self.inner, target).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    /// Final statevector from |0...0> as a list of complex amplitudes.
    fn simulate(&self) -> PyResult<Vec<num_complex::Complex64>> {
        let sv = Simulator::default().run(&self.inner).map_err(err)?;
        Ok(sv.amplitudes().to_vec())
    }

    /// Per-qubit <Z> of the final state.
    fn expectation_z(&self) -> PyResult<Vec<f64>> {
        Ok(Simulator::default().run(&self.inner).map_err(err)?.expectation_z())
    }

    /// Shot counts keyed by bitstring.
    fn sample<'py>(&self, py: Python<'py>, n_shots: u64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let sv = Simulator::default().run(&self.inner).map_err(err)?;
        let samples = sv.sample(n_shots, seed);
        let out = PyDict::new(py);
        for (&index, &count) in &samples.counts {
            out.set_item(instances::index_to_bitstring(index, sv.n_qubits()), count)?;
        }
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn build_config(total_time: Option<f64>, dt: f64, n_trot: usize, cd_mode: &str, theta_cutoff: f64) -> PyResult<BuildConfig> {
    let cd_mode: CdMode = parse(cd_mode)?;
    Ok(BuildConfig {
        total_time,
        dt,
        n_trot,
        hx: None,
        cd_mode,
        theta_cutoff,
    })
}

/// Preparation layer plus Trotterized CD evolution for bias `hb` (zeros if
/// omitted).
#[pyfunction]
#[pyo3(signature = (inst, hb = None, dt = 0.1, n_trot = 3, total_time = None, cd_mode = "impulse", theta_cutoff = 0.0))]
fn build_dcqo_circuit(
    inst: &PyInstance,
    hb: Option<Vec<f64>>,
    dt: f64,
    n_trot: usize,
    total_time: Option<f64>,
    cd_mode: &str,
    theta_cutoff: f64,
) -> PyResult<PyCircuit> {
    let cfg = build_config(total_time, dt, n_trot, cd_mode, theta_cutoff)?;
    let bias = match hb {
        Some(v) => BiasField::new(v).map_err(err)?,
        None => BiasField::zeros(inst.inner.n()),
    };
    let inner = builder::build_dcqo_circuit(&inst.inner, &cfg, &bias).map_err(err)?;
    Ok(PyCircuit { inner })
}

#[pyfunction]
fn build_qaoa_circuit(inst: &PyInstance, gammas: Vec<f64>, betas: Vec<f64>) -> PyResult<PyCircuit> {
    let inner = builder::build_qaoa_circuit(&inst.inner, &gammas, &betas).map_err(err)?;
    Ok(PyCircuit { inner })
}

/// First-order CD coefficient at schedule parameter `lam`; `hx` defaults to
/// all -1 and `hb` to zeros.
#[pyfunction]
#[pyo3(signature = (inst, lam, hx = None, hb = None))]
fn cd_coefficient(inst: &PyInstance, lam: f64, hx: Option<Vec<f64>>, hb: Option<Vec<f64>>) -> PyResult<f64> {
    let n = inst.inner.n();
    let hx = hx.unwrap_or_else(|| vec![-1.0; n]);
    let hb = hb.unwrap_or_else(|| vec![0.0; n]);
    let poly = schedule::cd_polynomial(&inst.inner, &hx, &hb).map_err(err)?;
    poly.alpha1(lam).map_err(err)
}

/// Runs "bfdcqo", "dcqo", "adiabatic" or "qaoa" and returns the run report
/// as a dict. The ground truth is computed exactly when `exact_ground` is set.
#[pyfunction]
#[pyo3(signature = (
    inst, algorithm = "bfdcqo", n_iter = 10, n_shots = 1000, bias_mode = "bias", bias_source = "sampled",
    seed = 0, dt = 0.1, n_trot = 3, total_time = None, cd_mode = "impulse", theta_cutoff = 0.0,
    p = 3, n_inits = 20, max_evals = 300, exact_ground = true
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    algorithm: &str,
    n_iter: usize,
    n_shots: u64,
    bias_mode: &str,
    bias_source: &str,
    seed: u64,
    dt: f64,
    n_trot: usize,
    total_time: Option<f64>,
    cd_mode: &str,
    theta_cutoff: f64,
    p: usize,
    n_inits: usize,
    max_evals: usize,
    exact_ground: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let algorithm: Algorithm = parse(algorithm)?;
    let cfg = RunConfig {
        build: build_config(total_time, dt, n_trot, cd_mode, theta_cutoff)?,
        n_shots,
        n_iter,
        bias_mode: parse::<BiasMode>(bias_mode)?,
        bias_source: parse::<BiasSource>(bias_source)?,
        seed,
        initial_bias: None,
    };
    let qcfg = QaoaConfig { p, n_inits, max_evals };
    let inner = inst.inner.clone();
    let text = py
        .detach(move || -> bfdcqo_core::Result<String> {
            let gt = if exact_ground {
                Some(instances::exact_ground_state(&inner)?)
            } else {
                None
            };
            let report = runner::run_algorithm(algorithm, &inner, &cfg, &qcfg, gt.as_ref())?;
            Ok(serde_json::to_string(&report)?)
        })
        .map_err(err)?;
    json_to_py(py, &text)
}

/// Time-to-solution in shots.
#[pyfunction]
fn tts(p_gs: f64, n_iter: u64, n_shots: u64) -> f64 {
    metrics::tts(p_gs, n_iter, n_shots)
}

#[pyfunction]
fn approximation_ratio(energy: f64, ground_energy: f64) -> PyResult<f64> {
    metrics::approximation_ratio(energy, ground_energy).map_err(err)
}

/// Ising encoding of a weighted independent-set problem; `penalty` defaults
/// to max weight + 1.
#[pyfunction]
#[pyo3(signature = (weights, edges, penalty = None))]
fn wmis_to_ising(weights: Vec<f64>, edges: Vec<(usize, usize)>, penalty: Option<f64>) -> PyResult<PyInstance> {
    let w = instances::WmisInstance::new(weights, &edges).map_err(err)?;
    let penalty = penalty.unwrap_or_else(|| w.default_penalty());
    let inner = instances::wmis_to_ising(&w, penalty).map_err(err)?;
    Ok(PyInstance { inner })
}

#[pymodule]
fn bfdcqo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(build_dcqo_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(build_qaoa_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(cd_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(tts, m)?)?;
    m.add_function(wrap_pyfunction!(approximation_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(wmis_to_ising, m)?)?;
    Ok(())
}
