//! Python bindings: states, measures, noise, recovery and the experiment runner.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cqec_core::bench_states::Algorithm;
use cqec_core::catalyst::{optimize_catalyst as core_optimize_catalyst, target_modes, CatalystBudget, CostWeights};
use cqec_core::experiment::{self, ExperimentConfig};
use cqec_core::linalg::CMatrix;
use cqec_core::noise::NoiseSpec;
use cqec_core::purification::DepolForm;
use cqec_core::recovery::{self, CatalystSource, ProtocolConfig};
use cqec_core::{baselines, measures, modes, noise, purification, CqecError};

fn py_err(e: CqecError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "StateVector", module = "cqec", frozen, from_py_object)]
#[derive(Clone)]
struct PyStateVector(cqec_core::StateVector);

#[pymethods]
impl PyStateVector {
    /// Normalizes the given amplitudes.
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        cqec_core::StateVector::normalized(amplitudes).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn maximally_coherent(d: usize) -> Self {
        Self(cqec_core::StateVector::maximally_coherent(d))
    }

    #[staticmethod]
    fn benchmark(name: &str, seed: u64) -> PyResult<Self> {
        let alg: Algorithm = name.parse().map_err(py_err)?;
        alg.target(seed).map(Self).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().iter().copied().collect()
    }

    fn to_density(&self) -> PyDensityMatrix {
        PyDensityMatrix(self.0.to_density())
    }

    fn __repr__(&self) -> String {
        format!("StateVector(dim={})", self.0.dim())
    }
}

#[pyclass(name = "DensityMatrix", module = "cqec", frozen, from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(cqec_core::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    /// Validates a square Hermitian, unit-trace, PSD matrix given as rows.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err("density matrix must be square"));
        }
        let m = CMatrix::from_fn(d, d, |i, j| rows[i][j]);
        cqec_core::DensityMatrix::new(m).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn maximally_mixed(d: usize) -> Self {
        Self(cqec_core::DensityMatrix::maximally_mixed(d))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        let m = self.0.matrix();
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn purity(&self) -> f64 {
        measures::purity(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.0.dim())
    }
}

#[pyclass(name = "Hamiltonian", module = "cqec", frozen, from_py_object)]
#[derive(Clone)]
struct PyHamiltonian(cqec_core::HamiltonianSpec);

#[pymethods]
impl PyHamiltonian {
    #[staticmethod]
    fn qubit_sum_z(n: usize) -> Self {
        Self(cqec_core::HamiltonianSpec::qubit_sum_z(n))
    }

    #[staticmethod]
    fn linear_ladder(d: usize) -> Self {
        Self(cqec_core::HamiltonianSpec::linear_ladder(d))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn energies(&self) -> Vec<i64> {
        self.0.energies().to_vec()
    }
}

#[pyfunction]
fn uhlmann_fidelity(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    measures::uhlmann_fidelity(&a.0, &b.0).map_err(py_err)
}

#[pyfunction]
fn fidelity_with_pure(psi: &PyStateVector, rho: &PyDensityMatrix) -> PyResult<f64> {
    measures::fidelity_with_pure(&psi.0, &rho.0).map_err(py_err)
}

#[pyfunction]
fn l1_coherence(rho: &PyDensityMatrix) -> f64 {
    measures::l1_coherence(&rho.0)
}

#[pyfunction]
fn qfi(rho: &PyDensityMatrix, h: &PyHamiltonian) -> PyResult<f64> {
    measures::qfi(&rho.0, &h.0).map_err(py_err)
}

#[pyfunction]
fn trace_distance(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<f64> {
    measures::trace_distance(&a.0, &b.0).map_err(py_err)
}

/// Applies a noise channel given as JSON, e.g. `{"kind": "dephasing", "gamma": 2.0}`.
#[pyfunction]
fn apply_noise(target: &PyStateVector, h: &PyHamiltonian, spec: &str) -> PyResult<PyDensityMatrix> {
    let spec: NoiseSpec = serde_json::from_str(spec).map_err(json_err)?;
    noise::apply_noise(&target.0, &h.0, &spec).map(|n| PyDensityMatrix(n.state)).map_err(py_err)
}

#[pyfunction]
fn check_recoverable<'py>(
    py: Python<'py>,
    target: &PyDensityMatrix,
    noisy: &PyDensityMatrix,
    h: &PyHamiltonian,
) -> PyResult<Bound<'py, PyDict>> {
    let d = modes::check_recoverable(&target.0, &noisy.0, &h.0).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("recoverable", d.recoverable)?;
    out.set_item("full_rank", d.full_rank)?;
    out.set_item("span_included", d.span_included)?;
    out.set_item("missing_gaps", d.missing_gaps)?;
    Ok(out)
}

#[pyfunction]
fn swap_gadget(rho: &PyDensityMatrix) -> PyDensityMatrix {
    PyDensityMatrix(purification::swap_gadget(&rho.0))
}

/// Target fidelity after `rounds` swap rounds on the depolarized `d`-level state.
#[pyfunction]
fn depolarized_purified_fidelity(d: usize, p: f64, rounds: u32) -> PyResult<f64> {
    let form = DepolForm::depolarized(cqec_core::StateVector::maximally_coherent(d), p).map_err(py_err)?;
    Ok(form.purify(rounds).fidelity())
}

#[pyfunction]
fn cpmg_gamma(gamma: f64, n_pulses: u32) -> f64 {
    purification::cpmg_gamma(gamma, n_pulses)
}

#[pyfunction]
fn twirl_p_eff(gamma_eff: f64, d: usize) -> f64 {
    purification::twirl_p_eff(gamma_eff, d)
}

#[pyfunction]
fn per_qubit_rate(p: f64, n_q: u32) -> PyResult<f64> {
    baselines::per_qubit_rate(p, n_q).map_err(py_err)
}

#[pyfunction]
fn steane_fidelity(p_eff: f64) -> f64 {
    baselines::steane_fidelity(p_eff)
}

#[pyfunction]
fn copies_for_target(c: f64, eps: f64) -> PyResult<u64> {
    baselines::copies_for_target(c, eps).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (h, target, seed=0))]
fn optimize_catalyst<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    target: &PyDensityMatrix,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let modes = target_modes(&target.0, &h.0).map_err(py_err)?;
    let r = py
        .detach(|| core_optimize_catalyst(&h.0, &modes, &CostWeights::default(), &CatalystBudget::default(), seed))
        .map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("l1", r.l1)?;
    out.set_item("mode_coverage", r.mode_coverage)?;
    out.set_item("rho_min", r.rho_min)?;
    out.set_item("cost", r.cost)?;
    out.set_item("state", PyDensityMatrix(r.state))?;
    Ok(out)
}

/// Mode check, catalyst acquisition and recovery in one call.
#[pyfunction]
#[pyo3(signature = (target, h, noise, catalyst="variational", depth=2, seed=0))]
fn run_protocol<'py>(
    py: Python<'py>,
    target: &PyStateVector,
    h: &PyHamiltonian,
    noise: &str,
    catalyst: &str,
    depth: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec: NoiseSpec = serde_json::from_str(noise).map_err(json_err)?;
    let source: CatalystSource = catalyst.parse().map_err(py_err)?;
    let cfg = ProtocolConfig { catalyst: source, depth, seed, ..Default::default() };
    let o = py.detach(|| recovery::run_protocol(&target.0, &h.0, &spec, &cfg)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("recoverable", o.result.recoverable)?;
    out.set_item("f_before", o.result.f_before)?;
    out.set_item("f_after", o.result.f_after)?;
    out.set_item("f_catalyst", o.result.f_catalyst)?;
    out.set_item("objective", o.result.objective)?;
    out.set_item("theta", o.result.theta)?;
    Ok(out)
}

/// Runs an experiment config (JSON) and returns the sealed result as JSON text.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg: ExperimentConfig = serde_json::from_str(config).map_err(json_err)?;
    py.detach(|| {
        let mut result = experiment::run(&cfg)?;
        result.seal()?;
        experiment::canonical_json(&serde_json::to_value(&result)?)
    })
    .map_err(py_err)
}

#[pymodule]
fn cqec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_function(wrap_pyfunction!(uhlmann_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_with_pure, m)?)?;
    m.add_function(wrap_pyfunction!(l1_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(qfi, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(apply_noise, m)?)?;
    m.add_function(wrap_pyfunction!(check_recoverable, m)?)?;
    m.add_function(wrap_pyfunction!(swap_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(depolarized_purified_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(cpmg_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(twirl_p_eff, m)?)?;
    m.add_function(wrap_pyfunction!(per_qubit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(steane_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(copies_for_target, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_catalyst, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
