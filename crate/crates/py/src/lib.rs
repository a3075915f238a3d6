//! Python bindings: states, divergences, PPT-cone optimization, protocol
//! construction, and exponent curves. Scalar results come back as floats
//! (infinity for diverging quantities); structured reports come back as
//! JSON strings ready for `json.loads`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use distillex::conic::{self, StateSet};
use distillex::divergence::{self, DivergenceValue, RenyiOrder, SchmidtVector};
use distillex::error::Error;
use distillex::exponent;
use distillex::linalg::{self, DensityMatrix};
use distillex::protocol;
use distillex::suites;

fn to_py_err(e: Error) -> PyErr {
    match &e {
        Error::Parse(_) | Error::Domain(_) | Error::Unsupported(_) | Error::LayoutMismatch(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn bits(v: DivergenceValue) -> f64 {
    match v {
        DivergenceValue::Bits(b) => b,
        DivergenceValue::Infinite => f64::INFINITY,
    }
}

fn json_of<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A bipartite density matrix on interleaved copy factors A1 B1 A2 B2 ...
#[pyclass(name = "State")]
#[derive(Clone)]
struct PyState {
    inner: DensityMatrix,
}

#[pymethods]
impl PyState {
    /// Parse a state spec: bell, bell^m, isotropic:p:m, pure:l1,l2,...,
    /// maxmix:d, or a matrix text file path.
    #[staticmethod]
    fn from_spec(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: linalg::parse_state_spec(spec).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn bell(m: usize) -> PyResult<Self> {
        Ok(Self { inner: linalg::max_entangled(m).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn isotropic(p: f64, m: usize) -> PyResult<Self> {
        Ok(Self { inner: linalg::isotropic(p, m).map_err(to_py_err)? })
    }

    #[staticmethod]
    fn pure_from_schmidt(lambdas: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: linalg::pure_from_schmidt(&lambdas).map_err(to_py_err)? })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn copies(&self) -> usize {
        self.inner.layout().copies
    }

    fn tensor_power(&self, n: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tensor_power(n).map_err(to_py_err)? })
    }

    fn is_ppt(&self, tol: f64) -> bool {
        conic::is_ppt(&self.inner, tol)
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    /// Dense matrix as a list of rows of (re, im) pairs.
    fn matrix(&self) -> Vec<Vec<(f64, f64)>> {
        let m = self.inner.matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
            .collect()
    }

    fn fidelity(&self, other: &PyState) -> PyResult<f64> {
        linalg::fidelity(&self.inner, &other.inner).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        let l = self.inner.layout();
        format!("State(dim={}, copies={}, dims=({},{}))", self.inner.dim(), l.copies, l.dim_a, l.dim_b)
    }
}

/// Umegaki relative entropy in bits (inf on support violation).
#[pyfunction]
fn umegaki(rho: &PyState, sigma: &PyState) -> PyResult<f64> {
    Ok(bits(divergence::umegaki(&rho.inner, &sigma.inner).map_err(to_py_err)?))
}

/// Petz Renyi divergence of order alpha, in bits.
#[pyfunction]
fn petz_renyi(alpha: f64, rho: &PyState, sigma: &PyState) -> PyResult<f64> {
    let order = RenyiOrder::new(alpha).map_err(to_py_err)?;
    Ok(bits(divergence::petz_renyi(order, &rho.inner, &sigma.inner).map_err(to_py_err)?))
}

/// Sandwiched Renyi divergence of order alpha, in bits.
#[pyfunction]
fn sandwiched_renyi(alpha: f64, rho: &PyState, sigma: &PyState) -> PyResult<f64> {
    let order = RenyiOrder::new(alpha).map_err(to_py_err)?;
    Ok(bits(divergence::sandwiched_renyi(order, &rho.inner, &sigma.inner).map_err(to_py_err)?))
}

/// (value, gap): Petz divergence of order alpha from the PPT set.
#[pyfunction]
fn min_petz_ppt(alpha: f64, rho: &PyState) -> PyResult<(f64, f64)> {
    let order = RenyiOrder::new(alpha).map_err(to_py_err)?;
    let sol = conic::min_petz_ppt(order, &rho.inner).map_err(to_py_err)?;
    Ok((sol.value, sol.gap))
}

/// (value, gap): relative entropy of entanglement against PPT.
#[pyfunction]
fn rel_ent_ppt(rho: &PyState) -> PyResult<(f64, f64)> {
    let sol = conic::rel_ent_ppt(&rho.inner).map_err(to_py_err)?;
    Ok((sol.value, sol.gap))
}

/// (value or inf, explanation or None) for the reverse direction.
#[pyfunction]
fn reverse_rel_ent_ppt(rho: &PyState) -> PyResult<(f64, Option<String>)> {
    match conic::reverse_rel_ent_ppt(&rho.inner).map_err(to_py_err)? {
        conic::ReverseOutcome::Finite(sol) => Ok((sol.value, None)),
        conic::ReverseOutcome::Infinite { explanation } => {
            Ok((f64::INFINITY, Some(explanation)))
        }
    }
}

/// Largest overlap of a Bell projector on m pairs with the PPT set:
/// (value, certified gap).
#[pyfunction]
fn bell_ppt_overlap(m: usize) -> PyResult<(f64, f64)> {
    let phi = linalg::max_entangled(m).map_err(to_py_err)?;
    let sol = conic::max_linear_ppt(phi.op()).map_err(to_py_err)?;
    Ok((sol.value, sol.gap))
}

/// Optimal type-II error at type-I budget eps: (beta, gap, iterations).
#[pyfunction]
fn beta_opt(states: Vec<PyState>, eps: f64) -> PyResult<(f64, f64, usize)> {
    let vertices = states.into_iter().map(|s| s.inner).collect();
    let set = StateSet::from_vertices(vertices).map_err(to_py_err)?;
    let sol = conic::beta_opt(&set, eps).map_err(to_py_err)?;
    Ok((sol.value, sol.gap, sol.iterations))
}

/// Exact equivalence report at one (state, r, n) point, as JSON.
#[pyfunction]
fn verify_theorem1(state: &PyState, r: f64, n: usize) -> PyResult<String> {
    let set = StateSet::from_vertices(vec![state.inner.clone()]).map_err(to_py_err)?;
    let report = protocol::verify_theorem1(&set, r, n).map_err(to_py_err)?;
    json_of(&report)
}

/// Threshold-protocol parameters at (state, n, s, r), as JSON.
#[pyfunction]
fn threshold_params(state: &PyState, n: usize, s: f64, r: f64) -> PyResult<String> {
    let (_, params) = protocol::threshold_test(&state.inner, n, s, r).map_err(to_py_err)?;
    json_of(&params)
}

/// Per-n Hoeffding exponent sample, as JSON.
#[pyfunction]
fn hoeffding_exponent(state: &PyState, r: f64, n: usize) -> PyResult<String> {
    json_of(&exponent::hoeffding_exponent(&state.inner, r, n).map_err(to_py_err)?)
}

/// Per-n strong-converse lower bound sample, as JSON.
#[pyfunction]
fn strong_converse_bound(state: &PyState, r: f64, n: usize) -> PyResult<String> {
    json_of(&exponent::strong_converse_bound(&state.inner, r, n).map_err(to_py_err)?)
}

/// Measured reliability curve, as JSON.
#[pyfunction]
fn reliability_measured(states: Vec<PyState>, r: f64, n_max: usize) -> PyResult<String> {
    let vertices = states.into_iter().map(|s| s.inner).collect();
    let set = StateSet::from_vertices(vertices).map_err(to_py_err)?;
    json_of(&exponent::reliability_measured(&set, r, n_max).map_err(to_py_err)?)
}

/// Rate dual of the pure-state exponent curve.
#[pyfunction]
fn hayashi_rate(exponent_bits: f64, lambdas: Vec<f64>) -> PyResult<f64> {
    let sv = SchmidtVector::new(lambdas).map_err(to_py_err)?;
    divergence::hayashi_rate(exponent_bits, &sv).map_err(to_py_err)
}

/// Run a seeded property suite, as JSON.
#[pyfunction]
fn run_suite(name: &str, trials: usize, seed: u64) -> PyResult<String> {
    json_of(&suites::run_suite(name, trials, seed).map_err(to_py_err)?)
}

#[pymodule]
fn distillex_py(m: &Bound<PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(umegaki, m)?)?;
    m.add_function(wrap_pyfunction!(petz_renyi, m)?)?;
    m.add_function(wrap_pyfunction!(sandwiched_renyi, m)?)?;
    m.add_function(wrap_pyfunction!(min_petz_ppt, m)?)?;
    m.add_function(wrap_pyfunction!(rel_ent_ppt, m)?)?;
    m.add_function(wrap_pyfunction!(reverse_rel_ent_ppt, m)?)?;
    m.add_function(wrap_pyfunction!(bell_ppt_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(beta_opt, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem1, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_params, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(strong_converse_bound, m)?)?;
    m.add_function(wrap_pyfunction!(reliability_measured, m)?)?;
    m.add_function(wrap_pyfunction!(hayashi_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
