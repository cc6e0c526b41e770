//! Python bindings for the MOBS workbench: matrices, cycle automorphisms,
//! exchange simulation, solution counting, and the two attacks.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::IntoPyObjectExt;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mobs_core::automorphism::{build_prime_cycle_perm, prime_prefix_for_sum, CycleAutomorphism};
use mobs_core::boolmat::{mat_mul, BitMatrix};
use mobs_core::error::MobsError;
use mobs_core::protocol::{ExchangeTranscript, TranscriptFile};

fn err(e: MobsError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py_any(py)?,
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)?
            } else {
                n.as_f64().unwrap().into_py_any(py)?
            }
        }
        serde_json::Value::String(s) => s.into_py_any(py)?,
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)?
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_py_any(py)?
        }
    })
}

fn to_py_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    json_to_py(py, &serde_json::to_value(value).map_err(json_err)?)
}

#[pyclass(name = "BitMatrix", frozen)]
#[derive(Clone)]
struct PyBitMatrix {
    inner: BitMatrix,
}

#[pymethods]
impl PyBitMatrix {
    #[staticmethod]
    fn random(n: usize, k: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PyBitMatrix {
            inner: BitMatrix::random(n, k, &mut rng),
        }
    }

    #[staticmethod]
    fn identity(n: usize, k: usize) -> Self {
        PyBitMatrix {
            inner: BitMatrix::identity(n, k),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyBitMatrix {
            inner: serde_json::from_str(text).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn __matmul__(&self, other: &PyBitMatrix) -> PyResult<Self> {
        Ok(PyBitMatrix {
            inner: mat_mul(&self.inner, &other.inner).map_err(err)?,
        })
    }

    fn __eq__(&self, other: &PyBitMatrix) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("BitMatrix(n={}, k={})", self.inner.n(), self.inner.k())
    }
}

#[pyclass(name = "CycleAutomorphism", frozen)]
#[derive(Clone)]
struct PyCycleAutomorphism {
    inner: CycleAutomorphism,
}

#[pymethods]
impl PyCycleAutomorphism {
    #[staticmethod]
    #[pyo3(signature = (primes, scatter_seed=None))]
    fn from_primes(primes: Vec<usize>, scatter_seed: Option<u64>) -> PyResult<Self> {
        let k = primes.iter().sum();
        let inner = match scatter_seed {
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                build_prime_cycle_perm(k, &primes, Some(&mut rng))
            }
            None => build_prime_cycle_perm(k, &primes, None::<&mut ChaCha8Rng>),
        };
        Ok(PyCycleAutomorphism {
            inner: inner.map_err(err)?,
        })
    }

    /// k resolved to the ascending prime prefix summing to it.
    #[staticmethod]
    fn from_k(k: usize) -> PyResult<Self> {
        let primes = prime_prefix_for_sum(k).map_err(err)?;
        Ok(PyCycleAutomorphism {
            inner: build_prime_cycle_perm(k, &primes, None::<&mut ChaCha8Rng>).map_err(err)?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn cycles(&self) -> Vec<Vec<usize>> {
        self.inner.cycles().to_vec()
    }

    fn order(&self) -> u128 {
        self.inner.order()
    }

    fn apply(&self, m: &PyBitMatrix) -> PyResult<PyBitMatrix> {
        Ok(PyBitMatrix {
            inner: self.inner.apply(&m.inner).map_err(err)?,
        })
    }

    fn power(&self, e: u128) -> Self {
        PyCycleAutomorphism {
            inner: self.inner.power(e),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "CycleAutomorphism(k={}, cycles={})",
            self.inner.k(),
            self.inner.cycles().len()
        )
    }
}

#[pyclass(name = "Transcript", frozen)]
struct PyTranscript {
    inner: ExchangeTranscript,
}

#[pymethods]
impl PyTranscript {
    #[getter]
    fn m(&self) -> PyBitMatrix {
        PyBitMatrix {
            inner: self.inner.m.clone(),
        }
    }

    #[getter]
    fn h(&self) -> PyCycleAutomorphism {
        PyCycleAutomorphism {
            inner: self.inner.h.clone(),
        }
    }

    #[getter]
    fn a(&self) -> PyBitMatrix {
        PyBitMatrix {
            inner: self.inner.a.clone(),
        }
    }

    #[getter]
    fn b(&self) -> PyBitMatrix {
        PyBitMatrix {
            inner: self.inner.b.clone(),
        }
    }

    #[getter]
    fn x(&self) -> u128 {
        self.inner.x
    }

    #[getter]
    fn y(&self) -> u128 {
        self.inner.y
    }

    #[getter]
    fn key(&self) -> PyBitMatrix {
        PyBitMatrix {
            inner: self.inner.key.clone(),
        }
    }

    #[pyo3(signature = (reveal_private=false))]
    fn to_json(&self, reveal_private: bool) -> PyResult<String> {
        let file = if reveal_private {
            TranscriptFile::with_private(&self.inner)
        } else {
            TranscriptFile::public_only(&self.inner)
        };
        serde_json::to_string_pretty(&file).map_err(json_err)
    }
}

/// Run one exchange with explicit inputs.
#[pyfunction]
fn run_exchange(
    m: &PyBitMatrix,
    h: &PyCycleAutomorphism,
    x: u128,
    y: u128,
) -> PyResult<PyTranscript> {
    Ok(PyTranscript {
        inner: mobs_core::protocol::run_exchange(&m.inner, &h.inner, x, y).map_err(err)?,
    })
}

/// Per-plane solution counts for target = Y * right, with the exact total as
/// a decimal string.
#[pyfunction]
fn count_solutions(py: Python<'_>, target: &PyBitMatrix, right: &PyBitMatrix) -> PyResult<Py<PyAny>> {
    to_py_dict(
        py,
        &mobs_core::telescoping::count_solutions(&target.inner, &right.inner).map_err(err)?,
    )
}

/// Ideal-size counts for {Y * a}.
#[pyfunction]
fn count_orbit(py: Python<'_>, a: &PyBitMatrix) -> PyResult<Py<PyAny>> {
    to_py_dict(py, &mobs_core::telescoping::count_orbit(&a.inner).map_err(err)?)
}

/// Solution and orbit counts for the telescoping equality of a transcript.
#[pyfunction]
fn count_telescoping(py: Python<'_>, t: &PyTranscript) -> PyResult<Py<PyAny>> {
    let target = mat_mul(&t.inner.h.apply(&t.inner.a).map_err(err)?, &t.inner.m).map_err(err)?;
    let solutions =
        mobs_core::telescoping::count_solutions(&target, &t.inner.a).map_err(err)?;
    let orbit = mobs_core::telescoping::count_orbit(&t.inner.a).map_err(err)?;
    to_py_dict(
        py,
        &serde_json::json!({ "solutions": solutions, "orbit": orbit }),
    )
}

#[pyfunction]
fn monico_attack(py: Python<'_>, t: &PyTranscript) -> PyResult<Py<PyAny>> {
    let outcome =
        mobs_core::attack::monico_attack(&t.inner.public_view(), Some(&t.inner.key))
            .map_err(err)?;
    to_py_dict(
        py,
        &serde_json::json!({
            "candidate_exponent": outcome.candidate_exponent.to_string(),
            "success": outcome.success,
            "residue_ambiguity": outcome.residue_ambiguity,
            "candidate_key": outcome.candidate_key,
        }),
    )
}

#[pyfunction]
fn telescope_attack(py: Python<'_>, t: &PyTranscript, budget: u64) -> PyResult<Py<PyAny>> {
    let out = mobs_core::attack::telescope_attack(&t.inner.public_view(), budget, Some(&t.inner.key))
        .map_err(err)?;
    to_py_dict(
        py,
        &serde_json::json!({
            "found": out.outcome.is_some(),
            "success": out.outcome.as_ref().and_then(|o| o.success),
            "candidate_exponent": out.outcome.as_ref().map(|o| o.candidate_exponent.to_string()),
            "guesses": out.guesses,
            "solution_total": out.solutions.total.to_string(),
            "log2_solution_total": out.solutions.log2_total,
        }),
    )
}

#[pyfunction]
fn spearman_rho(pairs: Vec<(f64, f64)>) -> PyResult<f64> {
    mobs_core::experiments::spearman_rho(&pairs).map_err(err)
}

#[pymodule]
fn mobs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBitMatrix>()?;
    m.add_class::<PyCycleAutomorphism>()?;
    m.add_class::<PyTranscript>()?;
    m.add_function(wrap_pyfunction!(run_exchange, m)?)?;
    m.add_function(wrap_pyfunction!(count_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(count_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(count_telescoping, m)?)?;
    m.add_function(wrap_pyfunction!(monico_attack, m)?)?;
    m.add_function(wrap_pyfunction!(telescope_attack, m)?)?;
    m.add_function(wrap_pyfunction!(spearman_rho, m)?)?;
    Ok(())
}
