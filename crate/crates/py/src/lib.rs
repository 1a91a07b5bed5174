//! Python bindings. Exact parameters cross the boundary as `"p/q"`
//! strings (complex ones as `[re, im]` pairs), matrices as nested lists of
//! Python complex numbers.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use quiverlax::dynkin::{apply_word, cartan_matrix, weight_lattice_basis, ParamVector, RootSystem};
use quiverlax::fuchsian::{sample_system, signature_distance, FuchsianSystem, Normalization};
use quiverlax::scalar::{format_cq, format_q, parse_cq, parse_q};
use quiverlax::weylops::{self, WeylWord};
use quiverlax::{io, sakai, AffineType, Error, CQ, C64, Q};

create_exception!(quiverlax_py, DegenerateError, PyException, "Wall or numerical degeneracy.");

fn py_err(e: Error) -> PyErr {
    if e.is_degeneracy() {
        DegenerateError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn ty(name: &str) -> PyResult<AffineType> {
    name.parse().map_err(py_err)
}

fn lambda_out(l: &ParamVector<CQ>) -> Vec<[String; 2]> {
    l.0.iter().map(format_cq).collect()
}

fn lambda_in(l: Vec<[String; 2]>) -> PyResult<ParamVector<CQ>> {
    Ok(ParamVector(l.iter().map(|v| parse_cq(v)).collect::<Result<_, _>>().map_err(py_err)?))
}

/// Counts and positive roots of an affine diagram.
#[pyfunction]
fn roots(kind: &str) -> PyResult<(usize, usize, Vec<Vec<i64>>)> {
    let r = io::roots_json(ty(kind)?);
    Ok((r.count, r.hyperplanes, r.positive_roots))
}

/// Basis of the translation lattice, one integral vector per node.
#[pyfunction]
fn translation_basis(kind: &str) -> PyResult<Vec<Vec<i64>>> {
    Ok(weight_lattice_basis(&ty(kind)?.graph()))
}

/// Exact action of a word of simple reflections on parameters; the
/// rightmost letter acts first.
#[pyfunction]
fn reflect_params(kind: &str, word: Vec<usize>, lambda: Vec<[String; 2]>) -> PyResult<Vec<[String; 2]>> {
    let t = ty(kind)?;
    let g = t.graph();
    let l = lambda_in(lambda)?;
    if l.len() != g.num_nodes() || word.iter().any(|&i| i >= g.num_nodes()) {
        return Err(PyValueError::new_err("word or parameters do not fit the diagram"));
    }
    Ok(lambda_out(&apply_word(&cartan_matrix(&g), &word, &l)))
}

/// Positive roots whose hyperplanes contain the parameters.
#[pyfunction]
fn violated_roots(kind: &str, lambda: Vec<[String; 2]>) -> PyResult<Vec<Vec<i64>>> {
    let rs = RootSystem::new(ty(kind)?);
    Ok(rs.violated(&lambda_in(lambda)?).into_iter().map(|b| b.0).collect())
}

#[pyclass(name = "System", frozen)]
struct PySystem {
    inner: FuchsianSystem,
    word: WeylWord,
}

impl PySystem {
    fn wrap(&self, inner: FuchsianSystem, ops: WeylWord) -> Self {
        let mut word = self.word.clone();
        word.0.extend(ops.0);
        PySystem { inner, word }
    }
}

#[pymethods]
impl PySystem {
    #[staticmethod]
    fn sample(kind: &str, seed: u64) -> PyResult<Self> {
        let (inner, _) = sample_system(ty(kind)?, seed).map_err(py_err)?;
        Ok(PySystem { inner, word: WeylWord::default() })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let (inner, word) = io::system_from_json(text).map_err(py_err)?;
        Ok(PySystem { inner, word: word.unwrap_or_default() })
    }

    fn to_json(&self) -> String {
        io::system_to_json(&self.inner, (!self.word.0.is_empty()).then_some(&self.word))
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.ty.to_string()
    }

    #[getter]
    fn word(&self) -> String {
        serde_json::to_string(&self.word).expect("serializable")
    }

    fn params(&self) -> PyResult<Vec<[String; 2]>> {
        Ok(lambda_out(&self.inner.params().map_err(py_err)?))
    }

    fn residues(&self) -> Vec<Vec<Vec<C64>>> {
        self.inner
            .residues
            .iter()
            .map(|a| (0..a.nrows()).map(|r| (0..a.ncols()).map(|c| a[(r, c)]).collect()).collect())
            .collect()
    }

    fn poles(&self) -> Vec<C64> {
        self.inner.poles.clone()
    }

    /// Traces of words of length up to `max_len` in the determinant-zero
    /// normalization.
    #[pyo3(signature = (max_len = 4))]
    fn signature(&self, max_len: usize) -> Vec<C64> {
        self.inner.normalize(Normalization::DetZero).signature(max_len)
    }

    fn distance(&self, other: &PySystem) -> f64 {
        signature_distance(&self.signature(4), &other.signature(4))
    }

    fn orbit_errors(&self) -> Vec<f64> {
        self.inner.orbit_errors()
    }

    fn sum_defect(&self) -> f64 {
        self.inner.sum_defect()
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn check(&self, tol: f64) -> PyResult<()> {
        self.inner.check(tol).map_err(py_err)
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn central_reflection(&self, tol: f64) -> PyResult<Self> {
        let out = weylops::central_reflection(&self.inner, tol).map_err(py_err)?;
        Ok(self.wrap(out, WeylWord(vec![weylops::WeylOp::Central])))
    }

    fn leg_reflection(&self, node: usize) -> PyResult<Self> {
        let out = weylops::leg_reflection(&self.inner, node).map_err(py_err)?;
        Ok(self.wrap(out, WeylWord(vec![weylops::WeylOp::Leg { node }])))
    }

    #[pyo3(signature = (mu, tol = 1e-9))]
    fn translate(&self, mu: Vec<i64>, tol: f64) -> PyResult<Self> {
        let out = weylops::translate(&self.inner, &mu, tol).map_err(py_err)?;
        Ok(self.wrap(out, WeylWord(vec![weylops::WeylOp::Translate { mu }])))
    }

    /// Apply a word given as JSON, e.g. `[{"op": "central"}]`.
    #[pyo3(signature = (word, tol = 1e-9))]
    fn apply(&self, word: &str, tol: f64) -> PyResult<Self> {
        let w: WeylWord = serde_json::from_str(word).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let out = w.apply(&self.inner, tol).map_err(py_err)?;
        Ok(self.wrap(out, w))
    }

    /// Iterated translation, returned as orbit CSV text.
    #[pyo3(signature = (mu, steps, sig_len = 3, tol = 1e-9))]
    fn orbit(&self, mu: Vec<i64>, steps: usize, sig_len: usize, tol: f64) -> PyResult<String> {
        let rows = weylops::dp_orbit(&self.inner, &mu, steps, sig_len, tol).map_err(py_err)?;
        Ok(io::orbit_csv(&rows))
    }

    fn __repr__(&self) -> String {
        format!("System({}, n={}, poles={})", self.inner.ty, self.inner.n(), self.inner.m())
    }
}

#[pyclass(name = "PointConfig", frozen)]
struct PyPointConfig {
    inner: sakai::PointConfig,
}

fn q_list(v: &[Q]) -> Vec<String> {
    v.iter().map(format_q).collect()
}

#[pymethods]
impl PyPointConfig {
    #[new]
    fn new(u: Vec<String>) -> PyResult<Self> {
        let u = u.iter().map(|s| parse_q(s)).collect::<Result<_, _>>().map_err(py_err)?;
        Ok(PyPointConfig { inner: sakai::PointConfig::new(u).map_err(py_err)? })
    }

    #[getter]
    fn u(&self) -> Vec<String> {
        q_list(&self.inner.u)
    }

    fn params(&self) -> Vec<String> {
        q_list(&sakai::params(&self.inner).0)
    }

    fn walls(&self) -> Vec<String> {
        sakai::wall_check(&self.inner).iter().map(|w| w.to_string()).collect()
    }

    /// Simple reflection `k`: 0 is the Cremona move, `k >= 1` swaps points
    /// `k` and `k + 1` (1-based).
    fn act(&self, k: usize) -> PyResult<Self> {
        Ok(PyPointConfig { inner: sakai::act(&self.inner, k).map_err(py_err)? })
    }

    /// Iterated translation, returned as configuration CSV text.
    fn orbit(&self, mu: Vec<i64>, steps: usize) -> PyResult<String> {
        let rows = sakai::sakai_orbit(&self.inner, &mu, steps).map_err(py_err)?;
        Ok(io::sakai_csv(&rows))
    }

    fn __eq__(&self, other: &PyPointConfig) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("PointConfig({})", self.u().join(", "))
    }
}

#[pymodule]
fn quiverlax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add_function(wrap_pyfunction!(roots, m)?)?;
    m.add_function(wrap_pyfunction!(translation_basis, m)?)?;
    m.add_function(wrap_pyfunction!(reflect_params, m)?)?;
    m.add_function(wrap_pyfunction!(violated_roots, m)?)?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyPointConfig>()?;
    Ok(())
}
