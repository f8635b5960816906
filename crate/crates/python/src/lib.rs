//! Python bindings: rings, polynomials, matrices, monomial maps, the mrdi
//! codec and both parallel workloads.

use std::sync::{Arc, LazyLock};

use mrdi_core::algebra::{self, ContextHandle, Element, ExactMatrix, Monomial};
use mrdi_core::ipc::{WorkerCommand, WorkerPool};
use mrdi_core::mrdi::{self, GlobalSerializerState, Mode, Value};
use mrdi_core::workloads::{self, DetOptions};
use mrdi_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyList, PyTuple};

/// Process-wide binding of contexts to UUIDs, shared by every save, load
/// and worker pool created from Python.
static GLOBAL: LazyLock<Arc<GlobalSerializerState>> = LazyLock::new(|| Arc::new(GlobalSerializerState::new()));

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Transport(_) | Error::Remote(_) | Error::MapItem { .. } | Error::PoolClosed | Error::Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Ring", frozen, from_py_object, eq, hash, module = "mrdi_py")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyRing(ContextHandle);

#[pymethods]
impl PyRing {
    #[staticmethod]
    fn integers() -> Self {
        PyRing(ContextHandle::integers())
    }

    #[staticmethod]
    fn rationals() -> Self {
        PyRing(ContextHandle::rationals())
    }

    #[staticmethod]
    fn prime_field(p: u64) -> PyResult<Self> {
        ContextHandle::prime_field(p).map(PyRing).map_err(py_err)
    }

    /// `base[symbol]`, univariate.
    #[staticmethod]
    fn univariate(base: &PyRing, symbol: &str) -> PyResult<Self> {
        ContextHandle::univariate(&base.0, symbol).map(PyRing).map_err(py_err)
    }

    /// `base[s_1, ..., s_n]`, multivariate even when n = 1.
    #[staticmethod]
    fn multivariate(base: &PyRing, symbols: Vec<String>) -> PyResult<Self> {
        ContextHandle::multivariate(&base.0, &symbols).map(PyRing).map_err(py_err)
    }

    #[getter]
    fn symbols(&self) -> Vec<String> {
        self.0.symbols().to_vec()
    }

    #[getter]
    fn base(&self) -> Option<PyRing> {
        self.0.base().cloned().map(PyRing)
    }

    fn gens(&self) -> PyResult<Vec<PyPolynomial>> {
        (0..self.0.arity())
            .map(|i| algebra::Polynomial::variable(&self.0, i).map(PyPolynomial).map_err(py_err))
            .collect()
    }

    /// The constant polynomial `n`.
    fn constant(&self, n: &Bound<'_, PyAny>) -> PyResult<PyPolynomial> {
        let base = self.0.base().ok_or_else(|| PyTypeError::new_err("not a polynomial ring"))?;
        let c = to_element(base, n)?;
        let arity = self.0.arity();
        algebra::Polynomial::new(&self.0, [(Monomial::one(arity), c)]).map(PyPolynomial).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Ring({})", self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "Polynomial", frozen, from_py_object, eq, module = "mrdi_py")]
#[derive(Clone, PartialEq)]
struct PyPolynomial(algebra::Polynomial);

impl PyPolynomial {
    /// Polynomials pass through; anything else becomes a constant of `ring`.
    fn coerce(ring: &ContextHandle, other: &Bound<'_, PyAny>) -> PyResult<algebra::Polynomial> {
        if let Ok(p) = other.extract::<PyRef<'_, PyPolynomial>>() {
            return Ok(p.0.clone());
        }
        PyRing(ring.clone()).constant(other).map(|p| p.0)
    }
}

#[pymethods]
impl PyPolynomial {
    /// `terms` maps exponent tuples (or plain ints for univariate rings) to
    /// coefficients.
    #[new]
    fn new(ring: &PyRing, terms: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let base = ring.0.base().ok_or_else(|| PyTypeError::new_err("not a polynomial ring"))?;
        let mut out = Vec::with_capacity(terms.len());
        for (exp, c) in terms {
            let exps: Vec<u32> = match exp.extract::<u32>() {
                Ok(e) => vec![e],
                Err(_) => exp.extract()?,
            };
            out.push((exps, to_element(base, &c)?));
        }
        algebra::Polynomial::new(&ring.0, out).map(PyPolynomial).map_err(py_err)
    }

    #[getter]
    fn ring(&self) -> PyRing {
        PyRing(self.0.parent().clone())
    }

    /// `[(exponents, coefficient)]` in the ring's term order.
    fn terms(&self, py: Python<'_>) -> PyResult<Vec<(Vec<u32>, Py<PyAny>)>> {
        self.0
            .terms()
            .iter()
            .map(|(m, c)| Ok((m.exponents().to_vec(), from_element(py, c)?)))
            .collect()
    }

    fn total_degree(&self) -> Option<u32> {
        self.0.total_degree()
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn __add__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        let o = Self::coerce(self.0.parent(), other)?;
        self.0.add(&o).map(PyPolynomial).map_err(py_err)
    }

    fn __radd__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.__add__(other)
    }

    fn __sub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        let o = Self::coerce(self.0.parent(), other)?;
        self.0.sub(&o).map(PyPolynomial).map_err(py_err)
    }

    fn __rsub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        let o = Self::coerce(self.0.parent(), other)?;
        o.sub(&self.0).map(PyPolynomial).map_err(py_err)
    }

    fn __mul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        let o = Self::coerce(self.0.parent(), other)?;
        self.0.mul(&o).map(PyPolynomial).map_err(py_err)
    }

    fn __rmul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        self.__mul__(other)
    }

    fn __neg__(&self) -> Self {
        PyPolynomial(self.0.neg())
    }

    fn __pow__(&self, e: u32, modulo: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        if modulo.is_some() {
            return Err(PyTypeError::new_err("three-argument pow is not supported"));
        }
        Ok(PyPolynomial(self.0.pow(e)))
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({}, in {})", self.0, self.0.parent())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "Matrix", frozen, from_py_object, eq, module = "mrdi_py")]
#[derive(Clone, PartialEq)]
struct PyMatrix(ExactMatrix);

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(ring: &PyRing, rows: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| to_element(&ring.0, x)).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        ExactMatrix::from_rows(&ring.0, rows).map(PyMatrix).map_err(py_err)
    }

    #[getter]
    fn ring(&self) -> PyRing {
        PyRing(self.0.parent().clone())
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn __getitem__(&self, py: Python<'_>, ij: (usize, usize)) -> PyResult<Py<PyAny>> {
        let (i, j) = ij;
        if i >= self.0.rows() || j >= self.0.cols() {
            return Err(pyo3::exceptions::PyIndexError::new_err("matrix index out of range"));
        }
        from_element(py, self.0.get(i, j))
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{} over {})", self.0.rows(), self.0.cols(), self.0.parent())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "MonomialMap", frozen, from_py_object, eq, module = "mrdi_py")]
#[derive(Clone, PartialEq)]
struct PyMonomialMap(algebra::MonomialMap);

#[pymethods]
impl PyMonomialMap {
    /// Sends the i-th variable of `source` to `images[i]`, a single term of `target`.
    #[new]
    fn new(source: &PyRing, target: &PyRing, images: Vec<PyPolynomial>) -> PyResult<Self> {
        let images = images.into_iter().map(|p| p.0).collect();
        algebra::MonomialMap::new(&source.0, &target.0, images).map(PyMonomialMap).map_err(py_err)
    }

    #[getter]
    fn source(&self) -> PyRing {
        PyRing(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> PyRing {
        PyRing(self.0.target().clone())
    }

    fn images(&self) -> Vec<PyPolynomial> {
        self.0.images().iter().cloned().map(PyPolynomial).collect()
    }

    fn __call__(&self, p: &PyPolynomial) -> PyResult<PyPolynomial> {
        algebra::evaluate_map(&self.0, &p.0).map(PyPolynomial).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("MonomialMap({} -> {})", self.0.source(), self.0.target())
    }
}

fn to_element(ring: &ContextHandle, x: &Bound<'_, PyAny>) -> PyResult<Element> {
    if let Ok(p) = x.extract::<PyRef<'_, PyPolynomial>>() {
        if p.0.parent() == ring {
            return Ok(Element::Poly(p.0.clone()));
        }
        if let Some(base) = ring.base() {
            // A polynomial over the base ring becomes a constant of `ring`.
            let c = to_element(base, x)?;
            return algebra::Polynomial::new(ring, [(Monomial::one(ring.arity()), c)])
                .map(Element::Poly)
                .map_err(py_err);
        }
        return Err(PyTypeError::new_err(format!("{} is not in {ring}", p.0)));
    }
    if let Ok(n) = x.extract::<BigInt>() {
        return Ok(ring.from_integer(&n));
    }
    if let Ok(q) = x.extract::<BigRational>() {
        if *ring == ContextHandle::rationals() {
            return Ok(Element::Rational(q));
        }
        return Err(PyTypeError::new_err(format!("a fraction is not an element of {ring}")));
    }
    Err(PyTypeError::new_err(format!("cannot convert {} to an element of {ring}", x.get_type().name()?)))
}

fn from_element(py: Python<'_>, e: &Element) -> PyResult<Py<PyAny>> {
    Ok(match e {
        Element::Integer(n) => n.into_pyobject(py)?.into_any().unbind(),
        Element::Rational(q) => q.into_pyobject(py)?.into_any().unbind(),
        Element::Residue(r) => r.into_pyobject(py)?.into_any().unbind(),
        Element::Poly(p) => Py::new(py, PyPolynomial(p.clone()))?.into_any(),
    })
}

fn to_value(x: &Bound<'_, PyAny>) -> PyResult<Value> {
    if let Ok(p) = x.extract::<PyRef<'_, PyPolynomial>>() {
        return Ok(Value::Polynomial(p.0.clone()));
    }
    if let Ok(m) = x.extract::<PyRef<'_, PyMatrix>>() {
        return Ok(Value::Matrix(m.0.clone()));
    }
    if let Ok(r) = x.extract::<PyRef<'_, PyRing>>() {
        return Ok(Value::Ring(r.0.clone()));
    }
    if let Ok(m) = x.extract::<PyRef<'_, PyMonomialMap>>() {
        return Ok(Value::MonomialMap(m.0.clone()));
    }
    if x.is_instance_of::<PyList>() {
        let items = x.try_iter()?.map(|i| to_value(&i?)).collect::<PyResult<Vec<_>>>()?;
        return Ok(Value::Vector(items));
    }
    if x.is_instance_of::<PyTuple>() {
        let items = x.try_iter()?.map(|i| to_value(&i?)).collect::<PyResult<Vec<_>>>()?;
        return Ok(Value::Tuple(items));
    }
    if let Ok(n) = x.extract::<BigInt>() {
        return Ok(Value::Integer(n));
    }
    if let Ok(q) = x.extract::<BigRational>() {
        return Ok(Value::Rational(q));
    }
    Err(PyTypeError::new_err(format!("cannot serialize {}", x.get_type().name()?)))
}

fn from_value(py: Python<'_>, v: Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Integer(n) => n.into_pyobject(py)?.into_any().unbind(),
        Value::Rational(q) => q.into_pyobject(py)?.into_any().unbind(),
        Value::Residue { value, .. } => value.into_pyobject(py)?.into_any().unbind(),
        Value::Polynomial(p) => Py::new(py, PyPolynomial(p))?.into_any(),
        Value::Matrix(m) => Py::new(py, PyMatrix(m))?.into_any(),
        Value::Ring(r) => Py::new(py, PyRing(r))?.into_any(),
        Value::MonomialMap(m) => Py::new(py, PyMonomialMap(m))?.into_any(),
        Value::Vector(items) => {
            let objs = items.into_iter().map(|i| from_value(py, i)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, objs)?.into_any().unbind()
        }
        Value::Tuple(items) => {
            let objs = items.into_iter().map(|i| from_value(py, i)).collect::<PyResult<Vec<_>>>()?;
            PyTuple::new(py, objs)?.into_any().unbind()
        }
    })
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "longterm" => Ok(Mode::LongTerm),
        "ipc" => Ok(Mode::Ipc),
        other => Err(PyValueError::new_err(format!("mode must be 'longterm' or 'ipc', got {other:?}"))),
    }
}

/// Serializes a value to mrdi text.
#[pyfunction]
#[pyo3(signature = (obj, mode = "longterm"))]
fn save(obj: &Bound<'_, PyAny>, mode: &str) -> PyResult<String> {
    let v = to_value(obj)?;
    let bytes = mrdi::save_bytes(&v, parse_mode(mode)?, &GLOBAL).map_err(py_err)?;
    String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Decodes mrdi text. IPC documents need their contexts already known to
/// this process.
#[pyfunction]
fn load(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let v = mrdi::load_bytes(text.as_bytes(), &GLOBAL).map_err(py_err)?;
    from_value(py, v)
}

/// Structural problems in a document as `"path: message"` lines; empty when valid.
#[pyfunction]
fn validate(text: &str) -> Vec<String> {
    match mrdi::parse_text_unchecked(text.as_bytes()) {
        Err(e) => vec![format!("/: {e}")],
        Ok(doc) => match mrdi::validate_document(&doc) {
            Ok(()) => Vec::new(),
            Err(issues) => issues.iter().map(ToString::to_string).collect(),
        },
    }
}

fn make_pool(workers: usize, worker_bin: Option<String>) -> PyResult<Option<WorkerPool>> {
    if workers == 0 {
        return Ok(None);
    }
    let bin = worker_bin
        .or_else(|| std::env::var("MRDI_WORKER_BIN").ok())
        .ok_or_else(|| PyValueError::new_err("workers > 0 needs worker_bin or MRDI_WORKER_BIN"))?;
    WorkerPool::spawn(workers, &WorkerCommand::new(bin), GLOBAL.clone()).map(Some).map_err(py_err)
}

/// Determinant of a square matrix over ZZ[t] by modular images and CRT.
#[pyfunction]
#[pyo3(signature = (matrix, workers = 0, worker_bin = None, heuristic = false))]
fn modular_determinant(
    py: Python<'_>,
    matrix: &PyMatrix,
    workers: usize,
    worker_bin: Option<String>,
    heuristic: bool,
) -> PyResult<PyPolynomial> {
    let pool = make_pool(workers, worker_bin)?;
    let m = matrix.0.clone();
    let opts = DetOptions { heuristic, ..Default::default() };
    let (det, _) = py
        .detach(|| workloads::modular_determinant_with(&m, pool.as_ref(), &opts))
        .map_err(py_err)?;
    Ok(PyPolynomial(det))
}

/// Kernel components of `phi` up to total degree `d`, as
/// `[(multidegree, [generators])]` sorted by multidegree.
#[pyfunction]
#[pyo3(signature = (phi, d, workers = 0, worker_bin = None, minimalize = true))]
fn components_of_kernel(
    py: Python<'_>,
    phi: &PyMonomialMap,
    d: u32,
    workers: usize,
    worker_bin: Option<String>,
    minimalize: bool,
) -> PyResult<Vec<(Vec<i64>, Vec<PyPolynomial>)>> {
    let pool = make_pool(workers, worker_bin)?;
    let map = phi.0.clone();
    let comps = py
        .detach(|| workloads::components_of_kernel(&map, d, pool.as_ref(), minimalize))
        .map_err(py_err)?;
    Ok(comps
        .into_iter()
        .map(|(md, gens)| (md.0, gens.into_iter().map(PyPolynomial).collect()))
        .collect())
}

/// The integer in (-M/2, M/2] congruent to each residue, M the product of the moduli.
#[pyfunction]
fn crt_combine_balanced(residues: Vec<BigInt>, moduli: Vec<BigInt>) -> PyResult<BigInt> {
    algebra::crt_combine_balanced(&residues, &moduli).map_err(py_err)
}

#[pymodule]
fn mrdi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRing>()?;
    m.add_class::<PyPolynomial>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyMonomialMap>()?;
    m.add_function(wrap_pyfunction!(save, m)?)?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(modular_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(components_of_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(crt_combine_balanced, m)?)?;
    m.add("SYSTEM_VERSION", mrdi::SYSTEM_VERSION)?;
    Ok(())
}
