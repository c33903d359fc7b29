//! Python bindings: quaternions, quaternion matrices, spectra and the Floquet
//! and Hill analyses.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qfloquet::floquet::{self, multiplier_product_check};
use qfloquet::hill::{self, HillProblem};
use qfloquet::{IntegratorConfig, MatrixSpec, QMatrix, Quaternion, StabilityVerdict, StandardSpectrum};

create_exception!(qfloquet_py, NumericalError, PyException, "A numerical routine failed.");

fn to_py(e: qfloquet::Error) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Quaternion", module = "qfloquet_py", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyQuaternion(Quaternion);

/// A quaternion argument: a `Quaternion`, a real number, or a 4-tuple.
#[derive(FromPyObject)]
enum QuatArg {
    Quat(PyQuaternion),
    Real(f64),
    Components((f64, f64, f64, f64)),
}

impl From<QuatArg> for Quaternion {
    fn from(a: QuatArg) -> Self {
        match a {
            QuatArg::Quat(q) => q.0,
            QuatArg::Real(x) => Quaternion::real(x),
            QuatArg::Components((a, b, c, d)) => Quaternion::new(a, b, c, d),
        }
    }
}

#[pymethods]
impl PyQuaternion {
    #[new]
    #[pyo3(signature = (q0 = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0))]
    fn new(q0: f64, q1: f64, q2: f64, q3: f64) -> Self {
        PyQuaternion(Quaternion::new(q0, q1, q2, q3))
    }

    #[getter]
    fn q0(&self) -> f64 {
        self.0.q0
    }
    #[getter]
    fn q1(&self) -> f64 {
        self.0.q1
    }
    #[getter]
    fn q2(&self) -> f64 {
        self.0.q2
    }
    #[getter]
    fn q3(&self) -> f64 {
        self.0.q3
    }

    fn components(&self) -> (f64, f64, f64, f64) {
        let [a, b, c, d] = self.0.components();
        (a, b, c, d)
    }

    fn conj(&self) -> Self {
        PyQuaternion(self.0.conj())
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(PyQuaternion).map_err(to_py)
    }

    fn exp(&self) -> Self {
        PyQuaternion(self.0.exp())
    }

    /// The complex representative `a + |Ve q| i` of the similarity class.
    fn standardize(&self) -> Complex64 {
        self.0.standardize().into()
    }

    fn similar(&self, other: QuatArg) -> bool {
        qfloquet::similar(self.0, other.into())
    }

    fn __add__(&self, other: QuatArg) -> Self {
        PyQuaternion(self.0 + Quaternion::from(other))
    }

    fn __radd__(&self, other: QuatArg) -> Self {
        PyQuaternion(Quaternion::from(other) + self.0)
    }

    fn __sub__(&self, other: QuatArg) -> Self {
        PyQuaternion(self.0 - Quaternion::from(other))
    }

    fn __rsub__(&self, other: QuatArg) -> Self {
        PyQuaternion(Quaternion::from(other) - self.0)
    }

    fn __mul__(&self, other: QuatArg) -> Self {
        PyQuaternion(self.0 * Quaternion::from(other))
    }

    fn __rmul__(&self, other: QuatArg) -> Self {
        PyQuaternion(Quaternion::from(other) * self.0)
    }

    fn __neg__(&self) -> Self {
        PyQuaternion(-self.0)
    }

    fn __abs__(&self) -> f64 {
        self.0.norm()
    }

    fn __eq__(&self, other: QuatArg) -> bool {
        self.0 == Quaternion::from(other)
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d] = self.0.components();
        format!("Quaternion({a:?}, {b:?}, {c:?}, {d:?})")
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "QMatrix", module = "qfloquet_py", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyQMatrix(QMatrix);

#[pymethods]
impl PyQMatrix {
    /// Builds a matrix from rows of quaternions, reals or 4-tuples.
    #[new]
    fn new(rows: Vec<Vec<QuatArg>>) -> PyResult<Self> {
        let rows = rows.into_iter().map(|r| r.into_iter().map(Quaternion::from).collect()).collect();
        QMatrix::from_rows(rows).map(PyQMatrix).map_err(to_py)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyQMatrix(QMatrix::identity(n))
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.rows(), self.0.cols())
    }

    fn rows(&self) -> Vec<Vec<PyQuaternion>> {
        self.0.to_rows().into_iter().map(|r| r.into_iter().map(PyQuaternion).collect()).collect()
    }

    fn __getitem__(&self, idx: (usize, usize)) -> PyResult<PyQuaternion> {
        let (r, c) = idx;
        if r >= self.0.rows() || c >= self.0.cols() {
            return Err(PyIndexError::new_err(format!("index ({r}, {c}) out of range")));
        }
        Ok(PyQuaternion(self.0.to_rows()[r][c]))
    }

    /// The `2n×2n` complex adjoint matrix.
    fn adjoint(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let chi = self.0.adjoint().map_err(to_py)?.into_complex();
        Ok((0..chi.nrows()).map(|r| (0..chi.ncols()).map(|c| chi[(r, c)]).collect()).collect())
    }

    fn qdet(&self) -> PyResult<f64> {
        self.0.qdet().map_err(to_py)
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(PyQMatrix).map_err(to_py)
    }

    fn expm(&self) -> PyResult<Self> {
        qfloquet::expm(&self.0).map(PyQMatrix).map_err(to_py)
    }

    fn logm(&self) -> PyResult<Self> {
        qfloquet::logm(&self.0).map(PyQMatrix).map_err(to_py)
    }

    fn frobenius_sq(&self) -> f64 {
        self.0.frobenius_sq()
    }

    fn trace(&self) -> PyQuaternion {
        PyQuaternion(self.0.trace())
    }

    fn conj_transpose(&self) -> Self {
        PyQMatrix(self.0.conj_transpose())
    }

    /// Standard eigenvalues as `(value, algebraic, geometric)` triples.
    fn standard_eigenvalues(&self) -> PyResult<Vec<(Complex64, usize, usize)>> {
        qfloquet::standard_eigenvalues(&self.0).map(|s| spectrum(&s)).map_err(to_py)
    }

    fn right_eigenvector(&self, value: Complex64) -> PyResult<Vec<PyQuaternion>> {
        qfloquet::right_eigenvector(&self.0, value.into()).map(|v| v.into_iter().map(PyQuaternion).collect()).map_err(to_py)
    }

    fn __add__(&self, other: &PyQMatrix) -> PyResult<Self> {
        self.check_shape(other)?;
        Ok(PyQMatrix(&self.0 + &other.0))
    }

    fn __sub__(&self, other: &PyQMatrix) -> PyResult<Self> {
        self.check_shape(other)?;
        Ok(PyQMatrix(&self.0 - &other.0))
    }

    fn __matmul__(&self, other: &PyQMatrix) -> PyResult<Self> {
        if self.0.cols() != other.0.rows() {
            return Err(PyValueError::new_err(format!("cannot multiply {:?} by {:?}", self.shape(), other.shape())));
        }
        Ok(PyQMatrix(&self.0 * &other.0))
    }

    fn __eq__(&self, other: &PyQMatrix) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("QMatrix({:?})", self.rows().iter().map(|r| r.iter().map(|q| q.components()).collect::<Vec<_>>()).collect::<Vec<_>>())
    }
}

impl PyQMatrix {
    fn check_shape(&self, other: &PyQMatrix) -> PyResult<()> {
        if self.shape() != other.shape() {
            return Err(PyValueError::new_err(format!("shape mismatch {:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }
}

fn spectrum(s: &StandardSpectrum) -> Vec<(Complex64, usize, usize)> {
    s.entries.iter().map(|e| (e.value.into(), e.algebraic, e.geometric)).collect()
}

fn kind(v: &StabilityVerdict) -> String {
    format!("{:?}", v.kind)
}

fn integrator(rtol: Option<f64>, atol: Option<f64>) -> IntegratorConfig {
    let d = IntegratorConfig::default();
    IntegratorConfig::with_tolerances(rtol.unwrap_or(d.rel_tol), atol.unwrap_or(d.abs_tol))
}

/// Evaluates an expression such as `"i + 2*exp(2*i*t)*j"` at time `t`.
#[pyfunction]
#[pyo3(signature = (src, t = 0.0))]
fn eval_expr(src: &str, t: f64) -> PyResult<PyQuaternion> {
    let e = qfloquet::parse(src).map_err(to_py)?;
    e.eval(t).map(PyQuaternion).map_err(to_py)
}

/// Stability of `x' = A x`: `"AsymptoticallyStable"`, `"Stable"`, `"Unstable"` or `"Undetermined"`.
#[pyfunction]
fn classify_constant(a: &PyQMatrix) -> PyResult<String> {
    floquet::classify_constant(&a.0).map(|v| kind(&v)).map_err(to_py)
}

/// Floquet analysis of `x' = A(t) x` with entries given as expressions in `t`.
#[pyfunction]
#[pyo3(signature = (entries, period, rtol = None, atol = None))]
fn analyze_periodic<'py>(
    py: Python<'py>,
    entries: Vec<Vec<String>>,
    period: f64,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = MatrixSpec::parse(&entries, Some(period)).map_err(to_py)?;
    let fd = qfloquet::normal_form(&spec, &integrator(rtol, atol)).map_err(to_py)?;
    let check = multiplier_product_check(&fd, &spec).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("monodromy", PyQMatrix(fd.monodromy.clone()))?;
    d.set_item("b", PyQMatrix(fd.b.clone()))?;
    d.set_item("multipliers", spectrum(&fd.multipliers))?;
    d.set_item("exponents", fd.exponents.iter().map(|&z| Complex64::from(z)).collect::<Vec<_>>())?;
    d.set_item("b_spectrum", spectrum(&fd.b_spectrum))?;
    d.set_item("periodicity_residual", fd.periodicity_residual)?;
    d.set_item("product_residual", check.product_residual)?;
    d.set_item("verdict", kind(&floquet::classify_periodic(&fd)))?;
    Ok(d)
}

/// Analysis of the Hill equation `x'' + a(t) x = 0` with period `period`.
#[pyfunction]
#[pyo3(signature = (a, period, rtol = None, atol = None))]
fn analyze_hill<'py>(py: Python<'py>, a: &str, period: f64, rtol: Option<f64>, atol: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let problem = HillProblem::parse(a, period).map_err(to_py)?;
    let r = hill::analyze(&problem, &integrator(rtol, atol)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("monodromy", PyQMatrix(r.monodromy.clone()))?;
    d.set_item("re_trace", r.re_trace)?;
    d.set_item("frob_sq", r.frob_sq)?;
    d.set_item("qdet", r.qdet)?;
    d.set_item("multipliers", spectrum(&r.multipliers))?;
    d.set_item("kappa", (r.k.kappa[0], r.k.kappa[1]))?;
    d.set_item("verdict_trace", kind(&r.verdict_trace))?;
    d.set_item("verdict_frobenius", kind(&r.verdict_frobenius))?;
    d.set_item("verdict_multipliers", kind(&r.verdict_multipliers))?;
    Ok(d)
}

#[pymodule]
fn qfloquet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuaternion>()?;
    m.add_class::<PyQMatrix>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(eval_expr, m)?)?;
    m.add_function(wrap_pyfunction!(classify_constant, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_periodic, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_hill, m)?)?;
    Ok(())
}
