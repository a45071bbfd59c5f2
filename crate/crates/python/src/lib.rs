//! Python bindings for `meanomega_core`.
//!
//! Exact rationals come back as `fractions.Fraction`, complex arguments and
//! results use Python's `complex`.

use std::path::PathBuf;

use meanomega_core::dirichlet;
use meanomega_core::euler::{self, EulerConstantResult, Method, Variant};
use meanomega_core::sieve::{self, ExactRational, OmegaBuckets, DEFAULT_SEGMENT_SIZE};
use meanomega_core::verify::{self, LemmaReport};
use meanomega_core::{cache, special, Error};
use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Precondition(_) => PyValueError::new_err(e.to_string()),
        Error::NonConvergence(_) => PyRuntimeError::new_err(e.to_string()),
        Error::Overflow { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) | Error::Cache { .. } => PyOSError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &ExactRational) -> PyResult<Bound<'py, PyAny>> {
    let num: BigInt = r.numer().clone();
    let den: BigInt = r.denom().clone();
    py.import("fractions")?.getattr("Fraction")?.call1((num, den))
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| PyValueError::new_err(e.to_string()))
}

/// Cumulative `T_w(x)`: the sum of `d(n)` over `n <= x` with `omega(n) = w`.
#[pyclass(name = "OmegaBuckets", frozen)]
struct PyOmegaBuckets {
    inner: OmegaBuckets,
}

#[pymethods]
impl PyOmegaBuckets {
    #[new]
    fn new(x: u64, t: Vec<u64>) -> Self {
        Self {
            inner: OmegaBuckets { x, t },
        }
    }

    #[getter]
    fn x(&self) -> u64 {
        self.inner.x
    }

    #[getter]
    fn t(&self) -> Vec<u64> {
        self.inner.t.clone()
    }

    fn max_omega(&self) -> usize {
        self.inner.max_omega()
    }

    fn divisor_sum(&self) -> u64 {
        self.inner.divisor_sum()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("OmegaBuckets(x={}, t={:?})", self.inner.x, self.inner.t)
    }
}

fn unwrap_buckets(b: &[PyRef<'_, PyOmegaBuckets>]) -> Vec<OmegaBuckets> {
    b.iter().map(|b| b.inner.clone()).collect()
}

#[pyclass(name = "EulerConstant", frozen)]
struct PyEulerConstant {
    inner: EulerConstantResult,
}

#[pymethods]
impl PyEulerConstant {
    #[getter]
    fn k(&self) -> u32 {
        self.inner.k
    }

    #[getter]
    fn variant(&self) -> String {
        self.inner.variant.to_string()
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.to_string()
    }

    #[getter]
    fn truncation(&self) -> String {
        self.inner.truncation.to_string()
    }

    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn tail_estimate(&self) -> f64 {
        self.inner.tail_estimate
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "EulerConstant(k={}, variant={}, method={}, truncation={}, value={:?}, tail_estimate={:e})",
            c.k, c.variant, c.method, c.truncation, c.value, c.tail_estimate
        )
    }
}

#[pyclass(name = "LemmaReport", frozen)]
struct PyLemmaReport {
    inner: LemmaReport,
}

#[pymethods]
impl PyLemmaReport {
    #[getter]
    fn lemma(&self) -> String {
        self.inner.lemma.to_string()
    }

    #[getter]
    fn measured(&self) -> Vec<f64> {
        self.inner.measured.clone()
    }

    #[getter]
    fn bound(&self) -> Vec<f64> {
        self.inner.bound.clone()
    }

    #[getter]
    fn criterion(&self) -> String {
        format!("{:?}", self.inner.criterion).to_lowercase()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.inner.pass
    }

    #[getter]
    fn detail(&self) -> String {
        self.inner.detail.clone()
    }

    fn recompute_pass(&self) -> bool {
        self.inner.recompute_pass()
    }

    fn __bool__(&self) -> bool {
        self.inner.pass
    }

    fn __repr__(&self) -> String {
        let status = if self.inner.pass { "PASS" } else { "FAIL" };
        format!("LemmaReport({} {status}: {})", self.inner.lemma, self.inner.detail)
    }
}

fn report(r: LemmaReport) -> PyLemmaReport {
    PyLemmaReport { inner: r }
}

/// `[(p, e), ...]` with `p` ascending.
#[pyfunction]
fn factorize(n: u64) -> PyResult<Vec<(u64, u32)>> {
    Ok(sieve::factorize(n).map_err(to_py)?.factors)
}

/// `d(n) / k^omega(n)` as a Fraction.
#[pyfunction]
fn dkw_value(py: Python<'_>, k: u32, n: u64) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &sieve::dkw_value(k, n).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (x_max, checkpoints, segment_size = DEFAULT_SEGMENT_SIZE, threads = None))]
fn accumulate_buckets(
    py: Python<'_>,
    x_max: u64,
    checkpoints: Vec<u64>,
    segment_size: usize,
    threads: Option<usize>,
) -> PyResult<Vec<PyOmegaBuckets>> {
    let out = py.detach(|| match threads {
        Some(t) => sieve::accumulate_buckets_with_threads(x_max, &checkpoints, segment_size, t),
        None => sieve::accumulate_buckets(x_max, &checkpoints, segment_size),
    });
    Ok(out
        .map_err(to_py)?
        .into_iter()
        .map(|inner| PyOmegaBuckets { inner })
        .collect())
}

/// `(S_k(x) as Fraction, float)`.
#[pyfunction]
fn exact_mean_sum<'py>(py: Python<'py>, buckets: &PyOmegaBuckets, k: u32) -> PyResult<(Bound<'py, PyAny>, f64)> {
    let (r, f) = sieve::exact_mean_sum(&buckets.inner, k).map_err(to_py)?;
    Ok((fraction(py, &r)?, f))
}

#[pyfunction]
fn hyperbola_divisor_sum(x: u64) -> u64 {
    sieve::hyperbola_divisor_sum(x)
}

#[pyfunction]
fn save_buckets(path: PathBuf, buckets: Vec<PyRef<'_, PyOmegaBuckets>>) -> PyResult<()> {
    cache::save(&path, &unwrap_buckets(&buckets)).map_err(to_py)
}

#[pyfunction]
fn load_buckets(path: PathBuf) -> PyResult<Vec<PyOmegaBuckets>> {
    Ok(cache::load(&path)
        .map_err(to_py)?
        .into_iter()
        .map(|inner| PyOmegaBuckets { inner })
        .collect())
}

#[pyfunction]
fn gamma_real(z: f64) -> PyResult<f64> {
    special::gamma_real(z).map_err(to_py)
}

#[pyfunction]
fn zeta_real(s: f64) -> PyResult<f64> {
    special::zeta_real(s).map_err(to_py)
}

/// `sum_{p > exclude_below} p^-s`.
#[pyfunction]
#[pyo3(signature = (s, exclude_below = 1))]
fn prime_zeta(s: f64, exclude_below: u64) -> PyResult<f64> {
    euler::prime_zeta(s, exclude_below).map_err(to_py)
}

#[pyfunction]
fn h_value(k: u32, p: u64, s: Complex64) -> PyResult<Complex64> {
    dirichlet::h_value(k, p, s).map_err(to_py)
}

/// `g_k(p^alpha)` as a Fraction; independent of `p`.
#[pyfunction]
fn gk_pp(py: Python<'_>, k: u32, alpha: u32) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &dirichlet::gk_pp(k, alpha).map_err(to_py)?)
}

#[pyfunction]
fn tau_z_value(z: f64, n: u64) -> PyResult<f64> {
    dirichlet::tau_z_value(z, n).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (
    k,
    variant = "thm3",
    method = "series",
    prime_limit = verify::DEFAULT_PRIME_LIMIT,
    p0 = verify::DEFAULT_P0,
    order = verify::DEFAULT_SERIES_ORDER,
))]
fn euler_constant(
    py: Python<'_>,
    k: u32,
    variant: &str,
    method: &str,
    prime_limit: u64,
    p0: u64,
    order: usize,
) -> PyResult<PyEulerConstant> {
    let variant: Variant = parse(variant)?;
    let method: Method = parse(method)?;
    let inner = py
        .detach(|| match method {
            Method::Direct => euler::euler_constant_direct(k, variant, prime_limit),
            Method::Series => euler::euler_constant_series(k, variant, p0, order),
        })
        .map_err(to_py)?;
    Ok(PyEulerConstant { inner })
}

#[pyfunction]
fn lemma1_check(k: u32, xs: Vec<u64>) -> PyResult<PyLemmaReport> {
    verify::lemma1_check(k, &xs).map(report).map_err(to_py)
}

#[pyfunction]
fn lemma2_check(k: u32, xs: Vec<u64>) -> PyResult<PyLemmaReport> {
    verify::lemma2_check(k, &xs).map(report).map_err(to_py)
}

#[pyfunction]
fn lemma3_check(k: u32, x: u64) -> PyResult<PyLemmaReport> {
    verify::lemma3_check(k, x).map(report).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (k, x, alpha_max = verify::DEFAULT_ALPHA_MAX))]
fn lemma4_check(k: u32, x: u64, alpha_max: u32) -> PyResult<PyLemmaReport> {
    verify::lemma4_check(k, x, alpha_max).map(report).map_err(to_py)
}

#[pyfunction]
fn tauz_mean_check(z: f64, xs: Vec<u64>) -> PyResult<Vec<PyLemmaReport>> {
    Ok(verify::tauz_mean_check(z, &xs)
        .map_err(to_py)?
        .into_iter()
        .map(report)
        .collect())
}

#[pyfunction]
fn shiu_check(k: u32, buckets: Vec<PyRef<'_, PyOmegaBuckets>>) -> PyResult<PyLemmaReport> {
    verify::shiu_check(k, &unwrap_buckets(&buckets))
        .map(report)
        .map_err(to_py)
}

/// `(report, verdict)` with verdict one of `thm3`, `thm1`, `inconclusive`.
#[pyfunction]
fn discrepancy_check(k: u32, buckets: Vec<PyRef<'_, PyOmegaBuckets>>) -> PyResult<(PyLemmaReport, String)> {
    let out = verify::discrepancy_check(k, &unwrap_buckets(&buckets)).map_err(to_py)?;
    Ok((report(out.report), out.verdict.to_string()))
}

/// Rows `(x, S, M, ratio, e_norm)`.
#[pyfunction]
fn compare_series(
    k: u32,
    buckets: Vec<PyRef<'_, PyOmegaBuckets>>,
    constant: &PyEulerConstant,
) -> PyResult<Vec<(u64, f64, f64, f64, f64)>> {
    let rows = verify::compare_series(k, &unwrap_buckets(&buckets), &constant.inner).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.x, r.s, r.main, r.ratio, r.e_norm))
        .collect())
}

#[pymodule]
pub fn meanomega(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOmegaBuckets>()?;
    m.add_class::<PyEulerConstant>()?;
    m.add_class::<PyLemmaReport>()?;
    m.add_function(wrap_pyfunction!(factorize, m)?)?;
    m.add_function(wrap_pyfunction!(dkw_value, m)?)?;
    m.add_function(wrap_pyfunction!(accumulate_buckets, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mean_sum, m)?)?;
    m.add_function(wrap_pyfunction!(hyperbola_divisor_sum, m)?)?;
    m.add_function(wrap_pyfunction!(save_buckets, m)?)?;
    m.add_function(wrap_pyfunction!(load_buckets, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_real, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_real, m)?)?;
    m.add_function(wrap_pyfunction!(prime_zeta, m)?)?;
    m.add_function(wrap_pyfunction!(h_value, m)?)?;
    m.add_function(wrap_pyfunction!(gk_pp, m)?)?;
    m.add_function(wrap_pyfunction!(tau_z_value, m)?)?;
    m.add_function(wrap_pyfunction!(euler_constant, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_check, m)?)?;
    m.add_function(wrap_pyfunction!(lemma2_check, m)?)?;
    m.add_function(wrap_pyfunction!(lemma3_check, m)?)?;
    m.add_function(wrap_pyfunction!(lemma4_check, m)?)?;
    m.add_function(wrap_pyfunction!(tauz_mean_check, m)?)?;
    m.add_function(wrap_pyfunction!(shiu_check, m)?)?;
    m.add_function(wrap_pyfunction!(discrepancy_check, m)?)?;
    m.add_function(wrap_pyfunction!(compare_series, m)?)?;
    m.add("DEFAULT_SEGMENT_SIZE", DEFAULT_SEGMENT_SIZE)?;
    Ok(())
}
