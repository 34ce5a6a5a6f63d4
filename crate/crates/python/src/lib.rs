//! Python bindings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nsmac::characters::{char_module, CharKind, Weight};
use nsmac::exact::QSeries;
use nsmac::identities::{verify_identity, IdentityVariant};
use nsmac::macdonald::{self, MacdonaldPolynomial, Specialization};
use nsmac::series::TruncationPolicy;
use nsmac::weights::Composition;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn series_coeffs(s: &QSeries) -> Vec<String> {
    s.coeffs().iter().map(|c| c.to_string()).collect()
}

/// `E_lambda` under a specialization; coefficients are exact and rendered as strings.
#[pyclass(name = "MacdonaldPolynomial", frozen)]
pub struct PyMacdonaldPolynomial {
    inner: MacdonaldPolynomial,
}

#[pymethods]
impl PyMacdonaldPolynomial {
    #[getter]
    fn lambda_(&self) -> Vec<u32> {
        self.inner.lambda.parts().to_vec()
    }

    #[getter]
    fn spec(&self) -> &'static str {
        self.inner.spec.name()
    }

    /// `(exponents, coefficient)` pairs in increasing monomial order.
    fn terms(&self) -> Vec<(Vec<u32>, String)> {
        self.inner.terms.iter().map(|(m, c)| (m.clone(), c.to_string())).collect()
    }

    fn coeff(&self, exps: Vec<u32>) -> String {
        self.inner.coeff(&exps).to_string()
    }

    fn is_homogeneous(&self) -> bool {
        self.inner.is_homogeneous()
    }

    fn __len__(&self) -> usize {
        self.inner.terms.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("MacdonaldPolynomial(lambda={}, spec={})", self.inner.lambda, self.inner.spec.name())
    }
}

#[pyfunction]
#[pyo3(signature = (lambda_, spec = "qt"))]
fn macdonald_e(lambda_: Vec<u32>, spec: &str) -> PyResult<PyMacdonaldPolynomial> {
    let spec = match spec {
        "qt" => Specialization::Generic,
        "q0" => Specialization::Q0T0,
        other => Specialization::parse(other).ok_or_else(|| err(format!("unknown specialization {other:?}")))?,
    };
    let inner = macdonald::e_specialized(&Composition::new(lambda_), spec).map_err(err)?;
    Ok(PyMacdonaldPolynomial { inner })
}

/// Coefficients of `a_lambda(q)` up to `q^max_q`.
#[pyfunction]
#[pyo3(signature = (lambda_, max_q, alt = false))]
fn norm_a_q(lambda_: Vec<u32>, max_q: u32, alt: bool) -> Vec<String> {
    let l = Composition::new(lambda_);
    let s = if alt { macdonald::norm_a_q_alt(&l, max_q) } else { macdonald::norm_a_q(&l, max_q) };
    let mut c = series_coeffs(&s);
    c.resize(max_q as usize + 1, "0".into());
    c
}

#[pyfunction]
fn norm_a_qt(lambda_: Vec<u32>) -> String {
    macdonald::norm_a_qt(&Composition::new(lambda_)).to_string()
}

#[pyclass(name = "VerificationReport", frozen)]
pub struct PyVerificationReport {
    #[pyo3(get)]
    variant: String,
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    passed: bool,
    #[pyo3(get)]
    lambda_count: usize,
    #[pyo3(get)]
    elapsed: f64,
    json: String,
    text: String,
}

#[pymethods]
impl PyVerificationReport {
    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("VerificationReport(variant={:?}, n={}, passed={})", self.variant, self.n, self.passed)
    }
}

#[pyfunction]
#[pyo3(signature = (identity, n, max_deg, max_q = None, jobs = 1))]
fn verify(py: Python<'_>, identity: &str, n: usize, max_deg: u32, max_q: Option<u32>, jobs: usize) -> PyResult<PyVerificationReport> {
    let variant = IdentityVariant::parse(identity).ok_or_else(|| err(format!("unknown identity {identity:?}")))?;
    let policy = TruncationPolicy::degree(max_deg, max_q);
    let r = py.detach(|| verify_identity(variant, n, policy, jobs)).map_err(err)?;
    Ok(PyVerificationReport {
        variant: r.variant.tag().to_string(),
        n: r.n,
        passed: r.passed(),
        lambda_count: r.lambda_count,
        elapsed: r.elapsed.as_secs_f64(),
        json: r.to_json().to_string(),
        text: r.to_text(),
    })
}

/// Character of the module of `kind` as a JSON list of `{exps, coeff}` terms.
#[pyfunction]
#[pyo3(signature = (kind, lambda_, max_deg, max_q, sl = false))]
fn character(kind: &str, lambda_: Vec<u32>, max_deg: u32, max_q: u32, sl: bool) -> PyResult<String> {
    let kind = CharKind::parse(kind).ok_or_else(|| err(format!("unknown character kind {kind:?}")))?;
    let l = Composition::new(lambda_);
    let w = if sl { Weight::Sl(l.restrict()) } else { Weight::Gl(l) };
    let ch = char_module(kind, &w, TruncationPolicy::degree(max_deg, Some(max_q))).map_err(err)?;
    Ok(ch.series.to_json().to_string())
}

#[pymodule]
pub fn nsmac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMacdonaldPolynomial>()?;
    m.add_class::<PyVerificationReport>()?;
    m.add_function(wrap_pyfunction!(macdonald_e, m)?)?;
    m.add_function(wrap_pyfunction!(norm_a_q, m)?)?;
    m.add_function(wrap_pyfunction!(norm_a_qt, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(character, m)?)?;
    Ok(())
}
