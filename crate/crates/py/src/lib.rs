//! Python bindings: classification verdicts, word combinatorics, certificate
//! construction and verification, refutation transcripts, the feasibility
//! solver, and the dense-matrix oracle. Matrices cross the boundary as nested
//! lists of floats; certificates as their text serialization.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyAny, PyDict, PyModule};
use serde_json::Value;

use conditionh::classify as cls;
use conditionh::feasibility::{FeasibilityProblem, SolveOptions, SolveStatus};
use conditionh::gram;
use conditionh::matrixcheck;
use conditionh::words;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_word(s: &str) -> PyResult<words::BitString> {
    let bits: Vec<u8> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(value_err(format!("invalid bit {other:?} in word {s:?}"))),
        })
        .collect::<PyResult<_>>()?;
    words::BitString::from_bits(bits).map_err(value_err)
}

fn case_params(p: usize, r: usize) -> PyResult<words::CaseParams> {
    words::CaseParams::new(p, r).map_err(value_err)
}

fn to_dmatrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|row| row.len() != n) {
        return Err(value_err("matrix must be square (list of equal-length rows)"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_dmatrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn json_to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    match value {
        Value::String(s) => Ok(s.into_pyobject(py)?.into_any()),
        Value::Number(n) => {
            let n = n.as_u64().expect("verdict JSON uses unsigned integers");
            Ok(n.into_pyobject(py)?.into_any())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, val) in map {
                dict.set_item(key, json_to_py(py, val)?)?;
            }
            Ok(dict.into_any())
        }
        other => Err(value_err(format!("unexpected JSON value {other}"))),
    }
}

/// Verdict for one cell of the classification table, as a dict.
#[pyfunction]
fn classify(py: Python<'_>, p: usize, r: usize) -> PyResult<Py<PyAny>> {
    let verdict = cls::classify(p, r).map_err(value_err)?;
    Ok(json_to_py(py, &verdict.json())?.unbind())
}

/// The full fixed-format classification table for 1 <= p <= max_p.
#[pyfunction]
fn classification_table(max_p: usize) -> String {
    cls::table(max_p)
}

/// Number of cyclic classes of length-p weight-r binary words.
#[pyfunction]
fn necklace_count(p: usize, r: usize) -> PyResult<u64> {
    words::necklace_count(p, r).map_err(value_err)
}

/// Lexicographically least rotation of a word, with its orbit size.
#[pyfunction]
fn canonical_necklace(word: &str) -> PyResult<(String, usize)> {
    let necklace = words::orbit(&parse_word(word)?);
    Ok((necklace.canonical().to_string(), necklace.orbit_size()))
}

/// All cyclic classes of length-p weight-r words as (canonical, orbit size).
#[pyfunction]
fn enumerate_necklaces(p: usize, r: usize) -> PyResult<Vec<(String, usize)>> {
    Ok(words::enumerate_necklaces(p, r)
        .map_err(value_err)?
        .into_iter()
        .map(|n| (n.canonical().to_string(), n.orbit_size()))
        .collect())
}

/// The merged word of a half-word pair (u, v) at parameters (p, r).
#[pyfunction]
fn sigma(u: &str, v: &str, p: usize, r: usize) -> PyResult<String> {
    let params = case_params(p, r)?;
    words::sigma(&parse_word(u)?, &parse_word(v)?, &params)
        .map(|w| w.to_string())
        .map_err(value_err)
}

/// All ordered pairs (u, v) whose merged word lies in the cyclic class of
/// `word`, sorted lexicographically.
#[pyfunction]
fn preimage(word: &str, p: usize, r: usize) -> PyResult<Vec<(String, String)>> {
    let params = case_params(p, r)?;
    let necklace = words::orbit(&parse_word(word)?);
    Ok(words::preimage(&necklace, &params)
        .map_err(value_err)?
        .into_iter()
        .map(|(u, v)| (u.to_string(), v.to_string()))
        .collect())
}

/// (preimage size, orbit size) for the merged word of (u, v).
#[pyfunction]
fn pair_counts(u: &str, v: &str, p: usize, r: usize) -> PyResult<(usize, usize)> {
    let params = case_params(p, r)?;
    let counts =
        words::pair_counts(&parse_word(u)?, &parse_word(v)?, &params).map_err(value_err)?;
    Ok((counts.preimage_size, counts.orbit_size))
}

/// Builds the named certificate (R1, RPM2, PARTITION, P11R3, CASE2_R1,
/// CASE2_RPM1, or RP) and returns its text serialization.
#[pyfunction]
fn build_certificate(kind: &str, p: usize, r: usize) -> PyResult<String> {
    let cert = if kind == "RP" {
        if r != p {
            return Err(value_err(format!(
                "certificate kind RP requires r = p; got p={p}, r={r}"
            )));
        }
        gram::build_rp_singleton(p).map_err(value_err)?
    } else {
        let kind: gram::CertKind = kind.parse().map_err(value_err)?;
        gram::build_certificate(kind, p, r).map_err(value_err)?
    };
    Ok(gram::write_certificate(&cert))
}

/// Exact verification of a certificate text: (verified, message).
#[pyfunction]
fn verify_certificate(text: &str) -> (bool, String) {
    let cert = match gram::parse_certificate(text) {
        Ok(cert) => cert,
        Err(e) => return (false, e.to_string()),
    };
    match gram::verify_certificate(&cert) {
        gram::CertVerification::Verified => (
            true,
            format!(
                "VERIFIED p={} r={} dim={}",
                cert.params().p(),
                cert.params().r(),
                cert.dim()
            ),
        ),
        gram::CertVerification::Rejected(reason) => (false, reason.to_string()),
    }
}

/// The machine-checkable refutation transcript for a failing cell, including
/// the partner header when the argument runs at the interchange partner.
#[pyfunction]
fn refutation_transcript(p: usize, r: usize) -> PyResult<String> {
    let cell = cls::refute_cell(p, r).map_err(value_err)?;
    let mut text = String::new();
    if let Some((pp, pr)) = cell.partner {
        text.push_str(&format!(
            "refutation runs at the interchange partner ({pp},{pr}) of ({p},{r})\n"
        ));
    }
    text.push_str(&cell.refutation.to_string());
    Ok(text)
}

/// Runs the feasibility solver; returns a dict with status, residual,
/// iterations, the solved cell, and (optionally) a rationalized certificate.
#[pyfunction]
#[pyo3(signature = (p, r, tol=1e-10, max_iters=50_000, rationalize=false))]
fn sdp_report(
    py: Python<'_>,
    p: usize,
    r: usize,
    tol: f64,
    max_iters: usize,
    rationalize: bool,
) -> PyResult<Py<PyDict>> {
    if p == 0 || r > p {
        return Err(value_err(format!("need p >= 1 and 0 <= r <= p; got p={p}, r={r}")));
    }
    let (sp, sr) = if r % 2 == 1 {
        (p, r)
    } else if p % 2 == 1 {
        (p, p - r)
    } else {
        return Err(value_err(
            "no odd-parameter formulation exists when p and r are both even",
        ));
    };
    let params = case_params(sp, sr)?;
    let problem = FeasibilityProblem::assemble(&params).map_err(value_err)?;
    let report = problem.solve(&SolveOptions { tol, max_iterations: max_iters });
    let dict = PyDict::new(py);
    dict.set_item("p", sp)?;
    dict.set_item("r", sr)?;
    dict.set_item("status", report.status.to_string())?;
    dict.set_item("residual", report.residual)?;
    dict.set_item("iterations", report.iterations)?;
    if rationalize && report.status == SolveStatus::Feasible {
        let cert = problem.rationalize_and_verify(&report.matrix).map_err(value_err)?;
        dict.set_item("certificate", gram::write_certificate(&cert))?;
    }
    Ok(dict.unbind())
}

/// Coefficient of t^r in Tr (A + tB)^p, cross-checked between word enumeration
/// and exact interpolation.
#[pyfunction]
fn alpha_coeff(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, p: usize, r: usize) -> PyResult<f64> {
    matrixcheck::alpha_coeff(&to_dmatrix(a)?, &to_dmatrix(b)?, p, r).map_err(value_err)
}

/// The certificate's value of the coefficient on concrete matrices.
#[pyfunction]
fn certificate_trace_value(cert_text: &str, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    let cert = gram::parse_certificate(cert_text).map_err(value_err)?;
    matrixcheck::certificate_trace_value(&cert, &to_dmatrix(a)?, &to_dmatrix(b)?)
        .map_err(value_err)
}

/// Deterministic random positive semidefinite matrix.
#[pyfunction]
fn random_psd(n: usize, seed: u64) -> Vec<Vec<f64>> {
    from_dmatrix(&matrixcheck::random_psd(n, seed))
}

/// Whether coefficient nonnegativity at (p, r) follows from certified cells
/// with first coordinate <= bound: "NONNEG_PROVED via (p,r)" or "OPEN".
#[pyfunction]
fn bmv_status(p: usize, r: usize, bound: usize) -> PyResult<String> {
    Ok(cls::bmv_status(p, r, bound).map_err(value_err)?.to_string())
}

#[pymodule]
fn conditionh_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classification_table, m)?)?;
    m.add_function(wrap_pyfunction!(necklace_count, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_necklace, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_necklaces, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(preimage, m)?)?;
    m.add_function(wrap_pyfunction!(pair_counts, m)?)?;
    m.add_function(wrap_pyfunction!(build_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(refutation_transcript, m)?)?;
    m.add_function(wrap_pyfunction!(sdp_report, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(certificate_trace_value, m)?)?;
    m.add_function(wrap_pyfunction!(random_psd, m)?)?;
    m.add_function(wrap_pyfunction!(bmv_status, m)?)?;
    Ok(())
}
