//! Floating-point oracle for the trace inequality.
//!
//! Computes α_{p,r}(A,B), the coefficient of t^r in Tr(A+tB)^p, by direct word
//! enumeration, cross-checked against an independent interpolation route: the
//! float inputs are lifted exactly to scaled integer matrices (f64 entries are
//! dyadic), Tr((A+tB)^p) is evaluated exactly at t = 0..p, and an exact
//! Vandermonde solve extracts the coefficient. Certificates are evaluated as
//! trace quadratic forms on random positive semidefinite inputs and compared
//! against α.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::exact::{rat_from_f64, rat_to_f64, solve_linear};
use crate::gram::GramCertificate;
use crate::words::{enumerate_weighted_strings, sigma, BitString, WordsError};

#[derive(Debug, Error)]
pub enum MatrixCheckError {
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error("matrices must be square and of equal dimension: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("p must be in 1..=16 with 0 <= r <= p; got p={p}, r={r}")]
    InvalidRange { p: usize, r: usize },
    #[error(
        "coefficient methods disagree at (p={p}, r={r}): word enumeration {words}, interpolation {interpolation}"
    )]
    MethodDisagreement { p: usize, r: usize, words: f64, interpolation: f64 },
    #[error("trial seed={seed} failed: {detail}")]
    TrialFailed { seed: u64, detail: String },
}

/// Deterministic random PSD matrix M·Mᵀ with M entries uniform in (−1, 1).
pub fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
    assert!(n >= 1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| {
        ((rng.next_u64() >> 11) as f64) / (1u64 << 53) as f64 * 2.0 - 1.0
    });
    &m * m.transpose()
}

fn check_dims(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<usize, MatrixCheckError> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(MatrixCheckError::DimensionMismatch(a.nrows(), a.ncols(), b.nrows(), b.ncols()));
    }
    Ok(a.nrows())
}

/// Tr of the word product with letters 0 ↦ A, 1 ↦ B, evaluated left to right.
pub fn word_trace(word: &BitString, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut product = DMatrix::identity(n, n);
    for i in 0..word.len() {
        product *= if word.bit(i) == 1 { b } else { a };
    }
    product.trace()
}

/// Exact lift: every f64 entry is m·2^−e; returns integer entries and the common
/// scale s with float = int · 2^−s.
fn integer_lift(m: &DMatrix<f64>) -> (Vec<Vec<BigInt>>, u64) {
    let n = m.nrows();
    let rationals: Vec<Vec<BigRational>> =
        (0..n).map(|i| (0..n).map(|j| rat_from_f64(m[(i, j)])).collect()).collect();
    let scale = rationals
        .iter()
        .flatten()
        .map(|x| x.denom().bits() - 1)
        .max()
        .unwrap_or(0);
    let ints = rationals
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.numer() << (scale - (x.denom().bits() - 1)))
                .collect()
        })
        .collect();
    (ints, scale)
}

fn exact_trace_of_power(a: &[Vec<BigInt>], b: &[Vec<BigInt>], t: u64, p: usize) -> BigInt {
    let n = a.len();
    let t = BigInt::from(t);
    let base: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| &a[i][j] + &t * &b[i][j]).collect()).collect();
    let mut power = base.clone();
    for _ in 1..p {
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if power[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += &power[i][k] * &base[k][j];
                }
            }
        }
        power = next;
    }
    (0..n).map(|i| power[i][i].clone()).sum()
}

/// The t^r coefficient of Tr((A_int + t·B_int)^p) via exact evaluation at the
/// integer nodes 0..p and an exact Vandermonde solve.
fn interpolated_coefficient(
    a_int: &[Vec<BigInt>],
    b_int: &[Vec<BigInt>],
    p: usize,
    r: usize,
) -> BigRational {
    let nodes = p + 1;
    let mut vandermonde = vec![vec![BigRational::zero(); nodes]; nodes];
    let mut values = Vec::with_capacity(nodes);
    for (row, t) in (0..=p as u64).enumerate() {
        let mut power = BigRational::one();
        let tr = BigRational::from_integer(BigInt::from(t));
        for entry in vandermonde[row].iter_mut() {
            *entry = power.clone();
            power *= &tr;
        }
        values.push(BigRational::from_integer(exact_trace_of_power(a_int, b_int, t, p)));
    }
    let coefficients =
        solve_linear(vandermonde, values).expect("Vandermonde at distinct nodes is invertible");
    coefficients[r].clone()
}

/// α_{p,r}(A,B): the coefficient of t^r in Tr(A+tB)^p, computed by summing
/// Tr of every word in E_{p,r} and cross-checked against the exact
/// interpolation route; disagreement beyond 1e−8 relative is an error.
pub fn alpha_coeff(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    p: usize,
    r: usize,
) -> Result<f64, MatrixCheckError> {
    check_dims(a, b)?;
    if p < 1 || p > 16 || r > p {
        return Err(MatrixCheckError::InvalidRange { p, r });
    }
    let by_words: f64 =
        enumerate_weighted_strings(p, r)?.iter().map(|s| word_trace(s, a, b)).sum();

    let (a_int, a_scale) = integer_lift(a);
    let (b_int, b_scale) = integer_lift(b);
    let scaled = interpolated_coefficient(&a_int, &b_int, p, r);
    // α is (p−r)-homogeneous in A and r-homogeneous in B.
    let rescale_bits = a_scale * (p - r) as u64 + b_scale * r as u64;
    let by_interpolation =
        rat_to_f64(&(scaled / BigRational::from_integer(BigInt::one() << rescale_bits)));

    if (by_words - by_interpolation).abs() > 1e-8 * by_words.abs().max(1.0) {
        return Err(MatrixCheckError::MethodDisagreement {
            p,
            r,
            words: by_words,
            interpolation: by_interpolation,
        });
    }
    Ok(by_words)
}

/// Σ over ordered basis pairs (u,v) of G_{uv}·Tr(Y_{σ(u,v)}): the certificate's
/// value as a trace quadratic form; nonnegative for PSD G and PSD inputs.
pub fn certificate_trace_value(
    cert: &GramCertificate,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<f64, MatrixCheckError> {
    check_dims(a, b)?;
    let params = cert.params();
    let basis = cert.basis();
    let mut total = 0.0;
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let coeff = rat_to_f64(cert.entry(i, j));
            if coeff == 0.0 {
                continue;
            }
            let merged = sigma(u, v, params)?;
            total += coeff * word_trace(&merged, a, b);
        }
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub seed: u64,
    pub alpha: f64,
    pub cert_value: f64,
    pub rel_dev: f64,
}

impl fmt::Display for TrialRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seed={} alpha={:e} cert={:e} reldev={:e}",
            self.seed, self.alpha, self.cert_value, self.rel_dev
        )
    }
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub trials: Vec<TrialRecord>,
    pub max_rel_dev: f64,
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for trial in &self.trials {
            writeln!(f, "{trial}")?;
        }
        write!(f, "trials={} max_reldev={:e}", self.trials.len(), self.max_rel_dev)
    }
}

const SEED_STRIDE: u64 = 0x9E37_79B9;

/// Seeded trials comparing α against the certificate's trace value on random
/// PSD pairs: each trial must satisfy |α − value| ≤ tol·max(1,|α|) and
/// α ≥ −tol, otherwise the failing seed is reported.
pub fn numeric_consistency(
    cert: &GramCertificate,
    trials: usize,
    n: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ConsistencyReport, MatrixCheckError> {
    let params = cert.params();
    let mut records = Vec::with_capacity(trials);
    let mut max_rel_dev = 0.0f64;
    for t in 0..trials as u64 {
        let trial_seed = seed.wrapping_add(t);
        let a = random_psd(n, trial_seed);
        let b = random_psd(n, trial_seed.wrapping_add(SEED_STRIDE));
        let alpha = alpha_coeff(&a, &b, params.p(), params.r())?;
        let cert_value = certificate_trace_value(cert, &a, &b)?;
        let rel_dev = (alpha - cert_value).abs() / alpha.abs().max(1.0);
        if rel_dev > tolerance {
            return Err(MatrixCheckError::TrialFailed {
                seed: trial_seed,
                detail: format!("alpha={alpha:e} cert={cert_value:e} reldev={rel_dev:e}"),
            });
        }
        if alpha < -tolerance {
            return Err(MatrixCheckError::TrialFailed {
                seed: trial_seed,
                detail: format!("alpha={alpha:e} is negative beyond tolerance"),
            });
        }
        max_rel_dev = max_rel_dev.max(rel_dev);
        records.push(TrialRecord { seed: trial_seed, alpha, cert_value, rel_dev });
    }
    Ok(ConsistencyReport { trials: records, max_rel_dev })
}
