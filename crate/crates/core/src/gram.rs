//! Exact rational Gram certificates for the key linear system.
//!
//! A certificate for (p, r) is a symmetric positive semidefinite rational matrix G
//! over the lexicographic basis E_{k,q} such that, for every cyclic class t of
//! E_{p,r}, the entries of G indexed by the class's merge-map fiber sum to the
//! class's orbit size. Existence of such a G certifies nonnegativity of the
//! coefficient α_{p,r}(A,B) for all positive semidefinite A, B.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use num_rational::BigRational;

use crate::words::{
    enumerate_weighted_strings, preimage, BitString, CaseKind, CaseParams, Necklace,
    WordsError,
};

#[derive(Debug, Error)]
pub enum GramError {
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error("matrix must be {expected}x{expected}: {detail}")]
    BadShape { expected: usize, detail: String },
    #[error("matrix is not symmetric at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("certificate parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("certificate kind {kind} does not apply to p={p}, r={r}")]
    KindMismatch { kind: CertKind, p: usize, r: usize },
    #[error("constructed certificate failed verification: {0}")]
    ConstructionInvalid(String),
}

/// One equation of the key system: the G-entries over `pairs` must sum to `target`.
#[derive(Clone, Debug)]
pub struct KeyConstraint {
    pub necklace: Necklace,
    /// Orbit size of the class.
    pub target: u64,
    /// Ordered index pairs into the lexicographic E_{k,q} basis.
    pub pairs: Vec<(usize, usize)>,
}

/// The full key system for (p, r): one constraint per cyclic class of E_{p,r},
/// sorted by canonical word.
pub fn build_key_system(params: &CaseParams) -> Vec<KeyConstraint> {
    let basis = enumerate_weighted_strings(params.k(), params.q()).expect("valid params");
    let index: std::collections::BTreeMap<&BitString, usize> =
        basis.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let necklaces =
        crate::words::enumerate_necklaces(params.p(), params.r()).expect("valid params");
    let mut system = Vec::with_capacity(necklaces.len());
    let mut covered = 0usize;
    for necklace in necklaces {
        let fiber = preimage(&necklace, params).expect("necklace matches params");
        let pairs: Vec<(usize, usize)> =
            fiber.iter().map(|(u, v)| (index[u], index[v])).collect();
        covered += pairs.len();
        system.push(KeyConstraint { target: necklace.orbit_size() as u64, necklace, pairs });
    }
    debug_assert_eq!(covered, basis.len() * basis.len());
    system
}

/// A symmetric rational matrix over the lexicographic half-word basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramCertificate {
    params: CaseParams,
    basis: Vec<BitString>,
    matrix: Vec<Vec<BigRational>>,
}

impl GramCertificate {
    pub fn new(params: CaseParams, matrix: Vec<Vec<BigRational>>) -> Result<Self, GramError> {
        let basis = enumerate_weighted_strings(params.k(), params.q())?;
        let n = basis.len();
        if matrix.len() != n {
            return Err(GramError::BadShape {
                expected: n,
                detail: format!("got {} rows", matrix.len()),
            });
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(GramError::BadShape {
                    expected: n,
                    detail: format!("row {i} has {} entries", row.len()),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if matrix[i][j] != matrix[j][i] {
                    return Err(GramError::NotSymmetric { i, j });
                }
            }
        }
        Ok(GramCertificate { params, basis, matrix })
    }

    pub fn params(&self) -> &CaseParams {
        &self.params
    }

    pub fn basis(&self) -> &[BitString] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix(&self) -> &[Vec<BigRational>] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.matrix[i][j]
    }
}

/// Residual of one key constraint under a candidate matrix.
#[derive(Clone, Debug)]
pub struct ConstraintResidual {
    pub canonical: BitString,
    pub target: u64,
    pub sum: BigRational,
}

impl ConstraintResidual {
    pub fn satisfied(&self) -> bool {
        self.sum == BigRational::from_integer(BigInt::from(self.target))
    }
}

#[derive(Clone, Debug)]
pub struct KeyReport {
    pub ok: bool,
    pub residuals: Vec<ConstraintResidual>,
}

/// Evaluates every key constraint exactly against the certificate matrix.
pub fn verify_key(cert: &GramCertificate) -> KeyReport {
    let system = build_key_system(cert.params());
    let mut residuals = Vec::with_capacity(system.len());
    let mut ok = true;
    for constraint in system {
        let sum: BigRational =
            constraint.pairs.iter().map(|&(i, j)| cert.entry(i, j).clone()).sum();
        let residual = ConstraintResidual {
            canonical: constraint.necklace.canonical().clone(),
            target: constraint.target,
            sum,
        };
        ok &= residual.satisfied();
        residuals.push(residual);
    }
    KeyReport { ok, residuals }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsdOutcome {
    Psd,
    /// A rational vector x with xᵀ M x < 0.
    NotPsd { witness: Vec<BigRational> },
}

/// Exact positive-semidefiniteness test by fraction-free-in-spirit LDLᵀ pivoting.
///
/// A zero diagonal pivot is only admissible when its entire remaining row is zero;
/// otherwise, and on any negative pivot, a rational witness with negative quadratic
/// form is produced. The input must be square and symmetric.
pub fn psd_exact(matrix: &[Vec<BigRational>]) -> PsdOutcome {
    let n = matrix.len();
    for (i, row) in matrix.iter().enumerate() {
        assert_eq!(row.len(), n, "matrix must be square");
        for j in (i + 1)..n {
            debug_assert_eq!(matrix[i][j], matrix[j][i], "matrix must be symmetric");
        }
    }
    // Working copy: the trailing block becomes the current Schur complement.
    let mut m: Vec<Vec<BigRational>> = matrix.to_vec();
    // Unit lower-triangular factor columns for processed pivots.
    let mut l: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        l[i][i] = BigRational::from_integer(BigInt::from(1));
    }

    // Lifts a vector supported on the trailing Schur block to full length so that
    // the processed coordinates of Lᵀx vanish; the quadratic form is preserved.
    let back_substitute = |l: &Vec<Vec<BigRational>>, t: usize, trailing: Vec<BigRational>| {
        let mut x = vec![BigRational::zero(); n];
        x[t..n].clone_from_slice(&trailing[..(n - t)]);
        for s in (0..t).rev() {
            let mut acc = BigRational::zero();
            for i in (s + 1)..n {
                if !l[i][s].is_zero() && !x[i].is_zero() {
                    acc = &acc + &(&l[i][s] * &x[i]);
                }
            }
            x[s] = -acc;
        }
        x
    };

    for t in 0..n {
        let pivot = m[t][t].clone();
        if pivot.is_negative() {
            let mut trailing = vec![BigRational::zero(); n - t];
            trailing[0] = BigRational::from_integer(BigInt::from(1));
            let witness = back_substitute(&l, t, trailing);
            return PsdOutcome::NotPsd { witness };
        }
        if pivot.is_zero() {
            if let Some(j) = ((t + 1)..n).find(|&j| !m[t][j].is_zero()) {
                // Schur block has S_tt = 0, S_tj = c ≠ 0: x = α e_t + e_j with
                // α = −(S_jj + 1)/(2c) gives quadratic form −1.
                let c = m[t][j].clone();
                let e = m[j][j].clone();
                let alpha = -(&e + &BigRational::from_integer(BigInt::from(1)))
                    / (&c * &BigRational::from_integer(BigInt::from(2)));
                let mut trailing = vec![BigRational::zero(); n - t];
                trailing[0] = alpha;
                trailing[j - t] = BigRational::from_integer(BigInt::from(1));
                let witness = back_substitute(&l, t, trailing);
                return PsdOutcome::NotPsd { witness };
            }
            continue; // zero pivot with zero row: skip the column
        }
        for i in (t + 1)..n {
            l[i][t] = &m[i][t] / &pivot;
        }
        for i in (t + 1)..n {
            if m[i][t].is_zero() {
                continue;
            }
            let li = l[i][t].clone();
            for j in (t + 1)..n {
                let delta = &li * &m[t][j];
                m[i][j] = &m[i][j] - &delta;
            }
        }
    }
    PsdOutcome::Psd
}

#[derive(Clone, Debug)]
pub enum RejectReason {
    /// Key constraints whose fiber sums miss their targets.
    KeySystem(Vec<ConstraintResidual>),
    NotPsd { witness: Vec<BigRational> },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::KeySystem(failures) => {
                write!(f, "key system violated on {} class(es):", failures.len())?;
                for failure in failures {
                    write!(
                        f,
                        " [{} sum={} target={}]",
                        failure.canonical, failure.sum, failure.target
                    )?;
                }
                Ok(())
            }
            RejectReason::NotPsd { witness } => {
                write!(f, "matrix is not positive semidefinite; witness x = (")?;
                for (i, v) in witness.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ") has x'Gx < 0")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum CertVerification {
    Verified,
    Rejected(RejectReason),
}

impl CertVerification {
    pub fn is_verified(&self) -> bool {
        matches!(self, CertVerification::Verified)
    }
}

/// Full exact verification: every key constraint holds and the matrix is PSD.
pub fn verify_certificate(cert: &GramCertificate) -> CertVerification {
    let key = verify_key(cert);
    if !key.ok {
        let failures = key.residuals.into_iter().filter(|r| !r.satisfied()).collect();
        return CertVerification::Rejected(RejectReason::KeySystem(failures));
    }
    match psd_exact(cert.matrix()) {
        PsdOutcome::Psd => CertVerification::Verified,
        PsdOutcome::NotPsd { witness } => {
            CertVerification::Rejected(RejectReason::NotPsd { witness })
        }
    }
}

/// The named certificate constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum CertKind {
    /// r = 1, odd p: the 1×1 matrix [p].
    R1,
    /// r = p − 2, odd p: p times the identity.
    Rpm2,
    /// r = p − 4, odd p: p times the block indicator of a zero-position partition.
    Partition,
    /// The dedicated 5×5 integer matrix for (11, 3).
    P11R3,
    /// r = 1, even p: the 1×1 matrix [p].
    Case2R1,
    /// r = p − 1, even p: the 1×1 matrix [p].
    Case2Rpm1,
}

impl CertKind {
    pub const ALL: [CertKind; 6] = [
        CertKind::R1,
        CertKind::Rpm2,
        CertKind::Partition,
        CertKind::P11R3,
        CertKind::Case2R1,
        CertKind::Case2Rpm1,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            CertKind::R1 => "R1",
            CertKind::Rpm2 => "RPM2",
            CertKind::Partition => "PARTITION",
            CertKind::P11R3 => "P11R3",
            CertKind::Case2R1 => "CASE2_R1",
            CertKind::Case2Rpm1 => "CASE2_RPM1",
        }
    }
}

impl fmt::Display for CertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for CertKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        CertKind::ALL
            .iter()
            .copied()
            .find(|k| k.token() == s)
            .ok_or_else(|| format!("unknown certificate kind {s:?}"))
    }
}

/// Partition of E_{k,k−2} by the scan position of the first zero, scanning
/// positions in the zig-zag order 1, k, 2, k−1, 3, k−2, …. Block m (1-based)
/// has k − m elements.
pub fn build_partition(k: usize, q: usize) -> Result<Vec<Vec<BitString>>, GramError> {
    if k < 2 || q + 2 != k {
        return Err(GramError::Words(WordsError::InvalidParams {
            p: k,
            r: q,
            reason: "partition construction requires q = k - 2, k >= 2",
        }));
    }
    let scan: Vec<usize> = (1..=k)
        .map(|s| if s % 2 == 1 { (s + 1) / 2 } else { k + 1 - s / 2 })
        .map(|pos| pos - 1) // to 0-based indices
        .collect();
    let mut blocks: Vec<Vec<BitString>> = vec![Vec::new(); k - 1];
    for u in enumerate_weighted_strings(k, q)? {
        let m = scan
            .iter()
            .position(|&pos| u.bit(pos) == 0)
            .expect("a weight k-2 word has a zero");
        blocks[m].push(u);
    }
    for (m, block) in blocks.iter().enumerate() {
        debug_assert_eq!(block.len(), k - 1 - m);
    }
    Ok(blocks)
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn scaled_identity(n: usize, scale: i64) -> Vec<Vec<BigRational>> {
    let mut matrix = vec![vec![int(0); n]; n];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = int(scale);
    }
    matrix
}

/// Builds the named certificate for (p, r) and verifies it exactly.
pub fn build_certificate(
    kind: CertKind,
    p: usize,
    r: usize,
) -> Result<GramCertificate, GramError> {
    let params = CaseParams::new(p, r)?;
    let mismatch = || GramError::KindMismatch { kind, p, r };
    let matrix = match kind {
        CertKind::R1 => {
            if params.case() != CaseKind::Case1 || r != 1 {
                return Err(mismatch());
            }
            vec![vec![int(p as i64)]]
        }
        CertKind::Rpm2 => {
            if params.case() != CaseKind::Case1 || p < 3 || r != p - 2 {
                return Err(mismatch());
            }
            scaled_identity(params.k(), p as i64)
        }
        CertKind::Partition => {
            if params.case() != CaseKind::Case1 || p < 5 || r != p - 4 {
                return Err(mismatch());
            }
            let blocks = build_partition(params.k(), params.q())?;
            let basis = enumerate_weighted_strings(params.k(), params.q())?;
            let index: std::collections::BTreeMap<&BitString, usize> =
                basis.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let mut matrix = vec![vec![int(0); basis.len()]; basis.len()];
            for block in &blocks {
                for u in block {
                    for v in block {
                        matrix[index[u]][index[v]] = int(p as i64);
                    }
                }
            }
            matrix
        }
        CertKind::P11R3 => {
            if (p, r) != (11, 3) {
                return Err(mismatch());
            }
            // 11 times a sum of four integer rank-one terms; basis
            // [00001, 00010, 00100, 01000, 10000].
            let rows: [[i64; 5]; 5] = [
                [11, 11, 11, 11, -11],
                [11, 11, 11, 11, -11],
                [11, 11, 77, -55, -33],
                [11, 11, -55, 121, 11],
                [-11, -11, -33, 11, 33],
            ];
            rows.iter().map(|row| row.iter().map(|&e| int(e)).collect()).collect()
        }
        CertKind::Case2R1 => {
            if params.case() != CaseKind::Case2 || r != 1 {
                return Err(mismatch());
            }
            vec![vec![int(p as i64)]]
        }
        CertKind::Case2Rpm1 => {
            if params.case() != CaseKind::Case2 || r + 1 != p {
                return Err(mismatch());
            }
            vec![vec![int(p as i64)]]
        }
    };
    let cert = GramCertificate::new(params, matrix)?;
    match verify_certificate(&cert) {
        CertVerification::Verified => Ok(cert),
        CertVerification::Rejected(reason) => {
            Err(GramError::ConstructionInvalid(reason.to_string()))
        }
    }
}

/// The derived singleton certificate for r = p (odd p): G = [1] over E_{k,k}.
pub fn build_rp_singleton(p: usize) -> Result<GramCertificate, GramError> {
    let params = CaseParams::new(p, p)?;
    if params.case() != CaseKind::Case1 {
        return Err(GramError::Words(WordsError::InvalidParams {
            p,
            r: p,
            reason: "the r = p singleton requires odd p",
        }));
    }
    let cert = GramCertificate::new(params, vec![vec![int(1)]])?;
    match verify_certificate(&cert) {
        CertVerification::Verified => Ok(cert),
        CertVerification::Rejected(reason) => {
            Err(GramError::ConstructionInvalid(reason.to_string()))
        }
    }
}

/// Serializes a certificate in the interchange text format:
/// header `conditionh-cert v1 p=<p> r=<r>`, `basis <n>`, n basis words, n matrix
/// rows of space-separated rationals (`a` or `a/b`).
pub fn write_certificate(cert: &GramCertificate) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "conditionh-cert v1 p={} r={}\n",
        cert.params().p(),
        cert.params().r()
    ));
    out.push_str(&format!("basis {}\n", cert.dim()));
    for word in cert.basis() {
        out.push_str(&format!("{word}\n"));
    }
    for row in cert.matrix() {
        let rendered: Vec<String> = row.iter().map(|e| e.to_string()).collect();
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
    out
}

/// Parses and validates the interchange text format. Rejects malformed headers,
/// basis mismatches (content or order), non-square or asymmetric matrices, and
/// unparseable entries.
pub fn parse_certificate(text: &str) -> Result<GramCertificate, GramError> {
    let parse_err = |line: usize, reason: String| GramError::Parse { line, reason };
    let mut lines = text.lines().enumerate();

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty certificate".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "conditionh-cert" || fields[1] != "v1" {
        return Err(parse_err(line_no + 1, format!("bad header {header:?}")));
    }
    let p: usize = fields[2]
        .strip_prefix("p=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(line_no + 1, format!("bad p field {:?}", fields[2])))?;
    let r: usize = fields[3]
        .strip_prefix("r=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(line_no + 1, format!("bad r field {:?}", fields[3])))?;
    let params = CaseParams::new(p, r)?;

    let (line_no, basis_line) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing basis line".into()))?;
    let n: usize = basis_line
        .strip_prefix("basis ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| parse_err(line_no + 1, format!("bad basis line {basis_line:?}")))?;

    let expected_basis = enumerate_weighted_strings(params.k(), params.q())?;
    if n != expected_basis.len() {
        return Err(parse_err(
            line_no + 1,
            format!("basis size {n} does not match E_{{{},{}}} (size {})", params.k(), params.q(), expected_basis.len()),
        ));
    }
    for expected in &expected_basis {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of basis".into()))?;
        let word: BitString = line
            .trim()
            .parse()
            .map_err(|e: WordsError| parse_err(line_no + 1, e.to_string()))?;
        if &word != expected {
            return Err(parse_err(
                line_no + 1,
                format!("basis word {word} out of order (expected {expected})"),
            ));
        }
    }

    let mut matrix = Vec::with_capacity(n);
    for i in 0..n {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("missing matrix row {i}")))?;
        let mut row = Vec::with_capacity(n);
        for token in line.split_whitespace() {
            let entry = BigRational::from_str(token)
                .map_err(|e| parse_err(line_no + 1, format!("bad entry {token:?}: {e}")))?;
            row.push(entry);
        }
        if row.len() != n {
            return Err(parse_err(
                line_no + 1,
                format!("row {i} has {} entries, expected {n}", row.len()),
            ));
        }
        matrix.push(row);
    }
    if let Some((line_no, trailing)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(line_no + 1, format!("trailing content {trailing:?}")));
    }
    GramCertificate::new(params, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_traits::ToPrimitive;
    use rand_core::{RngCore, SeedableRng};

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn quadratic_form(matrix: &[Vec<BigRational>], x: &[BigRational]) -> BigRational {
        let n = matrix.len();
        let mut acc = BigRational::zero();
        for i in 0..n {
            for j in 0..n {
                acc = &acc + &(&(&matrix[i][j] * &x[i]) * &x[j]);
            }
        }
        acc
    }

    #[test]
    fn key_system_5_3_oracle() {
        let params = CaseParams::new(5, 3).unwrap();
        let system = build_key_system(&params);
        assert_eq!(system.len(), 2);
        assert_eq!(system[0].necklace.canonical(), &bs("00111"));
        assert_eq!(system[0].target, 5);
        assert_eq!(system[0].pairs, vec![(0, 0)]);
        assert_eq!(system[1].necklace.canonical(), &bs("01011"));
        assert_eq!(system[1].target, 5);
        assert_eq!(system[1].pairs, vec![(0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn key_system_6_3_oracle() {
        let params = CaseParams::new(6, 3).unwrap();
        let system = build_key_system(&params);
        let summary: Vec<(String, u64, Vec<(usize, usize)>)> = system
            .iter()
            .map(|c| (c.necklace.canonical().to_string(), c.target, c.pairs.clone()))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("000111".into(), 6, vec![(0, 0)]),
                ("001011".into(), 6, vec![(1, 0)]),
                ("001101".into(), 6, vec![(0, 1)]),
                ("010101".into(), 2, vec![(1, 1)]),
            ]
        );
    }

    #[test]
    fn key_system_covers_all_pairs() {
        for p in 1..=13 {
            for r in (1..=p).step_by(2) {
                let params = CaseParams::new(p, r).unwrap();
                let system = build_key_system(&params);
                let dim = enumerate_weighted_strings(params.k(), params.q()).unwrap().len();
                let covered: usize = system.iter().map(|c| c.pairs.len()).sum();
                assert_eq!(covered, dim * dim, "pair cover at ({p},{r})");
                for constraint in &system {
                    assert!(constraint.target >= 1);
                    let mut seen = constraint.pairs.clone();
                    seen.sort();
                    seen.dedup();
                    assert_eq!(seen.len(), constraint.pairs.len(), "duplicate pair at ({p},{r})");
                }
            }
        }
    }

    fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|row| row.iter().map(|&e| int(e)).collect()).collect()
    }

    #[test]
    fn psd_small_examples() {
        assert_eq!(psd_exact(&int_matrix(&[&[0, 0], &[0, 3]])), PsdOutcome::Psd);
        assert_eq!(psd_exact(&int_matrix(&[&[2]])), PsdOutcome::Psd);
        assert_eq!(psd_exact(&int_matrix(&[&[0]])), PsdOutcome::Psd);
        assert_eq!(psd_exact(&int_matrix(&[&[5, 2], &[2, 1]])), PsdOutcome::Psd);

        let indefinite = int_matrix(&[&[1, 2], &[2, 1]]);
        match psd_exact(&indefinite) {
            PsdOutcome::NotPsd { witness } => {
                assert!(quadratic_form(&indefinite, &witness).is_negative());
            }
            PsdOutcome::Psd => panic!("[[1,2],[2,1]] is indefinite"),
        }

        let negative = int_matrix(&[&[-1]]);
        match psd_exact(&negative) {
            PsdOutcome::NotPsd { witness } => {
                assert!(quadratic_form(&negative, &witness).is_negative());
            }
            PsdOutcome::Psd => panic!("[-1] is negative"),
        }

        // Zero pivot with a nonzero off-diagonal entry.
        let hollow = int_matrix(&[&[0, 1], &[1, 5]]);
        match psd_exact(&hollow) {
            PsdOutcome::NotPsd { witness } => {
                assert!(quadratic_form(&hollow, &witness).is_negative());
            }
            PsdOutcome::Psd => panic!("[[0,1],[1,5]] is not PSD"),
        }

        // Zero pivot in the middle of elimination.
        let nested = int_matrix(&[&[1, 1, 0], &[1, 1, 1], &[0, 1, 1]]);
        match psd_exact(&nested) {
            PsdOutcome::NotPsd { witness } => {
                assert!(quadratic_form(&nested, &witness).is_negative());
            }
            PsdOutcome::Psd => panic!("matrix has a hidden negative direction"),
        }
    }

    /// psd_exact agrees with a floating-point eigenvalue check away from the
    /// numerical boundary, on seeded random symmetric rational matrices.
    #[test]
    fn psd_matches_float_eigenvalues() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20_260_814);
        let mut checked = 0;
        while checked < 100 {
            let n = 1 + (rng.next_u64() % 10) as usize;
            let psd_case = rng.next_u64() % 2 == 0;
            let mut matrix = vec![vec![BigRational::zero(); n]; n];
            if psd_case {
                // R'R for a random integer R (guaranteed PSD).
                let mut r_mat = vec![vec![0i64; n]; n];
                for row in r_mat.iter_mut() {
                    for e in row.iter_mut() {
                        *e = (rng.next_u64() % 7) as i64 - 3;
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let dot: i64 = (0..n).map(|t| r_mat[t][i] * r_mat[t][j]).sum();
                        matrix[i][j] = int(dot);
                    }
                }
            } else {
                for i in 0..n {
                    for j in i..n {
                        let v = int((rng.next_u64() % 17) as i64 - 8) / int(4);
                        matrix[i][j] = v.clone();
                        matrix[j][i] = v;
                    }
                }
            }
            let float = DMatrix::from_fn(n, n, |i, j| matrix[i][j].to_f64().unwrap());
            let min_eig = float
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eig.abs() <= 1e-9 && !psd_case {
                continue; // numerically ambiguous; not a disagreement either way
            }
            checked += 1;
            match psd_exact(&matrix) {
                PsdOutcome::Psd => {
                    assert!(min_eig >= -1e-9, "exact PSD vs float min eig {min_eig}");
                }
                PsdOutcome::NotPsd { witness } => {
                    assert!(quadratic_form(&matrix, &witness).is_negative());
                    assert!(min_eig < 1e-9, "exact NotPsd vs float min eig {min_eig}");
                }
            }
        }
    }

    #[test]
    fn exact_certificate_5_3() {
        let params = CaseParams::new(5, 3).unwrap();
        let cert =
            GramCertificate::new(params, int_matrix(&[&[5, 2], &[2, 1]])).unwrap();
        assert!(verify_certificate(&cert).is_verified());
    }

    /// Regression: the all-ones matrix does not satisfy the key system at (5, 3)
    /// (fiber sums 1 and 3 against targets 5 and 5).
    #[test]
    fn all_ones_rejected_at_5_3() {
        let params = CaseParams::new(5, 3).unwrap();
        let cert = GramCertificate::new(params, int_matrix(&[&[1, 1], &[1, 1]])).unwrap();
        match verify_certificate(&cert) {
            CertVerification::Rejected(RejectReason::KeySystem(failures)) => {
                assert_eq!(failures.len(), 2);
                assert_eq!(failures[0].sum, int(1));
                assert_eq!(failures[1].sum, int(3));
            }
            other => panic!("expected key rejection, got {other:?}"),
        }
    }

    #[test]
    fn scaled_identity_certificates_r_pm2() {
        for p in (3..=15).step_by(2) {
            let cert = build_certificate(CertKind::Rpm2, p, p - 2).unwrap();
            assert!(verify_certificate(&cert).is_verified(), "RPM2 at p={p}");
        }
    }

    #[test]
    fn singleton_certificates() {
        for p in (1..=15).step_by(2) {
            assert!(build_certificate(CertKind::R1, p, 1).is_ok(), "R1 at p={p}");
            assert!(build_rp_singleton(p).is_ok(), "RP at p={p}");
        }
        for p in (2..=14).step_by(2) {
            assert!(build_certificate(CertKind::Case2R1, p, 1).is_ok(), "CASE2_R1 at p={p}");
            assert!(
                build_certificate(CertKind::Case2Rpm1, p, p - 1).is_ok(),
                "CASE2_RPM1 at p={p}"
            );
        }
    }

    #[test]
    fn kind_domain_is_enforced() {
        assert!(matches!(
            build_certificate(CertKind::R1, 8, 1),
            Err(GramError::KindMismatch { .. })
        ));
        assert!(matches!(
            build_certificate(CertKind::P11R3, 11, 5),
            Err(GramError::KindMismatch { .. })
        ));
        assert!(matches!(
            build_certificate(CertKind::Partition, 9, 3),
            Err(GramError::KindMismatch { .. })
        ));
        assert!(build_certificate(CertKind::R1, 9, 4).is_err());
    }

    #[test]
    fn partition_blocks_oracles() {
        let blocks = build_partition(4, 2).unwrap();
        let rendered: Vec<Vec<String>> = blocks
            .iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect();
        assert_eq!(
            rendered,
            vec![
                vec!["0011", "0101", "0110"],
                vec!["1010", "1100"],
                vec!["1001"],
            ]
        );

        let blocks = build_partition(3, 1).unwrap();
        let rendered: Vec<Vec<String>> = blocks
            .iter()
            .map(|b| b.iter().map(|s| s.to_string()).collect())
            .collect();
        assert_eq!(rendered, vec![vec!["001", "010"], vec!["100"]]);

        assert!(build_partition(4, 1).is_err());
    }

    #[test]
    fn partition_certificates_verify() {
        for p in [5usize, 7, 9, 11].iter().copied() {
            let cert = build_certificate(CertKind::Partition, p, p - 4).unwrap();
            assert!(verify_certificate(&cert).is_verified(), "partition at p={p}");
        }
    }

    #[test]
    fn dedicated_11_3_certificate() {
        let cert = build_certificate(CertKind::P11R3, 11, 3).unwrap();
        assert!(verify_certificate(&cert).is_verified());
        let diag: Vec<i64> =
            (0..5).map(|i| cert.entry(i, i).to_integer().to_i64().unwrap()).collect();
        assert_eq!(diag, vec![11, 11, 77, 121, 33]);
        // Every class of E_{11,3} has a full orbit.
        for constraint in build_key_system(cert.params()) {
            assert_eq!(constraint.target, 11);
        }
    }

    #[test]
    fn file_format_roundtrip() {
        for cert in [
            build_certificate(CertKind::P11R3, 11, 3).unwrap(),
            build_certificate(CertKind::Partition, 9, 5).unwrap(),
            build_certificate(CertKind::Case2R1, 6, 1).unwrap(),
        ] {
            let text = write_certificate(&cert);
            let parsed = parse_certificate(&text).unwrap();
            assert_eq!(parsed, cert);
        }
    }

    #[test]
    fn file_format_fractional_roundtrip() {
        let params = CaseParams::new(5, 3).unwrap();
        let matrix = vec![
            vec![int(5), BigRational::new(BigInt::from(-7), BigInt::from(3))],
            vec![BigRational::new(BigInt::from(-7), BigInt::from(3)), int(2)],
        ];
        let cert = GramCertificate::new(params, matrix).unwrap();
        let text = write_certificate(&cert);
        assert!(text.contains("-7/3"));
        assert_eq!(parse_certificate(&text).unwrap(), cert);
    }

    #[test]
    fn parser_rejections() {
        let good = write_certificate(&build_certificate(CertKind::Partition, 9, 5).unwrap());

        let bad_header = good.replacen("conditionh-cert v1", "conditionh-cert v2", 1);
        assert!(matches!(parse_certificate(&bad_header), Err(GramError::Parse { line: 1, .. })));

        // Swap the first two basis words: order violation.
        let mut lines: Vec<&str> = good.lines().collect();
        lines.swap(2, 3);
        let swapped = lines.join("\n");
        assert!(matches!(parse_certificate(&swapped), Err(GramError::Parse { .. })));

        // Perturb one off-diagonal entry: asymmetry.
        let cert = build_certificate(CertKind::Partition, 9, 5).unwrap();
        let mut matrix = cert.matrix().to_vec();
        matrix[0][1] = &matrix[0][1] + &int(1);
        assert!(matches!(
            GramCertificate::new(*cert.params(), matrix),
            Err(GramError::NotSymmetric { .. })
        ));

        let bad_entry = good.replacen(" 9", " nine", 1);
        assert!(matches!(parse_certificate(&bad_entry), Err(GramError::Parse { .. })));

        let truncated: String =
            good.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(parse_certificate(&truncated).is_err());

        let bad_params = good.replacen("p=9 r=5", "p=9 r=4", 1);
        assert!(parse_certificate(&bad_params).is_err());
    }

    #[test]
    fn degenerate_empty_basis_certificate() {
        // (2, 1) has k = 0: basis {ε}, certificate [2] on the class of "10".
        let cert = build_certificate(CertKind::Case2R1, 2, 1).unwrap();
        assert_eq!(cert.dim(), 1);
        assert!(cert.basis()[0].is_empty());
        let text = write_certificate(&cert);
        assert_eq!(parse_certificate(&text).unwrap(), cert);
    }
}
