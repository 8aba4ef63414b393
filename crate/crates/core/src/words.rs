//! Binary words, cyclic equivalence classes, and the split/merge combinatorics that
//! drive the key linear system.
//!
//! A coefficient index (p, r) with r odd falls into one of two shapes: p = 2k+1
//! (Case 1) or p = 2k+2 (Case 2), with r = 2q+1 in both. Half-length words
//! u, v ∈ E_{k,q} merge into a full word via [`sigma`]; the fibers of that map over
//! cyclic classes (necklaces) of E_{p,r} are what certificates must weight.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordsError {
    #[error("bit strings consist of '0'/'1' characters, got {0:?}")]
    InvalidBit(char),
    #[error("weight {weight} exceeds length {length}")]
    WeightExceedsLength { weight: usize, length: usize },
    #[error("expected a string of length {expected_len} and weight {expected_weight}, got \"{got}\"")]
    ShapeMismatch {
        expected_len: usize,
        expected_weight: usize,
        got: String,
    },
    #[error("invalid parameters p={p}, r={r}: {reason}")]
    InvalidParams { p: usize, r: usize, reason: &'static str },
    #[error("window counting requires a full cyclic orbit (orbit size {orbit_size} < length {length})")]
    PartialOrbit { orbit_size: usize, length: usize },
}

/// A binary word. Ordering is lexicographic with '0' < '1'.
///
/// Words may be empty: the degenerate half-string basis E_{0,0} = {ε} arises for
/// p ≤ 2. Every full-length word handled by this crate has length ≥ 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self, WordsError> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(WordsError::InvalidBit((b'0' + b) as char));
        }
        Ok(BitString { bits })
    }

    fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        BitString { bits }
    }

    pub fn zeros(n: usize) -> Self {
        BitString { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        BitString { bits: vec![1; n] }
    }

    /// Concatenation of blocks 0^a 1^b 0^c 1^d, a convenience for witness words.
    pub fn blocks(parts: &[(u8, usize)]) -> Self {
        let mut bits = Vec::new();
        for &(bit, count) in parts {
            bits.extend(std::iter::repeat(bit).take(count));
        }
        BitString { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Bit at 0-based index i.
    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Number of ones among 0-based indices [lo, hi).
    pub fn ones_in(&self, lo: usize, hi: usize) -> usize {
        self.bits[lo..hi].iter().map(|&b| b as usize).sum()
    }

    pub fn rotated_left(&self, shift: usize) -> Self {
        if self.bits.is_empty() {
            return self.clone();
        }
        let n = self.bits.len();
        let shift = shift % n;
        let mut bits = Vec::with_capacity(n);
        bits.extend_from_slice(&self.bits[shift..]);
        bits.extend_from_slice(&self.bits[..shift]);
        BitString { bits }
    }

    pub fn reversed(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        BitString { bits }
    }

    pub fn concat(parts: &[&BitString]) -> Self {
        let mut bits = Vec::new();
        for part in parts {
            bits.extend_from_slice(&part.bits);
        }
        BitString { bits }
    }

    fn slice(&self, lo: usize, hi: usize) -> Self {
        BitString { bits: self.bits[lo..hi].to_vec() }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

impl FromStr for BitString {
    type Err = WordsError;

    fn from_str(s: &str) -> Result<Self, WordsError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(WordsError::InvalidBit(other)),
            }
        }
        Ok(BitString { bits })
    }
}

/// A cyclic equivalence class, represented by its lexicographically least rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Necklace {
    canonical: BitString,
    orbit_size: usize,
}

impl Necklace {
    pub fn canonical(&self) -> &BitString {
        &self.canonical
    }

    pub fn orbit_size(&self) -> usize {
        self.orbit_size
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    /// The distinct rotations of the class, starting from the canonical one.
    pub fn members(&self) -> Vec<BitString> {
        (0..self.orbit_size)
            .map(|sh| self.canonical.rotated_left(sh))
            .collect()
    }
}

/// The cyclic class of a word: canonical rotation plus orbit size.
pub fn orbit(s: &BitString) -> Necklace {
    let n = s.len();
    if n == 0 {
        return Necklace { canonical: s.clone(), orbit_size: 1 };
    }
    let mut canonical = s.clone();
    let mut seen = BTreeSet::new();
    for shift in 0..n {
        let rot = s.rotated_left(shift);
        if rot < canonical {
            canonical = rot.clone();
        }
        seen.insert(rot);
    }
    Necklace { canonical, orbit_size: seen.len() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    /// p = 2k + 1 (odd p, odd r).
    Case1,
    /// p = 2k + 2 (even p, odd r).
    Case2,
}

/// Validated parameters (p, r) with r odd, plus the derived half-lengths k, q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaseParams {
    p: usize,
    r: usize,
    k: usize,
    q: usize,
    case: CaseKind,
}

impl CaseParams {
    pub fn new(p: usize, r: usize) -> Result<Self, WordsError> {
        if p == 0 {
            return Err(WordsError::InvalidParams { p, r, reason: "p must be at least 1" });
        }
        if r > p {
            return Err(WordsError::InvalidParams { p, r, reason: "r must not exceed p" });
        }
        if r % 2 == 0 {
            return Err(WordsError::InvalidParams { p, r, reason: "r must be odd" });
        }
        let (case, k) = if p % 2 == 1 {
            (CaseKind::Case1, (p - 1) / 2)
        } else {
            (CaseKind::Case2, (p - 2) / 2)
        };
        Ok(CaseParams { p, r, k, q: (r - 1) / 2, case })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn case(&self) -> CaseKind {
        self.case
    }

    /// Complementary window length p − k − 1 (equals k in Case 1, k + 1 in Case 2).
    pub fn k_prime(&self) -> usize {
        self.p - self.k - 1
    }

    fn check_half(&self, s: &BitString) -> Result<(), WordsError> {
        if s.len() != self.k || s.weight() != self.q {
            return Err(WordsError::ShapeMismatch {
                expected_len: self.k,
                expected_weight: self.q,
                got: s.to_string(),
            });
        }
        Ok(())
    }

    fn check_full(&self, s: &BitString) -> Result<(), WordsError> {
        if s.len() != self.p || s.weight() != self.r {
            return Err(WordsError::ShapeMismatch {
                expected_len: self.p,
                expected_weight: self.r,
                got: s.to_string(),
            });
        }
        Ok(())
    }
}

/// All length-n weight-m words in lexicographic order.
pub fn enumerate_weighted_strings(n: usize, m: usize) -> Result<Vec<BitString>, WordsError> {
    if m > n {
        return Err(WordsError::WeightExceedsLength { weight: m, length: n });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(n: usize, m: usize, current: &mut Vec<u8>, out: &mut Vec<BitString>) {
        if current.len() == n {
            out.push(BitString::from_bits_unchecked(current.clone()));
            return;
        }
        let remaining = n - current.len();
        if m < remaining {
            current.push(0);
            rec(n, m, current, out);
            current.pop();
        }
        if m > 0 {
            current.push(1);
            rec(n, m - 1, current, out);
            current.pop();
        }
    }
    rec(n, m, &mut current, &mut out);
    Ok(out)
}

/// C(n, k) — the size of E_{n,k}.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn euler_phi(mut n: usize) -> u64 {
    let mut result = n as u64;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            while n % d == 0 {
                n /= d;
            }
            result -= result / d as u64;
        }
        d += 1;
    }
    if n > 1 {
        result -= result / n as u64;
    }
    result
}

/// Number of cyclic classes of length-p weight-r words:
/// (1/p) Σ_{d | gcd(p,r)} φ(d) C(p/d, r/d).
pub fn necklace_count(p: usize, r: usize) -> Result<u64, WordsError> {
    if p == 0 {
        return Err(WordsError::InvalidParams { p, r, reason: "p must be at least 1" });
    }
    if r > p {
        return Err(WordsError::InvalidParams { p, r, reason: "r must not exceed p" });
    }
    let g = if r == 0 { p } else { gcd(p, r) };
    let mut total = 0u64;
    for d in 1..=g {
        if g % d == 0 {
            total += euler_phi(d) * binomial(p / d, r / d);
        }
    }
    Ok(total / p as u64)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All cyclic classes of length-p weight-r words, sorted by canonical word.
pub fn enumerate_necklaces(p: usize, r: usize) -> Result<Vec<Necklace>, WordsError> {
    let strings = enumerate_weighted_strings(p, r)?;
    let mut out = Vec::new();
    for s in &strings {
        let necklace = orbit(s);
        if necklace.canonical() == s {
            out.push(necklace);
        }
    }
    Ok(out)
}

/// The merge map: u 1 reverse(v) in Case 1, u 1 reverse(v) 0 in Case 2,
/// for u, v ∈ E_{k,q}.
pub fn sigma(u: &BitString, v: &BitString, params: &CaseParams) -> Result<BitString, WordsError> {
    params.check_half(u)?;
    params.check_half(v)?;
    let one = BitString::ones(1);
    let rev = v.reversed();
    let merged = match params.case() {
        CaseKind::Case1 => BitString::concat(&[u, &one, &rev]),
        CaseKind::Case2 => BitString::concat(&[u, &one, &rev, &BitString::zeros(1)]),
    };
    Ok(merged)
}

/// All ordered pairs (u, v) ∈ E_{k,q}² whose merged word lies in the given cyclic
/// class, sorted lexicographically.
pub fn preimage(
    t: &Necklace,
    params: &CaseParams,
) -> Result<Vec<(BitString, BitString)>, WordsError> {
    params.check_full(t.canonical())?;
    let p = params.p();
    let k = params.k();
    let q = params.q();
    let mut pairs = Vec::new();
    for member in t.members() {
        if member.bit(k) != 1 {
            continue;
        }
        if params.case() == CaseKind::Case2 && member.bit(p - 1) != 0 {
            continue;
        }
        let u = member.slice(0, k);
        if u.weight() != q {
            continue;
        }
        let v_end = match params.case() {
            CaseKind::Case1 => p,
            CaseKind::Case2 => p - 1,
        };
        let v = member.slice(k + 1, v_end).reversed();
        debug_assert_eq!(v.weight(), q);
        pairs.push((u, v));
    }
    pairs.sort();
    Ok(pairs)
}

/// Fiber statistics of a pair: preimage size n of its merged word's class, and the
/// orbit size ñ of that class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub preimage_size: usize,
    pub orbit_size: usize,
}

pub fn pair_counts(
    u: &BitString,
    v: &BitString,
    params: &CaseParams,
) -> Result<PairCounts, WordsError> {
    let merged = sigma(u, v, params)?;
    let necklace = orbit(&merged);
    let pairs = preimage(&necklace, params)?;
    Ok(PairCounts { preimage_size: pairs.len(), orbit_size: necklace.orbit_size() })
}

/// Preimage size of a full-orbit word's class, computed without enumerating
/// rotations: count the 1-positions whose adjacent non-wrapping window of length
/// p − k − 1 carries exactly q ones (Case 2 additionally requires the window's
/// outer boundary bit to be 0).
///
/// Only valid when the orbit of s is full (size p); otherwise each splitting is
/// hit p / orbit_size times and an error is returned.
pub fn preimage_count_via_windows(
    s: &BitString,
    params: &CaseParams,
) -> Result<usize, WordsError> {
    params.check_full(s)?;
    let p = params.p();
    let kp = params.k_prime();
    let q = params.q();
    let necklace = orbit(s);
    if necklace.orbit_size() != p {
        return Err(WordsError::PartialOrbit { orbit_size: necklace.orbit_size(), length: p });
    }
    let case2 = params.case() == CaseKind::Case2;
    let mut count = 0;
    for i0 in 0..p {
        if s.bit(i0) != 1 {
            continue;
        }
        // 1-based position i = i0 + 1; prefer the preceding window when it fits.
        let hit = if i0 >= kp {
            let ones = s.ones_in(i0 - kp, i0);
            ones == q && (!case2 || s.bit(i0 - kp) == 0)
        } else {
            let ones = s.ones_in(i0 + 1, i0 + 1 + kp);
            ones == q && (!case2 || s.bit(i0 + kp) == 0)
        };
        if hit {
            count += 1;
        }
    }
    Ok(count)
}

/// Checks that the merge map covers every cyclic class of E_{p,r}: each class has a
/// nonempty preimage, and the fibers partition all C(k,q)² ordered pairs. This is
/// what allows the coefficient to be rewritten as a sum over pair fibers.
pub fn check_necklace_decomposition(p: usize, r: usize) -> Result<bool, WordsError> {
    let params = CaseParams::new(p, r)?;
    let necklaces = enumerate_necklaces(p, r)?;
    let mut total_pairs = 0usize;
    for necklace in &necklaces {
        let fiber = preimage(necklace, &params)?;
        if fiber.is_empty() {
            return Ok(false);
        }
        total_pairs += fiber.len();
    }
    let half = binomial(params.k(), params.q());
    Ok(total_pairs as u64 == half * half)
}
