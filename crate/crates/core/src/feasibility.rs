//! Numerical feasibility search for certificate matrices.
//!
//! The key system is a set of affine trace constraints ⟨A_c, G⟩ = t_c on a
//! symmetric matrix G that must also be positive semidefinite. This module
//! searches that intersection with Douglas–Rachford splitting between the PSD
//! cone (eigenvalue clipping) and the affine subspace (least-squares
//! correction), then snaps a float solution to exact rationals and re-verifies
//! it. When every solution matrix is singular — which happens already at
//! (9,5) — plain snapping cannot land exactly on the cone boundary, and the
//! splitting itself approaches the intersection only sublinearly because cone
//! and subspace meet tangentially. Both problems are handled by restricting to
//! the face the solutions live on: null directions are either derived exactly
//! from singleton-fiber propagation or recovered from the near-null eigenspace
//! of a stalled iterate (row-reduced and rounded to small rationals — the true
//! directions are simple ±1 patterns). On the face the problem regains a
//! relative interior, the float iteration converges linearly again, and the
//! snap enforces the null constraints exactly. A recovered direction is never
//! trusted: it only ever adds constraints, and the final certificate is
//! re-verified against the original key system from scratch.

use std::fmt;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector, Dyn};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::{best_rational_within, rat_from_f64, rat_int, solve_linear};
use crate::gram::{build_key_system, verify_certificate, GramCertificate, GramError, KeyConstraint};
use crate::obstructions::{forced_entry_propagation, Propagation};
use crate::words::{enumerate_weighted_strings, BitString, CaseParams, WordsError};

#[derive(Debug, Error)]
pub enum FeasibilityError {
    #[error(transparent)]
    Words(#[from] WordsError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error("no exact certificate found with entry denominators up to 2^{max_exp}")]
    RationalizationFailed { max_exp: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Maximum absolute constraint violation accepted as feasible.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iterations: 50_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    Stalled,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Feasible => write!(f, "FEASIBLE"),
            SolveStatus::Stalled => write!(f, "STALLED"),
        }
    }
}

/// Outcome of a solve: the returned matrix is always positive semidefinite up
/// to clipping accuracy; `residual` is its worst constraint violation and
/// `iterations` counts main-loop rounds.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub residual: f64,
    pub iterations: usize,
    pub matrix: DMatrix<f64>,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "status={} residual={:e} iterations={}", self.status, self.residual, self.iterations)
    }
}

/// Least-squares corrector onto an affine subspace, built from the Gram matrix
/// of the constraint matrices (pseudo-inverted, since fibers can overlap).
struct AffineCorrector {
    eig: SymmetricEigen<f64, Dyn>,
    threshold: f64,
}

impl AffineCorrector {
    fn multipliers(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let projected = self.eig.eigenvectors.transpose() * rhs;
        let scaled = DVector::from_iterator(
            projected.len(),
            projected
                .iter()
                .zip(self.eig.eigenvalues.iter())
                .map(|(&y, &l)| if l.abs() > self.threshold { y / l } else { 0.0 }),
        );
        &self.eig.eigenvectors * scaled
    }
}

fn clip_eigenvalues(g: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let symmetric = (g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(symmetric);
    let clamped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(floor)),
    );
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    (&rebuilt + rebuilt.transpose()) * 0.5
}


/// Float constraint list ⟨A_c, G⟩ = t_c closed under the iteration machinery.
struct FloatSystem {
    a_mats: Vec<DMatrix<f64>>,
    targets: Vec<f64>,
}

impl FloatSystem {
    fn corrector(&self) -> AffineCorrector {
        let m = self.a_mats.len();
        let gram = DMatrix::from_fn(m, m, |c, d| self.a_mats[c].dot(&self.a_mats[d]));
        let eig = SymmetricEigen::new(gram);
        let max = eig.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()));
        AffineCorrector { eig, threshold: 1e-12 * max.max(f64::MIN_POSITIVE) }
    }

    fn violation(&self, g: &DMatrix<f64>) -> f64 {
        self.a_mats
            .iter()
            .zip(&self.targets)
            .map(|(a, &t)| (a.dot(g) - t).abs())
            .fold(0.0, f64::max)
    }

    fn corrected(&self, corrector: &AffineCorrector, g: &DMatrix<f64>) -> DMatrix<f64> {
        let rhs = DVector::from_iterator(
            self.targets.len(),
            self.a_mats.iter().zip(&self.targets).map(|(a, &t)| t - a.dot(g)),
        );
        let lambda = corrector.multipliers(&rhs);
        let mut out = g.clone();
        for (c, a) in self.a_mats.iter().enumerate() {
            out += a * lambda[c];
        }
        out
    }

    /// Douglas–Rachford iteration z ← z + P_affine(2·P_cone(z) − z) − P_cone(z),
    /// reporting the shadow point P_cone(z) (always in the floored cone) and its
    /// worst constraint violation as the residual.
    fn dr_iterate(
        &self,
        corrector: &AffineCorrector,
        start: DMatrix<f64>,
        floor: f64,
        options: &SolveOptions,
    ) -> SolveReport {
        assert!(options.max_iterations >= 1);
        let mut z = start;
        for iteration in 1..=options.max_iterations {
            let shadow = clip_eigenvalues(&z, floor);
            let residual = self.violation(&shadow);
            if residual < options.tol || iteration == options.max_iterations {
                let status =
                    if residual < options.tol { SolveStatus::Feasible } else { SolveStatus::Stalled };
                return SolveReport { status, residual, iterations: iteration, matrix: shadow };
            }
            let reflected = &shadow * 2.0 - &z;
            let corrected = self.corrected(corrector, &reflected);
            z = z + corrected - shadow;
        }
        unreachable!("loop returns on the last iteration");
    }
}

/// The key system in matrix form: one symmetric coefficient matrix per class,
/// averaging each ordered fiber pair over its two positions so that
/// ⟨A_c, G⟩ equals the ordered fiber sum for symmetric G.
pub struct FeasibilityProblem {
    params: CaseParams,
    basis: Vec<BitString>,
    constraints: Vec<KeyConstraint>,
    system: FloatSystem,
}

impl FeasibilityProblem {
    pub fn assemble(params: &CaseParams) -> Result<Self, FeasibilityError> {
        let basis = enumerate_weighted_strings(params.k(), params.q())?;
        let n = basis.len();
        let constraints = build_key_system(params);
        let mut a_mats = Vec::with_capacity(constraints.len());
        let mut targets = Vec::with_capacity(constraints.len());
        for constraint in &constraints {
            let mut a = DMatrix::zeros(n, n);
            for &(i, j) in &constraint.pairs {
                a[(i, j)] += 0.5;
                a[(j, i)] += 0.5;
            }
            a_mats.push(a);
            targets.push(constraint.target as f64);
        }
        Ok(FeasibilityProblem {
            params: *params,
            basis,
            constraints,
            system: FloatSystem { a_mats, targets },
        })
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

    pub fn constraints(&self) -> &[KeyConstraint] {
        &self.constraints
    }

    /// Feasibility search from the least-norm affine solution. A stall close to
    /// the constraints (the tangential signature of an all-singular solution
    /// set) triggers face recovery: the near-null space of the stalled iterate
    /// is rounded to exact directions and the iteration is restarted on that
    /// face, where it converges linearly. On success the point is pushed toward
    /// the interior (eigenvalue floors at decreasing fractions of p) to give
    /// rationalization a strictly definite target; the first floor that still
    /// satisfies the constraints wins, and singular-only solution sets simply
    /// fall back to the unfloored point.
    pub fn solve(&self, options: &SolveOptions) -> SolveReport {
        let corrector = self.system.corrector();
        let n = self.dim();
        let start = self.system.corrected(&corrector, &DMatrix::zeros(n, n));
        let report = self.system.dr_iterate(&corrector, start, 0.0, options);
        if report.status != SolveStatus::Feasible {
            let seed = self.forced_null_vectors();
            if let Some((refined, _)) = self.recover_face(&report.matrix, seed, options) {
                // Keep the main-loop iteration count; the refined matrix is
                // singular by construction, so the interior polish below would
                // never apply to it.
                return SolveReport {
                    status: SolveStatus::Feasible,
                    residual: self.system.violation(&refined.matrix),
                    iterations: report.iterations,
                    matrix: refined.matrix,
                };
            }
            return report;
        }
        let polish = SolveOptions { tol: options.tol, max_iterations: 5_000 };
        for fraction in [0.1, 0.01, 0.001] {
            let floor = fraction * self.params.p() as f64;
            let polished = self.system.dr_iterate(&corrector, report.matrix.clone(), floor, &polish);
            if polished.status == SolveStatus::Feasible {
                return SolveReport {
                    status: SolveStatus::Feasible,
                    residual: polished.residual,
                    iterations: report.iterations,
                    matrix: polished.matrix,
                };
            }
        }
        report
    }

    /// Feasibility search from a caller-supplied seed, with no interior polish:
    /// a seed that is already a certificate converges in one iteration and the
    /// report describes it directly.
    pub fn solve_from(&self, start: &DMatrix<f64>, options: &SolveOptions) -> SolveReport {
        let corrector = self.system.corrector();
        self.system.dr_iterate(&corrector, start.clone(), 0.0, options)
    }

    fn exact_constraint_matrix(&self, constraint: &KeyConstraint) -> Vec<Vec<BigRational>> {
        let n = self.dim();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut a = vec![vec![BigRational::zero(); n]; n];
        for &(i, j) in &constraint.pairs {
            a[i][j] += &half;
            a[j][i] += &half;
        }
        a
    }

    /// Null directions every certificate must share: whenever singleton fibers
    /// force G_ii = G_ij = G_jj to one common value, the Cauchy–Schwarz equality
    /// case makes e_i − e_j a null vector of any positive semidefinite solution.
    fn forced_null_vectors(&self) -> Vec<Vec<BigRational>> {
        let Propagation::FeasibleSoFar { forced } = forced_entry_propagation(&self.params) else {
            return Vec::new();
        };
        let index_of = |word: &BitString| self.basis.binary_search(word).expect("basis word");
        let mut by_index: std::collections::BTreeMap<(usize, usize), u64> = Default::default();
        for entry in &forced {
            let (i, j) = (index_of(&entry.u), index_of(&entry.v));
            by_index.insert((i.min(j), i.max(j)), entry.value);
        }
        let n = self.dim();
        let mut nulls = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (Some(&dii), Some(&dij), Some(&djj)) =
                    (by_index.get(&(i, i)), by_index.get(&(i, j)), by_index.get(&(j, j)))
                else {
                    continue;
                };
                if dii == dij && dij == djj {
                    let mut v = vec![BigRational::zero(); n];
                    v[i] = BigRational::one();
                    v[j] = -BigRational::one();
                    nulls.push(v);
                }
            }
        }
        nulls
    }

    /// The float constraint system extended with (G v)_i = 0 rows for each
    /// null direction v, pinning the search to the corresponding face.
    fn restricted_system(&self, nulls: &[Vec<BigRational>]) -> FloatSystem {
        let n = self.dim();
        let mut a_mats = self.system.a_mats.clone();
        let mut targets = self.system.targets.clone();
        for v in nulls {
            let vf: Vec<f64> = v.iter().map(|x| x.to_f64().expect("small rational")).collect();
            for i in 0..n {
                let mut a = DMatrix::zeros(n, n);
                for j in 0..n {
                    a[(i, j)] += 0.5 * vf[j];
                    a[(j, i)] += 0.5 * vf[j];
                }
                a_mats.push(a);
                targets.push(0.0);
            }
        }
        FloatSystem { a_mats, targets }
    }

    /// Exact candidate null directions read directly off a nearly feasible
    /// matrix: pair differences e_i − e_j whose quadratic form value
    /// G_ii − 2·G_ij + G_jj is a tiny fraction of the diagonal scale (the
    /// Cauchy–Schwarz equality pattern), and bare e_i for vanishing diagonal
    /// entries. Directions already in `active` are skipped. A wrong candidate
    /// is harmless: it only adds constraints, and the result is re-verified.
    fn candidate_null_directions(
        &self,
        matrix: &DMatrix<f64>,
        active: &[Vec<BigRational>],
        relative_cut: f64,
    ) -> Vec<Vec<BigRational>> {
        let n = self.dim();
        let scale = (0..n).map(|i| matrix[(i, i)].abs()).fold(0.0f64, f64::max);
        if scale <= 0.0 {
            return Vec::new();
        }
        let cut = relative_cut * scale;
        let mut fresh: Vec<Vec<BigRational>> = Vec::new();
        let push = |v: Vec<BigRational>, fresh: &mut Vec<Vec<BigRational>>| {
            if !active.contains(&v) && !fresh.contains(&v) {
                fresh.push(v);
            }
        };
        for i in 0..n {
            if matrix[(i, i)].abs() < cut {
                let mut v = vec![BigRational::zero(); n];
                v[i] = BigRational::one();
                push(v, &mut fresh);
            }
            for j in i + 1..n {
                let quadratic = matrix[(i, i)] - 2.0 * matrix[(i, j)] + matrix[(j, j)];
                if quadratic.abs() < cut {
                    let mut v = vec![BigRational::zero(); n];
                    v[i] = BigRational::one();
                    v[j] = -BigRational::one();
                    push(v, &mut fresh);
                }
            }
        }
        fresh
    }

    /// Interprets null directions as an index partition: a pair difference
    /// e_i − e_j merges the classes of i and j (columns i and j of any matrix
    /// with that null direction are equal), a bare e_i discards the class of i
    /// (zero column). Returns the kept classes, or None for any other shape of
    /// null vector.
    fn null_blocks(&self, nulls: &[Vec<BigRational>]) -> Option<Vec<Vec<usize>>> {
        let n = self.dim();
        let mut class: Vec<usize> = (0..n).collect();
        fn root(class: &mut Vec<usize>, mut i: usize) -> usize {
            while class[i] != i {
                class[i] = class[class[i]];
                i = class[i];
            }
            i
        }
        let mut dropped = vec![false; n];
        for v in nulls {
            let plus: Vec<usize> = (0..n).filter(|&i| v[i] == BigRational::one()).collect();
            let minus: Vec<usize> = (0..n).filter(|&i| v[i] == -BigRational::one()).collect();
            let zeros = v.iter().filter(|x| x.is_zero()).count();
            match (plus.len(), minus.len(), zeros) {
                (1, 1, z) if z == n - 2 => {
                    let (a, b) = (root(&mut class, plus[0]), root(&mut class, minus[0]));
                    class[a] = b;
                }
                (1, 0, z) if z == n - 1 => dropped[plus[0]] = true,
                _ => return None,
            }
        }
        let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = root(&mut class, i);
            blocks.entry(r).or_default().push(i);
        }
        Some(blocks.into_values().filter(|block| !block.iter().any(|&i| dropped[i])).collect())
    }

    /// Fresh solve in block-collapsed coordinates: with G = Q H Qᵀ for the 0/1
    /// block indicator Q, the constraints become ⟨Qᵀ A_c Q, H⟩ = t_c and the
    /// null directions hold exactly by construction. A warm-started search can
    /// drag extra, unstructured null directions into its limit; starting the
    /// reduced problem from its own least-norm point avoids that boundary bias.
    fn block_collapsed_resolve(
        &self,
        nulls: &[Vec<BigRational>],
        options: &SolveOptions,
    ) -> Option<DMatrix<f64>> {
        let blocks = self.null_blocks(nulls)?;
        let s = blocks.len();
        if s == 0 {
            return None;
        }
        let n = self.dim();
        let a_mats: Vec<DMatrix<f64>> = self
            .system
            .a_mats
            .iter()
            .map(|a| {
                DMatrix::from_fn(s, s, |x, y| {
                    blocks[x]
                        .iter()
                        .map(|&i| blocks[y].iter().map(|&j| a[(i, j)]).sum::<f64>())
                        .sum()
                })
            })
            .collect();
        let reduced = FloatSystem { a_mats, targets: self.system.targets.clone() };
        let corrector = reduced.corrector();
        let start = reduced.corrected(&corrector, &DMatrix::zeros(s, s));
        let report = reduced.dr_iterate(&corrector, start, 0.0, options);
        if report.status != SolveStatus::Feasible {
            return None;
        }
        let mut expanded = DMatrix::zeros(n, n);
        for (x, bx) in blocks.iter().enumerate() {
            for (y, by) in blocks.iter().enumerate() {
                for &i in bx {
                    for &j in by {
                        expanded[(i, j)] = report.matrix[(x, y)];
                    }
                }
            }
        }
        Some(expanded)
    }

    /// Iteratively recovers the face a tangentially stalled search is crawling
    /// toward. Each round restricts the system to the accumulated null set
    /// (starting from the seed of exactly forced directions) and re-runs the
    /// iteration warm-started, aiming past the requested tolerance at machine
    /// precision: on the complete face the intersection regains a relative
    /// interior, convergence is linear again, and the collapse leaves crisply
    /// separated null readings for the exact snap. A round that cannot
    /// collapse harvests fresh candidate directions off its iterate and goes
    /// again; when no candidates remain, the best point that at least met the
    /// requested tolerance is returned. The winner is always re-measured
    /// against the original system, and comes with the nulls that produced it.
    fn recover_face(
        &self,
        start: &DMatrix<f64>,
        seed_nulls: Vec<Vec<BigRational>>,
        options: &SolveOptions,
    ) -> Option<(SolveReport, Vec<Vec<BigRational>>)> {
        if self.system.violation(start) > 1e-3 {
            return None;
        }
        let deep = SolveOptions {
            tol: options.tol.min(1e-12),
            max_iterations: options.max_iterations.min(10_000),
        };
        let mut nulls = seed_nulls;
        let mut matrix = start.clone();
        if nulls.is_empty() {
            nulls = self.candidate_null_directions(&matrix, &[], 1e-3);
            if nulls.is_empty() {
                return None;
            }
        }
        let mut best: Option<(SolveReport, Vec<Vec<BigRational>>)> = None;
        for _ in 0..=self.dim() {
            let restricted = self.restricted_system(&nulls);
            let corrector = restricted.corrector();
            let report = restricted.dr_iterate(&corrector, matrix, 0.0, &deep);
            let collapsed = report.status == SolveStatus::Feasible;
            matrix = report.matrix.clone();
            if self.system.violation(&report.matrix) < options.tol {
                best = Some((report, nulls.clone()));
                if collapsed {
                    return best;
                }
            }
            let fresh = self.candidate_null_directions(&matrix, &nulls, 1e-3);
            if fresh.is_empty() {
                return best;
            }
            nulls.extend(fresh);
        }
        best
    }

    /// Exact constraint matrices and targets for the affine system, optionally
    /// augmented with (G v)_i = 0 rows for each null vector v.
    fn exact_system(
        &self,
        nulls: &[Vec<BigRational>],
    ) -> (Vec<Vec<Vec<BigRational>>>, Vec<BigRational>) {
        let n = self.dim();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut mats: Vec<Vec<Vec<BigRational>>> =
            self.constraints.iter().map(|c| self.exact_constraint_matrix(c)).collect();
        let mut targets: Vec<BigRational> =
            self.constraints.iter().map(|c| rat_int(c.target as i64)).collect();
        for v in nulls {
            for i in 0..n {
                let mut a = vec![vec![BigRational::zero(); n]; n];
                for j in 0..n {
                    if !v[j].is_zero() {
                        a[i][j] += &half * &v[j];
                        a[j][i] += &half * &v[j];
                    }
                }
                mats.push(a);
                targets.push(BigRational::zero());
            }
        }
        (mats, targets)
    }

    /// Rounds entries to rationals with denominators bounded by successive
    /// powers of two, projects exactly onto the given affine system, and returns
    /// the first candidate that verifies as a certificate.
    fn snap(&self, matrix: &DMatrix<f64>, nulls: &[Vec<BigRational>], max_exp: u32) -> Option<GramCertificate> {
        let n = self.dim();
        let (mats, targets) = self.exact_system(nulls);
        let m = mats.len();
        let dot = |a: &Vec<Vec<BigRational>>, b: &Vec<Vec<BigRational>>| -> BigRational {
            let mut sum = BigRational::zero();
            for i in 0..n {
                for j in 0..n {
                    if !a[i][j].is_zero() {
                        sum += &a[i][j] * &b[i][j];
                    }
                }
            }
            sum
        };
        let gram: Vec<Vec<BigRational>> =
            (0..m).map(|c| (0..m).map(|d| dot(&mats[c], &mats[d])).collect()).collect();

        for exp in 0..=max_exp {
            let bound = BigInt::one() << exp;
            let mut candidate = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for j in i..n {
                    let value = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
                    let rounded = best_rational_within(&rat_from_f64(value), &bound);
                    candidate[i][j] = rounded.clone();
                    candidate[j][i] = rounded;
                }
            }
            let rhs: Vec<BigRational> = mats
                .iter()
                .zip(&targets)
                .map(|(a, t)| t - dot(a, &candidate))
                .collect();
            if !rhs.iter().all(BigRational::is_zero) {
                let Some(lambda) = solve_linear(gram.clone(), rhs) else {
                    continue;
                };
                for (c, coeff) in lambda.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            if !mats[c][i][j].is_zero() {
                                let delta = coeff * &mats[c][i][j];
                                candidate[i][j] += delta;
                            }
                        }
                    }
                }
            }
            let Ok(cert) = GramCertificate::new(self.params, candidate) else {
                continue;
            };
            if verify_certificate(&cert).is_verified() {
                return Some(cert);
            }
        }
        None
    }

    /// Converts a float solution into an exactly verified certificate, trying a
    /// direct snap first and then a face restriction: null directions are
    /// seeded from singleton-fiber propagation, extended by face recovery, and
    /// enforced exactly while snapping (the restricted re-solve leaves a
    /// comfortable definiteness margin along the face).
    pub fn rationalize_and_verify(
        &self,
        matrix: &DMatrix<f64>,
    ) -> Result<GramCertificate, FeasibilityError> {
        const MAX_EXP: u32 = 20;
        if let Some(cert) = self.snap(matrix, &[], MAX_EXP) {
            return Ok(cert);
        }
        let seed = self.forced_null_vectors();
        if let Some((report, mut nulls)) = self.recover_face(matrix, seed, &SolveOptions::default())
        {
            // The snap needs the face's full null set, not just enough of it to
            // make the float iteration converge; the remaining directions read
            // off crisply from the machine-precision solution.
            nulls.extend(self.candidate_null_directions(&report.matrix, &nulls, 1e-8));
            if let Some(cert) = self.snap(&report.matrix, &nulls, MAX_EXP) {
                return Ok(cert);
            }
            // The warm-started limit can carry extra unstructured null
            // directions that rounding cannot respect; a fresh solve in
            // block-collapsed coordinates lands on a cleanly structured point.
            let deep = SolveOptions { tol: 1e-12, max_iterations: 10_000 };
            if let Some(expanded) = self.block_collapsed_resolve(&nulls, &deep) {
                if let Some(cert) = self.snap(&expanded, &nulls, MAX_EXP) {
                    return Ok(cert);
                }
            }
        }
        Err(FeasibilityError::RationalizationFailed { max_exp: MAX_EXP })
    }
}
