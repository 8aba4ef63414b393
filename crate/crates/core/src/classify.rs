//! The complete certificate-existence classification for p or r odd.
//!
//! Every verdict is machine-checkable: HOLDS names a builder whose output
//! verifies exactly, FAILS names a refutation that replays, and mirrored cells
//! point at the partner (p, p−r) — the A↔B interchange — whose verifier runs
//! instead. Cells with p and r both even are out of classified range and
//! report UNKNOWN, except the trivial edges r = 0 and r = p.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::gram::{build_certificate, build_rp_singleton, CertKind};
use crate::obstructions::{
    forced_entry_propagation, refute_9_3, verify_obstruction, witness_family, Family,
    ObstructionOutcome, Propagation, Refutation,
};
use crate::words::CaseParams;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("parameters out of range: need p >= 1 and 0 <= r <= p, got p={p}, r={r}")]
    Domain { p: usize, r: usize },
    #[error("({p},{r}) is classified {status}; no refutation exists")]
    NotRefutable { p: usize, r: usize, status: String },
    #[error("refutation failed at ({p},{r}): {detail}")]
    RefutationFailed { p: usize, r: usize, detail: String },
}

/// The two trivial boundary columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSide {
    RZero,
    RP,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoldsKind {
    /// A named builder produces a verified certificate directly.
    Cert(CertKind),
    /// r = p with p odd: the derived singleton certificate.
    RpSingleton,
    /// r = 0 (any p) or r = p (even p): α is a trace power, no matrix involved.
    TrivialEdge(EdgeSide),
    /// p odd, r even: the certificate lives at the interchange partner.
    Mirror { partner_r: usize, cert: CertKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectRefutation {
    /// Table-driven forced entries and minor at (9,3).
    P9R3,
    /// Forced-entry propagation at the self-mirrored cell (6,3).
    P6R3Propagation,
    Witness(Family),
}

impl DirectRefutation {
    pub fn token(&self) -> &'static str {
        match self {
            DirectRefutation::P9R3 | DirectRefutation::P6R3Propagation => "cs-propagation",
            DirectRefutation::Witness(family) => family.token(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailsKind {
    Direct(DirectRefutation),
    /// The refutation runs at the interchange partner (p, partner_r).
    Mirror { partner_r: usize, refutation: DirectRefutation },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Holds(HoldsKind),
    Fails(FailsKind),
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub p: usize,
    pub r: usize,
    pub status: Status,
}

impl Verdict {
    pub fn status_token(&self) -> &'static str {
        match self.status {
            Status::Holds(_) => "HOLDS",
            Status::Fails(_) => "FAILS",
            Status::Unknown => "UNKNOWN",
        }
    }

    /// One fixed-format table line, e.g. `p=5 r=1 HOLDS cert=R1`.
    pub fn table_line(&self) -> String {
        let (p, r) = (self.p, self.r);
        let mirror_note =
            |partner_r: usize| format!("(mirror of ({p},{partner_r}) by A<->B interchange)");
        let detail = match self.status {
            Status::Holds(HoldsKind::Cert(kind)) => format!("cert={}", kind.token()),
            Status::Holds(HoldsKind::RpSingleton) => "cert=RP (derived singleton)".to_string(),
            Status::Holds(HoldsKind::TrivialEdge(EdgeSide::RZero)) => {
                "trivial r=0 (derived: alpha = Tr(A^p))".to_string()
            }
            Status::Holds(HoldsKind::TrivialEdge(EdgeSide::RP)) => {
                "trivial r=p (derived: alpha = Tr(B^p))".to_string()
            }
            Status::Holds(HoldsKind::Mirror { partner_r, cert }) => {
                format!("cert={} {}", cert.token(), mirror_note(partner_r))
            }
            Status::Fails(FailsKind::Direct(refutation)) => {
                format!("refutation={}", refutation.token())
            }
            Status::Fails(FailsKind::Mirror { partner_r, refutation }) => {
                format!("refutation={} {}", refutation.token(), mirror_note(partner_r))
            }
            Status::Unknown => "(p and r both even)".to_string(),
        };
        format!("p={p} r={r} {} {detail}", self.status_token())
    }

    pub fn json(&self) -> serde_json::Value {
        let mut value = json!({
            "p": self.p,
            "r": self.r,
            "status": self.status_token(),
        });
        let obj = value.as_object_mut().expect("object");
        match self.status {
            Status::Holds(HoldsKind::Cert(kind)) => {
                obj.insert("certificate".into(), json!(kind.token()));
            }
            Status::Holds(HoldsKind::RpSingleton) => {
                obj.insert("certificate".into(), json!("RP"));
                obj.insert("note".into(), json!("derived singleton"));
            }
            Status::Holds(HoldsKind::TrivialEdge(side)) => {
                let note = match side {
                    EdgeSide::RZero => "alpha = Tr(A^p)",
                    EdgeSide::RP => "alpha = Tr(B^p)",
                };
                obj.insert("edge".into(), json!(match side {
                    EdgeSide::RZero => "r=0",
                    EdgeSide::RP => "r=p",
                }));
                obj.insert("note".into(), json!(note));
            }
            Status::Holds(HoldsKind::Mirror { partner_r, cert }) => {
                obj.insert("certificate".into(), json!(cert.token()));
                obj.insert("mirror_of".into(), json!({"p": self.p, "r": partner_r}));
            }
            Status::Fails(FailsKind::Direct(refutation)) => {
                obj.insert("refutation".into(), json!(refutation.token()));
            }
            Status::Fails(FailsKind::Mirror { partner_r, refutation }) => {
                obj.insert("refutation".into(), json!(refutation.token()));
                obj.insert("mirror_of".into(), json!({"p": self.p, "r": partner_r}));
            }
            Status::Unknown => {
                obj.insert("note".into(), json!("p and r both even"));
            }
        }
        value
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.table_line())
    }
}

/// The refutation mechanism at a directly-refuted odd-r cell, or None if the
/// cell holds. Callers have already reduced mirrors to their partner.
fn direct_fails(p: usize, r: usize) -> Option<DirectRefutation> {
    debug_assert!(r % 2 == 1 && r <= p);
    if p % 2 == 1 {
        match r {
            _ if r == 1 || r == p || r + 2 == p || r + 4 == p => None,
            3 if p == 9 => Some(DirectRefutation::P9R3),
            3 if p == 11 => None,
            3 => Some(DirectRefutation::Witness(Family::B)),
            _ => Some(DirectRefutation::Witness(Family::A)),
        }
    } else {
        match r {
            _ if r == 1 || r + 1 == p => None,
            3 if p == 6 => Some(DirectRefutation::P6R3Propagation),
            3 => None, // handled as a mirror of (p, p−3)
            _ => Some(DirectRefutation::Witness(Family::C)),
        }
    }
}

fn holds_cert_kind(p: usize, r: usize) -> Option<CertKind> {
    debug_assert!(r % 2 == 1 && r <= p);
    if p % 2 == 1 {
        if r == 1 {
            Some(CertKind::R1)
        } else if r + 2 == p {
            Some(CertKind::Rpm2)
        } else if r + 4 == p {
            Some(CertKind::Partition)
        } else if (p, r) == (11, 3) {
            Some(CertKind::P11R3)
        } else {
            None
        }
    } else if r == 1 {
        Some(CertKind::Case2R1)
    } else if r + 1 == p {
        Some(CertKind::Case2Rpm1)
    } else {
        None
    }
}

pub fn classify(p: usize, r: usize) -> Result<Verdict, ClassifyError> {
    if p < 1 || r > p {
        return Err(ClassifyError::Domain { p, r });
    }
    let status = if r == 0 {
        Status::Holds(HoldsKind::TrivialEdge(EdgeSide::RZero))
    } else if r == p {
        if p % 2 == 1 {
            Status::Holds(HoldsKind::RpSingleton)
        } else {
            Status::Holds(HoldsKind::TrivialEdge(EdgeSide::RP))
        }
    } else if r % 2 == 1 {
        if let Some(kind) = holds_cert_kind(p, r) {
            Status::Holds(HoldsKind::Cert(kind))
        } else if let Some(refutation) = direct_fails(p, r) {
            Status::Fails(FailsKind::Direct(refutation))
        } else {
            // Even p, r = 3, p ≥ 8: refuted at the interchange partner.
            debug_assert!(p % 2 == 0 && r == 3 && p >= 8);
            let partner_r = p - 3;
            let refutation =
                direct_fails(p, partner_r).expect("partner of even-p r=3 is family (c)");
            Status::Fails(FailsKind::Mirror { partner_r, refutation })
        }
    } else if p % 2 == 1 {
        // p odd, r even: everything reduces to the odd partner (p, p−r).
        let partner_r = p - r;
        if let Some(kind) = holds_cert_kind(p, partner_r) {
            Status::Holds(HoldsKind::Mirror { partner_r, cert: kind })
        } else {
            let refutation = direct_fails(p, partner_r).expect("odd cells are fully classified");
            Status::Fails(FailsKind::Mirror { partner_r, refutation })
        }
    } else {
        Status::Unknown
    };
    Ok(Verdict { p, r, status })
}

/// All verdicts for 0 ≤ r ≤ p ≤ max_p, one fixed-format line per cell.
pub fn table(max_p: usize) -> String {
    let mut lines = Vec::new();
    for p in 1..=max_p {
        for r in 0..=p {
            lines.push(classify(p, r).expect("in-range cell").table_line());
        }
    }
    lines.join("\n")
}

/// A concrete refutation for a FAILS cell, run directly or at the interchange
/// partner named by the verdict.
pub struct CellRefutation {
    /// Set when the transcript belongs to the partner cell (p, partner_r).
    pub partner: Option<(usize, usize)>,
    pub refutation: Refutation,
}

fn run_direct(p: usize, r: usize, direct: DirectRefutation) -> Result<Refutation, ClassifyError> {
    let fail = |detail: String| ClassifyError::RefutationFailed { p, r, detail };
    match direct {
        DirectRefutation::P9R3 => Ok(refute_9_3()),
        DirectRefutation::P6R3Propagation => {
            let params = CaseParams::new(p, r).map_err(|e| fail(e.to_string()))?;
            match forced_entry_propagation(&params) {
                Propagation::Infeasible(refutation) => Ok(refutation),
                Propagation::FeasibleSoFar { .. } => {
                    Err(fail("forced-entry propagation found no contradiction".into()))
                }
            }
        }
        DirectRefutation::Witness(family) => {
            let witness = witness_family(p, r).map_err(|e| fail(e.to_string()))?;
            if witness.family() != family {
                return Err(fail(format!(
                    "expected family {}, constructor chose {}",
                    family.token(),
                    witness.family().token()
                )));
            }
            match verify_obstruction(&witness) {
                ObstructionOutcome::Refuted(refutation) => Ok(refutation),
                ObstructionOutcome::Rejected { condition } => Err(fail(condition)),
            }
        }
    }
}

/// Produces the refutation transcript backing a FAILS verdict; errors with
/// NotRefutable for HOLDS/UNKNOWN cells.
pub fn refute_cell(p: usize, r: usize) -> Result<CellRefutation, ClassifyError> {
    let verdict = classify(p, r)?;
    match verdict.status {
        Status::Fails(FailsKind::Direct(direct)) => {
            Ok(CellRefutation { partner: None, refutation: run_direct(p, r, direct)? })
        }
        Status::Fails(FailsKind::Mirror { partner_r, refutation }) => Ok(CellRefutation {
            partner: Some((p, partner_r)),
            refutation: run_direct(p, partner_r, refutation)?,
        }),
        _ => Err(ClassifyError::NotRefutable {
            p,
            r,
            status: verdict.status_token().to_string(),
        }),
    }
}

/// Re-derives the machine evidence behind a verdict: certificates are rebuilt
/// and re-verified, refutations re-run. Trivial edges and UNKNOWN have nothing
/// to check.
pub fn machine_check(verdict: &Verdict) -> Result<(), String> {
    let (p, r) = (verdict.p, verdict.r);
    match verdict.status {
        Status::Holds(HoldsKind::Cert(kind)) => {
            build_certificate(kind, p, r).map(|_| ()).map_err(|e| e.to_string())
        }
        Status::Holds(HoldsKind::Mirror { partner_r, cert }) => {
            build_certificate(cert, p, partner_r).map(|_| ()).map_err(|e| e.to_string())
        }
        Status::Holds(HoldsKind::RpSingleton) => {
            build_rp_singleton(p).map(|_| ()).map_err(|e| e.to_string())
        }
        Status::Holds(HoldsKind::TrivialEdge(_)) | Status::Unknown => Ok(()),
        Status::Fails(_) => refute_cell(p, r).map(|_| ()).map_err(|e| e.to_string()),
    }
}

/// Monotonicity closure: (p,r) proves (p′,r′) when, after optionally swapping
/// r ↔ p−r, p ≥ p′, r ≥ r′ and p−r ≥ p′−r′. Returns the first witnessing
/// source pair from `known` in ascending order.
pub fn hillar_implied(
    known: &BTreeSet<(usize, usize)>,
    target: (usize, usize),
) -> Option<(usize, usize)> {
    let (tp, tr) = target;
    let dominates = |p: usize, r: usize| p >= tp && r >= tr && p - r >= tp - tr;
    known
        .iter()
        .find(|&&(p, r)| dominates(p, r) || dominates(p, p - r))
        .copied()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BmvStatus {
    NonnegProved { via: (usize, usize) },
    Open,
}

impl fmt::Display for BmvStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BmvStatus::NonnegProved { via: (p, r) } => write!(f, "NONNEG_PROVED via ({p},{r})"),
            BmvStatus::Open => write!(f, "OPEN"),
        }
    }
}

/// Whether α_{p,r} ≥ 0 follows from some certificate-backed cell with first
/// coordinate at most `bound`, through monotonicity.
pub fn bmv_status(p: usize, r: usize, bound: usize) -> Result<BmvStatus, ClassifyError> {
    if p < 1 || r > p || bound < p {
        return Err(ClassifyError::Domain { p, r });
    }
    let mut known = BTreeSet::new();
    for sp in 1..=bound {
        for sr in 0..=sp {
            if matches!(classify(sp, sr)?.status, Status::Holds(_)) {
                known.insert((sp, sr));
            }
        }
    }
    Ok(match hillar_implied(&known, (p, r)) {
        Some(via) => BmvStatus::NonnegProved { via },
        None => BmvStatus::Open,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(p: usize, r: usize) -> Status {
        classify(p, r).unwrap().status
    }

    #[test]
    fn frozen_table_lines() {
        let expect = [
            (5, 1, "p=5 r=1 HOLDS cert=R1"),
            (5, 2, "p=5 r=2 HOLDS cert=RPM2 (mirror of (5,3) by A<->B interchange)"),
            (3, 3, "p=3 r=3 HOLDS cert=RP (derived singleton)"),
            (4, 0, "p=4 r=0 HOLDS trivial r=0 (derived: alpha = Tr(A^p))"),
            (4, 4, "p=4 r=4 HOLDS trivial r=p (derived: alpha = Tr(B^p))"),
            (2, 1, "p=2 r=1 HOLDS cert=CASE2_R1"),
            (11, 3, "p=11 r=3 HOLDS cert=P11R3"),
            (13, 9, "p=13 r=9 HOLDS cert=PARTITION"),
            (9, 3, "p=9 r=3 FAILS refutation=cs-propagation"),
            (6, 3, "p=6 r=3 FAILS refutation=cs-propagation"),
            (13, 3, "p=13 r=3 FAILS refutation=witness-family-b"),
            (11, 5, "p=11 r=5 FAILS refutation=witness-family-a"),
            (12, 5, "p=12 r=5 FAILS refutation=witness-family-c"),
            (8, 3, "p=8 r=3 FAILS refutation=witness-family-c (mirror of (8,5) by A<->B interchange)"),
            (9, 6, "p=9 r=6 FAILS refutation=cs-propagation (mirror of (9,3) by A<->B interchange)"),
            (14, 4, "p=14 r=4 UNKNOWN (p and r both even)"),
        ];
        for (p, r, line) in expect {
            assert_eq!(classify(p, r).unwrap().table_line(), line);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(classify(0, 0), Err(ClassifyError::Domain { .. })));
        assert!(matches!(classify(5, 6), Err(ClassifyError::Domain { .. })));
        assert!(matches!(bmv_status(5, 3, 4), Err(ClassifyError::Domain { .. })));
    }

    #[test]
    fn spec_examples() {
        assert_eq!(status(11, 3), Status::Holds(HoldsKind::Cert(CertKind::P11R3)));
        assert_eq!(status(9, 3), Status::Fails(FailsKind::Direct(DirectRefutation::P9R3)));
        assert_eq!(status(13, 9), Status::Holds(HoldsKind::Cert(CertKind::Partition)));
        assert_eq!(
            status(12, 5),
            Status::Fails(FailsKind::Direct(DirectRefutation::Witness(Family::C)))
        );
        assert_eq!(
            status(9, 6),
            Status::Fails(FailsKind::Mirror {
                partner_r: 3,
                refutation: DirectRefutation::P9R3
            })
        );
        assert_eq!(status(14, 4), Status::Unknown);
    }

    #[test]
    fn verdicts_are_machine_checkable_through_p_15() {
        for p in 1..=15 {
            for r in 0..=p {
                if p % 2 == 0 && r % 2 == 0 {
                    continue;
                }
                let verdict = classify(p, r).unwrap();
                machine_check(&verdict).unwrap_or_else(|e| panic!("({p},{r}): {e}"));
            }
        }
    }

    #[test]
    fn mirror_coherence_for_odd_p() {
        for p in (1..=15).step_by(2) {
            for r in 0..=p {
                let a = classify(p, r).unwrap();
                let b = classify(p, p - r).unwrap();
                assert_eq!(
                    std::mem::discriminant(&a.status),
                    std::mem::discriminant(&b.status),
                    "({p},{r}) vs ({p},{})",
                    p - r
                );
            }
        }
    }

    #[test]
    fn refute_cell_behaviour() {
        let direct = refute_cell(9, 3).unwrap();
        assert!(direct.partner.is_none());
        assert!(direct.refutation.to_string().contains("cs-propagation"));

        let mirrored = refute_cell(8, 3).unwrap();
        assert_eq!(mirrored.partner, Some((8, 5)));
        assert_eq!(mirrored.refutation.params.r(), 5);

        assert!(matches!(
            refute_cell(7, 3),
            Err(ClassifyError::NotRefutable { .. })
        ));
        assert!(matches!(
            refute_cell(14, 4),
            Err(ClassifyError::NotRefutable { .. })
        ));
    }

    #[test]
    fn hillar_closure_examples() {
        let known: BTreeSet<_> = [(7, 3)].into_iter().collect();
        assert_eq!(hillar_implied(&known, (6, 3)), Some((7, 3)));

        let known: BTreeSet<_> =
            (5..=25).step_by(2).map(|p| (p, p - 4)).collect();
        assert_eq!(hillar_implied(&known, (20, 18)), Some((23, 19)));

        assert_eq!(hillar_implied(&BTreeSet::new(), (5, 3)), None);
    }

    #[test]
    fn hillar_is_monotone_in_known() {
        let small: BTreeSet<_> = [(7, 3)].into_iter().collect();
        let large: BTreeSet<_> = [(5, 1), (7, 3), (9, 5)].into_iter().collect();
        for target in [(6, 3), (7, 3), (5, 2), (9, 7), (4, 2)] {
            if hillar_implied(&small, target).is_some() {
                assert!(hillar_implied(&large, target).is_some(), "{target:?}");
            }
        }
    }

    #[test]
    fn bmv_status_examples() {
        assert_eq!(bmv_status(6, 3, 7).unwrap(), BmvStatus::NonnegProved { via: (7, 3) });
        assert_eq!(
            bmv_status(6, 3, 7).unwrap().to_string(),
            "NONNEG_PROVED via (7,3)"
        );
        assert_eq!(bmv_status(100, 3, 105).unwrap(), BmvStatus::NonnegProved { via: (101, 4) });
        assert_eq!(bmv_status(14, 7, 1000).unwrap(), BmvStatus::Open);
        assert_eq!(bmv_status(9, 3, 11).unwrap(), BmvStatus::NonnegProved { via: (11, 3) });
    }

    #[test]
    fn json_shapes() {
        let v = classify(5, 2).unwrap().json();
        assert_eq!(v["status"], "HOLDS");
        assert_eq!(v["certificate"], "RPM2");
        assert_eq!(v["mirror_of"]["r"], 3);
        let v = classify(9, 3).unwrap().json();
        assert_eq!(v["refutation"], "cs-propagation");
        let v = classify(14, 4).unwrap().json();
        assert_eq!(v["status"], "UNKNOWN");
    }

    #[test]
    fn table_covers_every_cell() {
        let text = table(4);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2 + 3 + 4 + 5);
        assert_eq!(lines[0], "p=1 r=0 HOLDS trivial r=0 (derived: alpha = Tr(A^p))");
        assert_eq!(lines[1], "p=1 r=1 HOLDS cert=RP (derived singleton)");
        assert!(lines.iter().all(|l| l.starts_with("p=")));
    }
}
