//! Cross-module sweeps: the classification, the feasibility solver, the
//! refutation verifier, and the dense-matrix oracle must tell one story.

use conditionh::classify::{classify, refute_cell, HoldsKind, Status};
use conditionh::feasibility::{FeasibilityProblem, SolveOptions, SolveStatus};
use conditionh::gram::{build_certificate, build_rp_singleton};
use conditionh::matrixcheck::numeric_consistency;
use conditionh::obstructions::replay_refutation;
use conditionh::words::CaseParams;

/// The solver reaches feasibility exactly on HOLDS cells and stalls on FAILS
/// cells, for every odd-r cell with p <= 10.
#[test]
fn solver_agrees_with_classification() {
    for p in 2..=10 {
        for r in (1..=p).step_by(2) {
            let Ok(params) = CaseParams::new(p, r) else { continue };
            let problem = FeasibilityProblem::assemble(&params).expect("assembles");
            let verdict = classify(p, r).expect("in range");
            match verdict.status {
                Status::Holds(_) => {
                    let report = problem.solve(&SolveOptions::default());
                    assert_eq!(
                        report.status,
                        SolveStatus::Feasible,
                        "({p},{r}) holds but solver stalled: {report}"
                    );
                }
                Status::Fails(_) => {
                    let options = SolveOptions { tol: 1e-10, max_iterations: 1500 };
                    let report = problem.solve(&options);
                    assert_eq!(
                        report.status,
                        SolveStatus::Stalled,
                        "({p},{r}) fails but solver claims feasibility: {report}"
                    );
                    assert!(report.residual > 1e-6, "({p},{r}): residual {}", report.residual);
                }
                Status::Unknown => unreachable!("odd r is always classified"),
            }
        }
    }
}

/// Every FAILS verdict through p = 15 is backed by a transcript that replays
/// from its printed facts alone.
#[test]
fn every_failing_cell_has_a_replayable_transcript() {
    let mut replayed = 0;
    for p in 1..=15 {
        for r in 0..=p {
            if p % 2 == 0 && r % 2 == 0 {
                continue;
            }
            let verdict = classify(p, r).expect("in range");
            if matches!(verdict.status, Status::Fails(_)) {
                let cell = refute_cell(p, r).unwrap_or_else(|e| panic!("({p},{r}): {e}"));
                replay_refutation(&cell.refutation)
                    .unwrap_or_else(|e| panic!("({p},{r}): replay failed: {e}"));
                replayed += 1;
            }
        }
    }
    assert!(replayed >= 30, "only {replayed} failing cells found");
}

/// Every directly certified cell with p <= 9 passes the dense-matrix oracle.
#[test]
fn certified_cells_pass_the_numeric_oracle() {
    let mut checked = 0;
    for p in 1..=9 {
        for r in 0..=p {
            let verdict = classify(p, r).expect("in range");
            let cert = match verdict.status {
                Status::Holds(HoldsKind::Cert(kind)) => {
                    build_certificate(kind, p, r).expect("builds")
                }
                Status::Holds(HoldsKind::RpSingleton) => build_rp_singleton(p).expect("builds"),
                _ => continue,
            };
            let report = numeric_consistency(&cert, 3, 3, 7, 1e-9)
                .unwrap_or_else(|e| panic!("({p},{r}): {e}"));
            assert!(report.max_rel_dev <= 1e-9, "({p},{r}): {}", report.max_rel_dev);
            checked += 1;
        }
    }
    assert!(checked >= 15, "only {checked} certified cells found");
}
