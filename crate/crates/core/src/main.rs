//! Command-line interface: classification, certificate construction and
//! verification, refutation transcripts, the feasibility solver, and the
//! dense-matrix consistency oracle.
//!
//! Exit codes: 0 on success, 1 when a verification, refutation, feasibility,
//! or consistency run fails, 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use conditionh::acceptance::run_all;
use conditionh::classify::{classify, refute_cell, table, ClassifyError, HoldsKind, Status};
use conditionh::feasibility::{FeasibilityProblem, SolveOptions, SolveStatus};
use conditionh::gram::{
    build_certificate, build_rp_singleton, parse_certificate, verify_certificate,
    write_certificate, CertKind, CertVerification, GramCertificate, GramError,
};
use conditionh::matrixcheck::{numeric_consistency, MatrixCheckError};
use conditionh::words::CaseParams;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "conditionh", version, about = "Exact certificates and refutations for the trace-polynomial nonnegativity condition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one cell of the certificate-existence table.
    Classify {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        /// Emit the verdict as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the classification table for 1 <= p <= max-p, 0 <= r <= p.
    Table {
        #[arg(long = "max-p")]
        max_p: usize,
    },
    /// Build or verify exact certificate files.
    #[command(subcommand)]
    Cert(CertCommand),
    /// Print a machine-checkable refutation transcript for a failing cell.
    Refute {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
    },
    /// Run the feasibility solver on a cell, optionally snapping the solution
    /// to an exact verified certificate.
    Sdp {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        /// Maximum constraint violation accepted as feasible.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = 50_000)]
        max_iters: usize,
        /// Snap the floating-point solution to exact rationals and verify.
        #[arg(long)]
        rationalize: bool,
        /// Write the rationalized certificate here (requires --rationalize).
        #[arg(long, requires = "rationalize")]
        out: Option<PathBuf>,
    },
    /// Compare a certificate against dense-matrix evaluation on random
    /// positive semidefinite inputs.
    Numcheck {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        /// Certificate file; defaults to the built-in certificate for the cell.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Matrix dimension for the random inputs.
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Maximum accepted relative deviation per trial.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run every acceptance criterion, one pass/fail line each.
    Selftest,
}

#[derive(Subcommand)]
enum CertCommand {
    /// Build a named certificate; print it, or save it with --out.
    Build {
        /// One of R1, RPM2, PARTITION, P11R3, CASE2_R1, CASE2_RPM1, RP.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a certificate file exactly.
    Verify {
        #[arg(long)]
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    // Die quietly when a downstream pager or `head` closes the pipe, like
    // other line-oriented tools, instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Classify { p, r, json } => cmd_classify(p, r, json),
        Command::Table { max_p } => {
            let text = table(max_p);
            if !text.is_empty() {
                println!("{text}");
            }
            0
        }
        Command::Cert(CertCommand::Build { kind, p, r, out }) => {
            cmd_cert_build(&kind, p, r, out.as_deref())
        }
        Command::Cert(CertCommand::Verify { file }) => cmd_cert_verify(&file),
        Command::Refute { p, r } => cmd_refute(p, r),
        Command::Sdp { p, r, tol, max_iters, rationalize, out } => {
            cmd_sdp(p, r, tol, max_iters, rationalize, out.as_deref())
        }
        Command::Numcheck { p, r, cert, trials, n, seed, tol } => {
            cmd_numcheck(p, r, cert.as_deref(), trials, n, seed, tol)
        }
        Command::Selftest => cmd_selftest(),
    };
    ExitCode::from(code)
}

fn cmd_classify(p: usize, r: usize, json: bool) -> u8 {
    match classify(p, r) {
        Ok(verdict) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&verdict.json()).expect("serializable")
                );
            } else {
                println!("{verdict}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_cert_build(kind: &str, p: usize, r: usize, out: Option<&Path>) -> u8 {
    let built: Result<GramCertificate, GramError> = if kind == "RP" {
        if r != p {
            eprintln!("error: certificate kind RP requires r = p; got p={p}, r={r}");
            return EXIT_USAGE;
        }
        build_rp_singleton(p)
    } else {
        match CertKind::from_str(kind) {
            Ok(kind) => build_certificate(kind, p, r),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    };
    match built {
        Ok(cert) => {
            let text = write_certificate(&cert);
            match out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                    println!(
                        "wrote verified certificate {kind} (p={p}, r={r}, dim={}) to {}",
                        cert.dim(),
                        path.display()
                    );
                }
                None => print!("{text}"),
            }
            0
        }
        Err(e @ GramError::ConstructionInvalid(_)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_cert_verify(file: &Path) -> u8 {
    let text = match fs::read_to_string(file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return EXIT_USAGE;
        }
    };
    let cert = match parse_certificate(&text) {
        Ok(cert) => cert,
        Err(e) => {
            println!("REJECTED: {e}");
            return EXIT_FAILURE;
        }
    };
    match verify_certificate(&cert) {
        CertVerification::Verified => {
            println!(
                "VERIFIED p={} r={} dim={}",
                cert.params().p(),
                cert.params().r(),
                cert.dim()
            );
            0
        }
        CertVerification::Rejected(reason) => {
            println!("REJECTED: {reason}");
            EXIT_FAILURE
        }
    }
}

fn cmd_refute(p: usize, r: usize) -> u8 {
    match refute_cell(p, r) {
        Ok(cell) => {
            if let Some((pp, pr)) = cell.partner {
                println!(
                    "refutation runs at the interchange partner ({pp},{pr}) of ({p},{r})"
                );
            }
            println!("{}", cell.refutation);
            0
        }
        Err(e @ ClassifyError::Domain { .. }) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn cmd_sdp(
    p: usize,
    r: usize,
    tol: f64,
    max_iters: usize,
    rationalize: bool,
    out: Option<&Path>,
) -> u8 {
    if r > p || p == 0 {
        eprintln!("error: need p >= 1 and 0 <= r <= p; got p={p}, r={r}");
        return EXIT_USAGE;
    }
    let (sp, sr) = if r % 2 == 1 {
        (p, r)
    } else if p % 2 == 1 {
        println!("solving the interchange partner ({p},{}) of ({p},{r})", p - r);
        (p, p - r)
    } else {
        eprintln!("error: no odd-parameter formulation exists when p and r are both even");
        return EXIT_USAGE;
    };
    let params = match CaseParams::new(sp, sr) {
        Ok(params) => params,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let problem = match FeasibilityProblem::assemble(&params) {
        Ok(problem) => problem,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let report = problem.solve(&SolveOptions { tol, max_iterations: max_iters });
    println!("{report}");
    if rationalize {
        if report.status != SolveStatus::Feasible {
            eprintln!("error: no feasible point to rationalize (solver stalled)");
            return EXIT_FAILURE;
        }
        match problem.rationalize_and_verify(&report.matrix) {
            Ok(cert) => {
                println!("RATIONALIZED exact certificate verified (dim={})", cert.dim());
                if let Some(path) = out {
                    if let Err(e) = fs::write(path, write_certificate(&cert)) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                    println!("wrote certificate to {}", path.display());
                }
            }
            Err(e) => {
                eprintln!("error: rationalization failed: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    0
}

fn builtin_certificate(p: usize, r: usize) -> Result<GramCertificate, String> {
    let verdict = classify(p, r).map_err(|e| e.to_string())?;
    match verdict.status {
        Status::Holds(HoldsKind::Cert(kind)) => {
            build_certificate(kind, p, r).map_err(|e| e.to_string())
        }
        Status::Holds(HoldsKind::RpSingleton) => build_rp_singleton(p).map_err(|e| e.to_string()),
        _ => Err(format!(
            "no built-in certificate for ({p},{r}) — classified as `{verdict}`; supply --cert"
        )),
    }
}

fn cmd_numcheck(
    p: usize,
    r: usize,
    cert_path: Option<&Path>,
    trials: usize,
    n: usize,
    seed: u64,
    tol: f64,
) -> u8 {
    let cert = match cert_path {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(text) => text,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            };
            match parse_certificate(&text) {
                Ok(cert) => {
                    if cert.params().p() != p || cert.params().r() != r {
                        eprintln!(
                            "error: certificate file is for (p={}, r={}), not (p={p}, r={r})",
                            cert.params().p(),
                            cert.params().r()
                        );
                        return EXIT_USAGE;
                    }
                    cert
                }
                Err(e) => {
                    println!("REJECTED: {e}");
                    return EXIT_FAILURE;
                }
            }
        }
        None => match builtin_certificate(p, r) {
            Ok(cert) => cert,
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_USAGE;
            }
        },
    };
    match numeric_consistency(&cert, trials, n, seed, tol) {
        Ok(report) => {
            println!("{report}");
            0
        }
        Err(e @ MatrixCheckError::TrialFailed { .. }) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_selftest() -> u8 {
    let results = run_all();
    let mut all_passed = true;
    for result in &results {
        println!("{}", result.line());
        all_passed &= result.passed;
    }
    if all_passed {
        0
    } else {
        EXIT_FAILURE
    }
}
