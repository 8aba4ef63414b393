//! Exact certificates and refutations for nonnegativity of the coefficients
//! α_{p,r}(A,B) of Tr (A + tB)^p for positive semidefinite A, B.
//!
//! The crate enumerates binary words and their cyclic classes ([`words`]), builds and
//! verifies exact rational Gram certificates for the key linear system ([`gram`]),
//! produces machine-checkable refutation transcripts where no certificate exists
//! ([`obstructions`]), runs a floating-point feasibility solver with exact
//! rationalization ([`feasibility`]), cross-checks everything against dense matrix
//! arithmetic ([`matrixcheck`]), and exposes the resulting classification ([`classify`]).

pub mod words;
pub(crate) mod exact;
pub mod gram;
pub mod obstructions;
pub mod feasibility;
pub mod matrixcheck;
pub mod classify;
pub mod acceptance;
