//! Audits and diagnostics on brackets and trajectories.

mod algebra;
mod audit;
mod classify;
mod injectivity;

pub use algebra::{
    derivation_algebra, einstein_residual, p_derivations, soliton_residual, soliton_residual_with, DerivationBasis,
    SolitonFit, DEFAULT_RANK_TOL,
};
pub use audit::{identity_audit, identity_audit_with, AuditReport, IdentityCheck, DEFAULT_AUDIT_TOL, IDENTITY_NAMES};
pub use classify::{classify_limit, classify_limit_with, ClassifyOptions, LimitClassification, Verdict, Witness};
pub use injectivity::{berger_bound, generic_bound, injectivity_lower_bound, InjectivityBound, Radius};

use serde::Serializer;

use crate::linalg::{rows_of, Mat};

pub(crate) fn ser_mat<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(rows_of(m))
}
