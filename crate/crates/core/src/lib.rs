//! Ricci flow on simply connected homogeneous spaces, realised as the bracket
//! flow on structure constants of `g = k ⊕ p`.
//!
//! A homogeneous space with `q`-dimensional isotropy and `n`-dimensional tangent
//! space is encoded by a skew-symmetric bracket on a fixed `(q + n)`-dimensional
//! vector space. Curvature is computed from the bracket alone, and the Ricci
//! flow becomes an ODE on brackets whose right-hand side is `-π(diag(0, Ric))μ`.
//!
//! Module map:
//!
//! * [`bracket`]: structure-constant tensors, validation of the homogeneity
//!   conditions, the `GL` action and its derivative `π`, rescaling.
//! * [`curvature`]: mean-curvature vector, Killing and moment-map operators,
//!   Ricci operator, scalar curvature and the maps `δ`, `δᵗ`, `Δ`.
//! * [`flow`]: bracket, normalized and metric flows, gauge ODEs,
//!   reparametrization and trajectory output.
//! * [`analysis`]: evolution-identity audits, derivation algebras, soliton
//!   residuals, limit classification and injectivity-radius bounds.
//! * [`catalog`]: the parameterized three-dimensional and semisimple families
//!   with their closed-form curvature and reduced ODEs.

pub mod analysis;
pub mod bracket;
pub mod catalog;
pub mod curvature;
mod error;
pub mod flow;
pub mod linalg;
pub mod samplers;

pub use bracket::{BracketTensor, ComponentSplit, H2Status, HomogeneousPoint, DEFAULT_VALIDATION_TOL};
pub use curvature::CurvatureReport;
pub use error::{Error, Result};
