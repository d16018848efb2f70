use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::curvature::CurvatureReport;
use crate::error::{Error, Result};

/// Quantities a custom rate may depend on.
pub struct RateContext<'a> {
    /// Raw state: structure constants or family parameters.
    pub state: &'a [f64],
    pub curvature: &'a CurvatureReport,
    pub mu_p_norm2: f64,
}

pub type RateFn = Arc<dyn Fn(&RateContext) -> f64 + Send + Sync>;

#[derive(Clone, Default)]
pub enum NormalizationStrategy {
    #[default]
    Unnormalized,
    /// Keeps the volume element fixed: `r = −R/n`.
    VolumeElement,
    /// Keeps `R` fixed: `r = −tr Ric²/R`.
    ScalarCurvature,
    /// Keeps `‖μ_p‖` fixed: `r = 4 tr(Ric M)/‖μ_p‖²`.
    BracketNorm,
    /// Keeps `tr Ric²` fixed; only available through [`super::rescale_to_ricci_norm`].
    RicciNorm,
    Custom(RateFn),
}

impl NormalizationStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Unnormalized => "unnormalized",
            Self::VolumeElement => "volume-element",
            Self::ScalarCurvature => "scalar-curvature",
            Self::BracketNorm => "bracket-norm",
            Self::RicciNorm => "ricci-norm",
            Self::Custom(_) => "custom",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "unnormalized" => Self::Unnormalized,
            "volume-element" => Self::VolumeElement,
            "scalar-curvature" => Self::ScalarCurvature,
            "bracket-norm" => Self::BracketNorm,
            "ricci-norm" => Self::RicciNorm,
            _ => return None,
        })
    }

    pub fn constant(r: f64) -> Self {
        Self::Custom(Arc::new(move |_| r))
    }

    pub fn is_unnormalized(&self) -> bool {
        matches!(self, Self::Unnormalized)
    }

    pub fn rate(&self, ctx: &RateContext) -> Result<f64> {
        let curv = ctx.curvature;
        let n = curv.ric.nrows() as f64;
        match self {
            Self::Unnormalized => Ok(0.0),
            Self::VolumeElement => Ok(-curv.r / n),
            Self::ScalarCurvature => {
                if curv.r == 0.0 {
                    return Err(Error::ZeroScalarCurvature);
                }
                Ok(-(&curv.ric * &curv.ric).trace() / curv.r)
            }
            Self::BracketNorm => {
                if ctx.mu_p_norm2 == 0.0 {
                    return Err(Error::ZeroBracketNorm);
                }
                Ok(4.0 * (&curv.ric * &curv.m).trace() / ctx.mu_p_norm2)
            }
            Self::RicciNorm => Err(Error::RequiresReparametrization),
            Self::Custom(f) => Ok(f(ctx)),
        }
    }
}

impl fmt::Debug for NormalizationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for NormalizationStrategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}
