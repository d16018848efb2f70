use std::f64::consts::PI;

use serde::{Serialize, Serializer};

use crate::bracket::{BracketTensor, HomogeneousPoint};
use crate::catalog::{Family, ReducedFamilyPoint};
use crate::error::Result;

/// A radius that may be unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radius {
    Finite(f64),
    Infinite,
}

impl Radius {
    pub fn value(self) -> f64 {
        match self {
            Radius::Finite(r) => r,
            Radius::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Radius::Infinite)
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Finite(r) => s.serialize_f64(*r),
            Radius::Infinite => s.serialize_str("infinity"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InjectivityBound {
    /// `π/‖μ‖`, valid for every bracket.
    pub generic: Radius,
    /// Closed form for the isotropic three-dimensional family, when it applies.
    pub family: Option<Radius>,
    /// The larger of the two.
    pub best: Radius,
}

/// `π/‖μ‖_aux`; unbounded for the zero bracket.
pub fn generic_bound(mu: &BracketTensor) -> Radius {
    let norm = mu.norm_aux();
    if norm == 0.0 {
        Radius::Infinite
    } else {
        Radius::Finite(PI / norm)
    }
}

/// For `μ_{a,b}` with isotropy: `b ≤ 0` gives no bound, otherwise
/// `min{2π|a|/b, 2π/√b, π/√(2(a² + b² + 2))}`.
pub fn berger_bound(a: f64, b: f64) -> Radius {
    if b <= 0.0 {
        return Radius::Infinite;
    }
    let r = (2.0 * PI * a.abs() / b).min(2.0 * PI / b.sqrt()).min(PI / (2.0 * (a * a + b * b + 2.0)).sqrt());
    Radius::Finite(r)
}

fn family_match(mu: &BracketTensor) -> Option<(f64, f64)> {
    if mu.q() != 1 || mu.n() != 3 {
        return None;
    }
    let p = ReducedFamilyPoint::project(Family::Berger3, mu).ok()?;
    let scale = 1.0 + mu.max_abs();
    (p.params[2].abs() <= 1e-12 * scale).then_some((p.params[0], p.params[1]))
}

/// Lower bound for the Lie injectivity radius of `point`.
pub fn injectivity_lower_bound(point: &HomogeneousPoint) -> Result<InjectivityBound> {
    point.require_valid()?;
    Ok(bound_of(&point.bracket))
}

pub(crate) fn bound_of(mu: &BracketTensor) -> InjectivityBound {
    let generic = generic_bound(mu);
    let family = family_match(mu).map(|(a, b)| berger_bound(a, b));
    let best = match family {
        Some(f) if f.value() > generic.value() => f,
        _ => generic,
    };
    InjectivityBound { generic, family, best }
}
