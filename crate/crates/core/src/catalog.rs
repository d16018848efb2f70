//! Parameterized families with closed-form curvature and reduced flow equations.
//!
//! * `Unimodular3(a, b, c)`: `μ(X2,X3) = aX1, μ(X3,X1) = bX2, μ(X1,X2) = cX3` on `ℝ³`.
//! * `Berger3(a, b, c)`: one isotropy direction `Z1` rotating `X2, X3`, with
//!   `μ(X2,X3) = aX1 + bZ1, μ(X3,X1) = cX2, μ(X1,X2) = cX3`.
//! * `Semisimple(a, b)` on `g = h ⊕ m` with `B_h = αB|_h`, `α = (2h − m)/(2h)`:
//!   `μ(h,h) ⊂ h` and `μ(h,m) ⊂ m` scaled by `a`, `μ(m,m) ⊂ h` scaled by `b`.
//!   Only the su(2) case `h = 1, m = 2` is realized as an explicit tensor.

use serde::{Deserialize, Serialize};

use crate::bracket::{validate_point, BracketTensor, H2Status, HomogeneousPoint, DEFAULT_VALIDATION_TOL};
use crate::curvature::{self, CurvatureReport};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Unimodular3,
    Berger3,
    Semisimple { h_dim: usize, m_dim: usize },
}

impl Family {
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Family::Unimodular3 | Family::Berger3 => &["a", "b", "c"],
            Family::Semisimple { .. } => &["a", "b"],
        }
    }

    /// Exponent `w` with `c·μ` acting on the parameter as `x ↦ c^w x`.
    pub fn weights(&self) -> &'static [f64] {
        match self {
            Family::Unimodular3 => &[1.0, 1.0, 1.0],
            Family::Berger3 => &[1.0, 2.0, 1.0],
            Family::Semisimple { .. } => &[1.0, 1.0],
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Family::Unimodular3 | Family::Berger3 => 3,
            Family::Semisimple { h_dim, m_dim } => h_dim + m_dim,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            Family::Semisimple { h_dim, m_dim } => Some(semisimple_alpha(h_dim, m_dim)),
            _ => None,
        }
    }

    pub fn has_realization(&self) -> bool {
        !matches!(self, Family::Semisimple { h_dim, m_dim } if (*h_dim, *m_dim) != (1, 2))
    }
}

fn semisimple_alpha(h_dim: usize, m_dim: usize) -> f64 {
    (2.0 * h_dim as f64 - m_dim as f64) / (2.0 * h_dim as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedFamilyPoint {
    pub family: Family,
    pub params: Vec<f64>,
}

pub fn unimodular3(a: f64, b: f64, c: f64) -> ReducedFamilyPoint {
    ReducedFamilyPoint { family: Family::Unimodular3, params: vec![a, b, c] }
}

pub fn berger3(a: f64, b: f64, c: f64) -> ReducedFamilyPoint {
    ReducedFamilyPoint { family: Family::Berger3, params: vec![a, b, c] }
}

pub fn semisimple_family(a: f64, b: f64, h_dim: usize, m_dim: usize) -> Result<ReducedFamilyPoint> {
    if h_dim == 0 || m_dim == 0 {
        return Err(Error::Parameter("h and m must be positive".into()));
    }
    let alpha = semisimple_alpha(h_dim, m_dim);
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha = {alpha} lies outside [0, 1)")));
    }
    Ok(ReducedFamilyPoint { family: Family::Semisimple { h_dim, m_dim }, params: vec![a, b] })
}

/// Structure constant `κ` of su(2) in a basis orthonormal for minus the Killing form.
pub fn su2_killing_constant() -> f64 {
    let mut std = BracketTensor::zeros(0, 3);
    std.set(1, 2, 0, 1.0);
    std.set(2, 0, 1, 1.0);
    std.set(0, 1, 2, 1.0);
    let b = curvature::killing_operator(&std);
    // rescaling e_i ↦ e_i/s multiplies the constants by 1/s
    1.0 / (-b[(0, 0)]).sqrt()
}

/// The su(2) instance (`h = 1`, `m = 2`, `α = 0`) of the semisimple family.
pub fn semisimple_concrete_su2(a: f64, b: f64) -> HomogeneousPoint {
    let k = su2_killing_constant();
    let mut t = BracketTensor::zeros(0, 3);
    t.set(0, 1, 2, a * k);
    t.set(2, 0, 1, a * k);
    t.set(1, 2, 0, b * k);
    validate_point(&t, DEFAULT_VALIDATION_TOL)
}

fn diag(v: &[f64]) -> Mat {
    Mat::from_diagonal(&Vector::from_column_slice(v))
}

fn blocks(h: usize, m: usize, x: f64, y: f64) -> Mat {
    let mut v = vec![x; h];
    v.extend(std::iter::repeat_n(y, m));
    diag(&v)
}

impl ReducedFamilyPoint {
    pub fn n(&self) -> usize {
        self.family.n()
    }

    pub fn with_params(&self, params: Vec<f64>) -> Self {
        Self { family: self.family, params }
    }

    /// Curvature from the printed formulas, with no tensor in between.
    pub fn closed_form(&self) -> CurvatureReport {
        let p = &self.params;
        let n = self.n();
        let (b_op, m_op) = match self.family {
            Family::Unimodular3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                (
                    diag(&[-2.0 * b * c, -2.0 * a * c, -2.0 * a * b]),
                    diag(&[-a * a + b * b + c * c, a * a - b * b + c * c, a * a + b * b - c * c]) * -0.5,
                )
            }
            Family::Berger3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                let s = -2.0 * (b + a * c);
                (diag(&[-2.0 * c * c, s, s]), diag(&[2.0 * c * c - a * a, a * a, a * a]) * -0.5)
            }
            Family::Semisimple { h_dim, m_dim } => {
                let (a, b) = (p[0], p[1]);
                let al = semisimple_alpha(h_dim, m_dim);
                (
                    blocks(h_dim, m_dim, -a * a, -a * b),
                    blocks(
                        h_dim,
                        m_dim,
                        -0.5 * a * a + 0.25 * al * a * a + 0.25 * (1.0 - al) * b * b,
                        -0.25 * b * b,
                    ),
                )
            }
        };
        let ric = self.closed_ricci();
        CurvatureReport {
            h: Vector::zeros(n),
            b: b_op,
            m: m_op,
            u: Mat::zeros(n, n),
            r: self.closed_scalar(),
            ric,
        }
    }

    pub fn closed_ricci(&self) -> Mat {
        let p = &self.params;
        match self.family {
            Family::Unimodular3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                diag(&[a * a - (b - c).powi(2), b * b - (a - c).powi(2), c * c - (a - b).powi(2)]) * 0.5
            }
            Family::Berger3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                let s = -0.5 * a * a + b + a * c;
                diag(&[0.5 * a * a, s, s])
            }
            Family::Semisimple { h_dim, m_dim } => {
                let (a, b) = (p[0], p[1]);
                let al = semisimple_alpha(h_dim, m_dim);
                blocks(h_dim, m_dim, al * a * a + (1.0 - al) * b * b, 2.0 * a * b - b * b) * 0.25
            }
        }
    }

    pub fn closed_scalar(&self) -> f64 {
        let p = &self.params;
        match self.family {
            Family::Unimodular3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                -0.5 * (a * a + b * b + c * c) + a * b + a * c + b * c
            }
            Family::Berger3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                -0.5 * a * a + 2.0 * (b + a * c)
            }
            Family::Semisimple { h_dim, m_dim } => {
                let (a, b) = (p[0], p[1]);
                let (h, m) = (h_dim as f64, m_dim as f64);
                (2.0 * h - m) / 8.0 * a * a - m / 8.0 * b * b + m / 2.0 * a * b
            }
        }
    }

    /// `‖μ_p‖²` over ordered pairs.
    pub fn mu_p_norm2(&self) -> f64 {
        let p = &self.params;
        match self.family {
            Family::Unimodular3 => 2.0 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]),
            Family::Berger3 => 2.0 * (p[0] * p[0] + 2.0 * p[2] * p[2]),
            Family::Semisimple { h_dim, m_dim } => {
                let al = semisimple_alpha(h_dim, m_dim);
                let (h, m) = (h_dim as f64, m_dim as f64);
                h * (2.0 - al) * p[0] * p[0] + (m - (1.0 - al) * h) * p[1] * p[1]
            }
        }
    }

    /// `‖μ‖²` for the auxiliary inner product on all of `g`.
    pub fn aux_norm2(&self) -> f64 {
        match self.family {
            Family::Berger3 => self.mu_p_norm2() + 2.0 * self.params[1].powi(2) + 4.0,
            _ => self.mu_p_norm2(),
        }
    }

    /// Unnormalized bracket-flow velocity in parameter space.
    pub fn reduced_rhs(&self) -> Vec<f64> {
        let p = &self.params;
        match self.family {
            Family::Unimodular3 => {
                let ric = self.closed_ricci();
                let r = [ric[(0, 0)], ric[(1, 1)], ric[(2, 2)]];
                vec![
                    (r[1] + r[2] - r[0]) * p[0],
                    (r[0] + r[2] - r[1]) * p[1],
                    (r[0] + r[1] - r[2]) * p[2],
                ]
            }
            Family::Berger3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                vec![
                    (-1.5 * a * a + 2.0 * b + 2.0 * a * c) * a,
                    (-a * a + 2.0 * b + 2.0 * a * c) * b,
                    0.5 * a * a * c,
                ]
            }
            Family::Semisimple { h_dim, m_dim } => {
                let (a, b) = (p[0], p[1]);
                let al = semisimple_alpha(h_dim, m_dim);
                vec![
                    0.25 * (al * a * a + (1.0 - al) * b * b) * a,
                    -0.25 * (al * a * a + (3.0 - al) * b * b - 4.0 * a * b) * b,
                ]
            }
        }
    }

    /// `r`-normalized velocity: the unnormalized one plus `r · w_i · x_i`.
    pub fn reduced_rhs_with_rate(&self, r: f64) -> Vec<f64> {
        let mut v = self.reduced_rhs();
        for ((vi, xi), w) in v.iter_mut().zip(&self.params).zip(self.family.weights()) {
            *vi += r * w * xi;
        }
        v
    }

    /// Parameters of `c·μ`.
    pub fn rescaled(&self, c: f64) -> Self {
        let params = self
            .params
            .iter()
            .zip(self.family.weights())
            .map(|(x, w)| x * c.powi(*w as i32))
            .collect();
        self.with_params(params)
    }

    pub fn embed(&self) -> Result<BracketTensor> {
        let p = &self.params;
        match self.family {
            Family::Unimodular3 => {
                let mut t = BracketTensor::zeros(0, 3);
                t.set(1, 2, 0, p[0]);
                t.set(2, 0, 1, p[1]);
                t.set(0, 1, 2, p[2]);
                Ok(t)
            }
            Family::Berger3 => {
                let (a, b, c) = (p[0], p[1], p[2]);
                let mut t = BracketTensor::zeros(1, 3);
                t.set(3, 0, 2, 1.0);
                t.set(0, 2, 3, 1.0);
                t.set(2, 3, 1, a);
                t.set(2, 3, 0, b);
                t.set(3, 1, 2, c);
                t.set(1, 2, 3, c);
                Ok(t)
            }
            Family::Semisimple { h_dim: 1, m_dim: 2 } => Ok(semisimple_concrete_su2(p[0], p[1]).bracket),
            Family::Semisimple { .. } => Err(Error::NoRealization),
        }
    }

    /// The embedded tensor, validated and tagged as a known construction.
    pub fn point(&self) -> Result<HomogeneousPoint> {
        let t = self.embed()?;
        Ok(validate_point(&t, DEFAULT_VALIDATION_TOL).with_h2(H2Status::KnownByConstruction))
    }

    /// Reads the family parameters off a tensor, checking that every other
    /// entry agrees with the family to `1e-8` relative to the tensor size.
    pub fn project(family: Family, mu: &BracketTensor) -> Result<Self> {
        let params = match family {
            Family::Unimodular3 => vec![mu.get(1, 2, 0), mu.get(2, 0, 1), mu.get(0, 1, 2)],
            Family::Berger3 => vec![mu.get(2, 3, 1), mu.get(2, 3, 0), mu.get(3, 1, 2)],
            Family::Semisimple { h_dim: 1, m_dim: 2 } => {
                let k = su2_killing_constant();
                vec![mu.get(0, 1, 2) / k, mu.get(1, 2, 0) / k]
            }
            Family::Semisimple { .. } => return Err(Error::NoRealization),
        };
        let point = Self { family, params };
        let rebuilt = point.embed()?;
        if !rebuilt.same_shape(mu) {
            return Err(Error::DimensionMismatch { expected: rebuilt.dim(), got: mu.dim() });
        }
        let off = rebuilt.sub(mu)?.max_abs();
        if off > 1e-8 * (1.0 + mu.max_abs()) {
            return Err(Error::Parameter(format!("tensor is {off:e} away from the family")));
        }
        Ok(point)
    }
}
