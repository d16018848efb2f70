//! Ricci curvature of the homogeneous metric encoded by a bracket.
//!
//! All operators act on `p` and are written in the fixed orthonormal basis
//! `X_1..X_n`. `B` sees the whole bracket; `H` and `M` only see `μ_p`.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::bracket::{act_pi, BracketTensor, HomogeneousPoint};
use crate::error::Result;
use crate::linalg::{self, Mat, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    /// Mean-curvature vector.
    pub h: Vector,
    /// Killing form restricted to `p`.
    pub b: Mat,
    /// Moment-map operator.
    pub m: Mat,
    /// `S(ad_{μ_p} H)`.
    pub u: Mat,
    pub ric: Mat,
    /// Scalar curvature.
    pub r: f64,
}

impl Serialize for CurvatureReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CurvatureReport", 6)?;
        st.serialize_field("H", &self.h.iter().copied().collect::<Vec<_>>())?;
        st.serialize_field("B", &linalg::rows_of(&self.b))?;
        st.serialize_field("M", &linalg::rows_of(&self.m))?;
        st.serialize_field("U", &linalg::rows_of(&self.u))?;
        st.serialize_field("Ric", &linalg::rows_of(&self.ric))?;
        st.serialize_field("R", &self.r)?;
        st.end()
    }
}

/// `⟨H, X_i⟩ = tr ad_{μ_p} X_i`.
pub fn mean_curvature(mu: &BracketTensor) -> Vector {
    let (q, n) = (mu.q(), mu.n());
    Vector::from_fn(n, |i, _| (0..n).map(|j| mu.get(q + i, q + j, q + j)).sum())
}

/// `⟨B X_i, X_j⟩ = tr(ad X_i ad X_j)` with `ad` taken on all of `g`.
pub fn killing_operator(mu: &BracketTensor) -> Mat {
    let (q, n) = (mu.q(), mu.n());
    let ads: Vec<Mat> = (0..n).map(|i| mu.ad(q + i)).collect();
    let mut b = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (&ads[i] * &ads[j]).trace();
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    b
}

/// `M = −½ Σ (ad X_i)ᵗ ad X_i + ¼ Σ ad X_i (ad X_i)ᵗ` for `μ_p`, as an explicit double sum.
pub fn moment_operator(mu: &BracketTensor) -> Mat {
    let (q, n) = (mu.q(), mu.n());
    let c = |i: usize, j: usize, k: usize| mu.get(q + i, q + j, q + k);
    let mut m = Mat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += -0.5 * c(a, i, j) * c(b, i, j) + 0.25 * c(i, j, a) * c(i, j, b);
                }
            }
            m[(a, b)] = s;
            m[(b, a)] = s;
        }
    }
    m
}

/// `ad_{μ_p} v` as an operator on `p`.
pub fn ad_p(mu: &BracketTensor, v: &Vector) -> Mat {
    let (q, n) = (mu.q(), mu.n());
    Mat::from_fn(n, n, |l, k| (0..n).map(|i| v[i] * mu.get(q + i, q + k, q + l)).sum())
}

/// Ricci data with no validity check. Callers inside flows use this directly.
pub fn compute(mu: &BracketTensor) -> CurvatureReport {
    let h = mean_curvature(mu);
    let b = killing_operator(mu);
    let m = moment_operator(mu);
    let u = linalg::sym(&ad_p(mu, &h));
    let ric = &m - &b * 0.5 - &u;
    let r = ric.trace();
    CurvatureReport { h, b, m, u, ric, r }
}

pub fn curvature_report(point: &HomogeneousPoint) -> Result<CurvatureReport> {
    point.require_valid()?;
    Ok(compute(&point.bracket))
}

fn p_part(mu: &BracketTensor) -> BracketTensor {
    if mu.q() == 0 {
        mu.clone()
    } else {
        mu.mu_p()
    }
}

/// `δ(A) = −π(A)μ_p`, returned as a tensor on `p`.
pub fn delta_map(mu: &BracketTensor, a: &Mat) -> BracketTensor {
    act_pi(a, &p_part(mu)).scaled(-1.0)
}

/// Transpose of [`delta_map`] for the ordered-pair inner product on tensors and
/// the trace inner product on operators.
pub fn delta_adjoint(mu: &BracketTensor, lam: &BracketTensor) -> Mat {
    let mu = p_part(mu);
    let n = mu.n();
    assert!(lam.q() == 0 && lam.n() == n, "λ must live on p");
    Mat::from_fn(n, n, |r, s| {
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v -= lam.get(i, j, r) * mu.get(i, j, s);
                v += 2.0 * lam.get(s, i, j) * mu.get(r, i, j);
            }
        }
        v
    })
}

/// `Δ(A) = S(δᵗ δ(A))`.
pub fn laplacian_op(mu: &BracketTensor, a: &Mat) -> Mat {
    linalg::sym(&delta_adjoint(mu, &delta_map(mu, a)))
}
