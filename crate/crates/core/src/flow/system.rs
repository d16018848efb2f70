//! The two state representations a flow can run on: full structure constants
//! or the parameters of a catalog family.

use serde::Serialize;

use crate::bracket::{rescale, validate_point, BracketTensor};
use crate::catalog::{Family, ReducedFamilyPoint};
use crate::curvature::{self, CurvatureReport};
use crate::error::{Error, Result};
use crate::linalg::Mat;

use super::normalization::{NormalizationStrategy, RateContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StateLayout {
    Bracket { q: usize, n: usize },
    Reduced { family: Family },
}

/// Curvature data needed by right-hand sides, rates and diagnostics.
pub struct Evaluated {
    pub curvature: CurvatureReport,
    pub mu_p_norm2: f64,
    pub aux_norm2: f64,
}

impl StateLayout {
    pub fn len(&self) -> usize {
        match self {
            StateLayout::Bracket { q, n } => BracketTensor::flat_len(*q, *n),
            StateLayout::Reduced { family } => family.param_names().len(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            StateLayout::Bracket { n, .. } => *n,
            StateLayout::Reduced { family } => family.n(),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        match self {
            StateLayout::Bracket { q, n } => {
                let d = q + n;
                let mut names = Vec::with_capacity(self.len());
                for i in 0..d {
                    for j in i + 1..d {
                        for k in 0..d {
                            names.push(format!("mu_{i}_{j}_{k}"));
                        }
                    }
                }
                names
            }
            StateLayout::Reduced { family } => family.param_names().iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn bracket(&self, y: &[f64]) -> Option<BracketTensor> {
        match *self {
            StateLayout::Bracket { q, n } => BracketTensor::from_flat(q, n, y[..self.len()].to_vec()).ok(),
            StateLayout::Reduced { .. } => None,
        }
    }

    pub fn reduced(&self, y: &[f64]) -> Option<ReducedFamilyPoint> {
        match *self {
            StateLayout::Reduced { family } => Some(ReducedFamilyPoint { family, params: y[..self.len()].to_vec() }),
            StateLayout::Bracket { .. } => None,
        }
    }

    pub fn evaluate(&self, y: &[f64]) -> Evaluated {
        match self {
            StateLayout::Bracket { .. } => {
                let mu = self.bracket(y).expect("bracket layout");
                let s = mu.split();
                Evaluated { curvature: curvature::compute(&mu), mu_p_norm2: s.mu_p.norm2_aux(), aux_norm2: mu.norm2_aux() }
            }
            StateLayout::Reduced { .. } => {
                let p = self.reduced(y).expect("reduced layout");
                Evaluated { curvature: p.closed_form(), mu_p_norm2: p.mu_p_norm2(), aux_norm2: p.aux_norm2() }
            }
        }
    }

    pub fn rate(&self, y: &[f64], ev: &Evaluated, strategy: &NormalizationStrategy) -> Result<f64> {
        if matches!(strategy, NormalizationStrategy::RicciNorm) {
            return self.ricci_norm_rate(y, ev);
        }
        strategy.rate(&RateContext { state: &y[..self.len()], curvature: &ev.curvature, mu_p_norm2: ev.mu_p_norm2 })
    }

    /// The `r` that keeps `tr Ric²` fixed. `Ric` is a polynomial of degree two in
    /// the state, so the central difference below is its exact derivative.
    pub fn ricci_norm_rate(&self, y: &[f64], ev: &Evaluated) -> Result<f64> {
        let m = self.len();
        let ric = &ev.curvature.ric;
        let t2 = (ric * ric).trace();
        if t2 == 0.0 {
            return Err(Error::FlatInitialPoint);
        }
        let mut v = vec![0.0; m];
        self.velocity(y, ric, 0.0, &mut v);
        let plus: Vec<f64> = y[..m].iter().zip(&v).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = y[..m].iter().zip(&v).map(|(a, b)| a - b).collect();
        let dric = (self.evaluate(&plus).curvature.ric - self.evaluate(&minus).curvature.ric) * 0.5;
        Ok(-(ric * dric).trace() / (2.0 * t2))
    }

    /// `r`-normalized velocity written into `out[..len]`.
    pub fn velocity(&self, y: &[f64], ric: &Mat, r: f64, out: &mut [f64]) {
        match self {
            StateLayout::Bracket { .. } => {
                let mu = self.bracket(y).expect("bracket layout");
                let v = bracket_tangent(&mu, ric, r);
                out[..self.len()].copy_from_slice(v.as_slice());
            }
            StateLayout::Reduced { .. } => {
                let v = self.reduced(y).expect("reduced layout").reduced_rhs_with_rate(r);
                out[..self.len()].copy_from_slice(&v);
            }
        }
    }

    /// Norm of a tangent vector: the auxiliary tensor norm, or Euclidean on parameters.
    pub fn tangent_norm(&self, v: &[f64]) -> f64 {
        let s: f64 = v[..self.len()].iter().map(|x| x * x).sum();
        match self {
            StateLayout::Bracket { .. } => (2.0 * s).sqrt(),
            StateLayout::Reduced { .. } => s.sqrt(),
        }
    }

    /// Relative defect of the homogeneity conditions; zero for families.
    pub fn drift(&self, y: &[f64]) -> f64 {
        match self {
            StateLayout::Bracket { .. } => {
                let mu = self.bracket(y).expect("bracket layout");
                let rep = validate_point(&mu, f64::INFINITY).report;
                rep.h1 / mu.norm2_aux().max(1.0) + rep.h3 / mu.norm_aux().max(1.0)
            }
            StateLayout::Reduced { .. } => 0.0,
        }
    }

    pub fn rescale(&self, c: f64, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            StateLayout::Bracket { .. } => {
                let mu = self.bracket(y).expect("bracket layout");
                Ok(rescale(c, &mu)?.as_slice().to_vec())
            }
            StateLayout::Reduced { .. } => Ok(self.reduced(y).expect("reduced layout").rescaled(c).params),
        }
    }
}

/// `dμ_k = μ_k(Ric·,·) + μ_k(·,Ric·) + 2rμ_k`, `dμ_p = −π_n(Ric)μ_p + rμ_p`,
/// isotropy part untouched.
pub fn bracket_tangent(mu: &BracketTensor, ric: &Mat, r: f64) -> BracketTensor {
    let (q, n) = (mu.q(), mu.n());
    BracketTensor::from_fn(q, n, |i, j, k| {
        if i < q {
            return 0.0;
        }
        let (pi, pj) = (i - q, j - q);
        let mut s = 0.0;
        for l in 0..n {
            s += ric[(l, pi)] * mu.get(q + l, j, k) + ric[(l, pj)] * mu.get(i, q + l, k);
        }
        if k < q {
            s + 2.0 * r * mu.get(i, j, k)
        } else {
            for l in 0..n {
                s -= ric[(k - q, l)] * mu.get(i, j, q + l);
            }
            s + r * mu.get(i, j, k)
        }
    })
}
