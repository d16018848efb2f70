use serde::Serialize;

use crate::bracket::{act_pi, BracketTensor, HomogeneousPoint};
use crate::curvature;
use crate::error::Result;
use crate::linalg::{self, Mat};

/// Relative rank cut used when no tolerance is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Orthonormal basis (trace inner product) of a space of operators.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationBasis {
    pub basis: Vec<Mat>,
    pub dim: usize,
}

fn flat(mu: &BracketTensor) -> impl Iterator<Item = f64> + '_ {
    mu.as_slice().iter().copied()
}

/// Kernel of `A ↦ π(lift(A))μ` over `size × size` matrices.
fn kernel_of(mu: &BracketTensor, size: usize, lift: impl Fn(&Mat) -> Mat, tol: f64) -> DerivationBasis {
    let rows = mu.as_slice().len();
    let mut l = Mat::zeros(rows, size * size);
    for a in 0..size {
        for b in 0..size {
            let mut e = Mat::zeros(size, size);
            e[(a, b)] = 1.0;
            for (r, v) in flat(&act_pi(&lift(&e), mu)).enumerate() {
                l[(r, a * size + b)] = v;
            }
        }
    }
    let ns = linalg::null_space(&l, tol);
    let basis: Vec<Mat> = ns
        .column_iter()
        .map(|c| Mat::from_row_slice(size, size, c.as_slice()))
        .collect();
    DerivationBasis { dim: basis.len(), basis }
}

/// `Der(μ)`: the null space of `A ↦ π(A)μ` on `gl(q + n)`.
pub fn derivation_algebra(mu: &BracketTensor, tol: f64) -> DerivationBasis {
    kernel_of(mu, mu.dim(), |a| a.clone(), tol)
}

/// Derivations of the form `diag(0, A)`, returned as operators `A` on `p`.
pub fn p_derivations(mu: &BracketTensor, tol: f64) -> DerivationBasis {
    let q = mu.q();
    kernel_of(mu, mu.n(), |a| linalg::block_diag(&Mat::zeros(q, q), a), tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolitonFit {
    /// `‖Ric − cI − D‖` at the least-squares optimum.
    pub residual: f64,
    pub c: f64,
    #[serde(serialize_with = "crate::analysis::ser_mat")]
    pub d: Mat,
}

/// Distance from `Ric` to `ℝI ⊕ {A : π(diag(0, A))μ = 0}`.
pub fn soliton_residual(point: &HomogeneousPoint) -> Result<SolitonFit> {
    soliton_residual_with(point, DEFAULT_RANK_TOL)
}

pub fn soliton_residual_with(point: &HomogeneousPoint, tol: f64) -> Result<SolitonFit> {
    point.require_valid()?;
    Ok(soliton_fit(&point.bracket, tol))
}

/// Unchecked version used on flow limits.
pub(crate) fn soliton_fit(mu: &BracketTensor, tol: f64) -> SolitonFit {
    let n = mu.n();
    let ric = curvature::compute(mu).ric;
    let der = p_derivations(mu, tol);
    let mut cols: Vec<&Mat> = Vec::with_capacity(der.dim + 1);
    let id = Mat::identity(n, n);
    cols.push(&id);
    cols.extend(der.basis.iter());
    let a = Mat::from_fn(n * n, cols.len(), |r, c| cols[c][(r / n, r % n)]);
    let rhs = Mat::from_fn(n * n, 1, |r, _| ric[(r / n, r % n)]);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .expect("singular vectors were requested");
    let c = x[(0, 0)];
    let mut d = Mat::zeros(n, n);
    for (k, b) in der.basis.iter().enumerate() {
        d += b * x[(k + 1, 0)];
    }
    let residual = (&ric - &id * c - &d).norm();
    SolitonFit { residual, c, d }
}

/// `‖Ric − (R/n)I‖`.
pub fn einstein_residual(ric: &Mat) -> f64 {
    let n = ric.nrows();
    if n == 0 {
        return 0.0;
    }
    (ric - Mat::identity(n, n) * (ric.trace() / n as f64)).norm()
}
