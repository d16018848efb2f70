//! Random valid points for property tests and audits.
//!
//! Every sampler starts from a bracket known to be homogeneous and moves it
//! with a random compatible change of basis, so the result is a valid point
//! that is rarely aligned with the coordinate axes.

use rand::Rng;

use crate::bracket::{act_gl, validate_point, BracketTensor, HomogeneousPoint, DEFAULT_VALIDATION_TOL};
use crate::catalog::{berger3, unimodular3};
use crate::linalg::{self, Mat, Vector};

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// An `n × n` matrix with entries in `[-1, 1)`.
pub fn random_operator<R: Rng>(rng: &mut R, n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| uniform(rng, -1.0, 1.0))
}

pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Mat {
    loop {
        let a = random_operator(rng, n);
        if a.determinant().abs() > 1e-2 {
            return a.qr().q();
        }
    }
}

/// `O·diag(s)` with singular values in `[1/2, 2]`.
pub fn random_gl<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let s = Vector::from_fn(n, |_, _| uniform(rng, 0.5, 2.0));
    random_orthogonal(rng, n) * Mat::from_diagonal(&s)
}

fn finish(mu: BracketTensor) -> HomogeneousPoint {
    let p = validate_point(&mu, DEFAULT_VALIDATION_TOL);
    debug_assert!(p.is_valid(), "sampler produced an invalid point");
    p
}

/// A three-dimensional unimodular bracket in a random basis.
pub fn random_unimodular3<R: Rng>(rng: &mut R) -> HomogeneousPoint {
    let (a, b, c) = (uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0));
    let mu = unimodular3(a, b, c).embed().expect("always realizable");
    finish(act_gl(&random_gl(rng, 3), &mu, f64::INFINITY).expect("no isotropy to respect"))
}

/// `ℝ ⋉_A ℝ^{n−1}` with random `A`, in a random basis.
pub fn random_solvable<R: Rng>(rng: &mut R, n: usize) -> HomogeneousPoint {
    assert!(n >= 2, "needs at least two dimensions");
    let a = random_operator(rng, n - 1);
    let mut mu = BracketTensor::zeros(0, n);
    for i in 1..n {
        for k in 1..n {
            mu.set(0, i, k, a[(k - 1, i - 1)]);
        }
    }
    finish(act_gl(&random_gl(rng, n), &mu, f64::INFINITY).expect("no isotropy to respect"))
}

/// A Berger-type bracket moved by `diag(s, O·diag(x, y, y))`, which keeps the
/// isotropy acting by skew maps.
pub fn random_berger<R: Rng>(rng: &mut R) -> HomogeneousPoint {
    let (a, b, c) = (uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0));
    let mu = berger3(a, b, c).embed().expect("always realizable");
    let s = uniform(rng, 0.5, 2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let (x, y) = (uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0));
    let hn = random_orthogonal(rng, 3) * Mat::from_diagonal(&Vector::from_vec(vec![x, y, y]));
    let h = linalg::block_diag(&Mat::from_element(1, 1, s), &hn);
    let moved = act_gl(&h, &mu, 1e-9).expect("compatible by construction");
    finish(moved)
}

/// One of the samplers above, chosen uniformly.
pub fn random_point<R: Rng>(rng: &mut R) -> HomogeneousPoint {
    match rng.gen_range(0..4) {
        0 => random_unimodular3(rng),
        1 => random_solvable(rng, 3),
        2 => random_solvable(rng, 4),
        _ => random_berger(rng),
    }
}
