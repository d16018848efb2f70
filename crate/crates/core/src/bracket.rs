//! Structure-constant tensors on `g = k ⊕ p` and the homogeneity conditions.
//!
//! Basis order is `Z_1..Z_q` followed by `X_1..X_n`. Only the entries with
//! `i < j` are stored, so skew-symmetry holds by construction.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

pub const DEFAULT_VALIDATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BracketJson", into = "BracketJson")]
pub struct BracketTensor {
    q: usize,
    n: usize,
    coeffs: Vec<f64>,
}

#[inline]
fn pair_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < d);
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

impl BracketTensor {
    pub fn zeros(q: usize, n: usize) -> Self {
        assert!(n > 0, "space dimension must be positive");
        let d = q + n;
        Self { q, n, coeffs: vec![0.0; d * (d - 1) / 2 * d] }
    }

    /// Builds a tensor from an arbitrary `c(i, j, k)`; only `i < j` is sampled.
    pub fn from_fn(q: usize, n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(q, n);
        let d = q + n;
        for i in 0..d {
            for j in i + 1..d {
                for k in 0..d {
                    t.coeffs[pair_index(d, i, j) * d + k] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Rebuilds a tensor from the flat storage returned by [`Self::as_slice`].
    pub fn from_flat(q: usize, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = Self::flat_len(q, n);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: coeffs.len() });
        }
        Ok(Self { q, n, coeffs })
    }

    pub fn flat_len(q: usize, n: usize) -> usize {
        let d = q + n;
        d * (d - 1) / 2 * d
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.q + self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `e_k` in `μ(e_i, e_j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.coeffs[pair_index(d, i, j) * d + k],
            std::cmp::Ordering::Greater => -self.coeffs[pair_index(d, j, i) * d + k],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Sets `μ(e_i, e_j)_k = v`, which also sets `μ(e_j, e_i)_k = -v`.
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim();
        assert!(i != j, "diagonal entries are identically zero");
        if i < j {
            self.coeffs[pair_index(d, i, j) * d + k] = v;
        } else {
            self.coeffs[pair_index(d, j, i) * d + k] = -v;
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.q == other.q && self.n == other.n
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() })
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { q: self.q, n: self.n, coeffs: self.coeffs.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { q: self.q, n: self.n, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Max-abs entry.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `Σ_{i,j,k} c[i][j][k]²` over ordered pairs (every basis vector orthonormal).
    pub fn norm2_aux(&self) -> f64 {
        2.0 * self.coeffs.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn norm_aux(&self) -> f64 {
        self.norm2_aux().sqrt()
    }

    /// Inner product matching [`Self::norm2_aux`].
    pub fn dot(&self, other: &Self) -> f64 {
        2.0 * self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_finite())
    }

    /// `ad_μ e_i` as a matrix on all of `g`.
    pub fn ad(&self, i: usize) -> Mat {
        let d = self.dim();
        Mat::from_fn(d, d, |l, k| self.get(i, k, l))
    }

    /// `ad_μ Z_a` restricted to `p`, for an isotropy index `a < q`.
    pub fn ad_iso_p(&self, a: usize) -> Mat {
        let (q, n) = (self.q, self.n);
        Mat::from_fn(n, n, |l, k| self.get(a, q + k, q + l))
    }

    pub fn split(&self) -> ComponentSplit {
        let q = self.q;
        let pick = |f: fn(usize, usize, usize, usize) -> bool| {
            BracketTensor::from_fn(self.q, self.n, |i, j, k| {
                if f(q, i, j, k) {
                    self.get(i, j, k)
                } else {
                    0.0
                }
            })
        };
        ComponentSplit {
            mu_k: pick(|q, i, _, k| i >= q && k < q),
            mu_p: pick(|q, i, _, k| i >= q && k >= q),
            mu_iso: pick(|q, i, _, _| i < q),
        }
    }

    /// The `p×p → p` block as a `q = 0` tensor on `p` alone.
    pub fn mu_p(&self) -> BracketTensor {
        let q = self.q;
        BracketTensor::from_fn(0, self.n, |i, j, k| self.get(q + i, q + j, q + k))
    }

    /// Inverse of [`Self::mu_p`]: places `p`-valued data back into a shape with isotropy.
    pub fn embed_p(mu_p: &BracketTensor, q: usize) -> BracketTensor {
        assert_eq!(mu_p.q, 0);
        let mut t = BracketTensor::zeros(q, mu_p.n);
        for i in 0..mu_p.n {
            for j in i + 1..mu_p.n {
                for k in 0..mu_p.n {
                    t.set(q + i, q + j, q + k, mu_p.get(i, j, k));
                }
            }
        }
        t
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: BracketJson = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::try_from(raw)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&BracketJson::from(self.clone())).expect("plain data serializes")
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BracketJson {
    q: usize,
    n: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl TryFrom<BracketJson> for BracketTensor {
    type Error = Error;

    fn try_from(raw: BracketJson) -> Result<Self> {
        if raw.n == 0 {
            return Err(Error::Malformed("n must be positive".into()));
        }
        let d = raw.q + raw.n;
        let mut seen = HashSet::new();
        let mut t = BracketTensor::zeros(raw.q, raw.n);
        for &(i, j, k, v) in &raw.entries {
            if i >= j {
                return Err(Error::Malformed(format!("entry ({i}, {j}, {k}) needs i < j")));
            }
            if j >= d || k >= d {
                return Err(Error::Malformed(format!("entry ({i}, {j}, {k}) out of range for dimension {d}")));
            }
            if !v.is_finite() {
                return Err(Error::Malformed(format!("entry ({i}, {j}, {k}) is not finite")));
            }
            if !seen.insert((i, j, k)) {
                return Err(Error::Malformed(format!("duplicate entry ({i}, {j}, {k})")));
            }
            t.set(i, j, k, v);
        }
        Ok(t)
    }
}

impl From<BracketTensor> for BracketJson {
    fn from(t: BracketTensor) -> Self {
        let d = t.dim();
        let mut entries = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for k in 0..d {
                    let v = t.get(i, j, k);
                    if v != 0.0 {
                        entries.push((i, j, k, v));
                    }
                }
            }
        }
        BracketJson { q: t.q, n: t.n, entries }
    }
}

/// `μ|p×p` split by target into `μ_k` and `μ_p`, plus the isotropy part `μ|k×g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSplit {
    pub mu_k: BracketTensor,
    pub mu_p: BracketTensor,
    pub mu_iso: BracketTensor,
}

impl ComponentSplit {
    pub fn recombine(&self) -> BracketTensor {
        self.mu_k
            .add(&self.mu_p)
            .and_then(|t| t.add(&self.mu_iso))
            .expect("components share a shape")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum H2Status {
    HoldsTrivially,
    KnownByConstruction,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Jacobi residual plus the closure defects of `μ(k,k)` and `μ(k,p)`.
    pub h1: f64,
    /// Skewness defect of `ad Z|p` over the isotropy basis.
    pub h3: f64,
    /// Smallest singular value of `Z ↦ ad Z|p`; `None` when `q = 0`.
    pub h4_sigma_min: Option<f64>,
    pub tol: f64,
    pub valid: bool,
}

/// A bracket together with the outcome of checking it against the homogeneity conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPoint {
    pub bracket: BracketTensor,
    pub report: ValidationReport,
    pub h2_status: H2Status,
}

impl HomogeneousPoint {
    pub fn is_valid(&self) -> bool {
        self.report.valid
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.report.valid {
            return Ok(());
        }
        let r = &self.report;
        Err(Error::InvalidPoint(format!(
            "h1 residual {:e}, h3 residual {:e}, h4 sigma_min {:?} (tol {:e})",
            r.h1, r.h3, r.h4_sigma_min, r.tol
        )))
    }

    /// Marks a point produced by a known construction.
    pub(crate) fn with_h2(mut self, status: H2Status) -> Self {
        if self.bracket.q > 0 {
            self.h2_status = status;
        }
        self
    }
}

pub fn bracket_eval(mu: &BracketTensor, x: &Vector, y: &Vector) -> Result<Vector> {
    let d = mu.dim();
    for v in [x, y] {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    let mut out = Vector::zeros(d);
    for i in 0..d {
        for j in i + 1..d {
            let w = x[i] * y[j] - x[j] * y[i];
            if w == 0.0 {
                continue;
            }
            for k in 0..d {
                out[k] += w * mu.get(i, j, k);
            }
        }
    }
    Ok(out)
}

/// Max over basis triples of the Euclidean norm of the Jacobiator.
pub fn jacobi_residual(mu: &BracketTensor) -> f64 {
    let d = mu.dim();
    // mu(mu(e_a, e_b), e_c)_m = Σ_l c[a][b][l] c[l][c][m]
    let nested = |a: usize, b: usize, c: usize, m: usize| -> f64 {
        (0..d).map(|l| mu.get(a, b, l) * mu.get(l, c, m)).sum()
    };
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                let s: f64 = (0..d)
                    .map(|m| {
                        let v = nested(i, j, k, m) + nested(j, k, i, m) + nested(k, i, j, m);
                        v * v
                    })
                    .sum();
                worst = worst.max(s.sqrt());
            }
        }
    }
    worst
}

pub fn validate_point(mu: &BracketTensor, tol: f64) -> HomogeneousPoint {
    let (q, n) = (mu.q, mu.n);
    let d = q + n;

    let mut closure: f64 = 0.0;
    for a in 0..q {
        for b in a + 1..q {
            for l in q..d {
                closure = closure.max(mu.get(a, b, l).abs());
            }
        }
        for i in q..d {
            for b in 0..q {
                closure = closure.max(mu.get(a, i, b).abs());
            }
        }
    }
    let h1 = jacobi_residual(mu) + closure;

    let ads: Vec<Mat> = (0..q).map(|a| mu.ad_iso_p(a)).collect();
    let h3 = ads.iter().map(|m| (m + m.transpose()).norm()).fold(0.0, f64::max);

    let h4_sigma_min = (q > 0).then(|| {
        let cols: Vec<Vector> = ads.iter().map(|m| Vector::from_column_slice(m.as_slice())).collect();
        let a = Mat::from_columns(&cols);
        if a.nrows() < q {
            0.0
        } else {
            a.svd(false, false).singular_values.min()
        }
    });

    let finite = mu.is_finite();
    let valid = finite && h1 <= tol && h3 <= tol && h4_sigma_min.is_none_or(|s| s > tol);
    HomogeneousPoint {
        bracket: mu.clone(),
        report: ValidationReport { h1, h3, h4_sigma_min, tol, valid },
        h2_status: if q == 0 { H2Status::HoldsTrivially } else { H2Status::Unverified },
    }
}

/// `h·μ = h μ(h⁻¹·, h⁻¹·)` for an arbitrary invertible `h`, with no homogeneity checks.
pub fn transformed(h: &Mat, mu: &BracketTensor) -> Result<BracketTensor> {
    let d = mu.dim();
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h.nrows() });
    }
    let g = h.clone().try_inverse().ok_or(Error::Singular)?;
    // t1[a][j][l] = Σ_b g[b][j] c[a][b][l]
    let mut t1 = vec![0.0; d * d * d];
    for a in 0..d {
        for b in 0..d {
            if a == b {
                continue;
            }
            for l in 0..d {
                let c = mu.get(a, b, l);
                if c == 0.0 {
                    continue;
                }
                for j in 0..d {
                    t1[(a * d + j) * d + l] += g[(b, j)] * c;
                }
            }
        }
    }
    // t2[i][j][l] = Σ_a g[a][i] t1[a][j][l]
    let mut t2 = vec![0.0; d * d * d];
    for a in 0..d {
        for i in 0..d {
            let gai = g[(a, i)];
            if gai == 0.0 {
                continue;
            }
            for j in 0..d {
                for l in 0..d {
                    t2[(i * d + j) * d + l] += gai * t1[(a * d + j) * d + l];
                }
            }
        }
    }
    Ok(BracketTensor::from_fn(mu.q, mu.n, |i, j, k| {
        (0..d).map(|l| h[(k, l)] * t2[(i * d + j) * d + l]).sum()
    }))
}

/// Residual of `[hₙᵗhₙ, ad Z|p] = 0` over the isotropy basis.
pub fn compatibility_residual(hn: &Mat, mu: &BracketTensor) -> f64 {
    let p = hn.transpose() * hn;
    (0..mu.q)
        .map(|a| linalg::commutator(&p, &mu.ad_iso_p(a)).norm())
        .fold(0.0, f64::max)
}

/// The `GL_q × GL_n` action. `h` must be block-diagonal and compatible with the
/// isotropy of `μ` so that the result stays homogeneous.
pub fn act_gl(h: &Mat, mu: &BracketTensor, tol: f64) -> Result<BracketTensor> {
    let (q, n) = (mu.q, mu.n);
    if h.nrows() != q + n || h.ncols() != q + n {
        return Err(Error::DimensionMismatch { expected: q + n, got: h.nrows() });
    }
    if linalg::off_block_norm(h, q) > tol {
        return Err(Error::NotBlockDiagonal);
    }
    let hn = h.view((q, q), (n, n)).into_owned();
    let res = compatibility_residual(&hn, mu);
    if res > tol {
        return Err(Error::Incompatible(res));
    }
    transformed(h, mu)
}

/// `π(A)μ = Aμ(·,·) − μ(A·,·) − μ(·,A·)`.
pub fn act_pi(a: &Mat, mu: &BracketTensor) -> BracketTensor {
    let d = mu.dim();
    assert_eq!(a.nrows(), d, "operator dimension must match the bracket");
    BracketTensor::from_fn(mu.q, mu.n, |i, j, k| {
        let mut s = 0.0;
        for l in 0..d {
            s += a[(k, l)] * mu.get(i, j, l);
            s -= a[(l, i)] * mu.get(l, j, k);
            s -= a[(l, j)] * mu.get(i, l, k);
        }
        s
    })
}

/// `c·μ`: `μ_k ↦ c²μ_k`, `μ_p ↦ cμ_p`, isotropy part untouched.
pub fn rescale(c: f64, mu: &BracketTensor) -> Result<BracketTensor> {
    if c == 0.0 {
        return Err(Error::ZeroScale);
    }
    let q = mu.q;
    Ok(BracketTensor::from_fn(mu.q, mu.n, |i, j, k| {
        let v = mu.get(i, j, k);
        match (i >= q, k >= q) {
            (true, false) => c * c * v,
            (true, true) => c * v,
            _ => v,
        }
    }))
}

/// `(‖μ_p‖², ‖μ_k‖², ‖μ‖²_aux)`, the first two summed over ordered pairs of `p`.
pub fn component_norms(mu: &BracketTensor) -> (f64, f64, f64) {
    let s = mu.split();
    (s.mu_p.norm2_aux(), s.mu_k.norm2_aux(), mu.norm2_aux())
}
