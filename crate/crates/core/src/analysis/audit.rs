//! Finite-difference check of how `Ric`, `M`, `B`, `H`, `U` and their scalar
//! summaries evolve along a stored trajectory.

use serde::Serialize;

use crate::bracket::BracketTensor;
use crate::curvature::{self, ad_p, laplacian_op, CurvatureReport};
use crate::error::{Error, Result};
use crate::flow::{FlowTrajectory, StateLayout};
use crate::linalg::{commutator, sym, Mat, Vector};

pub const DEFAULT_AUDIT_TOL: f64 = 1e-4;

pub const IDENTITY_NAMES: [&str; 9] = [
    "ricci",
    "moment",
    "killing",
    "mean-curvature",
    "u",
    "scalar",
    "bracket-norm",
    "killing-trace",
    "mean-curvature-norm",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_rel_error: f64,
    /// Sample time where the worst error occurred.
    pub worst_t: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub identities: Vec<IdentityCheck>,
    pub tol: f64,
    /// Interior samples the differences were taken at.
    pub samples_used: usize,
    /// Smallest finite-difference `dR/dt` seen.
    pub min_scalar_rate: f64,
    pub pass: bool,
}

/// Every audited quantity at one sample, flattened, with its analytic
/// derivative and the summed size of the terms making up that derivative
/// (traces of products are sized by the product of norms).
struct Snapshot {
    values: [Vec<f64>; 9],
    rhs: [Vec<f64>; 9],
    size: [f64; 9],
    /// `‖μ‖`, which sets the absolute floor for each comparison.
    mu_norm: f64,
}

/// How each audited derivative scales under `μ ↦ cμ`.
const DEGREE: [i32; 9] = [4, 4, 4, 3, 4, 4, 4, 4, 4];
const ABS_FLOOR: f64 = 1e-8;

fn mat_vec(m: &Mat) -> Vec<f64> {
    m.iter().copied().collect()
}

fn sample_bracket(layout: &StateLayout, state: &[f64]) -> Result<BracketTensor> {
    match layout {
        StateLayout::Bracket { .. } => Ok(layout.bracket(state).expect("bracket layout")),
        StateLayout::Reduced { .. } => layout.reduced(state).expect("reduced layout").embed(),
    }
}

fn snapshot(mu: &BracketTensor, r: f64) -> Snapshot {
    let CurvatureReport { h, b, m, u, ric, r: scal } = curvature::compute(mu);
    let mu_p_norm2 = mu.split().mu_p.norm2_aux();
    let ad_h = ad_p(mu, &h);
    let ric_h: Vector = &ric * &h;
    let lap = laplacian_op(mu, &ric);
    // r-corrected right-hand sides
    let d_m = &lap * -0.5 + &m * (2.0 * r);
    let d_b = &b * &ric + &ric * &b + &b * (2.0 * r);
    let d_h = &ric_h + &h * r;
    let d_u = sym(&ad_p(mu, &ric_h)) * 2.0 + sym(&commutator(&ad_h, &ric)) + sym(&ad_h) * (2.0 * r);
    let d_ric = &d_m - &d_b * 0.5 - &d_u;
    let ric2 = (&ric * &ric).trace();
    let s_ad = sym(&ad_h);
    let s_ad2 = (&s_ad * &s_ad).trace();
    let ric_m = (&ric * &m).trace();
    let ric_b = (&ric * &b).trace();
    let size_m = 0.5 * lap.norm() + (2.0 * r * m.norm()).abs();
    let size_b = 2.0 * (&b * &ric).norm() + (2.0 * r * b.norm()).abs();
    let size_u = 2.0 * sym(&ad_p(mu, &ric_h)).norm() + sym(&commutator(&ad_h, &ric)).norm() + (2.0 * r * s_ad.norm()).abs();
    Snapshot {
        values: [
            mat_vec(&ric),
            mat_vec(&m),
            mat_vec(&b),
            h.iter().copied().collect(),
            mat_vec(&u),
            vec![scal],
            vec![mu_p_norm2],
            vec![b.trace()],
            vec![h.norm_squared()],
        ],
        rhs: [
            mat_vec(&d_ric),
            mat_vec(&d_m),
            mat_vec(&d_b),
            d_h.iter().copied().collect(),
            mat_vec(&d_u),
            vec![2.0 * ric2 + 2.0 * r * scal],
            vec![-8.0 * ric_m + 2.0 * r * mu_p_norm2],
            vec![2.0 * ric_b + 2.0 * r * b.trace()],
            vec![-2.0 * s_ad2 + 2.0 * r * h.norm_squared()],
        ],
        size: [
            size_m + 0.5 * size_b + size_u,
            size_m,
            size_b,
            ric_h.norm() + (r * h.norm()).abs(),
            size_u,
            2.0 * ric2 + (2.0 * r * scal).abs(),
            8.0 * ric.norm() * m.norm() + (2.0 * r * mu_p_norm2).abs(),
            2.0 * ric.norm() * b.norm() + (2.0 * r * b.trace()).abs(),
            2.0 * s_ad2 + (2.0 * r * h.norm_squared()).abs(),
        ],
        mu_norm: mu.norm_aux(),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Audit at the default tolerance.
pub fn identity_audit(traj: &FlowTrajectory) -> Result<AuditReport> {
    identity_audit_with(traj, DEFAULT_AUDIT_TOL)
}

/// Compares central differences of the sampled quantities with their analytic
/// derivatives. Errors are relative to the summed size of the terms in each
/// derivative, floored at `10⁻³` of its largest value along the run and at
/// `10⁻⁸‖μ‖^k`, `k` being the degree of the derivative in `μ`.
pub fn identity_audit_with(traj: &FlowTrajectory, tol: f64) -> Result<AuditReport> {
    let k = traj.samples.len();
    if k < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: k });
    }
    let dt = traj.samples[1].t - traj.samples[0].t;
    let snaps = traj
        .samples
        .iter()
        .map(|s| Ok(snapshot(&sample_bracket(&traj.layout, &s.state)?, s.summary.rate)))
        .collect::<Result<Vec<_>>>()?;

    // five-point stencils at spacing h and 2h, Richardson-combined when there is room
    let reach = if k >= 9 { 4 } else if k >= 5 { 2 } else { 1 };
    let interior: Vec<usize> = (reach..k - reach).collect();
    let fd = |q: usize, i: usize| -> Vec<f64> {
        let v = |j: usize, c: usize| snaps[j].values[q][c];
        let five = |c: usize, s: usize| {
            (v(i - 2 * s, c) - 8.0 * v(i - s, c) + 8.0 * v(i + s, c) - v(i + 2 * s, c)) / (12.0 * s as f64 * dt)
        };
        (0..snaps[i].values[q].len())
            .map(|c| match reach {
                4 => (16.0 * five(c, 1) - five(c, 2)) / 15.0,
                2 => five(c, 1),
                _ => (v(i + 1, c) - v(i - 1, c)) / (2.0 * dt),
            })
            .collect()
    };

    let mut identities = Vec::with_capacity(9);
    let mut min_scalar_rate = f64::INFINITY;
    for (q, name) in IDENTITY_NAMES.iter().enumerate() {
        let peak = interior.iter().map(|&i| snaps[i].size[q]).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        let mut worst_t = traj.samples[interior[0]].t;
        for &i in &interior {
            let d = fd(q, i);
            if q == 5 {
                min_scalar_rate = min_scalar_rate.min(d[0]);
            }
            let an = &snaps[i].rhs[q];
            let diff: Vec<f64> = d.iter().zip(an).map(|(a, b)| a - b).collect();
            let floor = ABS_FLOOR * snaps[i].mu_norm.powi(DEGREE[q]);
            let scale = snaps[i].size[q].max(1e-3 * peak).max(floor).max(1e-300);
            let e = norm(&diff) / scale;
            if !(e <= worst) {
                worst = e;
                worst_t = traj.samples[i].t;
            }
        }
        identities.push(IdentityCheck { name, max_rel_error: worst, worst_t, pass: worst <= tol });
    }
    let pass = identities.iter().all(|c| c.pass);
    Ok(AuditReport { identities, tol, samples_used: interior.len(), min_scalar_rate, pass })
}
