//! Ricci flow on inner products of `p` and the gauges `h(t)` linking it to the
//! bracket flow.

use serde::Serialize;

use crate::bracket::{compatibility_residual, transformed, BracketTensor, HomogeneousPoint};
use crate::curvature;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

use super::integrator::{self, Control, Knots, Outcome, Stats, StepControl};
use super::{integrate, FlowOptions, FlowTrajectory, NormalizationStrategy, Termination};

/// An `Ad(K)`-invariant inner product `⟨P·,·⟩` on `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricState {
    pub p: Mat,
}

impl MetricState {
    pub fn new(p: Mat, mu0: &BracketTensor, tol: f64) -> Result<Self> {
        let n = mu0.n();
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.nrows() });
        }
        if (&p - p.transpose()).amax() > tol * (1.0 + p.amax()) {
            return Err(Error::NotPositiveDefinite);
        }
        linalg::sqrt_spd(&p)?;
        let res = (0..mu0.q())
            .map(|a| linalg::commutator(&p, &mu0.ad_iso_p(a)).norm())
            .fold(0.0, f64::max);
        if res > tol * (1.0 + p.norm()) {
            return Err(Error::Incompatible(res));
        }
        Ok(Self { p })
    }

    pub fn identity(n: usize) -> Self {
        Self { p: Mat::identity(n, n) }
    }
}

fn gauge_lift(q: usize, h: &Mat) -> Mat {
    linalg::block_diag(&Mat::identity(q, q), h)
}

/// `Ric(⟨P·,·⟩)` computed as `h⁻¹ Ric_{h̃·μ₀} h` with `h = P^{1/2}`.
pub fn metric_ricci(p: &Mat, mu0: &BracketTensor) -> Result<Mat> {
    let h = linalg::sqrt_spd(p)?;
    let res = compatibility_residual(&h, mu0);
    if res > 1e-8 * (1.0 + h.norm()) {
        return Err(Error::Incompatible(res));
    }
    let nu = transformed(&gauge_lift(mu0.q(), &h), mu0)?;
    let ric = curvature::compute(&nu).ric;
    let hinv = h.clone().try_inverse().ok_or(Error::Singular)?;
    Ok(hinv * ric * h)
}

/// `dP/dt = −2P·Ric(⟨P·,·⟩)`.
pub fn metric_rhs(state: &MetricState, mu0: &HomogeneousPoint) -> Result<Mat> {
    mu0.require_valid()?;
    metric_velocity(&state.p, &mu0.bracket)
}

fn metric_velocity(p: &Mat, mu0: &BracketTensor) -> Result<Mat> {
    let ric = metric_ricci(p, mu0)?;
    Ok(linalg::sym(&(p * ric * -2.0)))
}

#[derive(Clone, Debug)]
pub struct MetricTrajectory {
    pub mu0: BracketTensor,
    pub times: Vec<f64>,
    pub p: Vec<Mat>,
    pub knots: Knots,
    pub termination: Termination,
    pub stats: Stats,
}

impl MetricTrajectory {
    pub fn p_at(&self, t: f64) -> Result<Mat> {
        let n = self.mu0.n();
        Ok(Mat::from_row_slice(n, n, &self.knots.eval(t)?))
    }
}

fn flat_rows(a: &Mat) -> Vec<f64> {
    linalg::rows_of(a).concat()
}

/// Integrates the Ricci flow of inner products starting at `p0`.
pub fn integrate_metric(mu0: &HomogeneousPoint, p0: &MetricState, options: &FlowOptions) -> Result<MetricTrajectory> {
    mu0.require_valid()?;
    let mu = mu0.bracket.clone();
    let n = mu.n();
    let mut f = |_t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        let v = metric_velocity(&Mat::from_row_slice(n, n, y), &mu)?;
        out.copy_from_slice(&flat_rows(&v));
        Ok(())
    };
    let y0 = flat_rows(&p0.p);
    let mut f0 = vec![0.0; n * n];
    f(options.t_start, &y0, &mut f0)?;
    let mut knots = Knots::default();
    knots.push(options.t_start, &y0, &f0);
    let times = options.sample_times();
    let mut out_t = vec![options.t_start];
    let mut out_p = vec![p0.p.clone()];
    let mut next = 1;
    let mut stats = Stats::default();
    let mut buf = vec![0.0; n * n];
    let blowup = options.events.blowup_threshold;
    let outcome = integrator::solve(
        &mut f,
        options.t_start,
        &y0,
        options.t_end,
        &options.control(),
        &mut |acc, interp| {
            while next < times.len() && interp.contains(times[next]) {
                interp.eval(times[next], &mut buf);
                out_t.push(times[next]);
                out_p.push(linalg::sym(&Mat::from_row_slice(n, n, &buf)));
                next += 1;
            }
            for (t, y) in interp.interior(super::KNOT_PIECES) {
                let v = metric_velocity(&Mat::from_row_slice(n, n, &y), &mu)?;
                knots.push(t, &y, &flat_rows(&v));
            }
            knots.push(acc.t, acc.y, acc.dydt);
            let big = acc.y.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            Ok(if big > blowup { Control::Stop(Termination::BlowupDetected) } else { Control::Continue })
        },
        &mut stats,
    );
    let termination = match outcome {
        Ok(Outcome::Finished) => Termination::ReachedEnd,
        Ok(Outcome::Stopped(t)) => t,
        Ok(Outcome::Underflow) => Termination::StepUnderflow,
        // the metric degenerating is how this side sees a finite-time singularity
        Err(Error::NotPositiveDefinite) => Termination::StepUnderflow,
        Err(e) => return Err(e),
    };
    Ok(MetricTrajectory { mu0: mu0.bracket.clone(), times: out_t, p: out_p, knots, termination, stats })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeSide {
    /// `dh/dt = −h·Ric(⟨·,·⟩_t)`
    Metric,
    /// `dh/dt = −(Ric_{μ(t)} + r I)·h`
    Bracket,
}

pub enum GaugeSource<'a> {
    Metric(&'a MetricTrajectory),
    Bracket(&'a FlowTrajectory),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeRecord {
    pub side: GaugeSide,
    pub times: Vec<f64>,
    pub h: Vec<Mat>,
}

impl GaugeRecord {
    /// `h̃(t)·μ₀` at every recorded time.
    pub fn pushed(&self, mu0: &BracketTensor) -> Result<Vec<BracketTensor>> {
        self.h.iter().map(|h| transformed(&gauge_lift(mu0.q(), h), mu0)).collect()
    }
}

/// Solves the gauge ODE along a stored trajectory, reporting `h` at its sample times.
pub fn integrate_gauge(source: GaugeSource, control: &StepControl) -> Result<GaugeRecord> {
    let (side, times, n) = match &source {
        GaugeSource::Metric(m) => (GaugeSide::Metric, m.times.clone(), m.mu0.n()),
        GaugeSource::Bracket(b) => (GaugeSide::Bracket, b.times(), b.layout.n()),
    };
    let mut f = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        let h = Mat::from_row_slice(n, n, y);
        let v = match &source {
            GaugeSource::Metric(m) => -(&h * metric_ricci(&m.p_at(t)?, &m.mu0)?),
            GaugeSource::Bracket(b) => {
                let state = b.state_at(t)?;
                let ev = b.layout.evaluate(&state);
                let r = b.layout.rate(&state, &ev, &b.strategy)?;
                -((ev.curvature.ric + Mat::identity(n, n) * r) * &h)
            }
        };
        out.copy_from_slice(&flat_rows(&v));
        Ok(())
    };
    let t0 = times[0];
    let t1 = *times.last().unwrap();
    let y0 = flat_rows(&Mat::identity(n, n));
    let mut hs = vec![Mat::identity(n, n)];
    let mut next = 1;
    let mut buf = vec![0.0; n * n];
    let mut stats = Stats::default();
    integrator::solve::<()>(
        &mut f,
        t0,
        &y0,
        t1,
        control,
        &mut |acc, interp| {
            while next < times.len() && interp.contains(times[next]) {
                if times[next] == acc.t {
                    buf.copy_from_slice(acc.y);
                } else {
                    interp.eval(times[next], &mut buf);
                }
                hs.push(Mat::from_row_slice(n, n, &buf));
                next += 1;
            }
            Ok(Control::Continue)
        },
        &mut stats,
    )?;
    Ok(GaugeRecord { side, times: times[..hs.len()].to_vec(), h: hs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub t_end: f64,
    pub t_reached: f64,
    pub bracket_termination: Termination,
    pub metric_termination: Termination,
    /// `max ‖h̃·μ₀ − μ(t)‖_aux` with `h` from the bracket-side gauge.
    pub bracket_gauge_pushforward: f64,
    /// `max ‖hᵗh − P(t)‖` with `h` from the bracket-side gauge.
    pub bracket_gauge_metric: f64,
    pub metric_gauge_pushforward: f64,
    pub metric_gauge_metric: f64,
    /// `max ‖μ(t)|k×g − μ₀|k×g‖_aux`.
    pub isotropy_drift: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Integrates the bracket flow, the metric flow and both gauges from `point`
/// and measures how far the two sides are from describing the same solution.
pub fn equivalence_check(point: &HomogeneousPoint, options: &FlowOptions, threshold: f64) -> Result<EquivalenceReport> {
    point.require_valid()?;
    let n = point.bracket.n();
    let (bracket, metric) = std::thread::scope(|s| {
        let b = s.spawn(|| integrate(point, &NormalizationStrategy::Unnormalized, options));
        let m = s.spawn(|| integrate_metric(point, &MetricState::identity(n), options));
        (b.join().expect("bracket side"), m.join().expect("metric side"))
    });
    let (bracket, metric) = (bracket?, metric?);

    // compare on the common sample grid
    let k = bracket.samples.len().min(metric.times.len());
    let control = StepControl { rtol: options.rtol, atol: options.atol, ..StepControl::default() };
    let mut b_traj = bracket.clone();
    b_traj.samples.truncate(k);
    let mut m_traj = metric.clone();
    m_traj.times.truncate(k);
    m_traj.p.truncate(k);

    let (gb, gm) = std::thread::scope(|s| {
        let gb = s.spawn(|| integrate_gauge(GaugeSource::Bracket(&b_traj), &control));
        let gm = s.spawn(|| integrate_gauge(GaugeSource::Metric(&m_traj), &control));
        (gb.join().expect("bracket gauge"), gm.join().expect("metric gauge"))
    });
    let (gb, gm) = (gb?, gm?);

    let mu0 = &point.bracket;
    let deviations = |g: &GaugeRecord| -> Result<(f64, f64)> {
        let mut push: f64 = 0.0;
        let mut met: f64 = 0.0;
        for (i, pushed) in g.pushed(mu0)?.iter().enumerate() {
            let mu_t = b_traj.bracket_at_sample(i)?;
            push = push.max(pushed.sub(&mu_t)?.norm_aux());
            let h = &g.h[i];
            met = met.max((h.transpose() * h - &m_traj.p[i]).norm());
        }
        Ok((push, met))
    };
    let (bp, bm) = deviations(&gb)?;
    let (mp, mm) = deviations(&gm)?;

    let iso0 = mu0.split().mu_iso;
    let mut isotropy_drift: f64 = 0.0;
    for i in 0..k {
        isotropy_drift = isotropy_drift.max(b_traj.bracket_at_sample(i)?.split().mu_iso.sub(&iso0)?.norm_aux());
    }

    let t_reached = b_traj.samples[k - 1].t;
    let pass = [bp, bm, mp, mm].iter().all(|&d| d <= threshold) && t_reached == options.t_end;
    Ok(EquivalenceReport {
        t_end: options.t_end,
        t_reached,
        bracket_termination: bracket.termination,
        metric_termination: metric.termination,
        bracket_gauge_pushforward: bp,
        bracket_gauge_metric: bm,
        metric_gauge_pushforward: mp,
        metric_gauge_metric: mm,
        isotropy_drift,
        threshold,
        pass,
    })
}
