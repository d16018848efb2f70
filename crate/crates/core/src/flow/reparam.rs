//! Normalized solutions recovered from an unnormalized one through
//! `μ^r(t) = c(t)·μ(τ(t))`, `c′ = rc`, `τ′ = c²`.

use serde::Serialize;

use crate::error::{Error, Result};

use super::integrator::{self, Control, Knots, Stats};
use super::{summarize, FlowOptions, FlowTrajectory, NormalizationStrategy, StateLayout, Termination};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReparamSummary {
    /// Time range of the unnormalized run that was available.
    pub source_range: (f64, f64),
    pub c_final: f64,
    pub tau_final: f64,
    /// `c → 0` while `τ` stalls inside the available range: the normalized
    /// bracket collapses to zero.
    pub collapsed: bool,
}

const COLLAPSE_C2: f64 = 1e-8;

fn rescaled_state(traj: &FlowTrajectory, c: f64, tau: f64) -> Result<Vec<f64>> {
    let mu = traj.state_at(tau)?;
    traj.layout.rescale(c, &mu)
}

/// Augmented state `(μ^r, c, τ)` and its time derivative.
fn knot(
    layout: &StateLayout,
    strategy: &NormalizationStrategy,
    state: Vec<f64>,
    c: f64,
    tau: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = layout.len();
    let ev = layout.evaluate(&state);
    let r = layout.rate(&state, &ev, strategy)?;
    let mut d = vec![0.0; m + 2];
    layout.velocity(&state, &ev.curvature.ric, r, &mut d);
    d[m] = r * c;
    d[m + 1] = c * c;
    let mut y = state;
    y.push(c);
    y.push(tau);
    Ok((y, d))
}

fn require_unnormalized(traj: &FlowTrajectory) -> Result<()> {
    if traj.strategy.is_unnormalized() {
        Ok(())
    } else {
        Err(Error::Parameter("reparametrization needs an unnormalized trajectory".into()))
    }
}

struct Assembled {
    samples: Vec<super::Sample>,
    knots: Knots,
    stats: Stats,
    c: f64,
    tau: f64,
}

/// Integrates `z′ = g(z)` for the scaling variables and rebuilds the normalized
/// trajectory at the requested sample times.
fn assemble(
    traj: &FlowTrajectory,
    strategy: &NormalizationStrategy,
    options: &FlowOptions,
    z0: &[f64],
    g: &mut dyn FnMut(&[f64], &mut [f64]) -> Result<()>,
    cz: &dyn Fn(&[f64]) -> Result<(f64, f64)>,
) -> Result<Assembled> {
    let layout = traj.layout;
    let times = options.sample_times();
    let build = |z: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let (c, tau) = cz(z)?;
        knot(&layout, strategy, rescaled_state(traj, c, tau)?, c, tau)
    };
    let (y0, d0) = build(z0)?;
    let mut samples = vec![summarize(&layout, strategy, options.t_start, &y0)];
    let mut knots = Knots::default();
    knots.push(options.t_start, &y0, &d0);
    let mut next = 1;
    let mut buf = vec![0.0; z0.len()];
    let mut last_z = z0.to_vec();
    let mut stats = Stats::default();
    let mut f = |_t: f64, z: &[f64], out: &mut [f64]| g(z, out);
    integrator::solve::<()>(
        &mut f,
        options.t_start,
        z0,
        options.t_end,
        &options.control(),
        &mut |acc, interp| {
            while next < times.len() && interp.contains(times[next]) {
                if times[next] == acc.t {
                    buf.copy_from_slice(acc.y);
                } else {
                    interp.eval(times[next], &mut buf);
                }
                let (y, _) = build(&buf)?;
                samples.push(summarize(&layout, strategy, times[next], &y));
                next += 1;
            }
            for (t, z) in interp.interior(super::KNOT_PIECES) {
                let (y, d) = build(&z)?;
                knots.push(t, &y, &d);
            }
            let (y, d) = build(acc.y)?;
            knots.push(acc.t, &y, &d);
            last_z.copy_from_slice(acc.y);
            Ok(Control::Continue)
        },
        &mut stats,
    )?;
    let (c, tau) = cz(&last_z)?;
    Ok(Assembled { samples, knots, stats, c, tau })
}

fn finish(traj: &FlowTrajectory, strategy: &NormalizationStrategy, options: &FlowOptions, a: Assembled) -> FlowTrajectory {
    let layout = traj.layout;
    let (lo, hi) = traj.knots.range();
    let source_range = (traj.knots.t[0], *traj.knots.t.last().unwrap());
    let inside = a.tau > lo && a.tau < hi;
    let t_last = *a.knots.t.last().unwrap();
    let last = summarize(&layout, strategy, t_last, a.knots.y.last().unwrap());
    FlowTrajectory {
        layout,
        strategy: strategy.clone(),
        options: options.clone(),
        samples: a.samples,
        last,
        knots: a.knots,
        termination: Termination::ReachedEnd,
        stats: a.stats,
        blowup_time_estimate: None,
        reparam: Some(ReparamSummary {
            source_range,
            c_final: a.c,
            tau_final: a.tau,
            collapsed: a.c * a.c < COLLAPSE_C2 && inside,
        }),
        gauge: None,
    }
}

/// Turns an unnormalized trajectory into the `r`-normalized one.
pub fn reparametrize(
    traj: &FlowTrajectory,
    strategy: &NormalizationStrategy,
    options: &FlowOptions,
) -> Result<FlowTrajectory> {
    require_unnormalized(traj)?;
    if matches!(strategy, NormalizationStrategy::RicciNorm) {
        return rescale_to_ricci_norm(traj, options);
    }
    options_ok(options)?;
    let layout = traj.layout;
    let mut g = |z: &[f64], out: &mut [f64]| -> Result<()> {
        let (c, tau) = (z[0], z[1]);
        let state = rescaled_state(traj, c, tau)?;
        let ev = layout.evaluate(&state);
        let r = layout.rate(&state, &ev, strategy)?;
        out[0] = r * c;
        out[1] = c * c;
        Ok(())
    };
    let a = assemble(traj, strategy, options, &[1.0, options.t_start], &mut g, &|z| Ok((z[0], z[1])))?;
    Ok(finish(traj, strategy, options, a))
}

/// Rescales so that `tr Ric²` stays at its initial value:
/// `c(τ) = (tr Ric₀² / tr Ric(μ(τ))²)^{1/4}` and `τ′ = c(τ)²`.
pub fn rescale_to_ricci_norm(traj: &FlowTrajectory, options: &FlowOptions) -> Result<FlowTrajectory> {
    require_unnormalized(traj)?;
    options_ok(options)?;
    let layout = traj.layout;
    let tr2 = |state: &[f64]| {
        let ric = layout.evaluate(state).curvature.ric;
        (&ric * &ric).trace()
    };
    let ric0 = tr2(&traj.state_at(options.t_start)?);
    if ric0 == 0.0 {
        return Err(Error::FlatInitialPoint);
    }
    let c_of = move |tau: f64| -> Result<f64> {
        let t = tr2(&traj.state_at(tau)?);
        if t == 0.0 {
            return Err(Error::FlatInitialPoint);
        }
        Ok((ric0 / t).powf(0.25))
    };
    let mut g = |z: &[f64], out: &mut [f64]| -> Result<()> {
        out[0] = c_of(z[0])?.powi(2);
        Ok(())
    };
    let strategy = NormalizationStrategy::RicciNorm;
    let a = assemble(traj, &strategy, options, &[options.t_start], &mut g, &|z| Ok((c_of(z[0])?, z[0])))?;
    Ok(finish(traj, &strategy, options, a))
}

fn options_ok(options: &FlowOptions) -> Result<()> {
    if options.t_end == options.t_start {
        return Err(Error::Parameter("time span must be nondegenerate".into()));
    }
    Ok(())
}
