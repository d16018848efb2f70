//! Bracket flow, its normalizations, the metric-side flow and the gauges
//! relating them.

pub mod integrator;
mod metric;
mod normalization;
mod output;
mod reparam;
mod system;

use serde::Serialize;

use crate::bracket::{BracketTensor, HomogeneousPoint, DEFAULT_VALIDATION_TOL};
use crate::catalog::ReducedFamilyPoint;
use crate::error::{Error, Result};

pub use integrator::{Knots, Stats, StepControl};
pub use metric::{
    equivalence_check, integrate_gauge, integrate_metric, metric_ricci, metric_rhs, EquivalenceReport,
    GaugeRecord, GaugeSource, MetricState, MetricTrajectory,
};
pub use normalization::{NormalizationStrategy, RateContext, RateFn};
pub use output::{write_csv, Manifest};
pub use reparam::{reparametrize, rescale_to_ricci_norm, ReparamSummary};
pub use system::{bracket_tangent, Evaluated, StateLayout};

use integrator::{Control, Outcome};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowEvents {
    /// Stop once `‖μ‖_aux` exceeds this.
    pub blowup_threshold: f64,
    /// Tangent norm below which a step counts towards convergence.
    pub conv_threshold: f64,
    /// Consecutive accepted steps under `conv_threshold` needed to stop.
    pub conv_window: usize,
    /// Abort when the relative homogeneity defect exceeds `1e3` times this.
    pub validation_tol: f64,
}

impl Default for FlowEvents {
    fn default() -> Self {
        Self { blowup_threshold: 1e6, conv_threshold: 1e-12, conv_window: 5, validation_tol: DEFAULT_VALIDATION_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowOptions {
    pub t_start: f64,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Number of uniformly spaced output samples, endpoints included.
    pub samples: usize,
    pub events: FlowEvents,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 1.0,
            rtol: 1e-9,
            atol: 1e-12,
            h_max: None,
            max_steps: 2_000_000,
            samples: 101,
            events: FlowEvents::default(),
        }
    }
}

impl FlowOptions {
    pub fn until(t_end: f64) -> Self {
        Self { t_end, ..Self::default() }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_tol(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub(crate) fn control(&self) -> StepControl {
        StepControl { rtol: self.rtol, atol: self.atol, h_max: self.h_max, h_init: None, max_steps: self.max_steps }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let n = self.samples.max(2);
        let span = self.t_end - self.t_start;
        (0..n)
            .map(|i| if i == n - 1 { self.t_end } else { self.t_start + span * i as f64 / (n - 1) as f64 })
            .collect()
    }

    fn check(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        if self.t_end == self.t_start || !self.t_end.is_finite() || !self.t_start.is_finite() {
            return Err(Error::Parameter("time span must be finite and nondegenerate".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedEnd,
    BlowupDetected,
    ConvergedToFixedPoint,
    StepUnderflow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    #[serde(rename = "R")]
    pub scalar: f64,
    pub ric_norm: f64,
    pub mu_p_norm2: f64,
    #[serde(rename = "H_norm2")]
    pub h_norm2: f64,
    #[serde(rename = "trB")]
    pub tr_b: f64,
    pub aux_norm2: f64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub c: f64,
    pub tau: f64,
    pub state: Vec<f64>,
    pub summary: SampleSummary,
}

/// A finished run: uniform samples, the terminal state, and the raw step
/// knots for cubic Hermite reconstruction at arbitrary times.
#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub layout: StateLayout,
    pub strategy: NormalizationStrategy,
    pub options: FlowOptions,
    pub samples: Vec<Sample>,
    pub last: Sample,
    /// Knots of the augmented state `(μ, c, τ)`.
    pub knots: Knots,
    pub termination: Termination,
    pub stats: Stats,
    pub blowup_time_estimate: Option<f64>,
    pub reparam: Option<ReparamSummary>,
    pub gauge: Option<GaugeRecord>,
}

impl FlowTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn step_sizes(&self) -> Vec<f64> {
        self.knots.t.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    pub fn is_backward(&self) -> bool {
        self.options.t_end < self.options.t_start
    }

    pub fn bracket_at_sample(&self, i: usize) -> Result<BracketTensor> {
        self.layout.bracket(&self.samples[i].state).ok_or(Error::WrongLayout("bracket"))
    }

    pub fn final_bracket(&self) -> Result<BracketTensor> {
        self.layout.bracket(&self.last.state).ok_or(Error::WrongLayout("bracket"))
    }

    pub fn final_reduced(&self) -> Result<ReducedFamilyPoint> {
        self.layout.reduced(&self.last.state).ok_or(Error::WrongLayout("family"))
    }

    /// State at an arbitrary time inside the integrated range.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        let mut y = self.knots.eval(t)?;
        y.truncate(self.layout.len());
        Ok(y)
    }

    /// `(c, τ)` at an arbitrary time.
    pub fn scaling_at(&self, t: f64) -> Result<(f64, f64)> {
        let y = self.knots.eval(t)?;
        let m = self.layout.len();
        Ok((y[m], y[m + 1]))
    }

    pub fn rate_at_state(&self, y: &[f64]) -> Result<f64> {
        let ev = self.layout.evaluate(y);
        self.layout.rate(y, &ev, &self.strategy)
    }
}

pub(crate) fn summarize(layout: &StateLayout, strategy: &NormalizationStrategy, t: f64, y: &[f64]) -> Sample {
    let m = layout.len();
    let ev = layout.evaluate(y);
    let c = &ev.curvature;
    let rate = layout.rate(y, &ev, strategy).unwrap_or(f64::NAN);
    Sample {
        t,
        c: y[m],
        tau: y[m + 1],
        state: y[..m].to_vec(),
        summary: SampleSummary {
            scalar: c.r,
            ric_norm: c.ric.norm(),
            mu_p_norm2: ev.mu_p_norm2,
            h_norm2: c.h.norm_squared(),
            tr_b: c.b.trace(),
            aux_norm2: ev.aux_norm2,
            rate,
        },
    }
}

/// Right-hand side of the bracket flow, `−π(diag(0, Ric))μ`.
pub fn bracket_rhs(point: &HomogeneousPoint) -> Result<BracketTensor> {
    point.require_valid()?;
    let ric = crate::curvature::compute(&point.bracket).ric;
    Ok(bracket_tangent(&point.bracket, &ric, 0.0))
}

pub fn normalization_rate(point: &HomogeneousPoint, strategy: &NormalizationStrategy) -> Result<f64> {
    point.require_valid()?;
    if matches!(strategy, NormalizationStrategy::RicciNorm) {
        return Err(Error::RequiresReparametrization);
    }
    let layout = StateLayout::Bracket { q: point.bracket.q(), n: point.bracket.n() };
    let y = point.bracket.as_slice();
    layout.rate(y, &layout.evaluate(y), strategy)
}

/// Right-hand side of the `r`-normalized bracket flow.
pub fn normalized_rhs(point: &HomogeneousPoint, strategy: &NormalizationStrategy) -> Result<BracketTensor> {
    let r = normalization_rate(point, strategy)?;
    let ric = crate::curvature::compute(&point.bracket).ric;
    Ok(bracket_tangent(&point.bracket, &ric, r))
}

/// Rate of a family point under a normalization.
pub fn reduced_rate(point: &ReducedFamilyPoint, strategy: &NormalizationStrategy) -> Result<f64> {
    if matches!(strategy, NormalizationStrategy::RicciNorm) {
        return Err(Error::RequiresReparametrization);
    }
    let layout = StateLayout::Reduced { family: point.family };
    layout.rate(&point.params, &layout.evaluate(&point.params), strategy)
}

/// Normalized velocity of a family point in parameter space.
pub fn reduced_normalized_rhs(point: &ReducedFamilyPoint, strategy: &NormalizationStrategy) -> Result<Vec<f64>> {
    Ok(point.reduced_rhs_with_rate(reduced_rate(point, strategy)?))
}

/// Integrates the (normalized) bracket flow from a valid point.
pub fn integrate(
    point: &HomogeneousPoint,
    strategy: &NormalizationStrategy,
    options: &FlowOptions,
) -> Result<FlowTrajectory> {
    point.require_valid()?;
    let layout = StateLayout::Bracket { q: point.bracket.q(), n: point.bracket.n() };
    run(layout, point.bracket.as_slice(), strategy, options)
}

/// Integrates the reduced system of a catalog family.
pub fn integrate_reduced(
    point: &ReducedFamilyPoint,
    strategy: &NormalizationStrategy,
    options: &FlowOptions,
) -> Result<FlowTrajectory> {
    run(StateLayout::Reduced { family: point.family }, &point.params, strategy, options)
}

/// Each accepted step is stored as this many Hermite pieces.
pub(crate) const KNOT_PIECES: usize = 4;

fn augmented_rhs(
    layout: &StateLayout,
    strategy: &NormalizationStrategy,
    y: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let m = layout.len();
    let ev = layout.evaluate(y);
    let r = layout.rate(y, &ev, strategy)?;
    layout.velocity(y, &ev.curvature.ric, r, out);
    let c = y[m];
    out[m] = r * c;
    out[m + 1] = c * c;
    Ok(())
}

fn run(
    layout: StateLayout,
    y0: &[f64],
    strategy: &NormalizationStrategy,
    options: &FlowOptions,
) -> Result<FlowTrajectory> {
    options.check()?;
    if matches!(strategy, NormalizationStrategy::RicciNorm) {
        return Err(Error::RequiresReparametrization);
    }
    let m = layout.len();
    let mut y = y0.to_vec();
    y.push(1.0);
    y.push(options.t_start);

    let mut f = |_t: f64, y: &[f64], out: &mut [f64]| augmented_rhs(&layout, strategy, y, out);
    let mut f0 = vec![0.0; m + 2];
    f(options.t_start, &y, &mut f0)?;

    let times = options.sample_times();
    let mut samples = vec![summarize(&layout, strategy, options.t_start, &y)];
    let mut next = 1;
    let mut knots = Knots::default();
    knots.push(options.t_start, &y, &f0);

    let ev = &options.events;
    let drift_cap = 1e3 * ev.validation_tol;
    let mut quiet = 0usize;
    let mut buf = vec![0.0; m + 2];
    let mut stats = Stats::default();
    let forward = options.t_end > options.t_start;

    let outcome = integrator::solve(
        &mut f,
        options.t_start,
        &y,
        options.t_end,
        &options.control(),
        &mut |acc, interp| {
            while next < times.len() && interp.contains(times[next]) {
                if times[next] == acc.t {
                    buf.copy_from_slice(acc.y);
                } else {
                    interp.eval(times[next], &mut buf);
                }
                samples.push(summarize(&layout, strategy, times[next], &buf));
                next += 1;
            }
            for (t, y) in interp.interior(KNOT_PIECES) {
                augmented_rhs(&layout, strategy, &y, &mut buf)?;
                knots.push(t, &y, &buf);
            }
            knots.push(acc.t, acc.y, acc.dydt);

            let drift = layout.drift(acc.y);
            if drift > drift_cap || !drift.is_finite() {
                return Err(Error::ValidityDrift { t: acc.t, residual: drift });
            }
            let aux2 = layout.evaluate(acc.y).aux_norm2;
            if aux2.sqrt() > ev.blowup_threshold || !aux2.is_finite() {
                return Ok(Control::Stop(Termination::BlowupDetected));
            }
            if layout.tangent_norm(acc.dydt) < ev.conv_threshold {
                quiet += 1;
                if quiet >= ev.conv_window {
                    return Ok(Control::Stop(Termination::ConvergedToFixedPoint));
                }
            } else {
                quiet = 0;
            }
            Ok(Control::Continue)
        },
        &mut stats,
    )?;

    let termination = match outcome {
        Outcome::Finished => Termination::ReachedEnd,
        Outcome::Stopped(t) => t,
        Outcome::Underflow => Termination::StepUnderflow,
    };
    let t_last = *knots.t.last().unwrap();
    let y_last = knots.y.last().unwrap().clone();
    let last = summarize(&layout, strategy, t_last, &y_last);

    let blowup_time_estimate = match termination {
        Termination::BlowupDetected | Termination::StepUnderflow => blowup_estimate(&knots, &layout, forward),
        _ => None,
    };

    Ok(FlowTrajectory {
        layout,
        strategy: strategy.clone(),
        options: options.clone(),
        samples,
        last,
        knots,
        termination,
        stats,
        blowup_time_estimate,
        reparam: None,
        gauge: None,
    })
}

/// Fits `‖μ‖⁻² ≈ C(T − t)` through the last two knots.
fn blowup_estimate(knots: &Knots, layout: &StateLayout, forward: bool) -> Option<f64> {
    let k = knots.len();
    if k < 2 {
        return None;
    }
    let inv = |i: usize| 1.0 / layout.evaluate(&knots.y[i]).aux_norm2;
    let (t1, t2) = (knots.t[k - 2], knots.t[k - 1]);
    let (y1, y2) = (inv(k - 2), inv(k - 1));
    if y1 <= y2 || t1 == t2 {
        return None;
    }
    let t = t2 + y2 * (t2 - t1) / (y1 - y2);
    (t.is_finite() && (t >= t2) == forward).then_some(t)
}
