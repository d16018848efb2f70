use std::collections::BTreeMap;

use serde::Serialize;

use crate::bracket::BracketTensor;
use crate::catalog::ReducedFamilyPoint;
use crate::flow::{FlowTrajectory, StateLayout, Termination};

use super::algebra::{einstein_residual, soliton_fit, DEFAULT_RANK_TOL};
use super::injectivity::bound_of;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FlatLimit,
    EinsteinLimit,
    SolitonLimit,
    FiniteTimeBlowup,
    BoundedAncient,
    ZeroCollapse,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::FlatLimit => "flat-limit",
            Verdict::EinsteinLimit => "einstein-limit",
            Verdict::SolitonLimit => "soliton-limit",
            Verdict::FiniteTimeBlowup => "finite-time-blowup",
            Verdict::BoundedAncient => "bounded-ancient",
            Verdict::ZeroCollapse => "zero-collapse",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    Bracket(BracketTensor),
    Family(ReducedFamilyPoint),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitClassification {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub residuals: BTreeMap<&'static str, f64>,
    /// Informational labels about the space-level convergence the bracket limit
    /// suggests; nothing here is proved.
    pub labels: Vec<&'static str>,
}

/// Thresholds, each scaled by `1 + ‖·‖` of the quantity it is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub flat_tol: f64,
    pub einstein_tol: f64,
    pub soliton_tol: f64,
    pub zero_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { flat_tol: 1e-6, einstein_tol: 1e-6, soliton_tol: 1e-6, zero_tol: 1e-5 }
    }
}

pub fn classify_limit(traj: &FlowTrajectory) -> LimitClassification {
    classify_limit_with(traj, &ClassifyOptions::default())
}

/// The full bracket behind a state, if the layout has one.
fn realize(layout: &StateLayout, state: &[f64]) -> Option<BracketTensor> {
    match layout {
        StateLayout::Bracket { .. } => layout.bracket(state),
        StateLayout::Reduced { .. } => layout.reduced(state)?.embed().ok(),
    }
}

/// `‖μ|p×p‖`: the bracket restricted to `p`, both components.
fn pp_norm(layout: &StateLayout, state: &[f64]) -> f64 {
    match realize(layout, state) {
        Some(mu) => {
            let s = mu.split();
            (s.mu_k.norm2_aux() + s.mu_p.norm2_aux()).sqrt()
        }
        // families without a realization have no isotropy
        None => layout.evaluate(state).aux_norm2.sqrt(),
    }
}

pub fn classify_limit_with(traj: &FlowTrajectory, opts: &ClassifyOptions) -> LimitClassification {
    let layout = &traj.layout;
    let first = &traj.samples[0].state;
    let last = &traj.last.state;
    let ev0 = layout.evaluate(first);
    let ev = layout.evaluate(last);
    let ric = &ev.curvature.ric;
    let ric0_norm = ev0.curvature.ric.norm();
    let ric_norm = ric.norm();
    let pp0 = pp_norm(layout, first);
    let pp = pp_norm(layout, last);
    let mu_p = ev.mu_p_norm2.sqrt();

    let mut residuals = BTreeMap::new();
    residuals.insert("ric_norm", ric_norm);
    residuals.insert("einstein", einstein_residual(ric));
    residuals.insert("mu_p_norm", mu_p);
    residuals.insert("mu_pp_norm", pp);
    residuals.insert("t_final", traj.last.t);

    let mu = realize(layout, last);
    let witness = match layout {
        StateLayout::Bracket { .. } => mu.clone().map(Witness::Bracket),
        StateLayout::Reduced { .. } => layout.reduced(last).map(Witness::Family),
    };
    let collapsed = traj.reparam.as_ref().is_some_and(|r| r.collapsed);
    let zero = |x: f64| x < opts.zero_tol * (1.0 + pp0);

    let verdict = match traj.termination {
        Termination::BlowupDetected | Termination::StepUnderflow => Verdict::FiniteTimeBlowup,
        Termination::ConvergedToFixedPoint => {
            let scale = 1.0 + ric_norm;
            if collapsed || zero(pp) {
                Verdict::ZeroCollapse
            } else if ric_norm < opts.flat_tol * (1.0 + ric0_norm) {
                Verdict::FlatLimit
            } else if einstein_residual(ric) < opts.einstein_tol * scale {
                Verdict::EinsteinLimit
            } else {
                let fit = mu.as_ref().map(|m| soliton_fit(m, DEFAULT_RANK_TOL).residual);
                if let Some(r) = fit {
                    residuals.insert("soliton", r);
                }
                match fit {
                    Some(r) if r < opts.soliton_tol * scale => Verdict::SolitonLimit,
                    _ => Verdict::Inconclusive,
                }
            }
        }
        Termination::ReachedEnd if collapsed || zero(mu_p) => Verdict::ZeroCollapse,
        Termination::ReachedEnd if traj.is_backward() => Verdict::BoundedAncient,
        Termination::ReachedEnd => Verdict::Inconclusive,
    };

    let convergent = matches!(
        verdict,
        Verdict::FlatLimit | Verdict::EinsteinLimit | Verdict::SolitonLimit | Verdict::ZeroCollapse
    );
    let mut labels = Vec::new();
    if convergent {
        labels.push("infinitesimal-convergence");
        if let Some(m) = &mu {
            let r = bound_of(m).best.value();
            residuals.insert("injectivity_bound", r);
            if r > 0.0 {
                labels.push("local-convergence-if-bound-uniform");
            }
        }
    }
    LimitClassification { verdict, witness: if convergent { witness } else { None }, residuals, labels }
}
