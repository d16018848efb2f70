//! Trajectory CSV and its JSON sidecar.

use std::io::Write;

use serde::Serialize;

use super::{FlowOptions, FlowTrajectory, NormalizationStrategy, ReparamSummary, StateLayout, Stats, Termination};

const FIXED_COLUMNS: [&str; 8] = ["t", "c", "tau", "R", "ric_norm", "mu_p_norm2", "H_norm2", "trB"];

/// Writes one row per sample with every float at 17 significant digits.
pub fn write_csv<W: Write>(traj: &FlowTrajectory, mut w: W) -> std::io::Result<()> {
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(traj.layout.column_names());
    writeln!(w, "{}", header.join(","))?;
    for s in &traj.samples {
        let m = &s.summary;
        let mut row = vec![s.t, s.c, s.tau, m.scalar, m.ric_norm, m.mu_p_norm2, m.h_norm2, m.tr_b];
        row.extend_from_slice(&s.state);
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub layout: StateLayout,
    pub state_columns: Vec<String>,
    pub strategy: NormalizationStrategy,
    pub options: FlowOptions,
    pub termination: Termination,
    pub t_final: f64,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub blowup_time_estimate: Option<f64>,
    pub reparam: Option<ReparamSummary>,
    /// Inner product behind `‖μ‖` in event thresholds and injectivity bounds.
    pub aux_norm: &'static str,
}

impl Manifest {
    pub fn of(traj: &FlowTrajectory) -> Self {
        let Stats { accepted, rejected, evaluations } = traj.stats.clone();
        Self {
            layout: traj.layout,
            state_columns: traj.layout.column_names(),
            strategy: traj.strategy.clone(),
            options: traj.options.clone(),
            termination: traj.termination,
            t_final: traj.last.t,
            samples: traj.samples.len(),
            accepted_steps: accepted,
            rejected_steps: rejected,
            rhs_evaluations: evaluations,
            blowup_time_estimate: traj.blowup_time_estimate,
            reparam: traj.reparam.clone(),
            aux_norm: "fixed basis of k + p declared orthonormal",
        }
    }
}
