use std::io::Write;
use std::path::Path;

use anyhow::Context;
use bracketflow::analysis::{
    classify_limit, derivation_algebra, einstein_residual, identity_audit_with, injectivity_lower_bound, p_derivations,
    soliton_residual, DEFAULT_AUDIT_TOL, DEFAULT_RANK_TOL,
};
use bracketflow::catalog::ReducedFamilyPoint;
use bracketflow::curvature::curvature_report;
use bracketflow::flow::{
    equivalence_check, integrate, integrate_reduced, normalization_rate, reduced_normalized_rhs, reduced_rate,
    rescale_to_ricci_norm, write_csv, FlowOptions, FlowTrajectory, Manifest, NormalizationStrategy, Termination,
};
use bracketflow::Error;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{CheckArgs, EquivArgs, FlowArgs, SourceArgs, SweepArgs, SweepMode};
use crate::config::{self, parse_axis, Axis, InputError, Loaded, Source};

/// Settings shared by every subcommand.
pub struct Global<'a> {
    pub loaded: Loaded,
    pub out: Option<&'a Path>,
    pub tol: Option<f64>,
}

/// Writes `name` under the output directory, or to stdout without one.
fn emit(out: Option<&Path>, name: &str, content: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(content)?;
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("values serialize");
    s.push(b'\n');
    s
}

/// Integrates `source`; the Ricci-norm flow comes from an unnormalized run,
/// lengthened until it covers the requested normalized span.
pub fn trajectory(source: &Source, strategy: &NormalizationStrategy, options: &FlowOptions) -> anyhow::Result<FlowTrajectory> {
    let direct = |s: &NormalizationStrategy, o: &FlowOptions| -> anyhow::Result<FlowTrajectory> {
        Ok(match source {
            Source::Family { point, full_tensor: false } => integrate_reduced(point, s, o)?,
            _ => integrate(&source.point()?, s, o)?,
        })
    };
    if !matches!(strategy, NormalizationStrategy::RicciNorm) {
        return direct(strategy, options);
    }
    let mut span = options.t_end - options.t_start;
    for _ in 0..40 {
        let src = direct(&NormalizationStrategy::Unnormalized, &FlowOptions { t_end: options.t_start + span, ..options.clone() })?;
        match rescale_to_ricci_norm(&src, options) {
            Err(Error::OutOfRange { .. }) if src.termination == Termination::ReachedEnd => span *= 4.0,
            other => return Ok(other?),
        }
    }
    anyhow::bail!("unnormalized source never covered the requested span")
}

fn rates_of(f: impl Fn(&NormalizationStrategy) -> bracketflow::Result<f64>) -> Value {
    let mut m = serde_json::Map::new();
    for name in ["volume-element", "scalar-curvature", "bracket-norm"] {
        let s = NormalizationStrategy::from_name(name).expect("known name");
        m.insert(name.into(), f(&s).ok().map_or(Value::Null, Value::from));
    }
    Value::Object(m)
}

pub fn ricci(args: &SourceArgs, g: &Global) -> anyhow::Result<u8> {
    let source = config::source(args, &g.loaded)?;
    let report = match &source {
        Source::Family { point, .. } if !point.family.has_realization() => {
            let c = point.closed_form();
            json!({
                "source": source.describe(),
                "curvature": c,
                "einstein_residual": einstein_residual(&c.ric),
                "rates": rates_of(|s| reduced_rate(point, s)),
            })
        }
        _ => {
            let p = source.point()?;
            let c = curvature_report(&p)?;
            json!({
                "source": source.describe(),
                "validation": { "report": p.report, "h2": p.h2_status },
                "curvature": c,
                "einstein_residual": einstein_residual(&c.ric),
                "soliton": soliton_residual(&p)?,
                "derivations": {
                    "dim": derivation_algebra(&p.bracket, DEFAULT_RANK_TOL).dim,
                    "p_dim": p_derivations(&p.bracket, DEFAULT_RANK_TOL).dim,
                },
                "injectivity": injectivity_lower_bound(&p)?,
                "rates": rates_of(|s| normalization_rate(&p, s)),
            })
        }
    };
    emit(g.out, "ricci.json", &pretty(&report))?;
    Ok(0)
}

pub fn flow(args: &FlowArgs, g: &Global) -> anyhow::Result<u8> {
    let cfg = &g.loaded.config;
    let source = config::source(&args.source, &g.loaded)?;
    let strategy = config::strategy(&args.run, cfg)?;
    let options = config::options(args.run.t_span.as_deref(), args.run.samples, g.tol, cfg)?;
    let traj = trajectory(&source, &strategy, &options)?;
    let mut csv = Vec::new();
    write_csv(&traj, &mut csv)?;
    let summary = json!({
        "source": source.describe(),
        "manifest": Manifest::of(&traj),
        "classification": classify_limit(&traj),
    });
    match g.out {
        Some(_) => {
            emit(g.out, "trajectory.csv", &csv)?;
            emit(g.out, "manifest.json", &pretty(&summary))?;
            std::io::stdout().write_all(&pretty(&summary["classification"]))?;
        }
        None => {
            std::io::stdout().write_all(&csv)?;
            eprintln!("{}", serde_json::to_string(&summary["classification"])?);
        }
    }
    Ok(0)
}

fn cells(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..axis.count).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn clean(msg: &str) -> String {
    msg.replace([',', '\n'], ";")
}

pub fn sweep(args: &SweepArgs, g: &Global) -> anyhow::Result<u8> {
    let cfg = &g.loaded.config;
    let source = config::source(&args.source, &g.loaded)?;
    let Source::Family { point: base, full_tensor } = &source else {
        return Err(InputError("sweep needs a --family source".into()).into());
    };
    let strategy = config::strategy(&args.run, cfg)?;
    let options = config::options(args.run.t_span.as_deref(), args.run.samples, g.tol, cfg)?;
    let mode = args.mode.or(cfg.mode).unwrap_or(SweepMode::Flow);
    let axes: Vec<Axis> = if args.axes.is_empty() {
        cfg.axes.clone().unwrap_or_default()
    } else {
        args.axes.iter().map(|s| parse_axis(s)).collect::<anyhow::Result<_>>()?
    };
    if axes.is_empty() {
        return Err(InputError("sweep needs at least one --axis".into()).into());
    }
    let names = base.family.param_names();
    let slots: Vec<usize> = axes
        .iter()
        .map(|a| {
            names.iter().position(|n| *n == a.name).ok_or_else(|| InputError(format!("family has no parameter `{}`", a.name)))
        })
        .collect::<Result<_, _>>()?;
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();

    let row = |idx: &Vec<usize>| -> String {
        let mut params = base.params.clone();
        for (k, &i) in idx.iter().enumerate() {
            params[slots[k]] = values[k][i];
        }
        let point = ReducedFamilyPoint { family: base.family, params: params.clone() };
        let mut cells: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        cells.extend(params.iter().map(|&x| fmt(x)));
        let blanks = names.len();
        match mode {
            SweepMode::Rhs => match reduced_normalized_rhs(&point, &strategy) {
                Ok(v) => {
                    cells.extend(v.iter().map(|&x| fmt(x)));
                    cells.push(String::new());
                }
                Err(e) => {
                    cells.extend(std::iter::repeat_n(String::new(), blanks));
                    cells.push(clean(&e.to_string()));
                }
            },
            SweepMode::Flow => {
                let src = Source::Family { point, full_tensor: *full_tensor };
                match trajectory(&src, &strategy, &options) {
                    Ok(t) => {
                        let cls = classify_limit(&t);
                        let end = match t.layout.reduced(&t.last.state) {
                            Some(p) => p.params,
                            None => ReducedFamilyPoint::project(base.family, &t.final_bracket().expect("bracket layout"))
                                .map(|p| p.params)
                                .unwrap_or_else(|_| vec![f64::NAN; blanks]),
                        };
                        cells.push(serde_json::to_value(t.termination).expect("enum").as_str().unwrap_or("").into());
                        cells.push(cls.verdict.name().into());
                        cells.push(fmt(t.last.t));
                        cells.extend(end.iter().map(|&x| fmt(x)));
                        cells.push(String::new());
                    }
                    Err(e) => {
                        cells.extend(std::iter::repeat_n(String::new(), 3 + blanks));
                        cells.push(clean(&format!("{e:#}")));
                    }
                }
            }
        }
        cells.join(",")
    };

    let grid = cells(&axes);
    let rows: Vec<String> = grid.par_iter().map(row).collect();

    let mut header: Vec<String> = axes.iter().map(|a| format!("i_{}", a.name)).collect();
    header.extend(names.iter().map(|n| n.to_string()));
    match mode {
        SweepMode::Rhs => header.extend(names.iter().map(|n| format!("d_{n}"))),
        SweepMode::Flow => {
            header.extend(["termination", "verdict", "t_final"].map(String::from));
            header.extend(names.iter().map(|n| format!("final_{n}")));
        }
    }
    header.push("error".into());
    let mut csv = header.join(",");
    csv.push('\n');
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    emit(g.out, "sweep.csv", csv.as_bytes())?;
    Ok(0)
}

pub fn check(args: &CheckArgs, g: &Global) -> anyhow::Result<u8> {
    let cfg = &g.loaded.config;
    let source = config::source(&args.source, &g.loaded)?;
    let strategy = config::strategy(&args.run, cfg)?;
    let options = config::options(args.run.t_span.as_deref(), args.run.samples, g.tol, cfg)?;
    let tol = args.audit_tol.or(cfg.audit_tol).unwrap_or(DEFAULT_AUDIT_TOL);
    let traj = trajectory(&source, &strategy, &options)?;
    let report = identity_audit_with(&traj, tol)?;
    let out = json!({
        "source": source.describe(),
        "strategy": strategy.name(),
        "termination": traj.termination,
        "t_final": traj.last.t,
        "audit": report,
    });
    emit(g.out, "audit.json", &pretty(&out))?;
    Ok(if report.pass { 0 } else { 1 })
}

pub fn equiv(args: &EquivArgs, g: &Global) -> anyhow::Result<u8> {
    let cfg = &g.loaded.config;
    let source = config::source(&args.source, &g.loaded)?;
    let point = source.point()?;
    let options = config::options(args.t_span.as_deref(), args.samples, g.tol, cfg)?;
    let threshold = args.threshold.or(cfg.threshold).unwrap_or(1e-6);
    let report = equivalence_check(&point, &options, threshold)?;
    let out = json!({ "source": source.describe(), "equivalence": report });
    emit(g.out, "equivalence.json", &pretty(&out))?;
    Ok(if report.pass { 0 } else { 5 })
}
