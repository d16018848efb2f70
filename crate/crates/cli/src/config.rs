//! Settings from a JSON config file, overridden flag by flag from the command line.

use std::fmt;
use std::path::{Path, PathBuf};

use bracketflow::catalog::{semisimple_family, Family, ReducedFamilyPoint};
use bracketflow::flow::{FlowOptions, NormalizationStrategy};
use bracketflow::{BracketTensor, HomogeneousPoint, DEFAULT_VALIDATION_TOL};
use serde::{Deserialize, Serialize};

use crate::args::{RunArgs, SourceArgs, SweepMode};

/// Bad flags, config or seed files.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub family: Option<String>,
    pub params: Option<Vec<f64>>,
    /// Inline structure constants in the seed format.
    pub bracket: Option<BracketTensor>,
    /// Seed file, relative to the config file.
    pub bracket_file: Option<PathBuf>,
    pub full_tensor: Option<bool>,
    pub strategy: Option<String>,
    pub t_span: Option<[f64; 2]>,
    pub samples: Option<usize>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_steps: Option<usize>,
    pub blowup_threshold: Option<f64>,
    pub axes: Option<Vec<Axis>>,
    pub mode: Option<SweepMode>,
    pub audit_tol: Option<f64>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i == self.count - 1 { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

/// `name=lo:hi:count`.
pub fn parse_axis(s: &str) -> anyhow::Result<Axis> {
    let err = || bad(format!("axis `{s}` is not of the form name=lo:hi:count"));
    let (name, rest) = s.split_once('=').ok_or_else(err)?;
    let parts: Vec<&str> = rest.split(':').collect();
    let [lo, hi, count] = parts[..] else { return Err(err()) };
    let axis = Axis {
        name: name.trim().to_string(),
        lo: lo.trim().parse().map_err(|_| err())?,
        hi: hi.trim().parse().map_err(|_| err())?,
        count: count.trim().parse().map_err(|_| err())?,
    };
    if axis.count == 0 || !axis.lo.is_finite() || !axis.hi.is_finite() {
        return Err(err());
    }
    Ok(axis)
}

/// `start:end`.
pub fn parse_span(s: &str) -> anyhow::Result<[f64; 2]> {
    let err = || bad(format!("time span `{s}` is not of the form start:end"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    Ok([a.trim().parse().map_err(|_| err())?, b.trim().parse().map_err(|_| err())?])
}

pub struct Loaded {
    pub config: Config,
    /// Directory relative paths in the config are resolved against.
    pub base: PathBuf,
}

pub fn load(path: Option<&Path>) -> anyhow::Result<Loaded> {
    let Some(path) = path else {
        return Ok(Loaded { config: Config::default(), base: PathBuf::from(".") });
    };
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
    let config: Config = serde_json::from_str(&text).map_err(|e| bad(format!("config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    Ok(Loaded { config, base })
}

/// What a command starts from.
#[derive(Clone, Debug)]
pub enum Source {
    Family { point: ReducedFamilyPoint, full_tensor: bool },
    Bracket(HomogeneousPoint),
}

impl Source {
    /// The structure-constant point, validated.
    pub fn point(&self) -> anyhow::Result<HomogeneousPoint> {
        let p = match self {
            Source::Family { point, .. } => point.point()?,
            Source::Bracket(p) => p.clone(),
        };
        p.require_valid()?;
        Ok(p)
    }

    pub fn describe(&self) -> serde_json::Value {
        match self {
            Source::Family { point, full_tensor } => serde_json::json!({
                "family": point.family,
                "params": point.params,
                "full_tensor": full_tensor,
            }),
            Source::Bracket(p) => serde_json::json!({ "bracket": p.bracket }),
        }
    }
}

pub fn family_point(name: &str, params: &[f64]) -> anyhow::Result<ReducedFamilyPoint> {
    let need = |k: usize| -> anyhow::Result<()> {
        if params.len() == k {
            Ok(())
        } else {
            Err(bad(format!("family {name} takes {k} parameters, got {}", params.len())))
        }
    };
    if params.iter().any(|x| !x.is_finite()) {
        return Err(bad("parameters must be finite"));
    }
    let point = match name {
        "unimodular3" => {
            need(3)?;
            ReducedFamilyPoint { family: Family::Unimodular3, params: params.to_vec() }
        }
        "berger3" => {
            // (a, b) is shorthand for (a, b, 0)
            let mut p = params.to_vec();
            if p.len() == 2 {
                p.push(0.0);
            }
            if p.len() != 3 {
                return Err(bad(format!("family berger3 takes 2 or 3 parameters, got {}", params.len())));
            }
            ReducedFamilyPoint { family: Family::Berger3, params: p }
        }
        "semisimple" => {
            need(4)?;
            let dim = |x: f64| -> anyhow::Result<usize> {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(bad(format!("semisimple dimensions must be positive integers, got {x}")))
                }
            };
            semisimple_family(params[0], params[1], dim(params[2])?, dim(params[3])?)?
        }
        "semisimple-su2" => {
            need(2)?;
            semisimple_family(params[0], params[1], 1, 2)?
        }
        other => return Err(bad(format!("unknown family `{other}`"))),
    };
    Ok(point)
}

pub fn source(args: &SourceArgs, loaded: &Loaded) -> anyhow::Result<Source> {
    let cfg = &loaded.config;
    if let Some(path) = &args.bracket {
        return bracket_source(&BracketTensor::load_json(path).map_err(|e| bad(format!("{}: {e}", path.display())))?);
    }
    if args.family.is_none() {
        if let Some(b) = &cfg.bracket {
            return bracket_source(b);
        }
        if let Some(path) = &cfg.bracket_file {
            let path = loaded.base.join(path);
            return bracket_source(&BracketTensor::load_json(&path).map_err(|e| bad(format!("{}: {e}", path.display())))?);
        }
    }
    let name = args.family.clone().or_else(|| cfg.family.clone()).ok_or_else(|| bad("no --family or --bracket given"))?;
    let params = args.params.clone().or_else(|| cfg.params.clone()).ok_or_else(|| bad("no --params given"))?;
    let full_tensor = args.full_tensor || cfg.full_tensor.unwrap_or(false);
    let point = family_point(&name, &params)?;
    if full_tensor && !point.family.has_realization() {
        return Err(bad(format!("family {name} with these dimensions has no explicit tensor")));
    }
    Ok(Source::Family { point, full_tensor })
}

fn bracket_source(b: &BracketTensor) -> anyhow::Result<Source> {
    let p = bracketflow::bracket::validate_point(b, DEFAULT_VALIDATION_TOL);
    p.require_valid()?;
    Ok(Source::Bracket(p))
}

pub fn strategy(run: &RunArgs, cfg: &Config) -> anyhow::Result<NormalizationStrategy> {
    let name = run.strategy.clone().or_else(|| cfg.strategy.clone()).unwrap_or_else(|| "unnormalized".into());
    NormalizationStrategy::from_name(&name).ok_or_else(|| bad(format!("unknown strategy `{name}`")))
}

pub fn options(span: Option<&str>, samples: Option<usize>, tol: Option<f64>, cfg: &Config) -> anyhow::Result<FlowOptions> {
    let [t0, t1] = match span {
        Some(s) => parse_span(s)?,
        None => cfg.t_span.unwrap_or([0.0, 1.0]),
    };
    let rtol = tol.or(cfg.rtol).unwrap_or(1e-9);
    let atol = if tol.is_some() { rtol * 1e-3 } else { cfg.atol.unwrap_or(rtol * 1e-3) };
    let mut o = FlowOptions { t_start: t0, t_end: t1, ..FlowOptions::default() }.with_tol(rtol, atol);
    o.samples = samples.or(cfg.samples).unwrap_or(o.samples);
    if o.samples < 2 {
        return Err(bad("need at least two samples"));
    }
    if let Some(m) = cfg.max_steps {
        o.max_steps = m;
    }
    if let Some(b) = cfg.blowup_threshold {
        o.events.blowup_threshold = b;
    }
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(bad("tolerances must be positive"));
    }
    if t0 == t1 || !t0.is_finite() || !t1.is_finite() {
        return Err(bad("time span must be finite and nondegenerate"));
    }
    Ok(o)
}
