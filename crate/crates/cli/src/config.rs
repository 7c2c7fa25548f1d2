use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use curvprobe::detector::{DetectorError, QubitState};
use curvprobe::oracle::QuadratureOptions;
use curvprobe::presets::{preset_curvature, PresetError};
use curvprobe::quadrature::Limits;
use curvprobe::tensor::TensorError;
use curvprobe::variance::{LogConvention, VarianceOptions};
use curvprobe::{CurvatureData, GaussianSmearing, PresetSpec};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{CurvatureArgs, LogConventionArg, NumericArgs, SmearingArgs};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("give exactly one curvature source: --preset or --curvature-file")]
    CurvatureSource,
    #[error("--{flag} does not apply to preset `{preset}`")]
    StrayParameter { flag: String, preset: String },
    #[error(transparent)]
    Preset(#[from] PresetError),
    #[error("{path}:{line}: {message}")]
    CurvatureFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    CurvatureTensor { path: PathBuf, source: TensorError },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid initial state: {0}")]
    State(#[from] DetectorError),
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum CurvatureSource {
    Preset { preset: PresetSpec },
    File { path: PathBuf, components: Vec<Component> },
}

#[derive(Debug, Clone, Serialize)]
pub struct Component {
    pub index: String,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct Curvature {
    pub source: CurvatureSource,
    pub data: CurvatureData,
}

impl Curvature {
    pub fn preset(&self) -> Option<&PresetSpec> {
        match &self.source {
            CurvatureSource::Preset { preset } => Some(preset),
            CurvatureSource::File { .. } => None,
        }
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(&self.source).expect("curvature source serializes")
    }
}

pub fn resolve_curvature(args: &CurvatureArgs) -> Result<Curvature, ConfigError> {
    match (&args.preset, &args.curvature_file) {
        (Some(name), None) => {
            let mut params = BTreeMap::new();
            for (key, value) in [
                ("hubble", args.hubble),
                ("mass", args.mass),
                ("radius", args.radius),
                ("k", args.k),
            ] {
                if let Some(v) = value {
                    params.insert(key.to_string(), v);
                }
            }
            let spec = PresetSpec::from_name(name, &params)?;
            let used: &[&str] = match spec {
                PresetSpec::Minkowski => &[],
                PresetSpec::DeSitter { .. } => &["hubble"],
                PresetSpec::Schwarzschild { .. } => &["mass", "radius"],
                PresetSpec::ConstantCurvature { .. } => &["k"],
            };
            if let Some(flag) = params.keys().find(|f| !used.contains(&f.as_str())) {
                return Err(ConfigError::StrayParameter {
                    flag: flag.clone(),
                    preset: name.clone(),
                });
            }
            Ok(Curvature {
                data: preset_curvature(&spec)?,
                source: CurvatureSource::Preset { preset: spec },
            })
        }
        (None, Some(path)) => {
            if args.hubble.is_some() || args.mass.is_some() || args.radius.is_some() || args.k.is_some() {
                return Err(ConfigError::Invalid(
                    "preset parameters cannot be combined with --curvature-file".into(),
                ));
            }
            read_curvature_file(path)
        }
        _ => Err(ConfigError::CurvatureSource),
    }
}

pub fn read_curvature_file(path: &Path) -> Result<Curvature, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let components = parse_curvature(&text).map_err(|(line, message)| ConfigError::CurvatureFile {
        path: path.to_path_buf(),
        line,
        message,
    })?;
    let list: Vec<([usize; 4], f64)> = components.iter().map(|(i, v)| (*i, *v)).collect();
    let data = CurvatureData::from_components(&list).map_err(|source| ConfigError::CurvatureTensor {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Curvature {
        data,
        source: CurvatureSource::File {
            path: path.to_path_buf(),
            components: components
                .into_iter()
                .map(|(i, value)| Component {
                    index: i.iter().map(|d| char::from(b'0' + *d as u8)).collect(),
                    value,
                })
                .collect(),
        },
    })
}

/// `R_abcd = value` lines; `#` starts a comment.
pub fn parse_curvature(text: &str) -> Result<Vec<([usize; 4], f64)>, (usize, String)> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| (n + 1, m);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `R_abcd = value`, got `{line}`")))?;
        let key = key.trim();
        let digits = key
            .strip_prefix("R_")
            .filter(|d| d.len() == 4)
            .ok_or_else(|| err(format!("bad component name `{key}`")))?;
        let mut idx = [0usize; 4];
        for (slot, ch) in idx.iter_mut().zip(digits.chars()) {
            *slot = ch
                .to_digit(10)
                .filter(|d| *d < 4)
                .ok_or_else(|| err(format!("index `{ch}` in `{key}` is not 0-3")))? as usize;
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("`{}` is not a number", value.trim())))?;
        if !value.is_finite() {
            return Err(err(format!("{key} is not finite")));
        }
        out.push((idx, value));
    }
    Ok(out)
}

pub fn smearing(args: &SmearingArgs) -> Result<GaussianSmearing, ConfigError> {
    GaussianSmearing::new(args.t, args.sigma, args.l0).map_err(|e| ConfigError::Invalid(e.to_string()))
}

pub fn smearing_echo(s: &GaussianSmearing) -> Value {
    json!({ "T": s.t_width, "sigma": s.sigma, "l0": s.l0 })
}

pub fn finite(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Invalid(format!("--{name} must be finite")))
    }
}

fn check_tolerance(tolerance: Option<f64>, max_evaluations: Option<usize>) -> Result<(), ConfigError> {
    if let Some(t) = tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(ConfigError::Invalid(format!("--tolerance must be positive, got {t}")));
        }
    }
    if max_evaluations == Some(0) {
        return Err(ConfigError::Invalid("--max-evaluations must be positive".into()));
    }
    Ok(())
}

pub fn quadrature(tolerance: Option<f64>, max_evaluations: Option<usize>, seed: u64) -> Result<QuadratureOptions, ConfigError> {
    check_tolerance(tolerance, max_evaluations)?;
    let mut q = QuadratureOptions {
        seed,
        ..QuadratureOptions::default()
    };
    if let Some(t) = tolerance {
        q.tolerance = t;
    }
    if let Some(n) = max_evaluations {
        q.max_evaluations = n;
    }
    Ok(q)
}

pub fn variance_options(n: &NumericArgs) -> Result<VarianceOptions, ConfigError> {
    check_tolerance(n.tolerance, n.max_evaluations)?;
    let defaults = VarianceOptions::default();
    Ok(VarianceOptions {
        log_convention: match n.log_convention {
            LogConventionArg::Standard => LogConvention::Standard,
            LogConventionArg::Half => LogConvention::HalfInterval,
        },
        limits: Limits::new(
            defaults.limits.abs_tol,
            n.tolerance.unwrap_or(defaults.limits.rel_tol),
            n.max_evaluations.unwrap_or(defaults.limits.max_evaluations),
        ),
    })
}

pub fn numeric_echo(n: &NumericArgs, v: &VarianceOptions) -> Value {
    json!({
        "tolerance": v.limits.rel_tol,
        "max_evaluations": v.limits.max_evaluations,
        "seed": n.seed,
        "log_convention": v.log_convention,
    })
}

pub fn parse_state(s: &str) -> Result<QubitState, ConfigError> {
    match s {
        "ground" => Ok(QubitState::ground()),
        "excited" => Ok(QubitState::excited()),
        other => {
            let r = parse_vector::<3>("rho0", other)?;
            Ok(QubitState::from_bloch(r)?)
        }
    }
}

pub fn parse_vector<const N: usize>(name: &str, s: &str) -> Result<[f64; N], ConfigError> {
    let parts = parse_list(name, s)?;
    parts.try_into().map_err(|p: Vec<f64>| {
        ConfigError::Invalid(format!("--{name} needs {N} comma-separated numbers, got {}", p.len()))
    })
}

pub fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ConfigError::Invalid(format!("--{name}: `{}` is not a finite number", p.trim())))
        })
        .collect()
}
