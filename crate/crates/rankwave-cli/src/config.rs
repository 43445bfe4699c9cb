//! Run configuration: command-line flags merged over an optional TOML
//! file merged over registry defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use rankwave::catalog::{Branch, FamilyId, ParamValue, Params};
use rankwave::verifier::{FdOrder, GridSpec, DEFAULT_FD_STEP};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    #[default]
    Exact,
    Fd,
}

/// Flags shared by the family commands.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Family id, e.g. R2_E1E2 (case-insensitive).
    #[arg(long)]
    pub family: Option<String>,
    /// Parameter override `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Grid `t=a:b:n,x1=a:b:n,x2=a:b:n,x3=a:b:n`; defaults to the family window.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Finite-difference step, scaled by each axis range.
    #[arg(long)]
    pub h: Option<f64>,
    /// Finite-difference stencil order (2 or 4).
    #[arg(long)]
    pub order: Option<u8>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Solution sheet for multi-valued families (plus, minus, auto).
    #[arg(long)]
    pub branch: Option<String>,
    /// Pass threshold on the normalised maximum residual.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Number of seeded points for the condition checks.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Spatial point `x1,x2,x3` of the catastrophe ray.
    #[arg(long)]
    pub ray: Option<String>,
    /// Explicit wave `potential:e1,e2,e3` or `rotational:l1,l2,l3` for the
    /// pair checks; give it twice instead of --family.
    #[arg(long = "wave")]
    pub waves: Vec<String>,
    /// TOML file with any of the above keys (`set` as a table).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub family: Option<String>,
    #[serde(default)]
    pub set: BTreeMap<String, toml::Value>,
    pub grid: Option<String>,
    pub method: Option<MethodChoice>,
    pub h: Option<f64>,
    pub order: Option<u8>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub branch: Option<String>,
    pub threshold: Option<f64>,
    pub samples: Option<usize>,
    pub ray: Option<String>,
    #[serde(default)]
    pub waves: Vec<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family: Option<FamilyId>,
    pub overrides: Params,
    pub grid: Option<GridSpec>,
    pub method: MethodChoice,
    pub h: f64,
    pub order: FdOrder,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
    pub threshold: Option<f64>,
    pub samples: usize,
    pub ray: Option<[f64; 3]>,
    pub waves: Vec<String>,
}

pub const DEFAULT_SAMPLES: usize = 100;

fn toml_to_param(key: &str, v: &toml::Value) -> Result<ParamValue, CliError> {
    let bad = || CliError::Usage(format!("config value for '{key}' must be a number, a string or three numbers"));
    match v {
        toml::Value::Integer(i) => Ok(ParamValue::Real(*i as f64)),
        toml::Value::Float(f) => Ok(ParamValue::Real(*f)),
        toml::Value::String(s) => Ok(s.parse().expect("infallible")),
        toml::Value::Array(items) if items.len() == 3 => {
            let mut out = [0.0; 3];
            for (slot, item) in out.iter_mut().zip(items) {
                *slot = match item {
                    toml::Value::Integer(i) => *i as f64,
                    toml::Value::Float(f) => *f,
                    _ => return Err(bad()),
                };
            }
            Ok(ParamValue::Vector(out))
        }
        _ => Err(bad()),
    }
}

pub fn parse_ray(s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("ray '{s}' must be x1,x2,x3")))?;
    match parts[..] {
        [a, b, c] if parts.iter().all(|v| v.is_finite()) => Ok([a, b, c]),
        _ => Err(CliError::Usage(format!("ray '{s}' must be three finite numbers"))),
    }
}

impl RunConfig {
    /// Flag values win over the config file, which wins over defaults.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let family = args
            .family
            .clone()
            .or(file.family)
            .map(|f| f.parse::<FamilyId>())
            .transpose()?;
        let mut overrides = Params::new();
        for (k, v) in &file.set {
            overrides.insert(k.clone(), toml_to_param(k, v)?);
        }
        for pair in &args.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{pair}'")))?;
            overrides.insert(k.trim().to_string(), v.parse().expect("infallible"));
        }
        if let Some(b) = args.branch.clone().or(file.branch) {
            b.parse::<Branch>()?;
            overrides.insert("branch".into(), ParamValue::Text(b));
        }
        let grid = args.grid.clone().or(file.grid).map(|g| g.parse::<GridSpec>()).transpose()?;
        let h = args.h.or(file.h).unwrap_or(DEFAULT_FD_STEP);
        if !(h.is_finite() && h > 0.0) {
            return Err(CliError::Usage(format!("--h must be positive, got {h}")));
        }
        let order = match args.order.or(file.order).unwrap_or(2) {
            2 => FdOrder::Second,
            4 => FdOrder::Fourth,
            other => return Err(CliError::Usage(format!("--order must be 2 or 4, got {other}"))),
        };
        let threshold = args.threshold.or(file.threshold);
        if let Some(t) = threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Usage(format!("--threshold must be positive, got {t}")));
            }
        }
        let samples = args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        let ray = args.ray.clone().or(file.ray).map(|r| parse_ray(&r)).transpose()?;
        let waves = if args.waves.is_empty() { file.waves } else { args.waves.clone() };
        Ok(Self {
            family,
            overrides,
            grid,
            method: args.method.or(file.method).unwrap_or_default(),
            h,
            order,
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format),
            seed: args.seed.or(file.seed).unwrap_or(0),
            threshold,
            samples,
            ray,
            waves,
        })
    }

    pub fn family_id(&self) -> Result<FamilyId, CliError> {
        self.family
            .ok_or_else(|| CliError::Usage("--family is required (see `rankwave list`)".into()))
    }
}
