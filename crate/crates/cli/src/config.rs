//! Run configuration: flags layered over an optional `key = value` file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use quadlab::lfun::LambdaPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Enumerate,
    Sweep,
    Sample,
    Charfn,
    Density,
    Compare,
    Moments,
    Tails,
    Minima,
}

/// Keys accepted in a config file; flags use the same names with `--`.
pub const KEYS: &[&str] = &[
    "eps",
    "N",
    "lambda",
    "prime-cutoff",
    "samples",
    "seed",
    "threads",
    "out",
    "include-d1",
    "tau",
    "k",
    "x-min",
    "x-max",
    "x-points",
    "T",
];

pub const THREADS_ENV: &str = "QUADLAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing configuration value; exit 1.
    Config {
        key: String,
        reason: String,
    },
    Lab(quadlab::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use quadlab::Error as E;
        match self {
            CliError::Config { .. } => 1,
            CliError::Io { .. } => 3,
            CliError::Lab(e) => match e {
                E::ResourceLimit(_) | E::Infeasible(_) => 2,
                E::Io(_) | E::Format { .. } => 3,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { key, reason } => write!(f, "config key `{key}`: {reason}"),
            CliError::Lab(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<quadlab::Error> for CliError {
    fn from(e: quadlab::Error) -> Self {
        CliError::Lab(e)
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::config(line, format!("line {} is not `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::config(key, "unknown key"));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub epsilon: f64,
    pub bounds: Vec<u64>,
    pub lambda: LambdaPolicy,
    pub prime_cutoff: u64,
    pub samples: usize,
    pub seed: u64,
    /// `None` leaves the choice to rayon.
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub include_d1: bool,
    pub taus: Vec<f64>,
    pub ks: Vec<u32>,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    /// Inversion cutoff; searched for when absent.
    pub inversion_cutoff: Option<f64>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::config(key, format!("`{v}` is not a number")))
}

/// Integers, also written as `1e5`.
fn parse_u64(key: &str, v: &str) -> Result<u64, CliError> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(CliError::config(
            key,
            format!("`{v}` is not a nonnegative integer"),
        )),
    }
}

fn parse_list<T>(
    key: &str,
    v: &str,
    item: impl Fn(&str, &str) -> Result<T, CliError>,
) -> Result<Vec<T>, CliError> {
    let items = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err(CliError::config(key, "empty list"));
    }
    Ok(items)
}

fn parse_lambda(v: &str) -> Result<LambdaPolicy, CliError> {
    if v == "default" {
        return Ok(LambdaPolicy::Default);
    }
    if let Some(a) = v.strip_prefix("pow:") {
        return Ok(LambdaPolicy::Power(parse_f64("lambda", a)?));
    }
    parse_f64("lambda", v)
        .map(LambdaPolicy::Fixed)
        .map_err(|_| {
            CliError::config(
                "lambda",
                format!("`{v}` is neither `default`, `pow:<a>` nor a half-integer"),
            )
        })
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(key, format!("`{v}` is not a boolean"))),
    }
}

impl RunConfig {
    /// Resolves `values` (file entries already overridden by flags); the
    /// thread budget falls back to `env_threads`.
    pub fn resolve(
        command: Command,
        values: &BTreeMap<String, String>,
        env_threads: Option<&str>,
    ) -> Result<Self, CliError> {
        let get = |k: &str| values.get(k).map(String::as_str);
        let epsilon = get("eps").map_or(Ok(0.25), |v| parse_f64("eps", v))?;
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(CliError::config(
                "eps",
                format!("must lie in (0, 1/2), got {epsilon}"),
            ));
        }
        let bounds = get("N").map_or(Ok(vec![10_000]), |v| parse_list("N", v, parse_u64))?;
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("N", "list must be strictly increasing"));
        }
        let threads = match get("threads")
            .map(|v| ("threads", v))
            .or(env_threads.map(|v| (THREADS_ENV, v)))
        {
            Some((key, v)) => match parse_u64(key, v)? {
                0 => return Err(CliError::config(key, "must be at least 1")),
                n => Some(n as usize),
            },
            None => None,
        };
        let samples = get("samples").map_or(Ok(100_000), |v| parse_u64("samples", v))? as usize;
        if samples == 0 {
            return Err(CliError::config("samples", "must be at least 1"));
        }
        let ks = get("k").map_or(Ok(vec![1, 2, 3, 4]), |v| parse_list("k", v, parse_u64))?;
        let x_points = get("x-points").map_or(Ok(1201), |v| parse_u64("x-points", v))? as usize;
        if x_points < 2 {
            return Err(CliError::config("x-points", "need at least 2 points"));
        }
        let config = Self {
            command,
            epsilon,
            bounds,
            lambda: get("lambda").map_or(Ok(LambdaPolicy::Default), parse_lambda)?,
            prime_cutoff: get("prime-cutoff")
                .map_or(Ok(100_000), |v| parse_u64("prime-cutoff", v))?,
            samples,
            seed: get("seed").map_or(Ok(42), |v| parse_u64("seed", v))?,
            threads,
            out: PathBuf::from(get("out").unwrap_or("quadlab-out")),
            include_d1: get("include-d1").map_or(Ok(true), |v| parse_bool("include-d1", v))?,
            taus: get("tau").map_or(
                Ok(vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0]),
                |v| parse_list("tau", v, parse_f64),
            )?,
            ks: ks.into_iter().map(|k| k as u32).collect(),
            x_min: get("x-min").map_or(Ok(-12.0), |v| parse_f64("x-min", v))?,
            x_max: get("x-max").map_or(Ok(12.0), |v| parse_f64("x-max", v))?,
            x_points,
            inversion_cutoff: get("T").map(|v| parse_f64("T", v)).transpose()?,
        };
        if config.x_min >= config.x_max {
            return Err(CliError::config("x-max", "must exceed x-min"));
        }
        if config.prime_cutoff < 2 {
            return Err(CliError::config("prime-cutoff", "must be at least 2"));
        }
        Ok(config)
    }

    pub fn grid(&self) -> Vec<f64> {
        let step = (self.x_max - self.x_min) / (self.x_points - 1) as f64;
        (0..self.x_points)
            .map(|i| self.x_min + step * i as f64)
            .collect()
    }
}
