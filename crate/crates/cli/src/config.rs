//! Solver parameters from defaults, `key = value` files and flags.
//!
//! Later sources win: built-in profile, then config file, then flags.

use std::fmt::Write as _;
use std::path::Path;

use sarseg_core::model::DataTerm;
use sarseg_core::solvers::{Algorithm, SolverConfig};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Built-in starting point for the parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    /// Values for 0–255 gray-level SAR images.
    #[default]
    Standard,
    /// Weights suited to two-phase 8-bit speckled phantoms.
    Phantom,
}

impl Profile {
    pub fn config(self, algorithm: Algorithm) -> SolverConfig {
        match self {
            Profile::Standard => SolverConfig::standard(algorithm),
            Profile::Phantom => SolverConfig::phantom_profile(algorithm),
        }
    }
}

/// Keys accepted in config files; flags use the same names with `-`.
pub const KEYS: [&str; 16] = [
    "mu",
    "beta",
    "eps",
    "sigma",
    "kernel_sigma",
    "data_term",
    "lambda",
    "alpha",
    "t",
    "gamma",
    "xi",
    "dt1",
    "dt2",
    "max_iter",
    "tol",
    "means_update_every",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key `{k}`", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Config(format!("invalid value `{value}` for {key}")))
}

/// Sets one parameter by key.
pub fn apply(cfg: &mut SolverConfig, key: &str, value: &str) -> CliResult<()> {
    match key {
        "mu" => cfg.model.mu = num(key, value)?,
        "beta" => cfg.model.beta = num(key, value)?,
        "eps" => cfg.model.eps = num(key, value)?,
        "sigma" => cfg.model.sigma = num(key, value)?,
        "kernel_sigma" => cfg.model.kernel_sigma = num(key, value)?,
        "data_term" => {
            cfg.model.data_term = DataTerm::from_name(value)
                .ok_or_else(|| CliError::Config(format!("unknown data term `{value}`")))?
        }
        "lambda" => cfg.lambda = num(key, value)?,
        "alpha" => cfg.alpha = num(key, value)?,
        "t" => cfg.t = num(key, value)?,
        "gamma" => cfg.gamma = num(key, value)?,
        "xi" => cfg.xi = num(key, value)?,
        "dt1" => cfg.dt1 = num(key, value)?,
        "dt2" => cfg.dt2 = num(key, value)?,
        "max_iter" => cfg.max_iter = num(key, value)?,
        "tol" => cfg.tol = num(key, value)?,
        "means_update_every" => cfg.means_update_every = num(key, value)?,
        _ => return Err(CliError::Config(format!("unknown parameter `{key}`"))),
    }
    Ok(())
}

/// Profile defaults, then `file`, then `flags`; the result is validated.
pub fn resolve(
    algorithm: Algorithm,
    profile: Profile,
    file: &[(String, String)],
    flags: &[(String, String)],
) -> CliResult<SolverConfig> {
    let mut cfg = profile.config(algorithm);
    for (k, v) in file.iter().chain(flags) {
        apply(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical `key=value` listing of every effective parameter.
pub fn canonical(cfg: &SolverConfig) -> String {
    let mut s = String::new();
    let m = &cfg.model;
    let _ = writeln!(s, "algorithm={}", cfg.algorithm.name());
    for (k, v) in [
        ("mu", m.mu),
        ("beta", m.beta),
        ("eps", m.eps),
        ("sigma", m.sigma),
        ("kernel_sigma", m.kernel_sigma),
        ("lambda", cfg.lambda),
        ("alpha", cfg.alpha),
        ("t", cfg.t),
        ("gamma", cfg.gamma),
        ("xi", cfg.xi),
        ("dt1", cfg.dt1),
        ("dt2", cfg.dt2),
        ("tol", cfg.tol),
    ] {
        let _ = writeln!(s, "{k}={v:?}");
    }
    let _ = writeln!(s, "data_term={}", m.data_term.name());
    let _ = writeln!(s, "max_iter={}", cfg.max_iter);
    let _ = writeln!(s, "means_update_every={}", cfg.means_update_every);
    s
}

/// First 16 hex digits of the SHA-256 of [`canonical`].
pub fn params_digest(cfg: &SolverConfig) -> String {
    let hash = Sha256::digest(canonical(cfg).as_bytes());
    hex::encode(&hash[..8])
}
