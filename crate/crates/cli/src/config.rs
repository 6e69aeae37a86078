//! Flat key=value configuration files; command-line flags override file
//! entries.

use anyhow::{bail, Context};
use mintwist::verify::RunConfig;
use std::path::Path;

pub fn load_config_file(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got `{line}`", lineno + 1);
        };
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = || -> anyhow::Result<f64> {
            value
                .parse::<f64>()
                .with_context(|| format!("config line {}: bad number `{value}`", lineno + 1))
        };
        match key {
            "points" => cfg.points = value.parse().context("points")?,
            "length" => cfg.length = parse_f64()?,
            "deriv" => cfg.deriv = value.to_string(),
            "seed" => cfg.seed = value.parse().context("seed")?,
            "tol_alg" => cfg.tol_alg = parse_f64()?,
            "tol_deriv" => cfg.tol_deriv = parse_f64()?,
            "m3" => cfg.include_m3 = value.parse().context("m3")?,
            "suites" => {
                cfg.suites = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            other => bail!("config line {}: unknown key `{other}`", lineno + 1),
        }
    }
    Ok(cfg)
}

/// Flag-level overrides applied on top of a file (or the defaults).
#[derive(Debug, Clone, clap::Args)]
pub struct ConfigFlags {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Grid points per axis for dimension-4 runs.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Torus period.
    #[arg(long, global = true)]
    pub length: Option<f64>,
    /// Derivative mode: spectral | fd2.
    #[arg(long, global = true)]
    pub deriv: Option<String>,
    /// Random seed (fixed seed gives byte-identical reports).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Algebraic tolerance.
    #[arg(long, global = true)]
    pub tol_alg: Option<f64>,
    /// One-derivative tolerance.
    #[arg(long, global = true)]
    pub tol_deriv: Option<f64>,
    /// Also run the dimension-6 algebraic checks.
    #[arg(long, global = true)]
    pub m3: bool,
    /// Comma-separated suite selection for `verify`.
    #[arg(long, global = true)]
    pub suites: Option<String>,
    /// Report output path (or set MINTWIST_REPORT).
    #[arg(long, global = true)]
    pub report: Option<std::path::PathBuf>,
    /// Directory for CSV outputs.
    #[arg(long, global = true)]
    pub csv_dir: Option<std::path::PathBuf>,
}

impl ConfigFlags {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.points {
            cfg.points = p;
        }
        if let Some(l) = self.length {
            cfg.length = l;
        }
        if let Some(d) = &self.deriv {
            cfg.deriv = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tol_alg {
            cfg.tol_alg = t;
        }
        if let Some(t) = self.tol_deriv {
            cfg.tol_deriv = t;
        }
        if self.m3 {
            cfg.include_m3 = true;
        }
        if let Some(s) = &self.suites {
            cfg.suites = s
                .split(',')
                .map(|x| x.trim().to_string())
                .filter(|x| !x.is_empty())
                .collect();
        }
        Ok(cfg)
    }

    pub fn report_path(&self, default_name: &str) -> std::path::PathBuf {
        if let Some(p) = &self.report {
            return p.clone();
        }
        if let Ok(env) = std::env::var("MINTWIST_REPORT") {
            if !env.is_empty() {
                return env.into();
            }
        }
        default_name.into()
    }
}
