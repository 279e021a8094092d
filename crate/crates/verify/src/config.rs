//! Experiment settings: defaults, a flat `key = value` file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use heisenberg_core::constants::{ConstantRequest, OperatorKind};
use heisenberg_core::mixed::{ExtremizerSide, MixedNormParams, NormConfig};
use heisenberg_core::numerics::{MCSpec, QuadratureSpec};
use heisenberg_core::HeisenbergSpace;
use serde::Serialize;

use crate::{Result, VerifyError};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HEISENBERG_VERIFY_OUT";

pub const DEFAULT_EPS_GRID: [f64; 6] = [0.5, 0.2, 0.1, 0.05, 0.02, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(VerifyError::Config(format!(
                "unknown format '{s}' (expected csv or json)"
            ))),
        }
    }
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    /// One sweep per operator, reported in this order.
    pub operators: Vec<OperatorKind>,
    pub m: usize,
    pub p: f64,
    /// Angular exponent of the inputs; defaults to `p`.
    pub p_bar_in: Option<f64>,
    /// Angular exponent of the image; defaults to `p`.
    pub p_bar_out: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub eps_grid: Vec<f64>,
    pub side: ExtremizerSide,
    pub seed: u64,
    /// Monte Carlo samples. The 3-sigma suite checks need about 1e5: below
    /// that the sampled standard error of the peaked kernels is unreliable.
    pub samples: usize,
    /// Relative quadrature tolerance.
    pub tol: f64,
    pub jobs: usize,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Property suites to run; empty means all.
    pub suites: Vec<String>,
    /// Multiplies the sphere mass; anything but 1 is a deliberate fault.
    pub omega_fault: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1,
            operators: vec![OperatorKind::Hilbert],
            m: 1,
            p: 2.0,
            p_bar_in: None,
            p_bar_out: None,
            p_list: None,
            eps_grid: DEFAULT_EPS_GRID.to_vec(),
            side: ExtremizerSide::Inner,
            seed: 1,
            samples: 100_000,
            tol: 1e-10,
            jobs: 1,
            format: OutputFormat::Csv,
            out: None,
            suites: Vec::new(),
            omega_fault: 1.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| VerifyError::Config(format!("cannot parse {key} = '{value}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Defaults, then `file`, then `overrides` in order; validated.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| VerifyError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                VerifyError::Config(format!("line {}: expected key = value", i + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| VerifyError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "n" => self.n = parse(key, value)?,
            "operator" => {
                self.operators = value
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|e: heisenberg_core::Error| VerifyError::Config(e.to_string()))
                    })
                    .collect::<Result<_>>()?
            }
            "m" => self.m = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "pbar_in" => self.p_bar_in = Some(parse(key, value)?),
            "pbar_out" => self.p_bar_out = Some(parse(key, value)?),
            "p_list" => self.p_list = Some(parse_list(key, value)?),
            "eps_grid" => self.eps_grid = parse_list(key, value)?,
            "side" => {
                self.side = value
                    .trim()
                    .parse()
                    .map_err(|e: heisenberg_core::Error| VerifyError::Config(e.to_string()))?
            }
            "seed" => self.seed = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "jobs" => self.jobs = parse(key, value)?,
            "format" => self.format = value.trim().parse()?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "suite" => self.suites = parse_list(key, value)?,
            "omega_fault" => self.omega_fault = parse(key, value)?,
            _ => return Err(VerifyError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(VerifyError::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.operators.is_empty() {
            return bad("no operator selected".into());
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        for p_bar in [self.p_bar_in(), self.p_bar_out()] {
            MixedNormParams::new(self.p, p_bar).map_err(|e| VerifyError::Config(e.to_string()))?;
        }
        if self.eps_grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return bad("epsilon grid must hold finite positive values".into());
        }
        if self.eps_grid.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilon grid must be strictly decreasing".into());
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if !(self.omega_fault > 0.0) || !self.omega_fault.is_finite() {
            return bad(format!(
                "omega_fault must be positive, got {}",
                self.omega_fault
            ));
        }
        for op in &self.operators {
            self.constant_request(*op)?
                .validate()
                .map_err(|e| VerifyError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn p_bar_in(&self) -> f64 {
        self.p_bar_in.unwrap_or(self.p)
    }

    pub fn p_bar_out(&self) -> f64 {
        self.p_bar_out.unwrap_or(self.p)
    }

    pub fn space(&self) -> Result<HeisenbergSpace> {
        let space = HeisenbergSpace::new(self.n)?;
        Ok(if self.omega_fault == 1.0 {
            space
        } else {
            space.with_sphere_mass_factor(self.omega_fault)
        })
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.tol,
            ..QuadratureSpec::default()
        }
    }

    pub fn mc(&self) -> MCSpec {
        MCSpec {
            sample_count: self.samples,
            seed: self.seed,
            chunk_count: self.samples.min(16),
        }
    }

    pub fn norm_config(&self) -> NormConfig {
        NormConfig {
            quad: self.quad(),
            mc: self.mc(),
            ..NormConfig::default()
        }
    }

    pub fn constant_request(&self, op: OperatorKind) -> Result<ConstantRequest> {
        let space = self.space()?;
        let req = match op {
            OperatorKind::Mlinear => {
                ConstantRequest::multilinear(space, self.p, self.m, self.p_list.clone())
            }
            _ => ConstantRequest::linear(space, op, self.p),
        };
        Ok(req.with_p_bars(self.p_bar_in(), self.p_bar_out()))
    }

    /// Label used in reports, e.g. `hilbert` or `mlinear-2`.
    pub fn experiment_name(&self, op: OperatorKind) -> String {
        match op {
            OperatorKind::Mlinear => format!("mlinear-{}", self.m),
            _ => op.as_str().to_string(),
        }
    }

    /// `--out`, else the directory named by [`OUT_DIR_ENV`], else none.
    pub fn output_dir(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
    }
}
