use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

use regloss::mixing::MixingExperiment;
use regloss::patchwork::BasePair;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Mix,
    Norms,
    CertifyThm1,
    CertifyThm2,
    LowerBoundSweep,
    TruncatedSolution,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Mix => "mix",
            Mode::Norms => "norms",
            Mode::CertifyThm1 => "certify-thm1",
            Mode::CertifyThm2 => "certify-thm2",
            Mode::LowerBoundSweep => "lower-bound-sweep",
            Mode::TruncatedSolution => "truncated-solution",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Norm table of the mixer datum along the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub orders: Vec<f64>,
    /// Gagliardo double sums are only evaluated on grids up to this size.
    pub gagliardo_max_points: usize,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self {
            orders: vec![-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0],
            gagliardo_max_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem1Config {
    pub dims: Vec<usize>,
    pub p_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Mixing rate for condition (D); measured from the mixer when absent.
    pub c: Option<f64>,
}

impl Default for Theorem1Config {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            p_values: vec![1.5, 2.0, 4.0, 8.0],
            sigma_values: vec![0.5, 1.0, 2.0, 10.0],
            s_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            t_grid: vec![0.01, 0.1, 1.0],
            c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem2Config {
    pub d: usize,
    pub r: f64,
    pub p: f64,
    pub sigma: f64,
    pub t_final: f64,
    /// Rate constants; measured from the mixer when absent, with `b = c`.
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    /// Number of equispaced `s` values in `(0, σ)` for condition (D).
    pub s_samples: usize,
}

impl Default for Theorem2Config {
    fn default() -> Self {
        Self {
            d: 3,
            r: 2.0,
            p: 2.0,
            sigma: 1.0,
            t_final: 1.0,
            b: None,
            c: None,
            alpha: None,
            s_samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d: usize,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub n_max: u64,
    pub threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d: 2,
            s_grid: vec![0.5],
            t_grid: vec![0.1],
            n_max: 30,
            threshold: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub base: BasePair,
    pub pieces: u64,
    pub times: Vec<f64>,
    pub s: f64,
    pub grid_points: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            base: BasePair::default(),
            pieces: 3,
            times: vec![0.0, 0.05, 0.1],
            s: 0.5,
            grid_points: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub mixer: MixingExperiment,
    /// Further seeds whose fits are reported in `mix` mode.
    pub extra_seeds: Vec<u64>,
    pub norms: NormsConfig,
    pub theorem1: Theorem1Config,
    pub theorem2: Theorem2Config,
    pub sweep: SweepConfig,
    pub solve: SolveConfig,
    pub output: Option<PathBuf>,
}

fn schema(path: &str, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

fn check(ok: bool, path: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(schema(path, message))
    }
}

fn all(values: &[f64], pred: impl Fn(f64) -> bool) -> bool {
    values.iter().all(|v| pred(*v))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Range checks that the type system does not express.
    pub fn validate(&self) -> Result<()> {
        let m = &self.mixer;
        let pr = &m.protocol;
        check(pr.total_time > 0.0, "mixer.protocol.total_time", "must be positive")?;
        check(pr.step_duration > 0.0, "mixer.protocol.step_duration", "must be positive")?;
        check(pr.amplitude.is_finite(), "mixer.protocol.amplitude", "must be finite")?;
        check(pr.dim >= 2, "mixer.protocol.dim", "must be at least 2")?;
        check(pr.wavenumber >= 1, "mixer.protocol.wavenumber", "must be at least 1")?;
        check(
            m.grid_points >= 8 && m.grid_points.is_power_of_two(),
            "mixer.grid_points",
            "must be a power of two >= 8",
        )?;
        check(
            m.datum_radius > 0.0 && m.datum_radius < 0.5,
            "mixer.datum_radius",
            "must lie in (0, 1/2)",
        )?;
        check(m.s_ref > 0.0, "mixer.s_ref", "must be positive")?;
        check(m.b_floor > 0.0, "mixer.b_floor", "must be positive")?;
        check(all(&m.orders, f64::is_finite), "mixer.orders", "must be finite")?;
        check(all(&m.velocity_orders, |r| r > 1.0), "mixer.velocity_orders", "must exceed 1")?;

        check(all(&self.norms.orders, f64::is_finite), "norms.orders", "must be finite")?;

        let t1 = &self.theorem1;
        check(t1.dims.iter().all(|d| *d >= 2), "theorem1.dims", "must be at least 2")?;
        check(all(&t1.p_values, |p| p > 1.0 && p.is_finite()), "theorem1.p_values", "must lie in (1, inf)")?;
        check(all(&t1.sigma_values, |s| s >= 0.0), "theorem1.sigma_values", "must be nonnegative")?;
        check(all(&t1.s_grid, |s| s > 0.0), "theorem1.s_grid", "must be positive")?;
        check(all(&t1.t_grid, |t| t >= 0.0), "theorem1.t_grid", "must be nonnegative")?;
        check(t1.c.map_or(true, |c| c > 0.0), "theorem1.c", "must be positive")?;

        let t2 = &self.theorem2;
        check(t2.d >= 2, "theorem2.d", "must be at least 2")?;
        check(t2.r >= 1.0, "theorem2.r", "must be at least 1")?;
        check(t2.p > 1.0 && t2.p.is_finite(), "theorem2.p", "must lie in (1, inf)")?;
        check(t2.sigma > 0.0, "theorem2.sigma", "must be positive")?;
        check(t2.t_final > 0.0, "theorem2.t_final", "must be positive")?;
        check(t2.b.map_or(true, |b| b > 0.0), "theorem2.b", "must be positive")?;
        check(t2.c.map_or(true, |c| c > 0.0), "theorem2.c", "must be positive")?;
        check(t2.s_samples >= 1, "theorem2.s_samples", "must be at least 1")?;

        let sw = &self.sweep;
        check(sw.d >= 1, "sweep.d", "must be at least 1")?;
        check(all(&sw.s_grid, |s| s > 0.0 && s < 1.0), "sweep.s_grid", "must lie in (0, 1)")?;
        check(all(&sw.t_grid, |t| t >= 0.0), "sweep.t_grid", "must be nonnegative")?;
        check(sw.n_max >= 1, "sweep.n_max", "must be at least 1")?;

        let so = &self.solve;
        check(so.pieces >= 1, "solve.pieces", "must be at least 1")?;
        check(all(&so.times, |t| t >= 0.0), "solve.times", "must be nonnegative")?;
        check(so.s > 0.0 && so.s < 1.0, "solve.s", "must lie in (0, 1)")?;
        check(
            so.grid_points >= 8 && so.grid_points.is_power_of_two(),
            "solve.grid_points",
            "must be a power of two >= 8",
        )?;
        check(
            so.base.grid_points >= 8 && so.base.grid_points.is_power_of_two(),
            "solve.base.grid_points",
            "must be a power of two >= 8",
        )?;
        Ok(())
    }
}
