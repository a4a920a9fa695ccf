//! Sweep configuration: JSON file, command-line overrides and defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Heatmap,
    ErrorCurve,
    PhasePortrait,
    Otoc,
    Instabilities,
}

/// Optional settings shared by the config file and the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    /// Interaction order
    #[arg(long)]
    pub p: Option<u32>,
    /// Number of spins
    #[arg(long)]
    pub n: Option<usize>,
    /// Interpolation parameter for single-s modes
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub s_min: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub s_steps: Option<usize>,
    /// Trotter step for phase portraits
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau_min: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_steps: Option<usize>,
    /// Polar angle of the initial coherent state
    #[arg(long)]
    pub theta: Option<f64>,
    /// Azimuth of the initial coherent state
    #[arg(long)]
    pub phi: Option<f64>,
    /// Map steps (Lyapunov runs, portraits) or OTOC steps
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "TROTTERLAB_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Companion JSON path for OTOC runs
    #[arg(long)]
    pub aux_out: Option<PathBuf>,
    /// Level offset of the instability probed by OTOC runs
    #[arg(long)]
    pub q: Option<u32>,
    /// Resonance order of the instability probed by OTOC runs
    #[arg(long)]
    pub r: Option<u32>,
    /// Initial points per Lyapunov average or phase portrait
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Detunings from the resonance for OTOC runs
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta_tau: Option<Vec<f64>>,
    #[arg(long)]
    pub r2_threshold: Option<f64>,
    /// Explicit portrait initial points as (theta, phi) pairs
    #[arg(skip)]
    pub inits: Option<Vec<[f64; 2]>>,
}

impl Overrides {
    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: Overrides) -> Overrides {
        macro_rules! pick {
            ($($f:ident),*) => { Overrides { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            p, n, s, s_min, s_max, s_steps, tau, tau_min, tau_max, tau_steps, theta, phi, steps, stride, seed, workers, out,
            aux_out, q, r, n_points, delta_tau, r2_threshold, inits
        )
    }
}

/// JSON config document: an object whose keys are the flag names, plus an
/// optional `mode`.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub settings: Overrides,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let object = value.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
        let mode = match object.remove("mode") {
            Some(m) => Some(serde_json::from_value(m).map_err(|e| CliError::Config(format!("mode: {e}")))?),
            None => None,
        };
        let settings = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { mode, settings })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Parser)]
#[command(name = "trotterlab", version, about = "Parameter sweeps for Trotter errors in p-spin models")]
pub struct Cli {
    pub mode: Mode,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Evenly spaced values `min ..= max`; a single step yields `[min]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 }).collect()
    }

    fn validate(&self, name: &str) -> Result<(), CliError> {
        if self.steps == 0 {
            return Err(CliError::Config(format!("{name}-steps must be at least 1")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(CliError::Config(format!("{name} range must be finite")));
        }
        if self.steps > 1 && !(self.min < self.max) {
            return Err(CliError::Config(format!("{name}-min must be below {name}-max")));
        }
        if self.steps == 1 && self.max < self.min {
            return Err(CliError::Config(format!("{name}-max must not be below {name}-min")));
        }
        Ok(())
    }
}

/// Fully resolved sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub mode: Mode,
    pub p: u32,
    pub n: usize,
    pub s: f64,
    pub s_grid: Grid,
    pub tau: f64,
    pub tau_grid: Grid,
    pub theta: f64,
    pub phi: f64,
    pub steps: usize,
    pub stride: usize,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub aux_out: Option<PathBuf>,
    pub q: u32,
    pub r: u32,
    pub n_points: usize,
    pub delta_tau: Option<Vec<f64>>,
    pub r2_threshold: f64,
    pub inits: Option<Vec<[f64; 2]>>,
}

impl SweepConfig {
    /// Applies defaults and validates.
    pub fn resolve(mode: Mode, o: Overrides) -> Result<Self, CliError> {
        let p = o.p.unwrap_or(2);
        let default_steps = match mode {
            Mode::Heatmap => 100_000,
            Mode::PhasePortrait => 1_000,
            Mode::Otoc => 200,
            Mode::ErrorCurve | Mode::Instabilities => 0,
        };
        let default_points = if mode == Mode::PhasePortrait { 20 } else { 50 };
        let workers = match o.workers {
            Some(w) => w,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let config = SweepConfig {
            mode,
            p,
            n: o.n.unwrap_or(128),
            s: o.s.unwrap_or(0.1),
            s_grid: Grid { min: o.s_min.unwrap_or(0.02), max: o.s_max.unwrap_or(0.5), steps: o.s_steps.unwrap_or(48) },
            tau: o.tau.unwrap_or(1.0),
            tau_grid: Grid { min: o.tau_min.unwrap_or(0.5), max: o.tau_max.unwrap_or(8.0), steps: o.tau_steps.unwrap_or(48) },
            theta: o.theta.unwrap_or(std::f64::consts::FRAC_PI_2),
            phi: o.phi.unwrap_or(0.0),
            steps: o.steps.unwrap_or(default_steps),
            stride: o.stride.unwrap_or(1),
            seed: o.seed.unwrap_or(0),
            workers,
            out: o.out,
            aux_out: o.aux_out,
            q: o.q.unwrap_or(p),
            r: o.r.unwrap_or(1),
            n_points: o.n_points.unwrap_or(default_points),
            delta_tau: o.delta_tau,
            r2_threshold: o.r2_threshold.unwrap_or(0.995),
            inits: o.inits,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.p < 2 {
            return bad(format!("p must be at least 2, got {}", self.p));
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.s) {
            return bad(format!("s must lie in [0, 1], got {}", self.s));
        }
        if !(self.theta.is_finite() && self.phi.is_finite()) || !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return bad("theta must lie in [0, pi] and phi must be finite".into());
        }
        match self.mode {
            Mode::Heatmap => {
                self.s_grid.validate("s")?;
                self.tau_grid.validate("tau")?;
                if self.s_grid.min < 0.0 || self.s_grid.max > 1.0 {
                    return bad("the s grid must lie in [0, 1]".into());
                }
                if self.tau_grid.min <= 0.0 {
                    return bad("the tau grid must be positive".into());
                }
                if self.steps < 1_000 {
                    return bad(format!("Lyapunov runs need at least 1000 steps, got {}", self.steps));
                }
                if self.n_points == 0 {
                    return bad("n-points must be at least 1".into());
                }
            }
            Mode::ErrorCurve => {
                self.tau_grid.validate("tau")?;
                if self.tau_grid.min <= 0.0 {
                    return bad("the tau grid must be positive".into());
                }
            }
            Mode::PhasePortrait => {
                if !(self.tau > 0.0 && self.tau.is_finite()) {
                    return bad(format!("tau must be positive, got {}", self.tau));
                }
                if self.inits.is_none() && self.n_points == 0 {
                    return bad("n-points must be at least 1".into());
                }
            }
            Mode::Otoc => {
                if self.s >= 1.0 {
                    return bad("OTOC runs need s < 1".into());
                }
                if self.steps < 2 {
                    return bad("OTOC runs need at least 2 steps".into());
                }
                if !(self.r2_threshold > 0.0 && self.r2_threshold <= 1.0) {
                    return bad("r2-threshold must lie in (0, 1]".into());
                }
                if let Some(values) = &self.delta_tau {
                    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                        return bad("delta-tau must be a non-empty list of finite values".into());
                    }
                }
            }
            Mode::Instabilities => {
                if !(self.tau_grid.max > 0.0 && self.tau_grid.max.is_finite()) {
                    return bad("tau-max must be positive".into());
                }
            }
        }
        Ok(())
    }
}

/// Merges file and flag settings (flags win) and resolves defaults.
pub fn load(cli: Cli) -> Result<SweepConfig, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(mode) = file.mode {
        if mode != cli.mode {
            return Err(CliError::Config(format!("config file is for mode {mode:?}, command line asks for {:?}", cli.mode)));
        }
    }
    SweepConfig::resolve(cli.mode, file.settings.merge(cli.overrides))
}
