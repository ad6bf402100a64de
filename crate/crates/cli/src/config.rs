//! `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use qpt_core::{Domain, EvolutionSettings, NewtonSettings, PhysicalParams};

use crate::error::CliError;
use crate::output::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Initial condition for `evolve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    /// Converged `(initial_k, +)` branch state at `beta`.
    Stationary,
    Zero,
    /// `initial_amplitude * e_{initial_k}`.
    Mode,
}

impl fmt::Display for Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Initial::Stationary => "stationary",
            Initial::Zero => "zero",
            Initial::Mode => "mode",
        })
    }
}

pub const KEYS: &[&str] = &[
    "hbar",
    "mass",
    "g",
    "lambda",
    "length",
    "n_interior",
    "k_max",
    "beta_min",
    "beta_max",
    "beta_step",
    "beta",
    "tol_residual",
    "tol_step",
    "max_iter",
    "damping",
    "min_step",
    "dt",
    "n_steps",
    "initial",
    "initial_k",
    "initial_amplitude",
    "format",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hbar: f64,
    pub mass: f64,
    pub g: f64,
    pub lambda: f64,
    pub length: f64,
    pub n_interior: usize,
    pub k_max: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_step: f64,
    pub beta: f64,
    pub tol_residual: f64,
    pub tol_step: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub min_step: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub initial: Initial,
    pub initial_k: usize,
    pub initial_amplitude: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let newton = NewtonSettings::default();
        Self {
            hbar: 1.0,
            mass: 0.25,
            g: 1.0,
            lambda: 0.0,
            length: std::f64::consts::PI,
            n_interior: 1000,
            k_max: 3,
            beta_min: -10.0,
            beta_max: 0.0,
            beta_step: 0.05,
            beta: -1.5,
            tol_residual: newton.tol_residual,
            tol_step: newton.tol_step,
            max_iter: newton.max_iter,
            damping: newton.damping,
            min_step: newton.min_step,
            dt: 1e-3,
            n_steps: 1000,
            initial: Initial::Stationary,
            initial_k: 1,
            initial_amplitude: 1.0,
            format: Format::Csv,
            out: None,
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::invalid(key, format!("cannot parse `{value}`")))
}

fn real(key: &str, value: &str) -> Result<f64, CliError> {
    let x = match value {
        "pi" => std::f64::consts::PI,
        "-pi" => -std::f64::consts::PI,
        _ => number(key, value)?,
    };
    if !x.is_finite() {
        return Err(CliError::invalid(key, format!("`{value}` is not finite")));
    }
    Ok(x)
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "hbar" => self.hbar = real(key, value)?,
            "mass" => self.mass = real(key, value)?,
            "g" => self.g = real(key, value)?,
            "lambda" => self.lambda = real(key, value)?,
            "length" => self.length = real(key, value)?,
            "n_interior" => self.n_interior = number(key, value)?,
            "k_max" => self.k_max = number(key, value)?,
            "beta_min" => self.beta_min = real(key, value)?,
            "beta_max" => self.beta_max = real(key, value)?,
            "beta_step" => self.beta_step = real(key, value)?,
            "beta" => self.beta = real(key, value)?,
            "tol_residual" => self.tol_residual = real(key, value)?,
            "tol_step" => self.tol_step = real(key, value)?,
            "max_iter" => self.max_iter = number(key, value)?,
            "damping" => self.damping = real(key, value)?,
            "min_step" => self.min_step = real(key, value)?,
            "dt" => self.dt = real(key, value)?,
            "n_steps" => self.n_steps = number(key, value)?,
            "initial" => {
                self.initial = match value {
                    "stationary" => Initial::Stationary,
                    "zero" => Initial::Zero,
                    "mode" => Initial::Mode,
                    _ => {
                        return Err(CliError::invalid(
                            key,
                            format!("expected stationary, zero or mode, got `{value}`"),
                        ))
                    }
                }
            }
            "initial_k" => self.initial_k = number(key, value)?,
            "initial_amplitude" => self.initial_amplitude = real(key, value)?,
            "format" => {
                self.format = Format::from_str(value, true).map_err(|_| {
                    CliError::invalid(key, format!("expected csv or json, got `{value}`"))
                })?
            }
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            _ => return Err(CliError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, text: &str) -> Result<(), CliError> {
        let (key, value) = text.split_once('=').ok_or_else(|| CliError::Syntax {
            path: "--set".into(),
            line: 1,
            text: text.to_string(),
        })?;
        self.set(key.trim(), value)
    }

    /// Applies every `key = value` line of a config file. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                path: origin.to_string(),
                line: index + 1,
                text: line.to_string(),
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: origin.clone(),
            source,
        })?;
        self.apply_text(&text, &origin)
    }

    /// Checks every key, naming the first offending one.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |key: &str, x: f64| {
            if x > 0.0 {
                Ok(())
            } else {
                Err(CliError::invalid(key, format!("must be positive, got {x}")))
            }
        };
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)?;
        positive("length", self.length)?;
        if self.n_interior < 3 {
            return Err(CliError::invalid(
                "n_interior",
                format!("need at least 3 interior points, got {}", self.n_interior),
            ));
        }
        if self.k_max > self.n_interior {
            return Err(CliError::invalid(
                "k_max",
                format!(
                    "K exceeds grid resolution ({} > n_interior = {})",
                    self.k_max, self.n_interior
                ),
            ));
        }
        if self.beta_min >= self.beta_max {
            return Err(CliError::invalid(
                "beta_max",
                format!(
                    "must exceed beta_min ({} >= {})",
                    self.beta_min, self.beta_max
                ),
            ));
        }
        positive("beta_step", self.beta_step)?;
        positive("tol_residual", self.tol_residual)?;
        positive("tol_step", self.tol_step)?;
        if self.max_iter == 0 {
            return Err(CliError::invalid("max_iter", "must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(CliError::invalid(
                "damping",
                format!("must lie in (0, 1), got {}", self.damping),
            ));
        }
        if !(self.min_step > 0.0 && self.min_step < 1.0) {
            return Err(CliError::invalid(
                "min_step",
                format!("must lie in (0, 1), got {}", self.min_step),
            ));
        }
        positive("dt", self.dt)?;
        if self.initial_k == 0 || self.initial_k > self.n_interior {
            return Err(CliError::invalid(
                "initial_k",
                format!(
                    "must lie in 1..={}, got {}",
                    self.n_interior, self.initial_k
                ),
            ));
        }
        Ok(())
    }

    /// Physical parameters; `g = 0` gives the linear model.
    pub fn params(&self) -> Result<PhysicalParams, CliError> {
        let p = if self.g == 0.0 {
            PhysicalParams::non_interacting(self.hbar, self.mass, self.lambda)
        } else {
            PhysicalParams::new(self.hbar, self.mass, self.g, self.lambda)
        };
        p.map_err(|e| CliError::invalid("hbar", e.to_string()))
    }

    pub fn require_interaction(&self, what: &str) -> Result<(), CliError> {
        if self.g == 0.0 {
            return Err(CliError::invalid(
                "g",
                format!("{what} requires a nonzero interaction"),
            ));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Domain::new(self.length, self.n_interior)
            .map_err(|e| CliError::invalid("n_interior", e.to_string()))
    }

    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tol_residual: self.tol_residual,
            tol_step: self.tol_step,
            max_iter: self.max_iter,
            damping: self.damping,
            min_step: self.min_step,
        }
    }

    pub fn evolution(&self) -> Result<EvolutionSettings, CliError> {
        EvolutionSettings::new(self.dt, self.n_steps)
            .map_err(|e| CliError::invalid("dt", e.to_string()))
    }

    /// Resolved values in key order, for output headers. `out` is left out so
    /// the same run written to two places gives the same bytes.
    pub fn entries(&self) -> Vec<(&'static str, Cell)> {
        use Cell::{Float, Int, Text};
        vec![
            ("hbar", Float(self.hbar)),
            ("mass", Float(self.mass)),
            ("g", Float(self.g)),
            ("lambda", Float(self.lambda)),
            ("length", Float(self.length)),
            ("n_interior", Int(self.n_interior as i64)),
            ("k_max", Int(self.k_max as i64)),
            ("beta_min", Float(self.beta_min)),
            ("beta_max", Float(self.beta_max)),
            ("beta_step", Float(self.beta_step)),
            ("beta", Float(self.beta)),
            ("tol_residual", Float(self.tol_residual)),
            ("tol_step", Float(self.tol_step)),
            ("max_iter", Int(self.max_iter as i64)),
            ("damping", Float(self.damping)),
            ("min_step", Float(self.min_step)),
            ("dt", Float(self.dt)),
            ("n_steps", Int(self.n_steps as i64)),
            ("initial", Text(self.initial.to_string())),
            ("initial_k", Int(self.initial_k as i64)),
            ("initial_amplitude", Float(self.initial_amplitude)),
            ("format", Text(self.format.to_string())),
        ]
    }
}
