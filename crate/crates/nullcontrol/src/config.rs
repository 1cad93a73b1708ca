//! TOML experiment configuration.
//!
//! Sets parse as arrays of `[lo, hi]` pairs, fat Cantor generators as
//! `{ depth, ratio }`, densities as `[lo, hi, value]` triples. Every
//! constraint is validated before any computation starts.

use crate::error::{Error, Result};
use crate::sets::{FatCantorSpec, Interval, MeasurableSet1D};
use crate::spectral::DensitySpec;
use serde::Deserialize;

/// A 1D set literal: explicit intervals or a fat Cantor generator.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SetLiteral {
    Intervals(Vec<[f64; 2]>),
    FatCantor { depth: u32, ratio: f64 },
}

impl SetLiteral {
    pub fn build(&self) -> Result<MeasurableSet1D> {
        match self {
            SetLiteral::Intervals(pairs) => {
                let set = MeasurableSet1D::unit(pairs)?;
                if set.measure() <= 0.0 {
                    return Err(Error::InvalidInput("set has zero measure".into()));
                }
                Ok(set)
            }
            SetLiteral::FatCantor { depth, ratio } => {
                Ok(FatCantorSpec::new(*depth, *ratio)?.generate(Interval { lo: 0.0, hi: 1.0 }))
            }
        }
    }
}

/// Initial datum selector for control runs.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Seeded unit-norm Gaussian coefficients.
    Random,
    /// Single eigenmode (1-indexed).
    Mode(usize),
    /// Whitespace/newline-separated coefficients from a file.
    File(String),
}

impl InitialData {
    pub fn parse(s: &str) -> Result<InitialData> {
        if s == "random" {
            Ok(InitialData::Random)
        } else if let Some(j) = s.strip_prefix("mode:") {
            let j: usize = j
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad mode index in u0 spec '{s}'")))?;
            if j == 0 {
                return Err(Error::InvalidInput("mode indices are 1-based".into()));
            }
            Ok(InitialData::Mode(j))
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(InitialData::File(p.to_string()))
        } else {
            Err(Error::InvalidInput(format!(
                "u0 must be 'random', 'mode:j' or 'file:PATH', got '{s}'"
            )))
        }
    }
}

fn default_t_total() -> f64 {
    1.0
}
fn default_stages() -> usize {
    6
}
fn default_modes() -> usize {
    64
}
fn default_u0() -> String {
    "random".into()
}
fn default_grid() -> usize {
    512
}
fn default_dt() -> f64 {
    1e-4
}

/// Parameters of a control run.
#[derive(Debug, Clone, Deserialize)]
pub struct ControlRunConfig {
    pub omega: SetLiteral,
    #[serde(default = "default_t_total")]
    pub t_total: f64,
    /// μ₀ as a multiple of π.
    pub mu0_pi: f64,
    #[serde(default = "default_stages")]
    pub stages: usize,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_u0")]
    pub u0: String,
    /// Density triples; constant 1 when absent.
    #[serde(default)]
    pub density: Option<Vec<[f64; 3]>>,
    /// Run label used in sweep outputs.
    #[serde(default)]
    pub name: Option<String>,
}

impl ControlRunConfig {
    pub fn validate(&self) -> Result<ValidatedControlRun> {
        let omega = self.omega.build()?;
        if self.modes == 0 {
            return Err(Error::InvalidInput("modes must be ≥ 1".into()));
        }
        if self.stages == 0 {
            return Err(Error::InvalidInput("stages must be ≥ 1".into()));
        }
        if !(self.t_total > 0.0) {
            return Err(Error::InvalidInput("T must be positive".into()));
        }
        if !(self.mu0_pi > 0.0) {
            return Err(Error::InvalidInput("μ₀ must be positive".into()));
        }
        let density = match &self.density {
            Some(t) => DensitySpec::from_triples(t)?,
            None => DensitySpec::constant(1.0)?,
        };
        let u0 = InitialData::parse(&self.u0)?;
        Ok(ValidatedControlRun {
            omega,
            t_total: self.t_total,
            mu0: self.mu0_pi * std::f64::consts::PI,
            stages: self.stages,
            modes: self.modes,
            u0,
            density,
            name: self.name.clone().unwrap_or_else(|| "run".into()),
        })
    }
}

/// Validated control-run parameters.
#[derive(Debug, Clone)]
pub struct ValidatedControlRun {
    pub omega: MeasurableSet1D,
    pub t_total: f64,
    pub mu0: f64,
    pub stages: usize,
    pub modes: usize,
    pub u0: InitialData,
    pub density: DensitySpec,
    pub name: String,
}

/// Parameters of the spectral-inequality driver.
#[derive(Debug, Clone, Deserialize)]
pub struct SpectralIneqConfig {
    pub omega: SetLiteral,
    /// μ values as multiples of π.
    pub mu_pi_list: Vec<f64>,
    /// Number of basis modes; must reach the largest μ.
    pub modes: usize,
    #[serde(default)]
    pub density: Option<Vec<[f64; 3]>>,
}

/// Parameters of the falsification driver.
#[derive(Debug, Clone, Deserialize)]
pub struct SmallnessConfig {
    #[serde(default = "default_poly_trials")]
    pub poly_trials: usize,
    #[serde(default = "default_trig_trials")]
    pub trig_trials: usize,
}

fn default_poly_trials() -> usize {
    600
}
fn default_trig_trials() -> usize {
    400
}

/// Parameters of the cross-validation driver.
#[derive(Debug, Clone, Deserialize)]
pub struct ValidateConfig {
    #[serde(flatten)]
    pub run: ControlRunConfig,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

/// Top-level config file: one table per subcommand plus a sweep list.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ExperimentConfig {
    pub spectral_ineq: Option<SpectralIneqConfig>,
    pub control_run: Option<ControlRunConfig>,
    pub smallness: Option<SmallnessConfig>,
    pub validate: Option<ValidateConfig>,
    #[serde(default)]
    pub sweep: Vec<ControlRunConfig>,
}

impl ExperimentConfig {
    pub fn from_path(path: &str) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {path}: {e}")))?;
        toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("config parse error: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_set_literals() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            [control_run]
            omega = [[0.1, 0.15], [0.4, 0.5], [0.8, 0.85]]
            mu0_pi = 4.0
            "#,
        )
        .unwrap();
        let run = cfg.control_run.unwrap().validate().unwrap();
        assert!((run.omega.measure() - 0.2).abs() < 1e-12);
        assert_eq!(run.stages, 6);
        assert_eq!(run.modes, 64);
        assert_eq!(run.u0, InitialData::Random);
    }

    #[test]
    fn parses_fat_cantor() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            [control_run]
            omega = { depth = 3, ratio = 0.25 }
            mu0_pi = 2.0
            "#,
        )
        .unwrap();
        let run = cfg.control_run.unwrap().validate().unwrap();
        let expect = (1.0 - 0.25) * (1.0 - 0.0625) * (1.0 - 0.015625);
        assert!((run.omega.measure() - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_sets() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            [control_run]
            omega = [[0.5, 0.2]]
            mu0_pi = 4.0
            "#,
        )
        .unwrap();
        assert!(cfg.control_run.unwrap().validate().is_err());

        let cfg2: ExperimentConfig = toml::from_str(
            r#"
            [control_run]
            omega = [[0.2, 0.2]]
            mu0_pi = 4.0
            "#,
        )
        .unwrap();
        assert!(cfg2.control_run.unwrap().validate().is_err());
    }

    #[test]
    fn parses_u0_variants() {
        assert_eq!(InitialData::parse("random").unwrap(), InitialData::Random);
        assert_eq!(InitialData::parse("mode:3").unwrap(), InitialData::Mode(3));
        assert_eq!(
            InitialData::parse("file:/tmp/u0.txt").unwrap(),
            InitialData::File("/tmp/u0.txt".into())
        );
        assert!(InitialData::parse("mode:0").is_err());
        assert!(InitialData::parse("nonsense").is_err());
    }
}
