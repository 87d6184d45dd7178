//! Defaults shared by the library and the command-line runner, plus the serialized
//! experiment description.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::deform::{DEFAULT_OUTPUT_DEGREE, DEFORM_MU_CAP};
pub use crate::integral::phi::DEFAULT_PSI_ORDER;
pub use crate::integral::solve::DEFAULT_MU_CAP;
pub use crate::norms::HARDY_NODES;

/// Truncation degree used when a command does not name one.
pub const DEFAULT_DEGREE: usize = 64;
/// Stopping tolerance of the coefficient-targeting Newton iteration.
pub const NEWTON_TOL: f64 = 1e-10;
/// Acceptable bound margin for the extremal checks.
pub const MARGIN_TOL: f64 = 1e-9;
/// Largest truncation degree any command accepts.
pub const MAX_DEGREE: usize = 4096;
/// Bumped whenever a JSON or CSV layout changes.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Kappa,
    Sweep,
    Deform,
    BergmanDemo,
    Parseval,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Exponents; most commands use only the first.
    pub p: Vec<f64>,
    pub n: Vec<usize>,
    pub seed: u64,
    /// Number of seeds in a sweep.
    pub count: u64,
    pub eps: f64,
    pub degree: usize,
    /// Inner radius of the deformation annulus; `None` picks the smallest admissible one.
    pub annulus_r: Option<f64>,
    pub tol: f64,
    pub mu_cap: f64,
    pub output_path: Option<String>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            p: vec![2.0],
            n: vec![1],
            seed: 0,
            count: 1,
            eps: 1e-3,
            degree: DEFAULT_DEGREE,
            annulus_r: None,
            tol: NEWTON_TOL,
            mu_cap: match command {
                Command::Deform => DEFORM_MU_CAP,
                _ => DEFAULT_MU_CAP,
            },
            output_path: None,
            format: OutputFormat::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_empty() {
            return Err(Error::Domain("empty p list".into()));
        }
        if let Some(&p) = self.p.iter().find(|&&p| !(p > 1.0)) {
            return Err(Error::Domain(format!("need p > 1, got {p}")));
        }
        if self.n.is_empty() {
            return Err(Error::Domain("empty n list".into()));
        }
        if self.n.contains(&0) {
            return Err(Error::Domain("need n >= 1".into()));
        }
        if self.degree > MAX_DEGREE {
            return Err(Error::Domain(format!(
                "degree {} above {MAX_DEGREE}",
                self.degree
            )));
        }
        if !self.eps.is_finite() || self.eps < 0.0 {
            return Err(Error::Domain(format!("bad eps {}", self.eps)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Domain(format!(
                "tolerance {} outside (0, 1)",
                self.tol
            )));
        }
        if !(self.mu_cap > 0.0 && self.mu_cap < 1.0) {
            return Err(Error::Domain(format!(
                "mu cap {} outside (0, 1)",
                self.mu_cap
            )));
        }
        if let Some(r) = self.annulus_r {
            if !(r.is_finite() && r > 1.0) {
                return Err(Error::Domain(format!("annulus radius {r} must exceed 1")));
            }
        }
        if self.count == 0 {
            return Err(Error::Domain("count must be positive".into()));
        }
        Ok(())
    }
}
