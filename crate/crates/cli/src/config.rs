use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use magnetodisk_core::{ModelParams, RadialGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `lo:hi:steps` on the command line, an object in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl FromStr for MuRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected LO:HI:STEPS, got {s:?}"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Self {
            lo: num(parts[0])?,
            hi: num(parts[1])?,
            steps: parts[2]
                .trim()
                .parse()
                .map_err(|e| format!("{:?}: {e}", parts[2]))?,
        })
    }
}

impl fmt::Display for MuRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

/// Run configuration. Every field has a default, so `{}` is a valid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Number of grid cells.
    pub n: usize,
    pub grading: f64,
    pub mu: Option<f64>,
    pub mu_range: Option<MuRange>,
    /// Must satisfy `mu = lambda²/2` when given; otherwise `√(2mu)`.
    pub lambda: Option<f64>,
    /// Seed of the random starts used by multistart and the checks.
    pub seed: u64,
    /// Amplitude of the `ε φ⁰` start.
    pub seed_epsilon: f64,
    /// Number of starts for `minimize`: `ε φ⁰` plus `starts − 1` random ones.
    pub starts: usize,
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub delta0: f64,
    pub rho0: f64,
    pub trivial_tol: f64,
    /// Points per axis of the `fields` sampling lattice.
    pub lattice: usize,
    pub reduction_samples: usize,
    pub stencil: f64,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 512,
            grading: 2.0,
            mu: None,
            mu_range: None,
            lambda: None,
            seed: 0,
            seed_epsilon: 0.1,
            starts: 4,
            residual_tol: 1e-8,
            max_iterations: 500,
            delta0: 0.5,
            rho0: 1.0,
            trivial_tol: 1e-6,
            lattice: 41,
            reduction_samples: 100,
            stencil: 1e-4,
            out: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

/// What a subcommand needs from `mu` / `mu_range`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingNeed {
    Nothing,
    Mu,
    Range,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the configuration with the output directory removed, so
    /// the same run written to different places carries the same hash.
    pub fn digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("out");
        }
        let bytes = serde_json::to_vec(&v).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn validate(&self, need: CouplingNeed) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Invalid(m));
        match need {
            CouplingNeed::Mu if self.mu.is_none() => return bad("mu is required".into()),
            CouplingNeed::Mu if self.mu_range.is_some() => {
                return bad("mu_range is not accepted here; give mu".into())
            }
            CouplingNeed::Range if self.mu_range.is_none() => {
                return bad("mu_range is required".into())
            }
            CouplingNeed::Range if self.mu.is_some() => {
                return bad("mu is not accepted here; give mu_range".into())
            }
            _ => {}
        }
        if let Some(r) = self.mu_range {
            if !(r.lo < r.hi) || r.steps < 2 || !r.lo.is_finite() || !r.hi.is_finite() {
                return bad(format!("invalid mu_range {r}"));
            }
            if self.lambda.is_some() {
                return bad("lambda cannot be combined with mu_range".into());
            }
        }
        if !(self.seed_epsilon.is_finite() && self.seed_epsilon > 0.0) {
            return bad(format!("seed_epsilon must be positive, got {}", self.seed_epsilon));
        }
        if self.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        for (name, v) in [
            ("delta0", self.delta0),
            ("rho0", self.rho0),
            ("trivial_tol", self.trivial_tol),
            ("stencil", self.stencil),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.stencil >= 0.01 {
            return bad(format!("stencil must be below 0.01, got {}", self.stencil));
        }
        if self.lattice < 2 {
            return bad("lattice must be at least 2".into());
        }
        self.grid()?;
        self.params_for(self.mu.unwrap_or(1.0))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid<f64>>, CliError> {
        RadialGrid::new(self.n, self.grading)
            .map(Arc::new)
            .map_err(|e| CliError::Invalid(e.to_string()))
    }

    /// Parameters at coupling `mu` (lambda applies only to the configured mu).
    pub fn params_for(&self, mu: f64) -> Result<ModelParams<f64>, CliError> {
        let base = match (self.lambda, self.mu) {
            (Some(l), Some(m)) if m == mu => ModelParams::new(mu, l),
            _ => ModelParams::from_mu(mu),
        };
        base.and_then(|p| p.with_residual_tol(self.residual_tol))
            .and_then(|p| p.with_max_iterations(self.max_iterations))
            .map_err(|e| CliError::Invalid(e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams<f64>, CliError> {
        let mu = self
            .mu
            .ok_or_else(|| CliError::Invalid("mu is required".into()))?;
        self.params_for(mu)
    }
}
