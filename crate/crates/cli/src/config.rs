use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fbmin::spectrum::{BASE_GRID, DEFAULT_LEVELS, DEFAULT_ZERO_TOL};
use serde::{Deserialize, Serialize};

use crate::Usage;

/// Environment variable that overrides the output directory. Nothing else
/// is read from the environment.
pub const OUT_DIR_ENV: &str = "FBMIN_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepRange {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
}

impl Default for SweepRange {
    fn default() -> Self {
        SweepRange { t_min: 0.0, t_max: 0.3, steps: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Eigenvalue zero tolerance at the finest spectral level.
    pub zero_tol: f64,
    pub newton_tol: f64,
    pub ode_step: f64,
    /// Node counts of the spectral refinement levels, ascending.
    pub levels: Vec<usize>,
    pub sweep: SweepRange,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub morse_trials: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            zero_tol: DEFAULT_ZERO_TOL,
            newton_tol: 1e-10,
            ode_step: fbmin::rotprofile::DEFAULT_STEP,
            levels: DEFAULT_LEVELS.to_vec(),
            sweep: SweepRange::default(),
            output_dir: PathBuf::from("fbmin-out"),
            seed: 0,
            morse_trials: 20,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", p.display())))?
            }
            None => Config::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("zero_tol", self.zero_tol), ("newton_tol", self.newton_tol), ("ode_step", self.ode_step)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Usage(format!("{name} must be positive, got {v}")).into());
            }
        }
        if self.levels.is_empty() {
            return Err(Usage("levels must not be empty".into()).into());
        }
        if let Some(&g) = self.levels.iter().find(|&&g| g < BASE_GRID) {
            return Err(Usage(format!("grid level {g} is below the base resolution {BASE_GRID}")).into());
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Usage("levels must be strictly increasing".into()).into());
        }
        if self.morse_trials == 0 {
            return Err(Usage("morse_trials must be at least 1".into()).into());
        }
        Ok(())
    }

    /// Precedence: command-line flag, then the environment, then the file.
    pub fn resolve_output_dir(&mut self, flag: Option<PathBuf>) {
        if let Some(dir) = flag {
            self.output_dir = dir;
        } else if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            self.output_dir = PathBuf::from(dir);
        }
    }
}
