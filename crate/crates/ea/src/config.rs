//! Experiment parameters from a JSON file and the command line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{EaError, Result};

pub const DEFAULT_SEED: u64 = 1;

/// Keys mirror the command-line flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub v: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plot_script: Option<bool>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| EaError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Values set here win over `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            v: self.v.or(base.v),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            plot_script: self.plot_script.or(base.plot_script),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.v {
            if !v.is_finite() || v < 0.0 {
                return Err(EaError::Usage(format!("--v must be a finite non-negative variance, got {v}")));
            }
        }
        if self.n == Some(0) {
            return Err(EaError::Usage("--N must be at least 1".into()));
        }
        if self.m == Some(0) {
            return Err(EaError::Usage("--M must be at least 1".into()));
        }
        if self.trials == Some(0) {
            return Err(EaError::Usage("--trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Resolved parameters handed to an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub v: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub trials: Option<u64>,
    pub seed: u64,
}

impl Params {
    pub fn v_or(&self, default: f64) -> f64 {
        self.v.unwrap_or(default)
    }

    /// `--N K` replaces the default list with `[K]`.
    pub fn n_list(&self, default: &[usize]) -> Vec<usize> {
        self.n.map_or_else(|| default.to_vec(), |k| vec![k])
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    pub fn m_or(&self, default: usize) -> usize {
        self.m.unwrap_or(default)
    }

    pub fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }
}

impl From<&Overrides> for Params {
    fn from(o: &Overrides) -> Self {
        Params {
            v: o.v,
            n: o.n,
            m: o.m,
            trials: o.trials,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_wins() {
        let file: Overrides = serde_json::from_str(r#"{"v": 0.3, "N": 8, "seed": 5}"#).unwrap();
        let cli = Overrides { v: Some(0.2), ..Default::default() };
        let merged = cli.over(file);
        assert_eq!(merged.v, Some(0.2));
        assert_eq!(merged.n, Some(8));
        assert_eq!(Params::from(&merged).seed, 5);
        assert_eq!(Params::from(&merged).n_list(&[1, 2]), vec![8]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(serde_json::from_str::<Overrides>(r#"{"variance": 0.3}"#).is_err());
        assert!(Overrides { v: Some(-1.0), ..Default::default() }.validate().is_err());
        assert!(Overrides { n: Some(0), ..Default::default() }.validate().is_err());
        assert!(Overrides::default().validate().is_ok());
    }
}
