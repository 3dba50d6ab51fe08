//! Run configuration: a JSON file mirrored by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qpath::lie::{LieAlgebra, Steps};
use qpath::path::TimeGrid;
use qpath::Context;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown group `{0}` (known: su2, so3, heisenberg3, torus2)")]
    UnknownGroup(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("tolerance override for unknown check `{0}`")]
    UnknownCheck(String),
    #[error("{0}")]
    Invalid(String),
}

/// A group of related checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebroid,
    Forms,
    Lifting,
    Bott,
    Fusion,
    Courant,
    Qham,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Algebroid, Suite::Forms, Suite::Lifting, Suite::Bott, Suite::Fusion, Suite::Courant, Suite::Qham];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebroid => "algebroid",
            Suite::Forms => "forms",
            Suite::Lifting => "lifting",
            Suite::Bott => "bott",
            Suite::Fusion => "fusion",
            Suite::Courant => "courant",
            Suite::Qham => "qham",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| ConfigError::UnknownSuite(s.to_string()))
    }
}

/// Everything a run depends on. Identical configs give identical reports
/// apart from timings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub group: String,
    pub suites: Vec<Suite>,
    /// Simpson nodes on `[0, 1]`; must be odd.
    pub n_points: usize,
    /// Finite-difference step along group directions.
    pub fd_step: f64,
    /// Finite-difference step in the path parameter.
    pub t_step: f64,
    /// Per-check tolerances keyed by full check name, e.g. `lifting.d3form`.
    pub tol_overrides: BTreeMap<String, f64>,
    pub seed: u64,
    pub samples_per_check: usize,
    pub report_path: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let steps = Steps::default();
        SuiteConfig {
            group: "su2".into(),
            suites: Suite::ALL.to_vec(),
            n_points: 201,
            fd_step: steps.group,
            t_step: steps.time,
            tol_overrides: BTreeMap::new(),
            seed: 42,
            samples_per_check: 4,
            report_path: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks the invariants that do not depend on the check registry.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !LieAlgebra::catalog().contains(&self.group.as_str()) {
            return Err(ConfigError::UnknownGroup(self.group.clone()));
        }
        if self.n_points < 3 || self.n_points % 2 == 0 {
            return Err(ConfigError::Invalid(format!("n_points must be odd and at least 3, got {}", self.n_points)));
        }
        for (name, h) in [("fd_step", self.fd_step), ("t_step", self.t_step)] {
            if !(h > 0.0 && h < 1e-2) {
                return Err(ConfigError::Invalid(format!("{name} must lie in (0, 1e-2), got {h}")));
            }
        }
        if self.samples_per_check == 0 {
            return Err(ConfigError::Invalid("samples_per_check must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(ConfigError::Invalid("no suites selected".into()));
        }
        for (name, tol) in &self.tol_overrides {
            if !(tol.is_finite() && *tol >= 0.0) {
                return Err(ConfigError::Invalid(format!("tolerance for {name} must be a non-negative number")));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> Result<Context, ConfigError> {
        let alg = LieAlgebra::by_name(&self.group).map_err(|_| ConfigError::UnknownGroup(self.group.clone()))?;
        let grid = TimeGrid::new(self.n_points).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(Context::new(alg, Steps { group: self.fd_step, time: self.t_step }, grid))
    }
}

/// Parses `suite.check=value`.
pub fn parse_tolerance(text: &str) -> Result<(String, f64), ConfigError> {
    let (name, value) =
        text.split_once('=').ok_or_else(|| ConfigError::Invalid(format!("expected NAME=VALUE, got `{text}`")))?;
    let value: f64 =
        value.trim().parse().map_err(|_| ConfigError::Invalid(format!("bad tolerance value in `{text}`")))?;
    Ok((name.trim().to_string(), value))
}

/// Parses a comma-separated suite list.
pub fn parse_suites(text: &str) -> Result<Vec<Suite>, ConfigError> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SuiteConfig::default().validate().unwrap();
    }

    #[test]
    fn even_grid_is_rejected() {
        let c = SuiteConfig { n_points: 200, ..SuiteConfig::default() };
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn file_format_round_trips() {
        let mut c = SuiteConfig { group: "torus2".into(), suites: vec![Suite::Forms], ..SuiteConfig::default() };
        c.tol_overrides.insert("forms.eta_closed".into(), 1e-3);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SuiteConfig>(&text).unwrap(), c);
        let partial: SuiteConfig = serde_json::from_str(r#"{"group": "so3", "suites": ["lifting"]}"#).unwrap();
        assert_eq!(partial.n_points, 201);
        assert!(serde_json::from_str::<SuiteConfig>(r#"{"grup": "so3"}"#).is_err());
    }

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_tolerance("lifting.d3form=1e-4").unwrap(), ("lifting.d3form".into(), 1e-4));
        assert!(parse_tolerance("lifting.d3form").is_err());
        assert_eq!(parse_suites("lifting,bott").unwrap(), vec![Suite::Lifting, Suite::Bott]);
        assert!(parse_suites("lifting,nope").is_err());
    }
}
