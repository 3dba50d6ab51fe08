//! Running the selected checks and assembling the JSON report.

use std::time::Instant;

use qpath::bott::ConventionTable;
use qpath::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{Check, Probe, Shared};
use crate::config::{ConfigError, Suite, SuiteConfig};
use crate::suites;

pub const REPORT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub group: String,
    /// FNV-1a digest of every sampled group element, in hex.
    pub sample_digest: String,
    /// Seed of the check's own generator.
    pub seed: u64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub check_name: String,
    pub anchor: String,
    pub params: CheckParams,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_ms: u64,
}

/// The sign conventions every Bott-type check runs under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionEcho {
    pub simplex_sign: [f64; 3],
    pub rectangle_sign: f64,
    pub cs_sign: f64,
    pub eta_sign: f64,
    pub varpi_sign: f64,
}

impl From<ConventionTable> for ConventionEcho {
    fn from(t: ConventionTable) -> Self {
        ConventionEcho {
            simplex_sign: t.simplex_sign,
            rectangle_sign: t.rectangle_sign,
            cs_sign: t.cs_sign,
            eta_sign: t.eta_sign,
            varpi_sign: t.varpi_sign,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config_echo: SuiteConfig,
    pub convention_table: ConventionEcho,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    /// Set when an oracle could not fix a sign convention.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

impl Report {
    /// 0 all passed, 1 some check failed, 3 an oracle aborted.
    pub fn exit_code(&self) -> i32 {
        if self.aborted.is_some() {
            3
        } else if self.summary.failed > 0 {
            1
        } else {
            0
        }
    }

    /// The report with timings zeroed, for byte-level comparison.
    pub fn without_runtimes(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.runtime_ms = 0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn check(&self, full_name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check_name == full_name)
    }
}

/// Checks selected by the config, in registry order.
pub fn selected(config: &SuiteConfig) -> Vec<Check> {
    suites::registry().into_iter().filter(|c| config.suites.contains(&c.suite)).collect()
}

/// Runs one check; the second value is set when an oracle aborted.
fn run_one(check: &Check, config: &SuiteConfig, ctx: &qpath::Context, shared: &Shared) -> (CheckReport, bool) {
    let full = check.full_name();
    let tolerance = config.tol_overrides.get(&full).copied().unwrap_or(check.tolerance);
    let start = Instant::now();
    let mut probe = Probe::new(ctx, shared, config.seed, &full, config.samples_per_check);
    let result = (check.run)(&mut probe);
    let runtime_ms = start.elapsed().as_millis() as u64;
    let params = CheckParams {
        group: config.group.clone(),
        sample_digest: format!("{:016x}", probe.digest()),
        seed: probe.seed,
        samples: config.samples_per_check,
    };
    let base = CheckReport {
        suite: check.suite,
        check_name: full,
        anchor: check.anchor.to_string(),
        params,
        residual: None,
        tolerance,
        pass: false,
        skipped: false,
        note: None,
        error: None,
        runtime_ms,
    };
    let aborted = matches!(result, Err(Error::OracleAbort(_)));
    let report = match result {
        Ok(outcome) => match outcome.residual {
            None => CheckReport { pass: true, skipped: true, note: outcome.note, ..base },
            Some(r) => {
                let finite = r.is_finite();
                CheckReport {
                    residual: finite.then_some(r),
                    pass: finite && r <= tolerance,
                    note: outcome.note,
                    error: (!finite).then(|| "non-finite residual".to_string()),
                    ..base
                }
            }
        },
        Err(e) => CheckReport { error: Some(e.to_string()), ..base },
    };
    (report, aborted)
}

/// Runs every selected check on a worker pool. Each check draws from its own
/// generator seeded by `(seed, name)`, so scheduling never changes results.
pub fn run(config: &SuiteConfig) -> Result<Report, ConfigError> {
    config.validate()?;
    let known: Vec<String> = suites::registry().iter().map(Check::full_name).collect();
    if let Some(name) = config.tol_overrides.keys().find(|k| !known.contains(k)) {
        return Err(ConfigError::UnknownCheck(name.clone()));
    }
    run_checks(config, &selected(config))
}

/// Runs an explicit list of checks under `config`.
pub fn run_checks(config: &SuiteConfig, checks: &[Check]) -> Result<Report, ConfigError> {
    let ctx = config.context()?;
    let shared = Shared::default();
    let results: Vec<(CheckReport, bool)> = checks.par_iter().map(|c| run_one(c, config, &ctx, &shared)).collect();
    let aborted = results
        .iter()
        .find(|(_, a)| *a)
        .map(|(r, _)| format!("{}: {}", r.check_name, r.error.as_deref().unwrap_or_default()));
    let reports: Vec<CheckReport> = results.into_iter().map(|(r, _)| r).collect();
    let mut summary = Summary { total: reports.len(), ..Summary::default() };
    for r in &reports {
        match (r.skipped, r.pass) {
            (true, _) => summary.skipped += 1,
            (false, true) => summary.passed += 1,
            (false, false) => summary.failed += 1,
        }
    }
    Ok(Report {
        version: REPORT_VERSION.to_string(),
        config_echo: config.clone(),
        convention_table: ConventionTable::standard().into(),
        checks: reports,
        summary,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Outcome;

    fn check(name: &'static str, run: crate::check::CheckFn) -> Check {
        Check { suite: Suite::Forms, name, anchor: "-", tolerance: 1e-6, run }
    }

    #[test]
    fn exit_codes_follow_the_worst_outcome() {
        let config = SuiteConfig::default();
        let ok = check("ok", |_| Ok(Outcome::residual(1e-9)));
        let skip = check("skip", |_| Ok(Outcome::skipped("n/a")));
        let bad = check("bad", |_| Ok(Outcome::residual(1.0)));
        let nan = check("nan", |_| Ok(Outcome::residual(f64::NAN)));
        let abort = check("abort", |_| Err(Error::OracleAbort("both signs fail".into())));

        let r = run_checks(&config, &[ok, skip]).unwrap();
        assert_eq!((r.exit_code(), r.summary.passed, r.summary.skipped), (0, 1, 1));
        let r = run_checks(&config, &[ok, bad, nan]).unwrap();
        assert_eq!((r.exit_code(), r.summary.failed), (1, 2));
        assert!(r.check("forms.nan").unwrap().error.is_some());
        let r = run_checks(&config, &[ok, bad, abort]).unwrap();
        assert_eq!(r.exit_code(), 3);
        assert!(r.aborted.as_deref().unwrap().starts_with("forms.abort"));
    }

    #[test]
    fn unknown_override_is_a_config_error() {
        let mut config = SuiteConfig::default();
        config.tol_overrides.insert("forms.nope".into(), 1.0);
        assert!(matches!(run(&config), Err(ConfigError::UnknownCheck(_))));
    }
}
