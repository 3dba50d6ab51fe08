use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpath_cli::config::{parse_suites, parse_tolerance};
use qpath_cli::suites::registry;
use qpath_cli::{ConfigError, Report, SuiteConfig};

#[derive(Parser)]
#[command(name = "qpath", version, about = "Numerical checks for path-space algebroids and their 2-forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks and write a JSON report.
    Verify(VerifyArgs),
    /// List every check with the identity it tests.
    ListChecks,
}

/// Flags override the matching fields of `--config`.
#[derive(clap::Args)]
struct VerifyArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// su2, so3, heisenberg3 or torus2.
    #[arg(long)]
    group: Option<String>,
    /// Comma-separated suites.
    #[arg(long)]
    suite: Option<String>,
    /// Odd number of quadrature nodes on [0, 1].
    #[arg(long = "grid-t")]
    grid_t: Option<usize>,
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,
    #[arg(long = "t-step")]
    t_step: Option<f64>,
    /// `suite.check=value`; repeatable.
    #[arg(long = "tol")]
    tol: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Where to write the report; stdout when absent.
    #[arg(long)]
    report: Option<String>,
}

impl VerifyArgs {
    fn into_config(self) -> Result<SuiteConfig, ConfigError> {
        let mut c = match &self.config {
            Some(path) => SuiteConfig::from_file(path)?,
            None => SuiteConfig::default(),
        };
        if let Some(g) = self.group {
            c.group = g;
        }
        if let Some(s) = &self.suite {
            c.suites = parse_suites(s)?;
        }
        if let Some(n) = self.grid_t {
            c.n_points = n;
        }
        if let Some(h) = self.fd_step {
            c.fd_step = h;
        }
        if let Some(h) = self.t_step {
            c.t_step = h;
        }
        for t in &self.tol {
            let (name, value) = parse_tolerance(t)?;
            c.tol_overrides.insert(name, value);
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(n) = self.samples {
            c.samples_per_check = n;
        }
        if self.report.is_some() {
            c.report_path = self.report;
        }
        Ok(c)
    }
}

fn print_summary(report: &Report) {
    for c in &report.checks {
        let status = match (c.skipped, c.pass) {
            (true, _) => "SKIP",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        let residual = c.residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
        eprintln!("{status} {:<36} {residual:>10} <= {:.0e}", c.check_name, c.tolerance);
        if let Some(e) = &c.error {
            eprintln!("     error: {e}");
        }
    }
    let s = &report.summary;
    eprintln!("{} checks: {} passed, {} failed, {} skipped", s.total, s.passed, s.failed, s.skipped);
    if let Some(a) = &report.aborted {
        eprintln!("aborted: {a}");
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    let report = match args.into_config().and_then(|c| qpath_cli::run(&c)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    print_summary(&report);
    let json = report.to_json();
    match &report.config_echo.report_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("cannot write report to {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify(args) => verify(args),
        Command::ListChecks => {
            for c in registry() {
                println!("{:<36} {}", c.full_name(), c.anchor);
            }
            ExitCode::SUCCESS
        }
    }
}
