//! Command-line front end.
//!
//! Exit codes: 0 when everything holds or converges, 1 when an inequality
//! fails under verified hypotheses, 2 when hypotheses are violated, an
//! integral does not converge or a computation cannot be carried out, and 3
//! for configuration errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{Config, ConfigError, Overrides};
use crate::inequalities::{measure_audits, probe_sets, CheckName, Checker, Outcome};
use crate::integrator::{
    birkhoff_weak_integral, integrate_on, p_norm, tagged_sum, IntegrationError,
};
use crate::measures::AuditVerdict;
use crate::report::{
    to_json, ErrorRecord, MeasureInfo, NamedIntegral, NormRecord, Report, TaggedSumRecord,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_UNSETTLED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "birkhoff",
    version,
    about = "Birkhoff weak integrals and integral inequalities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub stages: Option<u32>,
    /// Refinements sampled per stage.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Record wall-clock time per item (makes reports run-dependent).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Audit the hypotheses on the configured measure.
    Audit,
    /// Integrate the configured integrand, optionally over `set`.
    Integrate,
    /// The `p`-norm of the configured integrand.
    Norm,
    /// Run one inequality check.
    Check { name: String },
    /// Run one inequality check over `p_grid`.
    Sweep { name: String },
}

impl Command {
    fn describe(&self) -> String {
        match self {
            Command::Audit => "audit".into(),
            Command::Integrate => "integrate".into(),
            Command::Norm => "norm".into(),
            Command::Check { name } => format!("check {name}"),
            Command::Sweep { name } => format!("sweep {name}"),
        }
    }
}

enum Failure {
    Config(ConfigError),
    Compute(String, String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<IntegrationError> for Failure {
    fn from(e: IntegrationError) -> Self {
        Failure::Compute("integration".into(), e.to_string())
    }
}

struct Timer {
    enabled: bool,
    items: BTreeMap<String, f64>,
}

impl Timer {
    fn time<T>(&mut self, item: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            self.items
                .insert(item.into(), start.elapsed().as_secs_f64() * 1e3);
        }
        out
    }
}

fn outcome_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Holds => EXIT_OK,
        Outcome::Fails => EXIT_FAILS,
        Outcome::HypothesesViolated | Outcome::NotConverged => EXIT_UNSETTLED,
    }
}

/// Combines exit codes: a failed inequality outranks unsettled results.
fn combine(a: i32, b: i32) -> i32 {
    if a == EXIT_FAILS || b == EXIT_FAILS {
        EXIT_FAILS
    } else {
        a.max(b)
    }
}

fn check_name(name: &str) -> Result<CheckName, ConfigError> {
    name.parse()
        .map_err(|e: String| ConfigError::new("command", e))
}

fn execute(cli: &Cli, report: &mut Report, timer: &mut Timer) -> Result<i32, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ConfigError::new("", "--config is required"))?;
    let overrides = Overrides {
        tol: cli.tol,
        stages: cli.stages,
        samples: cli.samples,
        horizon: cli.horizon,
        seed: cli.seed,
    };
    let config = Config::load(path, &overrides)?;
    report.config = Some(config.raw.clone());
    report.run = Some(config.integration.clone());
    let cfg = &config.integration;
    let nu = config.measure()?;
    report.measure = Some(MeasureInfo {
        label: nu.label().to_string(),
        claims: nu.claimed(),
    });

    match &cli.command {
        Command::Audit => {
            let probes = match config.set()? {
                Some(s) => vec![s],
                None => probe_sets(),
            };
            report.audits = timer.time("audits", || measure_audits(nu, cfg, &probes));
            let clean = report
                .audits
                .iter()
                .all(|a| a.verdict == AuditVerdict::Passed);
            Ok(if clean { EXIT_OK } else { EXIT_UNSETTLED })
        }
        Command::Integrate => {
            let u = config.integrand()?;
            let set = config.set()?;
            let tagged = config.tagged_partition()?;
            let result = timer.time("integral", || match &set {
                Some(s) => integrate_on(u, s, nu, cfg),
                None => birkhoff_weak_integral(u, nu, cfg),
            })?;
            let code = if result.converged() {
                EXIT_OK
            } else {
                EXIT_UNSETTLED
            };
            report.integrals.push(NamedIntegral {
                integrand: u.label().to_string(),
                set: set.map(|s| s.label().to_string()),
                result,
            });
            if let Some((tp, depth)) = tagged {
                let value = tagged_sum(u, nu, &tp, depth)?;
                report.tagged_sums.push(TaggedSumRecord {
                    integrand: u.label().to_string(),
                    partition: serde_json::to_value(tp.partition()).expect("partitions serialize"),
                    tags: tp.head_tags().to_vec(),
                    depth,
                    value,
                });
            }
            Ok(code)
        }
        Command::Norm => {
            let u = config.integrand()?;
            let p = config.p()?;
            let record = match timer.time("norm", || p_norm(u, p, nu, cfg)) {
                Ok(n) => NormRecord {
                    function: u.label().to_string(),
                    p,
                    value: Some(n.value),
                    integral: n.integral,
                },
                Err(IntegrationError::NotConverged(r)) => NormRecord {
                    function: u.label().to_string(),
                    p,
                    value: None,
                    integral: *r,
                },
                Err(e) => return Err(e.into()),
            };
            let code = if record.value.is_some() {
                EXIT_OK
            } else {
                EXIT_UNSETTLED
            };
            report.norms.push(record);
            Ok(code)
        }
        Command::Check { name } => {
            let name = check_name(name)?;
            let (u, v) = (config.function("u")?, config.function("v")?);
            let p = config.p()?;
            let checker = Checker::new(nu, cfg.clone());
            let verdict = timer
                .time(name.as_str(), || {
                    checker.run(name, u, v, p, config.bounds())
                })
                .map_err(|e| Failure::Compute("check".into(), e.to_string()))?;
            let code = outcome_code(verdict.outcome);
            report.verdicts.push(verdict);
            Ok(code)
        }
        Command::Sweep { name } => {
            let name = check_name(name)?;
            let (u, v) = (config.function("u")?, config.function("v")?);
            let grid = config.p_grid()?;
            let checker = Checker::new(nu, cfg.clone());
            let mut items = Vec::with_capacity(grid.len());
            for &p in grid {
                let item = timer.time(format!("{name} p={p:?}"), || {
                    checker.sweep(name, u, v, &[p], config.bounds())
                });
                items.extend(item);
            }
            let code = items.iter().fold(EXIT_OK, |acc, item| {
                let c = item
                    .verdict
                    .as_ref()
                    .map_or(EXIT_UNSETTLED, |v| outcome_code(v.outcome));
                combine(acc, c)
            });
            report.sweep = Some(items);
            Ok(code)
        }
    }
}

/// Runs a parsed command and returns its report.
pub fn run(cli: &Cli) -> Report {
    let mut report = Report::new(cli.command.describe());
    let mut timer = Timer {
        enabled: cli.timings,
        items: BTreeMap::new(),
    };
    report.exit_code = match execute(cli, &mut report, &mut timer) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            report.error = Some(ErrorRecord {
                kind: "config".into(),
                path: e.path,
                message: e.message,
            });
            EXIT_CONFIG
        }
        Err(Failure::Compute(kind, message)) => {
            report.error = Some(ErrorRecord {
                kind,
                path: String::new(),
                message,
            });
            EXIT_UNSETTLED
        }
    };
    if cli.timings {
        report.timings_ms = Some(timer.items);
    }
    report
}

/// Parses arguments, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let report = run(&cli);
    if let Some(err) = &report.error {
        eprintln!(
            "birkhoff: {} error: {}{}",
            err.kind,
            if err.path.is_empty() {
                String::new()
            } else {
                format!("{}: ", err.path)
            },
            err.message
        );
    }
    let text = to_json(&report);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("birkhoff: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code
}
