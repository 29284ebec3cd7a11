//! Command-line arguments and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{
    cmd_compact_demo, cmd_solve, cmd_special, cmd_sweep, cmd_verify, cmd_verify_table, compact_passed, parse_values,
};
use crate::config::{A1Spec, ProfileSpec, RunConfig};
use crate::{fmt_f64, CliError};
use g2c_core::verify::VerificationReport;

#[derive(Debug, Parser)]
#[command(name = "g2c", version)]
#[command(about = "Solve and verify SU(2)²-invariant coclosed G₂-structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileName {
    /// A_i = t/2.
    Cone,
    /// A_i = sin(πt)/(2π) on [0, 1).
    Sine,
    /// A₁ = A₂ = A₃ = t/3 + t/(6(1 + t²)).
    Symmetric,
    /// The complete torsion-free metric.
    #[value(name = "bryant_salamon", alias = "bryant-salamon")]
    BryantSalamon,
}

impl ProfileName {
    pub fn spec(self) -> ProfileSpec {
        match self {
            ProfileName::Cone => ProfileSpec::Cone,
            ProfileName::Sine => ProfileSpec::Sine { k: std::f64::consts::PI },
            ProfileName::Symmetric => ProfileSpec::Symmetric {
                a1: A1Spec::RationalLinear { a: 1.0 / 3.0 },
            },
            ProfileName::BryantSalamon => ProfileSpec::BryantSalamon {
                r_max: 1e3,
                points: 2000,
            },
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory [default: the config's outputs.dir, or ./out].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, value_name = "T")]
    pub t_max: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub b0: Option<f64>,

    /// Built-in profile, replacing the one in the config.
    #[arg(long, value_enum, value_name = "NAME")]
    pub profile: Option<ProfileName>,

    /// Bound on the relative dψ residual.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl RunArgs {
    pub fn resolve(&self, default: ProfileSpec) -> Result<(RunConfig, PathBuf), CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::with_profile(default),
        };
        if let Some(p) = self.profile {
            cfg.profile = p.spec();
        }
        if let Some(t) = self.t_max {
            cfg.grid.t_max = t;
        }
        if let Some(b) = self.b0 {
            cfg.b0 = b;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.verify = t;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.outputs.dir.clone());
        Ok((cfg, out))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and write the profile table and the series sidecar
    Solve(RunArgs),

    /// Run the check suite on a configured run or on a saved table
    Verify {
        #[command(flatten)]
        run: RunArgs,

        /// Saved profile table to re-check instead of a config.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["config", "profile", "b0", "t_max"])]
        table: Option<PathBuf>,
    },

    /// Solve and verify one run per b0 value (parallelism capped by G2C_THREADS)
    Sweep {
        #[command(flatten)]
        run: RunArgs,

        /// Comma-separated b0 values.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        b0_values: String,
    },

    /// Show why profiles vanishing at t = 1 admit no second singular orbit
    CompactDemo(RunArgs),

    /// Tabulate and verify a closed-form family (cone, symmetric, bryant_salamon)
    Special(RunArgs),
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("G2C_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("G2C_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

fn print_report(report: &VerificationReport) {
    for c in &report.checks {
        println!(
            "[{}] {:<28} {:>12} (tol {:.0e})  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            format!("{:.3e}", c.residual),
            c.tolerance,
            c.claim
        );
    }
    println!("{}: {}", report.subject, if report.passed { "all checks passed" } else { "checks failed" });
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve(run) => {
            let (cfg, out) = run.resolve(ProfileSpec::Cone)?;
            let s = cmd_solve(&cfg, &out)?;
            let last = s.table.rows.last().expect("table has rows");
            println!("wrote {} ({} rows)", s.table_path.display(), s.table.rows.len());
            println!("wrote {}", s.sidecar_path.display());
            println!(
                "t = {}: D = [{}, {}, {}]",
                fmt_f64(last[0]),
                fmt_f64(last[7]),
                fmt_f64(last[8]),
                fmt_f64(last[9])
            );
            Ok(true)
        }
        Command::Verify { run, table } => {
            let (report, path) = match table {
                Some(t) => cmd_verify_table(&t, run.out.as_deref(), run.tol)?,
                None => {
                    let (cfg, out) = run.resolve(ProfileSpec::Cone)?;
                    cmd_verify(&cfg, &out)?
                }
            };
            print_report(&report);
            println!("wrote {}", path.display());
            Ok(report.passed)
        }
        Command::Sweep { run, b0_values } => {
            let b0s = parse_values(&b0_values)?;
            let threads = threads_from_env()?;
            let (cfg, out) = run.resolve(ProfileSpec::Cone)?;
            cfg.validate()?;
            let (rows, path) = cmd_sweep(&cfg, &b0s, &out, threads)?;
            for r in &rows {
                let status = match (&r.error, r.passed) {
                    (Some(e), _) => format!("ERROR {e}"),
                    (None, true) => "PASS".into(),
                    (None, false) => format!("FAIL {}", r.failed_checks.join(",")),
                };
                println!("run {:03} b0 = {}: ΣD(t_max) = {} {status}", r.index, fmt_f64(r.b0), fmt_f64(r.sum_d()));
            }
            println!("wrote {}", path.display());
            Ok(rows.iter().all(|r| r.passed))
        }
        Command::CompactDemo(run) => {
            let (cfg, out) = run.resolve(ProfileName::Sine.spec())?;
            let (r, path) = cmd_compact_demo(&cfg, &out)?;
            print_report(&r.report);
            for row in &r.blow_up {
                println!("ε = {:<8} B1 = {:.6e}  ΣD = {:.6}", row.eps, row.b[0], row.sum_d);
            }
            println!("verdict: {}", r.verdict);
            println!("wrote {}", path.display());
            Ok(compact_passed(&r))
        }
        Command::Special(run) => {
            let (cfg, out) = run.resolve(ProfileSpec::Cone)?;
            let (s, report, path) = cmd_special(&cfg, &out)?;
            println!("wrote {} ({} rows)", s.table_path.display(), s.table.rows.len());
            print_report(&report);
            println!("wrote {}", path.display());
            Ok(report.passed)
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
