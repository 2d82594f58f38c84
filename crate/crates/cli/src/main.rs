//! Command-line verification suites over the built-in differential-geometry
//! models, plus bracket computation at user-given points.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails (or a
//! computation cannot produce a verdict), 2 on usage or configuration
//! errors.

mod report;
mod suite;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use suite::{CliError, Model, RunCfg};

#[derive(Parser)]
#[command(
    name = "liegeom",
    about = "Verification suites for charts, vector fields, brackets, and Lie groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Model to verify: euclidean:<n>, gl:<n> (n in 1..=3), or custom:<path>
    #[arg(long)]
    model: String,

    /// Smoothness probe order (1..=4)
    #[arg(long, default_value_t = 3)]
    order: usize,

    /// Probe points per region
    #[arg(long, default_value_t = 16)]
    samples: usize,

    /// Residual tolerance for every check
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,

    /// Sampling seed (defaults to $LIEGEOM_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,

    /// Output format
    #[arg(long, value_parser = ["text", "json"], default_value = "text")]
    format: String,

    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and print per-check pass/fail lines
    Verify(CommonOpts),
    /// Run the suite and emit the machine-readable JSON report
    Report(CommonOpts),
    /// Compute a Lie bracket at a point from both routes
    Bracket {
        #[command(flatten)]
        common: CommonOpts,

        /// Components of the first field (comma-separated polynomials in x0..)
        #[arg(long = "field-x")]
        field_x: String,

        /// Components of the second field
        #[arg(long = "field-y")]
        field_y: String,

        /// Evaluation point (comma-separated coordinates)
        #[arg(long)]
        point: String,
    },
}

fn effective_seed(opt: &CommonOpts) -> Result<u64, CliError> {
    if let Some(s) = opt.seed {
        return Ok(s);
    }
    match std::env::var("LIEGEOM_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("bad LIEGEOM_SEED value `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn run_cfg(opt: &CommonOpts) -> Result<RunCfg, CliError> {
    let cfg = RunCfg {
        order: opt.order,
        samples: opt.samples,
        tol: opt.tol,
        seed: effective_seed(opt)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit(opt: &CommonOpts, content: &str) -> Result<(), CliError> {
    match &opt.output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Run(format!("stdout: {e}")))?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Verify(opt) => {
            let model = Model::parse(&opt.model)?;
            let cfg = run_cfg(&opt)?;
            let report = suite::run_suite(&model, &cfg)?;
            let mut content = match opt.format.as_str() {
                "json" => report.to_json(),
                _ => report.to_text(),
            };
            if opt.format == "text" && report.passed {
                if let Some(extra) = suite::structure_constants_text(&model, &cfg)? {
                    content.push_str(&extra);
                }
            }
            emit(&opt, &content)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Report(opt) => {
            let model = Model::parse(&opt.model)?;
            let cfg = run_cfg(&opt)?;
            let report = suite::run_suite(&model, &cfg)?;
            emit(&opt, &report.to_json())?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Bracket {
            common,
            field_x,
            field_y,
            point,
        } => {
            let model = Model::parse(&common.model)?;
            let cfg = run_cfg(&common)?;
            let out = suite::run_bracket(&model, &cfg, &field_x, &field_y, &point)?;
            let content = match common.format.as_str() {
                "json" => {
                    let mut s =
                        serde_json::to_string_pretty(&out).expect("bracket output serializes");
                    s.push('\n');
                    s
                }
                _ => {
                    let fmt = |v: &[f64]| {
                        v.iter()
                            .map(|x| format!("{x:+.9e}"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    format!(
                        "point:            [{}]\ncoordinate route: [{}]\nderivation route: [{}]\ndiscrepancy:      {:.3e}\n",
                        fmt(&out.point),
                        fmt(&out.coordinate_route),
                        fmt(&out.derivation_route),
                        out.discrepancy
                    )
                }
            };
            emit(&common, &content)?;
            Ok(0)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
