use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ncresidue_core::config::{OutputFormat, Overrides, ResolvedSettings};
use ncresidue_core::error::Error;
use ncresidue_core::report::Report;
use ncresidue_core::verify::{run_suite, Suite, VerifyOptions};

/// Noncommutative residues computed three ways, with verification suites.
#[derive(Parser)]
#[command(name = "ncresidue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute residues for the operator described in a spec file.
    Residue {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run an invariant suite over the built-in catalog.
    Verify {
        #[arg(value_parser = ["ft", "cocycle", "conv", "equivalence", "all"])]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Same as `verify ft`.
    FtCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Same as `verify cocycle`.
    Cocycle {
        #[command(flatten)]
        common: Common,
    },
    /// Same as `verify conv`.
    ConvCheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["json", "csv", "text"])]
    format: Option<String>,
    /// Tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated scales, e.g. 0.5,2,3.
    #[arg(long, value_delimiter = ',')]
    s_set: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_SPEC_ERROR: u8 = 2;

fn emit(report: &Report, format: OutputFormat, out: Option<&PathBuf>) -> Result<(), String> {
    let text = report.render(format).map_err(|e| e.to_string())?;
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn setup_threads(common: &Common) -> Result<(), String> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("cannot set up {n} threads: {e}"))?;
    }
    Ok(())
}

fn format_of(common: &Common) -> Option<OutputFormat> {
    common.format.as_deref().map(|f| f.parse().expect("clap restricts the format"))
}

fn residue(spec: &PathBuf, common: &Common) -> ExitCode {
    let text = match fs::read_to_string(spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", spec.display());
            return ExitCode::from(EXIT_SPEC_ERROR);
        }
    };
    let overrides = Overrides {
        tol: common.tol,
        s_set: common.s_set.clone(),
        seed: common.seed,
        format: format_of(common),
    };
    let settings = match ResolvedSettings::from_toml(&text, &spec.display().to_string(), &overrides) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SPEC_ERROR);
        }
    };
    let report = match Report::residue(&settings) {
        Ok(r) => r,
        Err(e @ (Error::Parse { .. } | Error::UnknownTerm(_) | Error::DimensionMismatch { .. })) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SPEC_ERROR);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CHECK_FAILED);
        }
    };
    if let Err(e) = emit(&report, settings.format, common.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CHECK_FAILED);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn verify(suite: Suite, common: &Common) -> ExitCode {
    let mut opts = VerifyOptions {
        tol: common.tol,
        ..Default::default()
    };
    if let Some(seed) = common.seed {
        opts.seed = seed;
    }
    let start = Instant::now();
    let checks = run_suite(suite, &opts);
    let report = Report::verification(checks, start.elapsed().as_secs_f64());
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("{c}");
    }
    if let Err(e) = emit(&report, format_of(common).unwrap_or(OutputFormat::Text), common.out.as_ref()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CHECK_FAILED);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Residue { common, .. }
        | Command::Verify { common, .. }
        | Command::FtCheck { common }
        | Command::Cocycle { common }
        | Command::ConvCheck { common } => common,
    };
    if let Err(e) = setup_threads(common) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_SPEC_ERROR);
    }
    if common.s_set.is_some() && !matches!(cli.command, Command::Residue { .. }) {
        eprintln!("warning: --s-set only affects the residue command");
    }
    match &cli.command {
        Command::Residue { spec, common } => residue(spec, common),
        Command::Verify { suite, common } => verify(suite.parse().expect("clap restricts the suite"), common),
        Command::FtCheck { common } => verify(Suite::Ft, common),
        Command::Cocycle { common } => verify(Suite::Cocycle, common),
        Command::ConvCheck { common } => verify(Suite::Conv, common),
    }
}
