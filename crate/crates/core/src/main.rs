use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::json;

use sconcave::harness::{load_config, run, Command};
use sconcave::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    VerifyGeometry,
    RunAl,
    RunBaum,
    EstimateCoefficient,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifyGeometry => Command::VerifyGeometry,
            Cmd::RunAl => Command::RunAl,
            Cmd::RunBaum => Command::RunBaum,
            Cmd::EstimateCoefficient => Command::EstimateCoefficient,
        }
    }
}

/// Geometry checks and label-complexity experiments for s-concave
/// distributions. SCONCAVE_THREADS caps the worker count.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    command: Cmd,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Replaces the config's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn error_report(e: &Error) -> String {
    let kind = match e {
        Error::Regime { .. } => "regime",
        Error::Precondition { .. } => "precondition",
        Error::Config(_) => "config",
        Error::Json(_) => "parse",
        Error::Io(_) => "io",
        _ => "runtime",
    };
    let violations = match e {
        Error::Config(v) => v.clone(),
        _ => Vec::new(),
    };
    json!({ "error": kind, "message": e.to_string(), "violations": violations }).to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("SCONCAVE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let result = std::fs::read_to_string(&cli.config).map_err(Error::from).and_then(|text| {
        let mut cfg = load_config(&text)?;
        let wanted = Command::from(cli.command);
        if cfg.command != wanted {
            return Err(Error::Config(vec![format!(
                "config is for {} but {} was invoked",
                cfg.command.name(),
                wanted.name()
            )]));
        }
        if let Some(seed) = cli.seed {
            cfg.seeds = vec![seed];
        }
        if let Some(out) = cli.out {
            cfg.out = out;
        }
        let outcome = run(&cfg)?;
        println!("{}", outcome.verdict_line(cfg.command));
        Ok(outcome.failed())
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_report(&e));
            ExitCode::from(2)
        }
    }
}
