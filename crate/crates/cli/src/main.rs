use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toa_core::scenario::{builtin, compare_files, Scenario, BUILTIN};
use toa_core::{Error, ErrorClass};

/// Scenario runner for time-of-arrival and transition-time distributions.
#[derive(Parser)]
#[command(name = "toa-lab", version)]
struct Cli {
    /// Worker threads for internal parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplies every structural tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a built-in scenario by name).
    Run {
        config: String,
        /// Output directory; overrides the scenario's own.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two CSV artifacts sampled on the same grid.
    Compare { a: PathBuf, b: PathBuf },
    /// Check a scenario without computing anything.
    Validate { config: String },
    /// List the built-in scenarios.
    ListScenarios,
}

fn load(config: &str) -> Result<Scenario, Error> {
    let path = Path::new(config);
    if path.exists() {
        return Scenario::load(path);
    }
    builtin(config).ok_or_else(|| {
        Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{config}: no such file or built-in scenario"),
        ))
    })
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let s = load(&config)?.validate_with_scale(cli.tolerance_scale)?;
            let summary = s.run(out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Compare { a, b } => {
            let c = compare_files(&a, &b)?;
            println!("{}", serde_json::to_string_pretty(&c)?);
        }
        Command::Validate { config } => {
            let s = load(&config)?.validate_with_scale(cli.tolerance_scale)?;
            println!("{}: ok", s.name);
        }
        Command::ListScenarios => {
            for (name, text) in BUILTIN {
                let s = Scenario::from_json(text)?;
                let kind = serde_json::to_value(s.kind)?;
                println!(
                    "{name}\t{}\t{}",
                    kind.as_str().unwrap_or_default(),
                    s.description.unwrap_or_default()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (label, code) = match e.class() {
                ErrorClass::Validation => ("validation", 2),
                ErrorClass::Numerical => ("numerical", 3),
                ErrorClass::Io => ("io", 4),
            };
            eprintln!("error ({label}): {e}");
            ExitCode::from(code)
        }
    }
}
