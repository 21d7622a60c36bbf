use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entrel_cli::{load_config, run, CliError, Experiment, ExperimentConfig, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "entrel", version, about = "Run re-partitioning experiments on composite quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output path; `-` writes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List every constraint violation in a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available experiments.
    ListExperiments,
}

fn init_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))
}

fn run_command(config: PathBuf, seed: Option<u64>, output: Option<PathBuf>) -> Result<(), CliError> {
    init_workers()?;
    let mut cfg: ExperimentConfig = load_config(&config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if output.is_some() {
        cfg.output = output;
    }
    let record = run(&cfg)?;
    let text = record.render(cfg.format);
    match cfg.output.as_deref() {
        Some(path) if path.as_os_str() != "-" => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate_command(config: PathBuf) -> Result<(), CliError> {
    let cfg = load_config(&config);
    match &cfg {
        Ok(c) => println!("{}: ok ({}, total dimension {})", config.display(), c.experiment, c.total_dim()),
        Err(CliError::Invalid(v)) => {
            for x in v {
                println!("{x}");
            }
        }
        Err(_) => {}
    }
    cfg.map(|_| ())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, output } => run_command(config, seed, output),
        Command::Validate { config } => validate_command(config),
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<16} {}", e.id(), e.summary());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
