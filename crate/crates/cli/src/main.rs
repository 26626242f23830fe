use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use selfguided::harness::{self, presets, CheckOutcome, ExperimentConfig};
use selfguided::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

/// Run self-guided reconstruction experiments.
#[derive(Parser)]
#[command(name = "selfguided", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or built-in preset.
    Run(RunArgs),
    /// Run the (alpha, beta) grid of a config's [sweep] table.
    Sweep(RunArgs),
    /// Inspect built-in presets.
    #[command(subcommand)]
    Presets(PresetsCommand),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a TOML config, or the name of a built-in preset.
    config: String,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core). Never changes results.
    #[arg(long, short = 'j', default_value_t = 0)]
    jobs: usize,
    /// Output directory [default: the config's `output`, else results/<preset>].
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PresetsCommand {
    /// List preset names with a one-line description.
    List,
    /// Print a preset's config file.
    Show { name: String },
}

enum Failure {
    Config(String),
    Runtime(String),
    Assertion,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let path = Path::new(&args.config);
    let mut config = if path.is_file() {
        ExperimentConfig::load(path)?
    } else if args.config.ends_with(".toml") {
        return Err(Failure::Config(format!("config file {} not found", path.display())));
    } else {
        presets::load(&args.config)?
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn output_dir(args: &RunArgs, config: &ExperimentConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| Path::new("results").join(&config.preset))
}

fn report_checks(checks: &[CheckOutcome]) -> bool {
    for c in checks {
        let value = c.value.map(|v| format!(" (value {v:e})")).unwrap_or_default();
        println!("{} {}{}", if c.passed { "PASS" } else { "FAIL" }, c.description, value);
    }
    checks.iter().all(|c| c.passed)
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let config = load(args)?;
    let out = output_dir(args, &config);
    let result = harness::run_experiment(&config, args.jobs)?;
    harness::write_experiment(&result, &out)?;
    println!("{} [{}] -> {}", config.preset, result.config_hash, out.display());
    for arm in &result.arms {
        let last = arm.curve.final_point().expect("non-empty curve");
        print!("  {:<20} final mean {:.6} (se {:.2e}, n {})", arm.label, last.mean, last.se, last.n);
        match arm.skipped_iterations() {
            0 => println!(),
            n => println!(", {n} iterations skipped on zero counts"),
        }
    }
    if report_checks(&result.checks) {
        Ok(())
    } else {
        Err(Failure::Assertion)
    }
}

fn sweep(args: &RunArgs) -> Result<(), Failure> {
    let config = load(args)?;
    let grid = config
        .sweep
        .clone()
        .ok_or_else(|| Failure::Config(format!("config `{}` has no [sweep] table", config.preset)))?;
    let out = output_dir(args, &config);
    let result = harness::grid_sweep(&config, &grid.alphas, &grid.betas, args.jobs)?;
    harness::write_sweep(&result, &out)?;
    println!("{} [{}] -> {}", config.preset, result.config_hash, out.display());
    for cell in &result.best {
        println!(
            "  best {:<15} alpha {} beta {}: final mean {:.6} (se {:.2e})",
            cell.arm, cell.alpha, cell.beta, cell.final_mean, cell.final_se
        );
    }
    if report_checks(&result.checks) {
        Ok(())
    } else {
        Err(Failure::Assertion)
    }
}

fn list_presets() -> Result<(), Failure> {
    for name in presets::names() {
        println!("{name:<22} {}", presets::description(name)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Presets(PresetsCommand::List) => list_presets(),
        Command::Presets(PresetsCommand::Show { name }) => presets::source(name).map(|s| print!("{s}")).map_err(Failure::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::Assertion) => {
            eprintln!("error: one or more assertions failed");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
