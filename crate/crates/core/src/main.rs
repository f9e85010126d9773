use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dca::experiment::{run_experiment, ExperimentConfig, Mode};

/// Differentiable cellular automata: simulate, interpolate, check gradients and train rules.
#[derive(Parser)]
#[command(name = "dca", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the space-time diagram of a rule.
    Simulate(RunArgs),
    /// Train rule weights by gradient descent.
    Train(RunArgs),
    /// Compare propagated gradients with finite differences.
    Gradcheck(RunArgs),
    /// Render one diagram per alpha of an interpolation table.
    Interpolate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override `steps`.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the root `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `output.dir`.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (mode, args) = match cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Train(a) => (Mode::Train, a),
        Command::Gradcheck(a) => (Mode::Gradcheck, a),
        Command::Interpolate(a) => (Mode::Interpolate, a),
    };

    let mut config = match ExperimentConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    config.apply_overrides(args.steps, args.seed, args.out_dir);
    if let Err(e) = config.validate_for(mode) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_VALIDATION);
    }

    let base_dir = args.config.parent().map(PathBuf::from).unwrap_or_default();
    match run_experiment(&config, &base_dir) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for path in &report.outputs {
                println!("wrote {}", path.display());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION })
        }
    }
}
