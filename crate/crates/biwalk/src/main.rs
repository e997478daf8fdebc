use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use biwalk::commands::{self, Overrides};
use biwalk::error::exit;
use biwalk::validate::{run_suite, Fault, SuiteOptions};
use biwalk::{CliError, ExperimentConfig, RayonExecutor};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Biphoton transport in nonlinear waveguide arrays.
///
/// Exit codes: 0 success, 2 bad arguments or z grid, 3 config error,
/// 4 numerical failure, 5 I/O failure, 6 validation failure.
#[derive(Parser)]
#[command(name = "biwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (TOML).
    config: PathBuf,

    /// Directory for result files.
    #[arg(long, env = "BIWALK_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads; 0 uses every logical CPU. Never changes results.
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Overrides disorder.seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Overrides disorder.realizations.
    #[arg(long)]
    realizations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SignFlip,
}

#[derive(Subcommand)]
enum Command {
    /// sigma, gamma and transitions of one array: series.csv, distributions.csv, transitions.json
    Propagate(RunArgs),
    /// Disorder-averaged sigma: ensemble.csv, meta.json
    Ensemble(RunArgs),
    /// Superballistic presence over (kappa_c, kappa_beta): regime_map.csv
    RegimeMap(RunArgs),
    /// sigma_mean at fixed z against disorder strength: kappa_sweep.csv
    SigmaVsKappa(RunArgs),
    /// gamma for every pump position: border_scan.csv, border_onsets.csv
    BorderScan(RunArgs),
    /// Runs the oracle and invariant checks; exits 6 if any fails
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Randomized arrays compared against RK4.
        #[arg(long, default_value_t = 50)]
        rk4_configs: usize,
        /// Corrupts the eigenvectors to demonstrate a failing run.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

type Runner =
    fn(&ExperimentConfig, &RayonExecutor, &std::path::Path) -> Result<Vec<PathBuf>, CliError>;

fn run_experiment(args: RunArgs, runner: Runner) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    Overrides {
        seed: args.seed,
        realizations: args.realizations,
    }
    .apply(&mut cfg);
    let exec = RayonExecutor::new(args.threads).map_err(|e| CliError::Usage(e.to_string()))?;
    let start = Instant::now();
    let written = runner(&cfg, &exec, &args.out_dir)?;
    for path in written {
        println!("{}", path.display());
    }
    eprintln!(
        "done in {:.2} s on {} thread(s)",
        start.elapsed().as_secs_f64(),
        exec.threads()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Propagate(a) => run_experiment(a, commands::propagate),
        Command::Ensemble(a) => run_experiment(a, commands::ensemble),
        Command::RegimeMap(a) => run_experiment(a, commands::regime),
        Command::SigmaVsKappa(a) => run_experiment(a, commands::kappa_sweep),
        Command::BorderScan(a) => run_experiment(a, commands::border_scan),
        Command::Validate {
            seed,
            rk4_configs,
            inject_fault,
        } => {
            let opts = SuiteOptions {
                seed,
                rk4_configs,
                fault: inject_fault.map(|FaultArg::SignFlip| Fault::SignFlip),
                ..SuiteOptions::default()
            };
            let outcomes = run_suite(&opts);
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                return Err(CliError::Validation { failed });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("biwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
