use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use invbq_cli::{results::format_float, CliError};

#[derive(Parser)]
#[command(
    name = "invbq",
    version,
    about = "Invariant Bayesian quadrature experiments"
)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Added to every seed in the config.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the grid described by a config file and write its result CSV.
    Run { config: PathBuf },
    /// Mean and standard deviation across seeds of one or more result files.
    Summarize {
        #[arg(required = true)]
        patterns: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the reference integral of a test function.
    Oracle {
        function: String,
        /// `default`, `box:LO,HI` or `gaussian:MEAN,VARIANCE`.
        #[arg(default_value = "default")]
        measure: String,
        /// Test-function parameter override, `name=value`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config } => {
            let out = invbq_cli::run(&config, cli.seed_offset)?;
            println!("{}", out.display());
        }
        Command::Summarize { patterns, output } => {
            let files = invbq_cli::expand_patterns(&patterns)?;
            let n = invbq_cli::summarize_files(&files, &output)?;
            log::info!("{n} summary rows from {} files", files.len());
            println!("{}", output.display());
        }
        Command::Oracle {
            function,
            measure,
            params,
            rel_tol,
        } => println!(
            "{}",
            format_float(invbq_cli::oracle(&function, &measure, &params, rel_tol)?)
        ),
    }
    Ok(())
}
