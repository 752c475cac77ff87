use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ppstat_cli::{run, CliError, Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Generate,
    Match,
    Percolate,
    Diagnose,
    Palm,
    Plot,
}

/// Point-process experiments from JSON configs.
#[derive(Debug, Parser)]
#[command(name = "ppstat", version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output`, then `ppstat-out/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replicate-level parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Multiplier applied to every replicate count.
    #[arg(long, default_value_t = 1.0)]
    reps_scale: f64,
}

fn execute(args: &Args) -> Result<PathBuf, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut config = Config::parse(&text)?;
    let wanted = args.command.to_possible_value().expect("named").get_name().to_string();
    if config.command() != wanted {
        return Err(CliError::Schema(format!(
            "config is for `{}`, not `{wanted}`",
            config.command()
        )));
    }
    if !(args.reps_scale > 0.0 && args.reps_scale.is_finite()) {
        return Err(CliError::Schema(format!("--reps-scale {}", args.reps_scale)));
    }
    if let Ok(seed) = std::env::var("PPSTAT_SEED") {
        let seed = seed
            .trim()
            .parse()
            .map_err(|_| CliError::Schema(format!("PPSTAT_SEED {seed:?} is not an unsigned integer")))?;
        config.override_seed(seed);
    }
    config.scale_reps(args.reps_scale);
    if let Some(n) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Schema(format!("--workers: {e}")))?;
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let out = args
        .out
        .clone()
        .or_else(|| config.output().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from("ppstat-out").join(config.command()));
    run(&config, &out, base)?;
    Ok(out)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("ppstat: error[schema]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match execute(&args) {
        Ok(out) => {
            println!("{}", out.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
