use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mopo_cli::commands;
use mopo_cli::tables::TableFormat;

/// Consulted when --out-dir is not given; the current directory is the
/// final fallback.
const OUT_DIR_ENV: &str = "MOPO_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "mopo",
    version,
    about = "Four-mode amplifier simulator: sweep, re-analyze, and fit figure-ready tables"
)]
struct Cli {
    /// Directory for generated files [env: MOPO_OUT_DIR; default: .]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for cycle generation [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// On-disk format for the figure tables (JSON reports are always JSON)
    #[arg(long, global = true, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the configured sweep; writes fig2..fig5 tables and summary.json
    Sweep {
        /// TOML experiment description
        #[arg(long)]
        config: PathBuf,

        /// Override the seed from the config
        #[arg(long)]
        seed: Option<u64>,

        /// Also persist raw cycle records, one NDJSON file per sweep point
        #[arg(long)]
        save_records: bool,
    },
    /// Recompute an invariant summary from persisted cycle records
    Analyze {
        /// NDJSON cycle records; vacuum cycles are flagged in-line
        records: PathBuf,

        /// Separate vacuum records for calibration [default: vacuum cycles of RECORDS]
        vacuum: Option<PathBuf>,

        /// Bootstrap resamples for standard errors
        #[arg(long, default_value_t = 200)]
        resamples: usize,

        /// Report this gain instead of measuring (a1 + a2)/2
        #[arg(long)]
        gain: Option<f64>,
    },
    /// Fit the gain model to a fig2-format variance table; writes fit.json
    Fit {
        /// CSV with the fig2 schema
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} worker threads: {e}");
            return ExitCode::from(3);
        }
    }

    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let result = match &cli.command {
        Command::Sweep {
            config,
            seed,
            save_records,
        } => commands::sweep(config, *seed, *save_records, &out_dir, cli.format),
        Command::Analyze {
            records,
            vacuum,
            resamples,
            gain,
        } => commands::analyze(records, vacuum.as_deref(), *resamples, *gain, &out_dir),
        Command::Fit { input } => commands::fit(input, &out_dir),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
