//! `mpg`: solve mean payoff games, enumerate their extremal progress measures,
//! tabulate truncated games, and cross-check everything against brute force.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "mpg", version, about = "Mean payoff game solver")]
struct Cli {
    /// Worker threads for oracle evaluation and value probes (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Tsv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Plain,
    Min,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Values, per-class least progress measures, and one optimal strategy.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Stream the extremal progress measures and basic subgames of each value
    /// class, then the partition of the optimal strategies.
    Enum {
        file: PathBuf,
        /// Strategies to list per block (counts are always exact).
        #[arg(long, default_value_t = 0)]
        list_strategies: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Truncated total-payoff values for horizons 0..=k.
    Ttpg {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Variant::Plain)]
        variant: Variant,
        /// Run the min variant until it reproduces the least progress measure.
        #[arg(long)]
        fixpoint: bool,
        /// Reweight by the arena's common value first (implied by --fixpoint).
        #[arg(long)]
        shift: bool,
        #[arg(long, value_enum, default_value_t = TableFormat::Tsv)]
        format: TableFormat,
    },
    /// Check the solver against exhaustive enumeration.
    Verify {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        file: Option<PathBuf>,
        /// Generate COUNT arenas with N vertices, out-degree at most M, weights
        /// in [-W, W], seeds SEED, SEED+1, ...
        #[arg(long, num_args = 5, value_names = ["N", "M", "W", "SEED", "COUNT"])]
        random: Option<Vec<u64>>,
        /// Largest strategy product the oracle may enumerate.
        #[arg(long, default_value_t = 1_000_000)]
        max_strategies: u128,
        /// Directory for reproducer files of failing arenas.
        #[arg(long, default_value = ".")]
        reproducer_dir: PathBuf,
    },
}

fn init_logging() {
    let level = match std::env::var("MPG_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let parallel = cli.jobs > 1;
    if parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Solve { file, format } => commands::solve(&file, format, parallel),
        Command::Enum {
            file,
            list_strategies,
            format,
        } => commands::enumerate(&file, list_strategies, format, parallel),
        Command::Ttpg {
            file,
            k,
            variant,
            fixpoint,
            shift,
            format,
        } => commands::ttpg(&file, k, variant, fixpoint, shift, format, parallel),
        Command::Verify {
            file,
            random,
            max_strategies,
            reproducer_dir,
        } => commands::verify(file.as_deref(), random.as_deref(), max_strategies, &reproducer_dir, parallel),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mpg: {e}");
            ExitCode::from(e.code())
        }
    }
}
