//! `gender-trends`: name-based gender inference and authorship trend
//! analysis over the SSA baby-names corpus.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gender_trends::inference::CountingMode;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "gender-trends", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command. Each one overrides the matching key of
/// the config file, which in turn overrides the built-in default.
#[derive(Debug, Args)]
struct GlobalArgs {
    /// Directory of yobYYYY.txt files
    #[arg(long, global = true, value_name = "DIR")]
    ssa_dir: Option<PathBuf>,
    /// JSON config file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Where outputs are written [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Years subtracted from the publication year to get the lookup year
    #[arg(long, global = true, allow_negative_numbers = true)]
    shift: Option<i32>,
    #[arg(long, global = true)]
    mode: Option<ModeArg>,
    /// p(F) at or above which a name counts as female [default: 0.5]
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Half-width of the ambiguity band around the threshold
    #[arg(long, global = true)]
    band: Option<f64>,
    /// Lookup-year smoothing half-window
    #[arg(long, global = true)]
    window: Option<u32>,
    /// CSV of verified identifications (full_name,gender,provenance[,affiliation])
    #[arg(long, global = true, value_name = "FILE")]
    overrides: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Expected,
    Threshold,
}

impl From<ModeArg> for CountingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Expected => CountingMode::ExpectedValue,
            ModeArg::Threshold => CountingMode::Threshold,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the SSA corpus and report years, gaps and row counts
    IngestSsa {
        /// Also print one year's table as JSON
        #[arg(long, value_name = "YEAR")]
        dump: Option<i32>,
    },
    /// Estimate p(F) for one name at one publication year
    Lookup {
        name: String,
        publication_year: i32,
        #[arg(long)]
        json: bool,
    },
    /// Pick the year shift that best matches labeled subgroups
    Calibrate {
        /// Labeled CSV files (given_name,publication_year,gender), one per subgroup
        #[arg(long, num_args = 1.., value_name = "FILE")]
        labeled: Vec<PathBuf>,
        /// Comma-separated candidate shifts
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<i32>>,
    },
    /// Build cohorts, fit trends and write figure data
    Analyze {
        /// Authorship CSV (group_id,year,article_id,author_full_name,author_stable_id)
        #[arg(long, value_name = "FILE")]
        authorship: Option<PathBuf>,
        /// Also write SVG charts
        #[arg(long)]
        svg: bool,
    },
    /// Write a synthetic corpus, labeled subgroups and authorship fixture
    Synth(commands::SynthArgs),
}

impl GlobalArgs {
    fn as_config(&self) -> RunConfig {
        RunConfig {
            ssa_dir: self.ssa_dir.clone(),
            overrides_csv: self.overrides.clone(),
            year_shift: self.shift,
            mode: self.mode.map(Into::into),
            threshold: self.threshold,
            ambiguity_band: self.band,
            smoothing_window: self.window,
            output_dir: self.output_dir.clone(),
            ..RunConfig::default()
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = cli.global.as_config();
    match cli.command {
        Command::IngestSsa { dump } => commands::ingest(&cfg.or(file), dump),
        Command::Lookup {
            name,
            publication_year,
            json,
        } => commands::lookup(&cfg.or(file), &name, publication_year, json),
        Command::Calibrate { labeled, grid } => {
            cfg.labeled_subgroups = labeled;
            cfg.grid = grid;
            commands::calibrate(&cfg.or(file))
        }
        Command::Analyze { authorship, svg } => {
            cfg.authorship_csv = authorship;
            cfg.svg = svg.then_some(true);
            commands::analyze(&cfg.or(file))
        }
        Command::Synth(args) => commands::synth(&args),
    }
}
