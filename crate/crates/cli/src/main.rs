// SPDX-License-Identifier: MIT OR Apache-2.0

//! `actiscope` command-line tool.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use actiscope::features::GroupFilter;
use actiscope::ingest::InputFormat;
use actiscope::model::Target;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Debug)]
pub enum AppError {
    Core(actiscope::Error),
    /// Bad invocation or configuration.
    Usage(String),
    Internal(String),
}

impl From<actiscope::Error> for AppError {
    fn from(e: actiscope::Error) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(e) => e.exit_code() as u8,
            AppError::Usage(_) => 2,
            AppError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Usage(m) | AppError::Internal(m) => f.write_str(m),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "actiscope", version, about = "Actigraphy segmentation, feature extraction and KNN evaluation")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// JSON run configuration; see `actiscope config init`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Write one SVG plot per participant (segment).
    #[arg(long, global = true)]
    svg: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for synthesis and holdout splits (overrides config).
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Feature group used by evaluate, select and correlate.
    #[arg(long, global = true, value_enum)]
    group: Option<GroupArg>,
    /// Classification target: binary FA or four-class SC.
    #[arg(long, global = true, value_enum)]
    target: Option<TargetArg>,
    /// Actigram CSV (overrides `inputs.actigram`).
    #[arg(long, global = true, value_name = "PATH")]
    actigram: Option<PathBuf>,
    /// Actigram layout (overrides `inputs.format`).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Subject CSV (overrides `inputs.subjects`).
    #[arg(long, global = true, value_name = "PATH")]
    subjects: Option<PathBuf>,
    /// Precomputed feature CSV (overrides `inputs.features`).
    #[arg(long, global = true, value_name = "PATH")]
    features: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GroupArg {
    Activity,
    Rest,
    Both,
    Subjective,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TargetArg {
    Fa,
    Sc,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Minute,
    Raw,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic cohort (actigram, subjects, ground-truth segments).
    Synth,
    /// Validate and normalize input files into minute-binned CSVs.
    Ingest,
    /// Segment every participant into activity and rest periods.
    Segment,
    /// Extract the actimetric feature matrix.
    Features,
    /// Pooled leave-one-out evaluation of the KNN classifier.
    Evaluate {
        /// Run feature selection first and evaluate the chosen subset.
        #[arg(long)]
        select: bool,
        /// Pick k from `model.k_grid` by pooled MCC.
        #[arg(long)]
        sweep_k: bool,
    },
    /// Feature-subset search.
    Select,
    /// Pearson correlations between features and questionnaire scores.
    Correlate,
    /// Metrics for a confusion matrix given as JSON.
    Metrics {
        /// JSON file with `counts` (rows actual, columns predicted) and
        /// optional `labels`.
        input: PathBuf,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand, Debug)]
enum ConfigAction {
    /// Print the default configuration as JSON.
    Init,
}

fn resolve(global: &GlobalOpts) -> Result<RunConfig, AppError> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &global.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = global.seed {
        cfg.synth.seed = seed;
        cfg.selection.seed = seed;
    }
    if let Some(g) = global.group {
        cfg.selection.group = match g {
            GroupArg::Activity => GroupFilter::Activity,
            GroupArg::Rest => GroupFilter::Rest,
            GroupArg::Both => GroupFilter::Both,
            GroupArg::Subjective => GroupFilter::Subjective,
            GroupArg::All => GroupFilter::All,
        };
    }
    if let Some(t) = global.target {
        cfg.model.target = match t {
            TargetArg::Fa => Target::Fa,
            TargetArg::Sc => Target::Sc,
        };
    }
    if let Some(f) = global.format {
        cfg.inputs.format = match f {
            FormatArg::Minute => InputFormat::Minute,
            FormatArg::Raw => InputFormat::Raw,
        };
    }
    for (flag, slot) in [
        (&global.actigram, &mut cfg.inputs.actigram),
        (&global.subjects, &mut cfg.inputs.subjects),
        (&global.features, &mut cfg.inputs.features),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), AppError> {
    if let Command::Config {
        action: ConfigAction::Init,
    } = cli.command
    {
        println!("{}", RunConfig::default().to_json());
        return Ok(());
    }
    let cfg = resolve(&cli.global)?;
    let _ = env_logger::Builder::new()
        .parse_filters(&cfg.log_level)
        .format_timestamp(None)
        .try_init();
    if let Some(n) = cli.global.jobs {
        if n == 0 {
            return Err(AppError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| AppError::Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Synth => commands::synth(&cfg),
        Command::Ingest => commands::ingest(&cfg),
        Command::Segment => commands::segment(&cfg, cli.global.svg),
        Command::Features => commands::features(&cfg),
        Command::Evaluate { select, sweep_k } => commands::evaluate(&cfg, select, sweep_k),
        Command::Select => commands::select(&cfg),
        Command::Correlate => commands::correlate(&cfg),
        Command::Metrics { input } => commands::metrics(&cfg, &input),
        Command::Config { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
