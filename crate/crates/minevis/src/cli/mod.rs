//! `minevis` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 failed loss check.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::{AppError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "minevis",
    version,
    about = "Low-light mine imagery: enhancement, mask fusion and evaluation"
)]
pub struct Cli {
    /// TOML configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Retinex enhancement of every PNG in a directory.
    Enhance(EnhanceArgs),
    /// Synthetic low-light degradation of every PNG in a directory.
    Degrade(DegradeArgs),
    /// Flag dark, blurred and duplicate frames.
    Filter(FilterArgs),
    /// Perturb ground-truth predictions to stand in for a segmentation model.
    MockSegment(MockArgs),
    /// Fuse two prediction sets (single files or directories paired by image_id).
    Fuse(FuseArgs),
    /// Precision / recall / F1 / mIoU of predictions against ground truth.
    Eval(EvalArgs),
    /// Draw class-coloured mask overlays.
    Render(RenderArgs),
    /// Finite-difference check of every loss gradient.
    LossCheck(LossCheckArgs),
    /// The full pipeline.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, conflicts_with = "target_mean")]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub target_mean: Option<f64>,
    #[arg(long)]
    pub radius: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DegradeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub brightness: Option<f64>,
    #[arg(long)]
    pub contrast: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Move rejected files into this directory.
    #[arg(long)]
    pub move_rejected: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MockArgs {
    /// Ground-truth JSON file or directory.
    #[arg(long)]
    pub gt: PathBuf,
    /// Output JSON file or directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    /// Shift every output mask by this many pixels along x.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift_x: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift_y: i64,
    /// Remove every instance of this class from the output.
    #[arg(long)]
    pub drop_class: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Image PNG, or a directory of them.
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub pred_a: PathBuf,
    #[arg(long)]
    pub pred_b: PathBuf,
    /// Output JSON, or a directory in batch mode.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the alignment / pairing report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub keep_unmatched: bool,
    /// Skip alignment and intersect in place.
    #[arg(long)]
    pub no_align: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-class CSV; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub iou: Option<f64>,
    #[arg(long)]
    pub merge_surrounding: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LossCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    pub pred_a: Option<PathBuf>,
    #[arg(long)]
    pub pred_b: Option<PathBuf>,
    #[arg(long)]
    pub filter: bool,
    #[arg(long)]
    pub no_enhance: bool,
    #[arg(long)]
    pub no_overlays: bool,
    #[arg(long)]
    pub keep_unmatched: bool,
    #[arg(long)]
    pub no_align: bool,
}

/// What a command reports back besides errors.
pub enum Outcome {
    Success,
    CheckFailed,
}

impl Cli {
    fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::load_or_default(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        Ok(cfg)
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let level = if cli.verbose { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let result = cli.pipeline_config().and_then(|cfg| commands::dispatch(&cli, cfg));
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::CheckFailed) => 3,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run_with_args(std::env::args_os()))
}

pub(crate) fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}
