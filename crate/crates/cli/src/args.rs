use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchwork_core::disrupt::Method;
use patchwork_core::episodic::Metric;
use patchwork_core::vit::{Pooling, ViTConfig};

#[derive(Debug, Parser)]
#[command(name = "patchwork", version, about = "Token-continuity disruption and analysis runs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for per-image work; 0 picks the core count.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Text file of `key = value` lines supplying flags not given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random weight file.
    Init(InitArgs),
    /// Disrupt every image under a directory.
    Disrupt(DisruptArgs),
    /// Extract one feature row per image.
    Features(FeaturesArgs),
    /// Linear CKA between two feature sets.
    Cka(CkaArgs),
    /// CKA and feature shift across pseudo-patch grid shuffles.
    Sweep(SweepArgs),
    /// Prototype-based few-shot evaluation.
    Eval(EvalArgs),
    /// Class-token attention heatmaps.
    Attn(AttnArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InitArgs {
    #[arg(long, default_value_t = 16)]
    pub patch_size: usize,
    #[arg(long, default_value_t = 64)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 4)]
    pub heads: usize,
    #[arg(long, default_value_t = 4.0)]
    pub mlp_ratio: f64,
    #[arg(long, default_value_t = 196)]
    pub num_patches: usize,
    #[arg(long, default_value_t = 3)]
    pub channels: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub use_pos: bool,
}

impl InitArgs {
    pub fn config(&self) -> ViTConfig {
        ViTConfig {
            patch_size: self.patch_size,
            embed_dim: self.embed_dim,
            depth: self.depth,
            num_heads: self.heads,
            mlp_ratio: self.mlp_ratio,
            num_patches: self.num_patches,
            channels: self.channels,
            use_pos_embed: self.use_pos,
            ..ViTConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Shuffle patches.
    Sp,
    /// Shuffle patch amplitude spectra.
    Spa,
    /// Shuffle patch phase spectra.
    Spp,
    /// Pseudo-patch shuffle on the grid given by --grid.
    Grid,
    /// Pseudo-patch shuffle on a random grid, after resizing to --input-side.
    Warmup,
    /// Clustered amplitude resampling.
    Balanced,
    /// Warm-up or balanced depending on --epoch.
    Pipeline,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Sp => "sp",
            MethodArg::Spa => "spa",
            MethodArg::Spp => "spp",
            MethodArg::Grid => "grid",
            MethodArg::Warmup => "warmup",
            MethodArg::Balanced => "balanced",
            MethodArg::Pipeline => "pipeline",
        }
    }

    pub fn core(self) -> Method {
        match self {
            MethodArg::Sp | MethodArg::Grid => Method::ShufflePatches,
            MethodArg::Spa => Method::ShuffleAmplitude,
            MethodArg::Spp => Method::ShufflePhase,
            MethodArg::Warmup => Method::Warmup,
            MethodArg::Balanced => Method::Balanced,
            MethodArg::Pipeline => Method::Pipeline,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DisruptArgs {
    /// Image file or directory tree.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Pseudo-patch grid side for `--method grid`.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub epoch: usize,
    #[arg(long, default_value_t = 10)]
    pub warmup_epochs: usize,
    #[arg(long, default_value_t = 50)]
    pub total_epochs: usize,
    /// Comma-separated pseudo-patch grid sides for the warm-up stage.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,7,8,14")]
    pub grids: Vec<usize>,
    /// Token grid side used by sp, spa, spp and balanced.
    #[arg(long, default_value_t = 14)]
    pub patch_grid: usize,
    /// Resize target for warmup and pipeline, and for images that do not
    /// divide the token grid.
    #[arg(long, default_value_t = 224)]
    pub input_side: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolingArg {
    Cls,
    Mean,
}

impl PoolingArg {
    pub fn name(self) -> &'static str {
        match self {
            PoolingArg::Cls => "cls",
            PoolingArg::Mean => "mean",
        }
    }

    pub fn core(self) -> Pooling {
        match self {
            PoolingArg::Cls => Pooling::ClassToken,
            PoolingArg::Mean => Pooling::MeanPatch,
        }
    }
}

/// Backbone options shared by every command that runs the encoder.
#[derive(Debug, Clone, Args)]
pub struct BackboneArgs {
    /// `VITW1` weight file.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PoolingArg::Cls)]
    pub pooling: PoolingArg,
    /// Override the positional-embedding flag stored in the weight file.
    #[arg(long, action = clap::ArgAction::Set)]
    pub use_pos: Option<bool>,
}

#[derive(Debug, Clone, Args)]
pub struct FeaturesArgs {
    /// Image file or dataset directory.
    pub input: PathBuf,
    #[command(flatten)]
    pub backbone: BackboneArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CkaArgs {
    /// Feature file or image directory.
    pub a: PathBuf,
    /// Feature file or image directory.
    pub b: PathBuf,
    #[command(flatten)]
    pub backbone: BackboneArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Image directory to shuffle.
    pub input: PathBuf,
    /// Reference image directory; defaults to the input.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,7,8,14")]
    pub grids: Vec<usize>,
    #[command(flatten)]
    pub backbone: BackboneArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Cosine,
}

impl MetricArg {
    pub fn name(self) -> &'static str {
        match self {
            MetricArg::Euclidean => "euclidean",
            MetricArg::Cosine => "cosine",
        }
    }

    pub fn core(self) -> Metric {
        match self {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Cosine => Metric::CosineDistance,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Feature file or dataset directory (`<root>/<class>/<images>`).
    pub input: PathBuf,
    /// Label file for a feature file; defaults to the sibling `.labels` file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub way: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub shot: u64,
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u64).range(1..))]
    pub query: u64,
    #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
    pub episodes: u64,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    #[command(flatten)]
    pub backbone: BackboneArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AttnArgs {
    /// Image file or directory tree.
    pub input: PathBuf,
    /// Encoder block whose attention is drawn.
    #[arg(long, default_value_t = 0)]
    pub block: usize,
    #[command(flatten)]
    pub backbone: BackboneArgs,
}
