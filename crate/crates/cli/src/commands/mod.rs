//! Subcommand implementations. Per-image work runs on a rayon pool sized by
//! `--threads`; results are collected in input order and every random
//! stream is keyed by the seed and image index, so outputs do not depend on
//! the thread count.

mod attn;
mod cka;
mod disrupt;
mod eval;
mod features;
mod init;
mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use patchwork_core::simlab::FeatureMatrix;
use patchwork_core::vit::{extract_feature, ViTConfig, ViTWeights};
use patchwork_core::Image;
use rayon::prelude::*;

use crate::args::{BackboneArgs, Cli, Command, Common};
use crate::dataset::ImageEntry;
use crate::formats::{load_image, read_weights};
use crate::usage;

pub fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads)
        .build()
        .context("starting worker threads")?;
    let common = cli.common;
    pool.install(|| match cli.command {
        Command::Init(a) => init::run(&common, &a),
        Command::Disrupt(a) => disrupt::run(&common, &a),
        Command::Features(a) => features::run(&common, &a),
        Command::Cka(a) => cka::run(&common, &a),
        Command::Sweep(a) => sweep::run(&common, &a),
        Command::Eval(a) => eval::run(&common, &a),
        Command::Attn(a) => attn::run(&common, &a),
    })
}

pub(crate) fn require_out<'a>(common: &'a Common, what: &str) -> anyhow::Result<&'a Path> {
    common
        .out
        .as_deref()
        .ok_or_else(|| usage(format!("--out <{what}> is required")))
}

/// Writes to `--out` when given, stdout otherwise.
pub(crate) fn emit(common: &Common, text: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn load_all(entries: &[ImageEntry]) -> anyhow::Result<Vec<Image>> {
    entries
        .par_iter()
        .map(|e| load_image(&e.path).map_err(anyhow::Error::from))
        .collect()
}

/// A loaded weight file plus the runtime flags used for extraction.
pub(crate) struct Backbone {
    pub weights: ViTWeights,
    pub config: ViTConfig,
    pub pooling: crate::args::PoolingArg,
}

impl Backbone {
    pub fn load(args: &BackboneArgs) -> anyhow::Result<Self> {
        let path = args
            .weights
            .as_deref()
            .ok_or_else(|| usage("--weights <FILE> is required to run the encoder"))?;
        Self::from_path(path, args)
    }

    pub fn from_path(path: &Path, args: &BackboneArgs) -> anyhow::Result<Self> {
        let weights = read_weights(path)?;
        let mut config = weights.config.clone();
        if let Some(p) = args.use_pos {
            config.use_pos_embed = p;
        }
        Ok(Self {
            weights,
            config,
            pooling: args.pooling,
        })
    }

    pub fn feature(&self, img: &Image) -> anyhow::Result<Vec<f64>> {
        Ok(extract_feature(img, &self.weights, &self.config, self.pooling.core())?)
    }

    pub fn features(&self, images: &[Image]) -> anyhow::Result<FeatureMatrix> {
        let rows: Vec<Vec<f64>> = images
            .par_iter()
            .map(|img| self.feature(img))
            .collect::<anyhow::Result<_>>()?;
        Ok(FeatureMatrix::from_rows(&rows)?)
    }
}

pub(crate) fn output_path(dir: &Path, entry: &ImageEntry, extension: Option<&str>) -> PathBuf {
    let path = dir.join(&entry.relative);
    match extension {
        Some(ext) => path.with_extension(ext),
        None => path,
    }
}
