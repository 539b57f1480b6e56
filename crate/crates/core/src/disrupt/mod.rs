//! Continuity disruptors.
//!
//! Spatial: [`shuffle_patches`], [`grid_shuffle`] and [`warmup_disrupt`].
//! Frequency: [`shuffle_patch_amplitude`], [`shuffle_patch_phase`] and the
//! clustered resampler [`balanced_disrupt`]. [`disrupt_pipeline`] switches
//! from the spatial warm-up to the balanced frequency disruption after
//! `warmup_epochs`. Removing the positional embedding is an encoder switch,
//! see [`crate::vit::ViTConfig::use_pos_embed`].

mod balanced;
mod frequency;
mod pipeline;
mod spatial;

use alloc::format;
use alloc::vec::Vec;

pub use balanced::{
    balanced_disrupt, balanced_disrupt_with, cluster_amp_stats, cluster_patches,
    draw_proportions, sample_cluster_amplitude, ClusterAssignment, ClusterStats,
};
pub use frequency::{
    shuffle_patch_amplitude, shuffle_patch_amplitude_with, shuffle_patch_phase,
    shuffle_patch_phase_with,
};
pub use pipeline::{disrupt_pipeline, PipelineOutcome, Stage};
pub use spatial::{grid_shuffle, shuffle_patches, shuffle_patches_with, warmup_disrupt};

use crate::image::GridSpec;
use crate::rng::KeyedRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Shuffle whole patches.
    ShufflePatches,
    /// Permute patch amplitude spectra, keep phases.
    ShuffleAmplitude,
    /// Permute patch phase spectra, keep amplitudes.
    ShufflePhase,
    /// Pseudo-patch shuffle with a randomly chosen grid.
    Warmup,
    /// Clustered amplitude resampling.
    Balanced,
    /// Warm-up, then balanced, by epoch.
    Pipeline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisruptionConfig {
    pub method: Method,
    /// Cosine threshold for joining a patch cluster.
    pub sim_threshold: f64,
    /// Standard deviation of the proportion noise. Proportions are
    /// normalized, so this only matters through the retry rule.
    pub alpha: f64,
    pub grid_choices: Vec<GridSpec>,
    pub warmup_epochs: usize,
    pub total_epochs: usize,
    pub master_seed: u64,
    /// Token grid of the encoder the images feed.
    pub patch_grid: GridSpec,
    /// Side length the pipeline resizes images to before disrupting.
    pub input_side: usize,
}

impl Default for DisruptionConfig {
    fn default() -> Self {
        Self {
            method: Method::Pipeline,
            sim_threshold: 0.3,
            alpha: 1.0,
            grid_choices: default_grid_choices(),
            warmup_epochs: 10,
            total_epochs: 50,
            master_seed: 0,
            patch_grid: GridSpec::square(14),
            input_side: 224,
        }
    }
}

/// 1x1, 2x2, 4x4, 7x7, 8x8 and 14x14.
pub fn default_grid_choices() -> Vec<GridSpec> {
    [1, 2, 4, 7, 8, 14].into_iter().map(GridSpec::square).collect()
}

impl DisruptionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_choices.is_empty() {
            return Err(Error::InvalidConfig("grid_choices is empty".into()));
        }
        if self.warmup_epochs > self.total_epochs {
            return Err(Error::InvalidConfig(format!(
                "warmup_epochs {} exceeds total_epochs {}",
                self.warmup_epochs, self.total_epochs
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha {} must be > 0", self.alpha)));
        }
        if !(-1.0..=1.0).contains(&self.sim_threshold) {
            return Err(Error::InvalidConfig(format!(
                "sim_threshold {} outside [-1, 1]",
                self.sim_threshold
            )));
        }
        if self.input_side == 0 || !self.input_side.is_multiple_of(self.patch_grid.rows)
            || !self.input_side.is_multiple_of(self.patch_grid.cols)
        {
            return Err(Error::InvalidConfig(format!(
                "input side {} not divisible by patch grid {}x{}",
                self.input_side, self.patch_grid.rows, self.patch_grid.cols
            )));
        }
        Ok(())
    }

    /// The random stream for one image in one epoch.
    pub fn stream(&self, epoch: u64, image_index: u64) -> KeyedRng {
        KeyedRng::from_parts(&[self.master_seed, epoch, image_index])
    }
}

fn identity_permutation(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn random_permutation(n: usize, rng: &mut KeyedRng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm = identity_permutation(n);
    perm.shuffle(rng);
    perm
}
