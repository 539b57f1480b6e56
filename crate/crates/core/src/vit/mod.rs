//! A minimal Vision Transformer: patch embedding with an optional learned
//! positional table, pre-norm encoder blocks, a final LayerNorm, plus a
//! linear softmax head trained on frozen features.
//!
//! Without positional embeddings the encoder is permutation-equivariant over
//! patch tokens, so the class token cannot see how patches were arranged.

mod forward;
mod head;
mod weights;

use alloc::format;

pub use forward::{
    attention_map, embed, encoder_forward, extract_feature, gelu, layer_norm, standardize,
    EncoderOutput, Pooling, TokenSequence,
};
pub use head::{head_loss_and_grad, init_head, predict, train_head, HeadWeights};
pub use weights::{init_weights, BlockWeights, LayerNormWeights, ViTWeights};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ViTConfig {
    /// Patch side `P` in pixels.
    pub patch_size: usize,
    pub embed_dim: usize,
    pub depth: usize,
    pub num_heads: usize,
    /// MLP hidden width as a multiple of `embed_dim`.
    pub mlp_ratio: f64,
    /// Patch tokens `M`; must be a perfect square.
    pub num_patches: usize,
    pub channels: usize,
    /// `false` feeds patch tokens without the positional table.
    pub use_pos_embed: bool,
    pub layernorm_eps: f64,
}

impl Default for ViTConfig {
    fn default() -> Self {
        Self {
            patch_size: 16,
            embed_dim: 64,
            depth: 4,
            num_heads: 4,
            mlp_ratio: 4.0,
            num_patches: 196,
            channels: 3,
            use_pos_embed: true,
            layernorm_eps: 1e-6,
        }
    }
}

impl ViTConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("patch_size", self.patch_size),
            ("embed_dim", self.embed_dim),
            ("num_heads", self.num_heads),
            ("num_patches", self.num_patches),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
        }
        if !self.embed_dim.is_multiple_of(self.num_heads) {
            return Err(Error::InvalidConfig(format!(
                "embed_dim {} not divisible by num_heads {}",
                self.embed_dim, self.num_heads
            )));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(Error::InvalidConfig(format!("{} channels", self.channels)));
        }
        let side = self.grid_side();
        if side * side != self.num_patches {
            return Err(Error::InvalidConfig(format!(
                "num_patches {} is not a square grid",
                self.num_patches
            )));
        }
        if self.mlp_hidden() == 0 {
            return Err(Error::InvalidConfig(format!("mlp_ratio {}", self.mlp_ratio)));
        }
        if !(self.layernorm_eps >= 0.0 && self.layernorm_eps.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "layernorm_eps {}",
                self.layernorm_eps
            )));
        }
        Ok(())
    }

    pub fn grid_side(&self) -> usize {
        let s = libm::round(libm::sqrt(self.num_patches as f64)) as usize;
        if s * s == self.num_patches {
            s
        } else {
            0
        }
    }

    /// Input resolution: `grid_side * patch_size`.
    pub fn image_side(&self) -> usize {
        self.grid_side() * self.patch_size
    }

    pub fn head_dim(&self) -> usize {
        self.embed_dim / self.num_heads
    }

    pub fn mlp_hidden(&self) -> usize {
        let h = libm::round(self.embed_dim as f64 * self.mlp_ratio);
        if h.is_finite() && h >= 1.0 {
            h as usize
        } else {
            0
        }
    }

    /// Values per flattened patch: `P * P * C`.
    pub fn patch_dim(&self) -> usize {
        self.patch_size * self.patch_size * self.channels
    }

    /// Whether two configs describe tensors of the same shapes.
    pub fn same_geometry(&self, other: &ViTConfig) -> bool {
        self.patch_size == other.patch_size
            && self.embed_dim == other.embed_dim
            && self.depth == other.depth
            && self.num_heads == other.num_heads
            && self.num_patches == other.num_patches
            && self.channels == other.channels
            && self.mlp_hidden() == other.mlp_hidden()
    }
}
