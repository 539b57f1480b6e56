use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::ViTConfig;
use crate::matrix::Matrix;
use crate::rng::KeyedRng;
use crate::{Error, Result};

const INIT_STD: f64 = 0.02;

type ShapeCheck<'a> = (&'a str, (usize, usize), (usize, usize));

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormWeights {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl LayerNormWeights {
    fn identity(d: usize) -> Self {
        Self {
            gamma: vec![1.0; d],
            beta: vec![0.0; d],
        }
    }
}

/// One pre-norm encoder block. Projections act on row vectors (`x W + b`).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights {
    pub norm1: LayerNormWeights,
    pub wq: Matrix,
    pub bq: Vec<f64>,
    pub wk: Matrix,
    pub bk: Vec<f64>,
    pub wv: Matrix,
    pub bv: Vec<f64>,
    pub wo: Matrix,
    pub bo: Vec<f64>,
    pub norm2: LayerNormWeights,
    /// `D x hidden`.
    pub mlp_w1: Matrix,
    pub mlp_b1: Vec<f64>,
    /// `hidden x D`.
    pub mlp_w2: Matrix,
    pub mlp_b2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViTWeights {
    pub config: ViTConfig,
    /// `(P * P * C) x D`.
    pub patch_proj: Matrix,
    pub class_token: Vec<f64>,
    /// `(M + 1) x D`, row 0 belongs to the class token.
    pub pos_embed: Matrix,
    pub blocks: Vec<BlockWeights>,
    pub final_norm: LayerNormWeights,
}

/// Seeded initialization: projections, class token and positional table
/// from `Normal(0, 0.02^2)`, biases zero, LayerNorm scale one and shift zero.
pub fn init_weights(cfg: &ViTConfig, seed: u64) -> Result<ViTWeights> {
    cfg.validate()?;
    let mut rng = KeyedRng::from_parts(&[seed, 0x0076_6974]);
    let mut normal = |rows: usize, cols: usize| {
        Matrix::from_fn(rows, cols, |_, _| INIT_STD * rng.sample::<f64, _>(StandardNormal))
    };
    let d = cfg.embed_dim;
    let hidden = cfg.mlp_hidden();
    let patch_proj = normal(cfg.patch_dim(), d);
    let class_token = normal(1, d).into_vec();
    let pos_embed = normal(cfg.num_patches + 1, d);
    let blocks = (0..cfg.depth)
        .map(|_| BlockWeights {
            norm1: LayerNormWeights::identity(d),
            wq: normal(d, d),
            bq: vec![0.0; d],
            wk: normal(d, d),
            bk: vec![0.0; d],
            wv: normal(d, d),
            bv: vec![0.0; d],
            wo: normal(d, d),
            bo: vec![0.0; d],
            norm2: LayerNormWeights::identity(d),
            mlp_w1: normal(d, hidden),
            mlp_b1: vec![0.0; hidden],
            mlp_w2: normal(hidden, d),
            mlp_b2: vec![0.0; d],
        })
        .collect();
    Ok(ViTWeights {
        config: cfg.clone(),
        patch_proj,
        class_token,
        pos_embed,
        blocks,
        final_norm: LayerNormWeights::identity(d),
    })
}

impl ViTWeights {
    /// Number of values in [`ViTWeights::to_flat`] for `cfg`.
    pub fn flat_len(cfg: &ViTConfig) -> usize {
        let d = cfg.embed_dim;
        let h = cfg.mlp_hidden();
        let per_block = 2 * d + 4 * (d * d + d) + 2 * d + (d * h + h) + (h * d + d);
        cfg.patch_dim() * d + d + (cfg.num_patches + 1) * d + cfg.depth * per_block + 2 * d
    }

    /// All tensors, row-major, in the fixed order: patch projection, class
    /// token, positional table; per block LN1 scale and shift, Wq, bq, Wk,
    /// bk, Wv, bv, Wo, bo, LN2 scale and shift, W1, b1, W2, b2; final LN
    /// scale and shift.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::flat_len(&self.config));
        out.extend_from_slice(self.patch_proj.as_slice());
        out.extend_from_slice(&self.class_token);
        out.extend_from_slice(self.pos_embed.as_slice());
        for b in &self.blocks {
            for part in [
                &b.norm1.gamma[..],
                &b.norm1.beta,
                b.wq.as_slice(),
                &b.bq,
                b.wk.as_slice(),
                &b.bk,
                b.wv.as_slice(),
                &b.bv,
                b.wo.as_slice(),
                &b.bo,
                &b.norm2.gamma,
                &b.norm2.beta,
                b.mlp_w1.as_slice(),
                &b.mlp_b1,
                b.mlp_w2.as_slice(),
                &b.mlp_b2,
            ] {
                out.extend_from_slice(part);
            }
        }
        out.extend_from_slice(&self.final_norm.gamma);
        out.extend_from_slice(&self.final_norm.beta);
        out
    }

    /// Inverse of [`ViTWeights::to_flat`].
    pub fn from_flat(cfg: &ViTConfig, values: &[f64]) -> Result<Self> {
        cfg.validate()?;
        let expected = Self::flat_len(cfg);
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} weight values, config needs {expected}",
                values.len()
            )));
        }
        let mut rest = values;
        let mut take = |n: usize| -> Vec<f64> {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        };
        let d = cfg.embed_dim;
        let h = cfg.mlp_hidden();
        let matrix = |v: Vec<f64>, r: usize, c: usize| Matrix::from_vec(r, c, v);
        let patch_proj = matrix(take(cfg.patch_dim() * d), cfg.patch_dim(), d)?;
        let class_token = take(d);
        let pos_embed = matrix(take((cfg.num_patches + 1) * d), cfg.num_patches + 1, d)?;
        let mut blocks = Vec::with_capacity(cfg.depth);
        for _ in 0..cfg.depth {
            let norm1 = LayerNormWeights {
                gamma: take(d),
                beta: take(d),
            };
            let wq = matrix(take(d * d), d, d)?;
            let bq = take(d);
            let wk = matrix(take(d * d), d, d)?;
            let bk = take(d);
            let wv = matrix(take(d * d), d, d)?;
            let bv = take(d);
            let wo = matrix(take(d * d), d, d)?;
            let bo = take(d);
            let norm2 = LayerNormWeights {
                gamma: take(d),
                beta: take(d),
            };
            let mlp_w1 = matrix(take(d * h), d, h)?;
            let mlp_b1 = take(h);
            let mlp_w2 = matrix(take(h * d), h, d)?;
            let mlp_b2 = take(d);
            blocks.push(BlockWeights {
                norm1,
                wq,
                bq,
                wk,
                bk,
                wv,
                bv,
                wo,
                bo,
                norm2,
                mlp_w1,
                mlp_b1,
                mlp_w2,
                mlp_b2,
            });
        }
        let final_norm = LayerNormWeights {
            gamma: take(d),
            beta: take(d),
        };
        let weights = Self {
            config: cfg.clone(),
            patch_proj,
            class_token,
            pos_embed,
            blocks,
            final_norm,
        };
        weights.validate()?;
        Ok(weights)
    }

    /// Shapes agree with the config and every entry is finite.
    pub fn validate(&self) -> Result<()> {
        let cfg = &self.config;
        cfg.validate()?;
        let d = cfg.embed_dim;
        let h = cfg.mlp_hidden();
        let mut shapes: Vec<ShapeCheck> = vec![
            ("patch_proj", self.patch_proj.shape(), (cfg.patch_dim(), d)),
            ("class_token", (1, self.class_token.len()), (1, d)),
            ("pos_embed", self.pos_embed.shape(), (cfg.num_patches + 1, d)),
            ("blocks", (self.blocks.len(), 0), (cfg.depth, 0)),
            ("final_norm", (self.final_norm.gamma.len(), self.final_norm.beta.len()), (d, d)),
        ];
        for b in &self.blocks {
            shapes.extend([
                ("norm1", (b.norm1.gamma.len(), b.norm1.beta.len()), (d, d)),
                ("wq", b.wq.shape(), (d, d)),
                ("wk", b.wk.shape(), (d, d)),
                ("wv", b.wv.shape(), (d, d)),
                ("wo", b.wo.shape(), (d, d)),
                ("qkvo bias", (b.bq.len() + b.bk.len(), b.bv.len() + b.bo.len()), (2 * d, 2 * d)),
                ("norm2", (b.norm2.gamma.len(), b.norm2.beta.len()), (d, d)),
                ("mlp_w1", b.mlp_w1.shape(), (d, h)),
                ("mlp_b1", (b.mlp_b1.len(), 0), (h, 0)),
                ("mlp_w2", b.mlp_w2.shape(), (h, d)),
                ("mlp_b2", (b.mlp_b2.len(), 0), (d, 0)),
            ]);
        }
        if let Some((name, got, want)) = shapes.iter().find(|(_, got, want)| got != want) {
            return Err(Error::ShapeMismatch(format!("{name}: {got:?}, expected {want:?}")));
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ViT weights"));
        }
        Ok(())
    }
}
