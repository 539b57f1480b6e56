use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{BlockWeights, LayerNormWeights, ViTConfig, ViTWeights};
use crate::image::{patchify, resize_bilinear, GridSpec, Image, PatchGrid};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// `(M + 1) x D` tokens, row 0 is the class token.
pub type TokenSequence = Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    #[default]
    ClassToken,
    /// Mean over the patch tokens (class token excluded).
    MeanPatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    /// `LN(z_L)`.
    pub features: TokenSequence,
    /// `attention[block][head]` is a `T x T` row-stochastic matrix.
    pub attention: Vec<Vec<Matrix>>,
}

/// Zero-mean, unit-variance copy of `row` (biased variance, `eps` inside the root).
pub fn standardize(row: &[f64], eps: f64) -> Vec<f64> {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let inv = 1.0 / libm::sqrt(var + eps);
    row.iter().map(|v| (v - mean) * inv).collect()
}

pub fn layer_norm(x: &Matrix, ln: &LayerNormWeights, eps: f64) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for r in 0..x.rows() {
        let normed = standardize(x.row(r), eps);
        for (((o, v), g), b) in out.row_mut(r).iter_mut().zip(normed).zip(&ln.gamma).zip(&ln.beta) {
            *o = v * g + b;
        }
    }
    out
}

/// Exact GELU, `x * Phi(x)`.
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x * core::f64::consts::FRAC_1_SQRT_2))
}

fn affine(x: &Matrix, w: &Matrix, b: &[f64]) -> Result<Matrix> {
    let mut out = x.matmul(w)?;
    out.add_row_vector(b);
    Ok(out)
}

fn softmax_rows(m: &mut Matrix) {
    for r in 0..m.rows() {
        let row = m.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
}

fn columns(m: &Matrix, start: usize, len: usize) -> Matrix {
    Matrix::from_fn(m.rows(), len, |r, c| m[(r, start + c)])
}

/// Multi-head self-attention on already-normalized tokens.
fn self_attention(
    x: &Matrix,
    b: &BlockWeights,
    cfg: &ViTConfig,
    record: Option<&mut Vec<Matrix>>,
) -> Result<Matrix> {
    let q = affine(x, &b.wq, &b.bq)?;
    let k = affine(x, &b.wk, &b.bk)?;
    let v = affine(x, &b.wv, &b.bv)?;
    let hd = cfg.head_dim();
    let scale = 1.0 / libm::sqrt(hd as f64);
    let mut concat = Matrix::zeros(x.rows(), cfg.embed_dim);
    let mut maps = Vec::new();
    for h in 0..cfg.num_heads {
        let qh = columns(&q, h * hd, hd);
        let kh = columns(&k, h * hd, hd);
        let vh = columns(&v, h * hd, hd);
        let mut scores = qh.matmul_transposed(&kh)?.scale(scale);
        softmax_rows(&mut scores);
        let out = scores.matmul(&vh)?;
        for r in 0..out.rows() {
            concat.row_mut(r)[h * hd..(h + 1) * hd].copy_from_slice(out.row(r));
        }
        if record.is_some() {
            maps.push(scores);
        }
    }
    if let Some(sink) = record {
        *sink = maps;
    }
    affine(&concat, &b.wo, &b.bo)
}

fn add_in_place(acc: &mut Matrix, other: &Matrix) {
    for (a, o) in acc.as_mut_slice().iter_mut().zip(other.as_slice()) {
        *a += o;
    }
}

fn check_geometry(w: &ViTWeights, cfg: &ViTConfig) -> Result<()> {
    cfg.validate()?;
    if !cfg.same_geometry(&w.config) {
        return Err(Error::ShapeMismatch(format!(
            "weights built for {:?}, used with {:?}",
            w.config, cfg
        )));
    }
    Ok(())
}

/// `z0 = [x_class; x_p^1 E; ...; x_p^M E] (+ E_pos when use_pos)`.
pub fn embed(pg: &PatchGrid, w: &ViTWeights, use_pos: bool) -> Result<TokenSequence> {
    let cfg = &w.config;
    if pg.len() != cfg.num_patches
        || pg.patch_h() != cfg.patch_size
        || pg.patch_w() != cfg.patch_size
        || pg.channels() != cfg.channels
    {
        return Err(Error::ShapeMismatch(format!(
            "{} patches of {}x{}x{}, encoder expects {} of {}x{}x{}",
            pg.len(),
            pg.patch_h(),
            pg.patch_w(),
            pg.channels(),
            cfg.num_patches,
            cfg.patch_size,
            cfg.patch_size,
            cfg.channels
        )));
    }
    let flat = Matrix::from_rows(pg.patches())?;
    let projected = flat.matmul(&w.patch_proj)?;
    let d = cfg.embed_dim;
    let mut z = Matrix::zeros(cfg.num_patches + 1, d);
    z.row_mut(0).copy_from_slice(&w.class_token);
    for r in 0..cfg.num_patches {
        z.row_mut(r + 1).copy_from_slice(projected.row(r));
    }
    if use_pos {
        add_in_place(&mut z, &w.pos_embed);
    }
    Ok(z)
}

fn run_encoder(z0: &TokenSequence, w: &ViTWeights, cfg: &ViTConfig, record: bool) -> Result<EncoderOutput> {
    check_geometry(w, cfg)?;
    if z0.cols() != cfg.embed_dim {
        return Err(Error::ShapeMismatch(format!(
            "token width {} vs embed_dim {}",
            z0.cols(),
            cfg.embed_dim
        )));
    }
    let eps = cfg.layernorm_eps;
    let mut z = z0.clone();
    let mut attention = Vec::new();
    for block in &w.blocks {
        let mut maps = Vec::new();
        let attn = self_attention(
            &layer_norm(&z, &block.norm1, eps),
            block,
            cfg,
            record.then_some(&mut maps),
        )?;
        add_in_place(&mut z, &attn);
        let mut hidden = affine(&layer_norm(&z, &block.norm2, eps), &block.mlp_w1, &block.mlp_b1)?;
        hidden.as_mut_slice().iter_mut().for_each(|v| *v = gelu(*v));
        let mlp = affine(&hidden, &block.mlp_w2, &block.mlp_b2)?;
        add_in_place(&mut z, &mlp);
        if !z.is_finite() {
            return Err(Error::NonFinite("encoder activations"));
        }
        if record {
            attention.push(maps);
        }
    }
    Ok(EncoderOutput {
        features: layer_norm(&z, &w.final_norm, eps),
        attention,
    })
}

/// `L` pre-norm blocks followed by the final LayerNorm, keeping every
/// block's attention matrices.
pub fn encoder_forward(z0: &TokenSequence, w: &ViTWeights, cfg: &ViTConfig) -> Result<EncoderOutput> {
    run_encoder(z0, w, cfg, true)
}

fn tokens_for(img: &Image, w: &ViTWeights, cfg: &ViTConfig) -> Result<TokenSequence> {
    check_geometry(w, cfg)?;
    if img.channels() != cfg.channels {
        return Err(Error::ShapeMismatch(format!(
            "{}-channel image for a {}-channel encoder",
            img.channels(),
            cfg.channels
        )));
    }
    let side = cfg.image_side();
    let resized = resize_bilinear(img, side, side)?;
    let pg = patchify(&resized, GridSpec::square(cfg.grid_side()))?;
    embed(&pg, w, cfg.use_pos_embed)
}

/// Feature vector of an image; it is resized to the encoder resolution
/// first. `cfg.use_pos_embed` decides whether positions are added.
pub fn extract_feature(img: &Image, w: &ViTWeights, cfg: &ViTConfig, pooling: Pooling) -> Result<Vec<f64>> {
    let out = run_encoder(&tokens_for(img, w, cfg)?, w, cfg, false)?;
    let f = &out.features;
    Ok(match pooling {
        Pooling::ClassToken => f.row(0).to_vec(),
        Pooling::MeanPatch => {
            let mut mean = vec![0.0; f.cols()];
            for r in 1..f.rows() {
                for (m, v) in mean.iter_mut().zip(f.row(r)) {
                    *m += v;
                }
            }
            let n = (f.rows() - 1) as f64;
            mean.into_iter().map(|m| m / n).collect()
        }
    })
}

/// Class-token attention of `block`, averaged over heads, laid out on the
/// patch grid, min-max normalized (a constant map becomes all zeros) and
/// resized to the input image size as a one-channel image.
pub fn attention_map(img: &Image, w: &ViTWeights, cfg: &ViTConfig, block: usize) -> Result<Image> {
    if block >= cfg.depth {
        return Err(Error::IndexOutOfRange {
            index: block,
            len: cfg.depth,
        });
    }
    let out = encoder_forward(&tokens_for(img, w, cfg)?, w, cfg)?;
    let heads = &out.attention[block];
    let m = cfg.num_patches;
    let mut weights = vec![0.0; m];
    for map in heads {
        for (acc, v) in weights.iter_mut().zip(&map.row(0)[1..]) {
            *acc += v;
        }
    }
    let lo = weights.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let normalized: Vec<f64> = if hi > lo {
        weights.iter().map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; m]
    };
    let side = cfg.grid_side();
    let grid = Image::new(side, side, 1, normalized)?;
    resize_bilinear(&grid, img.height(), img.width())
}
