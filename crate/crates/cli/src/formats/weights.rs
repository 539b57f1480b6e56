//! `VITW1` weight containers: the magic bytes, seven `u32` config fields
//! (patch size, width, depth, heads, patch count, channels, positional
//! flag), then every tensor as `f32` in the order of `ViTWeights::to_flat`.
//! All little-endian. The MLP width is recovered from the payload length.

use std::path::Path;

use patchwork_core::vit::{ViTConfig, ViTWeights};

use super::{f32s_from_le, FormatError, Reader};

pub const VITW_MAGIC: &[u8; 5] = b"VITW1";

const DEFAULT_MLP_RATIO: f64 = 4.0;
const LAYERNORM_EPS: f64 = 1e-6;

pub fn write_weights(w: &ViTWeights, path: &Path) -> Result<(), FormatError> {
    let c = &w.config;
    let mut out = Vec::new();
    out.extend_from_slice(VITW_MAGIC);
    let fields = [
        c.patch_size,
        c.embed_dim,
        c.depth,
        c.num_heads,
        c.num_patches,
        c.channels,
        c.use_pos_embed as usize,
    ];
    for f in fields {
        let f = u32::try_from(f).map_err(|_| FormatError::malformed(path, "config field exceeds u32"))?;
        out.extend_from_slice(&f.to_le_bytes());
    }
    for v in w.to_flat() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    std::fs::write(path, out).map_err(|e| FormatError::io(path, e))
}

fn infer_mlp_ratio(cfg: &ViTConfig, values: usize) -> Option<f64> {
    if cfg.depth == 0 {
        return Some(DEFAULT_MLP_RATIO);
    }
    let d = cfg.embed_dim;
    let fixed = cfg.patch_dim() * d + d + (cfg.num_patches + 1) * d + 2 * d;
    let per_block = values.checked_sub(fixed)?;
    if per_block % cfg.depth != 0 {
        return None;
    }
    let mlp = (per_block / cfg.depth).checked_sub(4 * d * d + 9 * d)?;
    if mlp == 0 || mlp % (2 * d + 1) != 0 {
        return None;
    }
    Some((mlp / (2 * d + 1)) as f64 / d as f64)
}

pub fn read_weights(path: &Path) -> Result<ViTWeights, FormatError> {
    let bytes = std::fs::read(path).map_err(|e| FormatError::io(path, e))?;
    let mut r = Reader::new(&bytes);
    if r.take(5) != Some(VITW_MAGIC.as_slice()) {
        return Err(FormatError::malformed(path, "missing VITW1 magic"));
    }
    let mut fields = [0usize; 7];
    for f in &mut fields {
        *f = r
            .u32()
            .ok_or_else(|| FormatError::malformed(path, "truncated header"))? as usize;
    }
    let [patch_size, embed_dim, depth, num_heads, num_patches, channels, use_pos] = fields;
    if use_pos > 1 {
        return Err(FormatError::malformed(path, format!("positional flag {use_pos}")));
    }
    let payload = r.remaining();
    if !payload.len().is_multiple_of(4) {
        return Err(FormatError::malformed(path, "payload is not whole f32 values"));
    }
    let mut cfg = ViTConfig {
        patch_size,
        embed_dim,
        depth,
        num_heads,
        mlp_ratio: DEFAULT_MLP_RATIO,
        num_patches,
        channels,
        use_pos_embed: use_pos == 1,
        layernorm_eps: LAYERNORM_EPS,
    };
    cfg.validate().map_err(|e| FormatError::core(path, e))?;
    cfg.mlp_ratio = infer_mlp_ratio(&cfg, payload.len() / 4)
        .ok_or_else(|| FormatError::malformed(path, "payload length does not fit the header"))?;
    ViTWeights::from_flat(&cfg, &f32s_from_le(payload)).map_err(|e| FormatError::core(path, e))
}
