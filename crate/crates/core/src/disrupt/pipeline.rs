use alloc::format;
use alloc::vec::Vec;

use super::{balanced_disrupt, warmup_disrupt, DisruptionConfig};
use crate::image::{patchify, resize_bilinear, unpatchify, GridSpec, Image};
use crate::{Error, Result};

/// Which half of the schedule produced an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    Warmup { grid: GridSpec, permutation: Vec<usize> },
    Balanced { num_clusters: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub image: Image,
    pub stage: Stage,
}

/// Two-stage schedule: pseudo-patch shuffling for `epoch < warmup_epochs`,
/// balanced amplitude resampling afterwards. Images are first resized to
/// `input_side x input_side`; the random stream is keyed by
/// `(master_seed, epoch, image_index)`.
pub fn disrupt_pipeline(
    img: &Image,
    cfg: &DisruptionConfig,
    epoch: usize,
    image_index: usize,
) -> Result<PipelineOutcome> {
    cfg.validate()?;
    if epoch >= cfg.total_epochs {
        return Err(Error::InvalidConfig(format!(
            "epoch {epoch} outside 0..{}",
            cfg.total_epochs
        )));
    }
    let mut rng = cfg.stream(epoch as u64, image_index as u64);
    let img = resize_bilinear(img, cfg.input_side, cfg.input_side)?;
    if epoch < cfg.warmup_epochs {
        let (image, grid, permutation) = warmup_disrupt(&img, cfg, &mut rng)?;
        return Ok(PipelineOutcome {
            image,
            stage: Stage::Warmup { grid, permutation },
        });
    }
    let pg = patchify(&img, cfg.patch_grid)?;
    let (out, clusters) = balanced_disrupt(&pg, cfg, &mut rng)?;
    Ok(PipelineOutcome {
        image: unpatchify(&out)?,
        stage: Stage::Balanced {
            num_clusters: clusters.num_clusters(),
        },
    })
}
