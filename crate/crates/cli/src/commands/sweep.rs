use std::fmt::Write;

use anyhow::Context;
use patchwork_core::disrupt::grid_shuffle;
use patchwork_core::image::resize_bilinear;
use patchwork_core::simlab::{domain_similarity, FeatureMatrix};
use patchwork_core::{GridSpec, Image, KeyedRng};
use rayon::prelude::*;

use super::{emit, load_all, Backbone};
use crate::args::{Common, SweepArgs};
use crate::dataset::scan_images;
use crate::usage;

/// Root-mean-square distance between matching rows.
fn feature_shift(a: &FeatureMatrix, b: &FeatureMatrix) -> f64 {
    let total: f64 = (0..a.samples())
        .map(|i| a.row(i).iter().zip(b.row(i)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
        .sum();
    (total / a.samples() as f64).sqrt()
}

/// CSV `grid,cka,feature_shift`, one row per grid side. Images are resized
/// to the encoder resolution, shuffled on the pseudo-patch grid with the
/// stream `(seed, grid, image index)` and compared against the unshuffled
/// reference set.
pub fn run(common: &Common, args: &SweepArgs) -> anyhow::Result<()> {
    if args.grids.is_empty() || args.grids.contains(&0) {
        return Err(usage("--grids needs positive sides"));
    }
    let backbone = Backbone::load(&args.backbone)?;
    let side = backbone.config.image_side();
    let prepare = |dir: &std::path::Path| -> anyhow::Result<Vec<Image>> {
        load_all(&scan_images(dir)?)?
            .par_iter()
            .map(|img| resize_bilinear(img, side, side).map_err(anyhow::Error::from))
            .collect()
    };
    let images = prepare(&args.input)?;
    let original = backbone.features(&images)?;
    let reference = match &args.reference {
        Some(dir) => backbone.features(&prepare(dir)?)?,
        None => original.clone(),
    };
    let mut csv = String::from("grid,cka,feature_shift\n");
    for &g in &args.grids {
        let shuffled: Vec<Image> = images
            .par_iter()
            .enumerate()
            .map(|(i, img)| {
                let mut rng = KeyedRng::from_parts(&[common.seed, g as u64, i as u64]);
                grid_shuffle(img, GridSpec::square(g), &mut rng)
                    .map(|(out, _)| out)
                    .with_context(|| format!("grid {g}"))
            })
            .collect::<anyhow::Result<_>>()?;
        let feats = backbone.features(&shuffled)?;
        let report = domain_similarity("shuffled", &feats, "reference", &reference, common.seed)?;
        writeln!(csv, "{g},{},{}", report.cka, feature_shift(&feats, &original))?;
    }
    emit(common, &csv)
}
