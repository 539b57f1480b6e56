use anyhow::Context;
use patchwork_core::vit::attention_map;
use rayon::prelude::*;

use super::{output_path, require_out, Backbone};
use crate::args::{AttnArgs, Common};
use crate::dataset::scan_images;
use crate::formats::{load_image, save_image};
use crate::usage;

/// One grayscale PNG per input image, mirroring the input tree under `--out`.
pub fn run(common: &Common, args: &AttnArgs) -> anyhow::Result<()> {
    let out_dir = require_out(common, "DIR")?;
    let backbone = Backbone::load(&args.backbone)?;
    if args.block >= backbone.config.depth {
        return Err(usage(format!(
            "--block {} out of range: the encoder has {} blocks",
            args.block, backbone.config.depth
        )));
    }
    let entries = scan_images(&args.input)?;
    entries.par_iter().try_for_each(|entry| -> anyhow::Result<()> {
        let img = load_image(&entry.path)?;
        let map = attention_map(&img, &backbone.weights, &backbone.config, args.block)
            .with_context(|| format!("attention for {}", entry.path.display()))?;
        save_image(&map, &output_path(out_dir, entry, Some("png")))?;
        Ok(())
    })
}
