use super::{load_all, require_out, Backbone};
use crate::args::{Common, FeaturesArgs};
use crate::dataset::{class_labels, scan_images};
use crate::formats::{labels_path_for, write_features, write_labels};

/// Writes the feature file at `--out` and class labels next to it; rows
/// follow the sorted relative paths of the images.
pub fn run(common: &Common, args: &FeaturesArgs) -> anyhow::Result<()> {
    let out = require_out(common, "FILE")?;
    let backbone = Backbone::load(&args.backbone)?;
    let entries = scan_images(&args.input)?;
    let features = backbone.features(&load_all(&entries)?)?;
    let (_, labels) = class_labels(&entries);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_features(&features, out)?;
    write_labels(&labels, &labels_path_for(out))?;
    Ok(())
}
