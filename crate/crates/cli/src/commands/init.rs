use patchwork_core::vit::init_weights;

use super::require_out;
use crate::args::{Common, InitArgs};
use crate::formats::write_weights;

pub fn run(common: &Common, args: &InitArgs) -> anyhow::Result<()> {
    let out = require_out(common, "FILE")?;
    let cfg = args.config();
    cfg.validate().map_err(|e| crate::usage(e.to_string()))?;
    let weights = init_weights(&cfg, common.seed)?;
    write_weights(&weights, out)?;
    Ok(())
}
