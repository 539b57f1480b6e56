use std::path::Path;

use patchwork_core::simlab::{domain_similarity, FeatureMatrix};
use serde::Serialize;

use super::{emit, load_all, to_json, Backbone};
use crate::args::{CkaArgs, Common};
use crate::dataset::scan_images;
use crate::formats::read_features;

#[derive(Serialize)]
struct Report {
    a: String,
    b: String,
    cka: f64,
    n: usize,
    d_a: usize,
    d_b: usize,
    pooling: Option<&'static str>,
    seed: u64,
}

fn side(path: &Path, backbone: &mut Option<Backbone>, args: &CkaArgs) -> anyhow::Result<FeatureMatrix> {
    if !path.is_dir() {
        return Ok(read_features(path)?);
    }
    if backbone.is_none() {
        *backbone = Some(Backbone::load(&args.backbone)?);
    }
    let bb = backbone.as_ref().expect("loaded above");
    bb.features(&load_all(&scan_images(path)?)?)
}

pub fn run(common: &Common, args: &CkaArgs) -> anyhow::Result<()> {
    let mut backbone = None;
    let a = side(&args.a, &mut backbone, args)?;
    let b = side(&args.b, &mut backbone, args)?;
    let name = |p: &Path| p.display().to_string();
    let report = domain_similarity(&name(&args.a), &a, &name(&args.b), &b, common.seed)?;
    emit(
        common,
        &to_json(&Report {
            a: report.name_a,
            b: report.name_b,
            cka: report.cka,
            n: report.n,
            d_a: report.d_a,
            d_b: report.d_b,
            pooling: backbone.map(|bb| bb.pooling.name()),
            seed: common.seed,
        })?,
    )
}
