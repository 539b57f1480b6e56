use patchwork_core::episodic::{evaluate, DatasetIndex};
use patchwork_core::simlab::FeatureMatrix;
use serde::Serialize;

use super::{emit, load_all, to_json, Backbone};
use crate::args::{Common, EvalArgs};
use crate::dataset::{class_labels, scan_images};
use crate::formats::{labels_path_for, read_features, read_labels};

#[derive(Serialize)]
struct Report {
    way: u64,
    shot: u64,
    query: u64,
    episodes: usize,
    metric: &'static str,
    seed: u64,
    mean_accuracy: f64,
    ci95: f64,
}

fn load(args: &EvalArgs) -> anyhow::Result<(FeatureMatrix, Vec<usize>)> {
    if args.input.is_dir() {
        let backbone = Backbone::load(&args.backbone)?;
        let entries = scan_images(&args.input)?;
        let (_, labels) = class_labels(&entries);
        return Ok((backbone.features(&load_all(&entries)?)?, labels));
    }
    let features = read_features(&args.input)?;
    let labels_path = args.labels.clone().unwrap_or_else(|| labels_path_for(&args.input));
    let labels = read_labels(&labels_path)?;
    if labels.len() != features.samples() {
        anyhow::bail!(
            "{} has {} labels for {} feature rows",
            labels_path.display(),
            labels.len(),
            features.samples()
        );
    }
    Ok((features, labels))
}

pub fn run(common: &Common, args: &EvalArgs) -> anyhow::Result<()> {
    let (features, labels) = load(args)?;
    let index = DatasetIndex::from_labels(&labels)?;
    let report = evaluate(
        |&row: &usize| Ok(features.row(row).to_vec()),
        &index,
        args.way as usize,
        args.shot as usize,
        args.query as usize,
        args.episodes as usize,
        common.seed,
        args.metric.core(),
    )?;
    emit(
        common,
        &to_json(&Report {
            way: args.way,
            shot: args.shot,
            query: args.query,
            episodes: report.episodes,
            metric: args.metric.name(),
            seed: common.seed,
            mean_accuracy: report.mean_accuracy,
            ci95: report.ci95,
        })?,
    )
}
