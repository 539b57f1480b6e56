use anyhow::Context;
use patchwork_core::disrupt::{
    balanced_disrupt, disrupt_pipeline, grid_shuffle, shuffle_patch_amplitude,
    shuffle_patch_phase, shuffle_patches, warmup_disrupt, DisruptionConfig, Stage,
};
use patchwork_core::image::{fit_to_grid, patchify, resize_bilinear, unpatchify};
use patchwork_core::{GridSpec, Image};
use rayon::prelude::*;
use serde::Serialize;

use super::{output_path, require_out, to_json};
use crate::args::{Common, DisruptArgs, MethodArg};
use crate::dataset::scan_images;
use crate::formats::{is_image_path, load_image, save_image};
use crate::usage;

#[derive(Serialize)]
struct Manifest {
    method: &'static str,
    seed: u64,
    epoch: usize,
    params: Params,
    images: Vec<Record>,
}

#[derive(Serialize)]
struct Params {
    threshold: f64,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    grids: Vec<usize>,
    warmup_epochs: usize,
    total_epochs: usize,
    patch_grid: usize,
    input_side: usize,
}

#[derive(Serialize)]
struct Record {
    input: String,
    output: String,
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clusters: Option<usize>,
}

struct Outcome {
    image: Image,
    stage: Option<&'static str>,
    grid: Option<GridSpec>,
    permutation: Option<Vec<usize>>,
    clusters: Option<usize>,
}

impl Outcome {
    fn new(image: Image) -> Self {
        Self {
            image,
            stage: None,
            grid: None,
            permutation: None,
            clusters: None,
        }
    }
}

fn config(common: &Common, args: &DisruptArgs) -> anyhow::Result<DisruptionConfig> {
    if args.grids.contains(&0) || args.patch_grid == 0 || args.grid == Some(0) {
        return Err(usage("grid sides must be at least 1"));
    }
    let cfg = DisruptionConfig {
        method: args.method.core(),
        sim_threshold: args.threshold,
        alpha: args.alpha,
        grid_choices: args.grids.iter().map(|&g| GridSpec::square(g)).collect(),
        warmup_epochs: args.warmup_epochs,
        total_epochs: args.total_epochs,
        master_seed: common.seed,
        patch_grid: GridSpec::square(args.patch_grid),
        input_side: args.input_side,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    if args.method == MethodArg::Grid && args.grid.is_none() {
        return Err(usage("--method grid needs --grid <SIDE>"));
    }
    if args.method == MethodArg::Pipeline && args.epoch >= args.total_epochs {
        return Err(usage(format!(
            "--epoch {} outside 0..{}",
            args.epoch, args.total_epochs
        )));
    }
    Ok(cfg)
}

fn disrupt_one(
    img: &Image,
    args: &DisruptArgs,
    cfg: &DisruptionConfig,
    index: usize,
) -> anyhow::Result<Outcome> {
    let mut rng = cfg.stream(args.epoch as u64, index as u64);
    let on_tokens = || fit_to_grid(img, cfg.patch_grid, cfg.input_side).and_then(|i| patchify(&i, cfg.patch_grid));
    Ok(match args.method {
        MethodArg::Sp => {
            let (pg, perm) = shuffle_patches(&on_tokens()?, &mut rng);
            Outcome {
                permutation: Some(perm),
                ..Outcome::new(unpatchify(&pg)?)
            }
        }
        MethodArg::Spa => {
            let (pg, perm) = shuffle_patch_amplitude(&on_tokens()?, &mut rng)?;
            Outcome {
                permutation: Some(perm),
                ..Outcome::new(unpatchify(&pg)?)
            }
        }
        MethodArg::Spp => {
            let (pg, perm) = shuffle_patch_phase(&on_tokens()?, &mut rng)?;
            Outcome {
                permutation: Some(perm),
                ..Outcome::new(unpatchify(&pg)?)
            }
        }
        MethodArg::Grid => {
            let grid = GridSpec::square(args.grid.unwrap_or(1));
            let (out, perm) = grid_shuffle(img, grid, &mut rng)?;
            Outcome {
                grid: Some(grid),
                permutation: Some(perm),
                ..Outcome::new(out)
            }
        }
        MethodArg::Warmup => {
            let sized = resize_bilinear(img, cfg.input_side, cfg.input_side)?;
            let (out, grid, perm) = warmup_disrupt(&sized, cfg, &mut rng)?;
            Outcome {
                grid: Some(grid),
                permutation: Some(perm),
                ..Outcome::new(out)
            }
        }
        MethodArg::Balanced => {
            let (pg, clusters) = balanced_disrupt(&on_tokens()?, cfg, &mut rng)?;
            Outcome {
                clusters: Some(clusters.num_clusters()),
                ..Outcome::new(unpatchify(&pg)?)
            }
        }
        MethodArg::Pipeline => {
            let out = disrupt_pipeline(img, cfg, args.epoch, index)?;
            match out.stage {
                Stage::Warmup { grid, permutation } => Outcome {
                    stage: Some("warmup"),
                    grid: Some(grid),
                    permutation: Some(permutation),
                    ..Outcome::new(out.image)
                },
                Stage::Balanced { num_clusters } => Outcome {
                    stage: Some("balanced"),
                    clusters: Some(num_clusters),
                    ..Outcome::new(out.image)
                },
            }
        }
    })
}

pub fn run(common: &Common, args: &DisruptArgs) -> anyhow::Result<()> {
    let out_dir = require_out(common, "DIR")?;
    let cfg = config(common, args)?;
    let entries = scan_images(&args.input)?;
    if is_image_path(out_dir) {
        return Err(usage("--out must be a directory for disrupt"));
    }
    let records: Vec<Record> = entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let img = load_image(&entry.path)?;
            let done = disrupt_one(&img, args, &cfg, index)
                .with_context(|| format!("disrupting {}", entry.path.display()))?;
            let target = output_path(out_dir, entry, None);
            save_image(&done.image, &target)?;
            Ok(Record {
                input: entry.display(),
                output: entry.display(),
                index,
                stage: done.stage,
                grid: done.grid.map(|g| [g.rows, g.cols]),
                permutation: done.permutation,
                clusters: done.clusters,
            })
        })
        .collect::<anyhow::Result<_>>()?;
    let manifest = Manifest {
        method: args.method.name(),
        seed: common.seed,
        epoch: args.epoch,
        params: Params {
            threshold: args.threshold,
            alpha: args.alpha,
            grid: args.grid,
            grids: args.grids.clone(),
            warmup_epochs: args.warmup_epochs,
            total_epochs: args.total_epochs,
            patch_grid: args.patch_grid,
            input_side: args.input_side,
        },
        images: records,
    };
    let path = out_dir.join("manifest.json");
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    std::fs::write(&path, to_json(&manifest)?).with_context(|| format!("writing {}", path.display()))
}
