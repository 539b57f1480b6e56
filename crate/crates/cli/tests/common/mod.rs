#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use patchwork::formats::save_image;
use patchwork_core::{Image, KeyedRng};
use rand::Rng;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_patchwork")
}

pub fn patchwork(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn patchwork")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = patchwork(args);
    assert!(
        out.status.success(),
        "patchwork {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Smooth colored interference patterns with a few bright discs, so
/// neighbouring patches are correlated and far ones are not.
pub fn structured_image(side: usize, seed: u64) -> Image {
    let mut rng = KeyedRng::from_parts(&[seed, 0x5717]);
    let freq: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.5..6.0),
                rng.random_range(0.5..6.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let discs: Vec<(f64, f64, f64, usize)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.05..0.2),
                rng.random_range(0..3),
            )
        })
        .collect();
    let s = side as f64;
    Image::from_fn(side, side, 3, |y, x, c| {
        let (u, v) = (x as f64 / s, y as f64 / s);
        let (fx, fy, ph) = freq[c];
        let mut val = 0.5 + 0.35 * (u * fx * 6.0 + ph).sin() * (v * fy * 6.0).cos();
        for &(cx, cy, r, dc) in &discs {
            if (u - cx).powi(2) + (v - cy).powi(2) < r * r {
                val = if dc == c { 0.95 } else { val * 0.3 };
            }
        }
        val
    })
    .unwrap()
}

/// Writes `per_class` structured PNGs into each of `classes` class folders.
pub fn write_dataset(root: &Path, classes: usize, per_class: usize, side: usize, seed: u64) -> Vec<PathBuf> {
    let mut paths = Vec::new();
    for c in 0..classes {
        for i in 0..per_class {
            let path = root.join(format!("class{c:02}")).join(format!("img{i:03}.png"));
            save_image(&structured_image(side, seed * 1000 + (c * per_class + i) as u64), &path).unwrap();
            paths.push(path);
        }
    }
    paths
}

/// Relative path -> bytes for every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    if root.is_file() {
        out.insert(PathBuf::new(), std::fs::read(root).unwrap());
        return out;
    }
    for entry in walkdir::WalkDir::new(root) {
        let entry = entry.unwrap();
        if entry.file_type().is_file() {
            let rel = entry.path().strip_prefix(root).unwrap().to_path_buf();
            out.insert(rel, std::fs::read(entry.path()).unwrap());
        }
    }
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
