use alloc::vec::Vec;

use rand::Rng;

use super::{random_permutation, DisruptionConfig};
use crate::image::{fit_to_grid, patchify, unpatchify, GridSpec, Image, PatchGrid, FALLBACK_SIDE};
use crate::rng::KeyedRng;
use crate::{Error, Result};

/// Reorders patches by a uniform random permutation. Slot `k` of the output
/// holds input patch `perm[k]`.
pub fn shuffle_patches(pg: &PatchGrid, rng: &mut KeyedRng) -> (PatchGrid, Vec<usize>) {
    let perm = random_permutation(pg.len(), rng);
    let out = pg.permuted(&perm).expect("random permutation is valid");
    (out, perm)
}

pub fn shuffle_patches_with(pg: &PatchGrid, perm: &[usize]) -> Result<PatchGrid> {
    pg.permuted(perm)
}

/// Cuts the image into pseudo-patches, shuffles and reassembles them.
/// Images the grid does not divide are first resized to 256x256.
pub fn grid_shuffle(img: &Image, grid: GridSpec, rng: &mut KeyedRng) -> Result<(Image, Vec<usize>)> {
    let fitted = fit_to_grid(img, grid, FALLBACK_SIDE)?;
    let pg = patchify(&fitted, grid)?;
    let (shuffled, perm) = shuffle_patches(&pg, rng);
    Ok((unpatchify(&shuffled)?, perm))
}

/// Picks one grid uniformly from `cfg.grid_choices` and applies [`grid_shuffle`].
pub fn warmup_disrupt(
    img: &Image,
    cfg: &DisruptionConfig,
    rng: &mut KeyedRng,
) -> Result<(Image, GridSpec, Vec<usize>)> {
    if cfg.grid_choices.is_empty() {
        return Err(Error::InvalidConfig("grid_choices is empty".into()));
    }
    let grid = cfg.grid_choices[rng.random_range(0..cfg.grid_choices.len())];
    let (out, perm) = grid_shuffle(img, grid, rng)?;
    Ok((out, grid, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn random_image(h: usize, w: usize, seed: u64) -> Image {
        let mut rng = KeyedRng::new(seed);
        Image::from_fn(h, w, 3, |_, _, _| rng.random::<f64>()).unwrap()
    }

    fn sorted(values: &[f64]) -> Vec<f64> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn identity_permutation_is_noop() {
        let img = random_image(8, 8, 1);
        let pg = patchify(&img, GridSpec::square(4)).unwrap();
        let id: Vec<usize> = (0..16).collect();
        assert_eq!(shuffle_patches_with(&pg, &id).unwrap(), pg);
    }

    #[test]
    fn shuffle_preserves_multiset_and_is_repeatable() {
        let img = random_image(8, 8, 2);
        let pg = patchify(&img, GridSpec::new(1, 2).unwrap()).unwrap();
        let (a, pa) = shuffle_patches(&pg, &mut KeyedRng::new(42));
        let (b, pb) = shuffle_patches(&pg, &mut KeyedRng::new(42));
        assert_eq!(pa, pb);
        assert_eq!(a, b);
        let out = unpatchify(&a).unwrap();
        assert_eq!(sorted(out.pixels()), sorted(img.pixels()));
    }

    #[test]
    fn grid_one_is_identity() {
        let img = random_image(12, 12, 3);
        let (out, perm) = grid_shuffle(&img, GridSpec::square(1), &mut KeyedRng::new(0)).unwrap();
        assert_eq!(out, img);
        assert_eq!(perm, vec![0]);
    }

    #[test]
    fn grid_seven_moves_whole_blocks() {
        let img = random_image(224, 224, 4);
        let (out, perm) = grid_shuffle(&img, GridSpec::square(7), &mut KeyedRng::new(5)).unwrap();
        assert_eq!(perm.len(), 49);
        let src = patchify(&img, GridSpec::square(7)).unwrap();
        let dst = patchify(&out, GridSpec::square(7)).unwrap();
        assert_eq!((dst.patch_h(), dst.patch_w()), (32, 32));
        for (k, &p) in perm.iter().enumerate() {
            assert_eq!(dst.patch(k), src.patch(p));
        }
        assert_eq!(sorted(out.pixels()), sorted(img.pixels()));
    }

    #[test]
    fn grid_shuffle_resizes_non_divisible() {
        let img = random_image(30, 30, 6);
        let (out, _) = grid_shuffle(&img, GridSpec::square(4), &mut KeyedRng::new(1)).unwrap();
        assert_eq!((out.height(), out.width()), (256, 256));
        assert!(grid_shuffle(&img, GridSpec::square(7), &mut KeyedRng::new(1)).is_err());
    }

    #[test]
    fn warmup_with_single_choice() {
        let img = random_image(16, 16, 7);
        let cfg = DisruptionConfig {
            grid_choices: vec![GridSpec::square(1)],
            ..Default::default()
        };
        let (out, grid, _) = warmup_disrupt(&img, &cfg, &mut KeyedRng::new(3)).unwrap();
        assert_eq!(out, img);
        assert_eq!(grid, GridSpec::square(1));

        let cfg = DisruptionConfig {
            grid_choices: vec![GridSpec::square(2)],
            ..Default::default()
        };
        let a = warmup_disrupt(&img, &cfg, &mut KeyedRng::new(8)).unwrap();
        let b = warmup_disrupt(&img, &cfg, &mut KeyedRng::new(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.2.len(), 4);

        let empty = DisruptionConfig {
            grid_choices: vec![],
            ..Default::default()
        };
        assert!(warmup_disrupt(&img, &empty, &mut KeyedRng::new(0)).is_err());
    }

    #[test]
    fn warmup_default_choices_keep_dims() {
        let img = random_image(224, 224, 9);
        let cfg = DisruptionConfig::default();
        for seed in 0..12 {
            let (out, _, _) = warmup_disrupt(&img, &cfg, &mut KeyedRng::new(seed)).unwrap();
            assert_eq!((out.height(), out.width()), (224, 224));
        }
    }
}
