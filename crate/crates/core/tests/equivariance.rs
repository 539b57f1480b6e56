use patchwork_core::disrupt::shuffle_patches_with;
use patchwork_core::image::patchify;
use patchwork_core::vit::{embed, encoder_forward, init_weights, ViTConfig};
use patchwork_core::{GridSpec, Image, KeyedRng, Matrix};
use rand::seq::SliceRandom;
use rand::Rng;

fn small(use_pos: bool) -> ViTConfig {
    ViTConfig {
        patch_size: 4,
        embed_dim: 16,
        depth: 2,
        num_heads: 4,
        mlp_ratio: 2.0,
        num_patches: 16,
        channels: 3,
        use_pos_embed: use_pos,
        layernorm_eps: 1e-6,
    }
}

fn random_image(side: usize, seed: u64) -> Image {
    let mut rng = KeyedRng::new(seed);
    Image::from_fn(side, side, 3, |_, _, _| rng.random::<f64>()).unwrap()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    diff / norm
}

#[test]
fn encoder_commutes_with_token_permutation() {
    let cfg = small(false);
    for seed in 0..5 {
        let w = init_weights(&cfg, seed).unwrap();
        let pg = patchify(&random_image(16, seed + 100), GridSpec::square(4)).unwrap();
        let mut rng = KeyedRng::new(seed + 200);
        let mut perm: Vec<usize> = (0..cfg.num_patches).collect();
        perm.shuffle(&mut rng);

        let out = encoder_forward(&embed(&pg, &w, false).unwrap(), &w, &cfg).unwrap();
        let shuffled = shuffle_patches_with(&pg, &perm).unwrap();
        let out_p = encoder_forward(&embed(&shuffled, &w, false).unwrap(), &w, &cfg).unwrap();

        assert!(rel_err(out.features.row(0), out_p.features.row(0)) <= 1e-5);
        let moved = Matrix::from_fn(cfg.num_patches, cfg.embed_dim, |r, c| out.features[(perm[r] + 1, c)]);
        for r in 0..cfg.num_patches {
            assert!(rel_err(moved.row(r), out_p.features.row(r + 1)) <= 1e-5);
        }
    }
}

#[test]
fn positional_table_breaks_invariance() {
    let cfg = small(true);
    let w = init_weights(&cfg, 3).unwrap();
    let pg = patchify(&random_image(16, 4), GridSpec::square(4)).unwrap();
    let mut perm: Vec<usize> = (0..cfg.num_patches).collect();
    perm.reverse();
    let a = encoder_forward(&embed(&pg, &w, true).unwrap(), &w, &cfg).unwrap();
    let shuffled = shuffle_patches_with(&pg, &perm).unwrap();
    let b = encoder_forward(&embed(&shuffled, &w, true).unwrap(), &w, &cfg).unwrap();
    assert!(rel_err(a.features.row(0), b.features.row(0)) > 1e-3);
}

#[test]
fn attention_rows_are_stochastic() {
    let cfg = small(true);
    let w = init_weights(&cfg, 9).unwrap();
    let pg = patchify(&random_image(16, 10), GridSpec::square(4)).unwrap();
    let out = encoder_forward(&embed(&pg, &w, true).unwrap(), &w, &cfg).unwrap();
    for block in &out.attention {
        for head in block {
            for r in 0..head.rows() {
                assert!((head.row(r).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }
    }
}
