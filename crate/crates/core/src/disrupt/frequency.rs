use alloc::vec::Vec;

use super::random_permutation;
use crate::image::{check_permutation, PatchGrid};
use crate::rng::KeyedRng;
use crate::spectral::{recompose_patch, PatchSpectrum};
use crate::Result;

#[derive(Clone, Copy)]
enum Component {
    Amplitude,
    Phase,
}

fn swap_component(pg: &PatchGrid, perm: &[usize], which: Component) -> Result<PatchGrid> {
    check_permutation(perm, pg.len())?;
    let spectra = (0..pg.len())
        .map(|i| PatchSpectrum::of_patch(pg, i))
        .collect::<Result<Vec<_>>>()?;
    let patches = perm
        .iter()
        .enumerate()
        .map(|(k, &src)| {
            let (amp, phase) = match which {
                Component::Amplitude => (spectra[src].amplitude(), spectra[k].phase()),
                Component::Phase => (spectra[k].amplitude(), spectra[src].phase()),
            };
            recompose_patch(amp, phase, pg.patch_h(), pg.patch_w(), pg.channels())
        })
        .collect::<Result<Vec<_>>>()?;
    pg.with_patches(patches)
}

/// Patch `k` of the output combines the amplitude of patch `perm[k]` with
/// its own phase. One permutation serves all channels. Output values are
/// not clamped.
pub fn shuffle_patch_amplitude_with(pg: &PatchGrid, perm: &[usize]) -> Result<PatchGrid> {
    swap_component(pg, perm, Component::Amplitude)
}

/// Patch `k` keeps its amplitude and takes the phase of patch `perm[k]`.
pub fn shuffle_patch_phase_with(pg: &PatchGrid, perm: &[usize]) -> Result<PatchGrid> {
    swap_component(pg, perm, Component::Phase)
}

pub fn shuffle_patch_amplitude(pg: &PatchGrid, rng: &mut KeyedRng) -> Result<(PatchGrid, Vec<usize>)> {
    let perm = random_permutation(pg.len(), rng);
    Ok((shuffle_patch_amplitude_with(pg, &perm)?, perm))
}

pub fn shuffle_patch_phase(pg: &PatchGrid, rng: &mut KeyedRng) -> Result<(PatchGrid, Vec<usize>)> {
    let perm = random_permutation(pg.len(), rng);
    Ok((shuffle_patch_phase_with(pg, &perm)?, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{patchify, GridSpec, Image};
    use crate::spectral::{amplitude, dft2, idft2, phase, Complex64, Spectrum};
    use alloc::vec;
    use rand::Rng;

    fn random_grid(seed: u64, side: usize, grid: usize) -> PatchGrid {
        let mut rng = KeyedRng::new(seed);
        let img = Image::from_fn(side, side, 3, |_, _, _| rng.random::<f64>()).unwrap();
        patchify(&img, GridSpec::square(grid)).unwrap()
    }

    fn max_diff(a: &PatchGrid, b: &PatchGrid) -> f64 {
        a.patches()
            .iter()
            .flatten()
            .zip(b.patches().iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_permutation_preserves_input() {
        let pg = random_grid(1, 16, 4);
        let id: Vec<usize> = (0..16).collect();
        assert!(max_diff(&shuffle_patch_amplitude_with(&pg, &id).unwrap(), &pg) < 1e-5);
        assert!(max_diff(&shuffle_patch_phase_with(&pg, &id).unwrap(), &pg) < 1e-5);
    }

    #[test]
    fn identical_patches_are_fixed_points() {
        let mut rng = KeyedRng::new(2);
        let tile: Vec<f64> = (0..4 * 4 * 3).map(|_| rng.random::<f64>()).collect();
        let img = Image::from_fn(8, 8, 3, |y, x, c| tile[((y % 4) * 4 + x % 4) * 3 + c]).unwrap();
        let pg = patchify(&img, GridSpec::square(2)).unwrap();
        let (a, _) = shuffle_patch_amplitude(&pg, &mut KeyedRng::new(3)).unwrap();
        let (p, _) = shuffle_patch_phase(&pg, &mut KeyedRng::new(3)).unwrap();
        assert!(max_diff(&a, &pg) < 1e-5);
        assert!(max_diff(&p, &pg) < 1e-5);
    }

    /// Brute-force route: transform each grayscale 2x2 patch by hand.
    fn oracle_swap(a: &[f64], b: &[f64], keep_phase_of_a: bool) -> Vec<f64> {
        let sa = dft2(a, 2, 2).unwrap();
        let sb = dft2(b, 2, 2).unwrap();
        let (amp_src, ph_src) = if keep_phase_of_a { (&sb, &sa) } else { (&sa, &sb) };
        let bins: Vec<Complex64> = amp_src
            .bins()
            .iter()
            .zip(ph_src.bins())
            .map(|(m, p)| {
                let ang = if p.norm() == 0.0 { 0.0 } else { p.arg() };
                Complex64::from_polar(m.norm(), ang)
            })
            .collect();
        idft2(&Spectrum::new(2, 2, bins).unwrap())
    }

    #[test]
    fn forced_swap_matches_oracle() {
        // two 2x2 grayscale patches side by side
        let a = [0.1, 0.9, 0.4, 0.2];
        let b = [0.8, 0.3, 0.5, 0.7];
        let pg = PatchGrid::new(GridSpec::new(1, 2).unwrap(), 2, 2, 1, vec![a.to_vec(), b.to_vec()])
            .unwrap();
        let spa = shuffle_patch_amplitude_with(&pg, &[1, 0]).unwrap();
        let spp = shuffle_patch_phase_with(&pg, &[1, 0]).unwrap();
        let expect = [
            (spa.patch(0), oracle_swap(&a, &b, true)),
            (spa.patch(1), oracle_swap(&b, &a, true)),
            (spp.patch(0), oracle_swap(&a, &b, false)),
            (spp.patch(1), oracle_swap(&b, &a, false)),
        ];
        for (got, want) in expect {
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "{g} vs {w}");
            }
        }
    }

    #[test]
    fn amplitude_multiset_follows_permutation() {
        let pg = random_grid(4, 8, 2);
        let (out, perm) = shuffle_patch_amplitude(&pg, &mut KeyedRng::new(9)).unwrap();
        for (k, &src) in perm.iter().enumerate() {
            for c in 0..3 {
                let got = amplitude(&dft2(&out.channel_plane(k, c), 4, 4).unwrap());
                let want = amplitude(&dft2(&pg.channel_plane(src, c), 4, 4).unwrap());
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-9);
                }
            }
        }
        let (out, perm) = shuffle_patch_phase(&pg, &mut KeyedRng::new(10)).unwrap();
        for (k, &src) in perm.iter().enumerate() {
            let got = dft2(&out.channel_plane(k, 0), 4, 4).unwrap();
            let want = dft2(&pg.channel_plane(src, 0), 4, 4).unwrap();
            let own = amplitude(&dft2(&pg.channel_plane(k, 0), 4, 4).unwrap());
            for ((g, w), a) in phase(&got).iter().zip(phase(&want)).zip(own) {
                if a > 1e-6 {
                    let d = (g - w).abs();
                    let d = d.min((d - 2.0 * core::f64::consts::PI).abs());
                    assert!(d < 1e-6, "{g} vs {w}");
                }
            }
        }
    }

    #[test]
    fn bad_permutation_is_rejected() {
        let pg = random_grid(5, 4, 2);
        assert!(shuffle_patch_amplitude_with(&pg, &[0, 0, 1, 2]).is_err());
    }
}
