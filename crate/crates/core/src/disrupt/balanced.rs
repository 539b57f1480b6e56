//! Clustered amplitude resampling.
//!
//! Patches are grouped greedily by the cosine similarity of their mean
//! colours. Each cluster's amplitude spectra are summarized by a per-bin
//! mean and (biased) variance, and every patch receives a random convex
//! mixture of one Gaussian draw per cluster, recombined with its own phase.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::DisruptionConfig;
use crate::image::{patch_mean, PatchGrid};
use crate::matrix::norm;
use crate::rng::KeyedRng;
use crate::simlab::cosine;
use crate::spectral::{recompose_patch, PatchSpectrum};
use crate::{Error, Result};

/// Proportion draws whose absolute values sum below this are redrawn.
const PROPORTION_FLOOR: f64 = 1e-12;

/// A partition of patch indices into clusters `0..num_clusters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    cluster_of: Vec<usize>,
    num_clusters: usize,
}

impl ClusterAssignment {
    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    /// Patch indices of cluster `id` in ascending order.
    pub fn members(&self, id: usize) -> Vec<usize> {
        self.cluster_of
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == id).then_some(i))
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters];
        for &c in &self.cluster_of {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Greedy first-seed partition: scanning in index order, each unassigned
/// patch opens a cluster and absorbs every later unassigned patch whose
/// mean colour has cosine similarity `>= sim_threshold` with it. A patch
/// with an all-zero mean stays a singleton.
pub fn cluster_patches(pg: &PatchGrid, sim_threshold: f64) -> Result<ClusterAssignment> {
    if pg.is_empty() {
        return Err(Error::Empty("patch grid"));
    }
    let means = (0..pg.len())
        .map(|i| patch_mean(pg, i))
        .collect::<Result<Vec<_>>>()?;
    let degenerate: Vec<bool> = means.iter().map(|m| norm(m) == 0.0).collect();
    let mut cluster_of = vec![usize::MAX; pg.len()];
    let mut next = 0;
    for seed in 0..pg.len() {
        if cluster_of[seed] != usize::MAX {
            continue;
        }
        cluster_of[seed] = next;
        if !degenerate[seed] {
            for j in seed + 1..pg.len() {
                if cluster_of[j] == usize::MAX
                    && !degenerate[j]
                    && cosine(&means[seed], &means[j])? >= sim_threshold
                {
                    cluster_of[j] = next;
                }
            }
        }
        next += 1;
    }
    Ok(ClusterAssignment {
        cluster_of,
        num_clusters: next,
    })
}

/// Per-bin statistics of one cluster's amplitude spectra (channel-major).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub size: usize,
    pub mean: Vec<f64>,
    /// Biased (divide by cluster size) variance.
    pub variance: Vec<f64>,
}

pub fn cluster_amp_stats(pg: &PatchGrid, ca: &ClusterAssignment) -> Result<Vec<ClusterStats>> {
    let spectra = spectra_of(pg)?;
    stats_from_spectra(&spectra, ca)
}

fn spectra_of(pg: &PatchGrid) -> Result<Vec<PatchSpectrum>> {
    (0..pg.len()).map(|i| PatchSpectrum::of_patch(pg, i)).collect()
}

fn stats_from_spectra(spectra: &[PatchSpectrum], ca: &ClusterAssignment) -> Result<Vec<ClusterStats>> {
    if ca.cluster_of.len() != spectra.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "assignment covers {} patches, grid has {}",
            ca.cluster_of.len(),
            spectra.len()
        )));
    }
    let bins = spectra.first().map_or(0, |s| s.amplitude().len());
    (0..ca.num_clusters)
        .map(|id| {
            let members = ca.members(id);
            if members.is_empty() {
                return Err(Error::InvalidConfig(alloc::format!("cluster {id} is empty")));
            }
            let size = members.len() as f64;
            let mut mean = vec![0.0; bins];
            for &j in &members {
                for (m, a) in mean.iter_mut().zip(spectra[j].amplitude()) {
                    *m += a;
                }
            }
            mean.iter_mut().for_each(|m| *m /= size);
            let mut variance = vec![0.0; bins];
            for &j in &members {
                for ((v, a), m) in variance.iter_mut().zip(spectra[j].amplitude()).zip(&mean) {
                    *v += (a - m) * (a - m);
                }
            }
            variance.iter_mut().for_each(|v| *v /= size);
            Ok(ClusterStats {
                size: members.len(),
                mean,
                variance,
            })
        })
        .collect()
}

/// `n` mixing proportions: `|z_i| / sum_k |z_k|` with `z ~ Normal(0, alpha^2)`,
/// redrawn while the denominator is below `1e-12`.
pub fn draw_proportions(n: usize, alpha: f64, rng: &mut KeyedRng) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| libm::fabs(alpha * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let total: f64 = raw.iter().sum();
        if total >= PROPORTION_FLOOR {
            return raw.into_iter().map(|r| r / total).collect();
        }
    }
}

/// One draw from a cluster's diagonal Gaussian, rectified at zero.
///
/// Bins are drawn once per conjugate pair `(m, n)` / `(-m, -n)` and mirrored,
/// so the sampled amplitude keeps the symmetry of a real patch's spectrum.
pub fn sample_cluster_amplitude(
    stats: &ClusterStats,
    height: usize,
    width: usize,
    rng: &mut KeyedRng,
) -> Vec<f64> {
    let plane = height * width;
    let mut out = vec![0.0; stats.mean.len()];
    for (c, chunk) in out.chunks_exact_mut(plane).enumerate() {
        let base = c * plane;
        for k in 0..plane {
            let (m, n) = (k / width, k % width);
            let mirror = ((height - m) % height) * width + (width - n) % width;
            chunk[k] = if mirror < k {
                chunk[mirror]
            } else {
                let z: f64 = rng.sample(StandardNormal);
                let sd = libm::sqrt(stats.variance[base + k]);
                (stats.mean[base + k] + sd * z).max(0.0)
            };
        }
    }
    out
}

/// Resamples every patch's amplitude from the cluster distributions of
/// `ca`, with fresh proportions and draws per patch, keeping each patch's
/// phase. Output values are not clamped.
pub fn balanced_disrupt_with(
    pg: &PatchGrid,
    ca: &ClusterAssignment,
    alpha: f64,
    rng: &mut KeyedRng,
) -> Result<PatchGrid> {
    let spectra = spectra_of(pg)?;
    let stats = stats_from_spectra(&spectra, ca)?;
    let (h, w, c) = (pg.patch_h(), pg.patch_w(), pg.channels());
    let bins = h * w * c;
    let mut patches = Vec::with_capacity(pg.len());
    for spectrum in &spectra {
        let proportions = draw_proportions(stats.len(), alpha, rng);
        let mut amp = vec![0.0; bins];
        for (cluster, p) in stats.iter().zip(&proportions) {
            let draw = sample_cluster_amplitude(cluster, h, w, rng);
            for (a, d) in amp.iter_mut().zip(draw) {
                *a += p * d;
            }
        }
        patches.push(recompose_patch(&amp, spectrum.phase(), h, w, c)?);
    }
    pg.with_patches(patches)
}

/// Clusters with `cfg.sim_threshold`, then [`balanced_disrupt_with`].
pub fn balanced_disrupt(
    pg: &PatchGrid,
    cfg: &DisruptionConfig,
    rng: &mut KeyedRng,
) -> Result<(PatchGrid, ClusterAssignment)> {
    cfg.validate()?;
    let ca = cluster_patches(pg, cfg.sim_threshold)?;
    let out = balanced_disrupt_with(pg, &ca, cfg.alpha, rng)?;
    Ok((out, ca))
}
