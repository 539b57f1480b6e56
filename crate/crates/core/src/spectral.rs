//! Per-patch 2D discrete Fourier analysis.
//!
//! The forward transform is unnormalized and the inverse carries the
//! `1 / (H * W)` factor. Transforms are computed directly as two separable
//! passes over a twiddle table; patches are small (at most 32x32) so no
//! fast path is needed. The twiddle table is built so that
//! `tw[N - k] == conj(tw[k])` bit for bit, which makes the spectrum of a
//! real plane exactly Hermitian and keeps amplitude/phase edits real.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use num_complex::Complex64;

use crate::image::PatchGrid;
use crate::{Error, Result};

/// Complex coefficients of one `height x width` plane, row-major over `(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, bins: Vec<Complex64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Empty("spectrum"));
        }
        if bins.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} bins for {height}x{width}",
                bins.len()
            )));
        }
        Ok(Self {
            height,
            width,
            bins,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bin(&self, m: usize, n: usize) -> Complex64 {
        self.bins[m * self.width + n]
    }
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    let mut tw = vec![Complex64::new(1.0, 0.0); n];
    for k in 1..=n / 2 {
        let angle = 2.0 * PI * k as f64 / n as f64;
        let w = if 2 * k == n {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(libm::cos(angle), sign * libm::sin(angle))
        };
        tw[k] = w;
        tw[n - k] = w.conj();
    }
    tw
}

/// Separable transform of a complex plane with the given twiddle sign.
fn transform(input: &[Complex64], height: usize, width: usize, sign: f64) -> Vec<Complex64> {
    let tw_w = twiddles(width, sign);
    let tw_h = twiddles(height, sign);
    let mut rows = vec![Complex64::new(0.0, 0.0); height * width];
    for h in 0..height {
        let src = &input[h * width..(h + 1) * width];
        for n in 0..width {
            let mut acc = Complex64::new(0.0, 0.0);
            for (w, &x) in src.iter().enumerate() {
                acc += x * tw_w[(w * n) % width];
            }
            rows[h * width + n] = acc;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); height * width];
    for m in 0..height {
        for n in 0..width {
            let mut acc = Complex64::new(0.0, 0.0);
            for h in 0..height {
                acc += rows[h * width + n] * tw_h[(h * m) % height];
            }
            out[m * width + n] = acc;
        }
    }
    out
}

/// Forward DFT of a real `height x width` plane:
/// `F[m, n] = sum_h sum_w x[h, w] exp(-2 pi i (h m / H + w n / W))`.
pub fn dft2(plane: &[f64], height: usize, width: usize) -> Result<Spectrum> {
    if height == 0 || width == 0 || plane.is_empty() {
        return Err(Error::Empty("dft2 input"));
    }
    if plane.len() != height * width {
        return Err(Error::ShapeMismatch(format!(
            "{} values for {height}x{width}",
            plane.len()
        )));
    }
    let input: Vec<Complex64> = plane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Spectrum::new(height, width, transform(&input, height, width, -1.0))
}

/// Inverse DFT including the `1 / (H W)` factor, full complex result.
pub fn idft2_complex(spec: &Spectrum) -> Vec<Complex64> {
    let scale = 1.0 / (spec.height * spec.width) as f64;
    transform(&spec.bins, spec.height, spec.width, 1.0)
        .into_iter()
        .map(|v| v * scale)
        .collect()
}

/// Real part of the inverse DFT.
pub fn idft2(spec: &Spectrum) -> Vec<f64> {
    idft2_complex(spec).into_iter().map(|v| v.re).collect()
}

/// `|F|` per bin.
pub fn amplitude(spec: &Spectrum) -> Vec<f64> {
    spec.bins.iter().map(|b| libm::hypot(b.re, b.im)).collect()
}

/// Angle of a bin in `(-pi, pi]`; zero for a zero bin.
pub fn bin_phase(b: Complex64) -> f64 {
    if b.re == 0.0 && b.im == 0.0 {
        return 0.0;
    }
    let p = libm::atan2(b.im, b.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

pub fn phase(spec: &Spectrum) -> Vec<f64> {
    spec.bins.iter().map(|&b| bin_phase(b)).collect()
}

/// Spectrum with the given amplitude and phase per bin.
pub fn polar(amp: &[f64], phase: &[f64], height: usize, width: usize) -> Result<Spectrum> {
    if amp.len() != phase.len() {
        return Err(Error::ShapeMismatch(format!(
            "amplitude has {} bins, phase {}",
            amp.len(),
            phase.len()
        )));
    }
    if amp.iter().chain(phase).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("amplitude/phase"));
    }
    if let Some(&neg) = amp.iter().find(|&&a| a < 0.0) {
        return Err(Error::NegativeAmplitude(neg));
    }
    let bins = amp
        .iter()
        .zip(phase)
        .map(|(&a, &p)| Complex64::new(a * libm::cos(p), a * libm::sin(p)))
        .collect();
    Spectrum::new(height, width, bins)
}

/// `Re(idft2(amp * exp(i * phase)))`, unclamped.
pub fn recompose(amp: &[f64], phase: &[f64], height: usize, width: usize) -> Result<Vec<f64>> {
    Ok(idft2(&polar(amp, phase, height, width)?))
}

/// Amplitude and phase of every channel of one patch, stored as
/// channel-major planes of `height * width` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpectrum {
    height: usize,
    width: usize,
    channels: usize,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

impl PatchSpectrum {
    /// Analyzes patch `i` of a grid.
    pub fn of_patch(pg: &PatchGrid, i: usize) -> Result<Self> {
        let (h, w, c) = (pg.patch_h(), pg.patch_w(), pg.channels());
        let mut amplitude_planes = Vec::with_capacity(h * w * c);
        let mut phase_planes = Vec::with_capacity(h * w * c);
        for ch in 0..c {
            let spec = dft2(&pg.channel_plane(i, ch), h, w)?;
            amplitude_planes.extend(amplitude(&spec));
            phase_planes.extend(phase(&spec));
        }
        Ok(Self {
            height: h,
            width: w,
            channels: c,
            amplitude: amplitude_planes,
            phase: phase_planes,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }
}

/// Rebuilds an interleaved `(y, x, c)` patch from channel-major amplitude
/// and phase planes.
pub fn recompose_patch(
    amp: &[f64],
    phase: &[f64],
    height: usize,
    width: usize,
    channels: usize,
) -> Result<Vec<f64>> {
    let plane = height * width;
    if amp.len() != plane * channels || phase.len() != plane * channels {
        return Err(Error::ShapeMismatch(format!(
            "expected {} bins per component, got {} and {}",
            plane * channels,
            amp.len(),
            phase.len()
        )));
    }
    let mut patch = vec![0.0; plane * channels];
    for c in 0..channels {
        let values = recompose(
            &amp[c * plane..(c + 1) * plane],
            &phase[c * plane..(c + 1) * plane],
            height,
            width,
        )?;
        for (k, v) in values.into_iter().enumerate() {
            patch[k * channels + c] = v;
        }
    }
    Ok(patch)
}
