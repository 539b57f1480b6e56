//! Image-token continuity disruption and the analysis tooling around it.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every numeric piece:
//!
//! - [`image`]: rasters, bilinear resize, lossless patchify/unpatchify.
//! - [`spectral`]: per-patch 2D DFT, amplitude/phase split and recomposition.
//! - [`disrupt`]: patch, pseudo-patch, amplitude and phase shuffles, the
//!   clustered amplitude resampler and the two-stage training schedule.
//! - [`vit`]: a minimal Vision Transformer forward pass with optional
//!   positional embeddings, a linear softmax head and attention maps.
//! - [`simlab`]: linear CKA and cosine similarity.
//! - [`episodic`]: k-way n-shot episodes and nearest-prototype evaluation.
//!
//! Randomness always flows through [`rng::KeyedRng`], a counter-based stream
//! keyed by integers, so results never depend on thread scheduling.
//! File formats and the command line live in the `patchwork` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod disrupt;
pub mod episodic;
mod error;
pub mod image;
pub mod matrix;
pub mod rng;
pub mod simlab;
pub mod spectral;
pub mod vit;

pub use error::{Error, Result};
pub use image::{GridSpec, Image, PatchGrid};
pub use matrix::Matrix;
pub use rng::KeyedRng;
