use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use patchwork_core::Image;

use super::FormatError;

const EXTENSIONS: [&str; 3] = ["png", "ppm", "pgm"];

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

/// Files the loader accepts: `.png`, `.ppm` and `.pgm`, any case.
pub fn is_image_path(path: &Path) -> bool {
    extension(path).is_some_and(|e| EXTENSIONS.contains(&e.as_str()))
}

/// Decodes to `[0, 1]` values. Gray inputs give one channel, everything
/// else three; alpha is dropped.
pub fn load_image(path: &Path) -> Result<Image, FormatError> {
    let bytes = std::fs::read(path).map_err(|e| FormatError::io(path, e))?;
    let format = match extension(path).as_deref() {
        Some("png") => ImageFormat::Png,
        Some("ppm" | "pgm") => ImageFormat::Pnm,
        _ => image::guess_format(&bytes).map_err(|source| FormatError::Image {
            path: path.display().to_string(),
            source,
        })?,
    };
    let decoded = image::load_from_memory_with_format(&bytes, format).map_err(|source| {
        FormatError::Image {
            path: path.display().to_string(),
            source,
        }
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let (channels, pixels): (usize, Vec<f64>) = match &decoded {
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) => {
            (1, decoded.to_luma8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect())
        }
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => (
            1,
            decoded.to_luma16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        ),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => (
            3,
            decoded.to_rgb16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        ),
        _ => (3, decoded.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect()),
    };
    Image::new(h, w, channels, pixels).map_err(|e| FormatError::core(path, e))
}

/// Round-to-nearest 8-bit quantization of a `[0, 1]` value.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes PNG, or binary PPM/PGM (P6/P5) when the extension asks for it.
pub fn save_image(img: &Image, path: &Path) -> Result<(), FormatError> {
    let bytes: Vec<u8> = img.pixels().iter().map(|&v| quantize(v)).collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let color = if img.channels() == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| FormatError::io(dir, e))?;
    }
    let mut out = Vec::new();
    let encoded = match extension(path).as_deref() {
        Some("ppm" | "pgm") => {
            let subtype = if img.channels() == 1 {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            };
            PnmEncoder::new(&mut out)
                .with_subtype(subtype)
                .write_image(&bytes, w, h, color)
        }
        _ => image::codecs::png::PngEncoder::new(&mut out).write_image(&bytes, w, h, color),
    };
    encoded.map_err(|source| FormatError::Image {
        path: path.display().to_string(),
        source,
    })?;
    std::fs::write(path, out).map_err(|e| FormatError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(channels: usize) -> Image {
        Image::from_fn(5, 7, channels, |y, x, c| ((y * 7 + x) * 3 + c) as f64 / 120.0).unwrap()
    }

    #[test]
    fn quantization_rounds_to_nearest() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(127.4 / 255.0), 127);
        assert_eq!(quantize(-3.0), 0);
    }

    #[test]
    fn round_trips_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        for (name, channels) in [("a.png", 3), ("b.png", 1), ("c.ppm", 3), ("d.pgm", 1)] {
            let img = sample(channels);
            let path = dir.path().join(name);
            save_image(&img, &path).unwrap();
            let back = load_image(&path).unwrap();
            assert_eq!(back.channels(), channels, "{name}");
            assert_eq!((back.height(), back.width()), (5, 7));
            let err = img
                .pixels()
                .iter()
                .zip(back.pixels())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 0.5 / 255.0 + 1e-12, "{name}: {err}");
        }
        let magic = std::fs::read(dir.path().join("c.ppm")).unwrap();
        assert_eq!(&magic[..2], b"P6");
        let magic = std::fs::read(dir.path().join("d.pgm")).unwrap();
        assert_eq!(&magic[..2], b"P5");
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        std::fs::write(&path, b"not an image").unwrap();
        assert!(load_image(&path).is_err());
        assert!(load_image(&dir.path().join("missing.png")).is_err());
    }
}
