//! Image discovery. Files are listed recursively and ordered by their path
//! relative to the root, compared component by component. The class of an
//! image is its first directory below the root; files directly in the root
//! share the class `.`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use crate::formats::is_image_path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEntry {
    pub path: PathBuf,
    pub relative: PathBuf,
}

impl ImageEntry {
    pub fn class(&self) -> String {
        let mut parts = self.relative.components();
        match (parts.next(), parts.next()) {
            (Some(first), Some(_)) => first.as_os_str().to_string_lossy().into_owned(),
            _ => ".".to_string(),
        }
    }

    /// The relative path with `/` separators, for manifests.
    pub fn display(&self) -> String {
        self.relative
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Every supported image under `root`, or `root` itself when it is a file.
pub fn scan_images(root: &Path) -> anyhow::Result<Vec<ImageEntry>> {
    let meta = std::fs::metadata(root).with_context(|| format!("reading {}", root.display()))?;
    if meta.is_file() {
        let name = root.file_name().map(PathBuf::from).unwrap_or_else(|| root.to_path_buf());
        return Ok(vec![ImageEntry {
            path: root.to_path_buf(),
            relative: name,
        }]);
    }
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(root).follow_links(true) {
        let entry = entry.with_context(|| format!("listing {}", root.display()))?;
        if entry.file_type().is_file() && is_image_path(entry.path()) {
            let relative = entry.path().strip_prefix(root)?.to_path_buf();
            out.push(ImageEntry {
                path: entry.path().to_path_buf(),
                relative,
            });
        }
    }
    if out.is_empty() {
        bail!("no .png/.ppm/.pgm images under {}", root.display());
    }
    out.sort_by(|a, b| a.relative.cmp(&b.relative));
    Ok(out)
}

/// Sorted class names and the class index of every entry.
pub fn class_labels(entries: &[ImageEntry]) -> (Vec<String>, Vec<usize>) {
    let mut names: Vec<String> = entries.iter().map(ImageEntry::class).collect();
    names.sort();
    names.dedup();
    let labels = entries
        .iter()
        .map(|e| names.binary_search(&e.class()).expect("class listed"))
        .collect();
    (names, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_classes() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        for rel in ["b/2.png", "b/10.png", "a/x.ppm", "a.png", "a/notes.txt", "c/d/e.pgm"] {
            let p = root.join(rel);
            std::fs::create_dir_all(p.parent().unwrap()).unwrap();
            std::fs::write(p, b"").unwrap();
        }
        let entries = scan_images(root).unwrap();
        let rel: Vec<String> = entries.iter().map(ImageEntry::display).collect();
        assert_eq!(rel, ["a/x.ppm", "a.png", "b/10.png", "b/2.png", "c/d/e.pgm"]);
        let (names, labels) = class_labels(&entries);
        assert_eq!(names, [".", "a", "b", "c"]);
        assert_eq!(labels, [1, 0, 2, 2, 3]);
        let single = scan_images(&root.join("a.png")).unwrap();
        assert_eq!(single[0].display(), "a.png");
        assert!(scan_images(&root.join("missing")).is_err());
    }
}
