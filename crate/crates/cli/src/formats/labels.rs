//! Label files: one non-negative integer per line.

use std::path::{Path, PathBuf};

use super::FormatError;

/// `feats.fmat` -> `feats.labels`.
pub fn labels_path_for(features: &Path) -> PathBuf {
    features.with_extension("labels")
}

pub fn write_labels(labels: &[usize], path: &Path) -> Result<(), FormatError> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, text).map_err(|e| FormatError::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| {
                FormatError::malformed(path, format!("line {}: `{}` is not a label", i + 1, l.trim()))
            })
        })
        .collect()
}
