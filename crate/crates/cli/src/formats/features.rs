//! `FMAT1` feature files: the magic bytes, `u32` rows, `u32` columns, then
//! `rows * cols` row-major `f32` values, all little-endian.

use std::path::Path;

use patchwork_core::simlab::FeatureMatrix;
use patchwork_core::Matrix;

use super::{f32s_from_le, FormatError, Reader};

pub const FMAT_MAGIC: &[u8; 5] = b"FMAT1";

pub fn write_features(features: &FeatureMatrix, path: &Path) -> Result<(), FormatError> {
    let m = features.as_matrix();
    let too_big = |what| FormatError::malformed(path, format!("{what} exceed u32"));
    let rows = u32::try_from(m.rows()).map_err(|_| too_big("rows"))?;
    let cols = u32::try_from(m.cols()).map_err(|_| too_big("columns"))?;
    let mut out = Vec::with_capacity(13 + 4 * m.as_slice().len());
    out.extend_from_slice(FMAT_MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for &v in m.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    std::fs::write(path, out).map_err(|e| FormatError::io(path, e))
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix, FormatError> {
    let bytes = std::fs::read(path).map_err(|e| FormatError::io(path, e))?;
    let mut r = Reader::new(&bytes);
    if r.take(5) != Some(FMAT_MAGIC.as_slice()) {
        return Err(FormatError::malformed(path, "missing FMAT1 magic"));
    }
    let (Some(rows), Some(cols)) = (r.u32(), r.u32()) else {
        return Err(FormatError::malformed(path, "truncated header"));
    };
    let (rows, cols) = (rows as usize, cols as usize);
    let payload = r.remaining();
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| FormatError::malformed(path, "header overflows"))?;
    if payload.len() != expected {
        return Err(FormatError::malformed(
            path,
            format!("{rows}x{cols} needs {expected} payload bytes, found {}", payload.len()),
        ));
    }
    let values = f32s_from_le(payload);
    let m = Matrix::from_vec(rows, cols, values).map_err(|e| FormatError::core(path, e))?;
    FeatureMatrix::new(m).map_err(|e| FormatError::core(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.fmat");
        let f = FeatureMatrix::from_rows(&[vec![1.0, -2.5, 0.25], vec![3.0, 0.0, 1e-3]]).unwrap();
        write_features(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..5], b"FMAT1");
        assert_eq!(&bytes[5..13], &[2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&bytes[13..17], &(1.0f32).to_le_bytes());
        assert_eq!(bytes.len(), 13 + 24);
        let back = read_features(&path).unwrap();
        assert_eq!(back.samples(), 2);
        assert_eq!(back.row(1)[2], 1e-3f32 as f64);
        assert_eq!(back.row(0), &[1.0, -2.5, 0.25]);
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.fmat");
        for bytes in [&b"FMAT2\0\0\0\0\0\0\0\0"[..], b"FMAT1\x01\0\0\0", b"FMAT1\x01\0\0\0\x02\0\0\0abcd"] {
            std::fs::write(&path, bytes).unwrap();
            assert!(read_features(&path).is_err());
        }
    }
}
