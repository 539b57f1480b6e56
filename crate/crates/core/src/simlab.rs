//! Linear centered kernel alignment and cosine similarity.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::matrix::{dot, norm, Matrix};
use crate::rng::KeyedRng;
use crate::{Error, Result};

/// Centered Gram matrices whose squared Frobenius norm falls below this
/// fraction of the uncentered one are treated as zero.
const ZERO_VARIANCE_RATIO: f64 = 1e-24;

/// `n` samples by `d` channels, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Matrix);

impl FeatureMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        if !values.is_finite() {
            return Err(Error::NonFinite("feature matrix"));
        }
        Ok(Self(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn samples(&self) -> usize {
        self.0.rows()
    }

    pub fn channels(&self) -> usize {
        self.0.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self(self.0.select_rows(indices))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkaReport {
    pub name_a: String,
    pub name_b: String,
    pub n: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub cka: f64,
}

/// `X X^T`.
pub fn gram(x: &FeatureMatrix) -> Matrix {
    x.0.matmul_transposed(&x.0).expect("X X^T is always conformable")
}

/// `H K H` with `H = I - 11^T / n`, computed by removing row and column
/// means and adding back the grand mean.
pub fn center_gram(k: &Matrix) -> Result<Matrix> {
    let n = k.rows();
    if n != k.cols() {
        return Err(Error::ShapeMismatch(format!("Gram matrix {}x{}", n, k.cols())));
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "centering needs at least 2 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).iter().sum::<f64>() / nf).collect();
    let col_means: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| k[(i, j)]).sum::<f64>() / nf)
        .collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    Ok(Matrix::from_fn(n, n, |i, j| {
        k[(i, j)] - row_means[i] - col_means[j] + grand
    }))
}

/// `Tr(A B)` for symmetric `A`, `B`: the elementwise product sum.
fn trace_of_product(a: &Matrix, b: &Matrix) -> f64 {
    dot(a.as_slice(), b.as_slice())
}

/// Linear CKA: `Tr(Kd Ld) / (sqrt(Tr(Kd^2)) sqrt(Tr(Ld^2)))`.
pub fn cka(x: &FeatureMatrix, y: &FeatureMatrix) -> Result<f64> {
    if x.samples() != y.samples() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} samples",
            x.samples(),
            y.samples()
        )));
    }
    let k = gram(x);
    let l = gram(y);
    let kd = center_gram(&k)?;
    let ld = center_gram(&l)?;
    let kk = trace_of_product(&kd, &kd);
    let ll = trace_of_product(&ld, &ld);
    for (centered, raw) in [(kk, &k), (ll, &l)] {
        let scale = trace_of_product(raw, raw);
        if centered <= ZERO_VARIANCE_RATIO * scale || centered == 0.0 {
            return Err(Error::ZeroVariance);
        }
    }
    Ok(trace_of_product(&kd, &ld) / (libm::sqrt(kk) * libm::sqrt(ll)))
}

/// `u . v / (|u| |v|)`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} entries", u.len(), v.len())));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// CKA between two domains' features. When sample counts differ the larger
/// side is subsampled without replacement (order preserved) to the smaller
/// count using a stream keyed by `seed`.
pub fn domain_similarity(
    name_a: &str,
    features_a: &FeatureMatrix,
    name_b: &str,
    features_b: &FeatureMatrix,
    seed: u64,
) -> Result<CkaReport> {
    let n = features_a.samples().min(features_b.samples());
    let mut rng = KeyedRng::new(seed);
    let align = |f: &FeatureMatrix, rng: &mut KeyedRng| -> FeatureMatrix {
        if f.samples() == n {
            return f.clone();
        }
        let mut idx = rand::seq::index::sample(rng, f.samples(), n).into_vec();
        idx.sort_unstable();
        f.select_rows(&idx)
    };
    let a = align(features_a, &mut rng);
    let b = align(features_b, &mut rng);
    Ok(CkaReport {
        name_a: name_a.into(),
        name_b: name_b.into(),
        n,
        d_a: features_a.channels(),
        d_b: features_b.channels(),
        cka: cka(&a, &b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = KeyedRng::new(seed);
        FeatureMatrix::new(Matrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))).unwrap()
    }

    #[test]
    fn gram_cases() {
        let id = FeatureMatrix::new(Matrix::identity(2)).unwrap();
        assert_eq!(gram(&id), Matrix::identity(2));
        let one = FeatureMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(gram(&one).as_slice(), &[25.0]);
        let k = gram(&gaussian(9, 4, 1));
        assert!(k.max_abs_diff(&k.transpose()) <= 1e-12);
    }

    #[test]
    fn centering_cases() {
        let c = Matrix::from_fn(4, 4, |_, _| 2.5);
        assert!(center_gram(&c).unwrap().as_slice().iter().all(|v| v.abs() < 1e-12));
        let h = center_gram(&Matrix::identity(2)).unwrap();
        assert_eq!(h.as_slice(), &[0.5, -0.5, -0.5, 0.5]);
        assert!(center_gram(&Matrix::identity(1)).is_err());
        assert!(center_gram(&Matrix::zeros(2, 3)).is_err());

        let kd = center_gram(&gram(&gaussian(7, 3, 2))).unwrap();
        for i in 0..7 {
            let row: f64 = kd.row(i).iter().sum();
            let col: f64 = (0..7).map(|r| kd[(r, i)]).sum();
            assert!(row.abs() < 1e-9 && col.abs() < 1e-9);
        }
        let twice = center_gram(&kd).unwrap();
        assert!(twice.max_abs_diff(&kd) < 1e-9);
    }

    #[test]
    fn self_similarity_and_scale() {
        let x = gaussian(20, 5, 3);
        let y = gaussian(20, 7, 4);
        assert!((cka(&x, &x).unwrap() - 1.0).abs() < 1e-9);
        let scaled = FeatureMatrix::new(x.as_matrix().scale(7.3)).unwrap();
        assert!((cka(&scaled, &y).unwrap() - cka(&x, &y).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn zero_variance_is_an_error() {
        let constant = FeatureMatrix::new(Matrix::from_fn(5, 3, |_, c| c as f64 + 0.1)).unwrap();
        let y = gaussian(5, 3, 5);
        assert_eq!(cka(&constant, &y), Err(Error::ZeroVariance));
        let zeros = FeatureMatrix::new(Matrix::zeros(5, 3)).unwrap();
        assert_eq!(cka(&y, &zeros), Err(Error::ZeroVariance));
        assert!(cka(&gaussian(4, 2, 1), &y).is_err());
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[0.3, -2.0], &[0.3, -2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - 0.707_106_781_186_547_5).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroNorm));
    }

    #[test]
    fn domain_similarity_subsamples() {
        let a = gaussian(30, 4, 6);
        let b = gaussian(20, 4, 7);
        let r1 = domain_similarity("a", &a, "b", &b, 3).unwrap();
        let r2 = domain_similarity("a", &a, "b", &b, 3).unwrap();
        assert_eq!(r1, r2);
        assert_eq!((r1.n, r1.d_a, r1.d_b), (20, 4, 4));
        let same = domain_similarity("a", &a, "a", &a, 0).unwrap();
        assert!((same.cka - 1.0).abs() < 1e-9);
    }

    #[test]
    fn feature_matrix_rejects_nan() {
        assert!(FeatureMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }
}
