//! Linear softmax classifier on frozen features, trained by full-batch
//! gradient descent on the mean cross-entropy.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::Matrix;
use crate::rng::KeyedRng;
use crate::simlab::FeatureMatrix;
use crate::{Error, Result};

const HEAD_INIT_STD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct HeadWeights {
    /// `D x K`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl HeadWeights {
    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (xi, row) in x.iter().zip(0..self.weight.rows()) {
            for (o, w) in out.iter_mut().zip(self.weight.row(row)) {
                *o += xi * w;
            }
        }
        out
    }
}

/// `Normal(0, 0.01^2)` weights and zero bias.
pub fn init_head(dim: usize, num_classes: usize, seed: u64) -> HeadWeights {
    let mut rng = KeyedRng::from_parts(&[seed, 0x6865_6164]);
    HeadWeights {
        weight: Matrix::from_fn(dim, num_classes, |_, _| {
            HEAD_INIT_STD * rng.sample::<f64, _>(StandardNormal)
        }),
        bias: vec![0.0; num_classes],
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn check_inputs(features: &FeatureMatrix, labels: &[usize], num_classes: usize) -> Result<()> {
    if features.samples() == 0 {
        return Err(Error::Empty("training set"));
    }
    if labels.len() != features.samples() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            features.samples()
        )));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::LabelOutOfRange {
            label,
            classes: num_classes,
        });
    }
    Ok(())
}

/// Mean softmax cross-entropy and its gradient with respect to the head.
pub fn head_loss_and_grad(
    features: &FeatureMatrix,
    labels: &[usize],
    head: &HeadWeights,
) -> Result<(f64, HeadWeights)> {
    let k = head.num_classes();
    check_inputs(features, labels, k)?;
    if head.weight.shape() != (features.channels(), k) {
        return Err(Error::ShapeMismatch(format!(
            "head {:?} for {}-dim features",
            head.weight.shape(),
            features.channels()
        )));
    }
    let n = features.samples() as f64;
    let mut grad = HeadWeights {
        weight: Matrix::zeros(features.channels(), k),
        bias: vec![0.0; k],
    };
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let x = features.row(i);
        let logits = head.logits(x);
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = max + libm::log(logits.iter().map(|l| libm::exp(l - max)).sum::<f64>());
        loss += log_sum - logits[y];
        let mut delta = softmax(&logits);
        delta[y] -= 1.0;
        for (r, &xi) in x.iter().enumerate() {
            for (g, d) in grad.weight.row_mut(r).iter_mut().zip(&delta) {
                *g += xi * d / n;
            }
        }
        for (g, d) in grad.bias.iter_mut().zip(&delta) {
            *g += d / n;
        }
    }
    Ok((loss / n, grad))
}

/// Full-batch gradient descent from [`init_head`]`(D, num_classes, seed)`.
pub fn train_head(
    features: &FeatureMatrix,
    labels: &[usize],
    num_classes: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
) -> Result<HeadWeights> {
    check_inputs(features, labels, num_classes)?;
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidConfig(format!("learning rate {lr}")));
    }
    let mut head = init_head(features.channels(), num_classes, seed);
    for _ in 0..epochs {
        let (_, grad) = head_loss_and_grad(features, labels, &head)?;
        for (w, g) in head.weight.as_mut_slice().iter_mut().zip(grad.weight.as_slice()) {
            *w -= lr * g;
        }
        for (b, g) in head.bias.iter_mut().zip(&grad.bias) {
            *b -= lr * g;
        }
    }
    Ok(head)
}

/// Arg-max class; ties go to the lowest index.
pub fn predict(head: &HeadWeights, x: &[f64]) -> usize {
    let logits = head.logits(x);
    let mut best = 0;
    for (c, &l) in logits.iter().enumerate() {
        if l > logits[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(per_class: usize, seed: u64) -> (FeatureMatrix, Vec<usize>) {
        let mut rng = KeyedRng::new(seed);
        let centers = [[3.0, 0.0, 1.0], [-3.0, 1.0, 0.0], [0.0, -3.0, -1.0]];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per_class {
                rows.push(
                    center
                        .iter()
                        .map(|m| m + 0.5 * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                );
                labels.push(c);
            }
        }
        (FeatureMatrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (f, y) = blobs(3, 5);
        let mut head = init_head(3, 3, 9);
        for (i, b) in head.bias.iter_mut().enumerate() {
            *b = 0.1 * i as f64;
        }
        let (_, grad) = head_loss_and_grad(&f, &y, &head).unwrap();
        let h = 1e-5;
        let loss = |hw: &HeadWeights| head_loss_and_grad(&f, &y, hw).unwrap().0;
        let check = |analytic: f64, numeric: f64| {
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(rel <= 1e-4, "analytic {analytic} numeric {numeric}");
        };
        for k in 0..head.weight.as_slice().len() {
            let mut plus = head.clone();
            plus.weight.as_mut_slice()[k] += h;
            let mut minus = head.clone();
            minus.weight.as_mut_slice()[k] -= h;
            check(grad.weight.as_slice()[k], (loss(&plus) - loss(&minus)) / (2.0 * h));
        }
        for k in 0..head.bias.len() {
            let mut plus = head.clone();
            plus.bias[k] += h;
            let mut minus = head.clone();
            minus.bias[k] -= h;
            check(grad.bias[k], (loss(&plus) - loss(&minus)) / (2.0 * h));
        }
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (f, y) = blobs(5, 1);
        assert_eq!(train_head(&f, &y, 3, 0.1, 0, 7).unwrap(), init_head(3, 3, 7));
    }

    #[test]
    fn separable_blobs_are_learned() {
        let (f, y) = blobs(40, 2);
        let init = init_head(3, 3, 3);
        let head = train_head(&f, &y, 3, 0.1, 200, 3).unwrap();
        let (l0, _) = head_loss_and_grad(&f, &y, &init).unwrap();
        let (l1, _) = head_loss_and_grad(&f, &y, &head).unwrap();
        assert!(l1 <= l0);
        let correct = (0..f.samples()).filter(|&i| predict(&head, f.row(i)) == y[i]).count();
        assert!(correct as f64 / f.samples() as f64 >= 0.99);
    }

    #[test]
    fn input_errors() {
        let (f, y) = blobs(2, 3);
        assert!(matches!(
            train_head(&f, &y, 2, 0.1, 1, 0),
            Err(Error::LabelOutOfRange { label: 2, classes: 2 })
        ));
        let empty = FeatureMatrix::new(Matrix::zeros(0, 3)).unwrap();
        assert!(matches!(train_head(&empty, &[], 3, 0.1, 1, 0), Err(Error::Empty(_))));
        assert!(train_head(&f, &y, 3, -1.0, 1, 0).is_err());
    }
}
