//! k-way n-shot episodes and nearest-prototype evaluation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;

use crate::matrix::{dot, norm, Matrix};
use crate::rng::KeyedRng;
use crate::simlab::FeatureMatrix;
use crate::{Error, Result};

/// Samples grouped by class. Class `i` is label `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetIndex<R> {
    classes: Vec<(String, Vec<R>)>,
}

impl<R: Clone + PartialEq> DatasetIndex<R> {
    pub fn new(classes: Vec<(String, Vec<R>)>) -> Result<Self> {
        for (name, items) in &classes {
            if items.is_empty() {
                return Err(Error::InsufficientData(format!("class {name:?} is empty")));
            }
        }
        let all: Vec<&R> = classes.iter().flat_map(|(_, items)| items).collect();
        for (i, a) in all.iter().enumerate() {
            if all[i + 1..].contains(a) {
                return Err(Error::InvalidConfig("duplicate sample reference".into()));
            }
        }
        Ok(Self { classes })
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_name(&self, label: usize) -> &str {
        &self.classes[label].0
    }

    pub fn samples(&self, label: usize) -> &[R] {
        &self.classes[label].1
    }
}

impl DatasetIndex<usize> {
    /// Groups row ids by integer label; class names are the label values.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups: Vec<(String, Vec<usize>)> =
            (0..classes).map(|c| (format!("{c}"), Vec::new())).collect();
        for (row, &label) in labels.iter().enumerate() {
            groups[label].1.push(row);
        }
        groups.retain(|(_, rows)| !rows.is_empty());
        Self::new(groups)
    }
}

/// A sampled task. Labels are episode-local: `0..way` in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode<R> {
    pub way: usize,
    pub shot: usize,
    pub query: usize,
    /// Dataset class of each episode label.
    pub classes: Vec<usize>,
    pub support: Vec<(R, usize)>,
    pub query_set: Vec<(R, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub episodes: usize,
    pub mean_accuracy: f64,
    /// `1.96 * std / sqrt(episodes)`, population standard deviation.
    pub ci95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 - cos(u, v)`; a zero vector is at distance 1 from everything.
    CosineDistance,
}

pub fn sample_episode<R: Clone + PartialEq>(
    ds: &DatasetIndex<R>,
    way: usize,
    shot: usize,
    query: usize,
    rng: &mut KeyedRng,
) -> Result<Episode<R>> {
    if way == 0 || shot == 0 {
        return Err(Error::InvalidConfig(format!(
            "way ({way}) and shot ({shot}) must be at least 1"
        )));
    }
    if ds.num_classes() < way {
        return Err(Error::InsufficientData(format!(
            "{way}-way episodes need {way} classes, dataset has {}",
            ds.num_classes()
        )));
    }
    let per_class = shot + query;
    let eligible: Vec<usize> = (0..ds.num_classes())
        .filter(|&c| ds.samples(c).len() >= per_class)
        .collect();
    if eligible.len() < way {
        return Err(Error::InsufficientData(format!(
            "{way}-way {shot}-shot {query}-query episodes need {way} classes with at least \
             {per_class} samples, found {}",
            eligible.len()
        )));
    }
    let classes: Vec<usize> = index::sample(rng, eligible.len(), way)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    let mut support = Vec::with_capacity(way * shot);
    let mut query_set = Vec::with_capacity(way * query);
    for (label, &class) in classes.iter().enumerate() {
        let pool = ds.samples(class);
        let picks = index::sample(rng, pool.len(), per_class).into_vec();
        for (i, &p) in picks.iter().enumerate() {
            let item = (pool[p].clone(), label);
            if i < shot {
                support.push(item);
            } else {
                query_set.push(item);
            }
        }
    }
    Ok(Episode {
        way,
        shot,
        query,
        classes,
        support,
        query_set,
    })
}

/// Mean feature row per class `0..num_classes`.
pub fn prototypes(features: &FeatureMatrix, labels: &[usize], num_classes: usize) -> Result<Matrix> {
    if labels.len() != features.samples() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} feature rows",
            labels.len(),
            features.samples()
        )));
    }
    let d = features.channels();
    let mut sums = Matrix::zeros(num_classes, d);
    let mut counts = alloc::vec![0usize; num_classes];
    for (i, &label) in labels.iter().enumerate() {
        if label >= num_classes {
            return Err(Error::LabelOutOfRange {
                label,
                classes: num_classes,
            });
        }
        counts[label] += 1;
        for (s, v) in sums.row_mut(label).iter_mut().zip(features.row(i)) {
            *s += v;
        }
    }
    if let Some(missing) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InsufficientData(format!("class {missing} has no support rows")));
    }
    for (c, &count) in counts.iter().enumerate() {
        sums.row_mut(c).iter_mut().for_each(|s| *s /= count as f64);
    }
    Ok(sums)
}

pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()),
        Metric::CosineDistance => {
            let denom = norm(a) * norm(b);
            if denom == 0.0 {
                1.0
            } else {
                1.0 - dot(a, b) / denom
            }
        }
    }
}

/// Index of the nearest prototype; ties go to the lowest index.
pub fn classify(query: &[f64], protos: &Matrix, metric: Metric) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for c in 0..protos.rows() {
        let d = distance(query, protos.row(c), metric);
        if d < best_dist {
            best = c;
            best_dist = d;
        }
    }
    best
}

/// Query accuracy of one episode given a feature function.
pub fn episode_accuracy<R, F>(episode: &Episode<R>, extract: &mut F, metric: Metric) -> Result<f64>
where
    F: FnMut(&R) -> Result<Vec<f64>>,
{
    let rows = episode
        .support
        .iter()
        .map(|(r, _)| extract(r))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<usize> = episode.support.iter().map(|(_, l)| *l).collect();
    let protos = prototypes(&FeatureMatrix::from_rows(&rows)?, &labels, episode.way)?;
    if episode.query_set.is_empty() {
        return Err(Error::InsufficientData("episode has no queries".into()));
    }
    let mut correct = 0usize;
    for (r, label) in &episode.query_set {
        if classify(&extract(r)?, &protos, metric) == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / episode.query_set.len() as f64)
}

/// Neumaier-compensated mean, population std and 95% half-width.
pub fn summarize(accuracies: &[f64]) -> Result<EvalReport> {
    if accuracies.is_empty() {
        return Err(Error::Empty("episode accuracies"));
    }
    let n = accuracies.len() as f64;
    let mean = compensated_sum(accuracies.iter().copied()) / n;
    let var = compensated_sum(accuracies.iter().map(|a| (a - mean) * (a - mean))) / n;
    Ok(EvalReport {
        episodes: accuracies.len(),
        mean_accuracy: mean,
        ci95: 1.96 * libm::sqrt(var) / libm::sqrt(n),
    })
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The stream for episode `e` of an evaluation seeded with `seed`.
pub fn episode_stream(seed: u64, e: usize) -> KeyedRng {
    KeyedRng::from_parts(&[seed, 0x0065_7069_736f_6465, e as u64])
}

/// Runs `episodes` independent episodes and aggregates their accuracy.
#[allow(clippy::too_many_arguments)]
pub fn evaluate<R, F>(
    mut extract: F,
    ds: &DatasetIndex<R>,
    way: usize,
    shot: usize,
    query: usize,
    episodes: usize,
    seed: u64,
    metric: Metric,
) -> Result<EvalReport>
where
    R: Clone + PartialEq,
    F: FnMut(&R) -> Result<Vec<f64>>,
{
    if episodes == 0 {
        return Err(Error::InvalidConfig("episodes must be at least 1".into()));
    }
    let mut accuracies = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let episode = sample_episode(ds, way, shot, query, &mut episode_stream(seed, e))?;
        accuracies.push(episode_accuracy(&episode, &mut extract, metric)?);
    }
    summarize(&accuracies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn dataset(classes: usize, per_class: usize) -> DatasetIndex<usize> {
        let labels: Vec<usize> = (0..classes * per_class).map(|i| i / per_class).collect();
        DatasetIndex::from_labels(&labels).unwrap()
    }

    #[test]
    fn episode_shapes() {
        let ds = dataset(8, 20);
        let mut rng = KeyedRng::new(1);
        let ep = sample_episode(&ds, 5, 1, 15, &mut rng).unwrap();
        assert_eq!((ep.support.len(), ep.query_set.len()), (5, 75));
        let ep = sample_episode(&ds, 5, 5, 15, &mut rng).unwrap();
        assert_eq!(ep.support.len(), 25);
        for (r, _) in &ep.support {
            assert!(ep.query_set.iter().all(|(q, _)| q != r));
        }
        let mut distinct = ep.classes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        assert_eq!(distinct.len(), 5);
        let all = sample_episode(&ds, 8, 1, 1, &mut rng).unwrap();
        let mut cls = all.classes.clone();
        cls.sort_unstable();
        assert_eq!(cls, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn episode_errors() {
        let ds = dataset(3, 4);
        let mut rng = KeyedRng::new(0);
        assert!(matches!(
            sample_episode(&ds, 4, 1, 1, &mut rng),
            Err(Error::InsufficientData(_))
        ));
        assert!(sample_episode(&ds, 3, 2, 3, &mut rng).is_err());
        assert!(sample_episode(&ds, 0, 1, 1, &mut rng).is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(DatasetIndex::new(vec![("a".into(), Vec::<usize>::new())]).is_err());
        assert!(DatasetIndex::new(vec![("a".into(), vec![1]), ("b".into(), vec![1])]).is_err());
    }

    #[test]
    fn prototype_cases() {
        let f = FeatureMatrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 2.0], vec![5.0, 1.0]]).unwrap();
        let p = prototypes(&f, &[0, 0, 1], 2).unwrap();
        assert_eq!(p.row(0), &[1.0, 1.0]);
        assert_eq!(p.row(1), &[5.0, 1.0]);
        let dup = FeatureMatrix::from_rows(&[vec![3.0, 4.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(prototypes(&dup, &[0, 0], 1).unwrap().row(0), &[3.0, 4.0]);
        assert!(prototypes(&f, &[0, 0, 0], 2).is_err());
        assert!(prototypes(&f, &[0, 0, 2], 2).is_err());
    }

    #[test]
    fn classify_cases() {
        let protos = Matrix::from_rows(&[vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 7.0]]).unwrap();
        assert_eq!(classify(&[0.0, 7.0], &protos, Metric::Euclidean), 2);
        assert_eq!(classify(&[6.0, 0.0], &protos, Metric::Euclidean), 1);
        assert_eq!(classify(&[5.0, 0.0], &protos, Metric::Euclidean), 0);
        let unit = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(classify(&[1.0, 1.0], &unit, Metric::CosineDistance), 0);
        assert_eq!(classify(&[0.1, 3.0], &unit, Metric::CosineDistance), 1);
    }

    #[test]
    fn summary_statistics() {
        let r = summarize(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(r.mean_accuracy, 0.5);
        assert!((r.ci95 - 1.96 * 0.5 / 2.0).abs() < 1e-15);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn separable_fixture_and_single_class() {
        let (classes, per) = (10, 30);
        let mut rng = KeyedRng::new(4);
        let feats: Vec<Vec<f64>> = (0..classes * per)
            .map(|i| {
                let c = i / per;
                (0..8)
                    .map(|j| if j == c % 8 { 20.0 * (1 + c / 8) as f64 } else { 0.0 }
                        + rng.sample::<f64, _>(StandardNormal) * 0.1)
                    .collect()
            })
            .collect();
        let labels: Vec<usize> = (0..classes * per).map(|i| i / per).collect();
        let ds = DatasetIndex::from_labels(&labels).unwrap();
        let extract = |r: &usize| Ok(feats[*r].clone());
        let report = evaluate(extract, &ds, 5, 5, 15, 50, 9, Metric::Euclidean).unwrap();
        assert!(report.mean_accuracy >= 0.99);
        let again = evaluate(extract, &ds, 5, 5, 15, 50, 9, Metric::Euclidean).unwrap();
        assert_eq!(report, again);
        let one = evaluate(extract, &ds, 1, 1, 5, 10, 1, Metric::Euclidean).unwrap();
        assert_eq!(one.mean_accuracy, 1.0);
    }
}
