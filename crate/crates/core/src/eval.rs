//! Downstream scoring: nearest-neighbour classification, top-k retrieval,
//! Procrustes-aligned reconstruction error and confusion matrices.
//!
//! Distance ties are broken by the original instance index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::pairwise_sq_dists;

/// Class labels with a train/test partition of the instance indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSplit {
    labels: Vec<usize>,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl LabeledSplit {
    pub fn new(labels: Vec<usize>, train: Vec<usize>, test: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        let mut seen = vec![false; n];
        for &i in train.iter().chain(&test) {
            if i >= n {
                return Err(Error::DimensionMismatch(format!(
                    "index {i} out of range for {n} labels"
                )));
            }
            if seen[i] {
                return Err(Error::param("split", format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
        Ok(LabeledSplit {
            labels,
            train,
            test,
        })
    }

    /// Per-class shuffle keeping `train_fraction` of every class (at least
    /// one instance) for training.
    pub fn stratified(labels: Vec<usize>, train_fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&train_fraction) {
            return Err(Error::param("train_fraction", "must lie in [0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for c in 0..classes {
            let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            members.shuffle(&mut rng);
            let k = ((members.len() as f64 * train_fraction).round() as usize).max(1);
            train.extend_from_slice(&members[..k.min(members.len())]);
            test.extend_from_slice(&members[k.min(members.len())..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        LabeledSplit::new(labels, train, test)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnOutcome {
    /// Predicted label of every test instance, in `split.test()` order.
    pub predictions: Vec<usize>,
    pub accuracy: f64,
}

/// k-NN on feature rows (`N × p`, one instance per row), Euclidean distance.
pub fn knn_classify_features(
    features: &DMatrix<f64>,
    split: &LabeledSplit,
    k: usize,
) -> Result<KnnOutcome> {
    if features.nrows() != split.labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {} labels",
            features.nrows(),
            split.labels.len()
        )));
    }
    knn_classify_distances(&pairwise_sq_dists(features), split, k)
}

/// k-NN on a precomputed `N × N` dissimilarity matrix restricted to the
/// training columns.
///
/// Majority vote; ties go to the class with the smaller summed distance,
/// then to the smaller class id.
pub fn knn_classify_distances(
    dist: &DMatrix<f64>,
    split: &LabeledSplit,
    k: usize,
) -> Result<KnnOutcome> {
    let n = split.labels.len();
    if dist.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix {:?} for {n} labels",
            dist.shape()
        )));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if split.train.is_empty() {
        return Err(Error::Degenerate("training set is empty".into()));
    }
    let classes = split.labels.iter().copied().max().unwrap_or(0) + 1;
    let mut predictions = Vec::with_capacity(split.test.len());
    let mut correct = 0usize;
    let mut order = split.train.clone();
    for &q in &split.test {
        order.sort_by(|&a, &b| {
            dist[(q, a)]
                .partial_cmp(&dist[(q, b)])
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut votes = vec![0usize; classes];
        let mut mass = vec![0.0f64; classes];
        for &t in order.iter().take(k) {
            votes[split.labels[t]] += 1;
            mass[split.labels[t]] += dist[(q, t)];
        }
        let best = (0..classes)
            .filter(|&c| votes[c] > 0)
            .min_by(|&a, &b| {
                votes[b]
                    .cmp(&votes[a])
                    .then(mass[a].partial_cmp(&mass[b]).unwrap_or(core::cmp::Ordering::Equal))
                    .then(a.cmp(&b))
            })
            .expect("k ≥ 1 neighbours always vote");
        if best == split.labels[q] {
            correct += 1;
        }
        predictions.push(best);
    }
    let accuracy = if split.test.is_empty() {
        0.0
    } else {
        correct as f64 / split.test.len() as f64
    };
    Ok(KnnOutcome {
        predictions,
        accuracy,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalScore {
    /// Same-label hits among the `k` nearest neighbours of each query.
    pub per_query: Vec<usize>,
    pub total: usize,
}

/// For each instance, counts how many of its `k` nearest other instances
/// share its label. The query itself is never a candidate.
pub fn retrieval_topk(dist: &DMatrix<f64>, labels: &[usize], k: usize) -> Result<RetrievalScore> {
    let n = labels.len();
    if dist.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix {:?} for {n} labels",
            dist.shape()
        )));
    }
    if k >= n {
        return Err(Error::param("k", format!("must be below {n}")));
    }
    let mut per_query = Vec::with_capacity(n);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for q in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != q));
        order.sort_by(|&a, &b| {
            dist[(q, a)]
                .partial_cmp(&dist[(q, b)])
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        per_query.push(order.iter().take(k).filter(|&&j| labels[j] == labels[q]).count());
    }
    let total = per_query.iter().sum();
    Ok(RetrievalScore { per_query, total })
}

/// [`retrieval_topk`] on the Euclidean distances between configuration rows.
pub fn retrieval_topk_configuration(
    config: &DMatrix<f64>,
    labels: &[usize],
    k: usize,
) -> Result<RetrievalScore> {
    retrieval_topk(&pairwise_sq_dists(config), labels, k)
}

/// Aligns `estimate` onto `reference` with the best translation and
/// orthogonal map (reflections allowed, no scaling) over all rows, then
/// returns the root mean squared point error over `subset` (all rows when
/// `None`).
pub fn procrustes_rmse(
    estimate: &DMatrix<f64>,
    reference: &DMatrix<f64>,
    subset: Option<&[usize]>,
) -> Result<f64> {
    let aligned = procrustes_align(estimate, reference)?;
    let rows: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..reference.nrows()).collect(),
    };
    if rows.is_empty() {
        return Err(Error::param("subset", "must not be empty"));
    }
    let mut acc = 0.0;
    for &i in &rows {
        if i >= reference.nrows() {
            return Err(Error::DimensionMismatch(format!("row {i} out of range")));
        }
        acc += (aligned.row(i) - reference.row(i)).norm_squared();
    }
    Ok((acc / rows.len() as f64).sqrt())
}

/// `estimate` after the optimal orthogonal-plus-translation alignment.
pub fn procrustes_align(estimate: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if estimate.shape() != reference.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate {:?} vs reference {:?}",
            estimate.shape(),
            reference.shape()
        )));
    }
    let n = reference.nrows();
    if n == 0 {
        return Err(Error::Degenerate("empty configuration".into()));
    }
    let ref_mean = reference.row_mean();
    let est_mean = estimate.row_mean();
    let rc = DMatrix::from_fn(n, reference.ncols(), |i, j| reference[(i, j)] - ref_mean[j]);
    let ec = DMatrix::from_fn(n, estimate.ncols(), |i, j| estimate[(i, j)] - est_mean[j]);
    if rc.amax() == 0.0 {
        return Err(Error::Degenerate("reference points are all identical".into()));
    }
    // maximize tr(Rᵀ Ecᵀ Rc): R = U Vᵀ from Ecᵀ Rc = U Σ Vᵀ
    let svd = (ec.transpose() * &rc).svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let rot = u * vt;
    let mut aligned = ec * rot;
    for mut row in aligned.row_iter_mut() {
        row += &ref_mean;
    }
    Ok(aligned)
}

/// Rows are true classes, columns predicted classes.
pub fn confusion_matrix(
    predictions: &[usize],
    labels: &[usize],
    n_classes: usize,
) -> Result<DMatrix<usize>> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut m = DMatrix::zeros(n_classes, n_classes);
    for (&p, &t) in predictions.iter().zip(labels) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::param("n_classes", format!("label {} out of range", p.max(t))));
        }
        m[(t, p)] += 1;
    }
    Ok(m)
}
