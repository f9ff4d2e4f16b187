//! Clustering-based quality assessment of selected features: k-means on
//! the concatenated selected columns, accuracy under the optimal
//! cluster-to-class assignment, and normalized mutual information.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::MultiViewDataset;
use crate::error::{Error, Result};
use crate::seeding::stream_seed;
use crate::solver::{selected_count, SelectionResult};

/// Outcome of clustering the selected features of a labeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOutcome {
    pub labels: Vec<usize>,
    pub acc: f64,
    pub nmi: f64,
    pub restarts_used: usize,
}

const LLOYD_MAX_ITER: usize = 300;

/// Best-of-restarts Lloyd k-means with k-means++ seeding. Deterministic
/// given the seed; empty clusters are re-seeded from the point farthest
/// from its current centroid.
pub fn kmeans(x: &Array2<f64>, c: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    let n = x.nrows();
    if c < 2 || c > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count {c} must satisfy 2 <= c <= n (n={n})"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, "kmeans"));
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts {
        let (labels, inertia) = lloyd_once(x, c, &mut rng);
        if best.as_ref().is_none_or(|(bi, _)| inertia < *bi) {
            best = Some((inertia, labels));
        }
    }
    Ok(best.unwrap().1)
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn lloyd_once(x: &Array2<f64>, c: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = x.nrows();
    let d = x.ncols();

    // k-means++ seeding
    let mut centers = Array2::<f64>::zeros((c, d));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&x.row(first));
    let mut min_dist: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), centers.row(0))).collect();
    for t in 1..c {
        let total: f64 = min_dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in min_dist.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(t).assign(&x.row(pick));
        for i in 0..n {
            min_dist[i] = min_dist[i].min(sq_dist(x.row(i), centers.row(t)));
        }
    }

    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;
    for _ in 0..LLOYD_MAX_ITER {
        let mut changed = false;
        let mut new_inertia = 0.0;
        for i in 0..n {
            let mut best_k = 0;
            let mut best_d = f64::INFINITY;
            for k in 0..c {
                let dist = sq_dist(x.row(i), centers.row(k));
                if dist < best_d {
                    best_d = dist;
                    best_k = k;
                }
            }
            if labels[i] != best_k {
                labels[i] = best_k;
                changed = true;
            }
            new_inertia += best_d;
        }

        let mut counts = vec![0usize; c];
        let mut sums = Array2::<f64>::zeros((c, d));
        for i in 0..n {
            counts[labels[i]] += 1;
            let mut row = sums.row_mut(labels[i]);
            row += &x.row(i);
        }
        for k in 0..c {
            if counts[k] == 0 {
                // re-seed from the point farthest from its centroid
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(x.row(a), centers.row(labels[a]))
                            .total_cmp(&sq_dist(x.row(b), centers.row(labels[b])))
                    })
                    .unwrap();
                centers.row_mut(k).assign(&x.row(far));
                labels[far] = k;
                changed = true;
            } else {
                let mut row = centers.row_mut(k);
                row.assign(&sums.row(k));
                row /= counts[k] as f64;
            }
        }
        inertia = new_inertia;
        if !changed {
            break;
        }
    }
    (labels, inertia)
}

/// Remap arbitrary labels to dense ids `0..k`, preserving value order.
fn dense_labels<T: Ord + Copy>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<T> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let dense = labels
        .iter()
        .map(|l| distinct.binary_search(l).unwrap())
        .collect();
    (dense, distinct.len())
}

fn contingency(pred: &[usize], truth: &[usize], cp: usize, ct: usize) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; ct]; cp];
    for (&p, &t) in pred.iter().zip(truth.iter()) {
        table[p][t] += 1;
    }
    table
}

/// Minimum-cost assignment on a square cost matrix (Hungarian algorithm
/// with potentials). Returns the column assigned to each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut assigned_row = vec![0usize; n + 1]; // row matched to column j (1-based; 0 = none)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if assigned_row[j] != 0 {
            row_to_col[assigned_row[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Clustering accuracy: the fraction of agreeing samples under the best
/// one-to-one matching of predicted clusters to ground-truth classes.
pub fn accuracy(pred: &[usize], truth: &[i64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("empty label vectors".into()));
    }
    let (pred_dense, cp) = dense_labels(pred);
    let (truth_dense, ct) = dense_labels(truth);
    let table = contingency(&pred_dense, &truth_dense, cp, ct);
    let size = cp.max(ct);
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    if i < cp && j < ct {
                        -(table[i][j] as f64)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let assignment = hungarian(&cost);
    let matched: usize = (0..cp)
        .map(|i| {
            let j = assignment[i];
            if j < ct {
                table[i][j]
            } else {
                0
            }
        })
        .sum();
    Ok(matched as f64 / pred.len() as f64)
}

/// Normalized mutual information `I(pred; truth) / sqrt(H(pred) H(truth))`
/// with natural-log entropies. When either labeling has zero entropy the
/// value is 1 for identical partitions and 0 otherwise.
pub fn nmi(pred: &[usize], truth: &[i64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidParameter("empty label vectors".into()));
    }
    let n = pred.len() as f64;
    let (pred_dense, cp) = dense_labels(pred);
    let (truth_dense, ct) = dense_labels(truth);
    let table = contingency(&pred_dense, &truth_dense, cp, ct);
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
    let col_sums: Vec<f64> = (0..ct)
        .map(|j| table.iter().map(|r| r[j]).sum::<usize>() as f64)
        .collect();
    let entropy = |sums: &[f64]| -> f64 {
        sums.iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| {
                let p = s / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_pred = entropy(&row_sums);
    let h_truth = entropy(&col_sums);
    if h_pred <= 0.0 || h_truth <= 0.0 {
        // zero-entropy convention:1 iff the partitions coincide
        let identical = cp == 1 && ct == 1;
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for i in 0..cp {
        for j in 0..ct {
            let nij = table[i][j] as f64;
            if nij > 0.0 {
                let pij = nij / n;
                mi += pij * (n * nij / (row_sums[i] * col_sums[j])).ln();
            }
        }
    }
    Ok((mi / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}

/// Cluster the concatenation of each view's selected columns (completed
/// data, original scale) and score against the dataset labels.
pub fn evaluate_selection(
    dataset: &MultiViewDataset,
    result: &SelectionResult,
    c: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusteringOutcome> {
    let columns: Vec<Vec<usize>> = result.views.iter().map(|v| v.selected.clone()).collect();
    evaluate_columns(dataset, result, &columns, c, restarts, seed)
}

/// Same as [`evaluate_selection`] but re-truncating each view's ranking to
/// `ceil(fraction * d)` columns, so one run can be scored at many
/// selection fractions.
pub fn evaluate_at_fraction(
    dataset: &MultiViewDataset,
    result: &SelectionResult,
    fraction: f64,
    c: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusteringOutcome> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "selection fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let columns: Vec<Vec<usize>> = result
        .views
        .iter()
        .map(|v| {
            let count = selected_count(v.ranking.len(), fraction);
            v.ranking[..count].to_vec()
        })
        .collect();
    evaluate_columns(dataset, result, &columns, c, restarts, seed)
}

fn evaluate_columns(
    dataset: &MultiViewDataset,
    result: &SelectionResult,
    columns: &[Vec<usize>],
    c: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusteringOutcome> {
    let truth = dataset.labels().ok_or(Error::MissingLabels)?;
    let n = dataset.n_samples();
    let total: usize = columns.iter().map(|cols| cols.len()).sum();
    let mut concat = Array2::<f64>::zeros((n, total));
    let mut offset = 0;
    for (view, cols) in result.completed_views.iter().zip(columns.iter()) {
        for &j in cols {
            for i in 0..n {
                concat[(i, offset)] = view[(i, j)];
            }
            offset += 1;
        }
    }
    let pred = kmeans(&concat, c, restarts, seed)?;
    Ok(ClusteringOutcome {
        acc: accuracy(&pred, truth)?,
        nmi: nmi(&pred, truth)?,
        labels: pred,
        restarts_used: restarts,
    })
}
