//! Sample-similarity graph machinery: adaptive k-NN construction, the
//! per-row closed-form similarity update, and Laplacian assembly.
//!
//! Each row of the similarity matrix is a k-sparse probability distribution
//! over the sample's nearest neighbors in the projected space. The row-wise
//! subproblem
//!
//! ```text
//! min_s  sum_j b_j s_j + xi ||s||^2    s.t.  s >= 0, sum s = 1, ||s||_0 = k
//! ```
//!
//! has a closed form once `xi` is pinned to the value that makes the
//! solution exactly k-sparse: with the costs of row i sorted ascending as
//! `b_(1) <= ... <= b_(n-1)` (self excluded),
//!
//! ```text
//! s_(j) = (b_(k+1) - b_(j)) / (k b_(k+1) - sum_{t<=k} b_(t)),   j <= k
//! xi    = (k b_(k+1) - sum_{t<=k} b_(t)) / 2
//! ```
//!
//! Rows are computed independently of each other, so the update is safe to
//! parallelize across rows.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Learned sample-similarity graph: row i is a k-sparse distribution over
/// the neighbors of sample i, plus the per-row regularizer values that made
/// each row exactly k-sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    pub s: Array2<f64>,
    pub k: usize,
    pub xi: Array1<f64>,
}

/// Symmetric positive semidefinite Laplacian of a similarity graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLaplacian {
    pub l: Array2<f64>,
}

/// k-NN graph on raw coordinates: costs are half squared Euclidean
/// distances between rows of `x`.
pub fn initial_knn_graph(x: &Array2<f64>, k: usize) -> Result<SimilarityGraph> {
    from_costs(&pairwise_costs(x), k)
}

/// Refresh the graph from the projected samples `x_tilde * w`.
pub fn update_similarity(x_tilde: &Array2<f64>, w: &Array2<f64>, k: usize) -> Result<SimilarityGraph> {
    let z = x_tilde.dot(w);
    from_costs(&pairwise_costs(&z), k)
}

/// Half squared Euclidean distances between all row pairs, via the Gram
/// matrix. Negative values from cancellation are clamped to zero.
fn pairwise_costs(z: &Array2<f64>) -> Array2<f64> {
    let gram = z.dot(&z.t());
    let n = z.nrows();
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let v = 0.5 * (gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)]);
            b[(i, j)] = v.max(0.0);
        }
    }
    b
}

fn from_costs(costs: &Array2<f64>, k: usize) -> Result<SimilarityGraph> {
    let n = costs.nrows();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count k={k} must satisfy 1 <= k <= n-1 (n={n})"
        )));
    }
    let mut s = Array2::zeros((n, n));
    let mut xi = Array1::zeros(n);
    for i in 0..n {
        let row: Vec<f64> = costs.row(i).to_vec();
        let (weights, xi_i) = sparse_simplex_row(&row, i, k);
        for (j, w) in weights {
            s[(i, j)] = w;
        }
        xi[i] = xi_i;
    }
    Ok(SimilarityGraph { s, k, xi })
}

/// Closed-form row solution. `costs` is the full cost row including the
/// self position, which is excluded by index (so duplicate points do not
/// self-connect). Ties at the k-th neighbor break by ascending index; a
/// vanishing denominator falls back to uniform 1/k weights.
fn sparse_simplex_row(costs: &[f64], self_idx: usize, k: usize) -> (Vec<(usize, f64)>, f64) {
    let mut order: Vec<usize> = (0..costs.len()).filter(|&j| j != self_idx).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));

    if k == order.len() {
        // No (k+1)-th neighbor exists; the constraint set forces uniform
        // weights over every candidate.
        let w = 1.0 / k as f64;
        return (order.into_iter().map(|j| (j, w)).collect(), 0.0);
    }

    let head_sum: f64 = order[..k].iter().map(|&j| costs[j]).sum();
    let b_next = costs[order[k]];
    let denom = (k as f64) * b_next - head_sum;
    if denom <= 1e-12 * (k as f64) * b_next.max(1e-300) {
        let w = 1.0 / k as f64;
        return (
            order[..k].iter().map(|&j| (j, w)).collect(),
            (denom / 2.0).max(0.0),
        );
    }
    let weights = order[..k]
        .iter()
        .map(|&j| (j, (b_next - costs[j]) / denom))
        .collect();
    (weights, denom / 2.0)
}

/// Laplacian of the symmetrized graph: `L = G - (S + Sᵀ)/2` with `G` the
/// diagonal of row sums of the symmetrized matrix. Diagonally dominant with
/// nonnegative diagonal, hence positive semidefinite.
pub fn laplacian(graph: &SimilarityGraph) -> GraphLaplacian {
    let n = graph.s.nrows();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = -0.5 * (graph.s[(i, j)] + graph.s[(j, i)]);
        }
    }
    for i in 0..n {
        let degree: f64 = -(0..n).map(|j| l[(i, j)]).sum::<f64>();
        l[(i, i)] += degree;
    }
    GraphLaplacian { l }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Euclidean projection of `v` onto the probability simplex.
    fn project_simplex(v: &[f64]) -> Vec<f64> {
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cumsum = 0.0;
        let mut rho = 0;
        let mut theta = 0.0;
        for (idx, &u) in sorted.iter().enumerate() {
            cumsum += u;
            let t = (cumsum - 1.0) / (idx as f64 + 1.0);
            if u - t > 0.0 {
                rho = idx;
                theta = t;
            }
        }
        let _ = rho;
        v.iter().map(|&u| (u - theta).max(0.0)).collect()
    }

    /// Row objective of the k-sparse subproblem at a given support.
    fn row_objective(costs: &[f64], support: &[usize], weights: &[f64], xi: f64) -> f64 {
        support
            .iter()
            .zip(weights)
            .map(|(&j, &w)| costs[j] * w + xi * w * w)
            .sum()
    }

    /// Brute-force minimizer over every k-subset of candidates: on each
    /// support the restricted problem is a simplex projection of
    /// `-b/(2 xi)`.
    fn brute_force_row(costs: &[f64], self_idx: usize, k: usize, xi: f64) -> f64 {
        let candidates: Vec<usize> =
            (0..costs.len()).filter(|&j| j != self_idx).collect();
        let mut best = f64::INFINITY;
        let mut stack = vec![(Vec::new(), 0usize)];
        while let Some((chosen, start)) = stack.pop() {
            if chosen.len() == k {
                let target: Vec<f64> =
                    chosen.iter().map(|&j: &usize| -costs[j] / (2.0 * xi)).collect();
                let weights = project_simplex(&target);
                let value = row_objective(costs, &chosen, &weights, xi);
                best = best.min(value);
                continue;
            }
            for pos in start..candidates.len() {
                let mut next = chosen.clone();
                next.push(candidates[pos]);
                stack.push((next, pos + 1));
            }
        }
        best
    }

    #[test]
    fn collinear_points_k1() {
        let x = array![[0.0], [1.0], [10.0]];
        let g = initial_knn_graph(&x, 1).unwrap();
        assert_eq!(g.s[(0, 1)], 1.0);
        assert_eq!(g.s[(1, 0)], 1.0);
        assert_eq!(g.s[(2, 1)], 1.0);
        assert_eq!(g.s[(0, 2)], 0.0);
        assert_eq!(g.s[(2, 0)], 0.0);
    }

    #[test]
    fn two_samples_force_full_weight() {
        let x = array![[0.0, 0.0], [3.0, 4.0]];
        let g = initial_knn_graph(&x, 1).unwrap();
        assert_eq!(g.s, array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn k_out_of_range_is_rejected() {
        let x = array![[0.0], [1.0], [2.0]];
        assert!(initial_knn_graph(&x, 3).is_err());
        assert!(initial_knn_graph(&x, 0).is_err());
    }

    #[test]
    fn closed_form_row_example() {
        // sorted costs (excluding self) [1, 2, 4], k = 2
        let costs = [0.0, 1.0, 2.0, 4.0];
        let (weights, xi) = sparse_simplex_row(&costs, 0, 2);
        assert_eq!(weights.len(), 2);
        assert!((weights[0].1 - 3.0 / 5.0).abs() < 1e-15);
        assert!((weights[1].1 - 2.0 / 5.0).abs() < 1e-15);
        assert!((xi - 2.5).abs() < 1e-15);
    }

    #[test]
    fn k1_puts_all_weight_on_nearest() {
        let costs = [0.0, 2.0, 5.0];
        let (weights, _) = sparse_simplex_row(&costs, 0, 1);
        assert_eq!(weights, vec![(1, 1.0)]);
    }

    #[test]
    fn equal_costs_fall_back_to_uniform() {
        let costs = [0.0, 3.0, 3.0, 3.0, 3.0];
        let (weights, xi) = sparse_simplex_row(&costs, 0, 2);
        assert_eq!(weights, vec![(1, 0.5), (2, 0.5)]);
        assert_eq!(xi, 0.0);
    }

    #[test]
    fn rows_match_brute_force_qp() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = Array2::from_shape_fn((8, 3), |_| rng.random_range(-2.0..2.0));
        let g = initial_knn_graph(&x, 3).unwrap();
        let b = pairwise_costs(&x);
        for i in 0..8 {
            let costs: Vec<f64> = b.row(i).to_vec();
            let closed: f64 = (0..8)
                .map(|j| costs[j] * g.s[(i, j)] + g.xi[i] * g.s[(i, j)] * g.s[(i, j)])
                .sum();
            let brute = brute_force_row(&costs, i, 3, g.xi[i]);
            assert!(
                closed <= brute + 1e-8,
                "row {i}: closed {closed} > brute {brute}"
            );
            assert!((closed - brute).abs() < 1e-8);
        }
    }

    #[test]
    fn laplacian_two_node_graph() {
        let g = SimilarityGraph {
            s: array![[0.0, 1.0], [1.0, 0.0]],
            k: 1,
            xi: Array1::zeros(2),
        };
        let l = laplacian(&g);
        assert_eq!(l.l, array![[1.0, -1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((6, 2), |_| rng.random_range(-1.0..1.0));
        let g = initial_knn_graph(&x, 2).unwrap();
        let l = laplacian(&g);
        let ones = Array1::ones(6);
        let out = l.l.dot(&ones);
        for v in out.iter() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_quadratic_form_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = Array2::from_shape_fn((6, 3), |_| rng.random_range(-1.0..1.0));
        let g = initial_knn_graph(&x, 2).unwrap();
        let l = laplacian(&g);
        let s_bar = (&g.s + &g.s.t()) * 0.5;
        for _ in 0..5 {
            let v = Array1::from_shape_fn(6, |_| rng.random_range(-1.0..1.0));
            let quad = v.dot(&l.l.dot(&v));
            let mut double_sum = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    let diff = v[i] - v[j];
                    double_sum += 0.5 * s_bar[(i, j)] * diff * diff;
                }
            }
            assert!((quad - double_sum).abs() < 1e-10);
            assert!(quad > -1e-10);
        }
    }

    #[test]
    fn duplicate_points_connect_to_each_other_not_themselves() {
        let x = array![[1.0, 2.0], [1.0, 2.0], [5.0, 5.0], [9.0, 1.0]];
        let g = initial_knn_graph(&x, 1).unwrap();
        assert_eq!(g.s[(0, 0)], 0.0);
        assert_eq!(g.s[(1, 1)], 0.0);
        assert_eq!(g.s[(0, 1)], 1.0);
        assert_eq!(g.s[(1, 0)], 1.0);
    }

    #[test]
    fn laplacian_is_positive_semidefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for k in [1usize, 3, 5] {
            let x = Array2::from_shape_fn((9, 4), |_| rng.random_range(-2.0..2.0));
            let g = initial_knn_graph(&x, k).unwrap();
            let l = laplacian(&g);
            let jittered = &l.l + &(Array2::<f64>::eye(9) * 1e-10);
            assert!(
                crate::linalg::cholesky(&jittered).is_some(),
                "Laplacian + 1e-10 I failed Cholesky for k={k}"
            );
        }
    }

    fn arb_costs() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..10.0, 6)
    }

    proptest! {
        #[test]
        fn rows_are_feasible(seed in 0u64..200, k in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 7;
            let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0));
            let g = initial_knn_graph(&x, k).unwrap();
            for i in 0..n {
                prop_assert_eq!(g.s[(i, i)], 0.0);
                let row_sum: f64 = g.s.row(i).sum();
                prop_assert!((row_sum - 1.0).abs() < 1e-10);
                let nnz = g.s.row(i).iter().filter(|&&v| v > 0.0).count();
                prop_assert!(nnz <= k);
                prop_assert!(g.s.row(i).iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
            }
        }

        #[test]
        fn shift_invariance(costs in arb_costs(), shift in 0.0f64..5.0, k in 1usize..4) {
            let mut with_self = vec![0.0];
            with_self.extend(&costs);
            let shifted: Vec<f64> = with_self.iter().map(|&b| b + shift).collect();
            let (w1, _) = sparse_simplex_row(&with_self, 0, k);
            let (w2, _) = sparse_simplex_row(&shifted, 0, k);
            prop_assert_eq!(w1.len(), w2.len());
            for ((j1, v1), (j2, v2)) in w1.iter().zip(w2.iter()) {
                prop_assert_eq!(j1, j2);
                prop_assert!((v1 - v2).abs() < 1e-9);
            }
        }

        #[test]
        fn closed_form_beats_random_feasible_vectors(seed in 0u64..50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 7;
            let k = 3;
            let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-2.0..2.0));
            let g = initial_knn_graph(&x, k).unwrap();
            let b = pairwise_costs(&x);
            for i in 0..n {
                let costs: Vec<f64> = b.row(i).to_vec();
                let xi = g.xi[i];
                let closed: f64 = (0..n)
                    .map(|j| costs[j] * g.s[(i, j)] + xi * g.s[(i, j)] * g.s[(i, j)])
                    .sum();
                for _ in 0..100 {
                    // random k-sparse simplex vector on a random support
                    let mut support: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                    for t in 0..k {
                        let j = rng.random_range(t..support.len());
                        support.swap(t, j);
                    }
                    let support = &support[..k];
                    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0f64..1.0) + 1e-9).collect();
                    let total: f64 = raw.iter().sum();
                    let value: f64 = support
                        .iter()
                        .zip(&raw)
                        .map(|(&j, &r)| {
                            let w = r / total;
                            costs[j] * w + xi * w * w
                        })
                        .sum();
                    prop_assert!(closed <= value + 1e-9);
                }
            }
        }
    }
}
