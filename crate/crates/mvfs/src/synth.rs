//! Planted-cluster synthetic multi-view data for fixtures and benchmarks.
//!
//! Each view carries a configurable number of informative features (cluster
//! centers plus Gaussian noise) followed by pure-noise features that carry
//! no cluster signal. All views share one balanced, shuffled cluster
//! assignment, so feature selection should recover the informative columns
//! and clustering on them should recover the labels.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::MultiViewDataset;
use crate::error::{Error, Result};
use crate::seeding::stream_seed;

/// Feature layout of one synthetic view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticView {
    pub informative: usize,
    pub noise: usize,
}

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub clusters: usize,
    pub views: Vec<SyntheticView>,
    /// Standard deviation of the cluster-center coordinates.
    pub separation: f64,
    /// Within-cluster noise on informative features.
    pub noise_std: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, clusters: usize, views: Vec<SyntheticView>, seed: u64) -> Self {
        SyntheticSpec {
            n,
            clusters,
            views,
            separation: 3.0,
            noise_std: 1.0,
            seed,
        }
    }
}

/// Generate a complete labeled dataset from `spec`. Deterministic in the
/// spec, including the seed.
pub fn generate(spec: &SyntheticSpec) -> Result<MultiViewDataset> {
    if spec.clusters < 1 || spec.n < spec.clusters {
        return Err(Error::InvalidParameter(format!(
            "cannot plant {} clusters in {} samples",
            spec.clusters, spec.n
        )));
    }
    if spec.views.is_empty() {
        return Err(Error::InvalidParameter("no views requested".into()));
    }
    for (v, view) in spec.views.iter().enumerate() {
        if view.informative + view.noise == 0 {
            return Err(Error::InvalidParameter(format!(
                "view {v} has zero features"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, "synth"));
    let center_dist = Normal::new(0.0, spec.separation).expect("positive std");
    let noise_dist = Normal::new(0.0, spec.noise_std).expect("positive std");
    let unit = Normal::new(0.0, 1.0).unwrap();

    // Balanced labels, shuffled.
    let mut labels: Vec<i64> = (0..spec.n).map(|i| (i % spec.clusters) as i64).collect();
    labels.shuffle(&mut rng);

    let mut views = Vec::with_capacity(spec.views.len());
    for view in &spec.views {
        let d = view.informative + view.noise;
        let centers = Array2::from_shape_fn((spec.clusters, view.informative), |_| {
            center_dist.sample(&mut rng)
        });
        let mut x = Array2::zeros((spec.n, d));
        for i in 0..spec.n {
            let c = labels[i] as usize;
            for j in 0..view.informative {
                x[(i, j)] = centers[(c, j)] + noise_dist.sample(&mut rng);
            }
            for j in view.informative..d {
                x[(i, j)] = unit.sample(&mut rng);
            }
        }
        views.push(x);
    }
    MultiViewDataset::complete(views, Some(labels))
}
