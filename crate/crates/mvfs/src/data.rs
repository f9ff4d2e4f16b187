//! Dataset ingestion, incomplete-view simulation, indicator matrices, and
//! mean initialization of missing blocks.
//!
//! A dataset is a list of row-aligned views. Each view `v` is a dense
//! `n x d_v` matrix plus a boolean observation mask of length `n`; a
//! masked-out sample means the entire row of that view is unknown. Missing
//! rows are stored as NaN so that any accidental read of unobserved data
//! poisons downstream results instead of silently biasing them.
//!
//! File formats:
//! - manifest: JSON `{ "views": [{"name", "path"}], "labels": path|null,
//!   "mask": path|null }`, paths relative to the manifest's directory;
//! - matrix CSV: no header, one sample per row; an all-empty row marks the
//!   sample missing in that view (rows must be entirely empty or full);
//! - mask CSV: `view_index,sample_index` pairs (0-based) of missing samples;
//! - labels CSV: one integer per row.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_seed;

/// Row-aligned multi-view data with per-view observation masks.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<Array2<f64>>,
    masks: Vec<Vec<bool>>,
    labels: Option<Vec<i64>>,
    names: Vec<String>,
}

impl MultiViewDataset {
    /// Build a dataset and validate all structural invariants:
    /// shared sample count, non-empty views, at least one observed sample
    /// per view, and at least one observed view per sample.
    pub fn new(
        views: Vec<Array2<f64>>,
        masks: Vec<Vec<bool>>,
        labels: Option<Vec<i64>>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::InvalidParameter("dataset has no views".into()));
        }
        if masks.len() != views.len() {
            return Err(Error::InvalidParameter(format!(
                "{} views but {} masks",
                views.len(),
                masks.len()
            )));
        }
        let n = views[0].nrows();
        if n == 0 {
            return Err(Error::InvalidParameter("dataset has no samples".into()));
        }
        let names = match names {
            Some(names) => {
                if names.len() != views.len() {
                    return Err(Error::InvalidParameter(format!(
                        "{} views but {} names",
                        views.len(),
                        names.len()
                    )));
                }
                names
            }
            None => (0..views.len()).map(|v| format!("view{v}")).collect(),
        };
        for (v, view) in views.iter().enumerate() {
            if view.nrows() != n {
                return Err(Error::RowCountMismatch {
                    view: names[v].clone(),
                    expected: n,
                    got: view.nrows(),
                });
            }
            if view.ncols() == 0 {
                return Err(Error::InvalidParameter(format!(
                    "view {} has no features",
                    names[v]
                )));
            }
            if masks[v].len() != n {
                return Err(Error::InvalidParameter(format!(
                    "mask of view {} has length {}, expected {}",
                    names[v],
                    masks[v].len(),
                    n
                )));
            }
            if !masks[v].iter().any(|&m| m) {
                return Err(Error::EmptyView { view: v });
            }
            for (i, &observed) in masks[v].iter().enumerate() {
                if observed && view.row(i).iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "view {}, sample {i}: observed row contains a non-finite value",
                        names[v]
                    )));
                }
            }
        }
        for i in 0..n {
            if !masks.iter().any(|m| m[i]) {
                return Err(Error::UnobservedSample { sample: i });
            }
        }
        if let Some(ref labels) = labels {
            if labels.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    n
                )));
            }
        }
        Ok(Self {
            views,
            masks,
            labels,
            names,
        })
    }

    /// Dataset with every sample observed in every view.
    pub fn complete(views: Vec<Array2<f64>>, labels: Option<Vec<i64>>) -> Result<Self> {
        let masks = views.iter().map(|v| vec![true; v.nrows()]).collect();
        Self::new(views, masks, labels, None)
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.ncols()).collect()
    }

    pub fn view(&self, v: usize) -> &Array2<f64> {
        &self.views[v]
    }

    pub fn mask(&self, v: usize) -> &[bool] {
        &self.masks[v]
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    /// True when every sample is observed in every view.
    pub fn is_complete(&self) -> bool {
        self.masks.iter().all(|m| m.iter().all(|&x| x))
    }

    pub fn missing_counts(&self) -> Vec<usize> {
        self.masks
            .iter()
            .map(|m| m.iter().filter(|&&x| !x).count())
            .collect()
    }
}

/// Index form of the observed/missing indicator matrices of one view.
///
/// `observed_rows` lists the original indices selected by the observed map
/// (ascending), `missing_rows` those selected by the missing map. The dense
/// 0/1 matrices are materialized on demand; all hot paths use the index
/// lists directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorPair {
    n: usize,
    observed_rows: Vec<usize>,
    missing_rows: Vec<usize>,
}

impl IndicatorPair {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn observed_rows(&self) -> &[usize] {
        &self.observed_rows
    }

    pub fn missing_rows(&self) -> &[usize] {
        &self.missing_rows
    }

    pub fn n_missing(&self) -> usize {
        self.missing_rows.len()
    }

    /// Dense `n x (n-m)` observed map.
    pub fn observed_matrix(&self) -> Array2<f64> {
        let mut k = Array2::zeros((self.n, self.observed_rows.len()));
        for (slot, &row) in self.observed_rows.iter().enumerate() {
            k[(row, slot)] = 1.0;
        }
        k
    }

    /// Dense `n x m` missing map.
    pub fn missing_matrix(&self) -> Array2<f64> {
        let mut k = Array2::zeros((self.n, self.missing_rows.len()));
        for (slot, &row) in self.missing_rows.iter().enumerate() {
            k[(row, slot)] = 1.0;
        }
        k
    }

    /// Scatter observed and missing blocks back into sample order.
    /// Observed rows are copied verbatim, so they stay bit-identical to the
    /// input no matter how often the missing block is rewritten.
    pub fn assemble(&self, observed: &Array2<f64>, missing: &Array2<f64>) -> Array2<f64> {
        let d = observed.ncols();
        let mut full = Array2::zeros((self.n, d));
        for (slot, &row) in self.observed_rows.iter().enumerate() {
            full.row_mut(row).assign(&observed.row(slot));
        }
        for (slot, &row) in self.missing_rows.iter().enumerate() {
            full.row_mut(row).assign(&missing.row(slot));
        }
        full
    }

    /// Gather the observed and missing blocks of a full matrix.
    pub fn split(&self, full: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let d = full.ncols();
        let mut observed = Array2::zeros((self.observed_rows.len(), d));
        for (slot, &row) in self.observed_rows.iter().enumerate() {
            observed.row_mut(slot).assign(&full.row(row));
        }
        let mut missing = Array2::zeros((self.missing_rows.len(), d));
        for (slot, &row) in self.missing_rows.iter().enumerate() {
            missing.row_mut(slot).assign(&full.row(row));
        }
        (observed, missing)
    }
}

/// Build the indicator pair of one view's mask.
pub fn build_indicators(mask: &[bool]) -> Result<IndicatorPair> {
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyView { view: 0 });
    }
    let observed_rows: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let missing_rows: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
    Ok(IndicatorPair {
        n: mask.len(),
        observed_rows,
        missing_rows,
    })
}

/// Record of one masking draw: ratio, seed, and the per-view missing lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub ratio: f64,
    pub seed: u64,
    /// Per view, the masked-out sample indices in ascending order.
    pub missing: Vec<Vec<usize>>,
}

/// Mask out `floor(n * ratio)` samples per view, uniformly at random under
/// `seed`, keeping every sample observed in at least one view. All views
/// but the last draw freely; the last view draws from the samples that are
/// still observed somewhere else, which succeeds whenever any feasible
/// assignment exists (full-joint rejection has vanishing acceptance for
/// large n). Pure in `(dataset, ratio, seed)`.
pub fn apply_mask(
    dataset: &MultiViewDataset,
    ratio: f64,
    seed: u64,
) -> Result<(MultiViewDataset, MaskSpec)> {
    if !(0.0..=0.9).contains(&ratio) {
        return Err(Error::InvalidParameter(format!(
            "mask ratio {ratio} outside [0, 0.9]"
        )));
    }
    if !dataset.is_complete() {
        return Err(Error::InvalidParameter(
            "apply_mask requires a complete dataset".into(),
        ));
    }
    let n = dataset.n_samples();
    let n_views = dataset.n_views();
    // Guard the floor against binary rounding of products like 10 * 0.3.
    let m = ((n as f64) * ratio + 1e-9).floor() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, "mask"));
    let mut missing: Vec<Vec<usize>> = Vec::new();
    for v in 0..n_views {
        if v + 1 < n_views || m == 0 {
            missing.push(sample_from_pool(&(0..n).collect::<Vec<_>>(), m, &mut rng));
        } else {
            // samples already missing in every earlier view must stay
            // observed here
            let pool: Vec<usize> = (0..n)
                .filter(|&i| missing.iter().any(|view_missing| !view_missing.contains(&i)))
                .collect();
            if pool.len() < m {
                return Err(Error::InfeasibleMask { ratio, view: v });
            }
            missing.push(sample_from_pool(&pool, m, &mut rng));
        }
    }

    let mut masks: Vec<Vec<bool>> = (0..n_views).map(|_| vec![true; n]).collect();
    for (v, view_missing) in missing.iter().enumerate() {
        for &i in view_missing {
            masks[v][i] = false;
        }
    }
    let masked = MultiViewDataset::new(
        dataset.views.clone(),
        masks,
        dataset.labels.clone(),
        Some(dataset.names.clone()),
    )?;
    Ok((
        masked,
        MaskSpec {
            ratio,
            seed,
            missing,
        },
    ))
}

/// Draw `m` distinct elements of `pool` (partial Fisher-Yates), ascending.
fn sample_from_pool(pool: &[usize], m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool = pool.to_vec();
    for i in 0..m {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut chosen: Vec<usize> = pool[..m].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Initialize each view's missing block with the column means of its
/// observed rows. Complete views get an empty `0 x d` block.
pub fn mean_initialize_missing(dataset: &MultiViewDataset) -> Result<Vec<Array2<f64>>> {
    let mut blocks = Vec::with_capacity(dataset.n_views());
    for v in 0..dataset.n_views() {
        let pair = build_indicators(dataset.mask(v))?;
        let d = dataset.view(v).ncols();
        let m = pair.n_missing();
        let mut means = Array1::<f64>::zeros(d);
        for &row in pair.observed_rows() {
            means += &dataset.view(v).row(row);
        }
        means /= pair.observed_rows().len() as f64;
        let mut block = Array2::zeros((m, d));
        for mut row in block.rows_mut() {
            row.assign(&means);
        }
        blocks.push(block);
    }
    Ok(blocks)
}

/// Per-view feature means and standard deviations, computed on observed
/// rows only, used to map solver output back to the data scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<Vec<f64>>,
    pub stds: Vec<Vec<f64>>,
}

impl Standardizer {
    /// Identity transform for `dims[v]`-dimensional views.
    pub fn identity(dims: &[usize]) -> Self {
        Standardizer {
            means: dims.iter().map(|&d| vec![0.0; d]).collect(),
            stds: dims.iter().map(|&d| vec![1.0; d]).collect(),
        }
    }

    /// Map rows of view `v` from standardized back to original scale.
    pub fn restore_rows(&self, v: usize, rows: &Array2<f64>) -> Array2<f64> {
        let mut out = rows.clone();
        for mut row in out.rows_mut() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = *x * self.stds[v][j] + self.means[v][j];
            }
        }
        out
    }
}

/// Standardize every view to zero mean and unit variance per feature, with
/// statistics taken over observed rows only. Missing rows become NaN in the
/// returned copy. Zero-variance features keep scale 1.
pub fn standardize(dataset: &MultiViewDataset) -> Result<(MultiViewDataset, Standardizer)> {
    let n = dataset.n_samples();
    let mut views = Vec::with_capacity(dataset.n_views());
    let mut means_all = Vec::with_capacity(dataset.n_views());
    let mut stds_all = Vec::with_capacity(dataset.n_views());
    for v in 0..dataset.n_views() {
        let x = dataset.view(v);
        let d = x.ncols();
        let observed: Vec<usize> = (0..n).filter(|&i| dataset.mask(v)[i]).collect();
        let count = observed.len() as f64;
        let mut means = vec![0.0; d];
        let mut stds = vec![0.0; d];
        for &i in &observed {
            for j in 0..d {
                means[j] += x[(i, j)];
            }
        }
        for mj in means.iter_mut() {
            *mj /= count;
        }
        for &i in &observed {
            for j in 0..d {
                let c = x[(i, j)] - means[j];
                stds[j] += c * c;
            }
        }
        for sj in stds.iter_mut() {
            *sj = (*sj / count).sqrt();
            if !(*sj > 0.0) {
                *sj = 1.0;
            }
        }
        let mut z = Array2::from_elem((n, d), f64::NAN);
        for &i in &observed {
            for j in 0..d {
                z[(i, j)] = (x[(i, j)] - means[j]) / stds[j];
            }
        }
        views.push(z);
        means_all.push(means);
        stds_all.push(stds);
    }
    let standardized = MultiViewDataset::new(
        views,
        dataset.masks.clone(),
        dataset.labels.clone(),
        Some(dataset.names.clone()),
    )?;
    Ok((
        standardized,
        Standardizer {
            means: means_all,
            stds: stds_all,
        },
    ))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    views: Vec<ManifestView>,
    #[serde(default)]
    labels: Option<String>,
    #[serde(default)]
    mask: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestView {
    name: String,
    path: String,
}

/// Load a dataset from a JSON manifest listing per-view CSV matrices and
/// optional label/mask files. Paths are resolved relative to the manifest.
pub fn load_dataset(manifest_path: &Path) -> Result<MultiViewDataset> {
    let text = fs::read_to_string(manifest_path).map_err(|source| Error::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    if manifest.views.is_empty() {
        return Err(Error::Manifest {
            path: manifest_path.to_path_buf(),
            message: "manifest lists no views".into(),
        });
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut views = Vec::new();
    let mut masks = Vec::new();
    let mut names = Vec::new();
    let mut n: Option<usize> = None;
    for view in &manifest.views {
        let path = base.join(&view.path);
        let (matrix, mask) = read_matrix_csv(&path)?;
        if let Some(expected) = n {
            if matrix.nrows() != expected {
                return Err(Error::RowCountMismatch {
                    view: view.name.clone(),
                    expected,
                    got: matrix.nrows(),
                });
            }
        } else {
            n = Some(matrix.nrows());
        }
        views.push(matrix);
        masks.push(mask);
        names.push(view.name.clone());
    }
    let n = n.unwrap();

    if let Some(mask_file) = &manifest.mask {
        let path = base.join(mask_file);
        for (v, i) in read_mask_csv(&path)? {
            if v >= views.len() || i >= n {
                return Err(Error::MalformedFile {
                    path,
                    row: 0,
                    message: format!("mask entry ({v}, {i}) out of range"),
                });
            }
            masks[v][i] = false;
        }
    }

    let labels = match &manifest.labels {
        Some(label_file) => Some(read_labels_csv(&base.join(label_file), n)?),
        None => None,
    };

    MultiViewDataset::new(views, masks, labels, Some(names))
}

/// One matrix CSV: returns the data (missing rows as NaN) and the mask.
fn read_matrix_csv(path: &Path) -> Result<(Array2<f64>, Vec<bool>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut mask: Vec<bool> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            row: idx,
            message: e.to_string(),
        })?;
        let fields: Vec<&str> = record.iter().collect();
        let d = *width.get_or_insert(fields.len());
        if fields.len() != d {
            return Err(Error::MalformedFile {
                path: path.to_path_buf(),
                row: idx,
                message: format!("expected {d} columns, found {}", fields.len()),
            });
        }
        let empty = fields.iter().filter(|f| f.is_empty()).count();
        if empty == d {
            rows.push(vec![f64::NAN; d]);
            mask.push(false);
            continue;
        }
        if empty > 0 {
            return Err(Error::MalformedFile {
                path: path.to_path_buf(),
                row: idx,
                message: "row mixes empty and non-empty cells; a missing sample must have an entirely empty row".into(),
            });
        }
        let mut row = Vec::with_capacity(d);
        for (col, field) in fields.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::MalformedFile {
                path: path.to_path_buf(),
                row: idx,
                message: format!("column {col}: cannot parse {field:?} as a number"),
            })?;
            row.push(value);
        }
        rows.push(row);
        mask.push(true);
    }
    if rows.is_empty() {
        return Err(Error::MalformedFile {
            path: path.to_path_buf(),
            row: 0,
            message: "matrix file is empty".into(),
        });
    }
    let d = width.unwrap();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let matrix = Array2::from_shape_vec((mask.len(), d), flat).expect("row-major shape");
    Ok((matrix, mask))
}

fn read_mask_csv(path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;
    let mut entries = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            row: idx,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::MalformedFile {
                path: path.to_path_buf(),
                row: idx,
                message: format!("expected `view,sample`, found {} fields", record.len()),
            });
        }
        let parse = |field: &str| -> Result<usize> {
            field.parse().map_err(|_| Error::MalformedFile {
                path: path.to_path_buf(),
                row: idx,
                message: format!("cannot parse {field:?} as an index"),
            })
        };
        entries.push((parse(&record[0])?, parse(&record[1])?));
    }
    Ok(entries)
}

fn read_labels_csv(path: &Path, n: usize) -> Result<Vec<i64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_open_error(path, e))?;
    let mut labels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            row: idx,
            message: e.to_string(),
        })?;
        let field = record.get(0).unwrap_or("");
        let label: i64 = field.parse().map_err(|_| Error::MalformedFile {
            path: path.to_path_buf(),
            row: idx,
            message: format!("cannot parse {field:?} as an integer label"),
        })?;
        labels.push(label);
    }
    if labels.len() != n {
        return Err(Error::MalformedFile {
            path: path.to_path_buf(),
            row: labels.len(),
            message: format!("{} labels for {n} samples", labels.len()),
        });
    }
    Ok(labels)
}

fn csv_open_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::MalformedFile {
            path: path.to_path_buf(),
            row: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Write a dataset (views, optional labels, manifest) into `dir`.
/// Masked-out rows are written as all-empty CSV rows, the normalized
/// on-disk form of a missing sample. Returns the manifest path.
pub fn write_dataset(dir: &Path, dataset: &MultiViewDataset) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut manifest_views = Vec::new();
    for v in 0..dataset.n_views() {
        let file = format!("{}.csv", dataset.name(v));
        let path = dir.join(&file);
        write_matrix_csv(&path, dataset.view(v), Some(dataset.mask(v)))?;
        manifest_views.push(ManifestView {
            name: dataset.name(v).to_string(),
            path: file,
        });
    }
    let labels = match dataset.labels() {
        Some(labels) => {
            let path = dir.join("labels.csv");
            let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
            fs::write(&path, body).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Some("labels.csv".to_string())
        }
        None => None,
    };
    let manifest = Manifest {
        views: manifest_views,
        labels,
        mask: None,
    };
    let manifest_path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|source| Error::Io {
        path: manifest_path.clone(),
        source,
    })?;
    Ok(manifest_path)
}

/// Write one matrix as CSV; rows with `mask[i] == false` become empty rows.
/// Single-column missing rows are written as `""` so they survive CSV
/// parsing (a fully blank line is not a record).
pub fn write_matrix_csv(path: &Path, matrix: &Array2<f64>, mask: Option<&[bool]>) -> Result<()> {
    let d = matrix.ncols();
    let mut out = String::new();
    for (i, row) in matrix.rows().into_iter().enumerate() {
        let observed = mask.is_none_or(|m| m[i]);
        if observed {
            let mut first = true;
            for x in row.iter() {
                if !first {
                    out.push(',');
                }
                out.push_str(&format!("{x}"));
                first = false;
            }
        } else if d == 1 {
            out.push_str("\"\"");
        } else {
            out.push_str(&",".repeat(d - 1));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
