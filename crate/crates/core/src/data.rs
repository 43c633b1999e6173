//! Datasets: CSV loading, relabeling, splitting, standardization and the
//! synthetic generators used in place of an external benchmark set.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::{seeded_rng, sign_class};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelSpace {
    /// Real-valued targets, usually in `[0, 1]`.
    Continuous,
    /// Every target is exactly `+1.0` or `-1.0`.
    SignedBinary,
}

/// Feature matrix (one row per pattern) with its targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    targets: Array1<f64>,
    label_space: LabelSpace,
}

impl Dataset {
    pub fn new(features: Array2<f64>, targets: impl Into<Array1<f64>>, label_space: LabelSpace) -> Result<Self> {
        let targets = targets.into();
        if features.nrows() != targets.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite feature value {v}")));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidDataset("non-finite target".into()));
        }
        if label_space == LabelSpace::SignedBinary && targets.iter().any(|&t| t != 1.0 && t != -1.0) {
            return Err(Error::InvalidDataset(
                "signed dataset with a target outside {+1, -1}".into(),
            ));
        }
        Ok(Self {
            features: features.as_standard_layout().into_owned(),
            targets,
            label_space,
        })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>, label_space: LabelSpace) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Shape {
                row: i,
                expected: dim,
                found: r.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let features =
            Array2::from_shape_vec((rows.len(), dim), flat).map_err(|e| Error::InvalidDataset(e.to_string()))?;
        Self::new(features, targets, label_space)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.targets
    }

    pub fn label_space(&self) -> LabelSpace {
        self.label_space
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn pattern(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Pattern `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        self.features
            .row(i)
            .to_slice()
            .expect("features are stored in standard layout")
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    /// Signed class (+1/-1) of pattern `i`; continuous targets go through the
    /// relabeling threshold.
    pub fn class_of(&self, i: usize) -> f64 {
        sign_class(self.targets[i], self.label_space)
    }

    /// Signed classes of every pattern.
    pub fn classes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.class_of(i)).collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            label_space: self.label_space,
        }
    }
}

/// Reads a headerless (or single-header) comma-separated file of numbers.
/// Column `target_column` becomes the target, every other column a feature.
pub fn load_csv(path: impl AsRef<Path>, target_column: usize, skip_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, target_column, skip_header)
}

/// Parses CSV text; see [`load_csv`]. Row numbers in errors count data rows
/// from 0, after the skipped header.
pub fn parse_csv(text: &str, target_column: usize, skip_header: bool) -> Result<Dataset> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if skip_header {
        lines.next();
    }
    let mut width = None;
    let mut flat = Vec::new();
    let mut targets = Vec::new();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::Shape {
                row,
                expected,
                found: fields.len(),
            });
        }
        if target_column >= expected {
            return Err(Error::Parse {
                row,
                column: target_column,
                message: format!("target column out of range for {expected} fields"),
            });
        }
        for (column, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("`{}` is not a number", field.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column,
                    message: "non-finite value".into(),
                });
            }
            if column == target_column {
                targets.push(value);
            } else {
                flat.push(value);
            }
        }
    }
    let Some(width) = width else {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "no data rows".into(),
        });
    };
    let features =
        Array2::from_shape_vec((targets.len(), width - 1), flat).map_err(|e| Error::InvalidDataset(e.to_string()))?;
    Dataset::new(features, targets, LabelSpace::Continuous)
}

/// Writes the dataset as CSV with the target in the last column.
pub fn to_csv(d: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..d.len() {
        for v in d.row(i) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{}\n", d.target(i)));
    }
    out
}

/// Thresholds continuous targets at 0.5 into `+1.0` / `-1.0`. A target of
/// exactly 0.5 becomes `+1.0`.
pub fn relabel_signed(d: &Dataset) -> Result<Dataset> {
    if d.label_space == LabelSpace::SignedBinary {
        return Err(Error::AlreadySigned);
    }
    Ok(Dataset {
        features: d.features.clone(),
        targets: d.targets.mapv(|t| sign_class(t, LabelSpace::Continuous)),
        label_space: LabelSpace::SignedBinary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.9,
            seed: 0,
            stratified: true,
        }
    }
}

/// Index sets produced by [`split_indices`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle split. Stratification groups patterns by their signed
/// class (continuous targets use the relabeling threshold).
pub fn split_indices(d: &Dataset, spec: &SplitSpec) -> Result<SplitIndices> {
    let n = d.len();
    if n < 2 {
        return Err(Error::TooFewPatterns { needed: 2, found: n });
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let n_train = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut rng = seeded_rng(spec.seed);

    let (mut train, mut test) = if spec.stratified {
        let mut pos: Vec<usize> = (0..n).filter(|&i| d.class_of(i) > 0.0).collect();
        let mut neg: Vec<usize> = (0..n).filter(|&i| d.class_of(i) < 0.0).collect();
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let groups = [pos, neg];
        let alloc = largest_remainder(n_train, &[groups[0].len(), groups[1].len()]);
        let mut train = Vec::with_capacity(n_train);
        let mut test = Vec::with_capacity(n - n_train);
        for (g, take) in groups.iter().zip(alloc) {
            train.extend_from_slice(&g[..take]);
            test.extend_from_slice(&g[take..]);
        }
        (train, test)
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let test = idx.split_off(n_train);
        (idx, test)
    };
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(SplitIndices { train, test })
}

/// Splits a dataset into `(train, test)`.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(d, spec)?;
    Ok((d.subset(&idx.train), d.subset(&idx.test)))
}

/// Apportions `total` across groups proportionally to their sizes.
fn largest_remainder(total: usize, sizes: &[usize]) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let quotas: Vec<f64> = sizes.iter().map(|&s| total as f64 * s as f64 / n as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = total - alloc.iter().sum::<usize>();
    for &g in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if alloc[g] < sizes[g] {
            alloc[g] += 1;
            left -= 1;
        }
    }
    alloc
}

/// Per-column z-score transform fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Array1<f64>,
    pub stddevs: Array1<f64>,
}

/// Fits column means and population standard deviations. Constant columns get
/// a divisor of 1 so they standardize to zero.
pub fn fit_standardizer(d: &Dataset) -> Result<Standardizer> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let means = d.features.mean_axis(Axis(0)).expect("nonempty");
    let stddevs = d
        .features
        .std_axis(Axis(0), 0.0)
        .iter()
        .zip(means.iter())
        .map(|(&s, &m)| if s <= 1e-12 * m.abs().max(1.0) { 1.0 } else { s })
        .collect();
    Ok(Standardizer { means, stddevs })
}

impl Standardizer {
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        if d.dim() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: d.dim(),
            });
        }
        let features = (&d.features - &self.means) / &self.stddevs;
        Ok(Dataset {
            features,
            targets: d.targets.clone(),
            label_space: d.label_space,
        })
    }
}

pub fn apply_standardizer(s: &Standardizer, d: &Dataset) -> Result<Dataset> {
    s.apply(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthKind {
    /// Two isotropic Gaussian blobs centered at (-1.5, -1.5) and (1.5, 1.5).
    TwoGaussians,
    /// A unit disc (positive) inside an annulus of radii 1.5..2.5 (negative).
    Ring,
    /// Uniform square `[-1, 1]^2`, positive where `x * y > 0`.
    Xor,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::TwoGaussians => "two_gaussians",
            SynthKind::Ring => "ring",
            SynthKind::Xor => "xor",
        }
    }
}

impl std::str::FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "two_gaussians" | "twogaussians" => Ok(SynthKind::TwoGaussians),
            "ring" => Ok(SynthKind::Ring),
            "xor" => Ok(SynthKind::Xor),
            other => Err(Error::InvalidConfig(format!("unknown synthetic dataset `{other}`"))),
        }
    }
}

/// Two-dimensional synthetic binary problem with continuous targets in
/// `[0, 1]`: positives draw their target from `[0.55, 1.0]`, negatives from
/// `[0.0, 0.45]`, so relabeling recovers the generating class. Classes
/// alternate row by row.
pub fn synth_dataset(kind: SynthKind, n: usize, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::TooFewPatterns { needed: 4, found: n });
    }
    let mut rng = seeded_rng(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let (point, positive) = match kind {
            SynthKind::TwoGaussians => {
                let positive = i % 2 == 0;
                let m = if positive { 1.5 } else { -1.5 };
                (vec![m + normal.sample(&mut rng), m + normal.sample(&mut rng)], positive)
            }
            SynthKind::Ring => {
                let positive = i % 2 == 0;
                let (r_lo, r_hi) = if positive { (0.0_f64, 1.0_f64) } else { (1.5, 2.5) };
                let u: f64 = rng.random();
                let r = (r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo)).sqrt();
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                (vec![r * theta.cos(), r * theta.sin()], positive)
            }
            SynthKind::Xor => {
                let x = rng.random_range(-1.0..1.0);
                let y = rng.random_range(-1.0..1.0);
                (vec![x, y], x * y > 0.0)
            }
        };
        let u: f64 = rng.random();
        targets.push(if positive { 0.55 + 0.45 * u } else { 0.45 * u });
        rows.push(point);
    }
    Dataset::from_rows(&rows, targets, LabelSpace::Continuous)
}

/// Population standard deviation of every feature value pooled together.
pub fn pooled_stddev(d: &Dataset) -> f64 {
    d.features.std(0.0)
}
