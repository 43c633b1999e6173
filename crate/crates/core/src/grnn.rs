//! General regression neural network: a kernel-weighted average of the
//! stored training targets.
//!
//! Weights are computed relative to the nearest stored pattern,
//! `exp(-(d_i^2 - d_min^2) / (2 sigma^2))`, which leaves the estimate
//! unchanged but keeps the denominator at least 1. Tiny widths therefore
//! degrade to the nearest neighbor's target instead of `0 / 0`. Terms are
//! summed in a canonical order so that the estimate does not depend on the
//! order of the training rows.

use ndarray::Array2;

use crate::data::{Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::kernel::{sq_dist, GaussianKernelParams};

#[derive(Debug, Clone)]
pub struct GrnnModel {
    train_features: Array2<f64>,
    train_targets: Vec<f64>,
    label_space: LabelSpace,
    params: GaussianKernelParams,
}

impl GrnnModel {
    pub fn new(train: &Dataset, params: GaussianKernelParams) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            train_features: train.features().clone(),
            train_targets: train.targets().to_vec(),
            label_space: train.label_space(),
            params,
        })
    }

    pub fn params(&self) -> GaussianKernelParams {
        self.params
    }

    pub fn with_params(mut self, params: GaussianKernelParams) -> Self {
        self.params = params;
        self
    }

    /// Classification threshold matching the training targets: 0.5 for
    /// continuous targets, 0 for signed ones.
    pub fn default_threshold(&self) -> f64 {
        default_threshold(self.label_space)
    }

    fn dim(&self) -> usize {
        self.train_features.ncols()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut terms: Vec<(f64, f64)> = self
            .train_features
            .rows()
            .into_iter()
            .zip(&self.train_targets)
            .map(|(row, &y)| (sq_dist(x, row.as_slice().expect("standard layout")), y))
            .collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (d_min, y_nearest) = terms[0];

        let two_s2 = 2.0 * self.params.sigma() * self.params.sigma();
        let mut num = 0.0;
        let mut den = 0.0;
        for &(d, y) in &terms {
            let w = (-(d - d_min) / two_s2).exp();
            num += w * y;
            den += w;
        }
        if !(den > 0.0 && den.is_finite() && num.is_finite()) {
            return Ok(y_nearest);
        }
        Ok(num / den)
    }

    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<f64> {
        Ok(threshold_sign(self.predict(x)?, threshold))
    }

    pub fn classify_default(&self, x: &[f64]) -> Result<f64> {
        self.classify(x, self.default_threshold())
    }
}

pub fn grnn_predict(m: &GrnnModel, x: &[f64]) -> Result<f64> {
    m.predict(x)
}

pub fn grnn_classify(m: &GrnnModel, x: &[f64], threshold: f64) -> Result<f64> {
    m.classify(x, threshold)
}

/// `+1` strictly above the threshold, `-1` otherwise.
#[inline]
pub fn threshold_sign(value: f64, threshold: f64) -> f64 {
    if value > threshold {
        1.0
    } else {
        -1.0
    }
}

pub fn default_threshold(space: LabelSpace) -> f64 {
    match space {
        LabelSpace::Continuous => 0.5,
        LabelSpace::SignedBinary => 0.0,
    }
}
