//! Binary soft-margin SVM trained by simplified sequential minimal
//! optimization.
//!
//! Each pass visits every multiplier that violates the KKT conditions and
//! pairs it with a second index, starting the search at a random offset and
//! moving on until some pair makes progress. The bias is re-derived from the
//! free support vectors once the multipliers settle, and the optimization
//! resumes if that leaves any KKT violation.

use ndarray::{Array2, Axis};
use rand::Rng as _;

use crate::data::{Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::kernel::{dot, sq_dist, GaussianKernelParams};
use crate::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SvmKernel {
    Linear,
    Gaussian(GaussianKernelParams),
}

impl SvmKernel {
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            SvmKernel::Linear => dot(x, y),
            SvmKernel::Gaussian(p) => p.eval_sq(sq_dist(x, y)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub kernel: SvmKernel,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10,
            kernel: SvmKernel::Linear,
            seed: 0,
        }
    }
}

impl SvmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trained SVM. Only patterns with a nonzero multiplier are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Array2<f64>,
    pub support_targets: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: SvmKernel,
}

/// Full solver output: the model plus one multiplier per training pattern.
#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: SvmModel,
    pub alphas: Vec<f64>,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.ncols()
    }

    /// `f(x) = sum_i alpha_i y_i k(x_i, x) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.decision_unchecked(x))
    }

    fn decision_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .rows()
            .into_iter()
            .zip(self.alphas.iter().zip(&self.support_targets))
            .map(|(sv, (a, y))| a * y * self.kernel.eval(sv.as_slice().expect("standard layout"), x))
            .sum::<f64>()
            + self.bias
    }

    /// `+1` when `f(x) >= 0`, else `-1`.
    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        Ok(if self.decision(x)? >= 0.0 { 1.0 } else { -1.0 })
    }

    /// Primal weight vector `w = sum_i alpha_i y_i x_i`; `None` for
    /// non-linear kernels.
    pub fn weight_vector(&self) -> Option<Vec<f64>> {
        if self.kernel != SvmKernel::Linear {
            return None;
        }
        let mut w = vec![0.0; self.dim()];
        for (sv, (a, y)) in self
            .support_vectors
            .rows()
            .into_iter()
            .zip(self.alphas.iter().zip(&self.support_targets))
        {
            for (wk, xk) in w.iter_mut().zip(sv) {
                *wk += a * y * xk;
            }
        }
        Some(w)
    }
}

pub fn svm_classify(m: &SvmModel, x: &[f64]) -> Result<f64> {
    m.classify(x)
}

pub fn svm_train(train: &Dataset, cfg: &SvmConfig) -> Result<SvmModel> {
    Ok(svm_fit(train, cfg)?.model)
}

/// Dual objective `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(alphas: &[f64], targets: &[f64], gram: &Array2<f64>) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * targets[i] * targets[j] * gram[[i, j]];
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

pub fn gram_matrix(d: &Dataset, kernel: SvmKernel) -> Array2<f64> {
    let n = d.len();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(d.row(i), d.row(j));
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

const ALPHA_STEP_EPS: f64 = 1e-12;
const MAX_ROUNDS: usize = 20;

struct Smo<'a> {
    k: Array2<f64>,
    y: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    b: f64,
    // Cached sum_j alpha_j y_j K_ij, without the bias.
    g: Vec<f64>,
}

impl Smo<'_> {
    fn error(&self, i: usize) -> f64 {
        self.g[i] + self.b - self.y[i]
    }

    fn violates(&self, i: usize, tol: f64) -> bool {
        let r = self.y[i] * self.error(i);
        (r < -tol && self.alpha[i] < self.c) || (r > tol && self.alpha[i] > 0.0)
    }

    fn take_step(&mut self, i: usize, j: usize) -> bool {
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        if hi - lo <= 0.0 {
            return false;
        }
        let eta = 2.0 * self.k[[i, j]] - self.k[[i, i]] - self.k[[j, j]];
        if eta >= 0.0 {
            return false;
        }
        let (ei, ej) = (self.error(i), self.error(j));
        let aj_new = (aj - yj * (ei - ej) / eta).clamp(lo, hi);
        if (aj_new - aj).abs() < ALPHA_STEP_EPS * (1.0 + aj.abs()) {
            return false;
        }
        let ai_new = ai + yi * yj * (aj - aj_new);
        let (dai, daj) = (ai_new - ai, aj_new - aj);

        let b1 = self.b - ei - yi * dai * self.k[[i, i]] - yj * daj * self.k[[i, j]];
        let b2 = self.b - ej - yi * dai * self.k[[i, j]] - yj * daj * self.k[[j, j]];
        self.b = if ai_new > 0.0 && ai_new < self.c {
            b1
        } else if aj_new > 0.0 && aj_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        for (t, g) in self.g.iter_mut().enumerate() {
            *g += yi * dai * self.k[[i, t]] + yj * daj * self.k[[j, t]];
        }
        true
    }

    /// Bias from the free multipliers, or the midpoint of the feasible
    /// interval when every multiplier sits at a bound.
    fn refit_bias(&mut self) {
        let free_tol = 1e-9 * self.c;
        let free: Vec<usize> = (0..self.y.len())
            .filter(|&i| self.alpha[i] > free_tol && self.alpha[i] < self.c - free_tol)
            .collect();
        if !free.is_empty() {
            self.b = free.iter().map(|&i| self.y[i] - self.g[i]).sum::<f64>() / free.len() as f64;
            return;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.y.len() {
            let edge = self.y[i] - self.g[i];
            // alpha = 0 needs y f >= 1, alpha = C needs y f <= 1.
            let lower = (self.alpha[i] <= free_tol) == (self.y[i] > 0.0);
            if lower {
                lo = lo.max(edge);
            } else {
                hi = hi.min(edge);
            }
        }
        self.b = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        };
    }
}

/// Trains and returns the model together with every training multiplier.
pub fn svm_fit(train: &Dataset, cfg: &SvmConfig) -> Result<SvmFit> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train.label_space() != LabelSpace::SignedBinary {
        return Err(Error::UnlabeledData);
    }
    let y = train.targets().to_vec();
    if y.iter().all(|&t| t > 0.0) || y.iter().all(|&t| t < 0.0) {
        return Err(Error::SingleClass);
    }
    let n = y.len();
    let mut rng = seeded_rng(cfg.seed);
    let mut smo = Smo {
        k: gram_matrix(train, cfg.kernel),
        y: &y,
        c: cfg.c,
        alpha: vec![0.0; n],
        b: 0.0,
        g: vec![0.0; n],
    };

    let max_updates = 10_000 * n.max(10);
    let mut updates = 0;
    for _round in 0..MAX_ROUNDS {
        let mut passes = 0;
        while passes < cfg.max_passes && updates < max_updates {
            let mut changed = 0;
            for i in 0..n {
                if !smo.violates(i, cfg.tol) {
                    continue;
                }
                let offset = rng.random_range(0..n - 1);
                for t in 0..n - 1 {
                    let j = (i + 1 + (offset + t) % (n - 1)) % n;
                    if smo.take_step(i, j) {
                        changed += 1;
                        updates += 1;
                        break;
                    }
                }
            }
            if changed == 0 {
                passes += 1;
            } else {
                passes = 0;
            }
        }
        smo.refit_bias();
        if updates >= max_updates || (0..n).all(|i| !smo.violates(i, cfg.tol)) {
            break;
        }
    }

    let keep: Vec<usize> = (0..n).filter(|&i| smo.alpha[i] > 0.0).collect();
    let model = SvmModel {
        support_vectors: train.features().select(Axis(0), &keep),
        support_targets: keep.iter().map(|&i| y[i]).collect(),
        alphas: keep.iter().map(|&i| smo.alpha[i]).collect(),
        bias: smo.b,
        kernel: cfg.kernel,
    };
    Ok(SvmFit {
        model,
        alphas: smo.alpha,
    })
}
