//! Steady-state genetic algorithm over a single kernel width, plus the
//! cross-validated fitness it maximizes.
//!
//! Individuals are `ln(sigma)`. Every step draws two parents by tournament,
//! blends them (BLX-alpha), applies Gaussian mutation, clamps to the allowed
//! range and replaces the worst member of the population when the child is at
//! least as fit.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::data::{relabel_signed, Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::grnn::GrnnModel;
use crate::kernel::GaussianKernelParams;
use crate::metrics::{confusion, report};
use crate::seeded_rng;
use crate::svm::{svm_train, SvmConfig, SvmKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitnessMetric {
    F1,
    Accuracy,
}

impl FitnessMetric {
    pub fn name(self) -> &'static str {
        match self {
            FitnessMetric::F1 => "f1",
            FitnessMetric::Accuracy => "accuracy",
        }
    }

    pub fn pick(self, s: CvScores) -> f64 {
        match self {
            FitnessMetric::F1 => s.f1,
            FitnessMetric::Accuracy => s.accuracy,
        }
    }
}

impl std::str::FromStr for FitnessMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(FitnessMetric::F1),
            "accuracy" | "acc" => Ok(FitnessMetric::Accuracy),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

/// Model whose Gaussian width is being tuned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaModel {
    Grnn,
    /// Gaussian-kernel SVM with box constraint `c`.
    RbfSvm {
        c: f64,
    },
}

impl SigmaModel {
    pub fn name(&self) -> &'static str {
        match self {
            SigmaModel::Grnn => "grnn",
            SigmaModel::RbfSvm { .. } => "rbf_svm",
        }
    }
}

/// Fold means of both metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvScores {
    pub f1: f64,
    pub accuracy: f64,
}

/// Stratified fold assignment: a seeded shuffle, then positives and
/// negatives dealt round-robin across folds.
pub fn fold_assignment(d: &Dataset, folds: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut seeded_rng(seed));
    let (pos, neg): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| d.class_of(i) > 0.0);
    let mut fold = vec![0; d.len()];
    for (k, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = k % folds;
    }
    fold
}

/// Mean F1 and accuracy over held-out folds for one width.
pub fn cv_scores(train: &Dataset, model: SigmaModel, sigma: f64, folds: usize, seed: u64) -> Result<CvScores> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if train.len() < folds {
        return Err(Error::TooFewPatterns {
            needed: folds,
            found: train.len(),
        });
    }
    let params = GaussianKernelParams::new(sigma)?;
    let assignment = fold_assignment(train, folds, seed);
    let (mut f1, mut acc) = (0.0, 0.0);
    for k in 0..folds {
        let fit_idx: Vec<usize> = (0..train.len()).filter(|&i| assignment[i] != k).collect();
        let held_idx: Vec<usize> = (0..train.len()).filter(|&i| assignment[i] == k).collect();
        let fit = train.subset(&fit_idx);
        let held = train.subset(&held_idx);
        let predicted = predict_fold(&fit, &held, model, params, seed)?;
        let r = report(confusion(&predicted, &held.classes())?);
        f1 += r.f1;
        acc += r.accuracy;
    }
    Ok(CvScores {
        f1: f1 / folds as f64,
        accuracy: acc / folds as f64,
    })
}

fn predict_fold(
    fit: &Dataset,
    held: &Dataset,
    model: SigmaModel,
    params: GaussianKernelParams,
    seed: u64,
) -> Result<Vec<f64>> {
    match model {
        SigmaModel::Grnn => {
            let m = GrnnModel::new(fit, params)?;
            (0..held.len()).map(|i| m.classify_default(held.row(i))).collect()
        }
        SigmaModel::RbfSvm { c } => {
            let fit = match fit.label_space() {
                LabelSpace::Continuous => relabel_signed(fit)?,
                LabelSpace::SignedBinary => fit.clone(),
            };
            let cfg = SvmConfig {
                c,
                kernel: SvmKernel::Gaussian(params),
                seed,
                ..Default::default()
            };
            match svm_train(&fit, &cfg) {
                Ok(m) => (0..held.len()).map(|i| m.classify(held.row(i))).collect(),
                // A fold holding one class only: predict that class.
                Err(Error::SingleClass) => Ok(vec![fit.target(0); held.len()]),
                Err(e) => Err(e),
            }
        }
    }
}

/// Mean of `metric` over `folds` held-out folds of a GRNN with width `sigma`.
pub fn cv_fitness(train: &Dataset, sigma: f64, metric: FitnessMetric, folds: usize, seed: u64) -> Result<f64> {
    Ok(metric.pick(cv_scores(train, SigmaModel::Grnn, sigma, folds, seed)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsgaConfig {
    pub population_size: usize,
    /// Number of replacement steps.
    pub generations: usize,
    pub sigma_range: (f64, f64),
    pub tournament_size: usize,
    pub crossover_blend_alpha: f64,
    /// Standard deviation of the mutation, in `ln(sigma)` units.
    pub mutation_stddev: f64,
    pub seed: u64,
}

impl Default for SsgaConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 200,
            sigma_range: (1e-3, 10.0),
            tournament_size: 3,
            crossover_blend_alpha: 0.5,
            mutation_stddev: 0.2,
            seed: 0,
        }
    }
}

impl SsgaConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.sigma_range;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return bad(format!("sigma_range must satisfy 0 < low < high, got ({lo}, {hi})"));
        }
        if self.population_size < 2 {
            return bad("population_size must be at least 2".into());
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad("tournament_size must lie in 1..=population_size".into());
        }
        if [self.crossover_blend_alpha, self.mutation_stddev]
            .iter()
            .any(|v| v.is_nan() || *v < 0.0)
        {
            return bad("blend alpha and mutation stddev must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryPoint {
    pub step: usize,
    pub best_fitness: f64,
    /// Lowest fitness in the population after the step.
    pub worst_fitness: f64,
}

/// One evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub candidate_sigma: f64,
    pub fitness: f64,
    pub best_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsgaResult {
    pub best_sigma: f64,
    pub best_fitness: f64,
    pub history: Vec<HistoryPoint>,
    pub trace: Vec<TraceRow>,
}

impl SsgaResult {
    pub fn trace_tsv(&self) -> String {
        let mut out = String::from("step\tcandidate_sigma\tfitness\tbest_sigma\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{}\t{:.6e}\t{:.6}\t{:.6e}",
                r.step, r.candidate_sigma, r.fitness, r.best_sigma
            );
        }
        out
    }
}

/// Maximizes an arbitrary fitness of `sigma`. Initial individuals are
/// evaluated in parallel; results do not depend on evaluation order.
pub fn evolve<F>(fitness: F, cfg: &SsgaConfig) -> Result<SsgaResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let (lo, hi) = (cfg.sigma_range.0.ln(), cfg.sigma_range.1.ln());
    let mut rng = seeded_rng(cfg.seed);
    let genes: Vec<f64> = (0..cfg.population_size).map(|_| rng.random_range(lo..=hi)).collect();
    let scores = genes
        .par_iter()
        .map(|g| fitness(g.exp()))
        .collect::<Result<Vec<f64>>>()?;
    let mut pop: Vec<(f64, f64)> = genes.into_iter().zip(scores).collect();

    let mut trace = Vec::with_capacity(cfg.population_size + cfg.generations);
    let mut best = pop[0];
    for &ind in &pop {
        if ind.1 > best.1 {
            best = ind;
        }
        trace.push(TraceRow {
            step: 0,
            candidate_sigma: ind.0.exp(),
            fitness: ind.1,
            best_sigma: f64::NAN,
        });
    }
    for row in &mut trace {
        row.best_sigma = best.0.exp();
    }
    let mut history = vec![HistoryPoint {
        step: 0,
        best_fitness: best.1,
        worst_fitness: worst(&pop).1,
    }];

    let mutation = Normal::new(0.0, cfg.mutation_stddev).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    for step in 1..=cfg.generations {
        let a = tournament(&pop, cfg.tournament_size, &mut rng);
        let b = tournament(&pop, cfg.tournament_size, &mut rng);
        let (p, q) = (pop[a].0, pop[b].0);
        let spread = (p - q).abs() * cfg.crossover_blend_alpha;
        let (cmin, cmax) = (p.min(q) - spread, p.max(q) + spread);
        let mut child = if cmax > cmin {
            rng.random_range(cmin..=cmax)
        } else {
            cmin
        };
        child = (child + mutation.sample(&mut rng)).clamp(lo, hi);
        let sigma = child.exp().clamp(cfg.sigma_range.0, cfg.sigma_range.1);
        let f = fitness(sigma)?;

        let (w, wf) = worst(&pop);
        if f >= wf {
            pop[w] = (child, f);
        }
        if f > best.1 {
            best = (child, f);
        }
        trace.push(TraceRow {
            step,
            candidate_sigma: sigma,
            fitness: f,
            best_sigma: best.0.exp(),
        });
        history.push(HistoryPoint {
            step,
            best_fitness: best.1,
            worst_fitness: worst(&pop).1,
        });
    }

    Ok(SsgaResult {
        best_sigma: best.0.exp().clamp(cfg.sigma_range.0, cfg.sigma_range.1),
        best_fitness: best.1,
        history,
        trace,
    })
}

/// Evolves the GRNN width against 5-fold (or `N`-fold for tiny sets)
/// cross-validated `metric` on `train`.
pub fn evolve_sigma(train: &Dataset, metric: FitnessMetric, cfg: &SsgaConfig) -> Result<SsgaResult> {
    evolve_sigma_for(train, SigmaModel::Grnn, metric, cfg)
}

pub fn evolve_sigma_for(
    train: &Dataset,
    model: SigmaModel,
    metric: FitnessMetric,
    cfg: &SsgaConfig,
) -> Result<SsgaResult> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let folds = default_folds(train.len())?;
    evolve(|s| Ok(metric.pick(cv_scores(train, model, s, folds, cfg.seed)?)), cfg)
}

/// Five folds, or leave-one-out when fewer than five patterns exist.
pub fn default_folds(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::TooFewPatterns { needed: 2, found: n });
    }
    Ok(n.min(5))
}

fn tournament(pop: &[(f64, f64)], size: usize, rng: &mut crate::Rng) -> usize {
    let mut winner = rng.random_range(0..pop.len());
    for _ in 1..size {
        let c = rng.random_range(0..pop.len());
        if pop[c].1 > pop[winner].1 {
            winner = c;
        }
    }
    winner
}

fn worst(pop: &[(f64, f64)]) -> (usize, f64) {
    pop.iter().enumerate().fold(
        (0, f64::INFINITY),
        |acc, (i, ind)| if ind.1 < acc.1 { (i, ind.1) } else { acc },
    )
}
