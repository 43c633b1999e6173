//! Grid search for the Gaussian width maximizing F1 and the one maximizing
//! accuracy, and whether the two coincide.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::ssga::{cv_scores, evolve, FitnessMetric, SigmaModel, SsgaConfig, SsgaResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub low: f64,
    pub high: f64,
    pub points: usize,
    pub log_spaced: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            low: 1e-2,
            high: 10.0,
            points: 50,
            log_spaced: true,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |m: &str| Err(Error::InvalidGrid(m.to_string()));
        if self.points == 0 {
            return bad("grid needs at least one point");
        }
        if !(self.low > 0.0 && self.high.is_finite()) {
            return bad("grid bounds must be positive and finite");
        }
        if self.points == 1 {
            return Ok(vec![self.low]);
        }
        if self.low >= self.high {
            return bad("grid needs low < high");
        }
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    self.low
                } else if i + 1 == self.points {
                    self.high
                } else if self.log_spaced {
                    (self.low.ln() + t * (self.high.ln() - self.low.ln())).exp()
                } else {
                    self.low + t * (self.high - self.low)
                }
            })
            .collect())
    }

    /// Absolute tolerance for calling two grid optima the same: one grid
    /// step, measured at the smaller of the two widths for log grids.
    pub fn step_tolerance(&self, a: f64, b: f64) -> f64 {
        if self.points < 2 {
            return 0.0;
        }
        let last = (self.points - 1) as f64;
        let step = if self.log_spaced {
            a.min(b) * (((self.high / self.low).ln() / last).exp() - 1.0)
        } else {
            (self.high - self.low) / last
        };
        step * (1.0 + 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub sigma: f64,
    pub f1: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSweepResult {
    pub model: SigmaModel,
    pub folds: usize,
    pub seed: u64,
    pub grid: Vec<GridPoint>,
    pub best_sigma_f1: f64,
    pub best_f1: f64,
    pub best_sigma_accuracy: f64,
    pub best_accuracy: f64,
    pub coincide: bool,
    pub tolerance_used: f64,
}

impl SigmaSweepResult {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("sigma\tf1\taccuracy\n");
        for p in &self.grid {
            let _ = writeln!(out, "{:.6e}\t{:.6}\t{:.6}", p.sigma, p.f1, p.accuracy);
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "sigma*_f1 = {:.6e} (f1 {:.4})\nsigma*_accuracy = {:.6e} (accuracy {:.4})\ncoincide = {} (tolerance {:.3e})\n",
            self.best_sigma_f1,
            self.best_f1,
            self.best_sigma_accuracy,
            self.best_accuracy,
            if self.coincide { "yes" } else { "no" },
            self.tolerance_used
        )
    }
}

/// First index of the maximum; the grid is ascending, so ties go to the
/// smaller width.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values.enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, v)| if v > best.1 { (i, v) } else { best },
    )
}

/// Cross-validates `model` at every grid width. Grid points are evaluated in
/// parallel and assembled in grid order.
pub fn sweep(train: &Dataset, model: SigmaModel, grid: &GridSpec, folds: usize, seed: u64) -> Result<SigmaSweepResult> {
    let sigmas = grid.values()?;
    if train.len() < folds.max(2) {
        return Err(Error::TooFewPatterns {
            needed: folds.max(2),
            found: train.len(),
        });
    }
    let points = sigmas
        .par_iter()
        .map(|&s| {
            let sc = cv_scores(train, model, s, folds, seed)?;
            Ok(GridPoint {
                sigma: s,
                f1: sc.f1,
                accuracy: sc.accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (i_f1, best_f1) = argmax(points.iter().map(|p| p.f1));
    let (i_acc, best_accuracy) = argmax(points.iter().map(|p| p.accuracy));
    let (a, b) = (points[i_f1].sigma, points[i_acc].sigma);
    let tolerance_used = grid.step_tolerance(a, b);
    Ok(SigmaSweepResult {
        model,
        folds,
        seed,
        best_sigma_f1: a,
        best_f1,
        best_sigma_accuracy: b,
        best_accuracy,
        coincide: (a - b).abs() <= tolerance_used,
        tolerance_used,
        grid: points,
    })
}

/// Runs the steady-state GA on the same cross-validation folds as the grid,
/// once per metric.
pub fn ssga_for_grid(train: &Dataset, cfg: &SsgaConfig, grid: &SigmaSweepResult) -> Result<(SsgaResult, SsgaResult)> {
    let run = |metric: FitnessMetric| {
        let r = evolve(
            |s| Ok(metric.pick(cv_scores(train, grid.model, s, grid.folds, grid.seed)?)),
            cfg,
        )?;
        if r.history.is_empty() {
            return Err(Error::InvalidConfig("genetic search produced no history".into()));
        }
        Ok(r)
    };
    Ok((run(FitnessMetric::F1)?, run(FitnessMetric::Accuracy)?))
}

/// Table comparing grid and genetic search for both metrics.
pub fn compare_with_ssga(train: &Dataset, cfg: &SsgaConfig, grid: &SigmaSweepResult) -> Result<String> {
    let (f1, acc) = ssga_for_grid(train, cfg, grid)?;
    Ok(render_comparison(grid, &f1, &acc))
}

pub fn render_comparison(grid: &SigmaSweepResult, f1: &SsgaResult, acc: &SsgaResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# model = {}, folds = {}, grid points = {}",
        grid.model.name(),
        grid.folds,
        grid.grid.len()
    );
    out.push_str("method\tmetric\tbest_sigma\tfitness\n");
    let rows = [
        ("grid", "f1", grid.best_sigma_f1, grid.best_f1),
        ("grid", "accuracy", grid.best_sigma_accuracy, grid.best_accuracy),
        ("ssga", "f1", f1.best_sigma, f1.best_fitness),
        ("ssga", "accuracy", acc.best_sigma, acc.best_fitness),
    ];
    for (method, metric, sigma, fit) in rows {
        let _ = writeln!(out, "{method}\t{metric}\t{sigma:.6e}\t{fit:.4}");
    }
    let _ = writeln!(
        out,
        "# grid verdict: sigma*_f1 {} sigma*_accuracy (tolerance {:.3e})",
        if grid.coincide { "==" } else { "!=" },
        grid.tolerance_used
    );
    let ssga_same = (f1.best_sigma - acc.best_sigma).abs() <= grid.tolerance_used.max(1e-12);
    let _ = writeln!(
        out,
        "# ssga verdict: sigma*_f1 {} sigma*_accuracy",
        if ssga_same { "==" } else { "!=" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_dataset, LabelSpace, SynthKind};
    use crate::grnn::GrnnModel;
    use crate::kernel::GaussianKernelParams;
    use crate::metrics::{confusion, report};

    fn separable() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![if i % 2 == 0 { -5.0 } else { 5.0 } + 0.01 * i as f64])
            .collect();
        let t = (0..20).map(|i| if i % 2 == 0 { 0.2 } else { 0.8 }).collect();
        Dataset::from_rows(&rows, t, LabelSpace::Continuous).unwrap()
    }

    #[test]
    fn perfect_classifier_picks_smallest_sigma() {
        let g = GridSpec {
            low: 0.1,
            high: 2.0,
            points: 7,
            log_spaced: true,
        };
        let r = sweep(&separable(), SigmaModel::Grnn, &g, 5, 0).unwrap();
        assert!(r.grid.iter().all(|p| p.f1 == 1.0 && p.accuracy == 1.0));
        assert_eq!(r.best_sigma_f1, 0.1);
        assert_eq!(r.best_sigma_accuracy, 0.1);
        assert!(r.coincide);
    }

    #[test]
    fn singleton_grid() {
        let d = synth_dataset(SynthKind::Xor, 40, 1).unwrap();
        let g = GridSpec {
            low: 0.3,
            high: 0.3,
            points: 1,
            log_spaced: true,
        };
        let r = sweep(&d, SigmaModel::Grnn, &g, 5, 0).unwrap();
        assert!(r.coincide);
        assert_eq!(r.tolerance_used, 0.0);
    }

    #[test]
    fn invalid_grids() {
        let d = separable();
        for g in [
            GridSpec {
                points: 0,
                ..Default::default()
            },
            GridSpec {
                low: -1.0,
                ..Default::default()
            },
            GridSpec {
                low: 5.0,
                high: 1.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                sweep(&d, SigmaModel::Grnn, &g, 5, 0),
                Err(Error::InvalidGrid(_))
            ));
        }
        assert!(matches!(
            sweep(&d.subset(&[0, 1, 2]), SigmaModel::Grnn, &GridSpec::default(), 5, 0),
            Err(Error::TooFewPatterns { .. })
        ));
    }

    #[test]
    fn grid_matches_independent_evaluation() {
        let d = synth_dataset(SynthKind::TwoGaussians, 120, 4).unwrap();
        let g = GridSpec {
            low: 1e-2,
            high: 10.0,
            points: 50,
            log_spaced: true,
        };
        let r = sweep(&d, SigmaModel::Grnn, &g, 5, 17).unwrap();
        let folds = crate::ssga::fold_assignment(&d, 5, 17);
        for p in &r.grid {
            // Second pass: pooled per-fold confusion from a plain loop.
            let (mut f1, mut acc) = (0.0, 0.0);
            for k in 0..5 {
                let tr: Vec<usize> = (0..d.len()).filter(|&i| folds[i] != k).collect();
                let te: Vec<usize> = (0..d.len()).filter(|&i| folds[i] == k).collect();
                let m = GrnnModel::new(&d.subset(&tr), GaussianKernelParams::new(p.sigma).unwrap()).unwrap();
                let pred: Vec<f64> = te
                    .iter()
                    .map(|&i| if m.predict(d.row(i)).unwrap() > 0.5 { 1.0 } else { -1.0 })
                    .collect();
                let act: Vec<f64> = te
                    .iter()
                    .map(|&i| if d.target(i) >= 0.5 { 1.0 } else { -1.0 })
                    .collect();
                let rep = report(confusion(&pred, &act).unwrap());
                f1 += rep.f1 / 5.0;
                acc += rep.accuracy / 5.0;
            }
            assert!((p.f1 - f1).abs() < 1e-12 && (p.accuracy - acc).abs() < 1e-12);
        }
        let max_f1 = r.grid.iter().map(|p| p.f1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_f1, max_f1);
        assert!(r.to_tsv().lines().count() == 51);
    }

    #[test]
    fn denser_grid_never_worse() {
        let d = synth_dataset(SynthKind::Ring, 80, 2).unwrap();
        let coarse = GridSpec {
            low: 0.01,
            high: 10.0,
            points: 4,
            log_spaced: true,
        };
        let dense = GridSpec { points: 7, ..coarse };
        let a = sweep(&d, SigmaModel::Grnn, &coarse, 5, 3).unwrap();
        let b = sweep(&d, SigmaModel::Grnn, &dense, 5, 3).unwrap();
        assert!(b.best_f1 >= a.best_f1 && b.best_accuracy >= a.best_accuracy);
    }

    #[test]
    fn comparison_report() {
        let d = synth_dataset(SynthKind::TwoGaussians, 60, 1).unwrap();
        let g = GridSpec {
            points: 20,
            ..Default::default()
        };
        let r = sweep(&d, SigmaModel::Grnn, &g, 5, 0).unwrap();
        let cfg = SsgaConfig {
            generations: 40,
            ..Default::default()
        };
        let text = compare_with_ssga(&d, &cfg, &r).unwrap();
        assert_eq!(text, compare_with_ssga(&d, &cfg, &r).unwrap());
        assert!(text.contains("ssga\tf1\t"));
        let bad = SsgaConfig {
            population_size: 0,
            ..Default::default()
        };
        assert!(compare_with_ssga(&d, &bad, &r).is_err());
    }

    #[test]
    fn rbf_svm_sweep_runs() {
        let d = synth_dataset(SynthKind::Ring, 50, 2).unwrap();
        let g = GridSpec {
            low: 0.1,
            high: 3.0,
            points: 5,
            log_spaced: true,
        };
        let r = sweep(&d, SigmaModel::RbfSvm { c: 1.0 }, &g, 5, 0).unwrap();
        assert!(r.best_accuracy > 0.8, "{}", r.best_accuracy);
    }
}
