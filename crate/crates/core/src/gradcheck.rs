//! Central finite-difference checks of the analytic RBF network and MLP
//! gradients on small random networks.

use ndarray::Array2;
use rand::Rng as _;

use crate::ffnn::{MlpNetwork, STANDARD_DEPTHS};
use crate::rbfnn::RbfNetwork;
use crate::seeded_rng;

pub const FD_STEP: f64 = 1e-5;
pub const REL_TOLERANCE: f64 = 1e-4;
/// Denominator floor for the relative error, so that gradients near zero are
/// compared in absolute terms.
pub const REL_FLOOR: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Central difference of `f` with respect to each coordinate of `params`.
pub fn numeric_gradient(params: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + FD_STEP;
            let up = f(&p);
            p[i] = orig - FD_STEP;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub name: String,
    pub networks: usize,
    pub partials: usize,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error <= REL_TOLERANCE
    }
}

fn compare(report: &mut GradCheckReport, analytic: &[f64], numeric: &[f64]) {
    report.networks += 1;
    report.partials += analytic.len();
    for (a, n) in analytic.iter().zip(numeric) {
        report.max_rel_error = report.max_rel_error.max(relative_error(*a, *n));
    }
}

fn empty(name: &str) -> GradCheckReport {
    GradCheckReport {
        name: name.to_string(),
        networks: 0,
        partials: 0,
        max_rel_error: 0.0,
    }
}

/// Random network with 1..=3 hidden units and 1..=3 inputs.
pub fn random_rbf(seed: u64) -> (RbfNetwork, Vec<f64>, f64) {
    let mut rng = seeded_rng(seed);
    let j = rng.random_range(1..=3);
    let d = rng.random_range(1..=3);
    let centers = Array2::from_shape_fn((j, d), |_| rng.random_range(-1.0..1.0));
    let widths = (0..j).map(|_| rng.random_range(0.5..2.0)).collect();
    let weights = (0..j).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bias = rng.random_range(-1.0..1.0);
    let x = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = rng.random_range(-1.0..1.0);
    let net = RbfNetwork::new(centers, widths, weights, bias).expect("valid random network");
    (net, x, y)
}

/// Analytic gradient flattened like [`RbfNetwork::params`].
pub fn rbf_analytic(net: &RbfNetwork, x: &[f64], y: f64) -> Vec<f64> {
    let g = net.gradient(x, y).expect("matching dimensions");
    let mut v = g.out_weights;
    v.push(g.bias);
    v.extend(g.centers.iter().copied());
    v.extend(g.widths);
    v
}

pub fn check_rbf(seeds: u64, inject_fault: bool) -> GradCheckReport {
    let mut report = empty("rbfnn");
    for seed in 0..seeds {
        let (net, x, y) = random_rbf(seed);
        let mut analytic = rbf_analytic(&net, &x, y);
        if inject_fault {
            analytic[0] = analytic[0] * 1.5 + 0.01;
        }
        let mut probe = net.clone();
        let numeric = numeric_gradient(&net.params(), |p| {
            probe.set_params(p);
            probe.loss(&x, y).expect("matching dimensions")
        });
        compare(&mut report, &analytic, &numeric);
    }
    report
}

pub fn random_mlp(seed: u64, hidden_layers: usize) -> (MlpNetwork, Vec<f64>, f64) {
    let mut rng = seeded_rng(seed);
    let inputs = rng.random_range(1..=3);
    let units = rng.random_range(2..=3);
    let mut net = MlpNetwork::random(inputs, hidden_layers, units, seed).expect("valid shape");
    // Spread the weights beyond the small initialization range.
    let p: Vec<f64> = net.params().iter().map(|_| rng.random_range(-1.5..1.5)).collect();
    net.set_params(&p);
    let x = (0..inputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    let t = rng.random_range(0.0..1.0);
    (net, x, t)
}

pub fn check_mlp(seeds: u64, hidden_layers: usize, inject_fault: bool) -> GradCheckReport {
    let mut report = empty(&format!("mlp-{hidden_layers}"));
    for seed in 0..seeds {
        let (net, x, t) = random_mlp(seed, hidden_layers);
        let mut analytic = net.gradient(&x, t).expect("matching dimensions").params();
        if inject_fault {
            analytic[0] = analytic[0] * 1.5 + 0.01;
        }
        let mut probe = net.clone();
        let numeric = numeric_gradient(&net.params(), |p| {
            probe.set_params(p);
            probe.loss(&x, t).expect("matching dimensions")
        });
        compare(&mut report, &analytic, &numeric);
    }
    report
}

/// The RBF suite plus one MLP suite per standard depth.
pub fn run_all(seeds: u64, inject_fault: bool) -> Vec<GradCheckReport> {
    let mut out = vec![check_rbf(seeds, inject_fault)];
    out.extend(STANDARD_DEPTHS.iter().map(|&h| check_mlp(seeds, h, inject_fault)));
    out
}
