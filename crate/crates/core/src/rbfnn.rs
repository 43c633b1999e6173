//! Radial basis function network with Gaussian hidden units and one linear
//! output unit.
//!
//! Two training modes are provided:
//!
//! * [`RbfMode::FixedCenters`]: centers are sampled training patterns, every
//!   width is the pooled standard deviation of the inputs, and gradient
//!   descent adapts only the output weights and bias.
//! * [`RbfMode::KohonenBackprop`]: centers start at the input mean and are
//!   placed by LVQ-I; after every LVQ-I epoch each width is reset to the mean
//!   distance between the center and the patterns it wins. Gradient descent
//!   then adapts weights, bias, centers and widths.
//!
//! Both use per-pattern updates with momentum,
//! `delta(t) = -lr * dE/dtheta + alpha * delta(t - 1)`, on `E = (y - out)^2 / 2`.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::data::{pooled_stddev, Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::grnn::{default_threshold, threshold_sign};
use crate::kernel::{check_dims, gaussian_from_sq, sq_dist};
use crate::lvq::{train_lvq1_from, LvqConfig};
use crate::seeded_rng;
use crate::textfmt::{TextReader, TextWriter};

/// Smallest width allowed after a gradient step.
pub const MIN_WIDTH: f64 = 1e-6;
/// Smallest drop of the best epoch MSE that counts as progress.
pub const MSE_IMPROVEMENT_EPS: f64 = 1e-9;
/// Consecutive epochs without progress after which training stops.
pub const STALL_EPOCHS: usize = 20;

/// Stopping rule shared by the gradient trainers.
#[derive(Debug, Clone)]
pub struct StallStop {
    best: f64,
    stalled: usize,
}

impl Default for StallStop {
    fn default() -> Self {
        Self {
            best: f64::INFINITY,
            stalled: 0,
        }
    }
}

impl StallStop {
    /// Records one epoch MSE; true once training should stop.
    pub fn should_stop(&mut self, mse: f64) -> bool {
        if self.best - mse >= MSE_IMPROVEMENT_EPS {
            self.best = mse;
            self.stalled = 0;
        } else {
            self.stalled += 1;
        }
        self.stalled >= STALL_EPOCHS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfNetwork {
    /// One row per hidden unit.
    pub centers: Array2<f64>,
    pub widths: Vec<f64>,
    pub out_weights: Vec<f64>,
    /// Weight of the constant `+1` bias input.
    pub bias: f64,
}

/// Partial derivatives of the squared error, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfGradient {
    pub centers: Array2<f64>,
    pub widths: Vec<f64>,
    pub out_weights: Vec<f64>,
    pub bias: f64,
}

impl RbfNetwork {
    pub fn new(centers: Array2<f64>, widths: Vec<f64>, out_weights: Vec<f64>, bias: f64) -> Result<Self> {
        let j = centers.nrows();
        if j == 0 {
            return Err(Error::InvalidConfig("network needs at least one hidden unit".into()));
        }
        if widths.len() != j || out_weights.len() != j {
            return Err(Error::DimensionMismatch {
                expected: j,
                found: widths.len().min(out_weights.len()),
            });
        }
        if widths.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig("widths must be positive".into()));
        }
        Ok(Self {
            centers: centers.as_standard_layout().into_owned(),
            widths,
            out_weights,
            bias,
        })
    }

    pub fn hidden_units(&self) -> usize {
        self.centers.nrows()
    }

    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }

    fn center(&self, j: usize) -> &[f64] {
        self.centers.row(j).to_slice().expect("standard layout")
    }

    /// Hidden activations and the network output.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.forward_unchecked(x))
    }

    fn forward_unchecked(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let hidden: Vec<f64> = (0..self.hidden_units())
            .map(|j| gaussian_from_sq(sq_dist(x, self.center(j)), self.widths[j]))
            .collect();
        let out = hidden.iter().zip(&self.out_weights).map(|(h, w)| h * w).sum::<f64>() + self.bias;
        (hidden, out)
    }

    pub fn output(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.1)
    }

    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<f64> {
        Ok(threshold_sign(self.output(x)?, threshold))
    }

    /// `(y - out)^2 / 2` for one pattern.
    pub fn loss(&self, x: &[f64], y: f64) -> Result<f64> {
        let e = y - self.output(x)?;
        Ok(0.5 * e * e)
    }

    pub fn mse(&self, d: &Dataset) -> Result<f64> {
        let mut s = 0.0;
        for i in 0..d.len() {
            let e = d.target(i) - self.output(d.row(i))?;
            s += e * e;
        }
        Ok(s / d.len().max(1) as f64)
    }

    /// Analytic gradient of [`RbfNetwork::loss`].
    pub fn gradient(&self, x: &[f64], y: f64) -> Result<RbfGradient> {
        check_dims(x, self.center(0))?;
        Ok(self.gradient_unchecked(x, y))
    }

    fn gradient_unchecked(&self, x: &[f64], y: f64) -> RbfGradient {
        let (hidden, out) = self.forward_unchecked(x);
        let e = y - out;
        let mut g = RbfGradient {
            centers: Array2::zeros(self.centers.raw_dim()),
            widths: vec![0.0; self.hidden_units()],
            out_weights: hidden.iter().map(|h| -e * h).collect(),
            bias: -e,
        };
        for (j, &h) in hidden.iter().enumerate() {
            let s = self.widths[j];
            let c = self.center(j);
            let common = -e * self.out_weights[j] * h;
            for (gi, (&xi, &ci)) in g.centers.row_mut(j).iter_mut().zip(x.iter().zip(c)) {
                *gi = common * (xi - ci) / (s * s);
            }
            g.widths[j] = common * sq_dist(x, c) / (s * s * s);
        }
        g
    }

    /// Parameters flattened as weights, bias, centers (row-major), widths.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.out_weights.clone();
        p.push(self.bias);
        p.extend(self.centers.iter().copied());
        p.extend_from_slice(&self.widths);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let j = self.hidden_units();
        let d = self.dim();
        assert_eq!(p.len(), 2 * j + 1 + j * d, "parameter vector length");
        self.out_weights.copy_from_slice(&p[..j]);
        self.bias = p[j];
        for (c, v) in self.centers.iter_mut().zip(&p[j + 1..j + 1 + j * d]) {
            *c = *v;
        }
        self.widths.copy_from_slice(&p[j + 1 + j * d..]);
    }

    pub fn to_text(&self) -> String {
        let mut w = TextWriter::new("rbfnn");
        w.words("dims", &[&self.hidden_units().to_string(), &self.dim().to_string()]);
        for j in 0..self.hidden_units() {
            w.line("center", self.center(j).iter().copied());
        }
        w.line("widths", self.widths.iter().copied());
        w.line("weights", self.out_weights.iter().copied());
        w.line("bias", [self.bias]);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = TextReader::new(text, "rbfnn")?;
        let dims = r.usizes("dims", 2)?;
        let (j, d) = (dims[0], dims[1]);
        let mut flat = Vec::with_capacity(j * d);
        for _ in 0..j {
            flat.extend(r.floats("center", d)?);
        }
        let widths = r.floats("widths", j)?;
        let weights = r.floats("weights", j)?;
        let bias = r.floats("bias", 1)?[0];
        r.end()?;
        let centers = Array2::from_shape_vec((j, d), flat).map_err(|e| Error::Format {
            line: 0,
            message: e.to_string(),
        })?;
        Self::new(centers, widths, weights, bias)
    }
}

pub fn rbf_forward(net: &RbfNetwork, x: &[f64]) -> Result<(Vec<f64>, f64)> {
    net.forward(x)
}

pub fn rbf_classify(net: &RbfNetwork, x: &[f64], threshold: f64) -> Result<f64> {
    net.classify(x, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbfMode {
    FixedCenters,
    KohonenBackprop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfTrainConfig {
    pub hidden_units: usize,
    pub mode: RbfMode,
    pub lr_weights: f64,
    pub lr_centers: f64,
    pub lr_widths: f64,
    pub momentum_alpha: f64,
    pub epochs: usize,
    /// Clustering settings for [`RbfMode::KohonenBackprop`]; `k` is taken
    /// from `hidden_units`.
    pub lvq: LvqConfig,
    pub seed: u64,
}

impl Default for RbfTrainConfig {
    fn default() -> Self {
        Self {
            hidden_units: 10,
            mode: RbfMode::KohonenBackprop,
            lr_weights: 0.05,
            lr_centers: 0.01,
            lr_widths: 0.01,
            momentum_alpha: 0.9,
            epochs: 500,
            lvq: LvqConfig::default(),
            seed: 0,
        }
    }
}

impl RbfTrainConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden_units == 0 {
            return Err(Error::InvalidConfig("hidden_units must be at least 1".into()));
        }
        for (name, lr) in [
            ("lr_weights", self.lr_weights),
            ("lr_centers", self.lr_centers),
            ("lr_widths", self.lr_widths),
        ] {
            if !(lr >= 0.0 && lr.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative, got {lr}")));
            }
        }
        if !(0.0..1.0).contains(&self.momentum_alpha) {
            return Err(Error::InvalidConfig(format!(
                "momentum_alpha must lie in [0, 1), got {}",
                self.momentum_alpha
            )));
        }
        Ok(())
    }
}

/// Momentum update of one parameter; returns the applied change.
#[inline]
pub fn momentum_step(param: &mut f64, velocity: &mut f64, grad: f64, lr: f64, alpha: f64) -> f64 {
    *velocity = -lr * grad + alpha * *velocity;
    *param += *velocity;
    *velocity
}

fn small_random(rng: &mut crate::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-0.1..=0.1)).collect()
}

fn global_width(train: &Dataset) -> f64 {
    let s = pooled_stddev(train);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Fixed-centers initialization: `j` distinct training patterns as centers,
/// every width equal to the pooled input standard deviation, small random
/// output weights and bias.
pub fn init_mode_a(train: &Dataset, j: usize, seed: u64) -> Result<RbfNetwork> {
    if j == 0 {
        return Err(Error::InvalidConfig("hidden_units must be at least 1".into()));
    }
    if train.len() < j {
        return Err(Error::TooFewPatterns {
            needed: j,
            found: train.len(),
        });
    }
    let mut rng = seeded_rng(seed);
    let mut idx: Vec<usize> = (0..train.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(j);
    let centers = train.features().select(Axis(0), &idx);
    let w = small_random(&mut rng, j + 1);
    RbfNetwork::new(centers, vec![global_width(train); j], w[..j].to_vec(), w[j])
}

/// Kohonen initialization. Centers start at the input mean, LVQ-I moves
/// them, and after every LVQ-I epoch each width becomes the mean distance
/// from its center to the patterns it wins. Units that win nothing keep their
/// previous width.
pub fn init_mode_b(train: &Dataset, cfg: &RbfTrainConfig) -> Result<RbfNetwork> {
    cfg.validate()?;
    let j = cfg.hidden_units;
    if train.len() < j {
        return Err(Error::TooFewPatterns {
            needed: j,
            found: train.len(),
        });
    }
    let mean: Array1<f64> = train.features().mean_axis(Axis(0)).expect("nonempty");
    let start = Array2::from_shape_fn((j, train.dim()), |(_, i)| mean[i]);
    let lvq = LvqConfig {
        k: j,
        seed: cfg.seed,
        ..cfg.lvq.clone()
    };
    let mut widths = vec![global_width(train); j];
    let cb = train_lvq1_from(train, &lvq, start, |cb| {
        recompute_widths(train, &cb.centers, &mut widths);
    })?;
    let mut rng = seeded_rng(cfg.seed);
    let w = small_random(&mut rng, j + 1);
    RbfNetwork::new(cb.centers, widths, w[..j].to_vec(), w[j])
}

/// Mean Euclidean distance from each center to the patterns nearest to it.
pub fn recompute_widths(train: &Dataset, centers: &Array2<f64>, widths: &mut [f64]) {
    let k = centers.nrows();
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for p in 0..train.len() {
        let x = train.row(p);
        let mut best = (0, f64::INFINITY);
        for (j, c) in centers.rows().into_iter().enumerate() {
            let d = sq_dist(x, c.as_slice().expect("standard layout"));
            if d < best.1 {
                best = (j, d);
            }
        }
        sum[best.0] += best.1.sqrt();
        count[best.0] += 1;
    }
    for j in 0..k {
        if count[j] > 0 {
            let w = sum[j] / count[j] as f64;
            if w >= MIN_WIDTH {
                widths[j] = w;
            }
        }
    }
}

/// Initializes per `cfg.mode` and trains.
pub fn fit(train_set: &Dataset, cfg: &RbfTrainConfig) -> Result<RbfNetwork> {
    let net = match cfg.mode {
        RbfMode::FixedCenters => init_mode_a(train_set, cfg.hidden_units, cfg.seed)?,
        RbfMode::KohonenBackprop => init_mode_b(train_set, cfg)?,
    };
    train(net, train_set, cfg)
}

pub fn train(net: RbfNetwork, train_set: &Dataset, cfg: &RbfTrainConfig) -> Result<RbfNetwork> {
    Ok(train_logged(net, train_set, cfg)?.0)
}

/// Like [`train`], also returning the mean squared error of every epoch
/// (accumulated before each pattern's update).
pub fn train_logged(mut net: RbfNetwork, train_set: &Dataset, cfg: &RbfTrainConfig) -> Result<(RbfNetwork, Vec<f64>)> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if net.dim() != train_set.dim() {
        return Err(Error::NotInitialized(format!(
            "network expects {} inputs, data has {}",
            net.dim(),
            train_set.dim()
        )));
    }
    let adapt_basis = cfg.mode == RbfMode::KohonenBackprop;
    let alpha = cfg.momentum_alpha;
    let j = net.hidden_units();
    let mut v_w = vec![0.0; j];
    let mut v_b = 0.0;
    let mut v_c = Array2::<f64>::zeros(net.centers.raw_dim());
    let mut v_s = vec![0.0; j];

    let mut rng = seeded_rng(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = Vec::new();
    let mut stop = StallStop::default();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for &p in &order {
            let x = train_set.row(p);
            let g = net.gradient_unchecked(x, train_set.target(p));
            // dE/dbias is -(y - out)
            sse += g.bias * g.bias;
            for ((w, v), gw) in net.out_weights.iter_mut().zip(v_w.iter_mut()).zip(&g.out_weights) {
                momentum_step(w, v, *gw, cfg.lr_weights, alpha);
            }
            momentum_step(&mut net.bias, &mut v_b, g.bias, cfg.lr_weights, alpha);
            if adapt_basis {
                for ((c, v), gc) in net.centers.iter_mut().zip(v_c.iter_mut()).zip(g.centers.iter()) {
                    momentum_step(c, v, *gc, cfg.lr_centers, alpha);
                }
                for ((s, v), gs) in net.widths.iter_mut().zip(v_s.iter_mut()).zip(&g.widths) {
                    momentum_step(s, v, *gs, cfg.lr_widths, alpha);
                    *s = s.max(MIN_WIDTH);
                }
            }
        }
        let mse = sse / train_set.len() as f64;
        log.push(mse);
        if stop.should_stop(mse) {
            break;
        }
    }
    Ok((net, log))
}

/// Threshold for `classify` given the label space the net was trained on.
pub fn threshold_for(space: LabelSpace) -> f64 {
    default_threshold(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_dataset, SynthKind};
    use ndarray::array;

    fn one_unit(center: f64, width: f64, w: f64, b: f64) -> RbfNetwork {
        RbfNetwork::new(array![[center]], vec![width], vec![w], b).unwrap()
    }

    #[test]
    fn forward_examples() {
        let net = RbfNetwork::new(array![[1.0, 2.0], [0.0, 0.0]], vec![0.5, 2.0], vec![0.3, -0.2], 0.1).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0]).unwrap().0[0], 1.0);

        let zero = RbfNetwork::new(array![[1.0, 2.0]], vec![0.5], vec![0.0], 0.7).unwrap();
        assert_eq!(zero.output(&[5.0, -3.0]).unwrap(), 0.7);

        // ||x - mu||^2 = 2 sigma^2
        let net = one_unit(0.0, 1.0, 1.0, 0.0);
        let out = net.output(&[2f64.sqrt()]).unwrap();
        assert!((out - (-1.0f64).exp()).abs() < 1e-15);
        assert!(net.output(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn single_step_matches_hand_derivation() {
        // J = 1, alpha = 0: w' = w + lr * (y - out) * h.
        let net = one_unit(0.0, 1.0, 0.5, 0.0);
        let d = Dataset::from_rows(&[vec![1.0]], vec![1.0], LabelSpace::Continuous).unwrap();
        let h = (-0.5f64).exp();
        let out = 0.5 * h;
        let cfg = RbfTrainConfig {
            mode: RbfMode::FixedCenters,
            momentum_alpha: 0.0,
            epochs: 1,
            lr_weights: 0.1,
            ..Default::default()
        };
        let trained = train(net, &d, &cfg).unwrap();
        assert!((trained.out_weights[0] - (0.5 + 0.1 * (1.0 - out) * h)).abs() < 1e-15);
        assert!((trained.bias - 0.1 * (1.0 - out)).abs() < 1e-15);
    }

    #[test]
    fn fixed_centers_never_move() {
        let d = synth_dataset(SynthKind::Ring, 40, 3).unwrap();
        let net = init_mode_a(&d, 5, 1).unwrap();
        let cfg = RbfTrainConfig {
            mode: RbfMode::FixedCenters,
            epochs: 30,
            ..Default::default()
        };
        let trained = train(net.clone(), &d, &cfg).unwrap();
        assert_eq!(trained.centers, net.centers);
        assert_eq!(trained.widths, net.widths);
        assert_ne!(trained.out_weights, net.out_weights);
    }

    #[test]
    fn exact_fit_is_a_fixed_point() {
        let net = one_unit(0.0, 1.0, 0.8, 0.1);
        let rows = vec![vec![0.0], vec![0.7], vec![-1.3]];
        let targets = rows.iter().map(|x| net.output(x).unwrap()).collect();
        let d = Dataset::from_rows(&rows, targets, LabelSpace::Continuous).unwrap();
        let cfg = RbfTrainConfig {
            mode: RbfMode::KohonenBackprop,
            epochs: 20,
            ..Default::default()
        };
        let trained = train(net.clone(), &d, &cfg).unwrap();
        for (a, b) in trained.params().iter().zip(net.params()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mode_a_init() {
        let d = synth_dataset(SynthKind::TwoGaussians, 12, 2).unwrap();
        let net = init_mode_a(&d, 12, 9).unwrap();
        let mut got: Vec<Vec<f64>> = net.centers.rows().into_iter().map(|r| r.to_vec()).collect();
        let mut want: Vec<Vec<f64>> = (0..12).map(|i| d.row(i).to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);

        // Independent pooled population stddev.
        let vals: Vec<f64> = d.features().iter().copied().collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        assert!(net.widths.iter().all(|w| (w - sd).abs() < 1e-12));
        assert!(net.out_weights.iter().chain([&net.bias]).all(|w| w.abs() <= 0.1));

        assert_eq!(net, init_mode_a(&d, 12, 9).unwrap());
        assert!(matches!(init_mode_a(&d, 13, 9), Err(Error::TooFewPatterns { .. })));
    }

    #[test]
    fn mode_b_single_unit_width() {
        let d = synth_dataset(SynthKind::TwoGaussians, 30, 5).unwrap();
        let cfg = RbfTrainConfig {
            hidden_units: 1,
            ..Default::default()
        };
        let net = init_mode_b(&d, &cfg).unwrap();
        let c = net.center(0);
        let mean_dist = (0..d.len()).map(|i| sq_dist(d.row(i), c).sqrt()).sum::<f64>() / d.len() as f64;
        assert!((net.widths[0] - mean_dist).abs() < 1e-12);
    }

    #[test]
    fn idle_unit_keeps_global_width() {
        let d = synth_dataset(SynthKind::TwoGaussians, 30, 5).unwrap();
        let mut widths = vec![7.0, 7.0];
        let far = array![[0.0, 0.0], [1e6, 1e6]];
        recompute_widths(&d, &far, &mut widths);
        assert_eq!(widths[1], 7.0);
        assert_ne!(widths[0], 7.0);
    }

    #[test]
    fn momentum_terminal_step() {
        let (lr, alpha, g) = (0.1, 0.9, 2.0);
        let (mut p, mut v) = (0.0, 0.0);
        let mut step = 0.0;
        for _ in 0..500 {
            step = momentum_step(&mut p, &mut v, g, lr, alpha);
        }
        assert!((step - (-lr * g / (1.0 - alpha))).abs() < 1e-9);

        // Quadratic (p - 3)^2 / 2 settles at its minimum.
        let (mut p, mut v) = (0.0, 0.0);
        for _ in 0..2000 {
            let grad = p - 3.0;
            momentum_step(&mut p, &mut v, grad, 0.05, alpha);
        }
        assert!((p - 3.0).abs() < 1e-9);
    }

    #[test]
    fn text_round_trip() {
        let d = synth_dataset(SynthKind::Ring, 30, 1).unwrap();
        let net = fit(
            &d,
            &RbfTrainConfig {
                hidden_units: 4,
                epochs: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let text = net.to_text();
        assert!(text.starts_with("sigmabench rbfnn v1\ndims 4 2\n"));
        assert_eq!(RbfNetwork::from_text(&text).unwrap(), net);
        assert!(RbfNetwork::from_text("sigmabench rbfnn v2\n").is_err());
        assert!(RbfNetwork::from_text(&text.replace("bias", "bais")).is_err());
    }

    #[test]
    fn classify_matches_output_threshold() {
        let d = synth_dataset(SynthKind::Ring, 50, 2).unwrap();
        let net = fit(
            &d,
            &RbfTrainConfig {
                hidden_units: 6,
                epochs: 50,
                ..Default::default()
            },
        )
        .unwrap();
        for i in 0..d.len() {
            let out = net.output(d.row(i)).unwrap();
            assert_eq!(net.classify(d.row(i), 0.5).unwrap(), if out > 0.5 { 1.0 } else { -1.0 });
        }
        let tie = one_unit(0.0, 1.0, 0.0, 0.5);
        assert_eq!(tie.classify(&[0.0], 0.5).unwrap(), -1.0);
        let hi = one_unit(0.0, 1.0, 0.0, 0.9);
        assert_eq!(hi.classify(&[0.0], 0.5).unwrap(), 1.0);
    }

    #[test]
    fn stall_rule_tolerates_upticks() {
        let mut stop = StallStop::default();
        assert!(!stop.should_stop(1.0));
        assert!(!stop.should_stop(1.1));
        assert!(!stop.should_stop(0.5));
        // Each drop stays below the threshold relative to the best so far.
        for i in 1..STALL_EPOCHS {
            assert!(!stop.should_stop(0.5 - 5e-10), "epoch {i}");
        }
        assert!(stop.should_stop(0.6));
    }
}
