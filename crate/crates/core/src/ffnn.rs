//! Fully connected sigmoid network with a single output unit, trained by
//! per-pattern backpropagation of squared error with momentum.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::data::{Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::grnn::threshold_sign;
use crate::rbfnn::{momentum_step, StallStop};
use crate::seeded_rng;
use crate::textfmt::{TextReader, TextWriter};

/// Hidden-layer counts in the standard depth sweep.
pub const STANDARD_DEPTHS: [usize; 3] = [1, 2, 4];

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Affine map followed by the sigmoid. `weights` is `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        Self {
            weights: Array2::zeros((outputs, inputs)),
            biases: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    fn activate(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .rows()
            .into_iter()
            .zip(&self.biases)
            .map(|(w, b)| sigmoid(w.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    pub layers: Vec<Layer>,
}

/// Gradient with the same layout as the network.
pub type MlpGradient = MlpNetwork;

impl MlpNetwork {
    /// Checks that layer sizes chain and end in a single output.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidConfig("need at least one hidden layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::InvalidConfig(format!(
                    "layer {} has {} outputs but layer {} takes {} inputs",
                    i,
                    pair[0].outputs(),
                    i + 1,
                    pair[1].inputs()
                )));
            }
        }
        if layers.iter().any(|l| l.biases.len() != l.outputs()) {
            return Err(Error::InvalidConfig("bias length differs from layer width".into()));
        }
        if layers.last().map(Layer::outputs) != Some(1) {
            return Err(Error::InvalidConfig("output layer must have one unit".into()));
        }
        Ok(Self { layers })
    }

    /// Weights uniform in `[-0.5, 0.5] / sqrt(fan_in)`, biases likewise.
    pub fn random(inputs: usize, hidden_layers: usize, units: usize, seed: u64) -> Result<Self> {
        if inputs == 0 || units == 0 || hidden_layers == 0 {
            return Err(Error::InvalidConfig(
                "inputs, units and hidden_layers must be positive".into(),
            ));
        }
        let mut rng = seeded_rng(seed);
        let mut sizes = vec![inputs];
        sizes.extend(std::iter::repeat_n(units, hidden_layers));
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let scale = 1.0 / (w[0] as f64).sqrt();
                let mut l = Layer::zeros(w[1], w[0]);
                l.weights.mapv_inplace(|_| rng.random_range(-0.5..=0.5) * scale);
                for b in &mut l.biases {
                    *b = rng.random_range(-0.5..=0.5) * scale;
                }
                l
            })
            .collect();
        Self::new(layers)
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.activations(x).last().expect("nonempty")[0])
    }

    /// Outputs of every layer, starting with the input itself.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for l in &self.layers {
            let next = l.activate(acts.last().expect("nonempty"));
            acts.push(next);
        }
        acts
    }

    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<f64> {
        Ok(threshold_sign(self.forward(x)?, threshold))
    }

    /// `(t - out)^2 / 2`.
    pub fn loss(&self, x: &[f64], target: f64) -> Result<f64> {
        let e = target - self.forward(x)?;
        Ok(0.5 * e * e)
    }

    /// Backpropagated gradient of [`MlpNetwork::loss`].
    pub fn gradient(&self, x: &[f64], target: f64) -> Result<MlpGradient> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.gradient_unchecked(x, target))
    }

    fn gradient_unchecked(&self, x: &[f64], target: f64) -> MlpGradient {
        let acts = self.activations(x);
        let out = acts.last().expect("nonempty")[0];
        let mut delta = vec![-(target - out) * out * (1.0 - out)];
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let input = &acts[l];
            let mut g = Layer::zeros(layer.outputs(), layer.inputs());
            for (o, d) in delta.iter().enumerate() {
                for (i, a) in input.iter().enumerate() {
                    g.weights[[o, i]] = d * a;
                }
                g.biases[o] = *d;
            }
            if l > 0 {
                delta = (0..layer.inputs())
                    .map(|i| {
                        let back: f64 = delta.iter().enumerate().map(|(o, d)| layer.weights[[o, i]] * d).sum();
                        back * input[i] * (1.0 - input[i])
                    })
                    .collect();
            }
            grads.push(g);
        }
        grads.reverse();
        MlpNetwork { layers: grads }
    }

    /// Parameters flattened layer by layer: weights (row-major), then biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().copied().chain(l.biases.iter().copied()))
            .collect()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut it = p.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut() {
                *w = it.next().expect("parameter vector too short");
            }
            for b in &mut l.biases {
                *b = it.next().expect("parameter vector too short");
            }
        }
        assert!(it.next().is_none(), "parameter vector too long");
    }

    pub fn to_text(&self) -> String {
        let mut w = TextWriter::new("mlp");
        w.words("layers", &[&self.layers.len().to_string()]);
        for l in &self.layers {
            w.words("layer", &[&l.outputs().to_string(), &l.inputs().to_string()]);
            for row in l.weights.rows() {
                w.line("w", row.iter().copied());
            }
            w.line("b", l.biases.iter().copied());
        }
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = TextReader::new(text, "mlp")?;
        let count = r.usizes("layers", 1)?[0];
        let mut layers = Vec::with_capacity(count);
        for _ in 0..count {
            let shape = r.usizes("layer", 2)?;
            let mut l = Layer::zeros(shape[0], shape[1]);
            for o in 0..shape[0] {
                for (i, v) in r.floats("w", shape[1])?.into_iter().enumerate() {
                    l.weights[[o, i]] = v;
                }
            }
            l.biases = r.floats("b", shape[0])?;
            layers.push(l);
        }
        r.end()?;
        Self::new(layers)
    }
}

pub fn mlp_forward(net: &MlpNetwork, x: &[f64]) -> Result<f64> {
    net.forward(x)
}

pub fn mlp_classify(net: &MlpNetwork, x: &[f64], threshold: f64) -> Result<f64> {
    net.classify(x, threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden_layers: usize,
    pub units_per_layer: usize,
    pub lr: f64,
    pub momentum_alpha: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 1,
            units_per_layer: 10,
            lr: 0.1,
            momentum_alpha: 0.9,
            epochs: 1000,
            seed: 0,
        }
    }
}

impl MlpConfig {
    /// Whether the depth is one of [`STANDARD_DEPTHS`].
    pub fn is_standard_depth(&self) -> bool {
        STANDARD_DEPTHS.contains(&self.hidden_layers)
    }
}

/// Training target in `[0, 1]`: continuous targets as-is, signed ones via
/// `(y + 1) / 2`.
pub fn unit_target(y: f64, space: LabelSpace) -> f64 {
    match space {
        LabelSpace::Continuous => y,
        LabelSpace::SignedBinary => (y + 1.0) / 2.0,
    }
}

pub fn mlp_train(train: &Dataset, cfg: &MlpConfig) -> Result<MlpNetwork> {
    Ok(mlp_train_logged(train, cfg)?.0)
}

/// Trains a fresh network; also returns each epoch's mean squared error.
pub fn mlp_train_logged(train: &Dataset, cfg: &MlpConfig) -> Result<(MlpNetwork, Vec<f64>)> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let net = MlpNetwork::random(train.dim(), cfg.hidden_layers, cfg.units_per_layer, cfg.seed)?;
    mlp_train_from(net, train, cfg)
}

/// Continues training `net` on `train`.
pub fn mlp_train_from(mut net: MlpNetwork, train: &Dataset, cfg: &MlpConfig) -> Result<(MlpNetwork, Vec<f64>)> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if net.dim() != train.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: train.dim(),
        });
    }
    if !(0.0..1.0).contains(&cfg.momentum_alpha) || cfg.lr.is_nan() || cfg.lr < 0.0 {
        return Err(Error::InvalidConfig("lr must be >= 0 and momentum in [0, 1)".into()));
    }
    let space = train.label_space();
    let targets: Vec<f64> = train.targets().iter().map(|&y| unit_target(y, space)).collect();
    if targets.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidDataset("MLP targets must lie in [0, 1]".into()));
    }

    let mut velocity = net.params();
    velocity.iter_mut().for_each(|v| *v = 0.0);
    let mut params = net.params();
    let mut rng = seeded_rng(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = Vec::new();
    let mut stop = StallStop::default();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for &p in &order {
            let x = train.row(p);
            let out = net.activations(x).last().expect("nonempty")[0];
            sse += (targets[p] - out).powi(2);
            let g = net.gradient_unchecked(x, targets[p]).params();
            for ((w, v), gi) in params.iter_mut().zip(velocity.iter_mut()).zip(g) {
                momentum_step(w, v, gi, cfg.lr, cfg.momentum_alpha);
            }
            net.set_params(&params);
        }
        let mse = sse / train.len() as f64;
        log.push(mse);
        if stop.should_stop(mse) {
            break;
        }
    }
    Ok((net, log))
}
