//! Kohonen learning vector quantizers.
//!
//! LVQ-I is unsupervised competitive learning: the nearest center wins and
//! moves toward the pattern. LVQ-II uses class labels to reward a correct
//! winner (move toward) or punish a wrong one (move away). Only the winner is
//! updated. The learning rate decays linearly, `lr0 * (1 - epoch / epochs)`.
//!
//! Winner search can include a conscience term: unit `j` gets the bias
//! `C * (1/K - f_j)` subtracted from its squared distance, where `f_j` is its
//! share of all wins so far.

use std::fmt::Write as _;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::data::{Dataset, LabelSpace};
use crate::error::{Error, Result};
use crate::kernel::{check_dims, sq_dist};
use crate::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvqInit {
    /// Centers start at the first `k` patterns (cycling if `k > N`).
    FirstPatterns,
    /// Centers drawn uniformly from the bounding box of the data.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LvqConfig {
    pub k: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub conscience_bias: f64,
    pub seed: u64,
    pub init: LvqInit,
}

impl Default for LvqConfig {
    fn default() -> Self {
        Self {
            k: 2,
            epochs: 50,
            lr0: 0.1,
            conscience_bias: 0.0,
            seed: 0,
            init: LvqInit::FirstPatterns,
        }
    }
}

impl LvqConfig {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lr0) {
            return Err(Error::InvalidConfig(format!(
                "lr0 must lie in [0, 1], got {}",
                self.lr0
            )));
        }
        if self.conscience_bias.is_nan() || self.conscience_bias < 0.0 {
            return Err(Error::InvalidConfig("conscience_bias must be non-negative".into()));
        }
        Ok(())
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 * (1.0 - epoch as f64 / self.epochs as f64)
    }
}

/// Largest center displacement in an epoch below which training stops.
pub const CONVERGENCE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub centers: Array2<f64>,
    pub win_counts: Vec<u64>,
    pub class_labels: Option<Vec<f64>>,
}

impl Codebook {
    pub fn new(centers: Array2<f64>) -> Self {
        let k = centers.nrows();
        Self {
            centers: centers.as_standard_layout().into_owned(),
            win_counts: vec![0; k],
            class_labels: None,
        }
    }

    pub fn k(&self) -> usize {
        self.centers.nrows()
    }

    pub fn center(&self, j: usize) -> &[f64] {
        self.centers.row(j).to_slice().expect("standard layout")
    }

    pub fn winner(&self, x: &[f64], conscience_bias: f64) -> Result<usize> {
        check_dims(x, self.center(0))?;
        Ok(self.winner_unchecked(x, conscience_bias))
    }

    /// Nearest center by biased squared distance; ties go to the lowest index.
    fn winner_unchecked(&self, x: &[f64], conscience_bias: f64) -> usize {
        let k = self.k() as f64;
        let total = self.win_counts.iter().sum::<u64>().max(1) as f64;
        let mut best = (0, f64::INFINITY);
        for j in 0..self.k() {
            let mut score = sq_dist(x, self.center(j));
            if conscience_bias > 0.0 {
                let share = self.win_counts[j] as f64 / total;
                score -= conscience_bias * (1.0 / k - share);
            }
            if score < best.1 {
                best = (j, score);
            }
        }
        best.0
    }

    /// Label of the nearest center (no conscience). Needs LVQ-II labels.
    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        let labels = self.class_labels.as_ref().ok_or(Error::UnlabeledData)?;
        Ok(labels[self.winner(x, 0.0)?])
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\twin_count");
        for i in 0..self.centers.ncols() {
            let _ = write!(out, "\tx{i}");
        }
        out.push('\n');
        for j in 0..self.k() {
            match &self.class_labels {
                Some(l) => {
                    let _ = write!(out, "{:+}", l[j] as i64);
                }
                None => out.push_str("na"),
            }
            let _ = write!(out, "\t{}", self.win_counts[j]);
            for v in self.center(j) {
                let _ = write!(out, "\t{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let bad = |line: usize, m: &str| Error::Format {
            line,
            message: m.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(1, "empty codebook"))?;
        let dim = header
            .split('\t')
            .count()
            .checked_sub(2)
            .ok_or_else(|| bad(1, "bad header"))?;
        let (mut flat, mut wins, mut labels) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines.enumerate().map(|(n, l)| (n + 2, l)) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != dim + 2 {
                return Err(bad(n, "wrong field count"));
            }
            labels.push(match f[0] {
                "na" => None,
                s => Some(s.parse::<f64>().map_err(|_| bad(n, "bad label"))?),
            });
            wins.push(f[1].parse::<u64>().map_err(|_| bad(n, "bad win count"))?);
            for v in &f[2..] {
                flat.push(v.parse::<f64>().map_err(|_| bad(n, "bad coordinate"))?);
            }
        }
        if wins.is_empty() {
            return Err(bad(2, "no centers"));
        }
        let class_labels = if labels.iter().all(Option::is_some) {
            Some(labels.into_iter().flatten().collect())
        } else if labels.iter().all(Option::is_none) {
            None
        } else {
            return Err(bad(2, "mixed labeled and unlabeled centers"));
        };
        let centers = Array2::from_shape_vec((wins.len(), dim), flat).map_err(|e| bad(2, &e.to_string()))?;
        Ok(Self {
            centers,
            win_counts: wins,
            class_labels,
        })
    }
}

pub fn winner(cb: &Codebook, x: &[f64], conscience_bias: f64) -> Result<usize> {
    cb.winner(x, conscience_bias)
}

fn initial_centers(d: &Dataset, cfg: &LvqConfig) -> Array2<f64> {
    match cfg.init {
        LvqInit::FirstPatterns => {
            let idx: Vec<usize> = (0..cfg.k).map(|j| j % d.len()).collect();
            d.features().select(Axis(0), &idx)
        }
        LvqInit::UniformRandom => {
            let mut rng = seeded_rng(cfg.seed);
            let f = d.features();
            let lo = f.fold_axis(Axis(0), f64::INFINITY, |a, &b| a.min(b));
            let hi = f.fold_axis(Axis(0), f64::NEG_INFINITY, |a, &b| a.max(b));
            Array2::from_shape_fn((cfg.k, d.dim()), |(_, i)| {
                if hi[i] > lo[i] {
                    rng.random_range(lo[i]..=hi[i])
                } else {
                    lo[i]
                }
            })
        }
    }
}

pub fn train_lvq1(d: &Dataset, cfg: &LvqConfig) -> Result<Codebook> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    train_lvq1_from(d, cfg, initial_centers(d, cfg), |_| {})
}

/// LVQ-I from explicit starting centers; `on_epoch_end` sees the codebook
/// after every completed epoch.
pub fn train_lvq1_from(
    d: &Dataset,
    cfg: &LvqConfig,
    centers: Array2<f64>,
    mut on_epoch_end: impl FnMut(&Codebook),
) -> Result<Codebook> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if centers.ncols() != d.dim() || centers.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: centers.ncols(),
        });
    }
    let mut cb = Codebook::new(centers);
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        let mut max_move: f64 = 0.0;
        for p in 0..d.len() {
            let x = d.row(p);
            let j = cb.winner_unchecked(x, cfg.conscience_bias);
            cb.win_counts[j] += 1;
            max_move = max_move.max(move_center(&mut cb, j, x, lr));
        }
        on_epoch_end(&cb);
        if max_move < CONVERGENCE_EPS {
            break;
        }
    }
    Ok(cb)
}

/// `c <- c + step * (x - c)`; returns the displacement length.
fn move_center(cb: &mut Codebook, j: usize, x: &[f64], step: f64) -> f64 {
    let mut row = cb.centers.row_mut(j);
    let mut moved = 0.0;
    for (c, &xi) in row.iter_mut().zip(x) {
        let delta = step * (xi - *c);
        *c += delta;
        moved += delta * delta;
    }
    moved.sqrt()
}

pub fn train_lvq2(d: &Dataset, cfg: &LvqConfig) -> Result<Codebook> {
    cfg.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if d.label_space() != LabelSpace::SignedBinary {
        return Err(Error::UnlabeledData);
    }
    if cfg.k < 2 {
        return Err(Error::InvalidConfig("LVQ-II needs k >= 2".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut pos: Vec<usize> = (0..d.len()).filter(|&i| d.target(i) > 0.0).collect();
    let mut neg: Vec<usize> = (0..d.len()).filter(|&i| d.target(i) < 0.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    // Proportional share of centers per class, at least one each.
    let k_pos = ((cfg.k as f64 * pos.len() as f64 / d.len() as f64).round() as usize).clamp(1, cfg.k - 1);
    let mut seeds = Vec::with_capacity(cfg.k);
    let mut labels = Vec::with_capacity(cfg.k);
    for (group, count, label) in [(&pos, k_pos, 1.0), (&neg, cfg.k - k_pos, -1.0)] {
        for t in 0..count {
            seeds.push(group[t % group.len()]);
            labels.push(label);
        }
    }
    let mut cb = Codebook::new(d.features().select(Axis(0), &seeds));
    cb.class_labels = Some(labels);

    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate(epoch);
        let mut max_move: f64 = 0.0;
        for p in 0..d.len() {
            let (_, moved) = lvq2_update(&mut cb, d.row(p), d.target(p), lr, cfg.conscience_bias);
            max_move = max_move.max(moved);
        }
        if max_move < CONVERGENCE_EPS {
            break;
        }
    }
    Ok(cb)
}

/// One LVQ-II presentation: the winner moves toward `x` when its label
/// matches `label`, away otherwise. Returns the winner and its displacement.
pub(crate) fn lvq2_update(cb: &mut Codebook, x: &[f64], label: f64, lr: f64, conscience_bias: f64) -> (usize, f64) {
    let j = cb.winner_unchecked(x, conscience_bias);
    cb.win_counts[j] += 1;
    let matches = cb.class_labels.as_ref().is_some_and(|l| l[j] == label);
    let step = if matches { lr } else { -lr };
    (j, move_center(cb, j, x, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{relabel_signed, synth_dataset, SynthKind};
    use ndarray::array;

    #[test]
    fn winner_examples() {
        let cb = Codebook::new(array![[0.0, 0.0], [10.0, 10.0]]);
        assert_eq!(cb.winner(&[1.0, 1.0], 0.0).unwrap(), 0);
        assert_eq!(cb.winner(&[5.0, 5.0], 0.0).unwrap(), 0);
        assert!(cb.winner(&[1.0], 0.0).is_err());

        // Biased scores: d - C (1/2 - 1) for unit 0, d - C (1/2 - 0) for unit 1.
        let mut cb = cb;
        cb.win_counts = vec![100, 0];
        let d = 50.0;
        let c = 1.0;
        let s0: f64 = d + 0.5 * c;
        let s1: f64 = d - 0.5 * c;
        assert!(s1 < s0);
        assert_eq!(cb.winner(&[5.0, 5.0], c).unwrap(), 1);
    }

    #[test]
    fn zero_learning_rate_keeps_first_patterns() {
        let d = synth_dataset(SynthKind::Ring, 8, 2).unwrap();
        let cfg = LvqConfig {
            k: 8,
            lr0: 0.0,
            ..Default::default()
        };
        let cb = train_lvq1(&d, &cfg).unwrap();
        assert_eq!(&cb.centers, d.features());
    }

    #[test]
    fn single_center_tracks_mean() {
        let d = synth_dataset(SynthKind::TwoGaussians, 200, 4).unwrap();
        let cb = train_lvq1(
            &d,
            &LvqConfig {
                k: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let mean = d.features().mean_axis(Axis(0)).unwrap();
        let spread = d.features().std(0.0);
        for (c, m) in cb.center(0).iter().zip(mean.iter()) {
            assert!((c - m).abs() <= 0.1 * spread, "center {c} vs mean {m}");
        }
        assert_eq!(cb.win_counts.iter().sum::<u64>() % 200, 0);
    }

    #[test]
    fn updates_move_along_the_line() {
        let d = Dataset::from_rows(&[vec![4.0, 0.0]], vec![0.3], LabelSpace::Continuous).unwrap();
        let cfg = LvqConfig {
            k: 1,
            epochs: 1,
            lr0: 0.25,
            ..Default::default()
        };
        let cb = train_lvq1_from(&d, &cfg, array![[0.0, 0.0]], |_| {}).unwrap();
        assert_eq!(cb.center(0), &[1.0, 0.0]);
    }

    #[test]
    fn reward_and_punish_directions() {
        let make = || {
            let mut cb = Codebook::new(array![[0.0, 0.0], [10.0, 10.0]]);
            cb.class_labels = Some(vec![1.0, -1.0]);
            cb
        };
        let x = [1.0, 2.0];
        let before = sq_dist(&x, &[0.0, 0.0]);

        let mut cb = make();
        let (j, moved) = lvq2_update(&mut cb, &x, 1.0, 0.1, 0.0);
        assert_eq!(j, 0);
        assert!(sq_dist(&x, cb.center(0)) < before);
        assert!((moved - 0.1 * before.sqrt()).abs() < 1e-12);

        let mut cb = make();
        lvq2_update(&mut cb, &x, -1.0, 0.1, 0.0);
        assert!(sq_dist(&x, cb.center(0)) > before);
        assert_eq!(cb.center(1), &[10.0, 10.0]);
    }

    #[test]
    fn lvq2_errors() {
        let d = synth_dataset(SynthKind::Ring, 20, 1).unwrap();
        assert!(matches!(
            train_lvq2(&d, &LvqConfig::default()),
            Err(Error::UnlabeledData)
        ));
        let s = relabel_signed(&d).unwrap();
        assert!(train_lvq2(
            &s,
            &LvqConfig {
                k: 1,
                ..Default::default()
            }
        )
        .is_err());
        let empty = Dataset::new(Array2::zeros((0, 2)), Vec::new(), LabelSpace::Continuous).unwrap();
        assert!(matches!(
            train_lvq1(&empty, &LvqConfig::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn tsv_round_trip() {
        let d = relabel_signed(&synth_dataset(SynthKind::TwoGaussians, 40, 1).unwrap()).unwrap();
        let cb = train_lvq2(
            &d,
            &LvqConfig {
                k: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(Codebook::from_tsv(&cb.to_tsv()).unwrap(), cb);
        let cb1 = train_lvq1(
            &d,
            &LvqConfig {
                k: 3,
                init: LvqInit::UniformRandom,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(Codebook::from_tsv(&cb1.to_tsv()).unwrap(), cb1);
    }

    #[test]
    fn deterministic() {
        let d = synth_dataset(SynthKind::Xor, 50, 1).unwrap();
        let cfg = LvqConfig {
            k: 4,
            init: LvqInit::UniformRandom,
            seed: 7,
            conscience_bias: 0.5,
            ..Default::default()
        };
        assert_eq!(train_lvq1(&d, &cfg).unwrap(), train_lvq1(&d, &cfg).unwrap());
    }
}
