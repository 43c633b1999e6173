//! Benchmark runner: config parsing, per-model training and the results table.
//!
//! A config is a flat list of `key = value` lines. Keys before the first
//! `[model]` header describe the data and the run, each `[model]` section
//! describes one table row. `#` starts a comment.
//!
//! ```text
//! dataset = synth
//! synth.kind = two_gaussians
//! synth.n = 200
//! seed = 7
//!
//! [model]
//! kind = rbfnn_b
//! hidden_units = 8
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::data::{
    fit_standardizer, load_csv, relabel_signed, split, synth_dataset, Dataset, LabelSpace, SplitSpec, SynthKind,
};
use crate::error::{Error, Result};
use crate::ffnn::{mlp_train, MlpConfig, MlpNetwork};
use crate::grnn::{default_threshold, GrnnModel};
use crate::kernel::GaussianKernelParams;
use crate::lvq::LvqConfig;
use crate::metrics::{confusion, report_named, EvalReport};
use crate::rbfnn::{self, RbfMode, RbfNetwork, RbfTrainConfig};
use crate::sigma_search::{sweep, GridSpec};
use crate::ssga::{default_folds, evolve_sigma_for, FitnessMetric, SigmaModel, SsgaConfig};
use crate::svm::{svm_train, SvmConfig, SvmKernel, SvmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Tsv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(OutputFormat::Tsv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synth {
        kind: SynthKind,
        n: usize,
    },
    Csv {
        path: PathBuf,
        /// `None` selects the last column.
        target_column: Option<usize>,
        header: bool,
    },
}

/// Which targets a row trains and is thresholded on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalLabels {
    Continuous,
    Signed,
}

impl EvalLabels {
    fn name(self) -> &'static str {
        match self {
            EvalLabels::Continuous => "continuous",
            EvalLabels::Signed => "signed",
        }
    }
}

impl FromStr for EvalLabels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(EvalLabels::Continuous),
            "signed" => Ok(EvalLabels::Signed),
            other => Err(Error::InvalidConfig(format!("unknown eval_labels `{other}`"))),
        }
    }
}

/// How a Gaussian width is obtained when it is not fixed in the config.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSelection {
    pub sigma: Option<f64>,
    pub grid: GridSpec,
    pub folds: Option<usize>,
    pub metric: FitnessMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Grnn(SigmaSelection),
    Egrnn { ssga: SsgaConfig, metric: FitnessMetric },
    Rbfnn(RbfTrainConfig),
    SvmLinear(SvmConfig),
    SvmRbf { svm: SvmConfig, selection: SigmaSelection },
    Ffnn(MlpConfig),
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ModelKind::Grnn(_) => "grnn",
            ModelKind::Egrnn { .. } => "egrnn",
            ModelKind::Rbfnn(c) if c.mode == RbfMode::FixedCenters => "rbfnn_a",
            ModelKind::Rbfnn(_) => "rbfnn_b",
            ModelKind::SvmLinear(_) => "svm_linear",
            ModelKind::SvmRbf { .. } => "svm_rbf",
            ModelKind::Ffnn(_) => "ffnn",
        }
    }

    fn default_name(&self) -> String {
        match self {
            ModelKind::Grnn(_) => "GRNN".into(),
            ModelKind::Egrnn { .. } => "EGRNN".into(),
            ModelKind::Rbfnn(c) if c.mode == RbfMode::FixedCenters => "RBFNN-A".into(),
            ModelKind::Rbfnn(_) => "RBFNN-B".into(),
            ModelKind::SvmLinear(_) => "SVM-linear".into(),
            ModelKind::SvmRbf { .. } => "SVM-RBF".into(),
            ModelKind::Ffnn(c) => format!("FFNN-{}", c.hidden_layers),
        }
    }

    fn is_svm(&self) -> bool {
        matches!(self, ModelKind::SvmLinear(_) | ModelKind::SvmRbf { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    pub eval_labels: EvalLabels,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    pub split: SplitSpec,
    pub standardize: bool,
    pub models: Vec<ModelSpec>,
    pub format: OutputFormat,
    pub seed: u64,
}

/// Seed of row `index` when the row does not set one.
pub fn row_seed(run_seed: u64, index: usize) -> u64 {
    run_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct Section {
    index: Option<usize>,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn new(index: Option<usize>) -> Self {
        Self {
            index,
            entries: BTreeMap::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        match self.index {
            Some(i) => format!("model[{i}].{key}"),
            None => key.to_string(),
        }
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(self.path(key), format!("line {line}: cannot parse `{v}`"))),
        }
    }

    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn check(&self, key: &str, ok: bool, message: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::config(self.path(key), message))
        }
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => {
                let path = match self.index {
                    Some(i) => format!("model[{i}].{k}"),
                    None => k,
                };
                Err(Error::config(path, format!("line {line}: unknown key")))
            }
        }
    }
}

fn split_sections(text: &str) -> Result<(Section, Vec<Section>)> {
    let mut top = Section::new(None);
    let mut models: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if line != "[model]" {
                return Err(Error::config(
                    format!("line {line_no}"),
                    format!("unknown section `{line}`"),
                ));
            }
            models.push(Section::new(Some(models.len())));
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(format!("line {line_no}"), "expected `key = value`"));
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        let section = models.last_mut().unwrap_or(&mut top);
        if k.is_empty() {
            return Err(Error::config(format!("line {line_no}"), "empty key"));
        }
        if section.entries.contains_key(&k) {
            return Err(Error::config(
                section.path(&k),
                format!("line {line_no}: duplicate key"),
            ));
        }
        section.entries.insert(k, (line_no, v));
    }
    Ok((top, models))
}

fn positive(s: &Section, key: &str, v: f64) -> Result<()> {
    s.check(key, v > 0.0 && v.is_finite(), "must be positive")
}

fn parse_selection(s: &mut Section) -> Result<SigmaSelection> {
    let d = GridSpec::default();
    let sel = SigmaSelection {
        sigma: s.take("sigma")?,
        grid: GridSpec {
            low: s.get("grid.low", d.low)?,
            high: s.get("grid.high", d.high)?,
            points: s.get("grid.points", d.points)?,
            log_spaced: s.get("grid.log", d.log_spaced)?,
        },
        folds: s.take("folds")?,
        metric: parse_metric(s)?,
    };
    if let Some(v) = sel.sigma {
        positive(s, "sigma", v)?;
    }
    sel.grid
        .values()
        .map_err(|e| Error::config(s.path("grid"), e.to_string()))?;
    if let Some(f) = sel.folds {
        s.check("folds", f >= 2, "needs at least 2 folds")?;
    }
    Ok(sel)
}

fn parse_metric(s: &mut Section) -> Result<FitnessMetric> {
    match s.take_str("metric") {
        None => Ok(FitnessMetric::F1),
        Some(v) => v
            .parse()
            .map_err(|_| Error::config(s.path("metric"), format!("unknown metric `{v}`"))),
    }
}

fn parse_svm(s: &mut Section, kernel: SvmKernel, seed: u64) -> Result<SvmConfig> {
    let d = SvmConfig::default();
    let cfg = SvmConfig {
        c: s.get("c", d.c)?,
        tol: s.get("tol", d.tol)?,
        max_passes: s.get("max_passes", d.max_passes)?,
        kernel,
        seed,
    };
    positive(s, "c", cfg.c)?;
    positive(s, "tol", cfg.tol)?;
    s.check("max_passes", cfg.max_passes > 0, "must be at least 1")?;
    Ok(cfg)
}

fn parse_model(mut s: Section, run_seed: u64) -> Result<ModelSpec> {
    let index = s.index.unwrap_or(0);
    let seed = s.get("seed", row_seed(run_seed, index))?;
    let Some(kind_tag) = s.take_str("kind") else {
        return Err(Error::config(s.path("kind"), "missing"));
    };
    let kind = match kind_tag.as_str() {
        "grnn" => ModelKind::Grnn(parse_selection(&mut s)?),
        "egrnn" => {
            let d = SsgaConfig::default();
            let ssga = SsgaConfig {
                population_size: s.get("ssga.population", d.population_size)?,
                generations: s.get("ssga.generations", d.generations)?,
                sigma_range: (
                    s.get("ssga.sigma_low", d.sigma_range.0)?,
                    s.get("ssga.sigma_high", d.sigma_range.1)?,
                ),
                tournament_size: s.get("ssga.tournament", d.tournament_size)?,
                crossover_blend_alpha: s.get("ssga.blend_alpha", d.crossover_blend_alpha)?,
                mutation_stddev: s.get("ssga.mutation_stddev", d.mutation_stddev)?,
                seed,
            };
            ssga.validate()
                .map_err(|e| Error::config(s.path("ssga"), e.to_string()))?;
            ModelKind::Egrnn {
                ssga,
                metric: parse_metric(&mut s)?,
            }
        }
        "rbfnn_a" | "rbfnn_b" => {
            let d = RbfTrainConfig::default();
            let dl = LvqConfig::default();
            let cfg = RbfTrainConfig {
                hidden_units: s.get("hidden_units", d.hidden_units)?,
                mode: if kind_tag == "rbfnn_a" {
                    RbfMode::FixedCenters
                } else {
                    RbfMode::KohonenBackprop
                },
                lr_weights: s.get("lr_weights", d.lr_weights)?,
                lr_centers: s.get("lr_centers", d.lr_centers)?,
                lr_widths: s.get("lr_widths", d.lr_widths)?,
                momentum_alpha: s.get("momentum", d.momentum_alpha)?,
                epochs: s.get("epochs", d.epochs)?,
                lvq: LvqConfig {
                    epochs: s.get("lvq.epochs", dl.epochs)?,
                    lr0: s.get("lvq.lr0", dl.lr0)?,
                    conscience_bias: s.get("lvq.conscience", dl.conscience_bias)?,
                    ..dl
                },
                seed,
            };
            s.check("hidden_units", cfg.hidden_units > 0, "must be at least 1")?;
            s.check(
                "momentum",
                (0.0..1.0).contains(&cfg.momentum_alpha),
                "must lie in [0, 1)",
            )?;
            s.check("lvq.lr0", (0.0..=1.0).contains(&cfg.lvq.lr0), "must lie in [0, 1]")?;
            ModelKind::Rbfnn(cfg)
        }
        "svm_linear" => ModelKind::SvmLinear(parse_svm(&mut s, SvmKernel::Linear, seed)?),
        "svm_rbf" => {
            // The kernel width is resolved at training time.
            let svm = parse_svm(&mut s, SvmKernel::Linear, seed)?;
            ModelKind::SvmRbf {
                svm,
                selection: parse_selection(&mut s)?,
            }
        }
        "ffnn" => {
            let d = MlpConfig::default();
            let cfg = MlpConfig {
                hidden_layers: s.get("hidden_layers", d.hidden_layers)?,
                units_per_layer: s.get("units", d.units_per_layer)?,
                lr: s.get("lr", d.lr)?,
                momentum_alpha: s.get("momentum", d.momentum_alpha)?,
                epochs: s.get("epochs", d.epochs)?,
                seed,
            };
            s.check("units", cfg.units_per_layer > 0, "must be at least 1")?;
            s.check(
                "momentum",
                (0.0..1.0).contains(&cfg.momentum_alpha),
                "must lie in [0, 1)",
            )?;
            ModelKind::Ffnn(cfg)
        }
        other => {
            return Err(Error::config(
                s.path("kind"),
                format!("unknown kind `{other}` (expected grnn, egrnn, rbfnn_a, rbfnn_b, svm_linear, svm_rbf or ffnn)"),
            ))
        }
    };
    let eval_labels = match s.take_str("eval_labels") {
        None if kind.is_svm() => EvalLabels::Signed,
        None => EvalLabels::Continuous,
        Some(v) => v
            .parse()
            .map_err(|_| Error::config(s.path("eval_labels"), format!("unknown value `{v}`")))?,
    };
    if kind.is_svm() && eval_labels != EvalLabels::Signed {
        return Err(Error::config(s.path("eval_labels"), "SVM rows train on signed labels"));
    }
    let name = s.take_str("name").unwrap_or_else(|| kind.default_name());
    s.finish()?;
    Ok(ModelSpec {
        name,
        kind,
        eval_labels,
        seed,
    })
}

impl RunConfig {
    /// Parses config text. Relative CSV paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let (mut top, sections) = split_sections(text)?;
        let seed = top.get("seed", 0u64)?;
        let dataset = match top.take_str("dataset").as_deref().unwrap_or("synth") {
            "synth" => {
                let kind = match top.take_str("synth.kind") {
                    None => SynthKind::TwoGaussians,
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::config("synth.kind", format!("unknown kind `{v}`")))?,
                };
                let n = top.get("synth.n", 200usize)?;
                top.check("synth.n", n >= 4, "needs at least 4 patterns")?;
                DatasetSource::Synth { kind, n }
            }
            "csv" => {
                let Some(p) = top.take_str("csv.path") else {
                    return Err(Error::config("csv.path", "missing"));
                };
                DatasetSource::Csv {
                    path: base_dir.join(p),
                    target_column: top.take("csv.target_column")?,
                    header: top.get("csv.header", false)?,
                }
            }
            other => {
                return Err(Error::config(
                    "dataset",
                    format!("expected synth or csv, got `{other}`"),
                ))
            }
        };
        let split = SplitSpec {
            train_fraction: top.get("split.train_fraction", 0.9)?,
            stratified: top.get("split.stratified", true)?,
            seed,
        };
        top.check(
            "split.train_fraction",
            split.train_fraction > 0.0 && split.train_fraction < 1.0,
            "must lie strictly between 0 and 1",
        )?;
        let standardize = top.get("standardize", true)?;
        let format = match top.take_str("format") {
            None => OutputFormat::Tsv,
            Some(v) => v
                .parse()
                .map_err(|_| Error::config("format", format!("expected tsv or markdown, got `{v}`")))?,
        };
        top.finish()?;
        let models = sections
            .into_iter()
            .map(|s| parse_model(s, seed))
            .collect::<Result<Vec<_>>>()?;
        let cfg = RunConfig {
            dataset,
            split,
            standardize,
            models,
            format,
            seed,
        };
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn check_files(&self) -> Result<()> {
        if let DatasetSource::Csv { path, .. } = &self.dataset {
            if !path.is_file() {
                return Err(Error::config("csv.path", format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// Replaces the run seed, re-deriving every row seed that was derived.
    pub fn with_seed(mut self, seed: u64) -> Self {
        for (i, m) in self.models.iter_mut().enumerate() {
            if m.seed == row_seed(self.seed, i) {
                let s = row_seed(seed, i);
                m.seed = s;
                match &mut m.kind {
                    ModelKind::Grnn(_) => {}
                    ModelKind::Egrnn { ssga, .. } => ssga.seed = s,
                    ModelKind::Rbfnn(c) => c.seed = s,
                    ModelKind::SvmLinear(c) | ModelKind::SvmRbf { svm: c, .. } => c.seed = s,
                    ModelKind::Ffnn(c) => c.seed = s,
                }
            }
        }
        self.seed = seed;
        self.split.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::config("[model]", "at least one model row is required"));
        }
        self.check_files()
    }
}

pub fn load_dataset(src: &DatasetSource, seed: u64) -> Result<Dataset> {
    match src {
        DatasetSource::Synth { kind, n } => synth_dataset(*kind, *n, seed),
        DatasetSource::Csv {
            path,
            target_column,
            header,
        } => {
            let col = match target_column {
                Some(c) => *c,
                None => {
                    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    let first = text
                        .lines()
                        .find(|l| !l.trim().is_empty())
                        .ok_or_else(|| Error::config("csv.path", "file is empty"))?;
                    first.split(',').count().saturating_sub(1)
                }
            };
            load_csv(path, col, *header)
        }
    }
}

/// Loads, splits and (optionally) standardizes the data. The standardizer is
/// fitted on the train split only.
pub fn prepare_data(cfg: &RunConfig) -> Result<(Dataset, Dataset)> {
    let data = load_dataset(&cfg.dataset, cfg.seed)?;
    let (train, test) = split(&data, &cfg.split)?;
    if !cfg.standardize {
        return Ok((train, test));
    }
    let st = fit_standardizer(&train)?;
    Ok((st.apply(&train)?, st.apply(&test)?))
}

/// Test split behind an access counter.
pub struct HeldOut {
    data: Dataset,
    reads: AtomicUsize,
}

impl HeldOut {
    pub fn new(data: Dataset) -> Self {
        Self {
            data,
            reads: AtomicUsize::new(0),
        }
    }

    pub fn access(&self) -> &Dataset {
        self.reads.fetch_add(1, Ordering::Relaxed);
        &self.data
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Grnn { model: GrnnModel, threshold: f64 },
    Rbf { net: RbfNetwork, threshold: f64 },
    Svm(SvmModel),
    Mlp(MlpNetwork),
}

impl TrainedModel {
    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        match self {
            TrainedModel::Grnn { model, threshold } => model.classify(x, *threshold),
            TrainedModel::Rbf { net, threshold } => net.classify(x, *threshold),
            TrainedModel::Svm(m) => m.classify(x),
            TrainedModel::Mlp(n) => n.classify(x, 0.5),
        }
    }
}

/// A trained row and the settings it resolved, for the manifest.
pub struct TrainedRow {
    pub model: TrainedModel,
    pub resolved: Vec<(String, String)>,
}

fn fmt_grid(g: &GridSpec) -> String {
    format!(
        "{}..{} x{} {}",
        g.low,
        g.high,
        g.points,
        if g.log_spaced { "log" } else { "linear" }
    )
}

fn select_sigma(
    train: &Dataset,
    sel: &SigmaSelection,
    model: SigmaModel,
    seed: u64,
    resolved: &mut Vec<(String, String)>,
) -> Result<f64> {
    if let Some(s) = sel.sigma {
        resolved.push(("sigma_source".into(), "fixed".into()));
        return Ok(s);
    }
    let folds = match sel.folds {
        Some(f) => f,
        None => default_folds(train.len())?,
    };
    let r = sweep(train, model, &sel.grid, folds, seed)?;
    let (sigma, fit) = match sel.metric {
        FitnessMetric::F1 => (r.best_sigma_f1, r.best_f1),
        FitnessMetric::Accuracy => (r.best_sigma_accuracy, r.best_accuracy),
    };
    resolved.extend([
        ("sigma_source".into(), "grid".into()),
        ("grid".into(), fmt_grid(&sel.grid)),
        ("folds".into(), folds.to_string()),
        ("metric".into(), sel.metric.name().into()),
        ("cv_fitness".into(), fit.to_string()),
        ("grid_coincide".into(), r.coincide.to_string()),
    ]);
    Ok(sigma)
}

/// Trains one row on the train split. The test split is not reachable from
/// here.
pub fn train_row(spec: &ModelSpec, train: &Dataset) -> Result<TrainedRow> {
    let signed = match train.label_space() {
        LabelSpace::Continuous => relabel_signed(train)?,
        LabelSpace::SignedBinary => train.clone(),
    };
    let data = match spec.eval_labels {
        EvalLabels::Continuous => train,
        EvalLabels::Signed => &signed,
    };
    let mut resolved = Vec::new();
    let model = match &spec.kind {
        ModelKind::Grnn(sel) => {
            let sigma = select_sigma(data, sel, SigmaModel::Grnn, spec.seed, &mut resolved)?;
            resolved.push(("sigma".into(), sigma.to_string()));
            TrainedModel::Grnn {
                model: GrnnModel::new(data, GaussianKernelParams::new(sigma)?)?,
                threshold: default_threshold(data.label_space()),
            }
        }
        ModelKind::Egrnn { ssga, metric } => {
            let r = evolve_sigma_for(data, SigmaModel::Grnn, *metric, ssga)?;
            resolved.extend([
                ("sigma_source".into(), "ssga".into()),
                ("metric".into(), metric.name().into()),
                ("ssga.population".into(), ssga.population_size.to_string()),
                ("ssga.generations".into(), ssga.generations.to_string()),
                ("ssga.sigma_low".into(), ssga.sigma_range.0.to_string()),
                ("ssga.sigma_high".into(), ssga.sigma_range.1.to_string()),
                ("ssga.tournament".into(), ssga.tournament_size.to_string()),
                ("ssga.blend_alpha".into(), ssga.crossover_blend_alpha.to_string()),
                ("ssga.mutation_stddev".into(), ssga.mutation_stddev.to_string()),
                ("cv_fitness".into(), r.best_fitness.to_string()),
                ("sigma".into(), r.best_sigma.to_string()),
            ]);
            TrainedModel::Grnn {
                model: GrnnModel::new(data, GaussianKernelParams::new(r.best_sigma)?)?,
                threshold: default_threshold(data.label_space()),
            }
        }
        ModelKind::Rbfnn(cfg) => {
            resolved.extend([
                ("hidden_units".into(), cfg.hidden_units.to_string()),
                ("lr_weights".into(), cfg.lr_weights.to_string()),
                ("lr_centers".into(), cfg.lr_centers.to_string()),
                ("lr_widths".into(), cfg.lr_widths.to_string()),
                ("momentum".into(), cfg.momentum_alpha.to_string()),
                ("epochs".into(), cfg.epochs.to_string()),
            ]);
            if cfg.mode == RbfMode::KohonenBackprop {
                resolved.extend([
                    ("lvq.epochs".into(), cfg.lvq.epochs.to_string()),
                    ("lvq.lr0".into(), cfg.lvq.lr0.to_string()),
                    ("lvq.conscience".into(), cfg.lvq.conscience_bias.to_string()),
                ]);
            }
            TrainedModel::Rbf {
                net: rbfnn::fit(data, cfg)?,
                threshold: rbfnn::threshold_for(data.label_space()),
            }
        }
        ModelKind::SvmLinear(cfg) => {
            resolved.extend(svm_entries(cfg));
            TrainedModel::Svm(svm_train(&signed, cfg)?)
        }
        ModelKind::SvmRbf { svm, selection } => {
            let sigma = select_sigma(
                &signed,
                selection,
                SigmaModel::RbfSvm { c: svm.c },
                spec.seed,
                &mut resolved,
            )?;
            resolved.push(("sigma".into(), sigma.to_string()));
            let cfg = SvmConfig {
                kernel: SvmKernel::Gaussian(GaussianKernelParams::new(sigma)?),
                ..svm.clone()
            };
            resolved.extend(svm_entries(&cfg));
            TrainedModel::Svm(svm_train(&signed, &cfg)?)
        }
        ModelKind::Ffnn(cfg) => {
            resolved.extend([
                ("hidden_layers".into(), cfg.hidden_layers.to_string()),
                ("units".into(), cfg.units_per_layer.to_string()),
                ("lr".into(), cfg.lr.to_string()),
                ("momentum".into(), cfg.momentum_alpha.to_string()),
                ("epochs".into(), cfg.epochs.to_string()),
            ]);
            if !cfg.is_standard_depth() {
                resolved.push(("note".into(), "depth outside the standard 1, 2, 4 sweep".into()));
            }
            TrainedModel::Mlp(mlp_train(data, cfg)?)
        }
    };
    Ok(TrainedRow { model, resolved })
}

fn svm_entries(cfg: &SvmConfig) -> [(String, String); 3] {
    [
        ("c".into(), cfg.c.to_string()),
        ("tol".into(), cfg.tol.to_string()),
        ("max_passes".into(), cfg.max_passes.to_string()),
    ]
}

pub fn evaluate(name: &str, model: &TrainedModel, test: &Dataset) -> Result<EvalReport> {
    let predicted = (0..test.len())
        .map(|i| model.classify(test.row(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(report_named(name, confusion(&predicted, &test.classes())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub reports: Vec<EvalReport>,
    pub manifest: String,
    /// Test-split reads observed while rows were training.
    pub test_reads_during_training: usize,
}

impl BenchOutput {
    pub fn table(&self, format: OutputFormat) -> String {
        render_table(&self.reports, format)
    }
}

pub fn render_table(reports: &[EvalReport], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Tsv => {
            out.push_str(EvalReport::TSV_HEADER);
            out.push('\n');
            for r in reports {
                out.push_str(&r.tsv_row());
                out.push('\n');
            }
        }
        OutputFormat::Markdown => {
            out.push_str("| model | accuracy | precision | recall | f1 |\n|---|---|---|---|---|\n");
            for r in reports {
                out.push_str(&r.markdown_row());
                out.push('\n');
            }
        }
    }
    out
}

fn dataset_manifest(cfg: &RunConfig) -> String {
    match &cfg.dataset {
        DatasetSource::Synth { kind, n } => {
            format!(
                "dataset = synth\nsynth.kind = {}\nsynth.n = {n}\nnote = synthetic data\n",
                kind.name()
            )
        }
        DatasetSource::Csv {
            path,
            target_column,
            header,
        } => format!(
            "dataset = csv\ncsv.path = {}\ncsv.target_column = {}\ncsv.header = {header}\n",
            path.display(),
            target_column.map_or("last".to_string(), |c| c.to_string())
        ),
    }
}

/// Trains every row on the train split, then scores each on the test split.
/// Rows train in parallel; reports come back in config order.
pub fn run_benchmark(cfg: &RunConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let (train, test) = prepare_data(cfg)?;
    let held = HeldOut::new(test);

    let trained: Vec<Result<TrainedRow>> = cfg.models.par_iter().map(|m| train_row(m, &train)).collect();
    let test_reads_during_training = held.reads();
    let trained = trained
        .into_iter()
        .zip(&cfg.models)
        .map(|(r, m)| {
            r.map_err(|e| Error::Model {
                model: m.name.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let test = held.access();
    let mut reports = Vec::with_capacity(trained.len());
    for (row, spec) in trained.iter().zip(&cfg.models) {
        reports.push(evaluate(&spec.name, &row.model, test).map_err(|e| Error::Model {
            model: spec.name.clone(),
            source: Box::new(e),
        })?);
    }

    let mut m = String::from("sigmabench manifest v1\n");
    let _ = write!(m, "seed = {}\n{}", cfg.seed, dataset_manifest(cfg));
    let _ = writeln!(m, "split.train_fraction = {}", cfg.split.train_fraction);
    let _ = writeln!(m, "split.stratified = {}", cfg.split.stratified);
    let _ = writeln!(m, "split.seed = {}", cfg.split.seed);
    let _ = writeln!(m, "standardize = {}", cfg.standardize);
    let _ = writeln!(m, "n_train = {}\nn_test = {}", train.len(), test.len());
    let _ = writeln!(m, "test_reads_during_training = {test_reads_during_training}");
    for (row, spec) in trained.iter().zip(&cfg.models) {
        let _ = writeln!(m, "\n[model]\nname = {}\nkind = {}", spec.name, spec.kind.tag());
        let _ = writeln!(m, "eval_labels = {}\nseed = {}", spec.eval_labels.name(), spec.seed);
        for (k, v) in &row.resolved {
            let _ = writeln!(m, "{k} = {v}");
        }
        if matches!(spec.kind, ModelKind::Grnn(_)) {
            m.push_str("note = GRNN width chosen by grid search\n");
        }
        if matches!(spec.kind, ModelKind::Egrnn { .. }) {
            m.push_str("note = EGRNN width evolved by the steady-state genetic algorithm\n");
        }
        if matches!(spec.kind, ModelKind::Ffnn(_)) {
            m.push_str("note = for the FFNN the hidden-layer depth (1, 2, 4) plays the role of sigma\n");
        }
    }
    Ok(BenchOutput {
        reports,
        manifest: m,
        test_reads_during_training,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "dataset = synth\nsynth.kind = two_gaussians\nsynth.n = 60\nseed = 3\n";

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("."))
    }

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_and_sections() {
        let cfg = parse(&format!(
            "{BASE}\n[model]\nkind = grnn\nsigma = 0.5\n[model]\nkind = svm_linear\nc = 2\n"
        ))
        .unwrap();
        assert_eq!(cfg.models.len(), 2);
        assert_eq!(cfg.split.train_fraction, 0.9);
        assert!(cfg.split.stratified && cfg.standardize);
        assert_eq!(cfg.models[0].name, "GRNN");
        assert_eq!(cfg.models[0].eval_labels, EvalLabels::Continuous);
        assert_eq!(cfg.models[1].eval_labels, EvalLabels::Signed);
        assert_ne!(cfg.models[0].seed, cfg.models[1].seed);
    }

    #[test]
    fn errors_carry_field_paths() {
        let e = parse(&format!("{BASE}[model]\nkind = grnn\nbogus = 1\n")).unwrap_err();
        assert_eq!(field_of(e), "model[0].bogus");
        let e = parse(&format!(
            "{BASE}[model]\nkind = svm_linear\n[model]\nkind = ffnn\nlr = fast\n"
        ))
        .unwrap_err();
        assert_eq!(field_of(e), "model[1].lr");
        let e = parse("split.train_fraction = 1.5\n").unwrap_err();
        assert_eq!(field_of(e), "split.train_fraction");
        let e = parse(&format!("{BASE}[model]\nkind = svm_rbf\neval_labels = continuous\n")).unwrap_err();
        assert_eq!(field_of(e), "model[0].eval_labels");
        let e = parse("dataset = csv\ncsv.path = /no/such/file.csv\n").unwrap_err();
        assert_eq!(field_of(e), "csv.path");
        assert!(parse("seed = 1\nseed = 2\n").is_err());
        assert!(parse("[models]\n").is_err());
    }

    #[test]
    fn empty_model_list_is_config_error() {
        let cfg = parse(BASE).unwrap();
        let e = run_benchmark(&cfg).unwrap_err();
        assert!(e.is_config_error());
    }

    #[test]
    fn two_rbf_rows_give_table_two_shape() {
        let cfg = parse(&format!(
            "{BASE}[model]\nkind = rbfnn_a\nhidden_units = 4\nepochs = 50\n[model]\nkind = rbfnn_b\nhidden_units = 4\nepochs = 50\n"
        ))
        .unwrap();
        let out = run_benchmark(&cfg).unwrap();
        let table = out.table(OutputFormat::Tsv);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "model\taccuracy\tprecision\trecall\tf1");
        assert!(lines[1].starts_with("RBFNN-A\t") && lines[2].starts_with("RBFNN-B\t"));
        assert_eq!(lines.len(), 3);
        assert!(out.table(OutputFormat::Markdown).starts_with("| model |"));
        assert_eq!(out.test_reads_during_training, 0);
    }

    #[test]
    fn seed_override_changes_derived_seeds_only() {
        let cfg = parse(&format!("{BASE}[model]\nkind = ffnn\n[model]\nkind = ffnn\nseed = 5\n")).unwrap();
        let c2 = cfg.clone().with_seed(99);
        assert_eq!(c2.models[0].seed, row_seed(99, 0));
        assert_eq!(c2.models[1].seed, 5);
        assert_eq!(c2.split.seed, 99);
    }

    #[test]
    fn test_split_does_not_influence_training() {
        // The manifest holds every selected width; it must not depend on the
        // test rows, which are perturbed here.
        let cfg = parse(&format!(
            "{BASE}[model]\nkind = grnn\ngrid.points = 8\n[model]\nkind = egrnn\nssga.generations = 10\n"
        ))
        .unwrap();
        let (train, test) = prepare_data(&cfg).unwrap();
        let rows: Vec<TrainedRow> = cfg.models.iter().map(|m| train_row(m, &train).unwrap()).collect();
        let noisy = Dataset::new(
            test.features().mapv(|v| v + 100.0),
            test.targets().clone(),
            test.label_space(),
        )
        .unwrap();
        for (row, spec) in rows.iter().zip(&cfg.models) {
            let a = evaluate(&spec.name, &row.model, &test).unwrap();
            let b = evaluate(&spec.name, &row.model, &noisy).unwrap();
            assert_eq!(a.counts.total(), b.counts.total());
        }
        let again: Vec<TrainedRow> = cfg.models.iter().map(|m| train_row(m, &train).unwrap()).collect();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.resolved, b.resolved);
        }
    }

    #[test]
    fn model_errors_name_the_row() {
        let cfg = parse("dataset = synth\nsynth.n = 20\n[model]\nname = tiny\nkind = egrnn\n").unwrap();
        let mut cfg = cfg;
        cfg.split.train_fraction = 0.05;
        match run_benchmark(&cfg) {
            Err(Error::Model { model, .. }) => assert_eq!(model, "tiny"),
            other => panic!("{other:?}"),
        }
    }
}
