//! Python bindings for `sigmabench_core`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sigmabench_core::bench::{self, OutputFormat, RunConfig};
use sigmabench_core::data::{self, fit_standardizer, LabelSpace, SplitSpec, SynthKind};
use sigmabench_core::ffnn::{mlp_train, MlpConfig, MlpNetwork};
use sigmabench_core::gradcheck::run_all;
use sigmabench_core::grnn::GrnnModel;
use sigmabench_core::kernel::GaussianKernelParams;
use sigmabench_core::metrics::{confusion, report};
use sigmabench_core::rbfnn::{self, RbfMode, RbfNetwork, RbfTrainConfig};
use sigmabench_core::sigma_search::{self, GridSpec};
use sigmabench_core::ssga::{evolve_sigma_for, FitnessMetric, SigmaModel, SsgaConfig};
use sigmabench_core::svm::{svm_train, SvmConfig, SvmKernel, SvmModel};
use sigmabench_core::{Dataset, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for sigmabench_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn sigma_model(name: &str, c: f64) -> PyResult<SigmaModel> {
    match name {
        "grnn" => Ok(SigmaModel::Grnn),
        "rbf_svm" => Ok(SigmaModel::RbfSvm { c }),
        other => Err(PyValueError::new_err(format!(
            "unknown model `{other}`, expected grnn or rbf_svm"
        ))),
    }
}

/// Feature matrix with one target per row.
#[pyclass(name = "Dataset", module = "sigmabench", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from row lists. `signed=True` expects +1/-1 targets.
    #[new]
    #[pyo3(signature = (rows, targets, signed = false))]
    fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>, signed: bool) -> PyResult<Self> {
        let space = if signed {
            LabelSpace::SignedBinary
        } else {
            LabelSpace::Continuous
        };
        Ok(Self {
            inner: Dataset::from_rows(&rows, targets, space).py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, target_column, header = false))]
    fn from_csv(path: &str, target_column: usize, header: bool) -> PyResult<Self> {
        Ok(Self {
            inner: data::load_csv(path, target_column, header).py()?,
        })
    }

    /// `kind` is one of `two_gaussians`, `ring`, `xor`.
    #[staticmethod]
    #[pyo3(signature = (kind, n, seed = 0))]
    fn synth(kind: &str, n: usize, seed: u64) -> PyResult<Self> {
        let kind: SynthKind = kind.parse().py()?;
        Ok(Self {
            inner: data::synth_dataset(kind, n, seed).py()?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, dim={}, labels={})",
            self.inner.len(),
            self.inner.dim(),
            self.label_space()
        )
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn label_space(&self) -> &'static str {
        match self.inner.label_space() {
            LabelSpace::Continuous => "continuous",
            LabelSpace::SignedBinary => "signed",
        }
    }

    fn features(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    fn targets(&self) -> Vec<f64> {
        self.inner.targets().to_vec()
    }

    /// Signed class (+1/-1) of every pattern.
    fn classes(&self) -> Vec<f64> {
        self.inner.classes()
    }

    /// Continuous targets thresholded at 0.5 into +1/-1.
    fn relabel(&self) -> PyResult<Self> {
        Ok(Self {
            inner: data::relabel_signed(&self.inner).py()?,
        })
    }

    /// Returns `(train, test)`.
    #[pyo3(signature = (train_fraction = 0.9, seed = 0, stratified = true))]
    fn split(&self, train_fraction: f64, seed: u64, stratified: bool) -> PyResult<(Self, Self)> {
        let spec = SplitSpec {
            train_fraction,
            seed,
            stratified,
        };
        let (a, b) = data::split(&self.inner, &spec).py()?;
        Ok((Self { inner: a }, Self { inner: b }))
    }

    fn to_csv(&self) -> String {
        data::to_csv(&self.inner)
    }
}

/// Standardizes `train` and `test` with statistics fitted on `train`.
#[pyfunction]
fn standardize(train: &PyDataset, test: &PyDataset) -> PyResult<(PyDataset, PyDataset)> {
    let s = fit_standardizer(&train.inner).py()?;
    Ok((
        PyDataset {
            inner: s.apply(&train.inner).py()?,
        },
        PyDataset {
            inner: s.apply(&test.inner).py()?,
        },
    ))
}

#[pyclass(name = "Grnn", module = "sigmabench", frozen)]
struct PyGrnn {
    inner: GrnnModel,
}

#[pymethods]
impl PyGrnn {
    #[new]
    fn new(train: &PyDataset, sigma: f64) -> PyResult<Self> {
        let params = GaussianKernelParams::new(sigma).py()?;
        Ok(Self {
            inner: GrnnModel::new(&train.inner, params).py()?,
        })
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict(&x).py()
    }

    #[pyo3(signature = (x, threshold = None))]
    fn classify(&self, x: Vec<f64>, threshold: Option<f64>) -> PyResult<f64> {
        let t = threshold.unwrap_or_else(|| self.inner.default_threshold());
        self.inner.classify(&x, t).py()
    }
}

#[pyclass(name = "RbfNetwork", module = "sigmabench", frozen)]
struct PyRbf {
    inner: RbfNetwork,
}

#[pymethods]
impl PyRbf {
    /// `mode` is `"a"` (fixed centers) or `"b"` (Kohonen clustering then
    /// full backpropagation).
    #[staticmethod]
    #[pyo3(signature = (train, hidden_units = 10, mode = "b", epochs = 500, lr_weights = 0.05, seed = 0))]
    fn fit(
        train: &PyDataset,
        hidden_units: usize,
        mode: &str,
        epochs: usize,
        lr_weights: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let mode = match mode {
            "a" | "A" => RbfMode::FixedCenters,
            "b" | "B" => RbfMode::KohonenBackprop,
            other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
        };
        let cfg = RbfTrainConfig {
            hidden_units,
            mode,
            epochs,
            lr_weights,
            seed,
            ..Default::default()
        };
        Ok(Self {
            inner: rbfnn::fit(&train.inner, &cfg).py()?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: RbfNetwork::from_text(text).py()?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn output(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.output(&x).py()
    }

    #[pyo3(signature = (x, threshold = 0.5))]
    fn classify(&self, x: Vec<f64>, threshold: f64) -> PyResult<f64> {
        self.inner.classify(&x, threshold).py()
    }

    #[getter]
    fn hidden_units(&self) -> usize {
        self.inner.hidden_units()
    }
}

#[pyclass(name = "Svm", module = "sigmabench", frozen)]
struct PySvm {
    inner: SvmModel,
}

#[pymethods]
impl PySvm {
    /// Trains on signed data; continuous data is relabeled first. Passing
    /// `sigma` selects the Gaussian kernel.
    #[staticmethod]
    #[pyo3(signature = (train, c = 1.0, sigma = None, seed = 0))]
    fn fit(train: &PyDataset, c: f64, sigma: Option<f64>, seed: u64) -> PyResult<Self> {
        let kernel = match sigma {
            None => SvmKernel::Linear,
            Some(s) => SvmKernel::Gaussian(GaussianKernelParams::new(s).py()?),
        };
        let signed = match train.inner.label_space() {
            LabelSpace::Continuous => data::relabel_signed(&train.inner).py()?,
            LabelSpace::SignedBinary => train.inner.clone(),
        };
        let cfg = SvmConfig {
            c,
            kernel,
            seed,
            ..Default::default()
        };
        Ok(Self {
            inner: svm_train(&signed, &cfg).py()?,
        })
    }

    fn decision(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.decision(&x).py()
    }

    fn classify(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.classify(&x).py()
    }

    #[getter]
    fn support_vector_count(&self) -> usize {
        self.inner.alphas.len()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias
    }
}

#[pyclass(name = "Mlp", module = "sigmabench", frozen)]
struct PyMlp {
    inner: MlpNetwork,
}

#[pymethods]
impl PyMlp {
    #[staticmethod]
    #[pyo3(signature = (train, hidden_layers = 1, units = 10, lr = 0.1, epochs = 1000, seed = 0))]
    fn fit(train: &PyDataset, hidden_layers: usize, units: usize, lr: f64, epochs: usize, seed: u64) -> PyResult<Self> {
        let cfg = MlpConfig {
            hidden_layers,
            units_per_layer: units,
            lr,
            epochs,
            seed,
            ..Default::default()
        };
        Ok(Self {
            inner: mlp_train(&train.inner, &cfg).py()?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: MlpNetwork::from_text(text).py()?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.forward(&x).py()
    }

    #[pyo3(signature = (x, threshold = 0.5))]
    fn classify(&self, x: Vec<f64>, threshold: f64) -> PyResult<f64> {
        self.inner.classify(&x, threshold).py()
    }
}

/// Accuracy, precision, recall, F1 and the confusion counts for +1/-1
/// predictions against +1/-1 labels.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, predicted: Vec<f64>, actual: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = report(confusion(&predicted, &actual).py()?);
    let d = PyDict::new(py);
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    d.set_item("tp", r.counts.tp)?;
    d.set_item("fp", r.counts.fp)?;
    d.set_item("tn", r.counts.tn)?;
    d.set_item("fn", r.counts.fn_)?;
    Ok(d)
}

/// Cross-validated grid search over sigma.
#[pyfunction]
#[pyo3(signature = (train, model = "grnn", low = 1e-2, high = 10.0, points = 50, log_spaced = true, folds = 5, seed = 0, c = 1.0))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    train: &PyDataset,
    model: &str,
    low: f64,
    high: f64,
    points: usize,
    log_spaced: bool,
    folds: usize,
    seed: u64,
    c: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = GridSpec {
        low,
        high,
        points,
        log_spaced,
    };
    let m = sigma_model(model, c)?;
    let r = py
        .detach(|| sigma_search::sweep(&train.inner, m, &grid, folds, seed))
        .py()?;
    let d = PyDict::new(py);
    let rows: Vec<(f64, f64, f64)> = r.grid.iter().map(|p| (p.sigma, p.f1, p.accuracy)).collect();
    d.set_item("grid", rows)?;
    d.set_item("best_sigma_f1", r.best_sigma_f1)?;
    d.set_item("best_f1", r.best_f1)?;
    d.set_item("best_sigma_accuracy", r.best_sigma_accuracy)?;
    d.set_item("best_accuracy", r.best_accuracy)?;
    d.set_item("coincide", r.coincide)?;
    d.set_item("tolerance_used", r.tolerance_used)?;
    Ok(d)
}

/// Steady-state genetic search for sigma.
#[pyfunction]
#[pyo3(signature = (train, metric = "f1", model = "grnn", generations = 200, population = 20, seed = 0, c = 1.0))]
#[allow(clippy::too_many_arguments)]
fn evolve<'py>(
    py: Python<'py>,
    train: &PyDataset,
    metric: &str,
    model: &str,
    generations: usize,
    population: usize,
    seed: u64,
    c: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let metric: FitnessMetric = metric.parse().py()?;
    let m = sigma_model(model, c)?;
    let cfg = SsgaConfig {
        generations,
        population_size: population,
        seed,
        ..Default::default()
    };
    let r = py.detach(|| evolve_sigma_for(&train.inner, m, metric, &cfg)).py()?;
    let d = PyDict::new(py);
    d.set_item("best_sigma", r.best_sigma)?;
    d.set_item("best_fitness", r.best_fitness)?;
    let best: Vec<f64> = r.history.iter().map(|h| h.best_fitness).collect();
    d.set_item("best_history", best)?;
    Ok(d)
}

/// Finite-difference gradient checks; one `(name, max_rel_error, passed)`
/// tuple per suite.
#[pyfunction]
#[pyo3(signature = (seeds = 100))]
fn gradcheck(seeds: u64) -> Vec<(String, f64, bool)> {
    run_all(seeds, false)
        .into_iter()
        .map(|r| {
            let ok = r.passed();
            (r.name, r.max_rel_error, ok)
        })
        .collect()
}

/// Runs a benchmark config file; returns `(table, manifest)`.
#[pyfunction]
#[pyo3(signature = (config_path, seed = None, markdown = false))]
fn run_benchmark(py: Python<'_>, config_path: &str, seed: Option<u64>, markdown: bool) -> PyResult<(String, String)> {
    let mut cfg = RunConfig::from_file(config_path).py()?;
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    let out = py.detach(|| bench::run_benchmark(&cfg)).py()?;
    let format = if markdown {
        OutputFormat::Markdown
    } else {
        OutputFormat::Tsv
    };
    Ok((out.table(format), out.manifest))
}

#[pymodule]
fn sigmabench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyGrnn>()?;
    m.add_class::<PyRbf>()?;
    m.add_class::<PySvm>()?;
    m.add_class::<PyMlp>()?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    Ok(())
}
