//! Python bindings: plans, classifiers, the description pipeline and the
//! text metrics.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use sugaman::config::Config as CoreConfig;
use sugaman::decor::{canonical_library, SignatureLibrary};
use sugaman::geometry::Point;
use sugaman::grammar;
use sugaman::lofd::{self, ClassifierKind, RoomClassifier, TrainConfig, N_FEATURES};
use sugaman::metrics;
use sugaman::model::{DecorClass, DecorInstance, RoomLabel};
use sugaman::navigation::{render_overlay, save_overlay};
use sugaman::pipeline;
use sugaman::raster::{self, BinaryImage, Rect};
use sugaman::synth::{self, PlanSpec};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

/// A binarized floor plan (ink is `True`).
#[pyclass(module = "sugaman_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Plan {
    image: BinaryImage,
}

#[pymethods]
impl Plan {
    #[staticmethod]
    #[pyo3(signature = (path, threshold = 128))]
    fn load(path: PathBuf, threshold: u8) -> PyResult<Plan> {
        let gray = raster::load_png(&path).map_err(io_err)?;
        Ok(Plan { image: raster::binarize(&gray, threshold).map_err(value_err)? })
    }

    /// A synthetic plan and its ground truth as JSON.
    #[staticmethod]
    fn synthetic(seed: u64, rooms: usize) -> PyResult<(Plan, String)> {
        let (image, gt) = synth::generate(&PlanSpec::new(seed, rooms)).map_err(value_err)?;
        Ok((Plan { image }, gt.to_json()))
    }

    #[getter]
    fn width(&self) -> usize {
        self.image.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.image.height()
    }

    fn ink_pixels(&self) -> usize {
        self.image.count()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.image.save_png(&path).map_err(io_err)
    }

    fn __repr__(&self) -> String {
        format!("Plan({}x{})", self.image.width(), self.image.height())
    }
}

/// Pipeline settings; keys as in the configuration file.
#[pyclass(module = "sugaman_py", skip_from_py_object)]
#[derive(Clone, Default)]
pub struct Config {
    inner: CoreConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (path = None))]
    fn new(path: Option<PathBuf>) -> PyResult<Config> {
        let inner = match path {
            Some(p) => CoreConfig::load(&p).map_err(value_err)?,
            None => CoreConfig::default(),
        };
        Ok(Config { inner })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Config> {
        Ok(Config { inner: CoreConfig::parse(text).map_err(value_err)? })
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        let mut next = self.inner.clone();
        next.set(key, value).map_err(PyValueError::new_err)?;
        // re-run the range checks through the parser
        self.inner = CoreConfig::parse(&next.to_text()).map_err(value_err)?;
        Ok(())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

/// Room classifier over 24-dimensional decor features.
#[pyclass(module = "sugaman_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Classifier {
    inner: RoomClassifier,
}

fn feature_rows(rows: Vec<Vec<f64>>) -> PyResult<Vec<[f64; N_FEATURES]>> {
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| <[f64; N_FEATURES]>::try_from(r).map_err(|r| value_err(format!("row {i} has {} values, expected {N_FEATURES}", r.len()))))
        .collect()
}

#[pymethods]
impl Classifier {
    /// Labels are tags: B, T, E, K or H.
    #[staticmethod]
    #[pyo3(signature = (features, labels, kind = "mlp", seed = 1))]
    fn train(features: Vec<Vec<f64>>, labels: Vec<String>, kind: &str, seed: u64) -> PyResult<Classifier> {
        let kind = ClassifierKind::parse(kind).ok_or_else(|| value_err(format!("unknown classifier kind {kind:?}")))?;
        let xs = feature_rows(features)?;
        let ys = labels
            .iter()
            .map(|t| RoomLabel::from_tag(t).map(RoomLabel::code).ok_or_else(|| value_err(format!("unknown label {t:?}"))))
            .collect::<PyResult<Vec<u8>>>()?;
        Ok(Classifier { inner: lofd::train(&xs, &ys, &TrainConfig::new(kind, seed)).map_err(value_err)? })
    }

    /// Trains on a corpus's `features.csv` using every row.
    #[staticmethod]
    #[pyo3(signature = (corpus, kind = "mlp", seed = 1))]
    fn train_corpus(corpus: PathBuf, kind: &str, seed: u64) -> PyResult<Classifier> {
        let kind = ClassifierKind::parse(kind).ok_or_else(|| value_err(format!("unknown classifier kind {kind:?}")))?;
        let text = std::fs::read_to_string(corpus.join("features.csv")).map_err(io_err)?;
        let (xs, ys): (Vec<_>, Vec<_>) = lofd::read_feature_csv(&text).map_err(value_err)?.into_iter().unzip();
        Ok(Classifier { inner: lofd::train(&xs, &ys, &TrainConfig::new(kind, seed)).map_err(value_err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Classifier> {
        let text = std::fs::read_to_string(&path).map_err(io_err)?;
        Classifier::from_text(&text)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Classifier> {
        Ok(Classifier { inner: RoomClassifier::from_text(text).map_err(value_err)? })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    /// Predicted label tags.
    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<&'static str>> {
        Ok(self.inner.predict(&feature_rows(features)?).into_iter().map(RoomLabel::tag).collect())
    }
}

#[pyclass(module = "sugaman_py", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Room {
    id: usize,
    label: String,
    area_sqft: f64,
    direction: String,
    neighbors: Vec<usize>,
    /// `(decor name, direction)` pairs.
    decors: Vec<(String, String)>,
    polygon: Vec<(f64, f64)>,
}

#[pymethods]
impl Room {
    fn __repr__(&self) -> String {
        format!("Room(id={}, label={:?}, area_sqft={:.2})", self.id, self.label, self.area_sqft)
    }
}

/// Result of describing one plan.
#[pyclass(module = "sugaman_py", frozen)]
pub struct Analysis {
    plan: BinaryImage,
    inner: pipeline::Analysis,
}

#[pymethods]
impl Analysis {
    /// The full rendered description.
    #[getter]
    fn text(&self) -> String {
        grammar::render(&self.inner.description)
    }

    #[getter]
    fn general(&self) -> Vec<String> {
        self.inner.description.gd.clone()
    }

    #[getter]
    fn navigation(&self) -> Vec<String> {
        self.inner.description.nv.clone()
    }

    #[getter]
    fn entry_door(&self) -> Option<usize> {
        self.inner.model.entry_door
    }

    #[getter]
    fn rooms(&self) -> Vec<Room> {
        self.inner
            .model
            .rooms
            .iter()
            .map(|r| Room {
                id: r.id,
                label: r.label.name().to_string(),
                area_sqft: r.area_sqft,
                direction: r.global_dir.name().to_string(),
                neighbors: r.neighbors.iter().copied().collect(),
                decors: r.decors.iter().map(|d| (d.decor.class.name(), d.dir.name().to_string())).collect(),
                polygon: r.polygon.iter().map(|p| (p.x, p.y)).collect(),
            })
            .collect()
    }

    /// Doors as `(id, rooms)`.
    #[getter]
    fn doors(&self) -> Vec<(usize, Vec<usize>)> {
        self.inner.model.doors.iter().map(|d| (d.id, d.rooms.clone())).collect()
    }

    /// Room ids in visiting order, revisits included.
    #[getter]
    fn route(&self) -> Vec<usize> {
        self.inner.traversal.routes.iter().map(|r| r.room).collect()
    }

    fn xml(&self) -> PyResult<String> {
        let bytes = self.inner.model.to_xml().map_err(value_err)?;
        String::from_utf8(bytes).map_err(value_err)
    }

    fn save_overlay(&self, path: PathBuf) -> PyResult<()> {
        save_overlay(&render_overlay(&self.plan, &self.inner.model, &self.inner.traversal), &path).map_err(io_err)
    }
}

fn library(cfg: &CoreConfig) -> PyResult<SignatureLibrary> {
    match &cfg.signature_library {
        Some(p) => SignatureLibrary::from_text(&std::fs::read_to_string(p).map_err(io_err)?).map_err(value_err),
        None => Ok(canonical_library()),
    }
}

/// Runs the whole pipeline on a plan.
#[pyfunction]
#[pyo3(signature = (plan, classifier, config = None))]
fn describe(py: Python<'_>, plan: &Plan, classifier: &Classifier, config: Option<&Config>) -> PyResult<Analysis> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    let lib = library(&cfg)?;
    let image = plan.image.clone();
    let clf = classifier.inner.clone();
    let inner = py.detach(|| pipeline::analyze(&image, &clf, &lib, &cfg)).map_err(value_err)?;
    Ok(Analysis { plan: image, inner })
}

/// The 24 decor features of a room centred at `center`; decors are
/// `(name, (x0, y0, x1, y1))` with inclusive pixel boxes.
#[pyfunction]
#[pyo3(signature = (center, decors, mean_distance = false))]
fn lofd_features(center: (f64, f64), decors: Vec<(String, (i64, i64, i64, i64))>, mean_distance: bool) -> PyResult<Vec<f64>> {
    let instances = decors
        .into_iter()
        .map(|(name, (x0, y0, x1, y1))| {
            let class = DecorClass::from_slug(&name.replace(' ', "-")).ok_or_else(|| value_err(format!("unknown decor {name:?}")))?;
            Ok(DecorInstance::new(class, Rect::new(x0, y0, x1, y1)))
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(lofd::compute_lofd(&Point::new(center.0, center.1), &instances, mean_distance).to_array().to_vec())
}

fn tokenize_all(refs: &[String]) -> Vec<Vec<String>> {
    refs.iter().map(|r| metrics::tokenize(r)).collect()
}

/// ROUGE-N as `(recall, precision, f1)`.
#[pyfunction]
#[pyo3(signature = (candidate, references, n = 1))]
fn rouge(candidate: &str, references: Vec<String>, n: usize) -> PyResult<(f64, f64, f64)> {
    let s = metrics::rouge_n(&metrics::tokenize(candidate), &tokenize_all(&references), n).map_err(value_err)?;
    Ok((s.recall, s.precision, s.f1))
}

/// BLEU with uniform weights up to `n`-grams.
#[pyfunction]
#[pyo3(signature = (candidate, references, n = 4))]
fn bleu(candidate: &str, references: Vec<String>, n: usize) -> PyResult<f64> {
    metrics::bleu(&metrics::tokenize(candidate), &tokenize_all(&references), &metrics::uniform_weights(n)).map_err(value_err)
}

#[pyfunction]
fn meteor(candidate: &str, references: Vec<String>) -> f64 {
    metrics::meteor_multi(&metrics::tokenize(candidate), &tokenize_all(&references)).score
}

/// Corpus scores as the tab-separated table printed by `sugaman eval`.
#[pyfunction]
fn evaluate(candidates: Vec<String>, references: Vec<Vec<String>>) -> PyResult<String> {
    Ok(metrics::evaluate_corpus(&candidates, &references).map_err(value_err)?.to_tsv())
}

/// Writes a synthetic corpus; returns the number of rooms.
#[pyfunction]
fn generate_corpus(py: Python<'_>, n: usize, seed: u64, out: PathBuf) -> PyResult<usize> {
    let gts = py.detach(|| synth::generate_corpus(n, seed, &out)).map_err(value_err)?;
    Ok(gts.iter().map(|g| g.rooms.len()).sum())
}

#[pymodule]
fn sugaman_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Plan>()?;
    m.add_class::<Config>()?;
    m.add_class::<Classifier>()?;
    m.add_class::<Room>()?;
    m.add_class::<Analysis>()?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(lofd_features, m)?)?;
    m.add_function(wrap_pyfunction!(rouge, m)?)?;
    m.add_function(wrap_pyfunction!(bleu, m)?)?;
    m.add_function(wrap_pyfunction!(meteor, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    Ok(())
}
