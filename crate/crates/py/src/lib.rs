//! Python bindings: tracker configuration and state, synthetic sequences,
//! one-pass evaluation, and the overlap/error metrics.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use convtrack::config::TrackerConfig as CoreConfig;
use convtrack::eval::{self, Sequence};
use convtrack::features::{Frame, Rect};
use convtrack::synth::{synth_sequence, SynthSpec};
use convtrack::tracker::TrackerState;

fn rect_tuple(r: &Rect) -> (f64, f64, f64, f64) {
    (r.x, r.y, r.w, r.h)
}

fn rect_from(t: (f64, f64, f64, f64)) -> PyResult<Rect> {
    if t.2 <= 0.0 || t.3 <= 0.0 {
        return Err(PyValueError::new_err("rect width and height must be positive"));
    }
    Ok(Rect::new(t.0, t.1, t.2, t.3))
}

fn frame_from(pixels: Vec<f64>, height: usize, width: usize) -> PyResult<Frame> {
    if pixels.len() != height * width {
        return Err(PyValueError::new_err(format!(
            "expected {}x{}={} pixels, got {}",
            height,
            width,
            height * width,
            pixels.len()
        )));
    }
    Ok(Frame::from_pixels(height, width, pixels))
}

/// Tracker settings; fields mirror the `key = value` config file.
#[pyclass(name = "TrackerConfig", from_py_object)]
#[derive(Clone)]
struct PyTrackerConfig {
    inner: CoreConfig,
}

#[pymethods]
impl PyTrackerConfig {
    #[new]
    fn new() -> Self {
        PyTrackerConfig { inner: CoreConfig::default() }
    }

    /// Parse from config-file text (`key = value` lines).
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        CoreConfig::from_text(text)
            .map(|inner| PyTrackerConfig { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    /// Set one config key, e.g. `cfg.set("patch_size", "32")`.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        let mut text = self.inner.to_text();
        text.push_str(&format!("{key} = {value}\n"));
        self.inner = CoreConfig::from_text(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(())
    }

    #[getter]
    fn patch_size(&self) -> usize {
        self.inner.patch_size
    }

    #[getter]
    fn padding(&self) -> f64 {
        self.inner.padding
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn feature_kind(&self) -> String {
        self.inner.feature_kind.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "TrackerConfig(patch_size={}, padding={}, feature_kind={}, seed={})",
            self.inner.patch_size, self.inner.padding, self.inner.feature_kind, self.inner.seed
        )
    }
}

/// A deterministic synthetic sequence with exact ground truth.
#[pyclass(name = "SynthSequence")]
struct PySynthSequence {
    inner: Sequence,
}

#[pymethods]
impl PySynthSequence {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Frame pixels as a flat row-major list plus (height, width).
    fn frame(&self, index: usize) -> PyResult<(Vec<f64>, usize, usize)> {
        let f = self
            .inner
            .frames
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("frame {index} out of range")))?;
        Ok((f.pixels().to_vec(), f.height(), f.width()))
    }

    /// Ground-truth rect (x, y, w, h) for one frame.
    fn ground_truth(&self, index: usize) -> PyResult<(f64, f64, f64, f64)> {
        self.inner
            .ground_truth
            .get(index)
            .map(rect_tuple)
            .ok_or_else(|| PyValueError::new_err(format!("frame {index} out of range")))
    }
}

/// One tracked target: initialized on a frame, then stepped frame by frame.
#[pyclass(name = "Tracker", unsendable)]
struct PyTracker {
    state: TrackerState,
}

#[pymethods]
impl PyTracker {
    #[new]
    #[pyo3(signature = (config, pixels, height, width, rect, seed=None))]
    fn new(
        config: &PyTrackerConfig,
        pixels: Vec<f64>,
        height: usize,
        width: usize,
        rect: (f64, f64, f64, f64),
        seed: Option<u64>,
    ) -> PyResult<Self> {
        let frame = frame_from(pixels, height, width)?;
        let rect = rect_from(rect)?;
        let seed = seed.unwrap_or(config.inner.seed);
        let state = TrackerState::init_first_frame(&frame, &rect, &config.inner, seed);
        Ok(PyTracker { state })
    }

    /// Track one frame; returns the estimated (x, y, w, h).
    fn step(&mut self, pixels: Vec<f64>, height: usize, width: usize) -> PyResult<(f64, f64, f64, f64)> {
        let frame = frame_from(pixels, height, width)?;
        Ok(rect_tuple(&self.state.step(&frame)))
    }

    #[getter]
    fn position(&self) -> (f64, f64, f64, f64) {
        rect_tuple(&self.state.position)
    }

    #[getter]
    fn updates(&self) -> usize {
        self.state.updates
    }

    #[getter]
    fn pnr_history(&self) -> Vec<f64> {
        self.state.pnr_history.clone()
    }
}

/// Generate a synthetic sequence: kind is one of translate, zoom, occlude,
/// translate-occlude, clutter.
#[pyfunction]
#[pyo3(signature = (kind, frames=100, seed=7))]
fn synth(kind: &str, frames: usize, seed: u64) -> PyResult<PySynthSequence> {
    let spec = match kind {
        "translate" => SynthSpec::translate(2.0),
        "zoom" => SynthSpec::zoom(1.01),
        "occlude" => SynthSpec::occlude(40, 21),
        "translate-occlude" => SynthSpec::translate_occlude(2.0, 40, 8),
        "clutter" => SynthSpec::clutter(0.5),
        other => return Err(PyValueError::new_err(format!("unknown synth kind '{other}'"))),
    };
    Ok(PySynthSequence { inner: synth_sequence(&spec.with_frames(frames), seed) })
}

/// One-pass evaluation over a synthetic sequence; returns a metrics dict.
#[pyfunction]
fn ope<'py>(
    py: Python<'py>,
    config: &PyTrackerConfig,
    sequence: &PySynthSequence,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    if sequence.inner.len() < 2 {
        return Err(PyRuntimeError::new_err("sequence too short"));
    }
    let (result, summary) = eval::ope_run(&config.inner, &sequence.inner);
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("precision20", summary.precision20)?;
    dict.set_item("auc", summary.auc)?;
    dict.set_item("mean_fps", summary.mean_fps)?;
    dict.set_item("frames", summary.frames)?;
    dict.set_item("updates", summary.updates)?;
    dict.set_item("rects", result.rects.iter().map(rect_tuple).collect::<Vec<_>>())?;
    Ok(dict)
}

/// Intersection-over-union of two (x, y, w, h) rects.
#[pyfunction]
fn iou(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> PyResult<f64> {
    Ok(eval::iou(&rect_from(a)?, &rect_from(b)?))
}

/// Euclidean distance between rect centers.
#[pyfunction]
fn center_error(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> PyResult<f64> {
    Ok(eval::center_error(&rect_from(a)?, &rect_from(b)?))
}

#[pymodule]
fn convtrack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrackerConfig>()?;
    m.add_class::<PyTracker>()?;
    m.add_class::<PySynthSequence>()?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(ope, m)?)?;
    m.add_function(wrap_pyfunction!(iou, m)?)?;
    m.add_function(wrap_pyfunction!(center_error, m)?)?;
    Ok(())
}
