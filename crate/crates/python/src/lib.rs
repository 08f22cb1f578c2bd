//! Python bindings for `lfsgm`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lfsgm::eval::{self, EvalRegion};
use lfsgm::synth::{self, SynthParams};
use lfsgm::{loader, pfm, viz, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Image { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Dense disparity map; invalid pixels read back as NaN.
#[pyclass(name = "DisparityMap", module = "lfsgm_py", from_py_object)]
#[derive(Clone)]
struct PyDisparityMap(lfsgm::DisparityMap);

#[pymethods]
impl PyDisparityMap {
    /// Builds a map from row-major values.
    #[new]
    fn new(width: usize, height: usize, values: Vec<f64>) -> PyResult<Self> {
        lfsgm::DisparityMap::from_values(width, height, values)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    /// `(height, width)`, matching numpy conventions.
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.height(), self.0.width())
    }

    /// Row-major values.
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    /// Nested rows, suitable for `numpy.array(...)`.
    fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.values().chunks(self.0.width()).map(<[f64]>::to_vec).collect()
    }

    fn get(&self, x: usize, y: usize) -> Option<f64> {
        (x < self.0.width() && y < self.0.height())
            .then(|| self.0.get(x, y))
            .flatten()
    }

    fn valid_count(&self) -> usize {
        self.0.valid_count()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!(
            "DisparityMap({}x{}, {} valid)",
            self.0.width(),
            self.0.height(),
            self.0.valid_count()
        )
    }
}

#[pyclass(name = "LightField", module = "lfsgm_py", from_py_object)]
#[derive(Clone)]
struct PyLightField(lfsgm::LightField);

#[pymethods]
impl PyLightField {
    #[staticmethod]
    #[pyo3(signature = (path, layout = "benchmark"))]
    fn load(path: &str, layout: &str) -> PyResult<Self> {
        let layout: loader::Layout = layout.parse().map_err(to_py)?;
        loader::load_lightfield(path, layout).map(Self).map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        loader::write_lightfield(path, &self.0).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    /// Angular dims `(S, T)`.
    #[getter]
    fn angular(&self) -> (usize, usize) {
        (self.0.s_count(), self.0.t_count())
    }

    #[getter]
    fn disparity_range(&self) -> (f64, f64) {
        (self.0.d_min(), self.0.d_max())
    }

    #[getter]
    fn reference(&self) -> (usize, usize) {
        let r = self.0.reference();
        (r.s, r.t)
    }

    fn __repr__(&self) -> String {
        format!(
            "LightField({}x{} views of {}x{}, d in [{}, {}])",
            self.0.s_count(),
            self.0.t_count(),
            self.0.width(),
            self.0.height(),
            self.0.d_min(),
            self.0.d_max()
        )
    }
}

/// Pipeline settings. Keyword arguments use the config-file key names.
#[pyclass(name = "PipelineConfig", module = "lfsgm_py", from_py_object)]
#[derive(Clone)]
struct PyPipelineConfig(lfsgm::PipelineConfig);

#[pymethods]
impl PyPipelineConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = Self(lfsgm::PipelineConfig::default());
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                cfg.set(&k.extract::<String>()?, &v)?;
            }
        }
        Ok(cfg)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        lfsgm::PipelineConfig::from_file(path).map(Self).map_err(to_py)
    }

    /// Sets one field; booleans map to on/off.
    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let text = match value.extract::<bool>() {
            Ok(b) if value.is_instance_of::<pyo3::types::PyBool>() => {
                if b { "on".to_string() } else { "off".to_string() }
            }
            _ => value.str()?.to_string(),
        };
        self.0.set(key, &text).map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn to_dict(&self) -> Vec<(String, String)> {
        self.0
            .to_text()
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("PipelineConfig({})", self.0.to_text().trim().replace('\n', ", "))
    }
}

/// Estimated maps and statistics.
#[pyclass(name = "EstimateResult", module = "lfsgm_py")]
struct PyEstimateResult {
    #[pyo3(get)]
    disparity: PyDisparityMap,
    #[pyo3(get)]
    wta: PyDisparityMap,
    #[pyo3(get)]
    runtime_seconds: f64,
    #[pyo3(get)]
    sampled_fraction: f64,
    #[pyo3(get)]
    hypothesis_step: f64,
}

#[pymethods]
impl PyEstimateResult {
    fn __repr__(&self) -> String {
        format!(
            "EstimateResult(runtime_seconds={:.4}, sampled_fraction={:.4})",
            self.runtime_seconds, self.sampled_fraction
        )
    }
}

#[pyfunction]
#[pyo3(signature = (lightfield, config = None))]
fn estimate(
    py: Python<'_>,
    lightfield: &PyLightField,
    config: Option<&PyPipelineConfig>,
) -> PyResult<PyEstimateResult> {
    let cfg = config.map(|c| c.0.clone()).unwrap_or_default();
    let lf = &lightfield.0;
    let out = py.detach(|| lfsgm::estimate(lf, &cfg)).map_err(to_py)?;
    Ok(PyEstimateResult {
        disparity: PyDisparityMap(out.disparity),
        wta: PyDisparityMap(out.wta),
        runtime_seconds: out.runtime_seconds,
        sampled_fraction: out.sampled_fraction,
        hypothesis_step: out.grid.step(),
    })
}

/// Renders a procedural-texture scene with constant disparity.
#[pyfunction]
#[pyo3(signature = (disparity, s = 5, t = 5, texture_size = 96, texture_seed = 0, noise = 0.0, seed = 0, d_min = synth::DEFAULT_RANGE.0, d_max = synth::DEFAULT_RANGE.1))]
#[allow(clippy::too_many_arguments)]
fn synthesize(
    disparity: f64,
    s: usize,
    t: usize,
    texture_size: u32,
    texture_seed: u64,
    noise: f64,
    seed: u64,
    d_min: f64,
    d_max: f64,
) -> PyResult<(PyLightField, PyDisparityMap)> {
    let tex = synth::procedural_texture(texture_size, texture_size, texture_seed);
    let p = SynthParams {
        disparity,
        s_count: s,
        t_count: t,
        noise_sigma: noise,
        seed,
        d_min,
        d_max,
    };
    let (lf, gt) = synth::synthesize(&tex, &p).map_err(to_py)?;
    Ok((PyLightField(lf), PyDisparityMap(gt)))
}

#[pyfunction]
#[pyo3(signature = (estimate, ground_truth, threshold = eval::BADPIX_THRESHOLD, margin = 0))]
fn badpix(estimate: &PyDisparityMap, ground_truth: &PyDisparityMap, threshold: f64, margin: usize) -> PyResult<f64> {
    eval::badpix(&estimate.0, &ground_truth.0, threshold, EvalRegion::with_margin(margin)).map_err(to_py)
}

/// Mean squared error over valid estimates, scaled by 100 unless `raw`.
#[pyfunction]
#[pyo3(signature = (estimate, ground_truth, raw = false, margin = 0))]
fn mse(estimate: &PyDisparityMap, ground_truth: &PyDisparityMap, raw: bool, margin: usize) -> PyResult<f64> {
    let scale = if raw { 1.0 } else { 100.0 };
    eval::mse(&estimate.0, &ground_truth.0, scale, EvalRegion::with_margin(margin)).map_err(to_py)
}

#[pyfunction]
fn m_metric(badpix: f64, runtime_seconds: f64) -> PyResult<f64> {
    eval::m_metric(badpix, runtime_seconds).map_err(to_py)
}

#[pyfunction]
fn read_pfm(path: &str) -> PyResult<PyDisparityMap> {
    pfm::read_pfm(path).map(PyDisparityMap).map_err(to_py)
}

#[pyfunction]
fn write_pfm(path: &str, map: &PyDisparityMap) -> PyResult<()> {
    pfm::write_pfm(path, &map.0).map_err(to_py)
}

#[pyfunction]
fn write_png(path: &str, map: &PyDisparityMap, d_min: f64, d_max: f64) -> PyResult<()> {
    viz::write_png(path, &map.0, d_min, d_max).map_err(to_py)
}

#[pymodule]
fn lfsgm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDisparityMap>()?;
    m.add_class::<PyLightField>()?;
    m.add_class::<PyPipelineConfig>()?;
    m.add_class::<PyEstimateResult>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(badpix, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(m_metric, m)?)?;
    m.add_function(wrap_pyfunction!(read_pfm, m)?)?;
    m.add_function(wrap_pyfunction!(write_pfm, m)?)?;
    m.add_function(wrap_pyfunction!(write_png, m)?)?;
    m.add("BADPIX_THRESHOLD", eval::BADPIX_THRESHOLD)?;
    Ok(())
}
