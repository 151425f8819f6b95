//! Python bindings: scenarios, closed forms, the Gaussian-state oracle,
//! record synthesis, Welch estimation, sweeps and validation.

use std::sync::atomic::AtomicBool;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qhet_core::analytic::{self, PsdForm};
use qhet_core::experiments::{self, Level, SweepSpec};
use qhet_core::spectral::{self, WelchConfig, Window};
use qhet_core::{oracle, synth, QhetError};

create_exception!(qhet, ConfigError, PyValueError, "Invalid scenario, sweep or argument.");
create_exception!(qhet, DomainError, PyValueError, "Inputs outside the domain of a formula or estimator.");

fn err(e: QhetError) -> PyErr {
    if e.is_config_error() || matches!(e, QhetError::Io(_)) {
        ConfigError::new_err(e.to_string())
    } else {
        DomainError::new_err(e.to_string())
    }
}

fn form(name: &str) -> PyResult<PsdForm> {
    name.parse().map_err(err)
}

/// Heterodyne operating point. Keyword arguments are scenario keys
/// (`omega_s`, `omega_l`, `alpha_s_mag`, `epsilon_l`, `theta_s`, `theta_l`,
/// `r`, `gain_db`, `q`, `bandwidth_B`, `unit_system`, ...); omitted keys keep
/// the built-in optical defaults.
#[pyclass(name = "Scenario", module = "qhet", frozen)]
struct PyScenario(qhet_core::Scenario);

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut b = qhet_core::Scenario::default().to_builder();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let text = v.str()?.to_string();
                b = b.set(&key, &text).map_err(err)?;
            }
        }
        b.build().map(PyScenario).map_err(err)
    }

    /// Parses `key = value` scenario text.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        qhet_core::load_scenario(text).map(PyScenario).map_err(err)
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        qhet_core::scenario::load_scenario_file(&path).map(PyScenario).map_err(err)
    }

    /// A copy with one key changed.
    fn with_value(&self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<Self> {
        let text = value.str()?.to_string();
        self.0.to_builder().set(key, &text).and_then(|b| b.build()).map(PyScenario).map_err(err)
    }

    #[getter]
    fn omega_s(&self) -> f64 {
        self.0.omega_s()
    }
    #[getter]
    fn omega_i(&self) -> f64 {
        self.0.omega_i()
    }
    #[getter]
    fn omega_l(&self) -> f64 {
        self.0.omega_l()
    }
    #[getter]
    fn alpha_s_mag(&self) -> f64 {
        self.0.alpha_s_mag()
    }
    #[getter]
    fn epsilon_l(&self) -> f64 {
        self.0.epsilon_l()
    }
    #[getter]
    fn theta_s(&self) -> f64 {
        self.0.theta_s()
    }
    #[getter]
    fn theta_l(&self) -> f64 {
        self.0.theta_l()
    }
    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }
    #[getter]
    fn q(&self) -> f64 {
        self.0.q()
    }
    #[getter]
    fn unit_system(&self) -> &'static str {
        self.0.unit_system().as_str()
    }

    /// Beat frequency, efficiency, gain and shot-noise level.
    fn derived<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = self.0.derive();
        let out = PyDict::new(py);
        out.set_item("omega_beat", d.omega_beat)?;
        out.set_item("eta", d.eta)?;
        out.set_item("gain", d.gain)?;
        out.set_item("shot_level", d.shot_level)?;
        Ok(out)
    }

    fn serialize(&self) -> String {
        self.0.serialize()
    }

    fn digest(&self) -> String {
        self.0.digest()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(r={}, q={}, theta_l={}, digest={})", self.0.r(), self.0.q(), self.0.theta_l(), self.0.digest())
    }
}

#[pyclass(name = "NoiseFigure", module = "qhet", frozen, get_all)]
struct PyNoiseFigure {
    snr_in: f64,
    snr_out: f64,
    nf_db: f64,
    method: String,
    /// One-sigma error in dB; Monte-Carlo results only.
    std_err_db: Option<f64>,
}

#[pymethods]
impl PyNoiseFigure {
    fn __repr__(&self) -> String {
        format!("NoiseFigure(nf_db={}, method={})", self.nf_db, self.method)
    }
}

impl PyNoiseFigure {
    fn from(r: qhet_core::NoiseFigureResult, std_err_db: Option<f64>) -> Self {
        PyNoiseFigure {
            snr_in: r.snr_in,
            snr_out: r.snr_out,
            nf_db: r.nf_db,
            method: r.method.as_str().to_string(),
            std_err_db,
        }
    }
}

/// Sampled differential photocurrent.
#[pyclass(name = "TimeSeries", module = "qhet", frozen)]
struct PyTimeSeries(qhet_core::TimeSeries);

#[pymethods]
impl PyTimeSeries {
    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.0.samples.clone()
    }
    #[getter]
    fn sample_rate(&self) -> f64 {
        self.0.sample_rate
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    #[getter]
    fn scenario_hash(&self) -> String {
        self.0.scenario_hash.clone()
    }
    fn __len__(&self) -> usize {
        self.0.len()
    }
    fn variance(&self) -> f64 {
        self.0.variance()
    }
    /// Writes raw little-endian f64 samples plus a JSON sidecar; returns the sidecar path.
    fn write_binary(&self, path: std::path::PathBuf) -> PyResult<String> {
        self.0.write_binary(&path).map(|p| p.display().to_string()).map_err(err)
    }
    #[staticmethod]
    fn read_binary(path: std::path::PathBuf) -> PyResult<Self> {
        synth::TimeSeries::read_binary(&path).map(PyTimeSeries).map_err(err)
    }
}

/// One-sided Welch estimate.
#[pyclass(name = "PsdEstimate", module = "qhet", frozen)]
struct PyPsdEstimate(qhet_core::PsdEstimate);

#[pymethods]
impl PyPsdEstimate {
    #[getter]
    fn freqs(&self) -> Vec<f64> {
        self.0.freqs.clone()
    }
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }
    #[getter]
    fn n_segments(&self) -> usize {
        self.0.n_segments
    }
    fn integrated_power(&self) -> f64 {
        self.0.integrated_power()
    }
    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }
}

#[pyfunction]
fn snr_in(sc: &PyScenario) -> f64 {
    analytic::snr_in(&sc.0)
}

#[pyfunction]
fn snr_out(sc: &PyScenario) -> f64 {
    analytic::snr_out(&sc.0)
}

#[pyfunction]
fn output_power(sc: &PyScenario) -> f64 {
    analytic::output_power(&sc.0)
}

#[pyfunction]
fn beat_signal(t: f64, sc: &PyScenario) -> f64 {
    analytic::beat_signal(t, &sc.0)
}

#[pyfunction]
fn beat_amplitude(sc: &PyScenario) -> f64 {
    analytic::beat_amplitude(&sc.0)
}

/// Spectral factor F(ω); raises DomainError for |ω| > ω_l.
#[pyfunction]
fn spectral_factor_f(omega: f64, sc: &PyScenario) -> PyResult<f64> {
    analytic::spectral_factor_f_strict(omega, &sc.0).map_err(err)
}

/// One-sided noise density χ(ω); `form` is "exact" or "high-gain".
#[pyfunction]
#[pyo3(signature = (omega, sc, form = "exact"))]
fn noise_psd(omega: f64, sc: &PyScenario, form: &str) -> PyResult<f64> {
    analytic::PsdModel::new(sc.0.clone(), self::form(form)?).strict().evaluate(omega).map_err(err)
}

/// χ at the beat frequency, evaluated without cancellation at high gain.
#[pyfunction]
fn noise_psd_baseband(sc: &PyScenario) -> f64 {
    analytic::noise_psd_baseband(&sc.0)
}

#[pyfunction]
fn noise_figure(sc: &PyScenario) -> PyResult<PyNoiseFigure> {
    analytic::noise_figure(&sc.0).map(|r| PyNoiseFigure::from(r, None)).map_err(err)
}

#[pyfunction]
fn noise_figure_regular(xi: f64) -> PyResult<f64> {
    analytic::noise_figure_regular(xi).map_err(err)
}

/// Noise figure from the Gaussian-state covariance model.
#[pyfunction]
fn oracle_noise_figure(sc: &PyScenario) -> PyResult<PyNoiseFigure> {
    oracle::noise_figure(&sc.0).map(|r| PyNoiseFigure::from(r, None)).map_err(err)
}

/// Beat-quadrature statistics, output power and noise density from the
/// Gaussian-state model.
#[pyfunction]
fn oracle_observables<'py>(py: Python<'py>, sc: &PyScenario) -> PyResult<Bound<'py, PyDict>> {
    let o = oracle::observables(&sc.0).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("cos_mean", o.beat.cos_mean)?;
    out.set_item("sin_mean", o.beat.sin_mean)?;
    out.set_item("cos_var", o.beat.cos_var)?;
    out.set_item("sin_var", o.beat.sin_var)?;
    out.set_item("p_out", o.p_out)?;
    out.set_item("chi", o.chi)?;
    out.set_item("snr_out", o.snr_out)?;
    Ok(out)
}

/// Photocurrent record; sample rate defaults to 16 samples per beat period
/// and duration to 2^24 samples.
#[pyfunction]
#[pyo3(signature = (sc, seed, sample_rate = None, duration = None))]
fn synthesize_photocurrent(
    py: Python<'_>,
    sc: &PyScenario,
    seed: u64,
    sample_rate: Option<f64>,
    duration: Option<f64>,
) -> PyResult<PyTimeSeries> {
    let fs = sample_rate.unwrap_or_else(|| synth::default_sample_rate(&sc.0));
    let duration = duration.unwrap_or(experiments::sweep::DEFAULT_MC_SAMPLES as f64 / fs);
    let sc = sc.0.clone();
    py.detach(move || synth::synthesize_photocurrent(&sc, fs, duration, seed))
        .map(PyTimeSeries)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (ts, segment_len = 4096, overlap = 0.5, window = "hann"))]
fn welch_psd(ts: &PyTimeSeries, segment_len: usize, overlap: f64, window: &str) -> PyResult<PyPsdEstimate> {
    let window: Window = window.parse().map_err(err)?;
    let cfg = WelchConfig { segment_len, overlap, window };
    spectral::welch_psd(&ts.0, &cfg).map(PyPsdEstimate).map_err(err)
}

/// Monte-Carlo noise figure of a record, with its one-sigma error.
#[pyfunction]
#[pyo3(signature = (ts, sc, segment_len = 4096))]
fn measure_nf(ts: &PyTimeSeries, sc: &PyScenario, segment_len: usize) -> PyResult<PyNoiseFigure> {
    let cfg = WelchConfig { segment_len, ..WelchConfig::default() };
    spectral::measure_nf_detailed(&ts.0, &sc.0, &cfg)
        .map(|m| PyNoiseFigure::from(m.result, Some(m.nf_std_err_db)))
        .map_err(err)
}

/// Runs sweep-file text against `scenario` (the built-in default if None)
/// and returns the report in the requested format ("csv" or "json").
#[pyfunction]
#[pyo3(signature = (sweep_text, scenario = None, format = "csv"))]
fn run_sweep(py: Python<'_>, sweep_text: &str, scenario: Option<&PyScenario>, format: &str) -> PyResult<String> {
    let spec = SweepSpec::parse(sweep_text, None).map_err(err)?;
    let base = scenario.map(|s| s.0.clone()).unwrap_or_default();
    let report = py
        .detach(move || experiments::run_sweep(&spec, &base, &AtomicBool::new(false)))
        .map_err(err)?;
    match format {
        "csv" => Ok(report.to_csv_string()),
        "json" => report.to_json().map_err(err),
        other => Err(ConfigError::new_err(format!("format must be csv or json, got `{other}`"))),
    }
}

/// Runs the validation suite; returns (all_passed, table).
#[pyfunction]
#[pyo3(signature = (level = "quick", scenario = None, seed = 0))]
fn run_validation(py: Python<'_>, level: &str, scenario: Option<&PyScenario>, seed: u64) -> PyResult<(bool, String)> {
    let level: Level = level.parse().map_err(err)?;
    let base = scenario.map(|s| s.0.clone()).unwrap_or_default();
    let report = py.detach(move || experiments::run_validation(&base, seed, level));
    Ok((report.all_passed(), report.table()))
}

#[pymodule]
fn qhet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyNoiseFigure>()?;
    m.add_class::<PyTimeSeries>()?;
    m.add_class::<PyPsdEstimate>()?;
    m.add_function(wrap_pyfunction!(snr_in, m)?)?;
    m.add_function(wrap_pyfunction!(snr_out, m)?)?;
    m.add_function(wrap_pyfunction!(output_power, m)?)?;
    m.add_function(wrap_pyfunction!(beat_signal, m)?)?;
    m.add_function(wrap_pyfunction!(beat_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_factor_f, m)?)?;
    m.add_function(wrap_pyfunction!(noise_psd, m)?)?;
    m.add_function(wrap_pyfunction!(noise_psd_baseband, m)?)?;
    m.add_function(wrap_pyfunction!(noise_figure, m)?)?;
    m.add_function(wrap_pyfunction!(noise_figure_regular, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_noise_figure, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_observables, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_photocurrent, m)?)?;
    m.add_function(wrap_pyfunction!(welch_psd, m)?)?;
    m.add_function(wrap_pyfunction!(measure_nf, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_validation, m)?)?;
    Ok(())
}
