//! Python bindings. Numeric arguments and results use fs, THz and nm.

use biphoton_wkt::config;
use biphoton_wkt::extract::{self, EnvelopeModel};
use biphoton_wkt::formats;
use biphoton_wkt::interference::{self, Sign};
use biphoton_wkt::pipeline;
use biphoton_wkt::spectral::{self, angular_to_hz, InterferenceKind, SpectralAxis, Units};
use biphoton_wkt::tsi::{self, ProjectionAxis};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    biphoton_wkt,
    WktError,
    PyException,
    "Raised for any pipeline error; args are (kind, message, exit_code)."
);

fn err(e: biphoton_wkt::WktError) -> PyErr {
    WktError::new_err((e.kind(), e.to_string(), e.exit_code()))
}

fn parse<T: std::str::FromStr<Err = biphoton_wkt::WktError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

#[pyclass(name = "RunConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRunConfig(config::RunConfig);

#[pymethods]
impl PyRunConfig {
    /// Embedded defaults, optionally overridden by `key=value` lines.
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        config::RunConfig::from_text(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        config::RunConfig::load(path.as_ref()).map(Self).map_err(err)
    }

    #[getter]
    fn tolerance(&self) -> f64 {
        self.0.tolerance
    }

    #[getter]
    fn visibility(&self) -> f64 {
        self.0.visibility
    }

    #[getter]
    fn pump_wavelength_nm(&self) -> f64 {
        self.0.pump.center_wavelength * 1e9
    }

    /// Delays (fs) used for `kind`.
    fn delays_fs(&self, kind: &str) -> PyResult<Vec<f64>> {
        Ok(self.0.delays(parse(kind)?).points().iter().map(|t| t * 1e15).collect())
    }
}

#[pyclass(name = "Interferogram", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInterferogram(spectral::Interferogram);

#[pymethods]
impl PyInterferogram {
    #[new]
    #[pyo3(signature = (delays_fs, values, kind = None, units = "probability"))]
    fn new(delays_fs: Vec<f64>, values: Vec<f64>, kind: Option<&str>, units: &str) -> PyResult<Self> {
        let kind = kind.map(parse::<InterferenceKind>).transpose()?;
        formats::interferogram_from_samples(&delays_fs, values, kind, parse(units)?).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        formats::read_interferogram(text.as_bytes()).map(Self).map_err(err)
    }

    fn to_csv(&self) -> String {
        formats::write_interferogram(&self.0)
    }

    #[getter]
    fn delays_fs(&self) -> Vec<f64> {
        self.0.delays().points().iter().map(|t| t * 1e15).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn kind(&self) -> Option<&'static str> {
        self.0.kind().map(|k| k.as_str())
    }

    #[getter]
    fn units(&self) -> &'static str {
        self.0.units().as_str()
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Interferogram(kind={}, units={}, samples={})",
            self.kind().unwrap_or("None"),
            self.units(),
            self.__len__()
        )
    }
}

#[pyclass(name = "Spectrum", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpectrum {
    spectrum: spectral::Spectrum1D,
    axis: SpectralAxis,
    negative_warning: bool,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn freq_thz(&self) -> Vec<f64> {
        self.spectrum.grid().points().iter().map(|w| angular_to_hz(*w) * 1e-12).collect()
    }

    /// Density per THz.
    #[getter]
    fn intensity(&self) -> Vec<f64> {
        self.spectrum.values().iter().map(|v| v * spectral::hz_to_angular(1e12)).collect()
    }

    #[getter]
    fn axis(&self) -> &'static str {
        self.axis.as_str()
    }

    #[getter]
    fn center_thz(&self) -> f64 {
        angular_to_hz(self.spectrum.center()) * 1e-12
    }

    #[getter]
    fn negative_warning(&self) -> bool {
        self.negative_warning
    }

    fn fwhm_thz(&self) -> PyResult<f64> {
        Ok(self.spectrum.fwhm_hz().map_err(err)? * 1e-12)
    }

    fn integral(&self) -> f64 {
        self.spectrum.integral()
    }

    fn to_csv(&self) -> String {
        formats::write_spectrum(&self.spectrum, self.axis)
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(axis={}, bins={})", self.axis(), self.spectrum.values().len())
    }
}

#[pyclass(name = "TsiGrid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTsiGrid(tsi::TsiGrid);

#[pymethods]
impl PyTsiGrid {
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        formats::read_tsi(text.as_bytes()).map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| err(biphoton_wkt::WktError::Io(format!("{path}: {e}"))))?;
        Self::from_csv(&text)
    }

    fn to_csv(&self) -> String {
        formats::write_tsi(&self.0)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.lambda_s().count(), self.0.lambda_i().count())
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    fn subtract_background(&self) -> Self {
        Self(tsi::subtract_background(&self.0))
    }

    /// Returns `(coordinate_nm, counts)` along `x`, `diagonal` or `antidiagonal`.
    fn project(&self, axis: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = tsi::project(&self.0, parse::<ProjectionAxis>(axis)?).map_err(err)?;
        Ok((p.coordinates().iter().map(|c| c * 1e9).collect(), p.values))
    }

    /// Returns `(delta_lambda_nm, delta_nu_thz)` of the projection along `axis`.
    fn bandwidth(&self, axis: &str, center_nm: f64) -> PyResult<(f64, f64)> {
        let p = tsi::project(&self.0, parse::<ProjectionAxis>(axis)?).map_err(err)?;
        let r = tsi::profile_bandwidth_report(&p, center_nm * 1e-9).map_err(err)?;
        Ok((r.delta_lambda * 1e9, r.delta_nu * 1e-12))
    }
}

fn cfg_or_default(cfg: Option<&PyRunConfig>) -> config::RunConfig {
    cfg.map(|c| c.0.clone()).unwrap_or_else(config::RunConfig::defaults)
}

/// Simulates an interferogram of `kind` (`mzi`, `homi` or `nooni`).
#[pyfunction]
#[pyo3(signature = (kind, cfg = None))]
fn simulate(kind: &str, cfg: Option<&PyRunConfig>) -> PyResult<PyInterferogram> {
    pipeline::simulate(&cfg_or_default(cfg), parse(kind)?).map(PyInterferogram).map_err(err)
}

/// Recovers the spectrum behind an interferogram.
#[pyfunction]
#[pyo3(signature = (ig, cfg = None))]
fn extract_spectrum(ig: &PyInterferogram, cfg: Option<&PyRunConfig>) -> PyResult<PySpectrum> {
    let kind = ig.0.kind().ok_or_else(|| err(biphoton_wkt::WktError::UnknownKind))?;
    let opts = pipeline::extract_options(&cfg_or_default(cfg), kind);
    let r = extract::extract_spectrum_with(&ig.0, &opts).map_err(err)?;
    Ok(PySpectrum { spectrum: r.spectrum, axis: r.axis, negative_warning: r.negative_warning })
}

/// Fits the fringe or dip envelope with model `gaussian` or `triangle`.
#[pyfunction]
#[pyo3(signature = (ig, model = "gaussian"))]
fn fit_envelope<'py>(py: Python<'py>, ig: &PyInterferogram, model: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = extract::fit_envelope(&ig.0, parse::<EnvelopeModel>(model)?).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("model", r.model.as_str())?;
    d.set_item("visibility", r.visibility)?;
    d.set_item("visibility_uncertainty", r.visibility_uncertainty)?;
    d.set_item("fwhm_fs", r.temporal_fwhm * 1e15)?;
    d.set_item("center_fs", r.center * 1e15)?;
    d.set_item("residual_rms", r.residual_rms)?;
    d.set_item("carrier_thz", r.carrier.map(|w| angular_to_hz(w) * 1e-12))?;
    d.set_item("count_scale", r.count_scale)?;
    d.set_item("iterations", r.iterations)?;
    Ok(d)
}

/// Projection of the configured source onto ω+ (`plus`) or ω− (`minus`).
#[pyfunction]
#[pyo3(signature = (sign, cfg = None))]
fn marginal_projection(sign: &str, cfg: Option<&PyRunConfig>) -> PyResult<PySpectrum> {
    let (sign, axis) = match sign {
        "plus" => (Sign::Plus, SpectralAxis::OmegaPlus),
        "minus" => (Sign::Minus, SpectralAxis::OmegaMinus),
        other => {
            return Err(err(biphoton_wkt::WktError::InvalidValue(format!("sign must be plus or minus, got '{other}'"))))
        }
    };
    let jsa = pipeline::build_source(&cfg_or_default(cfg)).map_err(err)?;
    let spectrum = interference::marginal_projection(&jsa, sign).map_err(err)?;
    Ok(PySpectrum { spectrum, axis, negative_warning: false })
}

/// Runs the simulate/extract/compare round trip; returns `(passed, rows)`.
#[pyfunction]
#[pyo3(signature = (cfg = None))]
fn roundtrip<'py>(py: Python<'py>, cfg: Option<&PyRunConfig>) -> PyResult<(bool, Vec<Bound<'py, PyDict>>)> {
    let report = pipeline::roundtrip(&cfg_or_default(cfg)).map_err(err)?;
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("kind", r.kind.as_str())?;
            d.set_item("expected_fwhm_thz", r.expected_fwhm * 1e-12)?;
            d.set_item("extracted_fwhm_thz", r.extracted_fwhm * 1e-12)?;
            d.set_item("fwhm_error", r.fwhm_error)?;
            d.set_item("shape_error", r.shape_error)?;
            d.set_item("passed", r.passed)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((report.passed(), rows))
}

/// Frequency FWHM (THz) of a wavelength FWHM at a center wavelength.
#[pyfunction]
fn wavelength_bandwidth_to_thz(delta_lambda_nm: f64, center_nm: f64) -> PyResult<f64> {
    spectral::wavelength_bandwidth_to_frequency(delta_lambda_nm * 1e-9, center_nm * 1e-9)
        .map(|v| v * 1e-12)
        .map_err(err)
}

#[pymodule]
#[pyo3(name = "biphoton_wkt")]
fn biphoton_wkt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("WktError", m.py().get_type::<WktError>())?;
    m.add("UNITS", [Units::Probability.as_str(), Units::Counts.as_str()])?;
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyInterferogram>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyTsiGrid>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(extract_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fit_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_projection, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(wavelength_bandwidth_to_thz, m)?)?;
    Ok(())
}
