//! Spectral models: Gaussian one-photon spectra and two-photon joint spectral
//! amplitudes for a pulsed SPDC source under group-velocity matching, plus
//! separable sum/difference test models.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Result, WktError};
use crate::spectral::{
    hz_to_angular, normalize_jsa, normalize_spectrum, wavelength_to_angular, FrequencyGrid, JointSpectralAmplitude,
    Spectrum1D,
};

/// FWHM / σ for a Gaussian, `2√(2 ln 2)`.
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Positive root of `sinc²(x) = ½`.
pub const SINC_SQ_HALF_MAX_X: f64 = 1.391_557_378_251_51;

/// Relative level a Gaussian model must decay to at the grid edges.
pub const EDGE_LEVEL: f64 = 1e-6;

/// Number of marginal widths the grid must extend past the degenerate point.
pub const GRID_MARGIN_WIDTHS: f64 = 4.0;

/// `sin(x)/x`, with the removable singularity handled by its series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Transform-limited pump pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    /// Vacuum wavelength, m.
    pub center_wavelength: f64,
    /// Intensity FWHM duration, s.
    pub intensity_fwhm_duration: f64,
}

impl PumpSpec {
    pub fn new(center_wavelength: f64, intensity_fwhm_duration: f64) -> Result<Self> {
        if !(center_wavelength > 0.0) || !(intensity_fwhm_duration > 0.0) {
            return Err(WktError::InvalidValue(format!(
                "pump wavelength and duration must be positive (got {center_wavelength}, {intensity_fwhm_duration})"
            )));
        }
        Ok(Self { center_wavelength, intensity_fwhm_duration })
    }

    /// Pump angular frequency, rad/s.
    pub fn angular_frequency(&self) -> f64 {
        wavelength_to_angular(self.center_wavelength)
    }

    /// Degenerate signal/idler angular frequency `πc/λp`.
    pub fn degenerate_frequency(&self) -> f64 {
        0.5 * self.angular_frequency()
    }

    /// Spectral intensity FWHM (Hz) of a transform-limited Gaussian pulse:
    /// `Δν·Δt = 2 ln2 / π`.
    pub fn spectral_intensity_fwhm(&self) -> f64 {
        2.0 * LN_2 / PI / self.intensity_fwhm_duration
    }
}

/// Linearized phase matching: `Δk = gs·(ωs−ω0) + gi·(ωi−ω0)` where the
/// coefficients are group-delay mismatches per unit crystal length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchSpec {
    /// m.
    pub crystal_length: f64,
    /// s/m, relative to the pump.
    pub group_delay_signal: f64,
    /// s/m, relative to the pump.
    pub group_delay_idler: f64,
}

impl PhaseMatchSpec {
    pub fn new(crystal_length: f64, group_delay_signal: f64, group_delay_idler: f64) -> Result<Self> {
        if !(crystal_length > 0.0) || !group_delay_signal.is_finite() || !group_delay_idler.is_finite() {
            return Err(WktError::InvalidValue(format!(
                "crystal length must be positive and group delays finite (got {crystal_length}, {group_delay_signal}, {group_delay_idler})"
            )));
        }
        Ok(Self { crystal_length, group_delay_signal, group_delay_idler })
    }

    /// GVM-symmetric crystal: group delays `±mismatch/2`.
    pub fn gvm_symmetric(crystal_length: f64, mismatch: f64) -> Result<Self> {
        Self::new(crystal_length, 0.5 * mismatch, -0.5 * mismatch)
    }

    pub fn is_gvm_symmetric(&self) -> bool {
        self.group_delay_signal == -self.group_delay_idler
    }

    /// FWHM (rad/s) of the sinc² phase-matching intensity along ω− = ωs − ωi.
    pub fn difference_fwhm(&self) -> f64 {
        let slope = 0.25 * self.crystal_length * (self.group_delay_signal - self.group_delay_idler).abs();
        if slope == 0.0 {
            f64::INFINITY
        } else {
            2.0 * SINC_SQ_HALF_MAX_X / slope
        }
    }

    fn amplitude(&self, ds: f64, di: f64) -> f64 {
        let dk = self.group_delay_signal * ds + self.group_delay_idler * di;
        sinc(0.5 * dk * self.crystal_length)
    }
}

fn check_gaussian_edges(grid: &FrequencyGrid, center: f64, sigma: f64) -> Result<()> {
    let edge = (grid.start() - center).abs().min((grid.end() - center).abs());
    if grid.index_of(center).is_none() || (-edge * edge / (2.0 * sigma * sigma)).exp() > EDGE_LEVEL {
        return Err(WktError::GridTooNarrow(format!(
            "Gaussian of sigma {sigma:e} rad/s at {center:e} rad/s does not decay to {EDGE_LEVEL:e} of peak on the grid"
        )));
    }
    Ok(())
}

/// Normalized Gaussian intensity spectrum with the given ordinary-frequency
/// FWHM (Hz). Widths below one grid step collapse to a single-bin delta.
pub fn gaussian_spectrum(center: f64, intensity_fwhm: f64, grid: &FrequencyGrid) -> Result<Spectrum1D> {
    if !(intensity_fwhm > 0.0) || !intensity_fwhm.is_finite() {
        return Err(WktError::InvalidValue(format!("FWHM must be positive, got {intensity_fwhm}")));
    }
    let fwhm = hz_to_angular(intensity_fwhm);
    if fwhm < grid.step() {
        return Spectrum1D::delta(*grid, center);
    }
    let sigma = fwhm / GAUSSIAN_FWHM_PER_SIGMA;
    check_gaussian_edges(grid, center, sigma)?;
    let values = grid
        .points()
        .iter()
        .map(|w| {
            let d = w - center;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    normalize_spectrum(&Spectrum1D::new(*grid, values, center)?)
}

/// Intensity profile along one of the ω± axes of a separable model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisProfile {
    /// Gaussian intensity with the given FWHM (Hz).
    Gaussian { fwhm: f64 },
    /// sinc² intensity with the given FWHM (Hz).
    SincSquared { fwhm: f64 },
}

impl AxisProfile {
    fn fwhm_angular(&self) -> f64 {
        match *self {
            AxisProfile::Gaussian { fwhm } | AxisProfile::SincSquared { fwhm } => hz_to_angular(fwhm),
        }
    }

    /// Field amplitude (square root of the intensity profile) at offset `d` rad/s.
    fn amplitude(&self, d: f64) -> f64 {
        match *self {
            AxisProfile::Gaussian { .. } => {
                let sigma = self.fwhm_angular() / GAUSSIAN_FWHM_PER_SIGMA;
                (-d * d / (4.0 * sigma * sigma)).exp()
            }
            AxisProfile::SincSquared { .. } => sinc(2.0 * SINC_SQ_HALF_MAX_X * d / self.fwhm_angular()),
        }
    }
}

fn check_margin(grid: &FrequencyGrid, center: f64, width: f64) -> Result<()> {
    let need = GRID_MARGIN_WIDTHS * width;
    if center - grid.start() < need || grid.end() - center < need {
        return Err(WktError::GridTooNarrow(format!(
            "grid [{:e}, {:e}] rad/s must extend {need:e} rad/s either side of {center:e}",
            grid.start(),
            grid.end()
        )));
    }
    Ok(())
}

/// Separable model `|f|² = P(ω+ − center_sum)·M(ω−)`, exchange-symmetric
/// when `M` is even. Real and nonnegative amplitude for Gaussian factors.
pub fn sum_difference_jsa(
    plus: AxisProfile,
    minus: AxisProfile,
    center_sum: f64,
    grid: &FrequencyGrid,
) -> Result<JointSpectralAmplitude> {
    for p in [plus, minus] {
        let w = p.fwhm_angular();
        if !(w > 0.0) || !w.is_finite() {
            return Err(WktError::InvalidValue("profile widths must be positive".into()));
        }
    }
    let center = 0.5 * center_sum;
    // Gaussian factors must decay along the grid border; sinc² factors only
    // need the marginal-width margin.
    let marginal = 0.5 * plus.fwhm_angular().hypot(minus.fwhm_angular());
    check_margin(grid, center, marginal)?;
    let f = JointSpectralAmplitude::from_fn(*grid, *grid, |ws, wi| {
        Complex64::new(plus.amplitude(ws + wi - center_sum) * minus.amplitude(ws - wi), 0.0)
    })?;
    let peak = plus.amplitude(0.0) * minus.amplitude(0.0);
    let n = grid.count();
    let border_max = (0..n)
        .flat_map(|k| [f.get(0, k), f.get(n - 1, k), f.get(k, 0), f.get(k, n - 1)])
        .map(|a| a.norm_sqr())
        .fold(0.0, f64::max);
    let gaussian_only = matches!(plus, AxisProfile::Gaussian { .. }) && matches!(minus, AxisProfile::Gaussian { .. });
    if gaussian_only && border_max > EDGE_LEVEL * peak * peak {
        return Err(WktError::GridTooNarrow(format!(
            "|f|² reaches {:e} of peak on the grid border",
            border_max / (peak * peak)
        )));
    }
    normalize_jsa(&f)
}

/// Separable double-Gaussian test model with `|f|²` standard deviations
/// `sigma_plus`, `sigma_minus` (Hz) along ω+ and ω−.
pub fn double_gaussian_jsa(
    sigma_plus: f64,
    sigma_minus: f64,
    center_sum: f64,
    grid: &FrequencyGrid,
) -> Result<JointSpectralAmplitude> {
    if !(sigma_plus > 0.0) || !(sigma_minus > 0.0) {
        return Err(WktError::InvalidValue("sigmas must be positive".into()));
    }
    sum_difference_jsa(
        AxisProfile::Gaussian { fwhm: GAUSSIAN_FWHM_PER_SIGMA * sigma_plus },
        AxisProfile::Gaussian { fwhm: GAUSSIAN_FWHM_PER_SIGMA * sigma_minus },
        center_sum,
        grid,
    )
}

/// Biphoton amplitude `α(ωs+ωi)·sinc(ΔkL/2)` of a pulsed SPDC source.
///
/// The pump amplitude `α` is a transform-limited Gaussian at `2ω0` whose
/// intensity FWHM follows from the pulse duration; `Δk` is linear in the
/// detunings from the degenerate frequency `ω0`. Both grids are `grid`.
pub fn build_jsa(pump: &PumpSpec, pm: &PhaseMatchSpec, grid: &FrequencyGrid) -> Result<JointSpectralAmplitude> {
    let w0 = pump.degenerate_frequency();
    let pump_fwhm = hz_to_angular(pump.spectral_intensity_fwhm());
    let minus_fwhm = pm.difference_fwhm();
    if !minus_fwhm.is_finite() {
        return Err(WktError::GridTooNarrow(
            "equal signal/idler group delays leave the difference frequency unconfined".into(),
        ));
    }
    check_margin(grid, w0, 0.5 * pump_fwhm.hypot(minus_fwhm))?;
    let sigma = pump_fwhm / GAUSSIAN_FWHM_PER_SIGMA;
    let f = JointSpectralAmplitude::from_fn(*grid, *grid, |ws, wi| {
        let d = ws + wi - 2.0 * w0;
        let alpha = (-d * d / (4.0 * sigma * sigma)).exp();
        Complex64::new(alpha * pm.amplitude(ws - w0, wi - w0), 0.0)
    })?;
    normalize_jsa(&f)
}

/// Finds the GVM-symmetric group-delay mismatch (s/m) whose projected
/// difference-frequency spectrum has the requested FWHM (Hz), by bisection
/// on the measured projection.
pub fn calibrate_gvm_mismatch(
    pump: &PumpSpec,
    crystal_length: f64,
    target_minus_fwhm: f64,
    grid: &FrequencyGrid,
) -> Result<f64> {
    let measure = |mismatch: f64| -> Result<f64> {
        let pm = PhaseMatchSpec::gvm_symmetric(crystal_length, mismatch)?;
        let jsa = build_jsa(pump, &pm, grid)?;
        crate::interference::marginal_projection(&jsa, crate::interference::Sign::Minus)?.fwhm_hz()
    };
    // FWHM falls monotonically with the mismatch; bisect in log space.
    let mut lo = 1e-13_f64.ln();
    let mut hi = 1e-8_f64.ln();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        // Too-wide phase matching trips the grid margin check: move up.
        match measure(mid.exp()) {
            Ok(w) if w < target_minus_fwhm => hi = mid,
            Ok(_) | Err(WktError::GridTooNarrow(_)) => lo = mid,
            Err(e) => return Err(e),
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
