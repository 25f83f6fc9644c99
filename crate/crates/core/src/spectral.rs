//! Value types shared by every stage of the pipeline: uniform frequency and
//! delay grids, one-photon spectra, joint spectral amplitudes and
//! interferograms, plus normalization and symmetry diagnostics.
//!
//! Frequencies are angular (rad/s) and delays are in seconds throughout.
//! Conversion to THz / fs / nm happens only at the file boundary.
//!
//! All grids are finite windows over what is, physically, an infinite
//! integration range. Spectra are expected to have decayed to below `1e-6`
//! of their peak at the window edges; [`crate::models`] enforces that for the
//! spectra it builds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, WktError};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
pub fn hz_to_angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Vacuum wavelength (m) to angular frequency (rad/s).
pub fn wavelength_to_angular(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Converts a wavelength bandwidth to an ordinary-frequency bandwidth at the
/// given center wavelength, `c·Δλ/λ0²`.
pub fn wavelength_bandwidth_to_frequency(delta_lambda: f64, center_lambda: f64) -> Result<f64> {
    if !(center_lambda > 0.0) || !center_lambda.is_finite() {
        return Err(WktError::InvalidWavelength(format!("center wavelength must be positive, got {center_lambda}")));
    }
    if !(delta_lambda >= 0.0) || !delta_lambda.is_finite() {
        return Err(WktError::InvalidWavelength(format!("bandwidth must be non-negative, got {delta_lambda}")));
    }
    Ok(SPEED_OF_LIGHT * delta_lambda / (center_lambda * center_lambda))
}

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values.iter().sum();
            step * (inner - 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Per-sample trapezoidal weight (without the step factor).
#[inline]
pub(crate) fn trapezoid_weight(index: usize, count: usize) -> f64 {
    if index == 0 || index + 1 == count {
        0.5
    } else {
        1.0
    }
}

fn validate_axis(start: f64, step: f64, count: usize, what: &str) -> Result<()> {
    if !start.is_finite() || !step.is_finite() {
        return Err(WktError::InvalidGrid(format!("{what}: non-finite start/step")));
    }
    if step <= 0.0 {
        return Err(WktError::InvalidGrid(format!("{what}: step must be > 0, got {step}")));
    }
    if count < 2 {
        return Err(WktError::InvalidGrid(format!("{what}: count must be >= 2, got {count}")));
    }
    Ok(())
}

fn same_axis(a: (f64, f64, usize), b: (f64, f64, usize)) -> bool {
    let close = |x: f64, y: f64, scale: f64| (x - y).abs() <= 1e-12 * scale.max(x.abs()).max(y.abs());
    a.2 == b.2 && close(a.1, b.1, 0.0) && close(a.0, b.0, a.1)
}

/// Uniform grid of angular frequencies, `start + k·step` for `k` in `0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        validate_axis(start, step, count, "frequency grid")?;
        Ok(Self { start, step, count })
    }

    /// Grid of `count` points centered on `center`.
    pub fn centered(center: f64, step: f64, count: usize) -> Result<Self> {
        Self::new(center - 0.5 * (count as f64 - 1.0) * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.at(self.count - 1)
    }

    #[inline]
    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    /// Nearest grid index, or `None` outside the grid.
    pub fn index_of(&self, omega: f64) -> Option<usize> {
        let k = ((omega - self.start) / self.step).round();
        if k < 0.0 || k >= self.count as f64 {
            None
        } else {
            Some(k as usize)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.at(k)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }

    /// Equality up to floating-point noise in start/step.
    pub fn same_as(&self, other: &Self) -> bool {
        same_axis((self.start, self.step, self.count), (other.start, other.step, other.count))
    }
}

/// Uniform grid of delays (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl DelayGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        validate_axis(start, step, count, "delay grid")?;
        Ok(Self { start, step, count })
    }

    /// Grid symmetric about zero: `start = -(count-1)/2 · step`.
    pub fn symmetric(step: f64, count: usize) -> Result<Self> {
        Self::new(-0.5 * (count as f64 - 1.0) * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.at(self.count - 1)
    }

    #[inline]
    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.at(k)).collect()
    }

    /// True when the grid is mirror-symmetric about τ = 0 (to rounding).
    pub fn is_symmetric(&self) -> bool {
        (self.start + self.end()).abs() <= 1e-9 * self.step
    }
}

/// Nonnegative intensity over a frequency grid (houses F1 and F2±).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    grid: FrequencyGrid,
    values: Vec<f64>,
    center: f64,
}

impl Spectrum1D {
    pub fn new(grid: FrequencyGrid, values: Vec<f64>, center: f64) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(WktError::InvalidValue(format!(
                "spectrum has {} values for a grid of {}",
                values.len(),
                grid.count()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(WktError::InvalidValue(format!("spectrum value {v} is negative or non-finite")));
        }
        Ok(Self { grid, values, center })
    }

    /// A single-bin "delta" at the grid point nearest `omega`, holding mass
    /// `1/step` so that the trapezoidal integral is one.
    pub fn delta(grid: FrequencyGrid, omega: f64) -> Result<Self> {
        let k = grid
            .index_of(omega)
            .ok_or_else(|| WktError::GridTooNarrow(format!("delta at {omega} rad/s is off-grid")))?;
        let mut values = vec![0.0; grid.count()];
        let w = trapezoid_weight(k, grid.count());
        values[k] = 1.0 / (w * grid.step());
        Ok(Self { grid, values, center: grid.at(k) })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nominal carrier frequency (rad/s).
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.step())
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.integral() - 1.0).abs() <= tol
    }

    /// Full width at half maximum, rad/s.
    pub fn fwhm(&self) -> Result<f64> {
        crate::extract::fwhm(&self.grid.points(), &self.values)
    }

    /// Full width at half maximum, ordinary frequency (Hz).
    pub fn fwhm_hz(&self) -> Result<f64> {
        self.fwhm().map(angular_to_hz)
    }

    /// Intensity-weighted mean frequency (rad/s).
    pub fn centroid(&self) -> f64 {
        let (num, den) =
            self.values.iter().enumerate().fold((0.0, 0.0), |(n, d), (k, v)| (n + v * self.grid.at(k), d + v));
        if den > 0.0 {
            num / den
        } else {
            self.center
        }
    }

    pub(crate) fn into_parts(self) -> (FrequencyGrid, Vec<f64>, f64) {
        (self.grid, self.values, self.center)
    }
}

/// Rescales a spectrum to unit trapezoidal integral.
pub fn normalize_spectrum(s: &Spectrum1D) -> Result<Spectrum1D> {
    if s.values.iter().any(|v| *v < 0.0) {
        return Err(WktError::ZeroSpectrum);
    }
    let total = s.integral();
    if !(total > 0.0) || !total.is_finite() {
        return Err(WktError::ZeroSpectrum);
    }
    let values = s.values.iter().map(|v| v / total).collect();
    Ok(Spectrum1D { grid: s.grid, values, center: s.center })
}

/// Complex biphoton amplitude f(ωs, ωi) sampled on a 2D grid, stored
/// row-major with the signal index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectralAmplitude {
    grid_s: FrequencyGrid,
    grid_i: FrequencyGrid,
    amplitude: Vec<Complex64>,
}

impl JointSpectralAmplitude {
    pub fn new(grid_s: FrequencyGrid, grid_i: FrequencyGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid_s.count() * grid_i.count() {
            return Err(WktError::InvalidValue(format!(
                "amplitude has {} cells, grid has {}x{}",
                amplitude.len(),
                grid_s.count(),
                grid_i.count()
            )));
        }
        if amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(WktError::InvalidValue("non-finite amplitude".into()));
        }
        Ok(Self { grid_s, grid_i, amplitude })
    }

    /// Samples `f(ωs, ωi)` on the product grid.
    pub fn from_fn(
        grid_s: FrequencyGrid,
        grid_i: FrequencyGrid,
        mut f: impl FnMut(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut amplitude = Vec::with_capacity(grid_s.count() * grid_i.count());
        for j in 0..grid_s.count() {
            let ws = grid_s.at(j);
            for k in 0..grid_i.count() {
                amplitude.push(f(ws, grid_i.at(k)));
            }
        }
        Self::new(grid_s, grid_i, amplitude)
    }

    pub fn grid_s(&self) -> &FrequencyGrid {
        &self.grid_s
    }

    pub fn grid_i(&self) -> &FrequencyGrid {
        &self.grid_i
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.amplitude[j * self.grid_i.count() + k]
    }

    pub fn is_square(&self) -> bool {
        self.grid_s.same_as(&self.grid_i)
    }

    /// 2D trapezoidal integral of |f|².
    pub fn norm_sq(&self) -> f64 {
        let (ns, ni) = (self.grid_s.count(), self.grid_i.count());
        let mut total = 0.0;
        for j in 0..ns {
            let wj = trapezoid_weight(j, ns);
            let mut row = 0.0;
            for k in 0..ni {
                row += trapezoid_weight(k, ni) * self.amplitude[j * ni + k].norm_sqr();
            }
            total += wj * row;
        }
        total * self.grid_s.step() * self.grid_i.step()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    /// Largest |Im f| relative to the largest |f|.
    pub fn imaginary_fraction(&self) -> f64 {
        let max_abs = self.amplitude.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if max_abs == 0.0 {
            return 0.0;
        }
        self.amplitude.iter().map(|a| a.im.abs()).fold(0.0, f64::max) / max_abs
    }

    /// Exchange of signal and idler: the transposed amplitude array.
    pub fn swap(&self) -> Self {
        let (ns, ni) = (self.grid_s.count(), self.grid_i.count());
        let mut amplitude = Vec::with_capacity(ns * ni);
        for k in 0..ni {
            for j in 0..ns {
                amplitude.push(self.amplitude[j * ni + k]);
            }
        }
        Self { grid_s: self.grid_i, grid_i: self.grid_s, amplitude }
    }

    /// |f|² per cell, row-major.
    pub fn intensity(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Rescales a JSA so that ∬|f|² dωs dωi = 1.
pub fn normalize_jsa(f: &JointSpectralAmplitude) -> Result<JointSpectralAmplitude> {
    let n = f.norm_sq();
    if !(n > 0.0) || !n.is_finite() {
        return Err(WktError::ZeroSpectrum);
    }
    let scale = 1.0 / n.sqrt();
    Ok(JointSpectralAmplitude {
        grid_s: f.grid_s,
        grid_i: f.grid_i,
        amplitude: f.amplitude.iter().map(|a| a * scale).collect(),
    })
}

/// ‖f(ωs,ωi) − f(ωi,ωs)‖₂ / ‖f‖₂ over the grid cells.
pub fn exchange_symmetry_residual(f: &JointSpectralAmplitude) -> Result<f64> {
    if !f.is_square() {
        return Err(WktError::GridMismatch("exchange symmetry needs grid_s == grid_i".into()));
    }
    let n = f.grid_s.count();
    let mut diff = 0.0;
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            let a = f.amplitude[j * n + k];
            diff += (a - f.amplitude[k * n + j]).norm_sqr();
            total += a.norm_sqr();
        }
    }
    if total == 0.0 {
        return Err(WktError::ZeroSpectrum);
    }
    Ok((diff / total).sqrt())
}

/// Which interferometer produced a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceKind {
    Mzi,
    Homi,
    Nooni,
}

impl InterferenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InterferenceKind::Mzi => "mzi",
            InterferenceKind::Homi => "homi",
            InterferenceKind::Nooni => "nooni",
        }
    }

    /// True for patterns carrying an optical-frequency fringe.
    pub fn has_carrier(&self) -> bool {
        !matches!(self, InterferenceKind::Homi)
    }

    /// Sign in `P = ½[1 ± Re G]`.
    pub fn fringe_sign(&self) -> f64 {
        match self {
            InterferenceKind::Homi => -1.0,
            _ => 1.0,
        }
    }

    /// Frequency axis recovered when Fourier transforming this pattern.
    pub fn spectral_axis(&self) -> SpectralAxis {
        match self {
            InterferenceKind::Mzi => SpectralAxis::Omega,
            InterferenceKind::Homi => SpectralAxis::OmegaMinus,
            InterferenceKind::Nooni => SpectralAxis::OmegaPlus,
        }
    }
}

impl fmt::Display for InterferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterferenceKind {
    type Err = WktError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mzi" => Ok(Self::Mzi),
            "homi" => Ok(Self::Homi),
            "nooni" => Ok(Self::Nooni),
            other => Err(WktError::Parse(format!("unknown interferogram kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralAxis {
    Omega,
    OmegaPlus,
    OmegaMinus,
}

impl SpectralAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralAxis::Omega => "omega",
            SpectralAxis::OmegaPlus => "omega_plus",
            SpectralAxis::OmegaMinus => "omega_minus",
        }
    }
}

impl FromStr for SpectralAxis {
    type Err = WktError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "omega" => Ok(Self::Omega),
            "omega_plus" => Ok(Self::OmegaPlus),
            "omega_minus" => Ok(Self::OmegaMinus),
            other => Err(WktError::Parse(format!("unknown spectral axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Probability,
    Counts,
}

impl Units {
    pub fn as_str(&self) -> &'static str {
        match self {
            Units::Probability => "probability",
            Units::Counts => "counts",
        }
    }
}

impl FromStr for Units {
    type Err = WktError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "probability" => Ok(Self::Probability),
            "counts" => Ok(Self::Counts),
            other => Err(WktError::Parse(format!("unknown units '{other}'"))),
        }
    }
}

/// Detection probability (or coincidence counts) over a delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    delays: DelayGrid,
    values: Vec<f64>,
    kind: Option<InterferenceKind>,
    units: Units,
}

/// Slack allowed on probability bounds.
pub const PROBABILITY_SLACK: f64 = 1e-9;

impl Interferogram {
    pub fn new(delays: DelayGrid, values: Vec<f64>, kind: Option<InterferenceKind>, units: Units) -> Result<Self> {
        if values.len() != delays.count() {
            return Err(WktError::InvalidValue(format!(
                "interferogram has {} values for {} delays",
                values.len(),
                delays.count()
            )));
        }
        for v in &values {
            let ok = match units {
                Units::Probability => v.is_finite() && *v >= -PROBABILITY_SLACK && *v <= 1.0 + PROBABILITY_SLACK,
                Units::Counts => v.is_finite() && *v >= 0.0 && v.fract() == 0.0,
            };
            if !ok {
                return Err(WktError::InvalidValue(format!("value {v} not valid for {} units", units.as_str())));
            }
        }
        Ok(Self { delays, values, kind, units })
    }

    pub fn delays(&self) -> &DelayGrid {
        &self.delays
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> Option<InterferenceKind> {
        self.kind
    }

    pub fn units(&self) -> Units {
        self.units
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn thz(x: f64) -> f64 {
        hz_to_angular(x * 1e12)
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(FrequencyGrid::new(0.0, 0.0, 10).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        assert!(DelayGrid::new(0.0, -1.0, 4).is_err());
        let d = DelayGrid::symmetric(1e-15, 5).unwrap();
        assert_eq!(d.start(), -2e-15);
        assert!(d.is_symmetric());
    }

    #[test]
    fn uniform_spectrum_normalizes() {
        let grid = FrequencyGrid::new(0.0, thz(0.5), 4).unwrap();
        let s = Spectrum1D::new(grid, vec![1.0; 4], 0.0).unwrap();
        let n = normalize_spectrum(&s).unwrap();
        let expected = 1.0 / (3.0 * grid.step());
        for v in n.values() {
            assert_relative_eq!(*v, expected, max_relative = 1e-14);
        }
        assert_relative_eq!(n.integral(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn single_bin_scales_to_inverse_step() {
        let grid = FrequencyGrid::new(0.0, thz(0.1), 9).unwrap();
        let mut v = vec![0.0; 9];
        v[4] = 3.7;
        let n = normalize_spectrum(&Spectrum1D::new(grid, v, 0.0).unwrap()).unwrap();
        assert_relative_eq!(n.values()[4], 1.0 / grid.step(), max_relative = 1e-14);
        let d = Spectrum1D::delta(grid, grid.at(4)).unwrap();
        for (a, b) in d.values().iter().zip(n.values()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_spectrum_is_rejected() {
        let grid = FrequencyGrid::new(0.0, 1.0, 4).unwrap();
        let s = Spectrum1D::new(grid, vec![0.0; 4], 0.0).unwrap();
        assert_eq!(normalize_spectrum(&s), Err(WktError::ZeroSpectrum));
        assert!(Spectrum1D::new(grid, vec![1.0, -1.0, 0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn gaussian_normalization_keeps_fwhm() {
        let sigma = thz(1.0);
        let grid = FrequencyGrid::centered(0.0, sigma / 40.0, 801).unwrap();
        let raw: Vec<f64> = grid.points().iter().map(|w| 7.0 * (-w * w / (2.0 * sigma * sigma)).exp()).collect();
        let s = Spectrum1D::new(grid, raw, 0.0).unwrap();
        let n = normalize_spectrum(&s).unwrap();
        assert!((n.integral() - 1.0).abs() < 1e-9);
        assert_relative_eq!(n.fwhm_hz().unwrap(), s.fwhm_hz().unwrap(), max_relative = 1e-12);
        assert_relative_eq!(n.fwhm_hz().unwrap() / 1e12, 2.3548, max_relative = 5e-3);
    }

    fn separable_jsa(n: usize) -> JointSpectralAmplitude {
        let grid = FrequencyGrid::centered(0.0, 0.1, n).unwrap();
        JointSpectralAmplitude::from_fn(grid, grid, |a, b| Complex64::new((-a * a).exp() * (-b * b).exp(), 0.0))
            .unwrap()
    }

    #[test]
    fn separable_jsa_normalizes_and_is_symmetric() {
        let f = normalize_jsa(&separable_jsa(41)).unwrap();
        assert!((f.norm_sq() - 1.0).abs() < 1e-12);
        assert_eq!(exchange_symmetry_residual(&f).unwrap(), 0.0);
    }

    #[test]
    fn single_cell_jsa() {
        let grid = FrequencyGrid::new(0.0, 0.5, 6).unwrap();
        let mut amp = vec![Complex64::new(0.0, 0.0); 36];
        amp[2 * 6 + 4] = Complex64::new(0.3, 0.4);
        let f = normalize_jsa(&JointSpectralAmplitude::new(grid, grid, amp).unwrap()).unwrap();
        assert!((f.norm_sq() - 1.0).abs() < 1e-12);
        for (idx, a) in f.amplitude().iter().enumerate() {
            if idx != 16 {
                assert_eq!(*a, Complex64::new(0.0, 0.0));
            }
        }
        // one off-diagonal cell: f - f^T has two cells of equal magnitude
        assert_relative_eq!(exchange_symmetry_residual(&f).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn residual_needs_square_grid() {
        let gs = FrequencyGrid::new(0.0, 1.0, 3).unwrap();
        let gi = FrequencyGrid::new(0.0, 1.0, 4).unwrap();
        let f = JointSpectralAmplitude::new(gs, gi, vec![Complex64::new(1.0, 0.0); 12]).unwrap();
        assert!(matches!(exchange_symmetry_residual(&f), Err(WktError::GridMismatch(_))));
        assert!(matches!(
            normalize_jsa(&JointSpectralAmplitude::new(gs, gi, vec![Complex64::new(0.0, 0.0); 12]).unwrap()),
            Err(WktError::ZeroSpectrum)
        ));
    }

    #[test]
    fn bandwidth_conversions_at_degeneracy() {
        let c = 1584e-9;
        let b = wavelength_bandwidth_to_frequency(18.2e-9, c).unwrap();
        assert!((b / 2.18e12 - 1.0).abs() < 0.01);
        let b = wavelength_bandwidth_to_frequency(1.9e-9, c).unwrap();
        assert!((b / 0.227e12 - 1.0).abs() < 0.01);
        assert_eq!(wavelength_bandwidth_to_frequency(0.0, c).unwrap(), 0.0);
        assert!(wavelength_bandwidth_to_frequency(1e-9, 0.0).is_err());
        assert!(wavelength_bandwidth_to_frequency(-1e-9, c).is_err());
    }

    #[test]
    fn interferogram_validates_units() {
        let d = DelayGrid::symmetric(1.0, 3).unwrap();
        assert!(Interferogram::new(d, vec![0.0, 0.5, 1.2], None, Units::Probability).is_err());
        assert!(Interferogram::new(d, vec![0.0, 5.5, 1.0], None, Units::Counts).is_err());
        assert!(Interferogram::new(d, vec![0.0, 5.0, 1.0], None, Units::Counts).is_ok());
    }

    fn random_jsa(n: usize, seed: &[f64]) -> JointSpectralAmplitude {
        let grid = FrequencyGrid::new(1.0, 0.25, n).unwrap();
        let amp = (0..n * n)
            .map(|i| Complex64::new(seed[i % seed.len()] * ((i * 7 % 13) as f64 - 6.0), seed[(i + 3) % seed.len()]))
            .collect();
        JointSpectralAmplitude::new(grid, grid, amp).unwrap()
    }

    proptest! {
        #[test]
        fn grid_index_round_trip(start in -1e15f64..1e15, step in 1e9f64..1e13, count in 2usize..5000) {
            let g = FrequencyGrid::new(start, step, count).unwrap();
            for k in [0, count / 3, count / 2, count - 1] {
                prop_assert_eq!(g.index_of(g.at(k)), Some(k));
            }
        }

        #[test]
        fn normalization_is_idempotent(seed in proptest::collection::vec(-1.0f64..1.0, 5..20)) {
            prop_assume!(seed.iter().any(|v| v.abs() > 1e-3));
            let f = random_jsa(32, &seed);
            let once = normalize_jsa(&f).unwrap();
            let twice = normalize_jsa(&once).unwrap();
            for (a, b) in once.amplitude().iter().zip(twice.amplitude()) {
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
            }
            let grid = FrequencyGrid::new(0.0, 0.3, seed.len()).unwrap();
            let s = Spectrum1D::new(grid, seed.iter().map(|v| v.abs() + 0.01).collect(), 0.0).unwrap();
            let s1 = normalize_spectrum(&s).unwrap();
            let s2 = normalize_spectrum(&s1).unwrap();
            for (a, b) in s1.values().iter().zip(s2.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs());
            }
        }

        #[test]
        fn residual_is_swap_invariant(seed in proptest::collection::vec(-1.0f64..1.0, 5..20)) {
            prop_assume!(seed.iter().any(|v| v.abs() > 1e-3));
            let f = random_jsa(12, &seed);
            let a = exchange_symmetry_residual(&f).unwrap();
            let b = exchange_symmetry_residual(&f.swap()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn bandwidth_conversion_is_linear(dl in 0.0f64..1e-7, a in 0.0f64..100.0) {
            let l0 = 1584e-9;
            let lhs = wavelength_bandwidth_to_frequency(a * dl, l0).unwrap();
            let rhs = a * wavelength_bandwidth_to_frequency(dl, l0).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }
}
