//! Inverse pipeline: detrend interferograms, recover spectra by Fourier
//! transform, measure envelopes and widths.

pub mod fit;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, WktError};
use crate::spectral::{DelayGrid, FrequencyGrid, InterferenceKind, Interferogram, SpectralAxis, Spectrum1D, Units};

pub use fit::{fit_envelope, fit_envelope_with, EnvelopeModel, FitOptions, FitReport};

/// Fraction of samples at each end averaged to estimate the count baseline.
const BASELINE_FRACTION: f64 = 0.1;

/// Negative spectral values below this fraction of the peak are treated as
/// noise and clipped silently.
pub const NEGATIVE_CLIP_FRACTION: f64 = 0.01;

/// Signed fringe signal `s(τ) = Re G(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeSignal {
    pub delays: DelayGrid,
    pub values: Vec<f64>,
    pub kind: InterferenceKind,
}

/// Mean of the outer samples at both ends.
pub(crate) fn edge_baseline(values: &[f64]) -> f64 {
    let n = values.len();
    let k = ((n as f64 * BASELINE_FRACTION) as usize).max(1).min(n);
    let sum: f64 = values[..k].iter().chain(&values[n - k..]).sum();
    sum / (2 * k) as f64
}

/// Converts detection probabilities (or counts) to `s(τ) = Re G(τ)`.
///
/// Counts are first scaled so that the baseline, the mean of the outer tenth
/// of the window on each side, sits at ½.
pub fn detrend(ig: &Interferogram) -> Result<FringeSignal> {
    let kind = ig.kind().ok_or(WktError::UnknownKind)?;
    let sign = kind.fringe_sign();
    let values = match ig.units() {
        Units::Probability => ig.values().iter().map(|p| sign * (2.0 * p - 1.0)).collect(),
        Units::Counts => {
            let base = edge_baseline(ig.values());
            if !(base > 0.0) {
                return Err(WktError::InvalidValue("count baseline is zero".into()));
            }
            ig.values().iter().map(|c| sign * (c / base - 1.0)).collect()
        }
    };
    Ok(FringeSignal { delays: *ig.delays(), values, kind })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Transform length is the next power of two of `count·zero_pad_factor`.
    pub zero_pad_factor: usize,
    /// Apply a Hann window before transforming.
    pub apodize: bool,
    /// Maximum `|s|` in the edge samples relative to the peak.
    pub edge_tolerance: f64,
    /// Highest expected angular frequency, used to reject undersampled input.
    pub carrier_hint: Option<f64>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { zero_pad_factor: 8, apodize: false, edge_tolerance: 1e-3, carrier_hint: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedSpectrum {
    /// Nonnegative spectral density per rad/s; `center` is the dominant bin.
    pub spectrum: Spectrum1D,
    pub axis: SpectralAxis,
    /// Set when a clipped negative value exceeded 1% of the peak.
    pub negative_warning: bool,
}

fn edge_count(n: usize) -> usize {
    (n / 50).max(4).min(n / 2)
}

fn check_edges(signal: &FringeSignal, tol: f64) -> Result<f64> {
    let v = &signal.values;
    let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return Err(WktError::ZeroSpectrum);
    }
    let k = edge_count(v.len());
    let edge = v[..k].iter().chain(&v[v.len() - k..]).fold(0.0_f64, |m, x| m.max(x.abs()));
    if edge > tol * peak {
        return Err(WktError::WindowTooShort(format!("edge amplitude {:.3e} of peak exceeds {tol:e}", edge / peak)));
    }
    Ok(peak)
}

fn hann(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n).map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / (n - 1) as f64).cos())).collect()
}

/// Raw discretized transform `(Δτ/2π)·Re Σ s(τn) e^{iωτn}` on the one-sided
/// (carrier kinds, doubled) or two-sided (HOMI) axis, before clipping.
pub fn fringe_transform(signal: &FringeSignal, opts: &ExtractOptions) -> Result<(FrequencyGrid, Vec<f64>)> {
    let n = signal.values.len();
    if n < 8 {
        return Err(WktError::TooFewSamples { need: 8, got: n });
    }
    let m = (n * opts.zero_pad_factor.max(1)).next_power_of_two();
    let window = if opts.apodize { hann(n) } else { vec![1.0; n] };
    let mut buf: Vec<Complex64> = signal
        .values
        .iter()
        .zip(&window)
        .map(|(s, w)| Complex64::new(s * w, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(m)
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    let dt = signal.delays.step();
    let t0 = signal.delays.start();
    let dw = 2.0 * PI / (m as f64 * dt);
    let scale = dt / (2.0 * PI);
    let value = |k: i64| -> f64 {
        let idx = k.rem_euclid(m as i64) as usize;
        let w = k as f64 * dw;
        (buf[idx] * Complex64::from_polar(1.0, w * t0)).re * scale
    };
    if signal.kind.has_carrier() {
        let count = m / 2 + 1;
        let values = (0..count as i64).map(|k| 2.0 * value(k)).collect();
        Ok((FrequencyGrid::new(0.0, dw, count)?, values))
    } else {
        let half = (m / 2) as i64;
        let values = (-half..half).map(value).collect();
        Ok((FrequencyGrid::new(-(half as f64) * dw, dw, m)?, values))
    }
}

/// Recovers the spectrum whose Fourier transform produced the fringes:
/// F1 for MZI, F2+ for NOONI, F2− for HOMI.
pub fn extract_spectrum(ig: &Interferogram) -> Result<ExtractedSpectrum> {
    extract_spectrum_with(ig, &ExtractOptions::default())
}

pub fn extract_spectrum_with(ig: &Interferogram, opts: &ExtractOptions) -> Result<ExtractedSpectrum> {
    let signal = detrend(ig)?;
    extract_from_signal(&signal, opts)
}

pub fn extract_from_signal(signal: &FringeSignal, opts: &ExtractOptions) -> Result<ExtractedSpectrum> {
    let step = signal.delays.step();
    if let Some(hint) = opts.carrier_hint {
        let limit = PI / hint;
        if step > limit {
            return Err(WktError::NyquistViolation { step, limit });
        }
    }
    check_edges(signal, opts.edge_tolerance)?;
    let (grid, raw) = fringe_transform(signal, opts)?;

    let (peak_idx, peak) =
        raw.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    if !(peak > 0.0) {
        return Err(WktError::ZeroSpectrum);
    }
    let nyquist = PI / step;
    if grid.at(peak_idx).abs() > 0.9 * nyquist {
        return Err(WktError::NyquistViolation { step, limit: PI / grid.at(peak_idx).abs() });
    }
    let mut negative_warning = false;
    let values = raw
        .into_iter()
        .map(|v| {
            if v < 0.0 {
                if -v > NEGATIVE_CLIP_FRACTION * peak {
                    negative_warning = true;
                }
                0.0
            } else {
                v
            }
        })
        .collect();
    let spectrum = Spectrum1D::new(grid, values, grid.at(peak_idx))?;
    Ok(ExtractedSpectrum { spectrum, axis: signal.kind.spectral_axis(), negative_warning })
}

/// Analytic signal `s + i·H[s]` by the one-sided spectrum method. The real
/// part is the input itself.
pub fn analytic_signal(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = values
        .iter()
        .map(|v| Complex64::new(*v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, x) in buf.iter_mut().enumerate() {
        if k == 0 || k == m / 2 {
            continue;
        }
        *x *= if k < m / 2 { 2.0 } else { 0.0 };
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    values.iter().zip(&buf).map(|(v, z)| Complex64::new(*v, z.im / m as f64)).collect()
}

/// Envelope of a fringe signal: analytic-signal magnitude for carrier kinds,
/// `|s|` for carrier-free HOMI signals.
pub fn envelope(signal: &FringeSignal) -> Result<Vec<f64>> {
    let n = signal.values.len();
    if n < 8 {
        return Err(WktError::TooFewSamples { need: 8, got: n });
    }
    if signal.kind.has_carrier() {
        Ok(analytic_signal(&signal.values).iter().map(|z| z.norm()).collect())
    } else {
        Ok(signal.values.iter().map(|v| v.abs()).collect())
    }
}

/// Full width at half maximum by linear interpolation, walking outward from
/// the first global maximum.
pub fn fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(WktError::InvalidValue("fwhm: x and y lengths differ".into()));
    }
    let (imax, ymax) =
        y.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
    if !(ymax > 0.0) {
        return Err(WktError::NoCrossing("left"));
    }
    let half = 0.5 * ymax;
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let left = (0..imax).rev().find(|&i| y[i] <= half).map(|i| cross(i, i + 1)).ok_or(WktError::NoCrossing("left"))?;
    let right =
        (imax + 1..y.len()).find(|&i| y[i] <= half).map(|i| cross(i - 1, i)).ok_or(WktError::NoCrossing("right"))?;
    Ok((right - left).abs())
}
