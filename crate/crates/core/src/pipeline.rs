//! End-to-end operations driven by a [`RunConfig`]: source construction,
//! simulation with visibility and count statistics, and the
//! simulate/extract/compare round trip.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Poisson};

use crate::config::{RunConfig, SourceModel};
use crate::error::{Result, WktError};
use crate::extract::{extract_spectrum_with, ExtractOptions};
use crate::interference::{biphoton_pattern_symmetric_with, marginal_projection, mzi_pattern, Sign};
use crate::models::{build_jsa, gaussian_spectrum, sum_difference_jsa};
use crate::spectral::{
    normalize_spectrum, wavelength_to_angular, FrequencyGrid, InterferenceKind, Interferogram, JointSpectralAmplitude,
    Spectrum1D, Units,
};

pub fn sign_for(kind: InterferenceKind) -> Option<Sign> {
    match kind {
        InterferenceKind::Mzi => None,
        InterferenceKind::Homi => Some(Sign::Minus),
        InterferenceKind::Nooni => Some(Sign::Plus),
    }
}

/// Signal/idler grid centered on the degenerate frequency.
pub fn source_grid(cfg: &RunConfig) -> Result<FrequencyGrid> {
    FrequencyGrid::centered(cfg.pump.degenerate_frequency(), cfg.freq_step, cfg.freq_count)
}

pub fn build_source(cfg: &RunConfig) -> Result<JointSpectralAmplitude> {
    let grid = source_grid(cfg)?;
    match cfg.source {
        SourceModel::Gvm => build_jsa(&cfg.pump, &cfg.phase_match, &grid),
        SourceModel::SumDifference => {
            sum_difference_jsa(cfg.sum_profile, cfg.difference_profile, cfg.pump.angular_frequency(), &grid)
        }
    }
}

/// Gaussian single-photon spectrum for MZI simulation.
pub fn mzi_spectrum(cfg: &RunConfig) -> Result<Spectrum1D> {
    let center = wavelength_to_angular(cfg.mzi_center_wavelength);
    let grid = FrequencyGrid::centered(center, cfg.freq_step, cfg.freq_count)?;
    gaussian_spectrum(center, cfg.mzi_fwhm, &grid)
}

/// Noise-free, unit-visibility pattern in probability units.
pub fn ideal_pattern(cfg: &RunConfig, kind: InterferenceKind) -> Result<Interferogram> {
    let delays = cfg.delays(kind);
    match sign_for(kind) {
        None => mzi_pattern(&mzi_spectrum(cfg)?, &delays),
        Some(sign) => biphoton_pattern_symmetric_with(&build_source(cfg)?, sign, &delays, &cfg.symmetry),
    }
}

/// Scales fringe contrast: `P → ½ + V(P − ½)`.
pub fn apply_visibility(ig: &Interferogram, visibility: f64) -> Result<Interferogram> {
    if ig.units() != Units::Probability {
        return Err(WktError::InvalidValue("visibility applies to probability data".into()));
    }
    let values = ig.values().iter().map(|p| (0.5 + visibility * (p - 0.5)).clamp(0.0, 1.0)).collect();
    Interferogram::new(*ig.delays(), values, ig.kind(), Units::Probability)
}

/// Converts probabilities to counts with expectation `peak·P/max P`, either
/// rounded or Poisson-sampled from `rng`.
pub fn to_counts(ig: &Interferogram, peak_counts: f64, rng: Option<&mut StdRng>) -> Result<Interferogram> {
    let max = ig.values().iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(WktError::InvalidValue("pattern is identically zero".into()));
    }
    let expected = ig.values().iter().map(|p| peak_counts * p / max);
    let values: Vec<f64> = match rng {
        None => expected.map(f64::round).collect(),
        Some(rng) => expected
            .map(|mu| if mu > 0.0 { Poisson::new(mu).map(|d| d.sample(rng)).unwrap_or(0.0) } else { 0.0 })
            .collect(),
    };
    Interferogram::new(*ig.delays(), values, ig.kind(), Units::Counts)
}

/// Simulates a pattern with the configured visibility, units and noise.
pub fn simulate(cfg: &RunConfig, kind: InterferenceKind) -> Result<Interferogram> {
    let ig = apply_visibility(&ideal_pattern(cfg, kind)?, cfg.visibility)?;
    match cfg.units {
        Units::Probability => Ok(ig),
        Units::Counts => {
            let mut rng = StdRng::seed_from_u64(cfg.seed);
            to_counts(&ig, cfg.peak_counts, cfg.poisson_noise.then_some(&mut rng))
        }
    }
}

/// Expected fringe frequency (rad/s): the MZI center or the pump.
pub fn carrier_hint(cfg: &RunConfig, kind: InterferenceKind) -> Option<f64> {
    match kind {
        InterferenceKind::Mzi => Some(wavelength_to_angular(cfg.mzi_center_wavelength)),
        InterferenceKind::Nooni => Some(cfg.pump.angular_frequency()),
        InterferenceKind::Homi => None,
    }
}

pub fn extract_options(cfg: &RunConfig, kind: InterferenceKind) -> ExtractOptions {
    ExtractOptions { carrier_hint: carrier_hint(cfg, kind), ..cfg.extract }
}

fn interpolate(grid: &FrequencyGrid, values: &[f64], w: f64) -> f64 {
    let x = (w - grid.start()) / grid.step();
    if x < 0.0 || x > (grid.count() - 1) as f64 {
        return 0.0;
    }
    let k = (x.floor() as usize).min(grid.count() - 2);
    let f = x - k as f64;
    values[k] * (1.0 - f) + values[k + 1] * f
}

/// Relative L2 distance between two spectra after normalizing both to unit
/// area and aligning their centroids, evaluated on the reference grid.
pub fn shape_error(reference: &Spectrum1D, candidate: &Spectrum1D) -> Result<f64> {
    let r = normalize_spectrum(reference)?;
    let c = normalize_spectrum(candidate)?;
    let shift = c.centroid() - r.centroid();
    let (mut num, mut den) = (0.0, 0.0);
    for (w, rv) in r.grid().points().iter().zip(r.values()) {
        let cv = interpolate(c.grid(), c.values(), w + shift);
        num += (cv - rv).powi(2);
        den += rv * rv;
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripRow {
    pub kind: InterferenceKind,
    /// FWHM of the forward-model spectrum, Hz.
    pub expected_fwhm: f64,
    /// FWHM of the extracted spectrum, Hz.
    pub extracted_fwhm: f64,
    pub fwhm_error: f64,
    pub shape_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub rows: Vec<RoundtripRow>,
    pub tolerance: f64,
    pub shape_tolerance: f64,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Simulates each interferometer from the configured source, extracts the
/// spectrum and compares it with the forward-model spectrum (F1 for MZI,
/// the ω∓ projection for HOMI and NOONI).
pub fn roundtrip(cfg: &RunConfig) -> Result<RoundtripReport> {
    let jsa = build_source(cfg)?;
    let mut rows = Vec::new();
    for kind in [InterferenceKind::Mzi, InterferenceKind::Homi, InterferenceKind::Nooni] {
        let delays = cfg.delays(kind);
        let (reference, pattern) = match sign_for(kind) {
            None => {
                let s = mzi_spectrum(cfg)?;
                let p = mzi_pattern(&s, &delays)?;
                (s, p)
            }
            Some(sign) => {
                (marginal_projection(&jsa, sign)?, biphoton_pattern_symmetric_with(&jsa, sign, &delays, &cfg.symmetry)?)
            }
        };
        let extracted = extract_spectrum_with(&pattern, &extract_options(cfg, kind))?.spectrum;
        let expected_fwhm = reference.fwhm_hz()?;
        let extracted_fwhm = extracted.fwhm_hz()?;
        let fwhm_error = (extracted_fwhm / expected_fwhm - 1.0).abs();
        let shape = shape_error(&reference, &extracted)?;
        rows.push(RoundtripRow {
            kind,
            expected_fwhm,
            extracted_fwhm,
            fwhm_error,
            shape_error: shape,
            passed: fwhm_error <= cfg.tolerance && shape <= cfg.shape_tolerance,
        });
    }
    Ok(RoundtripReport { rows, tolerance: cfg.tolerance, shape_tolerance: cfg.shape_tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{hz_to_angular, DelayGrid};

    #[test]
    fn default_roundtrip_passes() {
        let report = roundtrip(&RunConfig::defaults()).unwrap();
        assert_eq!(report.rows.len(), 3);
        for row in &report.rows {
            assert!(row.passed, "{row:?}");
        }
        let homi = &report.rows[1];
        assert!((homi.expected_fwhm / 0.22e12 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn zero_tolerance_fails() {
        let cfg = RunConfig::from_text("tolerance=0").unwrap();
        assert!(!roundtrip(&cfg).unwrap().passed());
    }

    #[test]
    fn skewed_crystal_is_rejected() {
        let cfg = RunConfig::from_text("group_delay_signal_ps_per_mm=0.3\ngroup_delay_idler_ps_per_mm=-0.1").unwrap();
        assert!(matches!(roundtrip(&cfg), Err(WktError::AsymmetricJsa(_))));
    }

    #[test]
    fn visibility_and_counts() {
        let d = DelayGrid::symmetric(1e-15, 5).unwrap();
        let ig =
            Interferogram::new(d, vec![0.5, 0.25, 0.0, 0.25, 0.5], Some(InterferenceKind::Homi), Units::Probability)
                .unwrap();
        let v = apply_visibility(&ig, 0.9).unwrap();
        assert!((v.values()[2] - 0.05).abs() < 1e-15);
        let c = to_counts(&v, 1000.0, None).unwrap();
        assert_eq!(c.values(), &[1000.0, 550.0, 100.0, 550.0, 1000.0]);
        let mut rng = StdRng::seed_from_u64(7);
        let a = to_counts(&v, 1000.0, Some(&mut rng)).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let b = to_counts(&v, 1000.0, Some(&mut rng)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_error_ignores_scale_and_offset() {
        let grid = FrequencyGrid::centered(hz_to_angular(10e12), hz_to_angular(0.01e12), 401).unwrap();
        let a = gaussian_spectrum(grid.at(200), 0.5e12, &grid).unwrap();
        let shifted = gaussian_spectrum(grid.at(230), 0.5e12, &grid).unwrap();
        let scaled = Spectrum1D::new(grid, shifted.values().iter().map(|v| 3.0 * v).collect(), 0.0).unwrap();
        assert!(shape_error(&a, &scaled).unwrap() < 1e-9);
        let wider = gaussian_spectrum(grid.at(200), 0.6e12, &grid).unwrap();
        assert!(shape_error(&a, &wider).unwrap() > 0.05);
    }

    #[test]
    fn simulated_homi_has_full_dip() {
        let ig = simulate(&RunConfig::defaults(), InterferenceKind::Homi).unwrap();
        assert!(ig.values().iter().cloned().fold(1.0, f64::min) <= 1e-6);
    }
}
