//! Flat `key=value` run configuration.
//!
//! A file overrides any subset of the embedded defaults. Unknown or repeated
//! keys are errors, and every value is checked when the file is loaded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Result, WktError};
use crate::extract::ExtractOptions;
use crate::interference::SymmetryTolerances;
use crate::models::{AxisProfile, PhaseMatchSpec, PumpSpec};
use crate::spectral::{hz_to_angular, DelayGrid, InterferenceKind, Units};

/// The embedded defaults, listing every key.
pub const DEFAULTS: &str = include_str!("../data/defaults.conf");

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceModel {
    /// Pulsed SPDC with linear phase mismatch.
    Gvm,
    /// Separable profiles along ω+ and ω−.
    SumDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: SourceModel,
    pub pump: PumpSpec,
    pub phase_match: PhaseMatchSpec,
    pub sum_profile: AxisProfile,
    pub difference_profile: AxisProfile,
    /// Hz.
    pub mzi_fwhm: f64,
    /// m.
    pub mzi_center_wavelength: f64,
    /// rad/s.
    pub freq_step: f64,
    pub freq_count: usize,
    pub mzi_delays: DelayGrid,
    pub homi_delays: DelayGrid,
    pub nooni_delays: DelayGrid,
    pub extract: ExtractOptions,
    pub symmetry: SymmetryTolerances,
    pub visibility: f64,
    pub units: Units,
    pub peak_counts: f64,
    pub poisson_noise: bool,
    pub seed: u64,
    pub tolerance: f64,
    pub shape_tolerance: f64,
    pub output: Option<PathBuf>,
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| WktError::Config(format!("line {}: expected key=value", n + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if seen.insert(k.clone(), n + 1).is_some() {
            return Err(WktError::Config(format!("line {}: repeated key '{k}'", n + 1)));
        }
        out.push((k, v));
    }
    Ok(out)
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn raw(&self, key: &str) -> &str {
        self.0.get(key).map(String::as_str).unwrap_or("")
    }

    fn num(&self, key: &str) -> Result<f64> {
        let v: f64 = self
            .raw(key)
            .parse()
            .map_err(|_| WktError::Config(format!("{key}: '{}' is not a number", self.raw(key))))?;
        if !v.is_finite() {
            return Err(WktError::Config(format!("{key}: must be finite")));
        }
        Ok(v)
    }

    fn positive(&self, key: &str) -> Result<f64> {
        let v = self.num(key)?;
        if v <= 0.0 {
            return Err(WktError::Config(format!("{key}: must be positive (got {v})")));
        }
        Ok(v)
    }

    fn nonnegative(&self, key: &str) -> Result<f64> {
        let v = self.num(key)?;
        if v < 0.0 {
            return Err(WktError::Config(format!("{key}: must not be negative (got {v})")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, min: usize) -> Result<usize> {
        let v: usize = self
            .raw(key)
            .parse()
            .map_err(|_| WktError::Config(format!("{key}: '{}' is not a count", self.raw(key))))?;
        if v < min {
            return Err(WktError::Config(format!("{key}: must be at least {min} (got {v})")));
        }
        Ok(v)
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(WktError::Config(format!("{key}: expected true or false, got '{other}'"))),
        }
    }

    fn profile(&self, kind_key: &str, fwhm_key: &str) -> Result<AxisProfile> {
        let fwhm = self.positive(fwhm_key)? * 1e12;
        match self.raw(kind_key) {
            "gaussian" => Ok(AxisProfile::Gaussian { fwhm }),
            "sinc2" => Ok(AxisProfile::SincSquared { fwhm }),
            other => Err(WktError::Config(format!("{kind_key}: expected gaussian or sinc2, got '{other}'"))),
        }
    }

    fn delays(&self, prefix: &str) -> Result<DelayGrid> {
        let step = self.positive(&format!("{prefix}_delay_step_fs"))? * 1e-15;
        let count = self.count(&format!("{prefix}_delay_count"), 16)?;
        DelayGrid::symmetric(step, count).map_err(|e| WktError::Config(format!("{prefix} delays: {e}")))
    }
}

fn wrap(key: &str) -> impl FnOnce(WktError) -> WktError + '_ {
    move |e| WktError::Config(format!("{key}: {e}"))
}

impl RunConfig {
    /// The embedded defaults.
    pub fn defaults() -> Self {
        Self::from_text("").expect("embedded defaults are valid")
    }

    /// Applies `text` on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_overrides(parse_pairs(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| WktError::Io(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Applies `key=value` overrides on top of the defaults.
    pub fn from_overrides(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut map: BTreeMap<String, String> = parse_pairs(DEFAULTS)?.into_iter().collect();
        for (k, v) in pairs {
            if !map.contains_key(&k) {
                return Err(WktError::Config(format!("unknown key '{k}'")));
            }
            map.insert(k, v);
        }
        Self::build(&Values(map))
    }

    /// Re-applies `key=value` overrides to the text of a configuration.
    pub fn with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs: BTreeMap<String, String> = parse_pairs(text)?.into_iter().collect();
        for (k, v) in overrides {
            pairs.insert(k.clone(), v.clone());
        }
        Self::from_overrides(pairs)
    }

    fn build(v: &Values) -> Result<Self> {
        let version = v.count("config_version", 0)?;
        if version != CONFIG_VERSION as usize {
            return Err(WktError::Config(format!(
                "config_version {version} is not supported (expected {CONFIG_VERSION})"
            )));
        }
        let source = match v.raw("source") {
            "gvm" => SourceModel::Gvm,
            "sum_difference" => SourceModel::SumDifference,
            other => return Err(WktError::Config(format!("source: expected gvm or sum_difference, got '{other}'"))),
        };
        let pump = PumpSpec::new(v.positive("pump_wavelength_nm")? * 1e-9, v.positive("pump_duration_fs")? * 1e-15)
            .map_err(wrap("pump"))?;
        let phase_match = PhaseMatchSpec::new(
            v.positive("crystal_length_mm")? * 1e-3,
            v.num("group_delay_signal_ps_per_mm")? * 1e-9,
            v.num("group_delay_idler_ps_per_mm")? * 1e-9,
        )
        .map_err(wrap("phase matching"))?;
        let visibility = v.nonnegative("visibility")?;
        if visibility > 1.0 {
            return Err(WktError::Config(format!("visibility: must not exceed 1 (got {visibility})")));
        }
        let units: Units = v.raw("units").parse().map_err(wrap("units"))?;
        let extract = ExtractOptions {
            zero_pad_factor: v.count("zero_pad_factor", 1)?,
            apodize: v.flag("apodize")?,
            edge_tolerance: v.positive("edge_tolerance")?,
            carrier_hint: None,
        };
        let symmetry = SymmetryTolerances {
            symmetry: v.nonnegative("symmetry_tolerance")?,
            realness: v.nonnegative("realness_tolerance")?,
        };
        let seed = v
            .raw("seed")
            .parse()
            .map_err(|_| WktError::Config(format!("seed: '{}' is not an unsigned integer", v.raw("seed"))))?;
        let output = match v.raw("output") {
            "" => None,
            p => Some(PathBuf::from(p)),
        };
        Ok(Self {
            source,
            pump,
            phase_match,
            sum_profile: v.profile("sum_profile", "sum_fwhm_thz")?,
            difference_profile: v.profile("difference_profile", "difference_fwhm_thz")?,
            mzi_fwhm: v.positive("mzi_fwhm_thz")? * 1e12,
            mzi_center_wavelength: v.positive("mzi_center_nm")? * 1e-9,
            freq_step: hz_to_angular(v.positive("freq_step_thz")? * 1e12),
            freq_count: v.count("freq_count", 3)?,
            mzi_delays: v.delays("mzi")?,
            homi_delays: v.delays("homi")?,
            nooni_delays: v.delays("nooni")?,
            extract,
            symmetry,
            visibility,
            units,
            peak_counts: v.positive("peak_counts")?,
            poisson_noise: v.flag("poisson_noise")?,
            seed,
            tolerance: v.nonnegative("tolerance")?,
            shape_tolerance: v.nonnegative("shape_tolerance")?,
            output,
        })
    }

    pub fn delays(&self, kind: InterferenceKind) -> DelayGrid {
        match kind {
            InterferenceKind::Mzi => self.mzi_delays,
            InterferenceKind::Homi => self.homi_delays,
            InterferenceKind::Nooni => self.nooni_delays,
        }
    }
}
