//! Forward simulation of MZI, HOMI and NOONI patterns.
//!
//! Two routes are provided for the two-photon patterns. The fast route
//! projects |f|² onto the sum or difference axis and takes a 1D cosine
//! transform; it is only valid for real, exchange-symmetric amplitudes. The
//! general route evaluates the full two-photon detection probability by 2D
//! quadrature with no symmetry assumption and serves as its oracle.
//!
//! Every delay point is evaluated independently with a fixed summation
//! order, so results do not depend on the rayon schedule.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WktError};
use crate::spectral::{
    exchange_symmetry_residual, trapezoid_weight, DelayGrid, FrequencyGrid, InterferenceKind, Interferogram,
    JointSpectralAmplitude, Spectrum1D, Units,
};

/// Tolerance on `|∫F − 1|` for spectra passed to the simulators.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// `+` selects the sum frequency (NOONI), `−` the difference frequency (HOMI).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn kind(&self) -> InterferenceKind {
        match self {
            Sign::Plus => InterferenceKind::Nooni,
            Sign::Minus => InterferenceKind::Homi,
        }
    }
}

/// Acceptance thresholds for the symmetric fast path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryTolerances {
    /// Maximum exchange-symmetry residual.
    pub symmetry: f64,
    /// Maximum `max|Im f| / max|f|`.
    pub realness: f64,
}

impl Default for SymmetryTolerances {
    fn default() -> Self {
        Self { symmetry: 1e-6, realness: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationOrder {
    G1,
    G2Plus,
    G2Minus,
}

/// Complex correlation function sampled over delays.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub delays: DelayGrid,
    pub values: Vec<Complex64>,
    pub order: CorrelationOrder,
}

fn check_nyquist(delays: &DelayGrid, omega_max: f64) -> Result<()> {
    if omega_max <= 0.0 {
        return Ok(());
    }
    let limit = std::f64::consts::PI / omega_max;
    if delays.step() > limit {
        return Err(WktError::NyquistViolation { step: delays.step(), limit });
    }
    Ok(())
}

fn check_normalized_spectrum(s: &Spectrum1D) -> Result<()> {
    let total = s.integral();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(WktError::NotNormalized(total));
    }
    Ok(())
}

fn check_normalized_jsa(f: &JointSpectralAmplitude) -> Result<()> {
    let n = f.norm_sq();
    if (n - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(WktError::NotNormalized(n));
    }
    Ok(())
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Bin masses and frequencies of a spectrum: `∫F e^{-iωτ}` becomes
/// `Σ mass·e^{-iωτ}`.
fn trapezoid_masses(s: &Spectrum1D) -> Vec<(f64, f64)> {
    let g = s.grid();
    s.values().iter().enumerate().map(|(k, v)| (g.at(k), v * trapezoid_weight(k, g.count()) * g.step())).collect()
}

fn fourier_sum(masses: &[(f64, f64)], tau: f64) -> Complex64 {
    masses.iter().fold(Complex64::new(0.0, 0.0), |acc, (w, m)| acc + Complex64::from_polar(*m, -w * tau))
}

/// First-order correlation `G1(τ) = ∫F1(ω) e^{-iωτ} dω`.
pub fn g1(spectrum: &Spectrum1D, delays: &DelayGrid) -> Result<CorrelationTrace> {
    check_normalized_spectrum(spectrum)?;
    let masses = trapezoid_masses(spectrum);
    let values = delays.points().par_iter().map(|&t| fourier_sum(&masses, t)).collect();
    Ok(CorrelationTrace { delays: *delays, values, order: CorrelationOrder::G1 })
}

/// One-photon MZI detection probability `P1(τ) = ½[1 + Re G1(τ)]`.
pub fn mzi_pattern(spectrum: &Spectrum1D, delays: &DelayGrid) -> Result<Interferogram> {
    check_normalized_spectrum(spectrum)?;
    check_nyquist(delays, spectrum.grid().max_abs())?;
    let trace = g1(spectrum, delays)?;
    let values = trace.values.iter().map(|g| clamp_probability(0.5 * (1.0 + g.re))).collect();
    Interferogram::new(*delays, values, Some(InterferenceKind::Mzi), Units::Probability)
}

/// Projection of |f|² onto the ω± axis, `F2±(ω±) = ½∫|f|² dω∓`.
///
/// On a grid with common step `h` the line of constant ω− (or ω+) visits
/// cells `2h` apart in the other coordinate, so the ½ Jacobian and that
/// spacing cancel: each ω± bin of width `h` receives the trapezoid-weighted
/// cell mass `|f|²·h²`, giving density `h·Σ|f|²`. Signal index `j` and idler
/// index `k` map to bin `j − k + (n − 1)` (minus) or `j + k` (plus).
pub fn marginal_projection(jsa: &JointSpectralAmplitude, sign: Sign) -> Result<Spectrum1D> {
    let (gs, gi) = (jsa.grid_s(), jsa.grid_i());
    if gs.count() != gi.count() || (gs.step() - gi.step()).abs() > 1e-12 * gs.step() {
        return Err(WktError::GridMismatch("projection needs equal signal/idler step and count".into()));
    }
    check_normalized_jsa(jsa)?;
    let n = gs.count();
    let h = gs.step();
    let bins = 2 * n - 1;
    let mut mass = vec![0.0; bins];
    for j in 0..n {
        let wj = trapezoid_weight(j, n);
        for k in 0..n {
            let m = match sign {
                Sign::Plus => j + k,
                Sign::Minus => j + (n - 1) - k,
            };
            mass[m] += wj * trapezoid_weight(k, n) * jsa.get(j, k).norm_sqr();
        }
    }
    let start = match sign {
        Sign::Plus => gs.start() + gi.start(),
        Sign::Minus => gs.start() - gi.start() - (n - 1) as f64 * h,
    };
    let grid = FrequencyGrid::new(start, h, bins)?;
    let values: Vec<f64> = mass.into_iter().map(|m| m * h).collect();
    let provisional = Spectrum1D::new(grid, values, 0.0)?;
    let center = provisional.centroid();
    let (grid, values, _) = provisional.into_parts();
    Spectrum1D::new(grid, values, center)
}

fn check_symmetric_real(jsa: &JointSpectralAmplitude, tol: &SymmetryTolerances) -> Result<()> {
    check_normalized_jsa(jsa)?;
    let residual = exchange_symmetry_residual(jsa)?;
    if residual > tol.symmetry {
        return Err(WktError::AsymmetricJsa(residual));
    }
    let imag = jsa.imaginary_fraction();
    if imag > tol.realness {
        return Err(WktError::ComplexJsa(imag));
    }
    Ok(())
}

/// Bin masses of a projection; summing them reproduces the 2D quadrature.
fn projection_masses(projection: &Spectrum1D) -> Vec<(f64, f64)> {
    let g = projection.grid();
    projection.values().iter().enumerate().map(|(k, v)| (g.at(k), v * g.step())).collect()
}

/// Second-order correlation `G2±(τ) = ∫F2±(ω±) e^{-iω±τ} dω±` for a
/// symmetric real JSA.
pub fn g2(jsa: &JointSpectralAmplitude, sign: Sign, delays: &DelayGrid) -> Result<CorrelationTrace> {
    g2_with(jsa, sign, delays, &SymmetryTolerances::default())
}

pub fn g2_with(
    jsa: &JointSpectralAmplitude,
    sign: Sign,
    delays: &DelayGrid,
    tol: &SymmetryTolerances,
) -> Result<CorrelationTrace> {
    check_symmetric_real(jsa, tol)?;
    let projection = marginal_projection(jsa, sign)?;
    let masses = projection_masses(&projection);
    let values = delays.points().par_iter().map(|&t| fourier_sum(&masses, t)).collect();
    let order = match sign {
        Sign::Plus => CorrelationOrder::G2Plus,
        Sign::Minus => CorrelationOrder::G2Minus,
    };
    Ok(CorrelationTrace { delays: *delays, values, order })
}

/// Symmetric fast path: `P2±(τ) = ½[1 ± ∫F2±(ω±) cos(ω±τ) dω±]`.
pub fn biphoton_pattern_symmetric(
    jsa: &JointSpectralAmplitude,
    sign: Sign,
    delays: &DelayGrid,
) -> Result<Interferogram> {
    biphoton_pattern_symmetric_with(jsa, sign, delays, &SymmetryTolerances::default())
}

pub fn biphoton_pattern_symmetric_with(
    jsa: &JointSpectralAmplitude,
    sign: Sign,
    delays: &DelayGrid,
    tol: &SymmetryTolerances,
) -> Result<Interferogram> {
    check_symmetric_real(jsa, tol)?;
    let projection = marginal_projection(jsa, sign)?;
    check_nyquist(delays, projection.grid().max_abs())?;
    let masses = projection_masses(&projection);
    let s = sign.factor();
    let values = delays
        .points()
        .par_iter()
        .map(|&t| {
            let c: f64 = masses.iter().map(|(w, m)| m * (w * t).cos()).sum();
            clamp_probability(0.5 * (1.0 + s * c))
        })
        .collect();
    Interferogram::new(*delays, values, Some(sign.kind()), Units::Probability)
}

struct SquareQuadrature<'a> {
    jsa: &'a JointSpectralAmplitude,
    n: usize,
    cell: f64,
}

impl<'a> SquareQuadrature<'a> {
    fn new(jsa: &'a JointSpectralAmplitude) -> Result<Self> {
        if !jsa.is_square() {
            return Err(WktError::GridMismatch("general quadrature needs grid_s == grid_i".into()));
        }
        check_normalized_jsa(jsa)?;
        let g = jsa.grid_s();
        Ok(Self { jsa, n: g.count(), cell: g.step() * g.step() })
    }

    fn phases(&self, tau: f64) -> Vec<Complex64> {
        self.jsa.grid_s().points().iter().map(|w| Complex64::from_polar(1.0, -w * tau)).collect()
    }

    /// Σ w_j w_k h² |integrand(j, k)|².
    fn integrate(&self, mut integrand: impl FnMut(usize, usize) -> Complex64) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n {
            let wj = trapezoid_weight(j, self.n);
            let mut row = 0.0;
            for k in 0..self.n {
                row += trapezoid_weight(k, self.n) * integrand(j, k).norm_sqr();
            }
            total += wj * row;
        }
        total * self.cell
    }
}

/// General HOMI coincidence probability,
/// `P(τ) = ¼∬|f(ω1,ω2) − f(ω2,ω1)e^{-i(ω1−ω2)τ}|² dω1 dω2`.
pub fn homi_pattern_general(jsa: &JointSpectralAmplitude, delays: &DelayGrid) -> Result<Interferogram> {
    let q = SquareQuadrature::new(jsa)?;
    check_nyquist(delays, jsa.grid_s().end() - jsa.grid_s().start())?;
    let values = delays
        .points()
        .par_iter()
        .map(|&t| {
            let e = q.phases(t);
            let p = 0.25 * q.integrate(|j, k| jsa.get(j, k) - jsa.get(k, j) * e[j] * e[k].conj());
            clamp_probability(p)
        })
        .collect();
    Interferogram::new(*delays, values, Some(InterferenceKind::Homi), Units::Probability)
}

/// General NOONI coincidence probability,
/// `P(τ) = 1/16 ∬|f(ω3,ω4)(e3+1)(e4+1) + f(ω4,ω3)(e3−1)(e4−1)|² dω3 dω4`
/// with `e = e^{-iωτ}`.
pub fn nooni_pattern_general(jsa: &JointSpectralAmplitude, delays: &DelayGrid) -> Result<Interferogram> {
    let q = SquareQuadrature::new(jsa)?;
    check_nyquist(delays, 2.0 * jsa.grid_s().max_abs())?;
    let one = Complex64::new(1.0, 0.0);
    let values = delays
        .points()
        .par_iter()
        .map(|&t| {
            let e = q.phases(t);
            let p = q.integrate(|j, k| {
                jsa.get(j, k) * (e[j] + one) * (e[k] + one) + jsa.get(k, j) * (e[j] - one) * (e[k] - one)
            }) / 16.0;
            clamp_probability(p)
        })
        .collect();
    Interferogram::new(*delays, values, Some(InterferenceKind::Nooni), Units::Probability)
}
