//! Two-photon spectral intensity grids and their projections.
//!
//! Diagonal and antidiagonal projections bin cells by index sum and index
//! difference. Their coordinates are the rotated axes `(λs + λi)/√2` and
//! `(λs − λi)/√2`, so bins are `step/√2` wide and widths read off a profile
//! are lengths along the diagonal directions of the (λs, λi) plane.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, WktError};
use crate::extract::fwhm;
use crate::spectral::wavelength_bandwidth_to_frequency;

/// Relative tolerance for step uniformity and grid-point matching.
pub const GRID_TOLERANCE: f64 = 1e-6;

/// Uniform, strictly increasing wavelength axis (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthAxis {
    start: f64,
    step: f64,
    count: usize,
}

impl WavelengthAxis {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(start > 0.0) || !start.is_finite() || !(step > 0.0) || !step.is_finite() || count < 2 {
            return Err(WktError::InvalidGrid(format!(
                "wavelength axis needs start > 0, step > 0 and at least 2 points (got {start:e}, {step:e}, {count})"
            )));
        }
        Ok(Self { start, step, count })
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

    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.at(k)).collect()
    }

    fn index_of(&self, lambda: f64) -> Option<usize> {
        let x = (lambda - self.start) / self.step;
        let k = x.round();
        if k < 0.0 || k >= self.count as f64 || (x - k).abs() > GRID_TOLERANCE * self.count as f64 {
            return None;
        }
        Some(k as usize)
    }
}

/// Measured or synthetic |f|² over (λs, λi); counts stored signal-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TsiGrid {
    lambda_s: WavelengthAxis,
    lambda_i: WavelengthAxis,
    counts: Vec<f64>,
}

impl TsiGrid {
    pub fn new(lambda_s: WavelengthAxis, lambda_i: WavelengthAxis, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != lambda_s.count() * lambda_i.count() {
            return Err(WktError::IncompleteGrid(format!(
                "{} counts for a {}x{} grid",
                counts.len(),
                lambda_s.count(),
                lambda_i.count()
            )));
        }
        for j in 0..lambda_s.count() {
            for k in 0..lambda_i.count() {
                let v = counts[j * lambda_i.count() + k];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(WktError::NegativeCount {
                        lambda_s_nm: lambda_s.at(j) * 1e9,
                        lambda_i_nm: lambda_i.at(k) * 1e9,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { lambda_s, lambda_i, counts })
    }

    pub fn lambda_s(&self) -> &WavelengthAxis {
        &self.lambda_s
    }

    pub fn lambda_i(&self) -> &WavelengthAxis {
        &self.lambda_i
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.counts[j * self.lambda_i.count() + k]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn is_square(&self) -> bool {
        self.lambda_s.count() == self.lambda_i.count()
            && (self.lambda_s.step() - self.lambda_i.step()).abs() <= GRID_TOLERANCE * self.lambda_s.step()
    }

    pub fn records(&self) -> impl Iterator<Item = TsiRecord> + '_ {
        (0..self.lambda_s.count()).flat_map(move |j| {
            (0..self.lambda_i.count()).map(move |k| TsiRecord {
                lambda_s: self.lambda_s.at(j),
                lambda_i: self.lambda_i.at(k),
                counts: self.get(j, k),
            })
        })
    }
}

/// One long-form TSI row; wavelengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsiRecord {
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub counts: f64,
}

/// Distinct sorted values, merging those closer than `tol` relative.
fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        match out.last() {
            Some(last) if (x - last).abs() <= 1e-9 * x.abs() => {}
            _ => out.push(x),
        }
    }
    out
}

fn infer_axis(values: Vec<f64>, name: &str) -> Result<WavelengthAxis> {
    let pts = distinct(values);
    if pts.len() < 2 {
        return Err(WktError::IncompleteGrid(format!("{name} axis has fewer than 2 distinct values")));
    }
    let n = pts.len();
    let step = (pts[n - 1] - pts[0]) / (n - 1) as f64;
    for w in pts.windows(2) {
        if ((w[1] - w[0]) - step).abs() > GRID_TOLERANCE * step {
            return Err(WktError::NonUniformGrid(format!(
                "{name} step {:e} m differs from mean step {step:e} m",
                w[1] - w[0]
            )));
        }
    }
    WavelengthAxis::new(pts[0], step, n)
}

/// Assembles a grid from long-form records, inferring and validating both
/// wavelength axes.
pub fn load_tsi(records: impl IntoIterator<Item = TsiRecord>) -> Result<TsiGrid> {
    let records: Vec<TsiRecord> = records.into_iter().collect();
    if records.is_empty() {
        return Err(WktError::IncompleteGrid("no records".into()));
    }
    for r in &records {
        if !(r.counts >= 0.0) || !r.counts.is_finite() {
            return Err(WktError::NegativeCount {
                lambda_s_nm: r.lambda_s * 1e9,
                lambda_i_nm: r.lambda_i * 1e9,
                value: r.counts,
            });
        }
    }
    let ls = infer_axis(records.iter().map(|r| r.lambda_s).collect(), "signal")?;
    let li = infer_axis(records.iter().map(|r| r.lambda_i).collect(), "idler")?;
    let mut counts = vec![f64::NAN; ls.count() * li.count()];
    for r in &records {
        let (Some(j), Some(k)) = (ls.index_of(r.lambda_s), li.index_of(r.lambda_i)) else {
            return Err(WktError::NonUniformGrid(format!(
                "record ({} nm, {} nm) is off the inferred grid",
                r.lambda_s * 1e9,
                r.lambda_i * 1e9
            )));
        };
        let cell = &mut counts[j * li.count() + k];
        if !cell.is_nan() {
            return Err(WktError::IncompleteGrid(format!(
                "duplicate cell ({} nm, {} nm)",
                r.lambda_s * 1e9,
                r.lambda_i * 1e9
            )));
        }
        *cell = r.counts;
    }
    if let Some(missing) = counts.iter().position(|c| c.is_nan()) {
        return Err(WktError::IncompleteGrid(format!(
            "missing cell ({} nm, {} nm)",
            ls.at(missing / li.count()) * 1e9,
            li.at(missing % li.count()) * 1e9
        )));
    }
    TsiGrid::new(ls, li, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionAxis {
    /// Signal wavelength, summed over idler.
    X,
    /// `(λs + λi)/√2`, summed along antidiagonals.
    Diagonal,
    /// `(λs − λi)/√2`, summed along diagonals.
    Antidiagonal,
}

impl ProjectionAxis {
    pub const ALL: [ProjectionAxis; 3] = [ProjectionAxis::X, ProjectionAxis::Diagonal, ProjectionAxis::Antidiagonal];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProjectionAxis::X => "x",
            ProjectionAxis::Diagonal => "diagonal",
            ProjectionAxis::Antidiagonal => "antidiagonal",
        }
    }
}

impl fmt::Display for ProjectionAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectionAxis {
    type Err = WktError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x" => Ok(Self::X),
            "diagonal" => Ok(Self::Diagonal),
            "antidiagonal" => Ok(Self::Antidiagonal),
            other => Err(WktError::Parse(format!("unknown projection axis '{other}'"))),
        }
    }
}

/// Summed counts over a uniform coordinate axis (m).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub axis: ProjectionAxis,
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.start + k as f64 * self.step).collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

pub fn project(tsi: &TsiGrid, axis: ProjectionAxis) -> Result<Profile> {
    let (ls, li) = (tsi.lambda_s(), tsi.lambda_i());
    let (ns, ni) = (ls.count(), li.count());
    if axis != ProjectionAxis::X && !tsi.is_square() {
        return Err(WktError::NotSquare(format!("{ns}x{ni} grid with steps {:e}/{:e} m", ls.step(), li.step())));
    }
    let h = ls.step();
    let (start, step, bins) = match axis {
        ProjectionAxis::X => (ls.start(), h, ns),
        ProjectionAxis::Diagonal => ((ls.start() + li.start()) / SQRT_2, h / SQRT_2, ns + ni - 1),
        ProjectionAxis::Antidiagonal => {
            ((ls.start() - li.start() - (ni - 1) as f64 * h) / SQRT_2, h / SQRT_2, ns + ni - 1)
        }
    };
    let mut values = vec![0.0; bins];
    for j in 0..ns {
        for k in 0..ni {
            let m = match axis {
                ProjectionAxis::X => j,
                ProjectionAxis::Diagonal => j + k,
                ProjectionAxis::Antidiagonal => j + (ni - 1) - k,
            };
            values[m] += tsi.get(j, k);
        }
    }
    Ok(Profile { axis, start, step, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthReport {
    /// Wavelength FWHM (m).
    pub delta_lambda: f64,
    /// Frequency FWHM (Hz) at the given center wavelength.
    pub delta_nu: f64,
}

pub fn profile_bandwidth_report(profile: &Profile, center_wavelength: f64) -> Result<BandwidthReport> {
    let delta_lambda = fwhm(&profile.coordinates(), &profile.values)?;
    let delta_nu = wavelength_bandwidth_to_frequency(delta_lambda, center_wavelength)?;
    Ok(BandwidthReport { delta_lambda, delta_nu })
}

/// Subtracts a constant background, the median of the lowest tenth of all
/// cells, clipping at zero.
pub fn subtract_background(tsi: &TsiGrid) -> TsiGrid {
    let mut sorted = tsi.counts().to_vec();
    sorted.sort_by(f64::total_cmp);
    let decile = &sorted[..sorted.len().div_ceil(10)];
    let mid = decile.len() / 2;
    let bg = if decile.len() % 2 == 1 { decile[mid] } else { 0.5 * (decile[mid - 1] + decile[mid]) };
    let counts = tsi.counts().iter().map(|c| (c - bg).max(0.0)).collect();
    TsiGrid { lambda_s: tsi.lambda_s, lambda_i: tsi.lambda_i, counts }
}

/// Correlated Gaussian TSI. Widths are the FWHMs of the signal and idler
/// marginals (m); `correlation` is the Pearson coefficient in (−1, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTsi {
    pub center_s: f64,
    pub center_i: f64,
    pub fwhm_s: f64,
    pub fwhm_i: f64,
    pub correlation: f64,
    pub peak: f64,
}

impl GaussianTsi {
    /// Parameters reproducing given FWHMs of the x, diagonal and antidiagonal
    /// projections (rotated coordinates), centered at `center`.
    pub fn from_projection_widths(center: f64, x: f64, diagonal: f64, antidiagonal: f64, peak: f64) -> Result<Self> {
        let vs = x * x;
        let vi = diagonal * diagonal + antidiagonal * antidiagonal - vs;
        let c = 0.5 * (diagonal * diagonal - antidiagonal * antidiagonal);
        if !(vi > 0.0) || !(c * c < vs * vi) {
            return Err(WktError::InvalidValue("projection widths admit no Gaussian".into()));
        }
        Ok(Self {
            center_s: center,
            center_i: center,
            fwhm_s: x,
            fwhm_i: vi.sqrt(),
            correlation: c / (vs * vi).sqrt(),
            peak,
        })
    }

    pub fn sample(&self, lambda_s: WavelengthAxis, lambda_i: WavelengthAxis) -> Result<TsiGrid> {
        if !(self.correlation.abs() < 1.0) || !(self.fwhm_s > 0.0) || !(self.fwhm_i > 0.0) || !(self.peak >= 0.0) {
            return Err(WktError::InvalidValue("invalid Gaussian TSI parameters".into()));
        }
        let k = 4.0 * std::f64::consts::LN_2;
        let r = self.correlation;
        let mut counts = Vec::with_capacity(lambda_s.count() * lambda_i.count());
        for ls in lambda_s.points() {
            for li in lambda_i.points() {
                let x = (ls - self.center_s) / self.fwhm_s;
                let y = (li - self.center_i) / self.fwhm_i;
                let q = (x * x - 2.0 * r * x * y + y * y) / (1.0 - r * r);
                counts.push(self.peak * (-k * q).exp());
            }
        }
        TsiGrid::new(lambda_s, lambda_i, counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn axis(start_nm: f64, step_nm: f64, n: usize) -> WavelengthAxis {
        WavelengthAxis::new(start_nm * 1e-9, step_nm * 1e-9, n).unwrap()
    }

    fn records(ls: &WavelengthAxis, li: &WavelengthAxis, f: impl Fn(usize, usize) -> f64) -> Vec<TsiRecord> {
        let mut out = Vec::new();
        for j in 0..ls.count() {
            for k in 0..li.count() {
                out.push(TsiRecord { lambda_s: ls.at(j), lambda_i: li.at(k), counts: f(j, k) });
            }
        }
        out
    }

    #[test]
    fn loads_sixty_by_sixty() {
        let a = axis(1581.0, 0.1, 60);
        let g = load_tsi(records(&a, &a, |j, k| (j + k) as f64)).unwrap();
        assert_eq!(g.counts().len(), 3600);
        assert!((g.lambda_s().step() - 0.1e-9).abs() < 1e-6 * 0.1e-9);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(load_tsi(Vec::new()), Err(WktError::IncompleteGrid(_))));
        let a = axis(1580.0, 1.0, 3);
        let toy = load_tsi(records(&a, &a, |_, _| 1.0)).unwrap();
        assert_eq!(toy.total(), 9.0);

        let mut missing = records(&a, &a, |_, _| 1.0);
        missing.remove(4);
        assert!(matches!(load_tsi(missing), Err(WktError::IncompleteGrid(_))));

        let mut neg = records(&a, &a, |_, _| 1.0);
        neg[2].counts = -1.0;
        assert!(matches!(load_tsi(neg), Err(WktError::NegativeCount { .. })));

        let mut skew = records(&a, &a, |_, _| 1.0);
        for r in skew.iter_mut().filter(|r| r.lambda_s > 1581.5e-9) {
            r.lambda_s += 0.3e-9;
        }
        assert!(matches!(load_tsi(skew), Err(WktError::NonUniformGrid(_))));

        let mut dup = records(&a, &a, |_, _| 1.0);
        dup[1] = dup[0];
        assert!(matches!(load_tsi(dup), Err(WktError::IncompleteGrid(_))));
    }

    #[test]
    fn single_cell_projects_to_single_bins() {
        let a = axis(1580.0, 0.5, 7);
        let g = load_tsi(records(&a, &a, |j, k| if (j, k) == (2, 5) { 42.0 } else { 0.0 })).unwrap();
        for ax in ProjectionAxis::ALL {
            let p = project(&g, ax).unwrap();
            let nz: Vec<_> = p.values.iter().enumerate().filter(|(_, v)| **v != 0.0).collect();
            assert_eq!(nz.len(), 1);
            assert_eq!(*nz[0].1, 42.0);
            let c = p.coordinates()[nz[0].0];
            let expected = match ax {
                ProjectionAxis::X => a.at(2),
                ProjectionAxis::Diagonal => (a.at(2) + a.at(5)) / SQRT_2,
                ProjectionAxis::Antidiagonal => (a.at(2) - a.at(5)) / SQRT_2,
            };
            assert!((c - expected).abs() < 1e-9 * a.step());
        }
    }

    #[test]
    fn uniform_counts() {
        let a = axis(1580.0, 0.5, 5);
        let g = load_tsi(records(&a, &a, |_, _| 2.0)).unwrap();
        assert_eq!(project(&g, ProjectionAxis::X).unwrap().values, vec![10.0; 5]);
        let d = project(&g, ProjectionAxis::Diagonal).unwrap();
        assert_eq!(d.values, vec![2.0, 4.0, 6.0, 8.0, 10.0, 8.0, 6.0, 4.0, 2.0]);
    }

    #[test]
    fn toy_grid_profiles() {
        let a = axis(1580.0, 1.0, 3);
        let g = load_tsi(records(&a, &a, |j, k| (1 + j * 3 + k) as f64)).unwrap();
        for ax in ProjectionAxis::ALL {
            let p = project(&g, ax).unwrap();
            assert!((1..=5).contains(&p.values.len()));
            assert_eq!(p.total(), g.total());
        }
    }

    #[test]
    fn non_square_rejected_for_rotated_axes() {
        let g = load_tsi(records(&axis(1580.0, 1.0, 3), &axis(1580.0, 1.0, 4), |_, _| 1.0)).unwrap();
        assert!(project(&g, ProjectionAxis::X).is_ok());
        assert!(matches!(project(&g, ProjectionAxis::Diagonal), Err(WktError::NotSquare(_))));
        assert!(matches!(project(&g, ProjectionAxis::Antidiagonal), Err(WktError::NotSquare(_))));
    }

    #[test]
    fn bandwidth_report_examples() {
        let p = Profile { axis: ProjectionAxis::X, start: 1584e-9, step: 1e-9, values: vec![5.0] };
        assert_eq!(profile_bandwidth_report(&p, 1584e-9), Err(WktError::NoCrossing("left")));
        // triangle with FWHM 18.2 nm
        let coords: Vec<f64> = (0..401).map(|k| -40.0 + 0.2 * k as f64).collect();
        let p = Profile {
            axis: ProjectionAxis::X,
            start: 1544e-9,
            step: 0.2e-9,
            values: coords.iter().map(|x| (1.0 - x.abs() / 18.2).max(0.0)).collect(),
        };
        let r = profile_bandwidth_report(&p, 1584e-9).unwrap();
        assert!((r.delta_lambda - 18.2e-9).abs() < 1e-15);
        assert!((r.delta_nu / 2.18e12 - 1.0).abs() < 0.01);
    }

    #[test]
    fn gaussian_ridge_hits_projection_widths() {
        let model = GaussianTsi::from_projection_widths(1584e-9, 18.2e-9, 24.6e-9, 1.9e-9, 1000.0).unwrap();
        assert!((model.correlation - 0.992).abs() < 1e-3);
        let a = WavelengthAxis::new(1554e-9, 0.25e-9, 241).unwrap();
        let g = model.sample(a, a).unwrap();
        for (ax, w) in
            [(ProjectionAxis::X, 18.2e-9), (ProjectionAxis::Diagonal, 24.6e-9), (ProjectionAxis::Antidiagonal, 1.9e-9)]
        {
            let p = project(&g, ax).unwrap();
            assert!((p.total() / g.total() - 1.0).abs() < 1e-9);
            let r = profile_bandwidth_report(&p, 1584e-9).unwrap();
            assert!((r.delta_lambda / w - 1.0).abs() < 0.03, "{ax}: {}", r.delta_lambda);
        }
    }

    #[test]
    fn background_subtraction() {
        let a = axis(1580.0, 1.0, 10);
        let g = load_tsi(records(&a, &a, |j, k| 3.0 + if j == k { 10.0 } else { 0.0 })).unwrap();
        let s = subtract_background(&g);
        assert_eq!(s.total(), 100.0);
        assert_eq!(s.get(0, 1), 0.0);
    }

    fn random_grid(n: usize, seed: u64) -> TsiGrid {
        let a = axis(1580.0, 0.5, n);
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let counts = (0..n * n)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (x >> 40) as f64
            })
            .collect();
        TsiGrid::new(a, a, counts).unwrap()
    }

    proptest! {
        #[test]
        fn projections_conserve_mass(n in 2usize..20, seed in any::<u64>()) {
            let g = random_grid(n, seed);
            for ax in ProjectionAxis::ALL {
                let p = project(&g, ax).unwrap();
                prop_assert!((p.total() - g.total()).abs() <= 1e-9 * g.total().max(1.0));
            }
        }

        #[test]
        fn projections_are_linear(n in 2usize..12, s1 in any::<u64>(), s2 in any::<u64>(), a in 0.0..5.0f64, b in 0.0..5.0f64) {
            let (g1, g2) = (random_grid(n, s1), random_grid(n, s2));
            let mix: Vec<f64> = g1.counts().iter().zip(g2.counts()).map(|(x, y)| a * x + b * y).collect();
            let gm = TsiGrid::new(*g1.lambda_s(), *g1.lambda_i(), mix).unwrap();
            for ax in ProjectionAxis::ALL {
                let (p1, p2, pm) = (project(&g1, ax).unwrap(), project(&g2, ax).unwrap(), project(&gm, ax).unwrap());
                for k in 0..pm.values.len() {
                    let lin = a * p1.values[k] + b * p2.values[k];
                    prop_assert!((pm.values[k] - lin).abs() <= 1e-9 * lin.abs().max(1.0));
                }
            }
        }

        #[test]
        fn symmetric_grid_gives_even_antidiagonal(n in 2usize..20, seed in any::<u64>()) {
            let g = random_grid(n, seed);
            let sym: Vec<f64> = (0..n * n).map(|i| {
                let (j, k) = (i / n, i % n);
                g.get(j, k) + g.get(k, j)
            }).collect();
            let g = TsiGrid::new(*g.lambda_s(), *g.lambda_i(), sym).unwrap();
            let p = project(&g, ProjectionAxis::Antidiagonal).unwrap();
            let m = p.values.len();
            for k in 0..m {
                prop_assert!((p.values[k] - p.values[m - 1 - k]).abs() <= 1e-9 * p.values[k].max(1.0));
            }
            prop_assert!((p.coordinates()[m / 2]).abs() < 1e-9 * p.step);
        }
    }
}
