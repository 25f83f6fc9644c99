use biphoton_wkt::extract::{extract_spectrum_with, fit_envelope, EnvelopeModel, ExtractOptions};
use biphoton_wkt::interference::{
    biphoton_pattern_symmetric, homi_pattern_general, marginal_projection, mzi_pattern, nooni_pattern_general, Sign,
};
use biphoton_wkt::models::{gaussian_spectrum, sinc, sum_difference_jsa, AxisProfile, SINC_SQ_HALF_MAX_X};
use biphoton_wkt::pipeline::shape_error;
use biphoton_wkt::spectral::{
    hz_to_angular, normalize_jsa, normalize_spectrum, DelayGrid, FrequencyGrid, Interferogram, JointSpectralAmplitude,
    Spectrum1D,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Sum of random Gaussian bumps, symmetrized on request. With `decaying`
/// the bumps stay inside the grid so |f|² is negligible on its border.
fn random_jsa(seed: u64, n: usize, symmetric: bool, decaying: bool) -> JointSpectralAmplitude {
    let mut rng = StdRng::seed_from_u64(seed);
    let grid = FrequencyGrid::centered(hz_to_angular(20e12), hz_to_angular(0.5e12), n).unwrap();
    let half = 0.5 * (grid.end() - grid.start());
    let c = 0.5 * (grid.start() + grid.end());
    let (offset, width) = if decaying { (0.3, 0.05..0.15) } else { (0.6, 0.1..0.5) };
    let bumps: Vec<[f64; 5]> = (0..3)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                c + rng.random_range(-offset..offset) * half,
                c + rng.random_range(-offset..offset) * half,
                rng.random_range(width.clone()) * half,
                rng.random_range(width.clone()) * half,
            ]
        })
        .collect();
    let h = |x: f64, y: f64| -> f64 {
        bumps.iter().map(|[a, cx, cy, sx, sy]| a * (-((x - cx) / sx).powi(2) - ((y - cy) / sy).powi(2)).exp()).sum()
    };
    let f = JointSpectralAmplitude::from_fn(grid, grid, |x, y| {
        Complex64::new(if symmetric { h(x, y) + h(y, x) } else { h(x, y) }, 0.0)
    })
    .unwrap();
    normalize_jsa(&f).unwrap()
}

fn delays() -> DelayGrid {
    DelayGrid::symmetric(4e-15, 121).unwrap()
}

fn max_abs_diff(a: &Interferogram, b: &Interferogram) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_asymmetry(p: &Interferogram) -> f64 {
    let v = p.values();
    (0..v.len()).map(|k| (v[k] - v[v.len() - 1 - k]).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn general_paths_match_symmetric_path(seed in any::<u64>(), n in 8usize..48) {
        let jsa = random_jsa(seed, n, true, false);
        let d = delays();
        let homi = homi_pattern_general(&jsa, &d).unwrap();
        let nooni = nooni_pattern_general(&jsa, &d).unwrap();
        prop_assert!(max_abs_diff(&homi, &biphoton_pattern_symmetric(&jsa, Sign::Minus, &d).unwrap()) <= 1e-10);
        prop_assert!(max_abs_diff(&nooni, &biphoton_pattern_symmetric(&jsa, Sign::Plus, &d).unwrap()) <= 1e-10);
        let zero = d.count() / 2;
        prop_assert!(homi.values()[zero] <= 1e-9);
        prop_assert!(nooni.values()[zero] >= 1.0 - 1e-9);
    }

    #[test]
    fn real_patterns_are_bounded_and_even(seed in any::<u64>(), n in 8usize..40, symmetric in any::<bool>()) {
        let jsa = random_jsa(seed, n, symmetric, false);
        let d = delays();
        for p in [homi_pattern_general(&jsa, &d).unwrap(), nooni_pattern_general(&jsa, &d).unwrap()] {
            prop_assert!(p.values().iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
            prop_assert!(max_asymmetry(&p) <= 1e-9);
        }
    }

    #[test]
    fn marginals_carry_unit_mass(seed in any::<u64>(), n in 16usize..64, symmetric in any::<bool>()) {
        let jsa = random_jsa(seed, n, symmetric, true);
        for sign in [Sign::Plus, Sign::Minus] {
            let m = marginal_projection(&jsa, sign).unwrap();
            prop_assert!((m.integral() - 1.0).abs() <= 1e-6, "{}", m.integral());
        }
    }
}

fn sinc_sq_spectrum(center: f64, fwhm: f64, grid: &FrequencyGrid) -> Spectrum1D {
    let w = hz_to_angular(fwhm);
    let values = grid.points().iter().map(|x| sinc(2.0 * SINC_SQ_HALF_MAX_X * (x - center) / w).powi(2)).collect();
    normalize_spectrum(&Spectrum1D::new(*grid, values, center).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mzi_round_trip_preserves_width_and_shape(
        center_thz in 150.0..250.0f64,
        fwhm_thz in 1.2..3.0f64,
        sinc_shape in any::<bool>(),
    ) {
        let center = hz_to_angular(center_thz * 1e12);
        let grid = FrequencyGrid::centered(center, hz_to_angular(0.02e12), 1201).unwrap();
        let s = if sinc_shape {
            sinc_sq_spectrum(center, fwhm_thz * 1e12, &grid)
        } else {
            gaussian_spectrum(center, fwhm_thz * 1e12, &grid).unwrap()
        };
        let d = DelayGrid::symmetric(0.5e-15, 8001).unwrap();
        let ig = mzi_pattern(&s, &d).unwrap();
        let out = extract_spectrum_with(&ig, &ExtractOptions { carrier_hint: Some(center), ..Default::default() }).unwrap();
        let fwhm = out.spectrum.fwhm_hz().unwrap();
        prop_assert!((fwhm / s.fwhm_hz().unwrap() - 1.0).abs() <= 0.02, "{fwhm}");
        prop_assert!(shape_error(&s, &out.spectrum).unwrap() <= 0.01);
    }
}

#[test]
fn triangle_sinc_time_bandwidth_product() {
    let product = 2.0 * SINC_SQ_HALF_MAX_X / std::f64::consts::PI;
    assert!((product - 0.8859).abs() < 1e-4);
    let w0 = hz_to_angular(190e12);
    for minus_thz in [0.15, 0.22, 0.35] {
        let grid = FrequencyGrid::centered(w0, hz_to_angular(0.01e12), 1601).unwrap();
        let jsa = sum_difference_jsa(
            AxisProfile::Gaussian { fwhm: 3e12 },
            AxisProfile::SincSquared { fwhm: minus_thz * 1e12 },
            2.0 * w0,
            &grid,
        )
        .unwrap();
        let d = DelayGrid::symmetric(20e-15, 1601).unwrap();
        let p = biphoton_pattern_symmetric(&jsa, Sign::Minus, &d).unwrap();
        let t = fit_envelope(&p, EnvelopeModel::Triangle).unwrap().temporal_fwhm;
        let nu = marginal_projection(&jsa, Sign::Minus).unwrap().fwhm_hz().unwrap();
        assert!((t * nu / product - 1.0).abs() < 0.01, "{minus_thz}: {}", t * nu);
    }
}
