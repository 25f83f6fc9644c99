//! Prints the GVM-symmetric group-delay mismatch giving a 0.22 THz
//! difference-frequency FWHM for the default source, as stored in
//! `data/defaults.conf`.

use biphoton_wkt::interference::{marginal_projection, Sign};
use biphoton_wkt::models::{build_jsa, calibrate_gvm_mismatch, PhaseMatchSpec, PumpSpec};
use biphoton_wkt::spectral::{hz_to_angular, FrequencyGrid};

fn main() -> biphoton_wkt::Result<()> {
    let pump = PumpSpec::new(792e-9, 120e-15)?;
    let grid = FrequencyGrid::centered(pump.degenerate_frequency(), hz_to_angular(0.025e12), 641)?;
    let length = 30e-3;
    let d = calibrate_gvm_mismatch(&pump, length, 0.22e12, &grid)?;
    let jsa = build_jsa(&pump, &PhaseMatchSpec::gvm_symmetric(length, d)?, &grid)?;
    let minus = marginal_projection(&jsa, Sign::Minus)?.fwhm_hz()?;
    let plus = marginal_projection(&jsa, Sign::Plus)?.fwhm_hz()?;
    println!("mismatch_s_per_m={d:e}");
    println!("group_delay_ps_per_mm=±{:.9}", 0.5 * d * 1e12 * 1e-3);
    println!("minus_fwhm_thz={:.6} plus_fwhm_thz={:.6}", minus * 1e-12, plus * 1e-12);
    Ok(())
}
