//! Writes the bundled synthetic TSI: a correlated Gaussian ridge whose x,
//! diagonal and antidiagonal projections have FWHMs of 18.2, 24.6 and
//! 1.9 nm around 1584 nm, with counts rounded to integers.
//!
//! Usage: cargo run --example make_synthetic_tsi -- [output.csv]

use biphoton_wkt::formats::write_tsi;
use biphoton_wkt::tsi::{profile_bandwidth_report, project, GaussianTsi, ProjectionAxis, TsiGrid, WavelengthAxis};

const CENTER: f64 = 1584e-9;
const STEP: f64 = 0.5e-9;
const COUNT: usize = 121;
const PEAK: f64 = 2000.0;

fn main() -> biphoton_wkt::Result<()> {
    let model = GaussianTsi::from_projection_widths(CENTER, 18.2e-9, 24.6e-9, 1.9e-9, PEAK)?;
    let axis = WavelengthAxis::new(CENTER - 0.5 * (COUNT - 1) as f64 * STEP, STEP, COUNT)?;
    let smooth = model.sample(axis, axis)?;
    let tsi = TsiGrid::new(axis, axis, smooth.counts().iter().map(|c| c.round()).collect())?;
    for ax in ProjectionAxis::ALL {
        let r = profile_bandwidth_report(&project(&tsi, ax)?, CENTER)?;
        eprintln!("{ax}: {:.3} nm, {:.3} THz", r.delta_lambda * 1e9, r.delta_nu * 1e-12);
    }
    let path = std::env::args().nth(1).unwrap_or_else(|| "synthetic_tsi.csv".into());
    std::fs::write(&path, write_tsi(&tsi)).map_err(|e| biphoton_wkt::WktError::Io(e.to_string()))?;
    Ok(())
}
