use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use biphoton_wkt::config::{RunConfig, DEFAULTS};
use biphoton_wkt::formats::{read_interferogram, read_tsi, write_interferogram, write_tsi};
use biphoton_wkt::pipeline::simulate;
use biphoton_wkt::spectral::InterferenceKind;
use biphoton_wkt::tsi::{profile_bandwidth_report, project, ProjectionAxis};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn bundled_tsi_projection_widths() {
    let tsi = read_tsi(BufReader::new(File::open(data("synthetic_tsi.csv")).unwrap())).unwrap();
    assert_eq!((tsi.lambda_s().count(), tsi.lambda_i().count()), (121, 121));
    for (axis, nm, thz) in [
        (ProjectionAxis::X, 18.2, 2.18),
        (ProjectionAxis::Diagonal, 24.6, 2.95),
        (ProjectionAxis::Antidiagonal, 1.9, 0.23),
    ] {
        let p = project(&tsi, axis).unwrap();
        assert!((p.total() / tsi.total() - 1.0).abs() < 1e-12);
        let r = profile_bandwidth_report(&p, 1584e-9).unwrap();
        assert!((r.delta_lambda * 1e9 / nm - 1.0).abs() < 0.03, "{axis:?}: {}", r.delta_lambda * 1e9);
        assert!((r.delta_nu * 1e-12 / thz - 1.0).abs() < 0.03, "{axis:?}: {}", r.delta_nu * 1e-12);
    }
}

#[test]
fn bundled_tsi_rewrites_identically() {
    let text = std::fs::read_to_string(data("synthetic_tsi.csv")).unwrap();
    let tsi = read_tsi(text.as_bytes()).unwrap();
    assert_eq!(write_tsi(&tsi), text);
}

#[test]
fn defaults_file_is_the_embedded_default() {
    let text = std::fs::read_to_string(data("defaults.conf")).unwrap();
    assert_eq!(text, DEFAULTS);
    assert_eq!(RunConfig::from_text(&text).unwrap(), RunConfig::defaults());
}

#[test]
fn simulated_files_round_trip() {
    let cfg = RunConfig::from_text("units=counts\npoisson_noise=true\nseed=3").unwrap();
    for kind in [InterferenceKind::Mzi, InterferenceKind::Homi, InterferenceKind::Nooni] {
        let ig = simulate(&cfg, kind).unwrap();
        let text = write_interferogram(&ig);
        let back = read_interferogram(text.as_bytes()).unwrap();
        assert_eq!(back.values(), ig.values());
        assert_eq!(back.kind(), Some(kind));
        assert_eq!(write_interferogram(&back), text);
    }
}
