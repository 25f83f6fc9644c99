//! CSV schemas for interferograms, spectra, TSI grids and profiles.
//!
//! Numeric IO is in fs, THz (ordinary frequency) and nm. Value columns are
//! written with the shortest representation that parses back to the same
//! `f64`; coordinate columns are rounded to 1e-9 of their unit so that a
//! read/write cycle reproduces the file byte for byte.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Result, WktError};
use crate::spectral::{
    angular_to_hz, hz_to_angular, DelayGrid, FrequencyGrid, InterferenceKind, Interferogram, SpectralAxis, Spectrum1D,
    Units,
};
use crate::tsi::{load_tsi, Profile, ProjectionAxis, TsiGrid, TsiRecord};

pub const INTERFEROGRAM_HEADER: &str = "delay_fs,value";
pub const SPECTRUM_HEADER: &str = "freq_thz,intensity";
pub const TSI_HEADER: &str = "lambda_s_nm,lambda_i_nm,counts";
pub const PROFILE_HEADER: &str = "coordinate_nm,counts";

/// Relative deviation from a uniform step tolerated in delay columns.
pub const DELAY_UNIFORMITY: f64 = 1e-6;

/// Coordinate in IO units, rounded to 1e-9 of the unit.
fn coord(x: f64) -> f64 {
    (x * 1e9).round() / 1e9 + 0.0
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| WktError::Parse(format!("line {line}: '{}' is not a number", field.trim())))?;
    if !v.is_finite() {
        return Err(WktError::Parse(format!("line {line}: non-finite value")));
    }
    Ok(v)
}

/// `key=value` pairs of a `# ...` metadata line.
fn parse_meta(line: &str) -> Result<Vec<(String, String)>> {
    let body = line.strip_prefix('#').ok_or_else(|| WktError::Parse("missing '# key=value' metadata line".into()))?;
    body.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| WktError::Parse(format!("malformed metadata token '{tok}'")))
        })
        .collect()
}

struct Table {
    meta: Vec<(String, String)>,
    rows: Vec<Vec<f64>>,
}

fn read_table(mut reader: impl BufRead, header: &str, with_meta: bool) -> Result<Table> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| WktError::Io(e.to_string()))?;
    // Every writer terminates its rows, so a missing final newline means a cut-off file.
    if !text.is_empty() && !text.ends_with('\n') {
        return Err(WktError::Parse("file does not end with a newline (truncated?)".into()));
    }
    let mut lines = text.lines().enumerate();
    let mut next = || lines.next().map(|(i, l)| (i + 1, l.trim_end_matches('\r').to_string()));
    let meta = if with_meta {
        let (_, l) = next().ok_or_else(|| WktError::Parse("empty file".into()))?;
        parse_meta(&l)?
    } else {
        Vec::new()
    };
    let (_, h) = next().ok_or_else(|| WktError::Parse("missing header".into()))?;
    if h.trim() != header {
        return Err(WktError::Parse(format!("expected header '{header}', found '{}'", h.trim())));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    while let Some((n, l)) = next() {
        if l.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != width {
            return Err(WktError::Parse(format!("line {n}: expected {width} fields, found {}", fields.len())));
        }
        rows.push(fields.iter().map(|f| parse_f64(f, n)).collect::<Result<Vec<_>>>()?);
    }
    Ok(Table { meta, rows })
}

fn meta_value<'a>(meta: &'a [(String, String)], key: &str) -> Option<&'a str> {
    meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn check_meta_keys(meta: &[(String, String)], allowed: &[&str]) -> Result<()> {
    for (k, _) in meta {
        if !allowed.contains(&k.as_str()) {
            return Err(WktError::Parse(format!("unknown metadata key '{k}'")));
        }
    }
    Ok(())
}

pub fn write_interferogram(ig: &Interferogram) -> String {
    let mut out = String::new();
    match ig.kind() {
        Some(k) => writeln!(out, "# kind={} units={}", k.as_str(), ig.units().as_str()),
        None => writeln!(out, "# units={}", ig.units().as_str()),
    }
    .unwrap();
    writeln!(out, "{INTERFEROGRAM_HEADER}").unwrap();
    for (t, v) in ig.delays().points().iter().zip(ig.values()) {
        writeln!(out, "{},{}", coord(t * 1e15), v).unwrap();
    }
    out
}

/// Parses an interferogram CSV. The delay column must be uniform to
/// [`DELAY_UNIFORMITY`] of its step.
pub fn read_interferogram(reader: impl BufRead) -> Result<Interferogram> {
    let table = read_table(reader, INTERFEROGRAM_HEADER, true)?;
    check_meta_keys(&table.meta, &["kind", "units"])?;
    let kind = meta_value(&table.meta, "kind").map(str::parse::<InterferenceKind>).transpose()?;
    let units = meta_value(&table.meta, "units")
        .ok_or_else(|| WktError::Parse("metadata lacks units".into()))?
        .parse::<Units>()?;
    let delays: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    interferogram_from_samples(&delays, table.rows.iter().map(|r| r[1]).collect(), kind, units)
}

/// Builds an interferogram from delays in fs, which must be uniform to
/// [`DELAY_UNIFORMITY`] of their step.
pub fn interferogram_from_samples(
    delays_fs: &[f64],
    values: Vec<f64>,
    kind: Option<InterferenceKind>,
    units: Units,
) -> Result<Interferogram> {
    let n = delays_fs.len();
    if n < 2 {
        return Err(WktError::Parse(format!("need at least 2 samples, found {n}")));
    }
    let first = delays_fs[0];
    let step = (delays_fs[n - 1] - first) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(WktError::NonUniformGrid("delays must increase".into()));
    }
    for (k, t) in delays_fs.iter().enumerate() {
        if !((t - (first + k as f64 * step)).abs() <= DELAY_UNIFORMITY * step) {
            return Err(WktError::NonUniformGrid(format!("delay {t} fs off the uniform grid")));
        }
    }
    let delays = DelayGrid::new(first * 1e-15, step * 1e-15, n)?;
    Interferogram::new(delays, values, kind, units)
}

/// Spectrum CSV with frequency in THz and density per THz.
pub fn write_spectrum(s: &Spectrum1D, axis: SpectralAxis) -> String {
    let mut out = String::new();
    writeln!(out, "# axis={} center_thz={}", axis.as_str(), coord(angular_to_hz(s.center()) * 1e-12)).unwrap();
    writeln!(out, "{SPECTRUM_HEADER}").unwrap();
    let per_thz = hz_to_angular(1e12);
    for (w, v) in s.grid().points().iter().zip(s.values()) {
        writeln!(out, "{},{}", coord(angular_to_hz(*w) * 1e-12), v * per_thz).unwrap();
    }
    out
}

pub fn read_spectrum(reader: impl BufRead) -> Result<(Spectrum1D, SpectralAxis)> {
    let table = read_table(reader, SPECTRUM_HEADER, true)?;
    check_meta_keys(&table.meta, &["axis", "center_thz"])?;
    let axis = meta_value(&table.meta, "axis")
        .ok_or_else(|| WktError::Parse("metadata lacks axis".into()))?
        .parse::<SpectralAxis>()?;
    let center = meta_value(&table.meta, "center_thz")
        .ok_or_else(|| WktError::Parse("metadata lacks center_thz".into()))
        .and_then(|v| parse_f64(v, 1))?;
    let n = table.rows.len();
    if n < 2 {
        return Err(WktError::Parse(format!("need at least 2 samples, found {n}")));
    }
    let first = table.rows[0][0];
    let step = (table.rows[n - 1][0] - first) / (n - 1) as f64;
    for (k, row) in table.rows.iter().enumerate() {
        if (row[0] - (first + k as f64 * step)).abs() > DELAY_UNIFORMITY * step.abs() {
            return Err(WktError::NonUniformGrid(format!("frequency {} THz off the uniform grid", row[0])));
        }
    }
    let grid = FrequencyGrid::new(hz_to_angular(first * 1e12), hz_to_angular(step * 1e12), n)?;
    let per_thz = hz_to_angular(1e12);
    let values = table.rows.iter().map(|r| r[1] / per_thz).collect();
    Ok((Spectrum1D::new(grid, values, hz_to_angular(center * 1e12))?, axis))
}

pub fn write_tsi(tsi: &TsiGrid) -> String {
    let mut out = String::new();
    writeln!(out, "{TSI_HEADER}").unwrap();
    for r in tsi.records() {
        writeln!(out, "{},{},{}", coord(r.lambda_s * 1e9), coord(r.lambda_i * 1e9), r.counts).unwrap();
    }
    out
}

pub fn read_tsi(reader: impl BufRead) -> Result<TsiGrid> {
    let table = read_table(reader, TSI_HEADER, false)?;
    load_tsi(table.rows.iter().map(|r| TsiRecord { lambda_s: r[0] * 1e-9, lambda_i: r[1] * 1e-9, counts: r[2] }))
}

pub fn write_profile(p: &Profile) -> String {
    let mut out = String::new();
    writeln!(out, "# axis={}", p.axis.as_str()).unwrap();
    writeln!(out, "{PROFILE_HEADER}").unwrap();
    for (c, v) in p.coordinates().iter().zip(&p.values) {
        writeln!(out, "{},{}", coord(c * 1e9), v).unwrap();
    }
    out
}

pub fn read_profile(reader: impl BufRead) -> Result<Profile> {
    let table = read_table(reader, PROFILE_HEADER, true)?;
    check_meta_keys(&table.meta, &["axis"])?;
    let axis = meta_value(&table.meta, "axis")
        .ok_or_else(|| WktError::Parse("metadata lacks axis".into()))?
        .parse::<ProjectionAxis>()?;
    let n = table.rows.len();
    if n == 0 {
        return Err(WktError::Parse("empty profile".into()));
    }
    let start = table.rows[0][0] * 1e-9;
    let step = if n > 1 { (table.rows[n - 1][0] - table.rows[0][0]) / (n - 1) as f64 * 1e-9 } else { 0.0 };
    Ok(Profile { axis, start, step, values: table.rows.iter().map(|r| r[1]).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsi::WavelengthAxis;
    use proptest::prelude::*;

    fn ig(values: Vec<f64>) -> Interferogram {
        let d = DelayGrid::new(-1.5e-15, 0.5e-15, values.len()).unwrap();
        Interferogram::new(d, values, Some(InterferenceKind::Homi), Units::Probability).unwrap()
    }

    #[test]
    fn interferogram_layout() {
        let text = write_interferogram(&ig(vec![0.5, 0.25, 0.0, 0.25, 0.5]));
        assert_eq!(text, "# kind=homi units=probability\ndelay_fs,value\n-1.5,0.5\n-1,0.25\n-0.5,0\n0,0.25\n0.5,0.5\n");
    }

    #[test]
    fn interferogram_parse_errors() {
        let good = write_interferogram(&ig(vec![0.5, 0.25, 0.0, 0.25, 0.5]));
        let truncated = &good[..good.len() - 4];
        assert!(matches!(read_interferogram(truncated.as_bytes()), Err(WktError::Parse(_))));
        for cut in 1..good.len() - 40 {
            let t = &good[..good.len() - cut];
            if !t.ends_with('\n') {
                assert!(matches!(read_interferogram(t.as_bytes()), Err(WktError::Parse(_))), "{t:?}");
            }
        }
        assert!(matches!(read_interferogram("".as_bytes()), Err(WktError::Parse(_))));
        let bad_header = good.replace("delay_fs", "delay");
        assert!(matches!(read_interferogram(bad_header.as_bytes()), Err(WktError::Parse(_))));
        let uneven = "# kind=mzi units=probability\ndelay_fs,value\n0,0.5\n1,0.5\n3,0.5\n";
        assert!(matches!(read_interferogram(uneven.as_bytes()), Err(WktError::NonUniformGrid(_))));
        let bad_value = "# kind=mzi units=probability\ndelay_fs,value\n0,0.5\n1,1.5\n";
        assert!(matches!(read_interferogram(bad_value.as_bytes()), Err(WktError::InvalidValue(_))));
        let bad_meta = "# kind=mzi units=probability extra=1\ndelay_fs,value\n0,0.5\n1,0.5\n";
        assert!(matches!(read_interferogram(bad_meta.as_bytes()), Err(WktError::Parse(_))));
    }

    #[test]
    fn kind_is_optional() {
        let text = "# units=counts\ndelay_fs,value\n0,10\n1,12\n";
        let r = read_interferogram(text.as_bytes()).unwrap();
        assert_eq!(r.kind(), None);
        assert_eq!(r.units(), Units::Counts);
        assert_eq!(write_interferogram(&r), text);
    }

    proptest! {
        #[test]
        fn interferogram_values_round_trip(values in prop::collection::vec(0.0..=1.0f64, 2..64), start in -5e3..5e3f64, step in 0.01..50.0f64) {
            let d = DelayGrid::new(start * 1e-15, step * 1e-15, values.len()).unwrap();
            let a = Interferogram::new(d, values.clone(), Some(InterferenceKind::Nooni), Units::Probability).unwrap();
            let b = read_interferogram(write_interferogram(&a).as_bytes()).unwrap();
            prop_assert_eq!(b.values(), &values[..]);
            prop_assert_eq!(b.kind(), a.kind());
            for (x, y) in a.delays().points().iter().zip(b.delays().points()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(step * 1e-15) + 1e-24);
            }
            // a second pass is byte-identical
            prop_assert_eq!(write_interferogram(&b), write_interferogram(&read_interferogram(write_interferogram(&b).as_bytes()).unwrap()));
        }

        #[test]
        fn spectrum_values_round_trip(values in prop::collection::vec(0.0..1e-12f64, 2..64)) {
            let grid = FrequencyGrid::new(hz_to_angular(180e12), hz_to_angular(0.025e12), values.len()).unwrap();
            let s = Spectrum1D::new(grid, values, grid.at(0)).unwrap();
            let text = write_spectrum(&s, SpectralAxis::OmegaPlus);
            let (r, axis) = read_spectrum(text.as_bytes()).unwrap();
            prop_assert_eq!(axis, SpectralAxis::OmegaPlus);
            for (x, y) in s.values().iter().zip(r.values()) {
                prop_assert!((x - y).abs() <= 2.3e-16 * x.abs());
            }
        }

        #[test]
        fn tsi_counts_round_trip(counts in prop::collection::vec(0.0..1e6f64, 9)) {
            let a = WavelengthAxis::new(1583e-9, 1e-9, 3).unwrap();
            let g = TsiGrid::new(a, a, counts.clone()).unwrap();
            let r = read_tsi(write_tsi(&g).as_bytes()).unwrap();
            prop_assert_eq!(r.counts(), &counts[..]);
        }
    }

    #[test]
    fn profile_round_trip() {
        let p = Profile {
            axis: ProjectionAxis::Antidiagonal,
            start: -2e-9,
            step: 0.5e-9,
            values: vec![1.0, 3.0, 7.5, 3.0, 1.0],
        };
        let r = read_profile(write_profile(&p).as_bytes()).unwrap();
        assert_eq!(r.values, p.values);
        assert_eq!(r.axis, p.axis);
        assert!((r.step - p.step).abs() < 1e-24);
    }
}
