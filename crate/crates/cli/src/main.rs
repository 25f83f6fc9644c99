//! `biphoton-wkt` command-line driver.
//!
//! Exit status: 0 success, 1 tolerance failure, 2 input or parse error,
//! 3 numerical precondition error. Errors are reported on stderr as a single
//! `error code=<n> kind=<Variant> msg=<text>` line.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biphoton_wkt::config::RunConfig;
use biphoton_wkt::extract::{extract_spectrum_with, fit_envelope, EnvelopeModel};
use biphoton_wkt::formats::{read_interferogram, read_tsi, write_interferogram, write_profile, write_spectrum};
use biphoton_wkt::pipeline::{extract_options, roundtrip, simulate};
use biphoton_wkt::spectral::{angular_to_hz, InterferenceKind, Interferogram};
use biphoton_wkt::tsi::{profile_bandwidth_report, project, subtract_background, ProjectionAxis};
use biphoton_wkt::{Result, WktError};
use clap::{Parser, Subcommand};

pub const THREADS_ENV: &str = "BIPHOTON_WKT_THREADS";

#[derive(Parser)]
#[command(name = "biphoton-wkt", version, about = "Simulate and invert one- and two-photon interferograms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an interferogram and write it as CSV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: InterferenceKind,
        /// Output path; defaults to the config `output` key, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a spectrum from an interferogram CSV.
    Extract {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        /// Required when the file carries no kind metadata.
        #[arg(long, value_parser = parse_kind)]
        kind: Option<InterferenceKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Project a two-photon spectral intensity onto the x, diagonal and antidiagonal axes.
    Project {
        #[arg(long)]
        input: PathBuf,
        /// Prefix for `<prefix>_<axis>.csv` and `<prefix>_report.txt`.
        #[arg(long)]
        out: PathBuf,
        /// Center wavelength for the frequency conversion; defaults to the signal axis midpoint.
        #[arg(long)]
        center_nm: Option<f64>,
        /// Subtract a constant background before projecting.
        #[arg(long)]
        background: bool,
    },
    /// Simulate, extract and compare all three interferometers.
    Roundtrip {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Relative FWHM tolerance, overriding the config.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Fit a fringe or dip envelope and report visibility.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<InterferenceKind>,
        #[arg(long, value_parser = parse_model, default_value = "gaussian")]
        model: EnvelopeModel,
    },
}

fn parse_kind(s: &str) -> std::result::Result<InterferenceKind, String> {
    s.parse().map_err(|e: WktError| e.to_string())
}

fn parse_model(s: &str) -> std::result::Result<EnvelopeModel, String> {
    s.parse().map_err(|e: WktError| e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> WktError {
    WktError::Io(format!("{}: {e}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::defaults()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| WktError::Io(format!("stdout: {e}"))),
    }
}

/// Applies the `--kind` flag to a loaded interferogram.
fn with_kind(ig: Interferogram, flag: Option<InterferenceKind>) -> Result<Interferogram> {
    match (ig.kind(), flag) {
        (Some(a), Some(b)) if a != b => {
            Err(WktError::InvalidValue(format!("file declares kind={} but --kind={}", a.as_str(), b.as_str())))
        }
        (Some(_), _) => Ok(ig),
        (None, Some(k)) => Interferogram::new(*ig.delays(), ig.values().to_vec(), Some(k), ig.units()),
        (None, None) => Err(WktError::UnknownKind),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| WktError::Config(format!("{THREADS_ENV}: expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| WktError::Config(format!("{THREADS_ENV}: {e}")))
}

fn cmd_simulate(config: Option<&Path>, kind: InterferenceKind, out: Option<&Path>) -> Result<u8> {
    let cfg = load_config(config)?;
    let ig = simulate(&cfg, kind)?;
    let out = out.or(cfg.output.as_deref());
    emit(out, &write_interferogram(&ig))?;
    if let Some(p) = out {
        eprintln!("wrote {} samples of {} to {}", ig.values().len(), kind.as_str(), p.display());
    }
    Ok(0)
}

fn cmd_extract(config: Option<&Path>, input: &Path, kind: Option<InterferenceKind>, out: Option<&Path>) -> Result<u8> {
    let cfg = load_config(config)?;
    let ig = with_kind(read_interferogram(open(input)?)?, kind)?;
    let kind = ig.kind().ok_or(WktError::UnknownKind)?;
    let result = extract_spectrum_with(&ig, &extract_options(&cfg, kind))?;
    let fwhm = result.spectrum.fwhm_hz()?;
    let center = angular_to_hz(result.spectrum.center());
    let mut summary = format!(
        "kind={} axis={} fwhm_thz={:.6} center_thz={:.6}",
        kind.as_str(),
        result.axis.as_str(),
        fwhm * 1e-12,
        center * 1e-12
    );
    if kind.has_carrier() {
        summary.push_str(&format!(" carrier_period_fs={:.6}", 1e15 / center));
    }
    summary.push_str(&format!(" negative_warning={}", result.negative_warning));
    let out = out.or(cfg.output.as_deref());
    emit(out, &write_spectrum(&result.spectrum, result.axis))?;
    match out {
        Some(_) => println!("{summary}"),
        None => eprintln!("{summary}"),
    }
    Ok(0)
}

fn cmd_project(input: &Path, prefix: &Path, center_nm: Option<f64>, background: bool) -> Result<u8> {
    let mut tsi = read_tsi(open(input)?)?;
    if background {
        tsi = subtract_background(&tsi);
    }
    let ls = tsi.lambda_s();
    let center = match center_nm {
        Some(c) if c.is_finite() && c > 0.0 => c * 1e-9,
        Some(c) => return Err(WktError::InvalidWavelength(format!("--center-nm {c}"))),
        None => ls.start() + 0.5 * (ls.count() - 1) as f64 * ls.step(),
    };
    let profiles = ProjectionAxis::ALL.iter().map(|&a| project(&tsi, a)).collect::<Result<Vec<_>>>()?;
    let mut report = format!("# input={} center_nm={:.6} total={}\n", input.display(), center * 1e9, tsi.total());
    for p in &profiles {
        let path = PathBuf::from(format!("{}_{}.csv", prefix.display(), p.axis.as_str()));
        write_file(&path, &write_profile(p))?;
        let widths = match profile_bandwidth_report(p, center) {
            Ok(r) => format!("fwhm_nm={:.4} fwhm_thz={:.4}", r.delta_lambda * 1e9, r.delta_nu * 1e-12),
            Err(e) => format!("fwhm_nm=- fwhm_thz=- note={}", e.kind()),
        };
        report.push_str(&format!(
            "axis={} bins={} step_nm={:.6} mass={} {widths}\n",
            p.axis.as_str(),
            p.values.len(),
            p.step * 1e9,
            p.total()
        ));
    }
    write_file(&PathBuf::from(format!("{}_report.txt", prefix.display())), &report)?;
    print!("{report}");
    Ok(0)
}

fn cmd_roundtrip(config: Option<&Path>, tolerance: Option<f64>) -> Result<u8> {
    let mut cfg = load_config(config)?;
    if let Some(t) = tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return Err(WktError::InvalidValue(format!("--tolerance {t}")));
        }
        cfg.tolerance = t;
    }
    let report = roundtrip(&cfg)?;
    println!(
        "{:<6} {:<12} {:>14} {:>14} {:>11} {:>11}  result",
        "kind", "axis", "expected_thz", "extracted_thz", "fwhm_err", "shape_err"
    );
    for r in &report.rows {
        println!(
            "{:<6} {:<12} {:>14.6} {:>14.6} {:>11.3e} {:>11.3e}  {}",
            r.kind.as_str(),
            r.kind.spectral_axis().as_str(),
            r.expected_fwhm * 1e-12,
            r.extracted_fwhm * 1e-12,
            r.fwhm_error,
            r.shape_error,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "tolerance={} shape_tolerance={} overall={}",
        report.tolerance,
        report.shape_tolerance,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_fit(input: &Path, kind: Option<InterferenceKind>, model: EnvelopeModel) -> Result<u8> {
    let ig = with_kind(read_interferogram(open(input)?)?, kind)?;
    let r = fit_envelope(&ig, model)?;
    let mut line = format!(
        "kind={} model={} visibility={:.6} visibility_uncertainty={:.6} fwhm_fs={:.4} center_fs={:.4} residual_rms={:.3e} iterations={}",
        ig.kind().map(|k| k.as_str()).unwrap_or("-"),
        r.model.as_str(),
        r.visibility,
        r.visibility_uncertainty,
        r.temporal_fwhm * 1e15,
        r.center * 1e15,
        r.residual_rms,
        r.iterations
    );
    if let Some(w) = r.carrier {
        let hz = angular_to_hz(w);
        line.push_str(&format!(" carrier_thz={:.6} carrier_period_fs={:.6}", hz * 1e-12, 1e15 / hz));
    }
    if let Some(a) = r.count_scale {
        line.push_str(&format!(" count_scale={a:.3}"));
    }
    println!("{line}");
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config, kind, out } => cmd_simulate(config.as_deref(), kind, out.as_deref()),
        Command::Extract { config, input, kind, out } => cmd_extract(config.as_deref(), &input, kind, out.as_deref()),
        Command::Project { input, out, center_nm, background } => cmd_project(&input, &out, center_nm, background),
        Command::Roundtrip { config, tolerance } => cmd_roundtrip(config.as_deref(), tolerance),
        Command::Fit { input, kind, model } => cmd_fit(&input, kind, model),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error code={code} kind={} msg={e}", e.kind());
            ExitCode::from(code as u8)
        }
    }
}
