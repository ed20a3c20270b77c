//! `twpacal` command-line front end.
//!
//! Each subcommand is a thin wrapper around one library operation. Exit codes:
//! `0` success, `1` invalid input, `2` numerical failure, `64` bad usage.

mod report;
mod units;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::network::{band_average, renormalize, Band, NetworkData, NetworkError, SParam, Scale};
use crate::sim::{ScenarioFile, SimError};
use crate::touchstone::{
    export_csv, export_json, parse_touchstone, write_touchstone, Quantity, TouchstoneError, ValueFormat,
};
use crate::trl::{
    deembed, line_phase_validity, solve_trl_with, verify_calibration, ErrorModel, ReflectNominal, TrlError,
    TrlOptions, TrlStandardSet, DEFAULT_GUARD_DEG,
};
use crate::twpa::{
    build_gain_map, compression_csv, compression_curve, extract_gain, fit_reflection_from_pump_off,
    predict_reflection_vs_gain, prediction_csv, PumpSweep, ReflectionModel, SignalSweep, TwpaError,
};

pub use report::{sha256_hex, InputDigest, Report};
pub use units::{parse_frequency, parse_interval, parse_range, parse_time, parse_values};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Invalid(_) | CliError::Io { .. } => EXIT_INVALID,
        }
    }
}

fn network_is_numerical(e: &NetworkError) -> bool {
    matches!(e, NetworkError::SingularConversion(_))
}

fn classify(numerical: bool, msg: String) -> CliError {
    if numerical {
        CliError::Numerical(msg)
    } else {
        CliError::Invalid(msg)
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        classify(network_is_numerical(&e), e.to_string())
    }
}

impl From<TouchstoneError> for CliError {
    fn from(e: TouchstoneError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<TrlError> for CliError {
    fn from(e: TrlError) -> Self {
        let numerical = match &e {
            TrlError::SingularThru { .. } | TrlError::RootAmbiguity { .. } | TrlError::SingularErrorBox { .. } => true,
            TrlError::Network(n) => network_is_numerical(n),
            _ => false,
        };
        classify(numerical, e.to_string())
    }
}

impl From<TwpaError> for CliError {
    fn from(e: TwpaError) -> Self {
        let numerical = match &e {
            TwpaError::DivergentSeries { .. } | TwpaError::NoRootInUnitInterval { .. } => true,
            TwpaError::Network(n) => network_is_numerical(n),
            _ => false,
        };
        classify(numerical, e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Network(n) => n.into(),
            SimError::Twpa(t) => t.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twpacal", version, about = "Calibrated S-parameter analysis for travelling-wave parametric amplifiers")]
struct Cli {
    /// Also write a JSON provenance report (inputs, digests, parameters, result) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a Touchstone file to another value format, CSV or JSON.
    Convert(ConvertArgs),
    /// Solve a TRL calibration and de-embed DUT measurements.
    Calibrate(CalibrateArgs),
    /// Apply a saved error model to a raw measurement.
    Deembed(DeembedArgs),
    /// Band-averaged on/off gain in dB.
    Gain(GainArgs),
    /// Band-averaged gain over a pump frequency / power sweep.
    Gainmap(GainMapArgs),
    /// Fit the symmetric reflection model to pump-off reflections.
    FitReflection(FitArgs),
    /// Predicted port reflections versus on/off gain.
    PredictReflection(PredictArgs),
    /// Band-averaged gain and S-parameters versus signal power.
    Compression(CompressionArgs),
    /// Generate a synthetic measurement set from a scenario file.
    Simulate(SimulateArgs),
    /// Residuals of the standards after applying an error model.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputKind {
    Touchstone,
    Csv,
    Json,
}

fn value_format(s: &str) -> Result<ValueFormat, String> {
    s.parse()
}

fn quantity(s: &str) -> Result<Quantity, String> {
    s.parse()
}

#[derive(Debug, Args)]
struct BandArgs {
    /// Averaging band as LO:HI (Hz or unit-suffixed, e.g. 4GHz:8GHz).
    #[arg(long, value_parser = parse_interval, value_name = "LO:HI")]
    band: Option<(f64, f64)>,
    /// Interval removed from the band; repeatable.
    #[arg(long, value_parser = parse_interval, value_name = "LO:HI")]
    exclude: Vec<(f64, f64)>,
}

impl BandArgs {
    fn resolve(&self, default: Band) -> Result<Band, CliError> {
        units::build_band(self.band, &self.exclude, default).map_err(CliError::Invalid)
    }
}

fn band_json(b: &Band) -> Value {
    json!({ "f_lo_hz": b.f_lo(), "f_hi_hz": b.f_hi(), "exclusions_hz": b.exclusions() })
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// Input Touchstone file; `-` reads stdin.
    #[arg(long, short, default_value = "-")]
    input: String,
    /// Output path; `-` writes stdout.
    #[arg(long, short, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value = "touchstone")]
    to: OutputKind,
    /// Value format of Touchstone output.
    #[arg(long, value_parser = value_format, default_value = "RI")]
    format: ValueFormat,
    /// Table columns, e.g. s21:db,s21:deg.
    #[arg(long, value_parser = quantity, value_delimiter = ',')]
    quantities: Vec<Quantity>,
}

#[derive(Debug, Args)]
struct StandardArgs {
    #[arg(long)]
    thru: PathBuf,
    #[arg(long)]
    line: PathBuf,
    /// Reflect measured at port 1 (read from S11).
    #[arg(long)]
    reflect1: PathBuf,
    /// Reflect measured at port 2 (read from S22).
    #[arg(long)]
    reflect2: PathBuf,
    /// Approximate electrical delay of the line relative to the thru.
    #[arg(long, value_parser = parse_time, default_value = "0")]
    line_delay: f64,
    /// Offset delay of the nominal offset-short reflect.
    #[arg(long, value_parser = parse_time, default_value = "0")]
    reflect_offset: f64,
    /// Characteristic impedance of the line in ohms.
    #[arg(long, default_value_t = 50.0)]
    z_line: f64,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    standards: StandardArgs,
    /// Raw DUT measurement; repeatable.
    #[arg(long)]
    dut: Vec<PathBuf>,
    /// Degenerate-line guard angle in degrees.
    #[arg(long, default_value_t = DEFAULT_GUARD_DEG)]
    guard: f64,
    /// Renormalize calibrated DUTs to this real impedance (ohms).
    #[arg(long)]
    renormalize: Option<f64>,
    #[arg(long, value_parser = value_format, default_value = "RI")]
    format: ValueFormat,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DeembedArgs {
    /// Error model JSON written by `calibrate`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dut: PathBuf,
    #[arg(long, short, default_value = "-")]
    output: String,
    #[arg(long)]
    renormalize: Option<f64>,
    #[arg(long, value_parser = value_format, default_value = "RI")]
    format: ValueFormat,
}

#[derive(Debug, Args)]
struct GainArgs {
    #[arg(long)]
    on: PathBuf,
    #[arg(long)]
    off: PathBuf,
    #[command(flatten)]
    band: BandArgs,
    /// Also write the per-frequency gain as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GainMapArgs {
    /// JSON manifest listing the pump-off file and the pump-on sweeps.
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    band: BandArgs,
    #[arg(long, short, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Band-averaged linear |S11| with the pump off.
    #[arg(long, requires = "s22", conflicts_with = "off")]
    s11: Option<f64>,
    /// Band-averaged linear |S22| with the pump off.
    #[arg(long, requires = "s11", conflicts_with = "off")]
    s22: Option<f64>,
    /// Insertion loss in dB; from an `--off` file it defaults to the band-averaged -|S21| in dB.
    #[arg(long)]
    il: Option<f64>,
    /// Pump-off measurement to average instead of `--s11/--s22`.
    #[arg(long)]
    off: Option<PathBuf>,
    #[command(flatten)]
    band: BandArgs,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Port-1 reflection coefficient.
    #[arg(long)]
    r: f64,
    /// Port-2 reflection coefficient; defaults to `--r`.
    #[arg(long)]
    r2: Option<f64>,
    /// Gains in dB as START:STOP:STEP or a comma list.
    #[arg(long, value_parser = parse_values)]
    gains: ::std::vec::Vec<f64>,
    /// Device insertion loss in dB; sets the 0 dB reference to `10^(-IL/20)`.
    #[arg(long, default_value_t = 0.0)]
    insertion_loss: f64,
    /// Port transmission for the loss-adjusted model; lossless when omitted.
    #[arg(long)]
    port_transmission: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    to: OutputKind,
}

#[derive(Debug, Args)]
struct CompressionArgs {
    /// JSON manifest of (signal power, pump-on, pump-off) files.
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    band: BandArgs,
    #[arg(long, short, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = value_format, default_value = "RI")]
    format: ValueFormat,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    standards: StandardArgs,
    /// Exit with a numerical failure when the largest residual exceeds this.
    #[arg(long)]
    max_residual: Option<f64>,
}

/// Runs the CLI on real stdio and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with_io(args, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI against the given streams; `args[0]` is the program name.
pub fn run_with_io<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                ErrorKind::InvalidValue | ErrorKind::ValueValidation => EXIT_INVALID,
                _ => EXIT_USAGE,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let mut io = Io { stdin, stdout };
    match dispatch(&cli, &mut io) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Io<'_> {
    fn emit(&mut self, target: &str, contents: &str) -> Result<(), CliError> {
        if target == "-" {
            self.stdout
                .write_all(contents.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        } else {
            write_file(Path::new(target), contents)
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String, CliError> {
    String::from_utf8(bytes).map_err(|_| CliError::Invalid(format!("{}: not valid UTF-8", path.display())))
}

fn load_network(path: &Path, role: &str, report: &mut Report) -> Result<NetworkData, CliError> {
    let bytes = read_bytes(path)?;
    report.input(role, path.display().to_string(), &bytes);
    let text = utf8(path, bytes)?;
    parse_touchstone(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path, role: &str, report: &mut Report) -> Result<T, CliError> {
    let bytes = read_bytes(path)?;
    report.input(role, path.display().to_string(), &bytes);
    serde_json::from_slice(&bytes).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn to_json_string<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn real_impedance(ohms: f64) -> Result<Complex64, CliError> {
    if ohms.is_finite() && ohms > 0.0 {
        Ok(Complex64::new(ohms, 0.0))
    } else {
        Err(CliError::Invalid(format!("impedance must be a positive number of ohms, got {ohms}")))
    }
}

fn dispatch(cli: &Cli, io: &mut Io<'_>) -> Result<(), CliError> {
    let report = match &cli.command {
        Command::Convert(a) => convert(a, io)?,
        Command::Calibrate(a) => calibrate(a)?,
        Command::Deembed(a) => deembed_cmd(a, io)?,
        Command::Gain(a) => gain(a, io)?,
        Command::Gainmap(a) => gainmap(a, io)?,
        Command::FitReflection(a) => fit_reflection(a, io)?,
        Command::PredictReflection(a) => predict_reflection(a, io)?,
        Command::Compression(a) => compression(a, io)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Verify(a) => verify(a, io)?,
    };
    if let Some(path) = &cli.report {
        write_file(path, &report.to_json())?;
    }
    Ok(())
}

fn convert(a: &ConvertArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("convert");
    let bytes = if a.input == "-" {
        let mut buf = Vec::new();
        io.stdin.read_to_end(&mut buf).map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
        buf
    } else {
        read_bytes(Path::new(&a.input))?
    };
    report.input("input", &a.input, &bytes);
    let net = parse_touchstone(&utf8(Path::new(&a.input), bytes)?)?;
    let quantities = if a.quantities.is_empty() { Quantity::all_db_phase() } else { a.quantities.clone() };
    let out = match a.to {
        OutputKind::Touchstone => write_touchstone(&net, a.format),
        OutputKind::Csv => export_csv(&net, &quantities),
        OutputKind::Json => to_json_string(&export_json(&net, &quantities)),
    };
    io.emit(&a.output, &out)?;
    report.parameters = json!({
        "to": format!("{:?}", a.to).to_lowercase(),
        "format": a.format.to_string(),
        "quantities": quantities.iter().map(Quantity::column_name).collect::<Vec<_>>(),
    });
    report.result = json!({ "points": net.len(), "output_sha256": sha256_hex(out.as_bytes()) });
    Ok(report)
}

/// Reads the four standard files into a [`TrlStandardSet`].
fn load_standards(a: &StandardArgs, report: &mut Report) -> Result<TrlStandardSet, CliError> {
    let raw_thru = load_network(&a.thru, "thru", report)?;
    let raw_line = load_network(&a.line, "line", report)?;
    let r1 = load_network(&a.reflect1, "reflect1", report)?;
    let r2 = load_network(&a.reflect2, "reflect2", report)?;
    for (name, n) in [("line", &raw_line), ("reflect1", &r1), ("reflect2", &r2)] {
        if !raw_thru.same_grid(n) {
            return Err(CliError::Invalid(format!("{name} frequency grid differs from thru")));
        }
    }
    Ok(TrlStandardSet {
        raw_reflect_p1: r1.s().iter().map(|m| m.s11).collect(),
        raw_reflect_p2: r2.s().iter().map(|m| m.s22).collect(),
        raw_thru,
        raw_line,
        reflect_nominal: ReflectNominal::OffsetShort { offset_delay_s: a.reflect_offset },
        line_delay_nominal: a.line_delay,
        line_impedance: real_impedance(a.z_line)?,
    })
}

fn standards_json(a: &StandardArgs) -> Value {
    json!({
        "line_delay_s": a.line_delay,
        "reflect_offset_s": a.reflect_offset,
        "z_line_ohm": a.z_line,
    })
}

/// Output name of a calibrated DUT: `<stem>_cal.s2p`.
pub fn calibrated_file_name(dut: &Path) -> String {
    let stem = dut.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dut".into());
    format!("{stem}_cal.s2p")
}

fn calibrate(a: &CalibrateArgs) -> Result<Report, CliError> {
    let mut report = Report::new("calibrate");
    let std = load_standards(&a.standards, &mut report)?;
    let opts = TrlOptions { guard_deg: a.guard, ..TrlOptions::default() };
    let em = solve_trl_with(&std, &opts)?;
    let residuals = verify_calibration(&em, &std)?;
    let valid = line_phase_validity(&em, a.guard);
    let z_out = a.renormalize.map(real_impedance).transpose()?;

    let mut outputs = Vec::new();
    for path in &a.dut {
        let raw = load_network(path, "dut", &mut report)?;
        let mut cal = deembed(&em, &raw)?.dut;
        if let Some(z) = z_out {
            cal = renormalize(&cal, z)?;
        }
        let name = calibrated_file_name(path);
        if outputs.iter().any(|(n, _)| *n == name) {
            return Err(CliError::Invalid(format!("two DUT files map to the same output {name}")));
        }
        outputs.push((name, write_touchstone(&cal, a.format)));
    }

    fs::create_dir_all(&a.out).map_err(|source| CliError::Io { path: a.out.display().to_string(), source })?;
    let diagnostics = json!({
        "verification": residuals,
        "solver_residuals": em.residuals,
        "flags": em.flags,
        "line_phase_valid": valid,
    });
    outputs.push(("error_model.json".into(), to_json_string(&em)));
    outputs.push(("diagnostics.json".into(), to_json_string(&diagnostics)));
    for (name, contents) in &outputs {
        write_file(&a.out.join(name), contents)?;
    }

    report.parameters = json!({
        "standards": standards_json(&a.standards),
        "guard_deg": a.guard,
        "renormalize_ohm": a.renormalize,
        "format": a.format.to_string(),
    });
    report.result = json!({
        "outputs": outputs.iter().map(|(n, c)| json!({ "file": n, "sha256": sha256_hex(c.as_bytes()) })).collect::<Vec<_>>(),
        "max_residual": residuals.max,
        "rms_residual": residuals.rms,
        "near_degenerate_points": em.flags.iter().filter(|f| f.near_degenerate_line).count(),
    });
    write_file(&a.out.join("report.json"), &report.to_json())?;
    Ok(report)
}

fn deembed_cmd(a: &DeembedArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("deembed");
    let em: ErrorModel = load_json(&a.model, "model", &mut report)?;
    let raw = load_network(&a.dut, "dut", &mut report)?;
    let mut cal = deembed(&em, &raw)?.dut;
    if let Some(z) = a.renormalize {
        cal = renormalize(&cal, real_impedance(z)?)?;
    }
    let out = write_touchstone(&cal, a.format);
    io.emit(&a.output, &out)?;
    report.parameters = json!({ "renormalize_ohm": a.renormalize, "format": a.format.to_string() });
    report.result = json!({ "output_sha256": sha256_hex(out.as_bytes()) });
    Ok(report)
}

fn gain(a: &GainArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("gain");
    let band = a.band.resolve(Band::amplifier_band())?;
    let on = load_network(&a.on, "pump_on", &mut report)?;
    let off = load_network(&a.off, "pump_off", &mut report)?;
    let trace = extract_gain(&on, &off)?;
    let avg = trace.band_average(&band)?;
    io.emit("-", &format!("{avg}\n"))?;
    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["freq_hz", "gain_db"]).expect("in-memory write");
        for (f, g) in trace.frequencies.iter().zip(&trace.gain_db) {
            w.write_record([f.to_string(), g.to_string()]).expect("in-memory write");
        }
        let text = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output");
        write_file(path, &text)?;
    }
    report.parameters = json!({ "band": band_json(&band) });
    report.result = json!({
        "avg_gain_db": avg,
        "zero_denominator_points": trace.zero_denominator.iter().filter(|z| **z).count(),
    });
    Ok(report)
}

/// Frequency given either as a number of Hz or as a unit-suffixed string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencyValue {
    Hz(f64),
    Text(String),
}

impl FrequencyValue {
    pub fn hz(&self) -> Result<f64, CliError> {
        match self {
            FrequencyValue::Hz(v) => Ok(*v),
            FrequencyValue::Text(s) => parse_frequency(s).map_err(CliError::Invalid),
        }
    }
}

/// `gainmap` manifest. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMapManifest {
    pub pump_off: PathBuf,
    pub sweeps: Vec<GainMapEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMapEntry {
    pub pump_freq: FrequencyValue,
    pub pump_power_dbm: f64,
    pub file: PathBuf,
}

/// `compression` manifest. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionManifest {
    pub sweeps: Vec<CompressionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionEntry {
    pub signal_power_dbm: f64,
    pub on: PathBuf,
    pub off: PathBuf,
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn gainmap(a: &GainMapArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("gainmap");
    let band = a.band.resolve(Band::amplifier_band())?;
    let manifest: GainMapManifest = load_json(&a.manifest, "manifest", &mut report)?;
    let dir = manifest_dir(&a.manifest);
    let off = load_network(&dir.join(&manifest.pump_off), "pump_off", &mut report)?;
    let sweeps = manifest
        .sweeps
        .iter()
        .map(|s| {
            Ok(PumpSweep {
                pump_freq: s.pump_freq.hz()?,
                pump_power: s.pump_power_dbm,
                pump_on: load_network(&dir.join(&s.file), "pump_on", &mut report)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let map = build_gain_map(&sweeps, &off, &band)?;
    io.emit(&a.output, &map.to_csv())?;
    report.parameters = json!({ "band": band_json(&band) });
    report.result = json!({ "map": map, "argmax": map.argmax() });
    Ok(report)
}

fn fit_reflection(a: &FitArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("fit-reflection");
    let (s11, s22, il, band) = match (&a.off, a.s11, a.s22) {
        (Some(path), _, _) => {
            let band = a.band.resolve(Band::amplifier_band())?;
            let off = load_network(path, "pump_off", &mut report)?;
            let s11 = band_average(&off, SParam::S11, &band, Scale::Linear)?;
            let s22 = band_average(&off, SParam::S22, &band, Scale::Linear)?;
            let il = match a.il {
                Some(il) => il,
                None => -band_average(&off, SParam::S21, &band, Scale::Db)?,
            };
            (s11, s22, il, Some(band))
        }
        (None, Some(s11), Some(s22)) => {
            let il = a.il.ok_or_else(|| CliError::Invalid("--il is required with --s11/--s22".into()))?;
            (s11, s22, il, None)
        }
        _ => return Err(CliError::Invalid("give either --off FILE or --s11, --s22 and --il".into())),
    };
    let fit = fit_reflection_from_pump_off(s11, s22, il)?;
    io.emit("-", &to_json_string(&fit))?;
    report.parameters = json!({
        "s11_avg": s11,
        "s22_avg": s22,
        "insertion_loss_db": il,
        "band": band.as_ref().map(band_json),
    });
    report.result = serde_json::to_value(&fit).expect("serializable");
    Ok(report)
}

/// Model used by `predict-reflection`.
pub fn prediction_model(
    r1: f64,
    r2: f64,
    insertion_loss_db: f64,
    port_transmission: Option<f64>,
) -> Result<ReflectionModel, TwpaError> {
    if !(insertion_loss_db.is_finite() && insertion_loss_db >= 0.0) {
        return Err(TwpaError::InvalidInput(format!("insertion loss must be >= 0 dB, got {insertion_loss_db}")));
    }
    let g_ref = 10f64.powf(-insertion_loss_db / 20.0);
    match port_transmission {
        Some(t) => ReflectionModel::lossy(r1, r2, g_ref, t),
        None => ReflectionModel::lossless(r1, r2, g_ref),
    }
}

fn predict_reflection(a: &PredictArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("predict-reflection");
    if a.gains.is_empty() {
        return Err(CliError::Invalid("--gains is required".into()));
    }
    let r2 = a.r2.unwrap_or(a.r);
    let model = prediction_model(a.r, r2, a.insertion_loss, a.port_transmission)?;
    let rows = predict_reflection_vs_gain(&model, &a.gains)?;
    let out = match a.to {
        OutputKind::Json => to_json_string(&rows),
        _ => prediction_csv(&rows),
    };
    io.emit("-", &out)?;
    report.parameters = json!({
        "r1": a.r,
        "r2": r2,
        "insertion_loss_db": a.insertion_loss,
        "port_transmission": a.port_transmission,
        "gains_db": a.gains,
    });
    report.result = json!({ "model": model, "rows": rows });
    Ok(report)
}

fn compression(a: &CompressionArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("compression");
    let band = a.band.resolve(Band::compression_band())?;
    let manifest: CompressionManifest = load_json(&a.manifest, "manifest", &mut report)?;
    let dir = manifest_dir(&a.manifest);
    let sweeps = manifest
        .sweeps
        .iter()
        .map(|s| {
            Ok(SignalSweep {
                signal_power: s.signal_power_dbm,
                pump_on: load_network(&dir.join(&s.on), "pump_on", &mut report)?,
                pump_off: load_network(&dir.join(&s.off), "pump_off", &mut report)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let points = compression_curve(&sweeps, &band)?;
    io.emit(&a.output, &compression_csv(&points))?;
    report.parameters = json!({ "band": band_json(&band) });
    report.result = json!({ "points": points });
    Ok(report)
}

fn simulate(a: &SimulateArgs) -> Result<Report, CliError> {
    let mut report = Report::new("simulate");
    let scenario: ScenarioFile = load_json(&a.config, "config", &mut report)?;
    let dataset = scenario.run()?;
    let files = dataset.files()?;
    fs::create_dir_all(&a.out).map_err(|source| CliError::Io { path: a.out.display().to_string(), source })?;
    let mut written = Vec::new();
    for (name, net) in &files {
        let text = write_touchstone(net, a.format);
        write_file(&a.out.join(name), &text)?;
        written.push(json!({ "file": name, "sha256": sha256_hex(text.as_bytes()) }));
    }
    report.parameters = json!({ "format": a.format.to_string() });
    report.result = json!({
        "outputs": written,
        "line_delay_nominal_s": dataset.standards.line_delay_nominal,
        "reflect_nominal": dataset.standards.reflect_nominal,
    });
    write_file(&a.out.join("report.json"), &report.to_json())?;
    Ok(report)
}

fn verify(a: &VerifyArgs, io: &mut Io<'_>) -> Result<Report, CliError> {
    let mut report = Report::new("verify");
    let em: ErrorModel = load_json(&a.model, "model", &mut report)?;
    let std = load_standards(&a.standards, &mut report)?;
    let residuals = verify_calibration(&em, &std)?;
    io.emit("-", &to_json_string(&residuals))?;
    report.parameters = json!({ "standards": standards_json(&a.standards), "max_residual": a.max_residual });
    report.result = json!({ "max": residuals.max, "rms": residuals.rms });
    if let Some(limit) = a.max_residual {
        if !(residuals.max <= limit) {
            return Err(CliError::Numerical(format!("largest residual {} exceeds {limit}", residuals.max)));
        }
    }
    Ok(report)
}
