//! Touchstone v1 two-port (`.s2p`) reader/writer and tabular export.
//!
//! The reader accepts `!` comments (full-line or trailing), a single `#`
//! option line `# <unit> S <RI|MA|DB> R <ohm>` with tokens in any order and
//! any case, and 9-column data rows ordered `f S11 S21 S12 S22`. Missing
//! option tokens take the v1 defaults (GHz, S, MA, R 50). Noise-parameter
//! blocks and Touchstone v2 keywords are rejected.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{NetworkData, NetworkError, SParam, TwoPortS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TouchstoneError {
    #[error("line {line}: malformed option line: {reason}")]
    MalformedOptionLine { line: usize, reason: String },
    #[error("line {line}: unsupported parameter kind '{kind}' (only S is supported)")]
    UnsupportedParameterKind { line: usize, kind: String },
    #[error("line {line}: frequency {freq} does not increase")]
    NonMonotonicFrequency { line: usize, freq: f64 },
    #[error("line {line}: expected 9 columns, found {found}")]
    WrongColumnCount { line: usize, found: usize },
    #[error("line {line}: invalid number '{token}'")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: noise-parameter data is not supported")]
    NoiseDataUnsupported { line: usize },
    #[error("line {line}: Touchstone v2 keyword '{keyword}' is not supported")]
    UnsupportedVersion { line: usize, keyword: String },
    #[error("no option line found")]
    MissingOptionLine,
    #[error("no data rows found")]
    EmptyData,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FreqUnit {
    Hz,
    #[serde(rename = "kHz")]
    KHz,
    #[serde(rename = "MHz")]
    MHz,
    #[default]
    #[serde(rename = "GHz")]
    GHz,
}

impl FreqUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FreqUnit::Hz => 1.0,
            FreqUnit::KHz => 1e3,
            FreqUnit::MHz => 1e6,
            FreqUnit::GHz => 1e9,
        }
    }

    fn token(self) -> &'static str {
        match self {
            FreqUnit::Hz => "Hz",
            FreqUnit::KHz => "kHz",
            FreqUnit::MHz => "MHz",
            FreqUnit::GHz => "GHz",
        }
    }

    fn parse_token(tok: &str) -> Option<Self> {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => Some(FreqUnit::Hz),
            "KHZ" => Some(FreqUnit::KHz),
            "MHZ" => Some(FreqUnit::MHz),
            "GHZ" => Some(FreqUnit::GHz),
            _ => None,
        }
    }
}

/// On-disk representation of complex values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ValueFormat {
    /// Real / imaginary.
    #[default]
    RI,
    /// Linear magnitude / angle in degrees.
    MA,
    /// 20 log10 magnitude / angle in degrees.
    DB,
}

impl ValueFormat {
    fn token(self) -> &'static str {
        match self {
            ValueFormat::RI => "RI",
            ValueFormat::MA => "MA",
            ValueFormat::DB => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            ValueFormat::RI => Complex64::new(a, b),
            ValueFormat::MA => Complex64::from_polar(a, b.to_radians()),
            ValueFormat::DB => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, z: Complex64) -> (f64, f64) {
        match self {
            ValueFormat::RI => (z.re, z.im),
            ValueFormat::MA => (z.norm(), z.arg().to_degrees()),
            ValueFormat::DB => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        }
    }
}

impl FromStr for ValueFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RI" => Ok(ValueFormat::RI),
            "MA" => Ok(ValueFormat::MA),
            "DB" => Ok(ValueFormat::DB),
            other => Err(format!("unknown value format '{other}' (expected RI, MA or DB)")),
        }
    }
}

impl fmt::Display for ValueFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Contents of the `#` option line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchstoneHeader {
    pub freq_unit: FreqUnit,
    pub value_format: ValueFormat,
    pub reference_resistance: f64,
}

impl Default for TouchstoneHeader {
    fn default() -> Self {
        Self { freq_unit: FreqUnit::GHz, value_format: ValueFormat::MA, reference_resistance: 50.0 }
    }
}

fn parse_option_line(body: &str, line: usize) -> Result<TouchstoneHeader, TouchstoneError> {
    let malformed = |reason: String| TouchstoneError::MalformedOptionLine { line, reason };
    let mut header = TouchstoneHeader::default();
    let mut tokens = body.split_whitespace();
    let (mut seen_unit, mut seen_kind, mut seen_format, mut seen_r) = (false, false, false, false);
    while let Some(tok) = tokens.next() {
        let upper = tok.to_ascii_uppercase();
        if let Some(unit) = FreqUnit::parse_token(tok) {
            if std::mem::replace(&mut seen_unit, true) {
                return Err(malformed("frequency unit given twice".into()));
            }
            header.freq_unit = unit;
        } else if let Ok(format) = upper.parse::<ValueFormat>() {
            if std::mem::replace(&mut seen_format, true) {
                return Err(malformed("value format given twice".into()));
            }
            header.value_format = format;
        } else if upper == "R" {
            if std::mem::replace(&mut seen_r, true) {
                return Err(malformed("reference resistance given twice".into()));
            }
            let value = tokens.next().ok_or_else(|| malformed("'R' without a value".into()))?;
            let r: f64 = value.parse().map_err(|_| malformed(format!("bad resistance '{value}'")))?;
            if !(r.is_finite() && r > 0.0) {
                return Err(malformed(format!("reference resistance must be > 0, got {r}")));
            }
            header.reference_resistance = r;
        } else if upper == "S" {
            if std::mem::replace(&mut seen_kind, true) {
                return Err(malformed("parameter kind given twice".into()));
            }
        } else if matches!(upper.as_str(), "Y" | "Z" | "H" | "G") {
            return Err(TouchstoneError::UnsupportedParameterKind { line, kind: tok.to_string() });
        } else {
            return Err(malformed(format!("unexpected token '{tok}'")));
        }
    }
    Ok(header)
}

/// Parses a two-port Touchstone v1 file, returning the network in Hz with complex values.
pub fn parse_touchstone(text: &str) -> Result<NetworkData, TouchstoneError> {
    parse_touchstone_with_header(text).map(|(net, _)| net)
}

/// Like [`parse_touchstone`], also returning the option line as read.
pub fn parse_touchstone_with_header(text: &str) -> Result<(NetworkData, TouchstoneHeader), TouchstoneError> {
    let mut header: Option<TouchstoneHeader> = None;
    let mut frequencies = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(body) = content.strip_prefix('#') {
            if header.is_some() {
                return Err(TouchstoneError::MalformedOptionLine { line, reason: "duplicate option line".into() });
            }
            header = Some(parse_option_line(body, line)?);
            continue;
        }
        if content.starts_with('[') {
            let keyword = content.split(']').next().unwrap_or(content).to_string() + "]";
            return Err(TouchstoneError::UnsupportedVersion { line, keyword });
        }
        let hdr = header.ok_or(TouchstoneError::MalformedOptionLine {
            line,
            reason: "data row before the option line".into(),
        })?;
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let nums = tokens
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| TouchstoneError::InvalidNumber { line, token: t.to_string() })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let freq = nums[0] * hdr.freq_unit.multiplier();
        let after_data = frequencies.last().is_some_and(|&last| freq <= last);
        if nums.len() == 5 && after_data {
            return Err(TouchstoneError::NoiseDataUnsupported { line });
        }
        if nums.len() != 9 {
            return Err(TouchstoneError::WrongColumnCount { line, found: nums.len() });
        }
        if !freq.is_finite() || freq <= 0.0 {
            return Err(TouchstoneError::InvalidNumber { line, token: tokens[0].to_string() });
        }
        if after_data {
            return Err(TouchstoneError::NonMonotonicFrequency { line, freq });
        }
        if let Some(pos) = nums[1..].iter().position(|v| v.is_nan() || v.is_infinite() && *v > 0.0) {
            return Err(TouchstoneError::InvalidNumber { line, token: tokens[pos + 1].to_string() });
        }
        let fmt = hdr.value_format;
        let m = TwoPortS::new(
            fmt.decode(nums[1], nums[2]),
            fmt.decode(nums[3], nums[4]),
            fmt.decode(nums[5], nums[6]),
            fmt.decode(nums[7], nums[8]),
        );
        if !m.is_finite() {
            return Err(TouchstoneError::InvalidNumber { line, token: content.to_string() });
        }
        frequencies.push(freq);
        values.push(m);
    }
    let header = header.ok_or(TouchstoneError::MissingOptionLine)?;
    if frequencies.is_empty() {
        return Err(TouchstoneError::EmptyData);
    }
    let net = NetworkData::new(frequencies, values, Complex64::new(header.reference_resistance, 0.0))?;
    Ok((net, header))
}

/// Writer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct WriteOptions {
    pub format: ValueFormat,
    pub freq_unit: FreqUnit,
    /// Emitted as `!` lines before the option line.
    pub comments: Vec<String>,
}

impl Default for WriteOptions {
    fn default() -> Self {
        Self { format: ValueFormat::RI, freq_unit: FreqUnit::GHz, comments: Vec::new() }
    }
}

/// Serializes `net` as a Touchstone v1 file in `format`, frequencies in GHz.
pub fn write_touchstone(net: &NetworkData, format: ValueFormat) -> String {
    write_touchstone_with(net, &WriteOptions { format, ..WriteOptions::default() })
}

/// Serializes `net` with 17 significant digits per value.
///
/// Only the real part of the reference impedance fits on the option line; a
/// non-zero imaginary part is recorded as a comment.
pub fn write_touchstone_with(net: &NetworkData, opts: &WriteOptions) -> String {
    let mut out = String::new();
    for c in &opts.comments {
        for l in c.lines() {
            let _ = writeln!(out, "! {l}");
        }
    }
    let z = net.z_ref();
    if z.im != 0.0 {
        let _ = writeln!(out, "! reference impedance imaginary part {:e} ohm dropped", z.im);
    }
    let _ = writeln!(out, "# {} S {} R {}", opts.freq_unit.token(), opts.format.token(), z.re);
    let scale = opts.freq_unit.multiplier();
    for (f, m) in net.iter() {
        let _ = write!(out, "{:.16e}", f / scale);
        for z in [m.s11, m.s21, m.s12, m.s22] {
            let (a, b) = opts.format.encode(z);
            let _ = write!(out, " {a:.16e} {b:.16e}");
        }
        out.push('\n');
    }
    out
}

/// What to emit for one S-parameter column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantityKind {
    /// `20 log10 |S|`
    Db,
    /// `|S|`
    Linear,
    /// `arg S` in degrees
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quantity {
    pub param: SParam,
    pub kind: QuantityKind,
}

impl Quantity {
    pub fn new(param: SParam, kind: QuantityKind) -> Self {
        Self { param, kind }
    }

    pub fn column_name(&self) -> String {
        let suffix = match self.kind {
            QuantityKind::Db => "db",
            QuantityKind::Linear => "mag",
            QuantityKind::Phase => "deg",
        };
        format!("{}_{}", self.param.name(), suffix)
    }

    pub fn eval(&self, m: &TwoPortS) -> f64 {
        let z = m.get(self.param);
        match self.kind {
            QuantityKind::Db => 20.0 * z.norm().log10(),
            QuantityKind::Linear => z.norm(),
            QuantityKind::Phase => z.arg().to_degrees(),
        }
    }

    /// `dB` and phase columns for all four S-parameters.
    pub fn all_db_phase() -> Vec<Quantity> {
        SParam::ALL
            .iter()
            .flat_map(|&p| [Quantity::new(p, QuantityKind::Db), Quantity::new(p, QuantityKind::Phase)])
            .collect()
    }
}

/// Accepts `s21:db`, `s11:linear` (or `mag`), `s22:phase` (or `deg`).
impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, k) = s.split_once(':').ok_or_else(|| format!("expected <sij>:<db|linear|phase>, got '{s}'"))?;
        let param: SParam = p.parse()?;
        let kind = match k.to_ascii_lowercase().as_str() {
            "db" => QuantityKind::Db,
            "linear" | "lin" | "mag" => QuantityKind::Linear,
            "phase" | "deg" => QuantityKind::Phase,
            other => return Err(format!("unknown quantity kind '{other}'")),
        };
        Ok(Quantity { param, kind })
    }
}

/// One exported record: frequency plus the requested columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub freq_hz: f64,
    pub values: Vec<f64>,
}

pub fn export_table(net: &NetworkData, quantities: &[Quantity]) -> Vec<TableRow> {
    net.iter()
        .map(|(f, m)| TableRow { freq_hz: f, values: quantities.iter().map(|q| q.eval(m)).collect() })
        .collect()
}

/// Shortest round-tripping text; infinities become `inf` / `-inf`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

pub fn export_csv(net: &NetworkData, quantities: &[Quantity]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["freq_hz".to_string()];
    header.extend(quantities.iter().map(Quantity::column_name));
    w.write_record(&header).expect("in-memory write");
    for row in export_table(net, quantities) {
        let mut rec = vec![format_number(row.freq_hz)];
        rec.extend(row.values.iter().map(|v| format_number(*v)));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// JSON number, or the text sentinel for non-finite values.
pub fn json_number(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::Value::from(v)
    } else {
        serde_json::Value::String(format_number(v))
    }
}

pub fn export_json(net: &NetworkData, quantities: &[Quantity]) -> serde_json::Value {
    let rows = export_table(net, quantities)
        .into_iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            obj.insert("freq_hz".into(), json_number(row.freq_hz));
            for (q, v) in quantities.iter().zip(&row.values) {
                obj.insert(q.column_name(), json_number(*v));
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::Value::Array(rows)
}
