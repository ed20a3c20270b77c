//! Fabry-Perot reflection model of an amplifier between two imperfect ports,
//! gain extraction and band-averaged amplifier metrics.
//!
//! A wave entering port 1 is partly reflected (`r1`), partly transmitted
//! (`t1`), amplified by the voltage gain `g` on its way to port 2, and then
//! bounces between the ports. Summing the bounces gives the apparent port-1
//! reflection
//!
//! ```text
//! V_out / V_in = r1 + t1^2 g r2 / (1 - g r2 r1)
//! ```
//!
//! with port 2 obtained by swapping the subscripts. The series converges only
//! while `|g r1 r2| < 1`.
//!
//! Gain convention: `g` is the absolute voltage gain through the device. A
//! measured on/off gain `G` (dB) maps to `g = g_ref * 10^(G/20)` where
//! `g_ref` is the model's own `g`, so a model fitted to pump-off data
//! (`g = 10^(-IL/20)`) reproduces the pump-off reflection at `G = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{band_average, band_mean, mag_to_db, Band, NetworkData, NetworkError, SParam, Scale};

/// Bisection stops once the bracket is narrower than this.
pub const FIT_TOLERANCE: f64 = 1e-12;
const FIT_SCAN_INTERVALS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwpaError {
    #[error("invalid reflection model: {0}")]
    InvalidModel(String),
    #[error("geometric series diverges: |g r1 r2| = {loop_gain} >= 1{}", critical_gain_db.map(|g| format!(" (critical gain {g:.3} dB)")).unwrap_or_default())]
    DivergentSeries { loop_gain: f64, critical_gain_db: Option<f64> },
    #[error("no reflection coefficient in [0, 1) reproduces {target}")]
    NoRootInUnitInterval { target: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frequency grids differ")]
    GridMismatch,
    #[error("sweep grids are inconsistent: {0}")]
    InconsistentGrids(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Port {
    One,
    Two,
}

/// Scalar parameters of the reflection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionModel {
    pub r1: f64,
    pub r2: f64,
    pub t1: f64,
    pub t2: f64,
    /// Linear voltage gain through the device.
    pub g: f64,
}

impl ReflectionModel {
    pub fn new(r1: f64, r2: f64, t1: f64, t2: f64, g: f64) -> Result<Self, TwpaError> {
        for (name, v) in [("r1", r1), ("r2", r2), ("t1", t1), ("t2", t2), ("g", g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(TwpaError::InvalidModel(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { r1, r2, t1, t2, g })
    }

    /// Lossless ports: `t_i^2 + r_i^2 = 1`.
    pub fn lossless(r1: f64, r2: f64, g: f64) -> Result<Self, TwpaError> {
        if !(0.0..=1.0).contains(&r1) || !(0.0..=1.0).contains(&r2) {
            return Err(TwpaError::InvalidModel(format!("lossless ports need r in [0, 1], got {r1}, {r2}")));
        }
        Self::new(r1, r2, (1.0 - r1 * r1).sqrt(), (1.0 - r2 * r2).sqrt(), g)
    }

    /// Ports with extra loss: `t_i^2 = port_transmission * (1 - r_i^2)`.
    pub fn lossy(r1: f64, r2: f64, g: f64, port_transmission: f64) -> Result<Self, TwpaError> {
        if !(0.0..=1.0).contains(&port_transmission) {
            return Err(TwpaError::InvalidModel("port power transmission must lie in [0, 1]".into()));
        }
        let m = Self::lossless(r1, r2, g)?;
        let k = port_transmission.sqrt();
        Self::new(r1, r2, m.t1 * k, m.t2 * k, g)
    }

    pub fn with_gain(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    pub fn loop_gain(&self) -> f64 {
        (self.g * self.r1 * self.r2).abs()
    }

    pub fn is_stable(&self) -> bool {
        self.loop_gain() < 1.0
    }
}

/// Apparent reflection `V_out / V_in` at `port`.
pub fn eval_reflection(model: &ReflectionModel, port: Port) -> Result<f64, TwpaError> {
    let loop_gain = model.loop_gain();
    if !(loop_gain < 1.0) {
        return Err(TwpaError::DivergentSeries { loop_gain, critical_gain_db: None });
    }
    let (ra, rb, ta) = match port {
        Port::One => (model.r1, model.r2, model.t1),
        Port::Two => (model.r2, model.r1, model.t2),
    };
    Ok(ra + ta * ta * model.g * rb / (1.0 - model.g * rb * ra))
}

/// Complex-valued forward evaluation, e.g. with phased reflections.
pub fn eval_reflection_complex(
    r1: Complex64,
    r2: Complex64,
    t1: Complex64,
    t2: Complex64,
    g: Complex64,
    port: Port,
) -> Result<Complex64, TwpaError> {
    let loop_gain = (g * r1 * r2).norm();
    if !(loop_gain < 1.0) {
        return Err(TwpaError::DivergentSeries { loop_gain, critical_gain_db: None });
    }
    let (ra, rb, ta) = match port {
        Port::One => (r1, r2, t1),
        Port::Two => (r2, r1, t2),
    };
    Ok(ra + ta * ta * g * rb / (1.0 - g * rb * ra))
}

/// Result of fitting the symmetric lossless model to pump-off averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionFit {
    pub model: ReflectionModel,
    /// Reflection the fit reproduces: mean of the two port averages.
    pub target: f64,
    /// Every root found in [0, 1), ascending; the model uses the first.
    pub roots: Vec<f64>,
    /// Single-port fits, for diagnostics.
    pub r_from_s11: Option<f64>,
    pub r_from_s22: Option<f64>,
}

fn symmetric_reflection(r: f64, g: f64) -> f64 {
    r + (1.0 - r * r) * g * r / (1.0 - g * r * r)
}

fn bisect(mut lo: f64, mut hi: f64, h: impl Fn(f64) -> f64) -> f64 {
    let mut h_lo = h(lo);
    while hi - lo > FIT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let h_mid = h(mid);
        if h_mid == 0.0 {
            return mid;
        }
        if (h_mid < 0.0) == (h_lo < 0.0) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All `r` in [0, 1) with `symmetric_reflection(r, g) == target`, ascending.
fn symmetric_roots(target: f64, g: f64) -> Vec<f64> {
    let h = |r: f64| symmetric_reflection(r, g) - target;
    let upper = 1.0 - 1e-12;
    let mut roots = Vec::new();
    let mut prev_r = 0.0;
    let mut prev_h = h(0.0);
    if prev_h == 0.0 {
        roots.push(0.0);
    }
    for i in 1..=FIT_SCAN_INTERVALS {
        let r = upper * i as f64 / FIT_SCAN_INTERVALS as f64;
        let hr = h(r);
        if !hr.is_finite() {
            break;
        }
        if hr == 0.0 {
            roots.push(r);
        } else if prev_h != 0.0 && (hr < 0.0) != (prev_h < 0.0) {
            roots.push(bisect(prev_r, r, h));
        }
        prev_r = r;
        prev_h = hr;
    }
    roots
}

/// Fits `r1 = r2 = r` (lossless ports) to the mean pump-off port reflection,
/// with the device "gain" set to its insertion loss, `g = 10^(-IL/20)`.
pub fn fit_reflection_from_pump_off(
    s11_avg: f64,
    s22_avg: f64,
    insertion_loss_db: f64,
) -> Result<ReflectionFit, TwpaError> {
    for (name, v) in [("s11_avg", s11_avg), ("s22_avg", s22_avg)] {
        if !(v.is_finite() && (0.0..1.0).contains(&v)) {
            return Err(TwpaError::InvalidInput(format!("{name} must lie in [0, 1), got {v}")));
        }
    }
    if !(insertion_loss_db.is_finite() && insertion_loss_db >= 0.0) {
        return Err(TwpaError::InvalidInput(format!("insertion loss must be >= 0 dB, got {insertion_loss_db}")));
    }
    let g = 10f64.powf(-insertion_loss_db / 20.0);
    let target = 0.5 * (s11_avg + s22_avg);
    let roots = symmetric_roots(target, g);
    let r = *roots.first().ok_or(TwpaError::NoRootInUnitInterval { target })?;
    let single = |v: f64| symmetric_roots(v, g).first().copied();
    Ok(ReflectionFit {
        model: ReflectionModel::lossless(r, r, g)?,
        target,
        roots,
        r_from_s11: single(s11_avg),
        r_from_s22: single(s22_avg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionPrediction {
    pub gain_db: f64,
    pub s11_db: f64,
    pub s22_db: f64,
}

/// On/off gain (dB) at which `|g r1 r2|` reaches 1 for reference gain `model.g`.
pub fn critical_gain_db(model: &ReflectionModel) -> f64 {
    -20.0 * (model.g * model.r1 * model.r2).log10()
}

/// Port reflections (dB) for each on/off gain, using `g = model.g * 10^(G/20)`.
pub fn predict_reflection_vs_gain(
    model: &ReflectionModel,
    gains_db: &[f64],
) -> Result<Vec<ReflectionPrediction>, TwpaError> {
    gains_db
        .iter()
        .map(|&gain_db| {
            let m = model.with_gain(model.g * 10f64.powf(gain_db / 20.0));
            let eval = |port| {
                eval_reflection(&m, port).map_err(|e| match e {
                    TwpaError::DivergentSeries { loop_gain, .. } => {
                        TwpaError::DivergentSeries { loop_gain, critical_gain_db: Some(critical_gain_db(model)) }
                    }
                    other => other,
                })
            };
            Ok(ReflectionPrediction {
                gain_db,
                s11_db: mag_to_db(eval(Port::One)?),
                s22_db: mag_to_db(eval(Port::Two)?),
            })
        })
        .collect()
}

/// Per-frequency on/off gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTrace {
    pub frequencies: Vec<f64>,
    /// `20 log10|S21_on| - 20 log10|S21_off|`; NaN where flagged.
    pub gain_db: Vec<f64>,
    /// `|S21_off| = 0` at this point.
    pub zero_denominator: Vec<bool>,
}

impl GainTrace {
    pub fn band_average(&self, band: &Band) -> Result<f64, TwpaError> {
        Ok(band_mean(&self.frequencies, &self.gain_db, band)?)
    }
}

pub fn extract_gain(pump_on: &NetworkData, pump_off: &NetworkData) -> Result<GainTrace, TwpaError> {
    if !pump_on.same_grid(pump_off) {
        return Err(TwpaError::GridMismatch);
    }
    let mut gain_db = Vec::with_capacity(pump_on.len());
    let mut zero_denominator = Vec::with_capacity(pump_on.len());
    for (on, off) in pump_on.s().iter().zip(pump_off.s()) {
        let off_mag = off.s21.norm();
        if off_mag == 0.0 {
            gain_db.push(f64::NAN);
            zero_denominator.push(true);
        } else {
            gain_db.push(mag_to_db(on.s21.norm()) - mag_to_db(off_mag));
            zero_denominator.push(false);
        }
    }
    Ok(GainTrace { frequencies: pump_on.frequencies().to_vec(), gain_db, zero_denominator })
}

/// One pump setting and the pump-on measurement taken with it.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSweep {
    pub pump_freq: f64,
    pub pump_power: f64,
    pub pump_on: NetworkData,
}

/// Band-averaged gain (dB) on a pump power x pump frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainMap {
    /// Ascending, Hz.
    pub pump_frequencies: Vec<f64>,
    /// Ascending, dBm at the generator.
    pub pump_powers: Vec<f64>,
    /// `avg_gain[power_index][frequency_index]`, `None` where not measured.
    pub avg_gain: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMapCell {
    pub pump_freq_hz: f64,
    pub pump_power_dbm: f64,
    pub gain_db: f64,
}

impl GainMap {
    pub fn get(&self, pump_freq: f64, pump_power: f64) -> Option<f64> {
        let j = self.pump_frequencies.iter().position(|&f| f == pump_freq)?;
        let i = self.pump_powers.iter().position(|&p| p == pump_power)?;
        self.avg_gain[i][j]
    }

    /// Measured cells, power-major then frequency.
    pub fn cells(&self) -> Vec<GainMapCell> {
        let mut out = Vec::new();
        for (i, &p) in self.pump_powers.iter().enumerate() {
            for (j, &f) in self.pump_frequencies.iter().enumerate() {
                if let Some(g) = self.avg_gain[i][j] {
                    out.push(GainMapCell { pump_freq_hz: f, pump_power_dbm: p, gain_db: g });
                }
            }
        }
        out
    }

    /// Cell with the largest gain; ties go to the first in [`cells`](Self::cells) order.
    pub fn argmax(&self) -> Option<GainMapCell> {
        self.cells().into_iter().fold(None, |best: Option<GainMapCell>, c| match best {
            Some(b) if b.gain_db >= c.gain_db => Some(b),
            _ => Some(c),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["pump_freq_hz", "pump_power_dbm", "gain_db"]).expect("in-memory write");
        for c in self.cells() {
            w.write_record([c.pump_freq_hz.to_string(), c.pump_power_dbm.to_string(), c.gain_db.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn build_gain_map(sweeps: &[PumpSweep], pump_off: &NetworkData, band: &Band) -> Result<GainMap, TwpaError> {
    let pump_frequencies = sorted_unique(sweeps.iter().map(|s| s.pump_freq));
    let pump_powers = sorted_unique(sweeps.iter().map(|s| s.pump_power));
    if pump_frequencies.iter().chain(&pump_powers).any(|v| !v.is_finite()) {
        return Err(TwpaError::InvalidInput("pump settings must be finite".into()));
    }
    let mut avg_gain = vec![vec![None; pump_frequencies.len()]; pump_powers.len()];
    for s in sweeps {
        if !s.pump_on.same_grid(pump_off) {
            return Err(TwpaError::InconsistentGrids(format!(
                "sweep at {} Hz / {} dBm is not on the pump-off grid",
                s.pump_freq, s.pump_power
            )));
        }
        let j = pump_frequencies.binary_search_by(|f| f.total_cmp(&s.pump_freq)).expect("axis value");
        let i = pump_powers.binary_search_by(|p| p.total_cmp(&s.pump_power)).expect("axis value");
        if avg_gain[i][j].is_some() {
            return Err(TwpaError::InconsistentGrids(format!(
                "duplicate sweep at {} Hz / {} dBm",
                s.pump_freq, s.pump_power
            )));
        }
        avg_gain[i][j] = Some(extract_gain(&s.pump_on, pump_off)?.band_average(band)?);
    }
    Ok(GainMap { pump_frequencies, pump_powers, avg_gain })
}

/// Pump-on and pump-off measurements at one signal power.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSweep {
    pub signal_power: f64,
    pub pump_on: NetworkData,
    pub pump_off: NetworkData,
}

/// Band-averaged metrics (dB) at one signal power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionPoint {
    pub signal_power: f64,
    pub avg_gain_db: f64,
    pub avg_s11_db: f64,
    pub avg_s22_db: f64,
    pub avg_s12_db: f64,
}

pub fn compression_curve(sweeps: &[SignalSweep], band: &Band) -> Result<Vec<CompressionPoint>, TwpaError> {
    sweeps
        .iter()
        .map(|s| {
            let gain = extract_gain(&s.pump_on, &s.pump_off)?;
            Ok(CompressionPoint {
                signal_power: s.signal_power,
                avg_gain_db: gain.band_average(band)?,
                avg_s11_db: band_average(&s.pump_on, SParam::S11, band, Scale::Db)?,
                avg_s22_db: band_average(&s.pump_on, SParam::S22, band, Scale::Db)?,
                avg_s12_db: band_average(&s.pump_on, SParam::S12, band, Scale::Db)?,
            })
        })
        .collect()
}

pub fn prediction_csv(rows: &[ReflectionPrediction]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["gain_db", "s11_db", "s22_db"]).expect("in-memory write");
    for p in rows {
        w.write_record([p.gain_db, p.s11_db, p.s22_db].map(|v| v.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn compression_csv(points: &[CompressionPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["signal_power_dbm", "avg_gain_db", "avg_s11_db", "avg_s22_db", "avg_s12_db"])
        .expect("in-memory write");
    for p in points {
        w.write_record(
            [p.signal_power, p.avg_gain_db, p.avg_s11_db, p.avg_s22_db, p.avg_s12_db].map(|v| v.to_string()),
        )
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{linear_grid, TwoPortS};

    /// Follows the wave bounce by bounce and adds up what leaves port 1.
    fn bounce_sum(m: &ReflectionModel, port: Port, bounces: usize) -> f64 {
        let (ra, rb, ta) = match port {
            Port::One => (m.r1, m.r2, m.t1),
            Port::Two => (m.r2, m.r1, m.t2),
        };
        let mut out = ra;
        let mut inside = ta; // just entered
        for _ in 0..bounces {
            let at_far_port = inside * m.g;
            let back = at_far_port * rb;
            out += back * ta;
            inside = back * ra;
        }
        out
    }

    #[test]
    fn zero_gain_or_zero_far_reflection() {
        let m = ReflectionModel::lossless(0.3, 0.2, 0.0).unwrap();
        assert_eq!(eval_reflection(&m, Port::One).unwrap(), 0.3);
        let m = ReflectionModel::lossless(0.3, 0.0, 2.0).unwrap();
        assert_eq!(eval_reflection(&m, Port::One).unwrap(), 0.3);
    }

    #[test]
    fn unit_gain_doubles_reflection() {
        let m = ReflectionModel::lossless(0.14, 0.14, 1.0).unwrap();
        assert!((eval_reflection(&m, Port::One).unwrap() - 0.28).abs() < 1e-15);
    }

    #[test]
    fn ten_db_example_matches_bounce_sum() {
        let g = 10f64.powf(10.0 / 20.0);
        let m = ReflectionModel::lossless(0.14, 0.14, g).unwrap();
        let v = eval_reflection(&m, Port::One).unwrap();
        let oracle = bounce_sum(&m, Port::One, 60);
        assert!((v - oracle).abs() < 1e-13);
        assert!((v - 0.603).abs() < 1e-3, "{v}");
        assert!((mag_to_db(v) - (-4.4)).abs() < 0.05);
    }

    #[test]
    fn divergence_boundary() {
        let r = 0.5;
        let g_crit = 1.0 / (r * r);
        let below = ReflectionModel::lossless(r, r, g_crit * (1.0 - 1e-9)).unwrap();
        let at = ReflectionModel::lossless(r, r, g_crit).unwrap();
        let above = ReflectionModel::lossless(r, r, g_crit * (1.0 + 1e-9)).unwrap();
        assert!(eval_reflection(&below, Port::One).is_ok());
        assert!(matches!(eval_reflection(&at, Port::One), Err(TwpaError::DivergentSeries { .. })));
        assert!(matches!(eval_reflection(&above, Port::Two), Err(TwpaError::DivergentSeries { .. })));
    }

    #[test]
    fn complex_mode_agrees_with_real_mode() {
        let m = ReflectionModel::lossless(0.2, 0.1, 3.0).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        for port in [Port::One, Port::Two] {
            let z = eval_reflection_complex(c(m.r1), c(m.r2), c(m.t1), c(m.t2), c(m.g), port).unwrap();
            assert!((z.re - eval_reflection(&m, port).unwrap()).abs() < 1e-15);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn fit_recovers_forward_model() {
        let g = 10f64.powf(-3.5 / 20.0);
        let m = ReflectionModel::lossless(0.14, 0.14, g).unwrap();
        let s = eval_reflection(&m, Port::One).unwrap();
        let fit = fit_reflection_from_pump_off(s, s, 3.5).unwrap();
        assert!((fit.model.r1 - 0.14).abs() < 1e-6);
        assert_eq!(fit.model.r1, fit.model.r2);
        assert!((fit.model.t1 * fit.model.t1 + fit.model.r1 * fit.model.r1 - 1.0).abs() < 1e-15);
        assert!((fit.model.g - g).abs() < 1e-15);
        assert_eq!(fit.roots.len(), 1);
    }

    #[test]
    fn fit_of_zero_reflection() {
        let fit = fit_reflection_from_pump_off(0.0, 0.0, 3.5).unwrap();
        assert_eq!(fit.model.r1, 0.0);
    }

    #[test]
    fn fit_rejects_out_of_range() {
        assert!(matches!(fit_reflection_from_pump_off(1.2, 0.1, 3.5), Err(TwpaError::InvalidInput(_))));
        assert!(matches!(fit_reflection_from_pump_off(0.1, 0.1, -1.0), Err(TwpaError::InvalidInput(_))));
        // with g = 1 the symmetric model reaches 2r, but 0.999 needs r ~ 0.4995: fine
        assert!(fit_reflection_from_pump_off(0.999, 0.999, 0.0).is_ok());
        // with loss the reachable maximum is 1 (at r -> 1)
        assert!(matches!(
            fit_reflection_from_pump_off(0.9999999999999, 0.9999999999999, 20.0),
            Err(TwpaError::NoRootInUnitInterval { .. })
        ));
    }

    #[test]
    fn zero_db_crossing_near_15db() {
        let m = ReflectionModel::lossless(0.14, 0.14, 1.0).unwrap();
        // closed form of r + (1-r^2) g r / (1 - g r^2) = 1 is g = 1 / (r (1 + 2 r))
        let g_cross = 1.0 / (0.14 * (1.0 + 2.0 * 0.14));
        // cross-check by bisection on the model itself
        let h = |g: f64| eval_reflection(&m.with_gain(g), Port::One).unwrap() - 1.0;
        let g_bisect = bisect(1.0, 10.0, h);
        assert!((g_cross - g_bisect).abs() < 1e-9);
        assert!((g_cross - 5.58).abs() < 0.01);
        let db = 20.0 * g_cross.log10();
        assert!((db - 14.9).abs() < 0.05, "{db}");
        let pred = predict_reflection_vs_gain(&m, &[0.0]).unwrap();
        assert!((pred[0].s11_db - 20.0 * 0.28f64.log10()).abs() < 1e-12);
        assert!((pred[0].s11_db - (-11.06)).abs() < 0.01);
    }

    #[test]
    fn predicted_divergence_reports_critical_gain() {
        let m = ReflectionModel::lossless(0.14, 0.14, 1.0).unwrap();
        let err = predict_reflection_vs_gain(&m, &[40.0]).unwrap_err();
        match err {
            TwpaError::DivergentSeries { critical_gain_db: Some(g), .. } => {
                assert!((g - (-20.0 * (0.14f64 * 0.14).log10())).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_gain_limit() {
        let m = ReflectionModel::lossless(0.2, 0.1, 1.0).unwrap();
        let p = predict_reflection_vs_gain(&m, &[-400.0]).unwrap()[0];
        assert!((p.s11_db - 20.0 * 0.2f64.log10()).abs() < 1e-12);
        assert!((p.s22_db - 20.0 * 0.1f64.log10()).abs() < 1e-12);
    }

    fn flat_s21(grid: &[f64], mag: f64) -> NetworkData {
        let a = Complex64::new(mag, 0.0);
        let z = Complex64::new(0.0, 0.0);
        NetworkData::with_default_ref(grid.to_vec(), vec![TwoPortS::new(z, a, a, z); grid.len()]).unwrap()
    }

    #[test]
    fn gain_extraction() {
        let grid = linear_grid(4e9, 8e9, 11);
        let off = flat_s21(&grid, 0.3);
        let on = flat_s21(&grid, 0.6);
        let g = extract_gain(&on, &off).unwrap();
        assert!(g.gain_db.iter().all(|v| (v - 6.0206).abs() < 1e-4));
        assert!(extract_gain(&off, &off).unwrap().gain_db.iter().all(|v| *v == 0.0));
        let dead = flat_s21(&grid, 0.0);
        let g = extract_gain(&on, &dead).unwrap();
        assert!(g.zero_denominator.iter().all(|b| *b));
        let other = flat_s21(&linear_grid(4e9, 8e9, 12), 0.3);
        assert!(matches!(extract_gain(&on, &other), Err(TwpaError::GridMismatch)));
    }

    #[test]
    fn single_flat_sweep_map() {
        let grid = linear_grid(4e9, 8e9, 41);
        let off = flat_s21(&grid, 0.5);
        let on = flat_s21(&grid, 0.5 * 10f64.powf(0.5));
        let map = build_gain_map(
            &[PumpSweep { pump_freq: 5.8659e9, pump_power: -0.7, pump_on: on }],
            &off,
            &Band::amplifier_band(),
        )
        .unwrap();
        assert!((map.get(5.8659e9, -0.7).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(map.cells().len(), 1);
    }

    #[test]
    fn reported_gain_points_land_in_their_cells() {
        let grid = linear_grid(4e9, 8e9, 41);
        let off = flat_s21(&grid, 0.5);
        let points = [(5.835e9, -4.3, 4.0), (5.02e9, -1.5, 8.0), (5.875e9, -1.5, 10.0)];
        let sweeps: Vec<PumpSweep> = points
            .iter()
            .map(|&(f, p, g)| PumpSweep { pump_freq: f, pump_power: p, pump_on: flat_s21(&grid, 0.5 * 10f64.powf(g / 20.0)) })
            .collect();
        let map = build_gain_map(&sweeps, &off, &Band::amplifier_band()).unwrap();
        assert_eq!(map.pump_frequencies, vec![5.02e9, 5.835e9, 5.875e9]);
        assert_eq!(map.pump_powers, vec![-4.3, -1.5]);
        for (f, p, g) in points {
            assert!((map.get(f, p).unwrap() - g).abs() < 1e-12);
        }
        assert_eq!(map.get(5.02e9, -4.3), None);
        let best = map.argmax().unwrap();
        assert_eq!((best.pump_freq_hz, best.pump_power_dbm), (5.875e9, -1.5));
        let csv = map.to_csv();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn gain_map_rejects_inconsistent_input() {
        let grid = linear_grid(4e9, 8e9, 41);
        let off = flat_s21(&grid, 0.5);
        let on = flat_s21(&linear_grid(4e9, 8e9, 40), 1.0);
        let sweeps = [PumpSweep { pump_freq: 6e9, pump_power: 0.0, pump_on: on }];
        assert!(matches!(build_gain_map(&sweeps, &off, &Band::amplifier_band()), Err(TwpaError::InconsistentGrids(_))));
        let on = flat_s21(&grid, 1.0);
        let dup = [
            PumpSweep { pump_freq: 6e9, pump_power: 0.0, pump_on: on.clone() },
            PumpSweep { pump_freq: 6e9, pump_power: 0.0, pump_on: on },
        ];
        assert!(build_gain_map(&dup, &off, &Band::amplifier_band()).is_err());
        let outside = Band::full(1e9, 2e9).unwrap();
        let one = [PumpSweep { pump_freq: 6e9, pump_power: 0.0, pump_on: flat_s21(&grid, 1.0) }];
        assert!(matches!(
            build_gain_map(&one, &off, &outside),
            Err(TwpaError::Network(NetworkError::EmptyBand))
        ));
    }

    #[test]
    fn flat_compression_curve() {
        let grid = linear_grid(4e9, 8e9, 41);
        let off = flat_s21(&grid, 0.5);
        let on = flat_s21(&grid, 1.0);
        let sweeps: Vec<SignalSweep> = [-40.0, -30.0, -20.0]
            .iter()
            .map(|&p| SignalSweep { signal_power: p, pump_on: on.clone(), pump_off: off.clone() })
            .collect();
        let curve = compression_curve(&sweeps, &Band::compression_band()).unwrap();
        assert_eq!(curve.len(), 3);
        assert!(curve.iter().all(|c| (c.avg_gain_db - curve[0].avg_gain_db).abs() < 1e-15));
        assert!((curve[0].avg_gain_db - 6.0206).abs() < 1e-4);
        assert_eq!(compression_csv(&curve).lines().count(), 4);
    }
}
