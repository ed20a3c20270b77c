//! Phenomenological amplifier network for pipeline testing.
//!
//! Pump-off: reciprocal transmission following a piecewise-linear insertion
//! loss with a notch over the stop band, and port reflections given by the
//! Fabry-Perot model with the device loss as its gain. Pump-on: forward
//! transmission multiplied by a smooth gain profile, reverse transmission
//! untouched, reflections re-evaluated with the larger through gain.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::network::{db_to_mag, linear_grid, Band, NetworkData, TwoPortS};
use crate::twpa::{eval_reflection, Port, ReflectionModel};

/// Gain surface `G(f; f_p, P_p)` in dB.
///
/// A Gaussian in pump power and pump frequency around the optimum, times a
/// band shape that is zero in the stop band and rises smoothly away from its
/// edges. The shape is normalized so that at the optimum the mean gain over
/// 4-8 GHz without the stop band equals `peak_avg_gain_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GainProfile {
    pub peak_avg_gain_db: f64,
    pub optimum_pump_freq_hz: f64,
    pub optimum_pump_power_dbm: f64,
    pub pump_power_width_db: f64,
    pub pump_freq_width_hz: f64,
    /// Distance from the stop-band edges over which the gain rises.
    pub edge_width_hz: f64,
}

impl Default for GainProfile {
    fn default() -> Self {
        Self {
            peak_avg_gain_db: 11.0,
            optimum_pump_freq_hz: 5.8659e9,
            optimum_pump_power_dbm: -0.7,
            pump_power_width_db: 1.8,
            pump_freq_width_hz: 1.25e9,
            edge_width_hz: 0.15e9,
        }
    }
}

/// Pump tone settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSetting {
    pub freq_hz: f64,
    pub power_dbm: f64,
}

impl PumpSetting {
    /// Near the maximum-gain operating point.
    pub fn optimum() -> Self {
        Self { freq_hz: 5.8659e9, power_dbm: -0.7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwpaSpec {
    /// `(Hz, dB)` knots, interpolated linearly and held flat outside.
    pub insertion_loss_db: Vec<(f64, f64)>,
    pub stop_band_hz: (f64, f64),
    pub stop_band_depth_db: f64,
    /// Intrinsic port reflection `r1 = r2` of the Fabry-Perot model.
    pub match_r: f64,
    pub gain: GainProfile,
    /// Flat reverse loss; `None` makes `|S12|` track the pump-off `|S21|`.
    pub reverse_transmission_db: Option<f64>,
    /// Single-pole compression point (dBm, signal-power reference).
    pub saturation_dbm: f64,
    /// Fixed group delay assigned to the transmission phase.
    pub group_delay_s: f64,
    /// Amplitude and period of the sinusoidal reflection phase ripple.
    pub reflection_ripple_deg: f64,
    pub reflection_ripple_period_hz: f64,
}

impl Default for TwpaSpec {
    fn default() -> Self {
        Self {
            insertion_loss_db: vec![(4e9, 3.0), (8e9, 6.0)],
            stop_band_hz: (5.5e9, 6.5e9),
            stop_band_depth_db: 20.0,
            match_r: 0.14,
            gain: GainProfile::default(),
            reverse_transmission_db: None,
            saturation_dbm: -85.0,
            group_delay_s: 2e-9,
            reflection_ripple_deg: 40.0,
            reflection_ripple_period_hz: 1.3e9,
        }
    }
}

/// Default signal level, far below compression.
pub const LOW_SIGNAL_DBM: f64 = -110.0;

impl TwpaSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidSpec(m));
        if self.insertion_loss_db.is_empty() {
            return bad("insertion loss needs at least one knot".into());
        }
        if self.insertion_loss_db.windows(2).any(|w| w[1].0 <= w[0].0)
            || self.insertion_loss_db.iter().any(|(f, l)| !f.is_finite() || !l.is_finite() || *l < 0.0)
        {
            return bad("insertion loss knots must be finite, >= 0 dB and strictly increasing in frequency".into());
        }
        let (lo, hi) = self.stop_band_hz;
        if !(lo < hi) || !(self.stop_band_depth_db >= 0.0) {
            return bad("stop band must be a non-empty interval with non-negative depth".into());
        }
        if !(0.0..1.0).contains(&self.match_r) {
            return bad(format!("match_r must lie in [0, 1), got {}", self.match_r));
        }
        let g = &self.gain;
        if !(g.peak_avg_gain_db >= 0.0 && g.pump_power_width_db > 0.0 && g.pump_freq_width_hz > 0.0 && g.edge_width_hz > 0.0)
        {
            return bad("gain profile needs gain >= 0 and positive widths".into());
        }
        if let Some(r) = self.reverse_transmission_db {
            if !(r >= 0.0) {
                return bad("reverse transmission loss must be >= 0 dB".into());
            }
        }
        if !self.saturation_dbm.is_finite() || !self.group_delay_s.is_finite() {
            return bad("saturation and group delay must be finite".into());
        }
        Ok(())
    }

    pub fn insertion_loss_at(&self, f: f64) -> f64 {
        let k = &self.insertion_loss_db;
        if f <= k[0].0 {
            return k[0].1;
        }
        if f >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|&(x, _)| x < f);
        let ((f0, l0), (f1, l1)) = (k[i - 1], k[i]);
        l0 + (l1 - l0) * (f - f0) / (f1 - f0)
    }

    fn in_stop_band(&self, f: f64) -> bool {
        f > self.stop_band_hz.0 && f < self.stop_band_hz.1
    }

    /// Pump-off forward loss including the stop-band notch, dB.
    pub fn off_loss_db(&self, f: f64) -> f64 {
        self.insertion_loss_at(f) + if self.in_stop_band(f) { self.stop_band_depth_db } else { 0.0 }
    }

    fn band_shape(&self, f: f64) -> f64 {
        if self.in_stop_band(f) {
            return 0.0;
        }
        let d = (f - self.stop_band_hz.1).max(self.stop_band_hz.0 - f);
        1.0 - (-(d / self.gain.edge_width_hz).powi(2)).exp()
    }

    /// Mean band shape over 4-8 GHz without the stop band, on a dense fixed grid.
    fn shape_norm(&self) -> f64 {
        let band = Band::new(4e9, 8e9, vec![self.stop_band_hz])
            .unwrap_or_else(|_| Band::full(4e9, 8e9).expect("static band"));
        let grid = linear_grid(4e9, 8e9, 4001);
        let (sum, n) = grid
            .iter()
            .filter(|&&f| band.contains(f))
            .fold((0.0, 0usize), |(s, n), &f| (s + self.band_shape(f), n + 1));
        if n == 0 || sum == 0.0 {
            1.0
        } else {
            sum / n as f64
        }
    }

    /// Small-signal on/off gain (dB) at signal frequency `f`.
    pub fn small_signal_gain_db(&self, f: f64, pump: &PumpSetting) -> f64 {
        let g = &self.gain;
        let dp = (pump.power_dbm - g.optimum_pump_power_dbm) / g.pump_power_width_db;
        let df = (pump.freq_hz - g.optimum_pump_freq_hz) / g.pump_freq_width_hz;
        g.peak_avg_gain_db * (-0.5 * dp * dp).exp() * (-0.5 * df * df).exp() * self.band_shape(f) / self.cached_norm()
    }

    fn cached_norm(&self) -> f64 {
        // the default spec is used in tight loops; other specs recompute
        static DEFAULT_NORM: OnceLock<f64> = OnceLock::new();
        let default = TwpaSpec::default();
        if self.stop_band_hz == default.stop_band_hz && self.gain.edge_width_hz == default.gain.edge_width_hz {
            *DEFAULT_NORM.get_or_init(|| default.shape_norm())
        } else {
            self.shape_norm()
        }
    }

    /// Gain after single-pole compression: linear power gain divided by `1 + P_sig/P_sat`.
    pub fn gain_db(&self, f: f64, pump: &PumpSetting, signal_power_dbm: f64) -> f64 {
        self.small_signal_gain_db(f, pump) - compression_db(signal_power_dbm, self.saturation_dbm)
    }

    fn reflection_phase(&self, f: f64, offset: f64) -> f64 {
        offset + self.reflection_ripple_deg.to_radians() * (2.0 * PI * f / self.reflection_ripple_period_hz).sin()
    }
}

/// `10 log10(1 + 10^((P_sig - P_sat)/10))`.
pub fn compression_db(signal_power_dbm: f64, saturation_dbm: f64) -> f64 {
    10.0 * (1.0 + 10f64.powf((signal_power_dbm - saturation_dbm) / 10.0)).log10()
}

/// Amplifier S-parameters on `grid`. `pump = None` gives the pump-off state.
pub fn synth_twpa(
    spec: &TwpaSpec,
    grid: &[f64],
    pump: Option<&PumpSetting>,
    signal_power_dbm: f64,
) -> Result<NetworkData, SimError> {
    spec.validate()?;
    let s = grid
        .iter()
        .map(|&f| {
            let off_mag = db_to_mag(-spec.off_loss_db(f));
            let phase = Complex64::from_polar(1.0, -2.0 * PI * f * spec.group_delay_s);
            let forward_gain = pump.map_or(1.0, |p| db_to_mag(spec.gain_db(f, p, signal_power_dbm)));
            let through = off_mag * forward_gain;
            let model = ReflectionModel::lossless(spec.match_r, spec.match_r, through)?;
            let r11 = eval_reflection(&model, Port::One)?;
            let r22 = eval_reflection(&model, Port::Two)?;
            let reverse = spec.reverse_transmission_db.map_or(off_mag, |db| db_to_mag(-db));
            Ok(TwoPortS::new(
                Complex64::from_polar(r11, spec.reflection_phase(f, 0.3)),
                phase * through,
                phase * reverse,
                Complex64::from_polar(r22, spec.reflection_phase(f, -1.1)),
            ))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(NetworkData::with_default_ref(grid.to_vec(), s)?)
}
