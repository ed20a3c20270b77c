//! Band-limited scalar metrics over frequency sweeps.

use serde::{Deserialize, Serialize};

use super::data::NetworkData;
use super::twoport::SParam;
use super::NetworkError;

/// Smoothing window used when none is given.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 51;

/// A closed frequency band with open exclusion intervals.
///
/// A point `f` is included when `f_lo <= f <= f_hi` and it does not lie
/// strictly inside any exclusion. Exclusion edges are therefore kept, so
/// `[4.5, 7.5]` minus `(5.5, 6.5)` is exactly `[4.5, 5.5] U [6.5, 7.5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    f_lo: f64,
    f_hi: f64,
    exclusions: Vec<(f64, f64)>,
}

impl Band {
    pub fn new(f_lo: f64, f_hi: f64, mut exclusions: Vec<(f64, f64)>) -> Result<Self, NetworkError> {
        if !(f_lo.is_finite() && f_hi.is_finite() && f_lo < f_hi) {
            return Err(NetworkError::InvalidBand(format!("need f_lo < f_hi, got [{f_lo}, {f_hi}]")));
        }
        for &(a, b) in &exclusions {
            if !(a < b && a >= f_lo && b <= f_hi) {
                return Err(NetworkError::InvalidBand(format!(
                    "exclusion [{a}, {b}] is empty or outside [{f_lo}, {f_hi}]"
                )));
            }
        }
        exclusions.sort_by(|x, y| x.0.total_cmp(&y.0));
        if exclusions.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(NetworkError::InvalidBand("exclusion intervals overlap".into()));
        }
        Ok(Self { f_lo, f_hi, exclusions })
    }

    pub fn full(f_lo: f64, f_hi: f64) -> Result<Self, NetworkError> {
        Self::new(f_lo, f_hi, Vec::new())
    }

    /// 4-8 GHz with the 5.5-6.5 GHz stop band removed.
    pub fn amplifier_band() -> Self {
        Self::new(4e9, 8e9, vec![(5.5e9, 6.5e9)]).expect("static band")
    }

    /// 4.5-5.5 GHz and 6.5-7.5 GHz, the compression-analysis band.
    pub fn compression_band() -> Self {
        Self::new(4.5e9, 7.5e9, vec![(5.5e9, 6.5e9)]).expect("static band")
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }

    pub fn exclusions(&self) -> &[(f64, f64)] {
        &self.exclusions
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_lo && f <= self.f_hi && !self.exclusions.iter().any(|&(a, b)| f > a && f < b)
    }
}

/// Scale in which magnitudes are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Db,
    Linear,
}

pub fn mag_to_db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

/// Arithmetic mean of `values[i]` over the grid points inside `band`.
///
/// Non-finite values are skipped; if nothing is left the band is empty.
pub fn band_mean(frequencies: &[f64], values: &[f64], band: &Band) -> Result<f64, NetworkError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (&f, &v) in frequencies.iter().zip(values) {
        if band.contains(f) && v.is_finite() {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(NetworkError::EmptyBand);
    }
    Ok(sum / n as f64)
}

/// Mean of `|S_which|` over `band`, averaged in `scale`.
pub fn band_average(net: &NetworkData, which: SParam, band: &Band, scale: Scale) -> Result<f64, NetworkError> {
    let values: Vec<f64> = net
        .s()
        .iter()
        .map(|m| {
            let mag = m.get(which).norm();
            match scale {
                Scale::Db => mag_to_db(mag),
                Scale::Linear => mag,
            }
        })
        .collect();
    if scale == Scale::Db {
        // -inf entries are real data here, not gaps
        let included = net.frequencies().iter().zip(&values).filter(|(f, _)| band.contains(**f));
        let mut any = false;
        for (_, v) in included {
            any = true;
            if *v == f64::NEG_INFINITY {
                return Ok(f64::NEG_INFINITY);
            }
        }
        if !any {
            return Err(NetworkError::EmptyBand);
        }
    }
    band_mean(net.frequencies(), &values, band)
}

/// Centered boxcar average. Near the ends the window shrinks symmetrically.
pub fn moving_average(trace: &[f64], window: usize) -> Result<Vec<f64>, NetworkError> {
    if window == 0 || window.is_multiple_of(2) || window > trace.len() {
        return Err(NetworkError::BadWindow { window, len: trace.len() });
    }
    let n = trace.len();
    let half = window / 2;
    Ok((0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            if h == 0 {
                return trace[i];
            }
            trace[i - h..=i + h].iter().sum::<f64>() / (2 * h + 1) as f64
        })
        .collect())
}
