use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::twoport::{cascade_point, TwoPortS};
use super::NetworkError;

/// Default reference impedance in ohm.
pub const DEFAULT_Z_REF: f64 = 50.0;

/// Frequency-gridded two-port S-parameters with a single reference impedance.
///
/// Frequencies are in Hz, strictly increasing, finite and positive. Every
/// S-matrix entry is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkData {
    frequencies: Vec<f64>,
    s: Vec<TwoPortS>,
    z_ref: Complex64,
}

impl NetworkData {
    pub fn new(frequencies: Vec<f64>, s: Vec<TwoPortS>, z_ref: Complex64) -> Result<Self, NetworkError> {
        validate_grid(&frequencies)?;
        if s.len() != frequencies.len() {
            return Err(NetworkError::LengthMismatch { frequencies: frequencies.len(), values: s.len() });
        }
        if let Some(index) = s.iter().position(|m| !m.is_finite()) {
            return Err(NetworkError::NonFinite { index });
        }
        if !(z_ref.re > 0.0) || !z_ref.is_finite() {
            return Err(NetworkError::InvalidImpedance(z_ref));
        }
        Ok(Self { frequencies, s, z_ref })
    }

    /// Network at the default 50 ohm reference.
    pub fn with_default_ref(frequencies: Vec<f64>, s: Vec<TwoPortS>) -> Result<Self, NetworkError> {
        Self::new(frequencies, s, Complex64::new(DEFAULT_Z_REF, 0.0))
    }

    /// Builds a network by evaluating `f` at every grid point.
    pub fn from_fn(
        frequencies: &[f64],
        z_ref: Complex64,
        f: impl FnMut(f64) -> TwoPortS,
    ) -> Result<Self, NetworkError> {
        let s = frequencies.iter().copied().map(f).collect();
        Self::new(frequencies.to_vec(), s, z_ref)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn s(&self) -> &[TwoPortS] {
        &self.s
    }

    pub fn z_ref(&self) -> Complex64 {
        self.z_ref
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &TwoPortS)> {
        self.frequencies.iter().copied().zip(self.s.iter())
    }

    /// Same grid and reference, new per-point matrices.
    pub fn map(&self, f: impl FnMut(&TwoPortS) -> TwoPortS) -> Result<Self, NetworkError> {
        let s = self.s.iter().map(f).collect();
        Self::new(self.frequencies.clone(), s, self.z_ref)
    }

    /// Like [`map`](Self::map) but each point may fail.
    pub fn try_map(
        &self,
        f: impl FnMut(&TwoPortS) -> Result<TwoPortS, NetworkError>,
    ) -> Result<Self, NetworkError> {
        let s = self.s.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Self::new(self.frequencies.clone(), s, self.z_ref)
    }

    pub fn with_z_ref(mut self, z_ref: Complex64) -> Result<Self, NetworkError> {
        if !(z_ref.re > 0.0) || !z_ref.is_finite() {
            return Err(NetworkError::InvalidImpedance(z_ref));
        }
        self.z_ref = z_ref;
        Ok(self)
    }

    /// Bitwise grid equality.
    pub fn same_grid(&self, other: &NetworkData) -> bool {
        self.frequencies == other.frequencies
    }

    pub fn max_abs_diff(&self, other: &NetworkData) -> f64 {
        self.s.iter().zip(&other.s).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// Largest per-point singular value over the grid.
    pub fn max_singular_value(&self) -> f64 {
        self.s.iter().map(TwoPortS::max_singular_value).fold(0.0, f64::max)
    }

    pub fn is_passive(&self, tol: f64) -> bool {
        self.max_singular_value() <= 1.0 + tol
    }
}

pub(crate) fn validate_grid(frequencies: &[f64]) -> Result<(), NetworkError> {
    if frequencies.is_empty() {
        return Err(NetworkError::InvalidGrid("frequency grid is empty".into()));
    }
    for (i, f) in frequencies.iter().enumerate() {
        if !f.is_finite() || *f <= 0.0 {
            return Err(NetworkError::InvalidGrid(format!("frequency #{i} = {f} is not finite and positive")));
        }
    }
    if let Some(i) = frequencies.windows(2).position(|w| w[1] <= w[0]) {
        return Err(NetworkError::InvalidGrid(format!(
            "frequencies not strictly increasing at #{}: {} <= {}",
            i + 1,
            frequencies[i + 1],
            frequencies[i]
        )));
    }
    Ok(())
}

/// `n` equally spaced frequencies from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { stop } else { start + step * i as f64 }).collect()
        }
    }
}

fn check_compatible(a: &NetworkData, b: &NetworkData) -> Result<(), NetworkError> {
    if !a.same_grid(b) {
        return Err(NetworkError::GridMismatch);
    }
    if a.z_ref != b.z_ref {
        return Err(NetworkError::ZRefMismatch(a.z_ref, b.z_ref));
    }
    Ok(())
}

/// `a` followed by `b` (port 2 of `a` into port 1 of `b`).
pub fn cascade(a: &NetworkData, b: &NetworkData) -> Result<NetworkData, NetworkError> {
    check_compatible(a, b)?;
    let s = a
        .s
        .iter()
        .zip(&b.s)
        .map(|(x, y)| cascade_point(x, y))
        .collect::<Result<Vec<_>, _>>()?;
    NetworkData::new(a.frequencies.clone(), s, a.z_ref)
}

/// Cascades a non-empty chain left to right.
pub fn cascade_all<'a>(chain: impl IntoIterator<Item = &'a NetworkData>) -> Result<Option<NetworkData>, NetworkError> {
    let mut acc: Option<NetworkData> = None;
    for net in chain {
        acc = Some(match acc {
            None => net.clone(),
            Some(prev) => cascade(&prev, net)?,
        });
    }
    Ok(acc)
}

pub fn flip(net: &NetworkData) -> NetworkData {
    NetworkData {
        frequencies: net.frequencies.clone(),
        s: net.s.iter().map(TwoPortS::flipped).collect(),
        z_ref: net.z_ref,
    }
}

/// Re-references the S-matrix from `net.z_ref()` to `z_new` (same at both ports).
///
/// With `g = (z_new - z_old) / (z_new + z_old)` the new matrix is
/// `(S - g I)(I - g S)^-1`, which is free of the `(I - S)` singularity that
/// going through Z-parameters has for a thru.
pub fn renormalize(net: &NetworkData, z_new: Complex64) -> Result<NetworkData, NetworkError> {
    if !(z_new.re > 0.0) || !z_new.is_finite() {
        return Err(NetworkError::InvalidImpedance(z_new));
    }
    let z_old = net.z_ref;
    if z_new == z_old {
        return Ok(net.clone());
    }
    let g = (z_new - z_old) / (z_new + z_old);
    let s = net
        .s
        .iter()
        .map(|m| {
            // A = S - gI, B = I - gS, result = A * B^-1
            let (a11, a12, a21, a22) = (m.s11 - g, m.s12, m.s21, m.s22 - g);
            let (b11, b12, b21, b22) = (1.0 - g * m.s11, -g * m.s12, -g * m.s21, 1.0 - g * m.s22);
            let det = b11 * b22 - b12 * b21;
            if det.norm() < 1e-300 {
                return Err(NetworkError::SingularConversion("renormalization matrix is singular"));
            }
            let (i11, i12, i21, i22) = (b22 / det, -b12 / det, -b21 / det, b11 / det);
            Ok(TwoPortS {
                s11: a11 * i11 + a12 * i21,
                s12: a11 * i12 + a12 * i22,
                s21: a21 * i11 + a22 * i21,
                s22: a21 * i12 + a22 * i22,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    NetworkData::new(net.frequencies.clone(), s, z_new)
}

/// Linear interpolation of real and imaginary parts onto `grid`.
pub fn interpolate(net: &NetworkData, grid: &[f64]) -> Result<NetworkData, NetworkError> {
    validate_grid(grid)?;
    let f = &net.frequencies;
    let (lo, hi) = (f[0], f[f.len() - 1]);
    let lerp = |a: Complex64, b: Complex64, w: f64| a + (b - a) * w;
    let s = grid
        .iter()
        .map(|&x| {
            if x < lo || x > hi {
                return Err(NetworkError::ExtrapolationRequested(x));
            }
            // first index with f[i] >= x
            let i = f.partition_point(|&v| v < x);
            if f[i] == x {
                return Ok(net.s[i]);
            }
            let (a, b) = (&net.s[i - 1], &net.s[i]);
            let w = (x - f[i - 1]) / (f[i] - f[i - 1]);
            Ok(TwoPortS {
                s11: lerp(a.s11, b.s11, w),
                s21: lerp(a.s21, b.s21, w),
                s12: lerp(a.s12, b.s12, w),
                s22: lerp(a.s22, b.s22, w),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    NetworkData::new(grid.to_vec(), s, net.z_ref)
}
