//! Thru-Reflect-Line calibration of the 8-term error model and de-embedding.
//!
//! Raw transfer matrices are modelled as `M = X * T_dut * Y` where `X` is the
//! error box between VNA port 1 and the DUT and `Y` the one between the DUT
//! and VNA port 2. With a zero-length thru (`M_T = X Y`) and a matched line
//! (`M_L = X L Y`, `L = diag(e^{-γl}, e^{+γl})`), the matrix
//! `M_L M_T^-1 = X L X^-1` has the line propagation factors as eigenvalues
//! and the columns of `X` as eigenvectors. Writing
//!
//! ```text
//! X = k [[1, β], [α, 1]] diag(1, ρ)
//! ```
//!
//! the eigenvectors give `α` and `β`, the reflect measured on both ports
//! gives `ρ²`, and the sign of `ρ` is fixed by the half-plane of the nominal
//! reflect. `k` only moves transmission between `X` and `Y`; it is chosen so
//! both boxes carry the same `s21`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{offset_short_reflection, NetworkData, NetworkError, TwoPortS, TwoPortT};

/// Default guard band (degrees) around 0 and 180 degrees of line phase.
pub const DEFAULT_GUARD_DEG: f64 = 20.0;
/// Default minimum angle (degrees) between the reflect estimate and the half-plane boundary.
pub const DEFAULT_AMBIGUITY_MARGIN_DEG: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrlError {
    #[error("invalid standard set: {0}")]
    InvalidStandards(String),
    #[error("thru measurement is singular at {freq} Hz")]
    SingularThru { freq: f64 },
    #[error("reflect estimate at {freq} Hz is within the ambiguity margin of the nominal half-plane boundary")]
    RootAmbiguity { freq: f64 },
    #[error("error box is singular at {freq} Hz")]
    SingularErrorBox { freq: f64 },
    #[error("frequency grids differ")]
    GridMismatch,
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Approximate model of the reflect standard. Only its half-plane matters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReflectNominal {
    Constant { gamma: Complex64 },
    /// Lossless offset short, `-e^{-2jωτ}`.
    OffsetShort { offset_delay_s: f64 },
    PerFrequency { gamma: Vec<Complex64> },
}

impl Default for ReflectNominal {
    fn default() -> Self {
        ReflectNominal::OffsetShort { offset_delay_s: 0.0 }
    }
}

impl ReflectNominal {
    fn at(&self, index: usize, f: f64) -> Complex64 {
        match self {
            ReflectNominal::Constant { gamma } => *gamma,
            ReflectNominal::OffsetShort { offset_delay_s } => offset_short_reflection(f, *offset_delay_s),
            ReflectNominal::PerFrequency { gamma } => gamma[index],
        }
    }
}

/// Raw measurements of the three TRL standards plus their nominal definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrlStandardSet {
    pub raw_thru: NetworkData,
    pub raw_line: NetworkData,
    /// Reflect seen at VNA port 1.
    pub raw_reflect_p1: Vec<Complex64>,
    /// Reflect seen at VNA port 2.
    pub raw_reflect_p2: Vec<Complex64>,
    pub reflect_nominal: ReflectNominal,
    /// Approximate line delay in seconds, seeds the root choice.
    pub line_delay_nominal: f64,
    /// Characteristic impedance of the line; becomes the calibrated reference impedance.
    pub line_impedance: Complex64,
}

impl TrlStandardSet {
    pub fn frequencies(&self) -> &[f64] {
        self.raw_thru.frequencies()
    }

    pub fn validate(&self) -> Result<(), TrlError> {
        let n = self.raw_thru.len();
        if !self.raw_thru.same_grid(&self.raw_line) {
            return Err(TrlError::GridMismatch);
        }
        if self.raw_reflect_p1.len() != n || self.raw_reflect_p2.len() != n {
            return Err(TrlError::InvalidStandards(format!(
                "reflect data has {}/{} points for a {n}-point grid",
                self.raw_reflect_p1.len(),
                self.raw_reflect_p2.len()
            )));
        }
        if let ReflectNominal::PerFrequency { gamma } = &self.reflect_nominal {
            if gamma.len() != n {
                return Err(TrlError::InvalidStandards("nominal reflect length differs from grid".into()));
            }
        }
        if !self.raw_reflect_p1.iter().chain(&self.raw_reflect_p2).all(|z| z.is_finite()) {
            return Err(TrlError::InvalidStandards("non-finite reflect data".into()));
        }
        for (i, &f) in self.frequencies().iter().enumerate() {
            let m = self.reflect_nominal.at(i, f).norm();
            if !(m > 0.5 && m < 1.5) {
                return Err(TrlError::InvalidStandards(format!(
                    "|nominal reflect| = {m} at {f} Hz is outside (0.5, 1.5)"
                )));
            }
        }
        if !self.line_delay_nominal.is_finite() || self.line_delay_nominal < 0.0 {
            return Err(TrlError::InvalidStandards("nominal line delay must be finite and >= 0".into()));
        }
        if !(self.line_impedance.re > 0.0) {
            return Err(TrlError::InvalidStandards("line impedance must have a positive real part".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrlOptions {
    pub guard_deg: f64,
    pub ambiguity_margin_deg: f64,
}

impl Default for TrlOptions {
    fn default() -> Self {
        Self { guard_deg: DEFAULT_GUARD_DEG, ambiguity_margin_deg: DEFAULT_AMBIGUITY_MARGIN_DEG }
    }
}

/// Per-frequency solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PointFlags {
    /// Thru-line phase difference within the guard band of 0 or 180 degrees.
    pub near_degenerate_line: bool,
    /// The propagation root or the reflect sign could not be chosen by the
    /// primary criterion and fell back to the magnitude rule.
    pub root_choice_forced: bool,
}

/// Solved error boxes, one pair of transfer matrices per frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub frequencies: Vec<f64>,
    pub x_box: Vec<TwoPortT>,
    pub y_box: Vec<TwoPortT>,
    /// Recovered `e^{-γl}` of the line.
    pub gamma_line: Vec<Complex64>,
    /// Recovered reflection of the reflect standard at the reference planes.
    pub reflect: Vec<Complex64>,
    /// `|e^{-γl} e^{+γl} - 1|`, zero for consistent data.
    pub residuals: Vec<f64>,
    pub flags: Vec<PointFlags>,
    pub z_ref: Complex64,
    pub guard_deg: f64,
}

/// De-embedded DUT with the solver diagnostics of its frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedResult {
    pub dut: NetworkData,
    pub residuals: Vec<f64>,
    pub flags: Vec<PointFlags>,
}

fn eigenvalues(m: &TwoPortT) -> (Complex64, Complex64) {
    let tr = m.trace();
    let det = m.det();
    let disc = (tr * tr - 4.0 * det).sqrt();
    // pick the sign that avoids cancellation, then use the product for the other root
    let q = if (tr + disc).norm() >= (tr - disc).norm() { tr + disc } else { tr - disc };
    let a = q / 2.0;
    let b = if a.norm() > 0.0 { det / a } else { tr - a };
    (a, b)
}

/// `α` with `(1, α)` an eigenvector of `m` for `lambda`.
fn first_column_ratio(m: &TwoPortT, lambda: Complex64) -> Complex64 {
    let d1 = m.t12;
    let d2 = lambda - m.t22;
    if d1.norm() >= d2.norm() {
        (lambda - m.t11) / d1
    } else {
        m.t21 / d2
    }
}

/// `β` with `(β, 1)` an eigenvector of `m` for `lambda`.
fn second_column_ratio(m: &TwoPortT, lambda: Complex64) -> Complex64 {
    let d1 = lambda - m.t11;
    let d2 = m.t21;
    if d1.norm() >= d2.norm() {
        m.t12 / d1
    } else {
        (lambda - m.t22) / d2
    }
}

fn wrap_to(phase: f64, target: f64) -> f64 {
    phase + 2.0 * PI * ((target - phase) / (2.0 * PI)).round()
}

/// Distance in degrees of the line phase from the nearest multiple of 180.
fn line_phase_margin_deg(gamma: Complex64) -> f64 {
    let d = (-gamma.arg()).to_degrees().rem_euclid(180.0);
    d.min(180.0 - d)
}

/// Solves the error model with default options.
struct ReflectSolution {
    p: TwoPortT,
    q: TwoPortT,
    rho: Complex64,
    reflect: Complex64,
}

/// Fixes the remaining box parameter from the two reflect readings. A
/// negative `ambiguity_cos` accepts any half-plane decision.
#[allow(clippy::too_many_arguments)]
fn resolve_reflect(
    thru: &TwoPortT,
    alpha: Complex64,
    beta: Complex64,
    g1: Complex64,
    g2: Complex64,
    nominal: Complex64,
    ambiguity_cos: f64,
    f: f64,
) -> Result<ReflectSolution, TrlError> {
    let singular = TrlError::SingularErrorBox { freq: f };
    let p = TwoPortT::new(Complex64::new(1.0, 0.0), beta, alpha, Complex64::new(1.0, 0.0));
    let p_inv = p.inverse().map_err(|_| singular.clone())?;
    // reflect through X (port 1) and through Y = X^-1 M_T (port 2)
    let w1 = (g1 - beta) / (1.0 - alpha * g1);
    let q = p_inv * *thru;
    let w2 = (q.t21 + g2 * q.t22) / (q.t11 + g2 * q.t12);
    if !(w1.is_finite() && w2.is_finite()) || w1.norm() < 1e-300 || w2.norm() < 1e-300 {
        return Err(singular);
    }
    let rho_candidate = (w2 / w1).sqrt();
    let gamma_candidate = rho_candidate * w1;
    let cos = (gamma_candidate * nominal.conj()).re / (gamma_candidate.norm() * nominal.norm());
    if !cos.is_finite() || !q.t22.is_finite() || q.t22.norm() < 1e-300 {
        return Err(singular);
    }
    if cos.abs() < ambiguity_cos {
        return Err(TrlError::RootAmbiguity { freq: f });
    }
    let rho = if cos >= 0.0 { rho_candidate } else { -rho_candidate };
    Ok(ReflectSolution { p, q, rho, reflect: rho * w1 })
}

pub fn solve_trl(std: &TrlStandardSet) -> Result<ErrorModel, TrlError> {
    solve_trl_with(std, &TrlOptions::default())
}

pub fn solve_trl_with(std: &TrlStandardSet, opts: &TrlOptions) -> Result<ErrorModel, TrlError> {
    std.validate()?;
    let freqs = std.frequencies();
    let n = freqs.len();
    let mut em = ErrorModel {
        frequencies: freqs.to_vec(),
        x_box: Vec::with_capacity(n),
        y_box: Vec::with_capacity(n),
        gamma_line: Vec::with_capacity(n),
        reflect: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        flags: Vec::with_capacity(n),
        z_ref: std.line_impedance,
        guard_deg: opts.guard_deg,
    };
    let ambiguity_cos = opts.ambiguity_margin_deg.to_radians().sin();

    // unwrapped phase history of the chosen root, for continuity
    let mut phases: Vec<f64> = Vec::with_capacity(n);
    let mut last_mag = 1.0;
    let mut last_split: Option<Complex64> = None;

    for k in 0..n {
        let f = freqs[k];
        let thru = std.raw_thru.s()[k].to_t().map_err(|_| TrlError::SingularThru { freq: f })?;
        let thru_inv = thru.inverse().map_err(|_| TrlError::SingularThru { freq: f })?;
        let line = std.raw_line.s()[k]
            .to_t()
            .map_err(|_| TrlError::InvalidStandards(format!("line transmission is zero at {f} Hz")))?;
        let m = line * thru_inv;
        let mut flags = PointFlags::default();

        // root assignment: nearest to the continued phase track
        let predicted_phase = match k {
            0 => -2.0 * PI * f * std.line_delay_nominal,
            1 => phases[0] * f / freqs[0],
            _ => {
                let slope = (phases[k - 1] - phases[k - 2]) / (freqs[k - 1] - freqs[k - 2]);
                phases[k - 1] + slope * (f - freqs[k - 1])
            }
        };
        let predicted = Complex64::from_polar(last_mag, predicted_phase);
        let (ea, eb) = eigenvalues(&m);
        let (da, db) = ((ea - predicted).norm(), (eb - predicted).norm());
        let (lam1, lam2) = if da.min(db) < 0.7 * da.max(db) {
            if da <= db {
                (ea, eb)
            } else {
                (eb, ea)
            }
        } else {
            flags.root_choice_forced = true;
            if ea.norm() <= eb.norm() {
                (ea, eb)
            } else {
                (eb, ea)
            }
        };
        phases.push(wrap_to(lam1.arg(), predicted_phase));
        last_mag = lam1.norm();
        flags.near_degenerate_line = line_phase_margin_deg(lam1) < opts.guard_deg;

        // a scalar M (exactly degenerate line) has every vector as eigenvector
        let finite_or_zero = |z: Complex64| if z.is_finite() { z } else { Complex64::new(0.0, 0.0) };
        let alpha = finite_or_zero(first_column_ratio(&m, lam1));
        let beta = finite_or_zero(second_column_ratio(&m, lam2));
        let g1 = std.raw_reflect_p1[k];
        let g2 = std.raw_reflect_p2[k];
        let nominal = std.reflect_nominal.at(k, f);
        let solved = match resolve_reflect(&thru, alpha, beta, g1, g2, nominal, ambiguity_cos, f) {
            Ok(r) => r,
            Err(e) if !flags.near_degenerate_line => return Err(e),
            // near a degenerate line the eigenvectors carry little information;
            // accept any half-plane decision, then fall back to the matched solution
            Err(_) => {
                flags.root_choice_forced = true;
                let zero = Complex64::new(0.0, 0.0);
                resolve_reflect(&thru, alpha, beta, g1, g2, nominal, -1.0, f)
                    .or_else(|_| resolve_reflect(&thru, zero, zero, g1, g2, nominal, -1.0, f))?
            }
        };
        let ReflectSolution { p, q, rho, reflect } = solved;

        // equal split of thru transmission: x22 = k rho = sqrt(q22), branch kept continuous
        let mut split = q.t22.sqrt();
        if let Some(prev) = last_split {
            if (split + prev).norm() < (split - prev).norm() {
                split = -split;
            }
        }
        last_split = Some(split);
        let scale = split / rho;
        let x = (p * TwoPortT::diag(Complex64::new(1.0, 0.0), rho)).scale(scale);
        let x_inv = x.inverse().map_err(|_| TrlError::SingularErrorBox { freq: f })?;
        let y = x_inv * thru;

        em.x_box.push(x);
        em.y_box.push(y);
        em.gamma_line.push(lam1);
        em.reflect.push(reflect);
        em.residuals.push((lam1 * lam2 - 1.0).norm());
        em.flags.push(flags);
    }
    Ok(em)
}

impl ErrorModel {
    /// Removes the error boxes at one frequency index.
    pub fn deembed_point(&self, k: usize, raw: &TwoPortS) -> Result<TwoPortS, TrlError> {
        let f = self.frequencies[k];
        let err = |_| TrlError::SingularErrorBox { freq: f };
        let x_inv = self.x_box[k].inverse().map_err(err)?;
        let y_inv = self.y_box[k].inverse().map_err(err)?;
        let raw_t = raw.to_t()?;
        Ok((x_inv * raw_t * y_inv).to_s()?)
    }

    /// Reflection at the port-1 reference plane from a raw port-1 reading.
    pub fn deembed_reflect_p1(&self, k: usize, raw: Complex64) -> Complex64 {
        let x = &self.x_box[k];
        (raw * x.t22 - x.t12) / (x.t11 - raw * x.t21)
    }

    /// Reflection at the port-2 reference plane from a raw port-2 reading.
    pub fn deembed_reflect_p2(&self, k: usize, raw: Complex64) -> Complex64 {
        let y = &self.y_box[k];
        (y.t21 + raw * y.t22) / (y.t11 + raw * y.t12)
    }
}

/// Moves `raw_dut` to the calibration reference planes.
///
/// The result is referenced to the line impedance; use
/// [`renormalize`](crate::network::renormalize) to move it to 50 ohm.
pub fn deembed(em: &ErrorModel, raw_dut: &NetworkData) -> Result<CalibratedResult, TrlError> {
    if raw_dut.frequencies() != em.frequencies.as_slice() {
        return Err(TrlError::GridMismatch);
    }
    let s = raw_dut
        .s()
        .iter()
        .enumerate()
        .map(|(k, m)| em.deembed_point(k, m))
        .collect::<Result<Vec<_>, _>>()?;
    let dut = NetworkData::new(em.frequencies.clone(), s, em.z_ref)?;
    Ok(CalibratedResult { dut, residuals: em.residuals.clone(), flags: em.flags.clone() })
}

/// Deviation of each de-embedded standard from its ideal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub frequencies: Vec<f64>,
    /// Max entry deviation of the de-embedded thru from an ideal thru.
    pub thru: Vec<f64>,
    /// Max deviation of the de-embedded line from a matched line with transmission `gamma_line`.
    pub line: Vec<f64>,
    /// Disagreement of the reflect de-embedded through port 1 and port 2.
    pub reflect: Vec<f64>,
    pub max: f64,
    pub rms: f64,
}

pub fn verify_calibration(em: &ErrorModel, std: &TrlStandardSet) -> Result<ResidualReport, TrlError> {
    if std.frequencies() != em.frequencies.as_slice() {
        return Err(TrlError::GridMismatch);
    }
    let n = em.frequencies.len();
    let (mut thru, mut line, mut reflect) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let t = em.deembed_point(k, &std.raw_thru.s()[k])?;
        thru.push(t.max_abs_diff(&TwoPortS::thru()));
        let l = em.deembed_point(k, &std.raw_line.s()[k])?;
        let g = em.gamma_line[k];
        let ideal = TwoPortS::new(Complex64::new(0.0, 0.0), g, g, Complex64::new(0.0, 0.0));
        line.push(l.max_abs_diff(&ideal));
        let r1 = em.deembed_reflect_p1(k, std.raw_reflect_p1[k]);
        let r2 = em.deembed_reflect_p2(k, std.raw_reflect_p2[k]);
        reflect.push((r1 - r2).norm());
    }
    let all: Vec<f64> = thru.iter().chain(&line).chain(&reflect).copied().collect();
    let max = all.iter().copied().fold(0.0, f64::max);
    let rms = (all.iter().map(|v| v * v).sum::<f64>() / all.len() as f64).sqrt();
    Ok(ResidualReport { frequencies: em.frequencies.clone(), thru, line, reflect, max, rms })
}

/// `true` where the thru-line phase difference is at least `guard_deg` away
/// from 0 and 180 degrees.
pub fn line_phase_validity(em: &ErrorModel, guard_deg: f64) -> Vec<bool> {
    em.gamma_line.iter().map(|&g| line_phase_margin_deg(g) >= guard_deg).collect()
}
