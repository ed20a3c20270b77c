//! Synthesis of ideal passive components on a frequency grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::data::NetworkData;
use super::twoport::TwoPortS;
use super::NetworkError;

/// Loss model of a delay line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineLoss {
    /// Frequency-independent loss in dB.
    Flat { db: f64 },
    /// Skin-effect style loss `k * sqrt(f)` with `k` in dB per sqrt(Hz).
    SqrtF { db_per_sqrt_hz: f64 },
}

impl LineLoss {
    pub fn at(&self, f: f64) -> f64 {
        match *self {
            LineLoss::Flat { db } => db,
            LineLoss::SqrtF { db_per_sqrt_hz } => db_per_sqrt_hz * f.sqrt(),
        }
    }
}

impl Default for LineLoss {
    fn default() -> Self {
        LineLoss::Flat { db: 0.0 }
    }
}

/// Description of a synthesizable two-port component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentSpec {
    Thru,
    /// Matched, reciprocal attenuator.
    Attenuator { db: f64 },
    /// Matched, reciprocal line with transmission `10^(-loss/20) e^{-jωτ}`.
    Line {
        delay_s: f64,
        #[serde(default)]
        loss: LineLoss,
    },
    /// Matched, reciprocal, frequency-independent phase shift.
    PhaseShift { degrees: f64 },
    /// Matched non-reciprocal isolator: forward `-insertion_loss_db`, reverse `-isolation_db`.
    Isolator { insertion_loss_db: f64, isolation_db: f64 },
    /// Offset short presented at both ports: `s11 = s22 = -e^{-2jωτ}`, no transmission.
    OffsetShort { offset_delay_s: f64 },
    /// Through path of a directional coupler with flat insertion and return loss.
    ///
    /// The port reflections are placed in quadrature with the transmission so the
    /// matrix is passive whenever `|s21|^2 + |s11|^2 <= 1`.
    CouplerThrough { insertion_loss_db: f64, return_loss_db: f64 },
}

pub(crate) fn db_to_mag(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn matched(t: Complex64) -> TwoPortS {
    TwoPortS::new(real(0.0), t, t, real(0.0))
}

impl ComponentSpec {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(NetworkError::InvalidSpec(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        match self {
            ComponentSpec::Thru => Ok(()),
            ComponentSpec::Attenuator { db } => finite_nonneg("attenuation", *db),
            ComponentSpec::Line { delay_s, loss } => {
                finite_nonneg("delay", *delay_s)?;
                match loss {
                    LineLoss::Flat { db } => finite_nonneg("line loss", *db),
                    LineLoss::SqrtF { db_per_sqrt_hz } => finite_nonneg("line loss coefficient", *db_per_sqrt_hz),
                }
            }
            ComponentSpec::PhaseShift { degrees } => {
                if degrees.is_finite() {
                    Ok(())
                } else {
                    Err(NetworkError::InvalidSpec("phase shift must be finite".into()))
                }
            }
            ComponentSpec::Isolator { insertion_loss_db, isolation_db } => {
                finite_nonneg("insertion loss", *insertion_loss_db)?;
                finite_nonneg("isolation", *isolation_db)
            }
            ComponentSpec::OffsetShort { offset_delay_s } => finite_nonneg("offset delay", *offset_delay_s),
            ComponentSpec::CouplerThrough { insertion_loss_db, return_loss_db } => {
                finite_nonneg("insertion loss", *insertion_loss_db)?;
                finite_nonneg("return loss", *return_loss_db)?;
                let a = db_to_mag(-insertion_loss_db);
                let b = db_to_mag(-return_loss_db);
                if a * a + b * b > 1.0 {
                    return Err(NetworkError::InvalidSpec(format!(
                        "coupler with {insertion_loss_db} dB insertion and {return_loss_db} dB return loss is not passive"
                    )));
                }
                Ok(())
            }
        }
    }

    /// S-matrix at a single frequency. Assumes the spec is valid.
    pub fn at(&self, f: f64) -> TwoPortS {
        let w = 2.0 * PI * f;
        match *self {
            ComponentSpec::Thru => TwoPortS::thru(),
            ComponentSpec::Attenuator { db } => matched(real(db_to_mag(-db))),
            ComponentSpec::Line { delay_s, loss } => matched(Complex64::from_polar(db_to_mag(-loss.at(f)), -w * delay_s)),
            ComponentSpec::PhaseShift { degrees } => matched(Complex64::from_polar(1.0, degrees.to_radians())),
            ComponentSpec::Isolator { insertion_loss_db, isolation_db } => TwoPortS::new(
                real(0.0),
                real(db_to_mag(-insertion_loss_db)),
                real(db_to_mag(-isolation_db)),
                real(0.0),
            ),
            ComponentSpec::OffsetShort { offset_delay_s } => {
                let g = offset_short_reflection(f, offset_delay_s);
                TwoPortS::new(g, real(0.0), real(0.0), g)
            }
            ComponentSpec::CouplerThrough { insertion_loss_db, return_loss_db } => {
                let a = real(db_to_mag(-insertion_loss_db));
                let b = Complex64::new(0.0, db_to_mag(-return_loss_db));
                TwoPortS::new(b, a, a, b)
            }
        }
    }
}

/// Reflection of a lossless offset short: `-e^{-2jωτ}`.
pub fn offset_short_reflection(f: f64, offset_delay_s: f64) -> Complex64 {
    -Complex64::from_polar(1.0, -4.0 * PI * f * offset_delay_s)
}

/// Synthesizes `spec` on `grid` at reference impedance `z_ref`.
pub fn make_component(spec: &ComponentSpec, grid: &[f64], z_ref: Complex64) -> Result<NetworkData, NetworkError> {
    spec.validate()?;
    NetworkData::from_fn(grid, z_ref, |f| spec.at(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z0: Complex64 = Complex64::new(50.0, 0.0);

    #[test]
    fn attenuator_6db() {
        let net = make_component(&ComponentSpec::Attenuator { db: 6.0 }, &[5e9], Z0).unwrap();
        let m = net.s()[0];
        assert!((m.s21.norm() - 0.501187).abs() < 1e-6);
        assert_eq!(m.s11, real(0.0));
        assert_eq!(m.s22, real(0.0));
        assert_eq!(m.s12, m.s21);
    }

    #[test]
    fn isolator_levels() {
        let spec = ComponentSpec::Isolator { insertion_loss_db: 1.0, isolation_db: 20.0 };
        let m = make_component(&spec, &[5e9], Z0).unwrap().s()[0];
        assert!((m.s21.norm() - 0.891251).abs() < 1e-6);
        assert!((m.s12.norm() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn offset_short_phase() {
        let tau = 25e-12;
        let f = 4e9;
        let m = make_component(&ComponentSpec::OffsetShort { offset_delay_s: tau }, &[f], Z0).unwrap().s()[0];
        assert!((m.s11.norm() - 1.0).abs() < 1e-15);
        let expected = PI - 2.0 * 2.0 * PI * f * tau;
        let diff = (m.s11.arg() - expected).rem_euclid(2.0 * PI);
        assert!(diff.min(2.0 * PI - diff) < 1e-12);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(make_component(&ComponentSpec::Attenuator { db: -1.0 }, &[1e9], Z0).is_err());
        assert!(make_component(&ComponentSpec::Attenuator { db: f64::NAN }, &[1e9], Z0).is_err());
        let hot = ComponentSpec::CouplerThrough { insertion_loss_db: 0.0, return_loss_db: 10.0 };
        assert!(matches!(make_component(&hot, &[1e9], Z0), Err(NetworkError::InvalidSpec(_))));
    }

    #[test]
    fn sqrt_loss_line() {
        let spec = ComponentSpec::Line { delay_s: 1e-9, loss: LineLoss::SqrtF { db_per_sqrt_hz: 1e-5 } };
        let m = make_component(&spec, &[4e9], Z0).unwrap().s()[0];
        let il = -20.0 * m.s21.norm().log10();
        assert!((il - 1e-5 * 4e9f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip_of_spec() {
        let spec = ComponentSpec::Line { delay_s: 2e-9, loss: LineLoss::Flat { db: 0.3 } };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ComponentSpec>(&text).unwrap(), spec);
        let parsed: ComponentSpec = serde_json::from_str(r#"{"type":"attenuator","db":6}"#).unwrap();
        assert_eq!(parsed, ComponentSpec::Attenuator { db: 6.0 });
    }
}
