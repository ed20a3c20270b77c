//! The four device configurations measured between the switch reference planes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::twpa::{synth_twpa, PumpSetting, TwpaSpec, LOW_SIGNAL_DBM};
use super::SimError;
use crate::network::{cascade_all, make_component, ComponentSpec, LineLoss, NetworkData};

/// Which auxiliary components sit inside the reference planes.
///
/// - A: isolator, coupler, cables, amplifier
/// - B: coupler, cables, amplifier
/// - C: isolator, coupler, cables
/// - D: coupler, cables
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Configuration {
    A,
    B,
    C,
    D,
}

impl Configuration {
    pub const ALL: [Configuration; 4] = [Configuration::A, Configuration::B, Configuration::C, Configuration::D];

    pub fn has_isolator(self) -> bool {
        matches!(self, Configuration::A | Configuration::C)
    }

    pub fn has_amplifier(self) -> bool {
        matches!(self, Configuration::A | Configuration::B)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Configuration::A => "A",
            Configuration::B => "B",
            Configuration::C => "C",
            Configuration::D => "D",
        };
        f.pad(s)
    }
}

impl FromStr for Configuration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Configuration::A),
            "B" => Ok(Configuration::B),
            "C" => Ok(Configuration::C),
            "D" => Ok(Configuration::D),
            other => Err(format!("unknown configuration '{other}' (expected A-D)")),
        }
    }
}

/// Component models and operating point used to assemble a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigOverrides {
    pub grid: Vec<f64>,
    pub isolator: ComponentSpec,
    pub coupler: ComponentSpec,
    pub cable: ComponentSpec,
    pub twpa: TwpaSpec,
    pub pump: Option<PumpSetting>,
    pub signal_power_dbm: f64,
}

impl Default for ConfigOverrides {
    fn default() -> Self {
        Self {
            grid: crate::network::linear_grid(4e9, 8e9, 401),
            isolator: ComponentSpec::Isolator { insertion_loss_db: 1.0, isolation_db: 40.0 },
            coupler: ComponentSpec::CouplerThrough { insertion_loss_db: 0.4, return_loss_db: 25.0 },
            cable: ComponentSpec::Line { delay_s: 1e-9, loss: LineLoss::Flat { db: 0.2 } },
            twpa: TwpaSpec::default(),
            pump: None,
            signal_power_dbm: LOW_SIGNAL_DBM,
        }
    }
}

/// Composite network of `config` at the reference planes.
pub fn run_configuration(config: Configuration, overrides: &ConfigOverrides) -> Result<NetworkData, SimError> {
    let z = Complex64::new(50.0, 0.0);
    let grid = &overrides.grid;
    let mut parts = Vec::new();
    if config.has_isolator() {
        parts.push(make_component(&overrides.isolator, grid, z)?);
    }
    parts.push(make_component(&overrides.coupler, grid, z)?);
    parts.push(make_component(&overrides.cable, grid, z)?);
    if config.has_amplifier() {
        parts.push(synth_twpa(&overrides.twpa, grid, overrides.pump.as_ref(), overrides.signal_power_dbm)?);
    }
    Ok(cascade_all(&parts)?.expect("at least coupler and cable"))
}
