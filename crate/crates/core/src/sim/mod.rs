//! Synthetic measurement chain: embeds ideal standards and devices between
//! configurable error networks, with optional additive noise.

mod config;
pub mod noise;
mod scenario;
mod twpa;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{cascade, cascade_all, make_component, ComponentSpec, LineLoss, NetworkData, NetworkError, TwoPortS};
use crate::trl::{ReflectNominal, TrlStandardSet};
use crate::twpa::TwpaError;

pub use config::{run_configuration, ConfigOverrides, Configuration};
pub use scenario::{DutEntry, DutKind, GridSpec, ScenarioFile, SimulatedDataset, SimulatedDut};
pub use twpa::{compression_db, synth_twpa, GainProfile, PumpSetting, TwpaSpec, LOW_SIGNAL_DBM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("frequency grids differ")]
    GridMismatch,
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Twpa(#[from] TwpaError),
}

/// Noise stream ids of the standard measurements.
pub mod streams {
    pub const DEFAULT: u64 = 0;
    pub const THRU: u64 = 1;
    pub const LINE: u64 = 2;
    pub const REFLECT_P1: u64 = 3;
    pub const REFLECT_P2: u64 = 4;
    /// DUT `i` uses `DUT_BASE + i`.
    pub const DUT_BASE: u64 = 100;
}

/// Error networks on both sides of the reference planes plus noise settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainScenario {
    pub grid: Vec<f64>,
    /// VNA port 1 towards the DUT.
    pub x_chain: Vec<ComponentSpec>,
    /// DUT towards VNA port 2.
    pub y_chain: Vec<ComponentSpec>,
    /// Standard deviation of the real and imaginary noise added to every raw S-entry.
    pub noise_sigma: f64,
    pub seed: u64,
    pub z_ref: Complex64,
}

impl ChainScenario {
    pub fn new(grid: Vec<f64>) -> Self {
        Self {
            grid,
            x_chain: Vec::new(),
            y_chain: Vec::new(),
            noise_sigma: 0.0,
            seed: 0,
            z_ref: Complex64::new(50.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        crate::network::validate_grid(&self.grid)?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SimError::InvalidSpec(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        for c in self.x_chain.iter().chain(&self.y_chain) {
            c.validate()?;
        }
        Ok(())
    }

    fn chain_network(&self, chain: &[ComponentSpec]) -> Result<NetworkData, SimError> {
        let parts = chain
            .iter()
            .map(|c| make_component(c, &self.grid, self.z_ref))
            .collect::<Result<Vec<_>, _>>()?;
        match cascade_all(&parts)? {
            Some(net) => Ok(net),
            None => Ok(make_component(&ComponentSpec::Thru, &self.grid, self.z_ref)?),
        }
    }

    /// Cascade of the port-1 side chain (thru when empty).
    pub fn x_network(&self) -> Result<NetworkData, SimError> {
        self.chain_network(&self.x_chain)
    }

    /// Cascade of the port-2 side chain (thru when empty).
    pub fn y_network(&self) -> Result<NetworkData, SimError> {
        self.chain_network(&self.y_chain)
    }

    fn noisy(&self, m: TwoPortS, stream: u64, index: usize) -> TwoPortS {
        if self.noise_sigma == 0.0 {
            return m;
        }
        let n = noise::complex_normals(self.seed, stream, index, self.noise_sigma);
        TwoPortS::new(m.s11 + n[0], m.s21 + n[1], m.s12 + n[2], m.s22 + n[3])
    }
}

/// Raw measurement of `inner` through both chains, noise from stream 0.
pub fn embed(scenario: &ChainScenario, inner: &NetworkData) -> Result<NetworkData, SimError> {
    embed_stream(scenario, inner, streams::DEFAULT)
}

/// Raw measurement of `inner` with noise drawn from `stream`.
pub fn embed_stream(scenario: &ChainScenario, inner: &NetworkData, stream: u64) -> Result<NetworkData, SimError> {
    scenario.validate()?;
    if inner.frequencies() != scenario.grid.as_slice() {
        return Err(SimError::GridMismatch);
    }
    let inner = inner.clone().with_z_ref(scenario.z_ref)?;
    let x = scenario.x_network()?;
    let y = scenario.y_network()?;
    let clean = cascade(&cascade(&x, &inner)?, &y)?;
    let noisy = clean.s().iter().enumerate().map(|(k, m)| scenario.noisy(*m, stream, k)).collect();
    Ok(NetworkData::new(scenario.grid.clone(), noisy, scenario.z_ref)?)
}

/// Ideal standards used to generate a TRL dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StandardSpecs {
    pub line_delay_s: f64,
    pub line_loss: LineLoss,
    /// Actual offset of the reflect standard.
    pub reflect_offset_s: f64,
    /// Offset assumed by the calibration.
    pub reflect_nominal_offset_s: f64,
    /// Delay the calibration is told the line has.
    pub line_delay_nominal_s: Option<f64>,
}

impl Default for StandardSpecs {
    fn default() -> Self {
        Self {
            line_delay_s: 50e-12,
            line_loss: LineLoss::Flat { db: 0.0 },
            reflect_offset_s: 0.0,
            reflect_nominal_offset_s: 0.0,
            line_delay_nominal_s: None,
        }
    }
}

/// Raw thru, line and per-port reflect through the scenario's chains.
pub fn generate_trl_dataset(scenario: &ChainScenario, standards: &StandardSpecs) -> Result<TrlStandardSet, SimError> {
    scenario.validate()?;
    let grid = &scenario.grid;
    let thru = make_component(&ComponentSpec::Thru, grid, scenario.z_ref)?;
    let line = make_component(
        &ComponentSpec::Line { delay_s: standards.line_delay_s, loss: standards.line_loss },
        grid,
        scenario.z_ref,
    )?;
    let reflect = make_component(
        &ComponentSpec::OffsetShort { offset_delay_s: standards.reflect_offset_s },
        grid,
        scenario.z_ref,
    )?;
    let x = scenario.x_network()?;
    let y = scenario.y_network()?;
    let reflect_noise = |stream: u64, k: usize| {
        if scenario.noise_sigma == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            noise::complex_normals(scenario.seed, stream, k, scenario.noise_sigma)[0]
        }
    };
    let raw_reflect_p1 = (0..grid.len())
        .map(|k| x.s()[k].input_reflection(reflect.s()[k].s11) + reflect_noise(streams::REFLECT_P1, k))
        .collect();
    let raw_reflect_p2 = (0..grid.len())
        .map(|k| y.s()[k].output_reflection(reflect.s()[k].s22) + reflect_noise(streams::REFLECT_P2, k))
        .collect();
    Ok(TrlStandardSet {
        raw_thru: embed_stream(scenario, &thru, streams::THRU)?,
        raw_line: embed_stream(scenario, &line, streams::LINE)?,
        raw_reflect_p1,
        raw_reflect_p2,
        reflect_nominal: ReflectNominal::OffsetShort { offset_delay_s: standards.reflect_nominal_offset_s },
        line_delay_nominal: standards.line_delay_nominal_s.unwrap_or(standards.line_delay_s),
        line_impedance: scenario.z_ref,
    })
}

/// Random passive two-port: every point has largest singular value `<= max_sv`.
pub fn random_passive(grid: &[f64], seed: u64, max_sv: f64) -> Result<NetworkData, SimError> {
    let s = (0..grid.len())
        .map(|k| {
            let u = noise::uniforms(seed, 0xD07, k);
            let c = |a: f64, b: f64| Complex64::from_polar(a, 2.0 * std::f64::consts::PI * b);
            // transmission kept away from zero so the T-form stays well conditioned
            let m = TwoPortS::new(
                c(u[0] * 0.5, u[1]),
                c(0.2 + 0.8 * u[2], u[3]),
                c(0.2 + 0.8 * u[4], u[5]),
                c(u[6] * 0.5, u[7]),
            );
            let sv = m.max_singular_value();
            let k = max_sv / sv.max(max_sv);
            TwoPortS::new(m.s11 * k, m.s21 * k, m.s12 * k, m.s22 * k)
        })
        .collect();
    Ok(NetworkData::with_default_ref(grid.to_vec(), s)?)
}
