//! JSON scenario files and the datasets they produce.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{run_configuration, ConfigOverrides, Configuration};
use super::twpa::{synth_twpa, PumpSetting, TwpaSpec, LOW_SIGNAL_DBM};
use super::{embed_stream, generate_trl_dataset, random_passive, streams, ChainScenario, SimError, StandardSpecs};
use crate::network::{linear_grid, make_component, ComponentSpec, NetworkData, TwoPortS};
use crate::trl::TrlStandardSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Linear { start_hz: f64, stop_hz: f64, points: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn frequencies(&self) -> Vec<f64> {
        match self {
            GridSpec::Linear { start_hz, stop_hz, points } => linear_grid(*start_hz, *stop_hz, *points),
            GridSpec::List(v) => v.clone(),
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Linear { start_hz: 4e9, stop_hz: 8e9, points: 401 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DutKind {
    Component {
        component: ComponentSpec,
    },
    RandomPassive {
        seed: u64,
        #[serde(default = "default_max_sv")]
        max_sv: f64,
    },
    Twpa {
        #[serde(default)]
        twpa: TwpaSpec,
        #[serde(default)]
        pump: Option<PumpSetting>,
        #[serde(default)]
        signal_power_dbm: Option<f64>,
    },
    Configuration {
        config: Configuration,
        #[serde(default)]
        twpa: TwpaSpec,
        #[serde(default)]
        pump: Option<PumpSetting>,
        #[serde(default)]
        signal_power_dbm: Option<f64>,
    },
}

fn default_max_sv() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DutEntry {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: DutKind,
}

impl DutEntry {
    fn default_name(&self, index: usize) -> String {
        match &self.kind {
            DutKind::Configuration { config, .. } => config.to_string(),
            DutKind::Twpa { .. } => "twpa".to_string(),
            _ => format!("dut{index}"),
        }
    }

    fn pump_on(&self) -> bool {
        matches!(&self.kind, DutKind::Twpa { pump: Some(_), .. } | DutKind::Configuration { pump: Some(_), .. })
    }

    fn truth(&self, grid: &[f64], z_ref: Complex64) -> Result<NetworkData, SimError> {
        match &self.kind {
            DutKind::Component { component } => Ok(make_component(component, grid, z_ref)?),
            DutKind::RandomPassive { seed, max_sv } => random_passive(grid, *seed, *max_sv),
            DutKind::Twpa { twpa, pump, signal_power_dbm } => {
                synth_twpa(twpa, grid, pump.as_ref(), signal_power_dbm.unwrap_or(LOW_SIGNAL_DBM))
            }
            DutKind::Configuration { config, twpa, pump, signal_power_dbm } => {
                let overrides = ConfigOverrides {
                    grid: grid.to_vec(),
                    twpa: twpa.clone(),
                    pump: *pump,
                    signal_power_dbm: signal_power_dbm.unwrap_or(LOW_SIGNAL_DBM),
                    ..ConfigOverrides::default()
                };
                run_configuration(*config, &overrides)
            }
        }
    }
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioFile {
    /// Prefix of the standard file names.
    pub label: String,
    pub grid: GridSpec,
    pub x_chain: Vec<ComponentSpec>,
    pub y_chain: Vec<ComponentSpec>,
    pub noise_sigma: f64,
    pub seed: u64,
    pub standards: StandardSpecs,
    pub duts: Vec<DutEntry>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            label: "sim".into(),
            grid: GridSpec::default(),
            x_chain: Vec::new(),
            y_chain: Vec::new(),
            noise_sigma: 0.0,
            seed: 0,
            standards: StandardSpecs::default(),
            duts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDut {
    pub name: String,
    pub pump_on: bool,
    pub raw: NetworkData,
    pub truth: NetworkData,
}

impl SimulatedDut {
    fn state(&self) -> &'static str {
        if self.pump_on {
            "on"
        } else {
            "off"
        }
    }

    pub fn raw_file_name(&self) -> String {
        format!("{}_dut_{}.s2p", self.name, self.state())
    }

    pub fn truth_file_name(&self) -> String {
        format!("{}_truth_{}.s2p", self.name, self.state())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub label: String,
    pub standards: TrlStandardSet,
    pub duts: Vec<SimulatedDut>,
}

impl SimulatedDataset {
    /// Every output as `(file name, network)`. Reflect files carry the
    /// port-1 reading in S11 and the port-2 reading in S22.
    pub fn files(&self) -> Result<Vec<(String, NetworkData)>, SimError> {
        let std = &self.standards;
        let zero = Complex64::new(0.0, 0.0);
        let grid = std.raw_thru.frequencies().to_vec();
        let z = std.raw_thru.z_ref();
        let reflect1 = grid
            .iter()
            .enumerate()
            .map(|(k, _)| TwoPortS::new(std.raw_reflect_p1[k], zero, zero, zero))
            .collect();
        let reflect2 = grid
            .iter()
            .enumerate()
            .map(|(k, _)| TwoPortS::new(zero, zero, zero, std.raw_reflect_p2[k]))
            .collect();
        let mut out = vec![
            (format!("{}_thru_off.s2p", self.label), std.raw_thru.clone()),
            (format!("{}_line_off.s2p", self.label), std.raw_line.clone()),
            (format!("{}_reflect1_off.s2p", self.label), NetworkData::new(grid.clone(), reflect1, z)?),
            (format!("{}_reflect2_off.s2p", self.label), NetworkData::new(grid, reflect2, z)?),
        ];
        for d in &self.duts {
            out.push((d.raw_file_name(), d.raw.clone()));
            out.push((d.truth_file_name(), d.truth.clone()));
        }
        Ok(out)
    }
}

impl ScenarioFile {
    pub fn chain_scenario(&self) -> ChainScenario {
        ChainScenario {
            grid: self.grid.frequencies(),
            x_chain: self.x_chain.clone(),
            y_chain: self.y_chain.clone(),
            noise_sigma: self.noise_sigma,
            seed: self.seed,
            z_ref: Complex64::new(50.0, 0.0),
        }
    }

    pub fn run(&self) -> Result<SimulatedDataset, SimError> {
        let chain = self.chain_scenario();
        chain.validate()?;
        let standards = generate_trl_dataset(&chain, &self.standards)?;
        let mut duts = Vec::with_capacity(self.duts.len());
        for (i, entry) in self.duts.iter().enumerate() {
            let truth = entry.truth(&chain.grid, chain.z_ref)?;
            let raw = embed_stream(&chain, &truth, streams::DUT_BASE + i as u64)?;
            duts.push(SimulatedDut {
                name: entry.name.clone().unwrap_or_else(|| entry.default_name(i)),
                pump_on: entry.pump_on(),
                raw,
                truth,
            });
        }
        let mut names: Vec<String> = duts.iter().map(|d| d.raw_file_name()).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidSpec("two DUTs map to the same output file".into()));
        }
        Ok(SimulatedDataset { label: self.label.clone(), standards, duts })
    }
}
