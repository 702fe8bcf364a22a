//! Scenario files: a network reference, time settings, sensors, events,
//! uncertainties and a seed, read from TOML.
//!
//! ```toml
//! network_path = "bundled:toy9"
//! seed = 42
//!
//! [simulation]
//! duration_s = 86400
//! hydraulic_time_step_s = 300
//!
//! [sensors]
//! pressure_nodes = ["J3", "J5"]
//! flow_links = ["P1"]
//!
//! [[leakages]]
//! kind = "abrupt"
//! link_id = "P5"
//! diameter = 0.01
//! start_time = 43200
//! end_time = 57600
//!
//! [outputs]
//! scada_csv_path = "scada.csv"
//! truth_csv_path = "truth.csv"
//! ```
//!
//! Times are integer seconds: one day is 86400, five minutes 300.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{ActuatorEvent, CommunicationEvent, EventError, LeakageEvent, SensorFaultEvent};
use crate::hydraulics::{simulate, SimulationError, SimulationOptions, StateSeries};
use crate::inp::{parse_inp, InpError};
use crate::network::Network;
use crate::quality::{simulate_quality, QualityError, QualitySettings, QualityState};
use crate::scada::{corrupt, extract_readings, GroundTruthEvent, ScadaData, ScadaError, SensorPlacement};
use crate::uncertainty::{
    apply_parameter_uncertainties, perturb_decay_rate, SeededStream, UncertaintyModel, UncertaintyTarget,
};

/// Networks shipped with the crate, addressed as `bundled:<name>`.
pub const BUNDLED_NETWORKS: [(&str, &str); 3] = [
    ("toy9", include_str!("../networks/toy9.inp")),
    ("desk32", include_str!("../networks/desk32.inp")),
    ("pumped", include_str!("../networks/pumped.inp")),
];

pub fn bundled_network(name: &str) -> Option<&'static str> {
    BUNDLED_NETWORKS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config field {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("network {path}: {source}")]
    Network {
        path: String,
        #[source]
        source: InpError,
    },
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Quality(#[from] QualityError),
    #[error(transparent)]
    Scada(#[from] ScadaError),
}

impl ScenarioError {
    /// Configuration problems as opposed to failures while simulating.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, ScenarioError::Simulation(_) | ScenarioError::Quality(_))
    }

    fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        ScenarioError::Invalid {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub duration_s: u64,
    pub hydraulic_time_step_s: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_time_step_s: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityConfig {
    /// 1/s
    pub decay_rate_k: f64,
    /// Node id → concentration, mg/L.
    pub source_nodes: BTreeMap<String, f64>,
    pub initial_concentration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_scada_path")]
    pub scada_csv_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_csv_path: Option<String>,
}

fn default_scada_path() -> String {
    "scada.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            scada_csv_path: default_scada_path(),
            truth_csv_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Path to an INP file (relative to the config file) or `bundled:<name>`.
    pub network_path: String,
    #[serde(default)]
    pub seed: u64,
    pub simulation: SimulationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<QualityConfig>,
    #[serde(default)]
    pub sensors: SensorPlacement,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leakages: Vec<LeakageEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actuator_events: Vec<ActuatorEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sensor_faults: Vec<SensorFaultEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub communication_events: Vec<CommunicationEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub uncertainties: Vec<UncertaintyModel>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ScenarioConfig {
    /// A config with the given network and times and nothing else.
    pub fn new(network_path: &str, duration_s: u64, hydraulic_time_step_s: u64) -> Self {
        Self {
            network_path: network_path.to_string(),
            seed: 0,
            simulation: SimulationConfig {
                duration_s,
                hydraulic_time_step_s,
                quality_time_step_s: None,
            },
            quality: None,
            sensors: SensorPlacement::default(),
            leakages: Vec::new(),
            actuator_events: Vec::new(),
            sensor_faults: Vec::new(),
            communication_events: Vec::new(),
            uncertainties: Vec::new(),
            outputs: OutputConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML form; parsing it gives back an equal config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config types always serialize")
    }

    pub fn simulation_options(&self) -> SimulationOptions {
        SimulationOptions::new(self.simulation.duration_s, self.simulation.hydraulic_time_step_s)
    }

    pub fn quality_settings(&self) -> Option<QualitySettings> {
        let q = self.quality.clone().or_else(|| {
            (!self.sensors.quality_nodes.is_empty() || self.simulation.quality_time_step_s.is_some())
                .then(QualityConfig::default)
        })?;
        Some(QualitySettings {
            quality_time_step_s: self.simulation.quality_time_step_s.unwrap_or(60),
            decay_rate_k: q.decay_rate_k,
            source_nodes: q.source_nodes,
            initial_concentration: q.initial_concentration,
        })
    }

    /// Resolves `network_path` against `base_dir`.
    pub fn load_network(&self, base_dir: &Path) -> Result<Network, ScenarioError> {
        load_network(&self.network_path, base_dir)
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self, network: &Network) -> Result<(), ScenarioError> {
        let sim = &self.simulation;
        if sim.hydraulic_time_step_s == 0 {
            return Err(ScenarioError::invalid(
                "simulation.hydraulic_time_step_s",
                "must be > 0",
            ));
        }
        if sim.duration_s == 0 || !sim.duration_s.is_multiple_of(sim.hydraulic_time_step_s) {
            return Err(ScenarioError::invalid(
                "simulation.duration_s",
                format!(
                    "{} is not a positive multiple of the hydraulic step {}",
                    sim.duration_s, sim.hydraulic_time_step_s
                ),
            ));
        }
        if let Some(q) = sim.quality_time_step_s {
            if q == 0 || !sim.hydraulic_time_step_s.is_multiple_of(q) {
                return Err(ScenarioError::invalid(
                    "simulation.quality_time_step_s",
                    "must divide the hydraulic step",
                ));
            }
        }
        if self.outputs.scada_csv_path.is_empty() {
            return Err(ScenarioError::invalid("outputs.scada_csv_path", "must not be empty"));
        }
        if self.outputs.truth_csv_path.as_deref() == Some("") {
            return Err(ScenarioError::invalid("outputs.truth_csv_path", "must not be empty"));
        }
        if let Some(q) = &self.quality {
            if !(q.decay_rate_k.is_finite() && q.decay_rate_k >= 0.0) {
                return Err(ScenarioError::invalid(
                    "quality.decay_rate_k",
                    "must be finite and >= 0",
                ));
            }
            for id in q.source_nodes.keys() {
                if network.node_index(id).is_none() {
                    return Err(ScenarioError::invalid(
                        "quality.source_nodes",
                        format!("unknown node {id}"),
                    ));
                }
            }
        }
        self.sensors
            .check(network)
            .map_err(|e| ScenarioError::invalid("sensors", e))?;
        let d = sim.duration_s;
        for l in &self.leakages {
            l.check(network, d)?;
        }
        for a in &self.actuator_events {
            a.check(network, d)?;
        }
        let columns = self.sensors.columns();
        for (i, f) in self.sensor_faults.iter().enumerate() {
            f.check(d)?;
            if !columns
                .iter()
                .any(|c| c.sensor_type == f.sensor_type && c.element_id == f.sensor_id)
            {
                return Err(ScenarioError::invalid(
                    format!("sensor_faults[{i}]"),
                    format!("no {} sensor on {}", f.sensor_type, f.sensor_id),
                ));
            }
        }
        for (i, c) in self.communication_events.iter().enumerate() {
            c.check(d)?;
            if let (Some(ty), Some(id)) = (c.sensor_type, c.sensor_id.as_deref()) {
                if !columns.iter().any(|col| col.sensor_type == ty && col.element_id == id) {
                    return Err(ScenarioError::invalid(
                        format!("communication_events[{i}]"),
                        format!("no {ty} sensor on {id}"),
                    ));
                }
            }
        }
        for (i, u) in self.uncertainties.iter().enumerate() {
            u.check()
                .map_err(|e| ScenarioError::invalid(format!("uncertainties[{i}]"), e))?;
        }
        Ok(())
    }

    /// Labelled windows of every configured event.
    pub fn ground_truth(&self) -> Vec<GroundTruthEvent> {
        let mut out = Vec::new();
        for (i, e) in self.leakages.iter().enumerate() {
            out.push(GroundTruthEvent {
                event_id: format!("leakage{i}"),
                kind: e.event_kind(),
                start_s: e.window.start_time,
                end_s: e.window.end_time,
            });
        }
        for (i, e) in self.actuator_events.iter().enumerate() {
            out.push(GroundTruthEvent {
                event_id: format!("actuator{i}"),
                kind: e.event_kind(),
                start_s: e.window.start_time,
                end_s: e.window.end_time,
            });
        }
        for (i, e) in self.sensor_faults.iter().enumerate() {
            out.push(GroundTruthEvent {
                event_id: format!("sensor_fault{i}"),
                kind: e.event_kind(),
                start_s: e.window.start_time,
                end_s: e.window.end_time,
            });
        }
        for (i, e) in self.communication_events.iter().enumerate() {
            out.push(GroundTruthEvent {
                event_id: format!("communication{i}"),
                kind: e.event_kind(),
                start_s: e.window.start_time,
                end_s: e.window.end_time,
            });
        }
        out
    }
}

/// Loads `bundled:<name>` or an INP file relative to `base_dir`.
pub fn load_network(network_path: &str, base_dir: &Path) -> Result<Network, ScenarioError> {
    let text = match network_path.strip_prefix("bundled:") {
        Some(name) => bundled_network(name)
            .ok_or_else(|| ScenarioError::invalid("network_path", format!("no bundled network {name}")))?
            .to_string(),
        None => {
            let path: PathBuf = base_dir.join(network_path);
            std::fs::read_to_string(&path).map_err(|e| ScenarioError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?
        }
    };
    parse_inp(&text).map_err(|source| ScenarioError::Network {
        path: network_path.to_string(),
        source,
    })
}

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub series: StateSeries,
    pub quality: Option<Vec<QualityState>>,
    /// Sensor readings before any corruption.
    pub truth: ScadaData,
    /// Readings as delivered: noise, faults and communication events applied.
    pub scada: ScadaData,
}

/// A validated configuration bound to its network. Parameter uncertainties
/// are applied once here, giving the "twin" network that is simulated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub base_network: Network,
    pub network: Network,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, base_network: Network) -> Result<Self, ScenarioError> {
        config.validate(&base_network)?;
        let network = apply_parameter_uncertainties(
            &base_network,
            &config.uncertainties,
            &Self::stream_of(&config, "parameters"),
        );
        Ok(Self {
            config,
            base_network,
            network,
        })
    }

    /// Loads the config file and its network.
    pub fn load(config_path: &Path) -> Result<Self, ScenarioError> {
        let config = ScenarioConfig::load(config_path)?;
        let base = config_path.parent().unwrap_or(Path::new("."));
        let network = config.load_network(base)?;
        Self::new(config, network)
    }

    fn stream_of(config: &ScenarioConfig, part: &str) -> SeededStream {
        SeededStream::new(config.seed).child(part)
    }

    /// Root of the random streams used for measurements.
    pub fn measurement_stream(&self) -> SeededStream {
        Self::stream_of(&self.config, "measurement")
    }

    pub fn simulate_hydraulics(&self) -> Result<StateSeries, ScenarioError> {
        Ok(simulate(
            &self.network,
            self.config.simulation_options(),
            &self.config.leakages,
            &self.config.actuator_events,
        )?)
    }

    /// Quality settings after decay-rate uncertainty.
    pub fn quality_settings(&self) -> Option<QualitySettings> {
        self.config.quality_settings().map(|mut q| {
            q.decay_rate_k = perturb_decay_rate(
                q.decay_rate_k,
                &self.config.uncertainties,
                &Self::stream_of(&self.config, "quality"),
            );
            q
        })
    }

    pub fn sensor_noise(&self) -> Vec<UncertaintyModel> {
        self.config
            .uncertainties
            .iter()
            .filter(|u| u.target == UncertaintyTarget::SensorNoise)
            .cloned()
            .collect()
    }

    pub fn run(&self) -> Result<ScenarioOutput, ScenarioError> {
        let series = self.simulate_hydraulics()?;
        let quality = match self.quality_settings() {
            Some(q) => Some(simulate_quality(&series, &self.network, &q)?),
            None => None,
        };
        let mut truth = extract_readings(&series, quality.as_deref(), &self.config.sensors)?;
        truth.ground_truth = self.config.ground_truth();
        let scada = corrupt(
            &truth,
            &self.config.sensor_faults,
            &self.config.communication_events,
            &self.sensor_noise(),
            &self.measurement_stream(),
        )?;
        Ok(ScenarioOutput {
            series,
            quality,
            truth,
            scada,
        })
    }
}
