//! Reset/step control environment over a scenario.
//!
//! An episode covers the scenario's hydraulic states: `reset` solves
//! `t = 0` and every `step` solves the next one, so a scenario with `N`
//! states allows `N − 1` steps. Actions override the baseline pump and
//! valve settings for that step only; actuator events of the scenario win
//! inside their windows. Observations are corrupted sensor rows.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hydraulics::{Controls, HydraulicModel, HydraulicState, SimulationError, Simulator, GRAVITY};
use crate::network::{LinkKind, Network, NodeKind};
use crate::scada::{Corruptor, ScadaError, SensorReader};
use crate::scenario::Scenario;

const WATER_DENSITY: f64 = 1000.0;
const PUMP_EFFICIENCY: f64 = 0.75;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("episode finished; call reset")]
    EpisodeFinished,
    #[error("environment not reset")]
    NotReset,
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("quality sensors are not available in the control environment")]
    QualityUnsupported,
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Scada(#[from] ScadaError),
}

/// Per-step overrides keyed by element id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Action {
    pub pump_speeds: BTreeMap<String, f64>,
    pub pump_states: BTreeMap<String, bool>,
    pub valve_states: BTreeMap<String, bool>,
}

impl Action {
    pub fn noop() -> Self {
        Self::default()
    }

    pub fn pump_off(id: &str) -> Self {
        let mut a = Self::default();
        a.pump_states.insert(id.to_string(), false);
        a
    }

    /// Writes the overrides into `controls`.
    pub fn apply(&self, network: &Network, controls: &mut Controls) -> Result<(), EnvError> {
        let link = |id: &str, kind: LinkKind| {
            network
                .link_index(id)
                .filter(|&k| network.link_kind(k) == kind)
                .ok_or_else(|| EnvError::InvalidAction(format!("no {kind:?} named {id}").to_lowercase()))
        };
        for (id, &speed) in &self.pump_speeds {
            if !(speed.is_finite() && speed >= 0.0) {
                return Err(EnvError::InvalidAction(format!("speed {speed} for pump {id}")));
            }
            controls.pump_speed[link(id, LinkKind::Pump)?] = speed;
        }
        for (id, &on) in &self.pump_states {
            controls.link_open[link(id, LinkKind::Pump)?] = on;
        }
        for (id, &open) in &self.valve_states {
            controls.link_open[link(id, LinkKind::Valve)?] = open;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub t: u64,
    pub iterations: usize,
    pub relative_change: f64,
    /// Names of scenario events active at `t`.
    pub active_events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<Option<f64>>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Default reward: pump power in kW (ρ·g·Q·H / 0.75) and a penalty per metre
/// of pressure head below `pressure_min` at every junction, both negated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardSettings {
    pub pressure_min: f64,
    pub penalty: f64,
}

impl Default for RewardSettings {
    fn default() -> Self {
        Self {
            pressure_min: 20.0,
            penalty: 1.0,
        }
    }
}

pub fn pump_power_kw(state: &HydraulicState, model: &HydraulicModel, network: &Network) -> f64 {
    model
        .links
        .iter()
        .enumerate()
        .filter(|(k, l)| network.link_kind(l.origin) == LinkKind::Pump && state.link_open[*k])
        .map(|(k, l)| {
            let gain = (state.head[l.to] - state.head[l.from]).max(0.0);
            WATER_DENSITY * GRAVITY * state.flow[k].max(0.0) * gain / PUMP_EFFICIENCY / 1000.0
        })
        .sum()
}

pub fn pressure_deficit(state: &HydraulicState, model: &HydraulicModel, pressure_min: f64) -> f64 {
    (0..model.original_nodes)
        .filter(|&i| model.node_kinds[i] == NodeKind::Junction)
        .map(|i| (pressure_min - state.pressure_head[i]).max(0.0))
        .sum()
}

pub type RewardFn = Box<dyn Fn(&HydraulicState, &HydraulicModel, &Network) -> f64 + Send>;

pub fn default_reward(settings: RewardSettings) -> RewardFn {
    Box::new(move |state, model, network| {
        -pump_power_kw(state, model, network) - settings.penalty * pressure_deficit(state, model, settings.pressure_min)
    })
}

struct Episode {
    sim: Simulator,
    corruptor: Corruptor,
    last: HydraulicState,
}

pub struct ControlEnv {
    scenario: Scenario,
    reader: SensorReader,
    reward: RewardFn,
    episode: Option<Episode>,
    states: Vec<HydraulicState>,
}

impl ControlEnv {
    pub fn new(scenario: Scenario) -> Result<Self, EnvError> {
        Self::with_reward(scenario, default_reward(RewardSettings::default()))
    }

    pub fn with_reward(scenario: Scenario, reward: RewardFn) -> Result<Self, EnvError> {
        let sim = Self::simulator(&scenario)?;
        let reader = SensorReader::new(sim.model(), &scenario.config.sensors)?;
        if reader.needs_quality() {
            return Err(EnvError::QualityUnsupported);
        }
        Ok(Self {
            scenario,
            reader,
            reward,
            episode: None,
            states: Vec::new(),
        })
    }

    fn simulator(scenario: &Scenario) -> Result<Simulator, SimulationError> {
        Simulator::new(
            &scenario.network,
            scenario.config.simulation_options(),
            &scenario.config.leakages,
            &scenario.config.actuator_events,
        )
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Steps available after `reset`.
    pub fn total_steps(&self) -> usize {
        self.scenario.config.simulation_options().state_count().unwrap_or(1) - 1
    }

    pub fn current_step(&self) -> Option<usize> {
        self.episode.as_ref().map(|e| e.sim.step_index())
    }

    pub fn is_done(&self) -> bool {
        self.current_step().is_some_and(|s| s == self.total_steps())
    }

    /// Hydraulic states of the current episode, `t = 0` first.
    pub fn states(&self) -> &[HydraulicState] {
        &self.states
    }

    pub fn reset(&mut self) -> Result<Vec<Option<f64>>, EnvError> {
        self.episode = None;
        self.states.clear();
        let mut sim = Self::simulator(&self.scenario)?;
        let mut corruptor = Corruptor::new(
            self.reader.columns(),
            &self.scenario.config.sensor_faults,
            &self.scenario.config.communication_events,
            &self.scenario.sensor_noise(),
            &self.scenario.measurement_stream(),
        )?;
        let controls = sim.controls_at(sim.baseline().clone(), 0)?;
        let state = sim.solve_current(&controls)?;
        let observation = corruptor.push(0, &self.reader.read(&state, None));
        self.states.push(state.clone());
        self.episode = Some(Episode {
            sim,
            corruptor,
            last: state,
        });
        Ok(observation)
    }

    pub fn step(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        let total = self.total_steps();
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if ep.sim.step_index() >= total {
            return Err(EnvError::EpisodeFinished);
        }
        let mut base = ep.sim.baseline().clone();
        action.apply(ep.sim.network(), &mut base)?;
        ep.sim.advance(&ep.last);
        let t = ep.sim.time();
        let controls = ep.sim.controls_at(base, t)?;
        let state = ep.sim.solve_current(&controls)?;
        let observation = ep.corruptor.push(t, &self.reader.read(&state, None));
        let reward = (self.reward)(&state, ep.sim.model(), ep.sim.network());
        ep.last = state.clone();
        let done = ep.sim.step_index() == total;
        let info = StepInfo {
            t,
            iterations: state.iterations,
            relative_change: state.relative_change,
            active_events: self.active_events(t),
        };
        self.states.push(state);
        Ok(StepOutcome {
            observation,
            reward,
            done,
            info,
        })
    }

    fn active_events(&self, t: u64) -> Vec<String> {
        let c = &self.scenario.config;
        let mut out = Vec::new();
        out.extend(
            c.leakages
                .iter()
                .enumerate()
                .filter(|(_, e)| e.window.contains(t))
                .map(|(i, _)| format!("leakage{i}")),
        );
        out.extend(
            c.actuator_events
                .iter()
                .enumerate()
                .filter(|(_, e)| e.window.contains(t))
                .map(|(i, _)| format!("actuator{i}")),
        );
        out.extend(
            c.sensor_faults
                .iter()
                .enumerate()
                .filter(|(_, e)| e.window.contains(t))
                .map(|(i, _)| format!("sensor_fault{i}")),
        );
        out.extend(
            c.communication_events
                .iter()
                .enumerate()
                .filter(|(_, e)| e.window.contains(t))
                .map(|(i, _)| format!("communication{i}")),
        );
        out
    }
}
