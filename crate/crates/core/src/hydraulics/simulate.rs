//! Snapshot and extended-period simulation.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::events::{apply_actuator_events, leak_emitter_coef, ActuatorEvent, EventError, LeakageEvent};
use crate::hydraulics::model::HydraulicModel;
use crate::hydraulics::solver::{GgaSolver, SnapshotInput, SolverSettings};
use crate::hydraulics::SolverError;
use crate::inp::write_inp;
use crate::network::{LinkKind, Network, Tank};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("at t={t}s: {source}")]
    Solver {
        t: u64,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Setup(#[from] SolverError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("invalid simulation options: {0}")]
    Options(String),
}

/// Link statuses and pump speeds, indexed by network link.
#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    pub link_open: Vec<bool>,
    pub pump_speed: Vec<f64>,
}

impl Controls {
    /// Statuses and speeds as stored in the network.
    pub fn baseline(network: &Network) -> Self {
        let mut link_open = Vec::with_capacity(network.link_count());
        let mut pump_speed = Vec::with_capacity(network.link_count());
        for k in 0..network.link_count() {
            let (open, speed) = match network.link_kind(k) {
                LinkKind::Pipe => (network.pipes()[k].open, 1.0),
                LinkKind::Pump => {
                    let p = &network.pumps()[k - network.pump_offset()];
                    (p.running, p.speed)
                }
                LinkKind::Valve => (network.valves()[k - network.valve_offset()].open, 1.0),
            };
            link_open.push(open);
            pump_speed.push(speed);
        }
        Self { link_open, pump_speed }
    }
}

/// Solved network state at one instant. Vectors are indexed like the
/// compiled [`HydraulicModel`]: network nodes/links first, leak nodes and
/// downstream pipe halves after them.
#[derive(Debug, Clone, PartialEq)]
pub struct HydraulicState {
    pub t: u64,
    /// m³/s, positive from `from` to `to`.
    pub flow: Vec<f64>,
    /// Total head per node, m.
    pub head: Vec<f64>,
    /// `head − elevation` per node, m.
    pub pressure_head: Vec<f64>,
    /// Per network tank, m.
    pub tank_level: Vec<f64>,
    /// Delivered demand per node (leak outflow at leak nodes), m³/s.
    pub actual_demand: Vec<f64>,
    /// Per leak site, m³/s.
    pub leak_outflow: Vec<f64>,
    /// Effective link status used in the solve.
    pub link_open: Vec<bool>,
    pub iterations: usize,
    pub relative_change: f64,
}

/// Equally spaced states at `t = 0, Δt, …, duration − Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    pub states: Vec<HydraulicState>,
    pub config_digest: String,
    pub step_s: u64,
    pub model: HydraulicModel,
}

impl StateSeries {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<u64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// SHA-256 over the bit patterns of every state.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.states {
            h.update(s.t.to_le_bytes());
            for v in s
                .flow
                .iter()
                .chain(&s.head)
                .chain(&s.tank_level)
                .chain(&s.actual_demand)
                .chain(&s.leak_outflow)
            {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        crate::hex(&h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub duration_s: u64,
    pub hydraulic_step_s: u64,
    pub solver: SolverSettings,
}

impl SimulationOptions {
    pub fn new(duration_s: u64, hydraulic_step_s: u64) -> Self {
        Self {
            duration_s,
            hydraulic_step_s,
            solver: SolverSettings::default(),
        }
    }

    /// Number of states; the duration must be a positive multiple of the step.
    pub fn state_count(&self) -> Result<usize, SimulationError> {
        if self.hydraulic_step_s == 0 {
            return Err(SimulationError::Options("hydraulic step must be > 0".into()));
        }
        if self.duration_s == 0 || !self.duration_s.is_multiple_of(self.hydraulic_step_s) {
            return Err(SimulationError::Options(format!(
                "duration {} is not a positive multiple of the hydraulic step {}",
                self.duration_s, self.hydraulic_step_s
            )));
        }
        let s = self.solver;
        if !(s.accuracy > 0.0 && s.max_iterations >= 1 && s.damping > 0.0 && s.damping <= 1.0) {
            return Err(SimulationError::Options("invalid solver settings".into()));
        }
        Ok((self.duration_s / self.hydraulic_step_s) as usize)
    }
}

/// Explicit Euler update of a tank level, clamped to its bounds.
pub fn tank_step(tank: &Tank, level: f64, net_inflow: f64, dt: f64) -> f64 {
    (level + net_inflow * dt / tank.area()).clamp(tank.min_level, tank.max_level)
}

/// Solves a single snapshot with reservoirs at base head and tanks at their
/// initial level.
pub fn solve_snapshot(
    network: &Network,
    demands: &[f64],
    controls: &Controls,
    settings: SolverSettings,
) -> Result<HydraulicState, SolverError> {
    let model = HydraulicModel::compile(network, &[])?;
    let n = model.node_count();
    let mut demand = vec![0.0; n];
    demand[..demands.len()].copy_from_slice(demands);
    let mut fixed_head = model.elevation.clone();
    for (i, t) in network.tanks().iter().enumerate() {
        fixed_head[network.tank_offset() + i] = t.elevation + t.init_level;
    }
    let input = SnapshotInput {
        demand,
        fixed_head,
        link_open: controls.link_open.clone(),
        speed: controls.pump_speed.clone(),
        emitter_coef: Vec::new(),
    };
    let levels: Vec<f64> = network.tanks().iter().map(|t| t.init_level).collect();
    solve_with_tanks(&model, network, &input, &levels, None, settings, 0)
}

fn solve_with_tanks(
    model: &HydraulicModel,
    network: &Network,
    input: &SnapshotInput,
    tank_levels: &[f64],
    warm: Option<&[f64]>,
    settings: SolverSettings,
    t: u64,
) -> Result<HydraulicState, SolverError> {
    let solver = GgaSolver::new(model, settings);
    let mut input = input.clone();
    let tank0 = network.tank_offset();
    let mut iterations = 0;
    // A full tank cannot take more water and an empty one cannot give any:
    // close the offending links and solve again.
    let sol = loop {
        let sol = solver.solve(&input, warm)?;
        iterations += sol.iterations;
        let mut changed = false;
        for (i, tank) in network.tanks().iter().enumerate() {
            let node = tank0 + i;
            let full = tank_levels[i] >= tank.max_level;
            let empty = tank_levels[i] <= tank.min_level;
            if !(full || empty) {
                continue;
            }
            for (k, l) in model.links.iter().enumerate() {
                if !input.link_open[k] {
                    continue;
                }
                let inflow = if l.to == node {
                    sol.flow[k]
                } else if l.from == node {
                    -sol.flow[k]
                } else {
                    continue;
                };
                if (full && inflow > 0.0) || (empty && inflow < 0.0) {
                    input.link_open[k] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break sol;
        }
    };

    let n = model.node_count();
    let mut actual_demand: Vec<f64> = (0..n)
        .map(|i| if model.is_fixed(i) { 0.0 } else { input.demand[i] })
        .collect();
    for (s, site) in model.leak_sites.iter().enumerate() {
        actual_demand[site.node] += sol.emitter_flow[s];
    }
    let pressure_head = (0..n).map(|i| sol.head[i] - model.elevation[i]).collect();
    let link_open = (0..model.link_count())
        .map(|k| {
            input.link_open[k]
                && !(matches!(network.link_kind(model.links[k].origin), LinkKind::Pump) && input.speed[k] <= 0.0)
        })
        .collect();
    Ok(HydraulicState {
        t,
        flow: sol.flow,
        head: sol.head,
        pressure_head,
        tank_level: tank_levels.to_vec(),
        actual_demand,
        leak_outflow: sol.emitter_flow,
        link_open,
        iterations,
        relative_change: sol.relative_change,
    })
}

/// Steps a scenario one hydraulic snapshot at a time. Used directly by the
/// control environment and by [`simulate`].
#[derive(Debug, Clone)]
pub struct Simulator {
    network: Network,
    model: HydraulicModel,
    options: SimulationOptions,
    leaks: Vec<(LeakageEvent, usize)>,
    actuators: Vec<ActuatorEvent>,
    baseline: Controls,
    tank_levels: Vec<f64>,
    step: usize,
    total: usize,
    warm: Option<Vec<f64>>,
    config_digest: String,
}

impl Simulator {
    pub fn new(
        network: &Network,
        options: SimulationOptions,
        leaks: &[LeakageEvent],
        actuators: &[ActuatorEvent],
    ) -> Result<Self, SimulationError> {
        let total = options.state_count()?;
        for leak in leaks {
            leak.check(network, options.duration_s)?;
        }
        for a in actuators {
            a.check(network, options.duration_s)?;
        }
        let leak_pipes: Vec<usize> = leaks
            .iter()
            .map(|l| network.link_index(&l.link_id).expect("checked"))
            .collect();
        let model = HydraulicModel::compile(network, &leak_pipes)?;
        let leaks = leaks
            .iter()
            .zip(&leak_pipes)
            .map(|(l, &p)| (l.clone(), model.leak_site_for(p).expect("compiled")))
            .collect();

        let mut h = Sha256::new();
        h.update(write_inp(network).as_bytes());
        h.update(format!("{options:?}{leaks:?}{actuators:?}").as_bytes());
        let config_digest = crate::hex(&h.finalize());

        Ok(Self {
            baseline: Controls::baseline(network),
            tank_levels: network.tanks().iter().map(|t| t.init_level).collect(),
            network: network.clone(),
            model,
            options,
            leaks,
            actuators: actuators.to_vec(),
            step: 0,
            total,
            warm: None,
            config_digest,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }
    pub fn model(&self) -> &HydraulicModel {
        &self.model
    }
    pub fn options(&self) -> &SimulationOptions {
        &self.options
    }
    pub fn baseline(&self) -> &Controls {
        &self.baseline
    }
    pub fn actuators(&self) -> &[ActuatorEvent] {
        &self.actuators
    }
    pub fn leaks(&self) -> impl Iterator<Item = &LeakageEvent> {
        self.leaks.iter().map(|(l, _)| l)
    }
    /// Index of the next state to be solved.
    pub fn step_index(&self) -> usize {
        self.step
    }
    pub fn state_count(&self) -> usize {
        self.total
    }
    pub fn time(&self) -> u64 {
        self.step as u64 * self.options.hydraulic_step_s
    }
    pub fn tank_levels(&self) -> &[f64] {
        &self.tank_levels
    }
    pub fn config_digest(&self) -> &str {
        &self.config_digest
    }

    /// `base` with every active actuator event applied on top.
    pub fn controls_at(&self, base: Controls, t: u64) -> Result<Controls, SimulationError> {
        Ok(apply_actuator_events(base, &self.actuators, t, &self.network)?)
    }

    /// Solves the state at the current time with the given network-level
    /// controls (actuator events are not applied here).
    pub fn solve_current(&mut self, controls: &Controls) -> Result<HydraulicState, SimulationError> {
        let t = self.time();
        let m = &self.model;
        let net = &self.network;
        let mut demand = vec![0.0; m.node_count()];
        for (j, junction) in net.junctions().iter().enumerate() {
            demand[j] = junction.base_demand * net.demand_multiplier(j, t);
        }
        let mut fixed_head = m.elevation.clone();
        for (i, r) in net.reservoirs().iter().enumerate() {
            let mult = r
                .head_pattern
                .as_deref()
                .and_then(|p| net.pattern(p))
                .map_or(1.0, |p| p.multiplier_at(t));
            fixed_head[net.reservoir_offset() + i] = r.head * mult;
        }
        for (i, tank) in net.tanks().iter().enumerate() {
            fixed_head[net.tank_offset() + i] = tank.elevation + self.tank_levels[i];
        }
        let link_open = m.links.iter().map(|l| controls.link_open[l.origin]).collect();
        let speed = m.links.iter().map(|l| controls.pump_speed[l.origin]).collect();
        let mut emitter_coef = vec![0.0; m.leak_sites.len()];
        for (leak, site) in &self.leaks {
            emitter_coef[*site] += leak_emitter_coef(leak, t);
        }
        let input = SnapshotInput {
            demand,
            fixed_head,
            link_open,
            speed,
            emitter_coef,
        };
        let state = solve_with_tanks(
            m,
            net,
            &input,
            &self.tank_levels,
            self.warm.as_deref(),
            self.options.solver,
            t,
        )
        .map_err(|source| SimulationError::Solver { t, source })?;
        self.warm = Some(state.flow.clone());
        Ok(state)
    }

    /// Integrates tank levels over one step using `state`'s flows and moves
    /// the clock forward.
    pub fn advance(&mut self, state: &HydraulicState) {
        let dt = self.options.hydraulic_step_s as f64;
        let tank0 = self.network.tank_offset();
        for (i, tank) in self.network.tanks().iter().enumerate() {
            let node = tank0 + i;
            let inflow: f64 = self
                .model
                .links
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    if l.to == node {
                        state.flow[k]
                    } else if l.from == node {
                        -state.flow[k]
                    } else {
                        0.0
                    }
                })
                .sum();
            self.tank_levels[i] = tank_step(tank, self.tank_levels[i], inflow, dt);
        }
        self.step += 1;
    }

    /// Solves the current step with baseline controls plus actuator events,
    /// then advances.
    pub fn step_default(&mut self) -> Result<HydraulicState, SimulationError> {
        let controls = self.controls_at(self.baseline.clone(), self.time())?;
        let state = self.solve_current(&controls)?;
        self.advance(&state);
        Ok(state)
    }

    pub fn into_series(self, states: Vec<HydraulicState>) -> StateSeries {
        StateSeries {
            states,
            config_digest: self.config_digest,
            step_s: self.options.hydraulic_step_s,
            model: self.model,
        }
    }
}

/// Runs the whole horizon with the network's baseline controls.
pub fn simulate(
    network: &Network,
    options: SimulationOptions,
    leaks: &[LeakageEvent],
    actuators: &[ActuatorEvent],
) -> Result<StateSeries, SimulationError> {
    let mut sim = Simulator::new(network, options, leaks, actuators)?;
    let mut states = Vec::with_capacity(sim.state_count());
    for _ in 0..sim.state_count() {
        states.push(sim.step_default()?);
    }
    Ok(sim.into_series(states))
}

impl HydraulicState {
    /// Pressure head at a junction that is a network node.
    pub fn pressure(&self, node: usize) -> f64 {
        self.pressure_head[node]
    }
}
