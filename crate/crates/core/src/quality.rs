//! Single-species transport over a solved hydraulic series: plug flow in
//! pipes, complete mixing at junctions and tanks, first-order bulk decay.
//!
//! Each pipe holds an ordered list of water parcels from its `from` end to
//! its `to` end. Every quality step the nodes are visited in flow order;
//! when a node is reached, every link feeding it releases the volume that
//! moved during the step and takes the same volume in at its upstream end.
//! Pumps and valves hold no water and pass it straight through.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hydraulics::{HydraulicState, StateSeries};
use crate::network::{Network, NodeKind};

/// Adjacent parcels closer than this (mg/L) are merged.
pub const MERGE_TOLERANCE: f64 = 1e-4;

/// Flows below this (m³/s) carry nothing.
const NO_FLOW: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QualityError {
    #[error("quality step {quality_s}s does not divide hydraulic step {hydraulic_s}s")]
    StepMismatch { quality_s: u64, hydraulic_s: u64 },
    #[error("decay rate must be finite and >= 0, got {0}")]
    InvalidDecay(f64),
    #[error("unknown source node {0}")]
    UnknownSource(String),
    #[error("source concentration at {0} must be finite and >= 0")]
    InvalidSource(String),
    #[error("negative concentration {value} at t={t}s in {place}")]
    NegativeConcentration { t: u64, place: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QualitySettings {
    pub quality_time_step_s: u64,
    /// First-order bulk decay rate, 1/s.
    pub decay_rate_k: f64,
    /// Node id → fixed concentration, mg/L.
    pub source_nodes: BTreeMap<String, f64>,
    /// Concentration everywhere at t = 0, mg/L.
    pub initial_concentration: f64,
}

impl Default for QualitySettings {
    fn default() -> Self {
        Self {
            quality_time_step_s: 60,
            decay_rate_k: 0.0,
            source_nodes: BTreeMap::new(),
            initial_concentration: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// m³
    pub volume: f64,
    /// mg/L
    pub concentration: f64,
}

/// Water quality at one reporting time. Masses are in g (m³ · mg/L) and the
/// ledger terms are cumulative since t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityState {
    pub t: u64,
    /// Per compiled-model node, mg/L.
    pub node_concentration: Vec<f64>,
    /// Per compiled-model link, ordered from its `from` to its `to` end.
    pub pipe_segments: Vec<Vec<Segment>>,
    pub tank_concentration: Vec<f64>,
    pub tank_volume: Vec<f64>,
    pub stored_mass: f64,
    pub injected_mass: f64,
    pub withdrawn_mass: f64,
    pub decayed_mass: f64,
}

impl QualityState {
    /// `stored − (stored₀ + injected − withdrawn − decayed)`.
    pub fn ledger_error(&self, initial_stored: f64) -> f64 {
        self.stored_mass - (initial_stored + self.injected_mass - self.withdrawn_mass - self.decayed_mass)
    }
}

/// `c · e^(−k·dt)`.
pub fn decay(concentration: f64, k: f64, dt: f64) -> f64 {
    concentration * (-k * dt).exp()
}

/// Largest ledger error over the run, relative to the larger of the
/// initial stored mass plus everything injected, and the stored mass.
pub fn mass_balance_error(states: &[QualityState]) -> f64 {
    let Some(first) = states.first() else {
        return 0.0;
    };
    states
        .iter()
        .map(|s| {
            let scale = (first.stored_mass + s.injected_mass).max(s.stored_mass);
            if scale > 0.0 {
                s.ledger_error(first.stored_mass).abs() / scale
            } else {
                s.ledger_error(first.stored_mass).abs()
            }
        })
        .fold(0.0, f64::max)
}

struct Transport<'a> {
    series: &'a StateSeries,
    k: f64,
    sources: Vec<Option<f64>>,
    tank_area: Vec<f64>,
    tank0: Option<usize>,
    segments: Vec<VecDeque<Segment>>,
    node_c: Vec<f64>,
    tank_c: Vec<f64>,
    tank_v: Vec<f64>,
    injected: f64,
    withdrawn: f64,
    decayed: f64,
}

impl Transport<'_> {
    fn snapshot(&self, t: u64) -> QualityState {
        let pipes: f64 = self.segments.iter().flatten().map(|s| s.volume * s.concentration).sum();
        let tanks: f64 = self.tank_c.iter().zip(&self.tank_v).map(|(c, v)| c * v).sum();
        QualityState {
            t,
            node_concentration: self.node_c.clone(),
            pipe_segments: self.segments.iter().map(|s| s.iter().copied().collect()).collect(),
            tank_concentration: self.tank_c.clone(),
            tank_volume: self.tank_v.clone(),
            stored_mass: pipes + tanks,
            injected_mass: self.injected,
            withdrawn_mass: self.withdrawn,
            decayed_mass: self.decayed,
        }
    }

    fn tank_index(&self, node: usize) -> Option<usize> {
        match self.series.model.node_kinds[node] {
            NodeKind::Tank => Some(node - self.tank0.expect("tank node implies tanks")),
            _ => None,
        }
    }

    fn apply_decay(&mut self, dt: f64) {
        if self.k == 0.0 {
            return;
        }
        let f = (-self.k * dt).exp();
        for s in self.segments.iter_mut().flatten() {
            self.decayed += s.volume * s.concentration * (1.0 - f);
            s.concentration *= f;
        }
        for (c, v) in self.tank_c.iter_mut().zip(&self.tank_v) {
            self.decayed += v * *c * (1.0 - f);
            *c *= f;
        }
    }

    /// Moves `volume` through link `k` whose upstream node holds `c_up`.
    /// Returns the mass leaving the downstream end.
    fn move_through(&mut self, k: usize, forward: bool, volume: f64, c_up: f64) -> f64 {
        let pipe_volume = self.series.model.links[k].volume;
        let segs = &mut self.segments[k];
        let mut released = 0.0;
        if volume >= pipe_volume {
            released += segs.iter().map(|s| s.volume * s.concentration).sum::<f64>();
            released += (volume - pipe_volume) * c_up;
            segs.clear();
            if pipe_volume > 0.0 {
                segs.push_back(Segment {
                    volume: pipe_volume,
                    concentration: c_up,
                });
            }
            return released;
        }
        let mut need = volume;
        while need > 0.0 {
            let end = if forward { segs.back_mut() } else { segs.front_mut() };
            let Some(seg) = end else { break };
            if seg.volume <= need {
                need -= seg.volume;
                released += seg.volume * seg.concentration;
                if forward {
                    segs.pop_back();
                } else {
                    segs.pop_front();
                }
            } else {
                seg.volume -= need;
                released += need * seg.concentration;
                need = 0.0;
            }
        }
        let head = if forward { segs.front_mut() } else { segs.back_mut() };
        match head {
            Some(s) if (s.concentration - c_up).abs() < MERGE_TOLERANCE => {
                let v = s.volume + volume;
                s.concentration = (s.volume * s.concentration + volume * c_up) / v;
                s.volume = v;
            }
            _ => {
                let seg = Segment {
                    volume,
                    concentration: c_up,
                };
                if forward {
                    segs.push_front(seg);
                } else {
                    segs.push_back(seg);
                }
            }
        }
        released
    }

    fn step(&mut self, state: &HydraulicState, dt: f64) {
        self.apply_decay(dt);
        let model = &self.series.model;
        let n = model.node_count();

        // Directed flow graph of this step.
        let mut inflows: Vec<Vec<(usize, usize, bool, f64)>> = vec![Vec::new(); n];
        let mut outflow_volume = vec![0.0; n];
        let mut indegree = vec![0usize; n];
        for (k, l) in model.links.iter().enumerate() {
            let q = state.flow[k];
            if !state.link_open[k] || q.abs() <= NO_FLOW {
                continue;
            }
            let (up, down) = if q > 0.0 { (l.from, l.to) } else { (l.to, l.from) };
            let v = q.abs() * dt;
            inflows[down].push((k, up, q > 0.0, v));
            outflow_volume[up] += v;
            if !model.is_fixed(down) && !model.is_fixed(up) {
                indegree[down] += 1;
            }
        }

        // Reservoirs and tanks release water at their current concentration.
        for i in 0..n {
            if let NodeKind::Reservoir = model.node_kinds[i] {
                let c = self.sources[i].unwrap_or(self.node_c[i]);
                self.node_c[i] = c;
                self.injected += c * outflow_volume[i];
            } else if let Some(ti) = self.tank_index(i) {
                if let Some(c) = self.sources[i] {
                    let stored = self.tank_c[ti] * self.tank_v[ti];
                    self.injected += c * self.tank_v[ti] - stored;
                    self.tank_c[ti] = c;
                }
                self.node_c[i] = self.tank_c[ti];
                self.tank_v[ti] -= outflow_volume[i];
            }
        }

        // Junctions in flow order; a flow cycle among junctions falls back
        // to index order with last step's upstream values.
        let mut ready: VecDeque<usize> = (0..n).filter(|&i| !model.is_fixed(i) && indegree[i] == 0).collect();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        loop {
            while let Some(i) = ready.pop_front() {
                done[i] = true;
                order.push(i);
                for (k, l) in model.links.iter().enumerate() {
                    let q = state.flow[k];
                    if !state.link_open[k] || q.abs() <= NO_FLOW {
                        continue;
                    }
                    let (up, down) = if q > 0.0 { (l.from, l.to) } else { (l.to, l.from) };
                    if up == i && !model.is_fixed(down) && !done[down] {
                        indegree[down] -= 1;
                        if indegree[down] == 0 {
                            ready.push_back(down);
                        }
                    }
                }
            }
            match (0..n).find(|&i| !model.is_fixed(i) && !done[i]) {
                Some(i) => ready.push_back(i),
                None => break,
            }
        }

        for i in order {
            let mut v_in = 0.0;
            let mut m_in = 0.0;
            for &(k, up, forward, v) in &inflows[i] {
                let c_up = self.node_c[up];
                m_in += self.move_through(k, forward, v, c_up);
                v_in += v;
            }
            let v_dem = state.actual_demand[i].max(0.0) * dt;
            let v_out = outflow_volume[i] + v_dem;
            let c = match self.sources[i] {
                Some(c) => {
                    self.injected += c * v_out - m_in;
                    c
                }
                None if v_in > 0.0 => m_in / v_in,
                None => self.node_c[i],
            };
            self.node_c[i] = c;
            self.withdrawn += c * v_dem;
        }

        // Water arriving at reservoirs leaves the system; tanks mix it in.
        for i in 0..n {
            if !model.is_fixed(i) {
                continue;
            }
            let mut v_in = 0.0;
            let mut m_in = 0.0;
            for &(k, up, forward, v) in &inflows[i] {
                let c_up = self.node_c[up];
                m_in += self.move_through(k, forward, v, c_up);
                v_in += v;
            }
            match self.tank_index(i) {
                None => self.withdrawn += m_in,
                Some(ti) => {
                    let mass = self.tank_c[ti] * self.tank_v[ti] + m_in;
                    self.tank_v[ti] += v_in;
                    if let Some(c) = self.sources[i] {
                        self.injected += c * self.tank_v[ti] - mass;
                        self.tank_c[ti] = c;
                    } else if self.tank_v[ti] > 1e-12 {
                        self.tank_c[ti] = mass / self.tank_v[ti];
                    } else if v_in > 0.0 {
                        self.tank_c[ti] = m_in / v_in;
                    }
                    self.node_c[i] = self.tank_c[ti];
                }
            }
        }
    }

    fn check(&self, t: u64) -> Result<(), QualityError> {
        let model = &self.series.model;
        for (i, c) in self.node_c.iter().enumerate() {
            if *c < 0.0 || !c.is_finite() {
                return Err(QualityError::NegativeConcentration {
                    t,
                    place: format!("node {}", model.node_ids[i]),
                    value: *c,
                });
            }
        }
        for (k, segs) in self.segments.iter().enumerate() {
            if let Some(s) = segs
                .iter()
                .find(|s| s.concentration < 0.0 || !s.concentration.is_finite())
            {
                return Err(QualityError::NegativeConcentration {
                    t,
                    place: format!("link {}", model.links[k].id),
                    value: s.concentration,
                });
            }
        }
        Ok(())
    }
}

/// Runs the transport over the whole series. One state is reported per
/// hydraulic state, at the same times.
pub fn simulate_quality(
    series: &StateSeries,
    network: &Network,
    settings: &QualitySettings,
) -> Result<Vec<QualityState>, QualityError> {
    let qs = settings.quality_time_step_s;
    if qs == 0 || !series.step_s.is_multiple_of(qs) {
        return Err(QualityError::StepMismatch {
            quality_s: qs,
            hydraulic_s: series.step_s,
        });
    }
    let k = settings.decay_rate_k;
    if !(k.is_finite() && k >= 0.0) {
        return Err(QualityError::InvalidDecay(k));
    }
    let model = &series.model;
    let n = model.node_count();
    let mut sources = vec![None; n];
    for (id, c) in &settings.source_nodes {
        let i = model.node_ids[..model.original_nodes]
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| QualityError::UnknownSource(id.clone()))?;
        if !(c.is_finite() && *c >= 0.0) {
            return Err(QualityError::InvalidSource(id.clone()));
        }
        sources[i] = Some(*c);
    }
    let c0 = settings.initial_concentration;
    let tank_area: Vec<f64> = network.tanks().iter().map(|t| t.area()).collect();
    let levels = series.states.first().map(|s| s.tank_level.clone()).unwrap_or_default();
    let mut tr = Transport {
        series,
        k,
        tank0: model.node_kinds.iter().position(|k| *k == NodeKind::Tank),
        tank_v: levels.iter().zip(&tank_area).map(|(l, a)| l * a).collect(),
        tank_c: tank_area.iter().map(|_| c0).collect(),
        tank_area,
        segments: model
            .links
            .iter()
            .map(|l| {
                let mut d = VecDeque::new();
                if l.volume > 0.0 {
                    d.push_back(Segment {
                        volume: l.volume,
                        concentration: c0,
                    });
                }
                d
            })
            .collect(),
        node_c: (0..n).map(|i| sources[i].unwrap_or(c0)).collect(),
        sources,
        injected: 0.0,
        withdrawn: 0.0,
        decayed: 0.0,
    };
    for i in 0..n {
        if let (Some(ti), Some(c)) = (tr.tank_index(i), tr.sources[i]) {
            tr.injected += (c - tr.tank_c[ti]) * tr.tank_v[ti];
            tr.tank_c[ti] = c;
        }
    }
    debug_assert_eq!(tr.tank_area.len(), tr.tank_v.len());

    let dt = qs as f64;
    let substeps = series.step_s / qs;
    let mut out = Vec::with_capacity(series.len());
    for state in &series.states {
        out.push(tr.snapshot(state.t));
        for s in 0..substeps {
            tr.step(state, dt);
            tr.check(state.t + (s + 1) * qs)?;
        }
    }
    Ok(out)
}
