//! Event taxonomy: three leakage kinds, three actuator events, five sensor
//! faults and two communication events.
//!
//! Leakages and actuator events act on the hydraulic simulation. Sensor
//! faults and communication events only touch SCADA readings.
//!
//! Windows are half-open, `[start_time, end_time)`. When several actuator
//! events (or several faults on one sensor) are active at once, the one
//! with the latest start wins; equal starts go to the event listed last.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hydraulics::{Controls, GRAVITY};
use crate::network::{LinkKind, Network};
use crate::scada::SensorType;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EventError {
    #[error("{event}: unknown target {target}")]
    UnknownTarget { event: String, target: String },
    #[error("{event}: invalid window: {reason}")]
    InvalidWindow { event: String, reason: String },
    #[error("{event}: invalid parameter: {reason}")]
    InvalidParameter { event: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventWindow {
    pub start_time: u64,
    pub end_time: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_time: Option<u64>,
}

impl EventWindow {
    pub fn new(start_time: u64, end_time: u64) -> Self {
        Self {
            start_time,
            end_time,
            peak_time: None,
        }
    }

    pub fn contains(&self, t: u64) -> bool {
        self.start_time <= t && t < self.end_time
    }

    pub fn check(&self, event: &str, duration: u64) -> Result<(), EventError> {
        let bad = |reason: String| EventError::InvalidWindow {
            event: event.to_string(),
            reason,
        };
        if self.end_time <= self.start_time {
            return Err(bad(format!(
                "end_time {} must be after start_time {}",
                self.end_time, self.start_time
            )));
        }
        if self.end_time > duration {
            return Err(bad(format!("end_time {} exceeds duration {duration}", self.end_time)));
        }
        if let Some(peak) = self.peak_time {
            if peak < self.start_time || peak > self.end_time {
                return Err(bad(format!("peak_time {peak} outside the window")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventCategory {
    Leakage,
    Actuator,
    SensorFault,
    Communication,
}

/// Every event kind the simulator implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    AbruptLeakage,
    IncipientLeakage,
    PatternLeakage,
    PumpState,
    PumpSpeed,
    ValveState,
    SensorOffset,
    SensorDrift,
    SensorGaussian,
    SensorGain,
    SensorStuckZero,
    DataLoss,
    Freeze,
}

impl EventKind {
    pub const ALL: [EventKind; 13] = [
        EventKind::AbruptLeakage,
        EventKind::IncipientLeakage,
        EventKind::PatternLeakage,
        EventKind::PumpState,
        EventKind::PumpSpeed,
        EventKind::ValveState,
        EventKind::SensorOffset,
        EventKind::SensorDrift,
        EventKind::SensorGaussian,
        EventKind::SensorGain,
        EventKind::SensorStuckZero,
        EventKind::DataLoss,
        EventKind::Freeze,
    ];

    pub fn category(self) -> EventCategory {
        use EventKind::*;
        match self {
            AbruptLeakage | IncipientLeakage | PatternLeakage => EventCategory::Leakage,
            PumpState | PumpSpeed | ValveState => EventCategory::Actuator,
            SensorOffset | SensorDrift | SensorGaussian | SensorGain | SensorStuckZero => EventCategory::SensorFault,
            DataLoss | Freeze => EventCategory::Communication,
        }
    }

    pub fn name(self) -> &'static str {
        use EventKind::*;
        match self {
            AbruptLeakage => "abrupt_leakage",
            IncipientLeakage => "incipient_leakage",
            PatternLeakage => "pattern_leakage",
            PumpState => "pump_state",
            PumpSpeed => "pump_speed",
            ValveState => "valve_state",
            SensorOffset => "sensor_offset",
            SensorDrift => "sensor_drift",
            SensorGaussian => "sensor_gaussian",
            SensorGain => "sensor_gain",
            SensorStuckZero => "sensor_stuck_zero",
            DataLoss => "data_loss",
            Freeze => "freeze",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------- leakages

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageKind {
    Abrupt,
    Incipient,
    Pattern,
}

fn default_discharge_coef() -> f64 {
    0.75
}

fn default_pattern_step() -> u64 {
    3600
}

/// Orifice leak on a pipe, placed at the pipe's midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageEvent {
    pub kind: LeakageKind,
    pub link_id: String,
    /// Hole diameter, m.
    pub diameter: f64,
    #[serde(flatten)]
    pub window: EventWindow,
    #[serde(default = "default_discharge_coef")]
    pub discharge_coef: f64,
    /// Area multipliers in [0, 1], cycled from the window start (pattern kind).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_pattern: Option<Vec<f64>>,
    #[serde(default = "default_pattern_step")]
    pub pattern_step_s: u64,
}

impl LeakageEvent {
    pub fn abrupt(link_id: &str, diameter: f64, start_time: u64, end_time: u64) -> Self {
        Self {
            kind: LeakageKind::Abrupt,
            link_id: link_id.to_string(),
            diameter,
            window: EventWindow::new(start_time, end_time),
            discharge_coef: default_discharge_coef(),
            area_pattern: None,
            pattern_step_s: default_pattern_step(),
        }
    }

    pub fn incipient(link_id: &str, diameter: f64, start_time: u64, end_time: u64, peak_time: u64) -> Self {
        Self {
            kind: LeakageKind::Incipient,
            window: EventWindow {
                start_time,
                end_time,
                peak_time: Some(peak_time),
            },
            ..Self::abrupt(link_id, diameter, start_time, end_time)
        }
    }

    pub fn event_kind(&self) -> EventKind {
        match self.kind {
            LeakageKind::Abrupt => EventKind::AbruptLeakage,
            LeakageKind::Incipient => EventKind::IncipientLeakage,
            LeakageKind::Pattern => EventKind::PatternLeakage,
        }
    }

    pub fn full_area(&self) -> f64 {
        PI * 0.25 * self.diameter * self.diameter
    }

    pub fn check(&self, network: &Network, duration: u64) -> Result<(), EventError> {
        let name = format!("leakage on {}", self.link_id);
        let bad = |reason: &str| EventError::InvalidParameter {
            event: name.clone(),
            reason: reason.to_string(),
        };
        match network.link_index(&self.link_id) {
            Some(k) if network.link_kind(k) == LinkKind::Pipe => {}
            _ => {
                return Err(EventError::UnknownTarget {
                    event: name.clone(),
                    target: self.link_id.clone(),
                })
            }
        }
        if !(self.diameter.is_finite() && self.diameter > 0.0) {
            return Err(bad("diameter must be > 0"));
        }
        if !(self.discharge_coef.is_finite() && self.discharge_coef > 0.0) {
            return Err(bad("discharge_coef must be > 0"));
        }
        self.window.check(&name, duration)?;
        match self.kind {
            LeakageKind::Incipient if self.window.peak_time.is_none() => {
                return Err(bad("incipient leakage needs peak_time"))
            }
            LeakageKind::Pattern => {
                let ok = self
                    .area_pattern
                    .as_ref()
                    .is_some_and(|p| !p.is_empty() && p.iter().all(|v| (0.0..=1.0).contains(v)));
                if !ok || self.pattern_step_s == 0 {
                    return Err(bad("pattern leakage needs a non-empty area_pattern in [0, 1]"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Open leak area (m²) at time `t`.
pub fn leak_effective_area(event: &LeakageEvent, t: u64) -> f64 {
    let w = &event.window;
    if !w.contains(t) {
        return 0.0;
    }
    let full = event.full_area();
    match event.kind {
        LeakageKind::Abrupt => full,
        LeakageKind::Incipient => {
            let peak = w.peak_time.unwrap_or(w.start_time);
            if t >= peak {
                full
            } else {
                full * (t - w.start_time) as f64 / (peak - w.start_time) as f64
            }
        }
        LeakageKind::Pattern => {
            let pattern = event.area_pattern.as_deref().unwrap_or(&[]);
            if pattern.is_empty() {
                return 0.0;
            }
            let idx = ((t - w.start_time) / event.pattern_step_s.max(1)) as usize % pattern.len();
            full * pattern[idx]
        }
    }
}

/// Orifice discharge `Cd·A·√(2g·h)`, zero for non-positive head.
pub fn leak_flow(area: f64, pressure_head: f64, discharge_coef: f64) -> f64 {
    if pressure_head <= 0.0 || area <= 0.0 {
        return 0.0;
    }
    discharge_coef * area * (2.0 * GRAVITY * pressure_head).sqrt()
}

/// Solver emitter coefficient `c` such that `q = c·√h`.
pub fn leak_emitter_coef(event: &LeakageEvent, t: u64) -> f64 {
    event.discharge_coef * leak_effective_area(event, t) * (2.0 * GRAVITY).sqrt()
}

// -------------------------------------------------------- actuator events

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuatorKind {
    PumpState,
    PumpSpeed,
    ValveState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActuatorValue {
    Flag(bool),
    Speed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorEvent {
    pub kind: ActuatorKind,
    pub target_id: String,
    pub value: ActuatorValue,
    #[serde(flatten)]
    pub window: EventWindow,
}

impl ActuatorEvent {
    pub fn event_kind(&self) -> EventKind {
        match self.kind {
            ActuatorKind::PumpState => EventKind::PumpState,
            ActuatorKind::PumpSpeed => EventKind::PumpSpeed,
            ActuatorKind::ValveState => EventKind::ValveState,
        }
    }

    fn name(&self) -> String {
        format!("{} on {}", self.event_kind(), self.target_id)
    }

    pub fn check(&self, network: &Network, duration: u64) -> Result<(), EventError> {
        let want = match self.kind {
            ActuatorKind::PumpState | ActuatorKind::PumpSpeed => LinkKind::Pump,
            ActuatorKind::ValveState => LinkKind::Valve,
        };
        match network.link_index(&self.target_id) {
            Some(k) if network.link_kind(k) == want => {}
            _ => {
                return Err(EventError::UnknownTarget {
                    event: self.name(),
                    target: self.target_id.clone(),
                })
            }
        }
        let value_ok = match (self.kind, self.value) {
            (ActuatorKind::PumpSpeed, ActuatorValue::Speed(w)) => w.is_finite() && w >= 0.0,
            (ActuatorKind::PumpState | ActuatorKind::ValveState, ActuatorValue::Flag(_)) => true,
            _ => false,
        };
        if !value_ok {
            return Err(EventError::InvalidParameter {
                event: self.name(),
                reason: "value must be a boolean for state events and a speed >= 0 for pump_speed".into(),
            });
        }
        self.window.check(&self.name(), duration)
    }
}

/// Applies one actuator event to `controls` at time `t`. Outside the
/// window the controls are returned unchanged (the caller starts from the
/// configured baseline each step).
pub fn apply_actuator_event(
    mut controls: Controls,
    event: &ActuatorEvent,
    t: u64,
    network: &Network,
) -> Result<Controls, EventError> {
    let k = network
        .link_index(&event.target_id)
        .ok_or_else(|| EventError::UnknownTarget {
            event: event.name(),
            target: event.target_id.clone(),
        })?;
    if !event.window.contains(t) {
        return Ok(controls);
    }
    match (event.kind, event.value) {
        (ActuatorKind::PumpState, ActuatorValue::Flag(on)) | (ActuatorKind::ValveState, ActuatorValue::Flag(on)) => {
            controls.link_open[k] = on
        }
        (ActuatorKind::PumpSpeed, ActuatorValue::Speed(w)) => controls.pump_speed[k] = w,
        _ => {
            return Err(EventError::InvalidParameter {
                event: event.name(),
                reason: "value type does not match event kind".into(),
            })
        }
    }
    Ok(controls)
}

/// Indices of `windows` active at `t`, ordered so that the winning event
/// comes last.
pub fn precedence_order<'a>(windows: impl Iterator<Item = &'a EventWindow>, t: u64) -> Vec<usize> {
    let mut active: Vec<(u64, usize)> = windows
        .enumerate()
        .filter(|(_, w)| w.contains(t))
        .map(|(i, w)| (w.start_time, i))
        .collect();
    active.sort();
    active.into_iter().map(|(_, i)| i).collect()
}

/// Applies every actuator event in precedence order.
pub fn apply_actuator_events(
    controls: Controls,
    events: &[ActuatorEvent],
    t: u64,
    network: &Network,
) -> Result<Controls, EventError> {
    precedence_order(events.iter().map(|e| &e.window), t)
        .into_iter()
        .try_fold(controls, |c, i| apply_actuator_event(c, &events[i], t, network))
}

// ----------------------------------------------------------- sensor faults

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorFaultKind {
    Offset,
    Drift,
    Gaussian,
    Gain,
    StuckZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFaultEvent {
    pub kind: SensorFaultKind,
    pub sensor_type: SensorType,
    pub sensor_id: String,
    /// Offset, drift per hour, σ, or gain depending on `kind`.
    #[serde(default)]
    pub param: f64,
    #[serde(flatten)]
    pub window: EventWindow,
}

impl SensorFaultEvent {
    pub fn new(
        kind: SensorFaultKind,
        sensor_type: SensorType,
        sensor_id: &str,
        param: f64,
        start_time: u64,
        end_time: u64,
    ) -> Self {
        Self {
            kind,
            sensor_type,
            sensor_id: sensor_id.to_string(),
            param,
            window: EventWindow::new(start_time, end_time),
        }
    }

    pub fn event_kind(&self) -> EventKind {
        match self.kind {
            SensorFaultKind::Offset => EventKind::SensorOffset,
            SensorFaultKind::Drift => EventKind::SensorDrift,
            SensorFaultKind::Gaussian => EventKind::SensorGaussian,
            SensorFaultKind::Gain => EventKind::SensorGain,
            SensorFaultKind::StuckZero => EventKind::SensorStuckZero,
        }
    }

    pub fn name(&self) -> String {
        format!("{} on {}:{}", self.event_kind(), self.sensor_type, self.sensor_id)
    }

    pub fn check(&self, duration: u64) -> Result<(), EventError> {
        if !self.param.is_finite() || (self.kind == SensorFaultKind::Gaussian && self.param < 0.0) {
            return Err(EventError::InvalidParameter {
                event: self.name(),
                reason: "param must be finite (and >= 0 for gaussian)".into(),
            });
        }
        self.window.check(&self.name(), duration)
    }
}

/// Corrupts one reading. Drift grows by `param` per hour since the start.
pub fn apply_sensor_fault<R: Rng + ?Sized>(reading: f64, event: &SensorFaultEvent, t: u64, rng: &mut R) -> f64 {
    if !event.window.contains(t) {
        return reading;
    }
    match event.kind {
        SensorFaultKind::Offset => reading + event.param,
        SensorFaultKind::Drift => reading + event.param * (t - event.window.start_time) as f64 / 3600.0,
        SensorFaultKind::Gaussian => {
            let normal = Normal::new(0.0, event.param).expect("sigma checked >= 0");
            reading + normal.sample(rng)
        }
        SensorFaultKind::Gain => reading * event.param,
        SensorFaultKind::StuckZero => 0.0,
    }
}

// ---------------------------------------------------- communication events

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommunicationKind {
    DataLoss,
    Freeze,
}

/// Transmission problem on one sensor, or on all sensors when
/// `sensor_type`/`sensor_id` are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunicationEvent {
    pub kind: CommunicationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_type: Option<SensorType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensor_id: Option<String>,
    #[serde(flatten)]
    pub window: EventWindow,
}

impl CommunicationEvent {
    pub fn all_sensors(kind: CommunicationKind, start_time: u64, end_time: u64) -> Self {
        Self {
            kind,
            sensor_type: None,
            sensor_id: None,
            window: EventWindow::new(start_time, end_time),
        }
    }

    pub fn on_sensor(
        kind: CommunicationKind,
        sensor_type: SensorType,
        sensor_id: &str,
        start_time: u64,
        end_time: u64,
    ) -> Self {
        Self {
            kind,
            sensor_type: Some(sensor_type),
            sensor_id: Some(sensor_id.to_string()),
            window: EventWindow::new(start_time, end_time),
        }
    }

    pub fn event_kind(&self) -> EventKind {
        match self.kind {
            CommunicationKind::DataLoss => EventKind::DataLoss,
            CommunicationKind::Freeze => EventKind::Freeze,
        }
    }

    pub fn name(&self) -> String {
        match (&self.sensor_type, &self.sensor_id) {
            (Some(ty), Some(id)) => format!("{} on {ty}:{id}", self.event_kind()),
            _ => format!("{} on all sensors", self.event_kind()),
        }
    }

    pub fn applies_to(&self, sensor_type: SensorType, sensor_id: &str) -> bool {
        match (&self.sensor_type, &self.sensor_id) {
            (Some(ty), Some(id)) => *ty == sensor_type && id == sensor_id,
            _ => true,
        }
    }

    pub fn check(&self, duration: u64) -> Result<(), EventError> {
        if self.sensor_type.is_some() != self.sensor_id.is_some() {
            return Err(EventError::InvalidParameter {
                event: self.name(),
                reason: "give both sensor_type and sensor_id, or neither".into(),
            });
        }
        self.window.check(&self.name(), duration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Curve, NetworkBuilder, Pump, Valve};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn registry_counts() {
        let count = |c| EventKind::ALL.iter().filter(|k| k.category() == c).count();
        assert_eq!(EventKind::ALL.len(), 13);
        assert_eq!(count(EventCategory::Leakage), 3);
        assert_eq!(count(EventCategory::Actuator), 3);
        assert_eq!(count(EventCategory::SensorFault), 5);
        assert_eq!(count(EventCategory::Communication), 2);
    }

    #[test]
    fn incipient_ramp_midpoint() {
        let e = LeakageEvent::incipient("p", 0.02, 1000, 5000, 3000);
        let a = leak_effective_area(&e, 2000);
        assert!((a - 0.5 * e.full_area()).abs() < 1e-18);
        assert_eq!(leak_effective_area(&e, 1000), 0.0);
        assert_eq!(leak_effective_area(&e, 4000), e.full_area());
        assert_eq!(leak_effective_area(&e, 5000), 0.0);
    }

    #[test]
    fn abrupt_outside_window_is_zero() {
        let e = LeakageEvent::abrupt("p", 0.02, 100, 200);
        assert_eq!(leak_effective_area(&e, 99), 0.0);
        assert_eq!(leak_effective_area(&e, 200), 0.0);
        assert!(leak_effective_area(&e, 150) > 0.0);
    }

    #[test]
    fn full_area_for_two_centimetre_hole() {
        let e = LeakageEvent::abrupt("p", 0.02, 0, 1);
        assert!((e.full_area() - 3.1416e-4).abs() < 1e-8);
    }

    #[test]
    fn pattern_leak_scales_area() {
        let mut e = LeakageEvent::abrupt("p", 0.02, 0, 10_000);
        e.kind = LeakageKind::Pattern;
        e.area_pattern = Some(vec![0.0, 0.5, 1.0]);
        e.pattern_step_s = 100;
        assert_eq!(leak_effective_area(&e, 50), 0.0);
        assert_eq!(leak_effective_area(&e, 150), 0.5 * e.full_area());
        assert_eq!(leak_effective_area(&e, 350), 0.0);
    }

    #[test]
    fn orifice_flow() {
        assert_eq!(leak_flow(3.1416e-4, 0.0, 0.75), 0.0);
        assert_eq!(leak_flow(0.0, 30.0, 0.75), 0.0);
        let q = leak_flow(3.1416e-4, 30.0, 0.75);
        let expected = 0.75 * 3.1416e-4 * (2.0 * 9.80665 * 30.0f64).sqrt();
        assert!((q - expected).abs() < 1e-15);
        assert!((q - 5.72e-3).abs() / 5.72e-3 < 0.01, "{q}");
    }

    fn pump_net() -> Network {
        let mut b = NetworkBuilder::new()
            .reservoir("r", 10.0)
            .junction("a", 0.0, 0.01)
            .junction("b", 0.0, 0.0);
        b.curves.push(Curve {
            id: "c".into(),
            points: vec![(0.02, 30.0)],
        });
        b.pumps.push(Pump {
            id: "pu".into(),
            from_node: "r".into(),
            to_node: "a".into(),
            curve_id: "c".into(),
            speed: 1.0,
            running: true,
        });
        b.valves.push(Valve {
            id: "v".into(),
            from_node: "a".into(),
            to_node: "b".into(),
            diameter: 0.1,
            minor_loss_coef: 1.0,
            open: true,
        });
        b.build().unwrap()
    }

    fn actuator(kind: ActuatorKind, target: &str, value: ActuatorValue, start: u64, end: u64) -> ActuatorEvent {
        ActuatorEvent {
            kind,
            target_id: target.into(),
            value,
            window: EventWindow::new(start, end),
        }
    }

    #[test]
    fn actuator_sets_inside_and_restores_outside() {
        let net = pump_net();
        let base = Controls::baseline(&net);
        let pu = net.link_index("pu").unwrap();
        let off = actuator(ActuatorKind::PumpState, "pu", ActuatorValue::Flag(false), 10, 20);
        let c = apply_actuator_event(base.clone(), &off, 15, &net).unwrap();
        assert!(!c.link_open[pu]);
        let c = apply_actuator_event(base.clone(), &off, 25, &net).unwrap();
        assert_eq!(c, base);

        let slow = actuator(ActuatorKind::PumpSpeed, "pu", ActuatorValue::Speed(0.5), 10, 20);
        let c = apply_actuator_event(base.clone(), &slow, 10, &net).unwrap();
        assert_eq!(c.pump_speed[pu], 0.5);

        let shut = actuator(ActuatorKind::ValveState, "v", ActuatorValue::Flag(false), 0, 5);
        let c = apply_actuator_event(base.clone(), &shut, 0, &net).unwrap();
        assert!(!c.link_open[net.link_index("v").unwrap()]);

        let ghost = actuator(ActuatorKind::PumpState, "nope", ActuatorValue::Flag(false), 0, 5);
        assert!(matches!(
            apply_actuator_event(base, &ghost, 0, &net),
            Err(EventError::UnknownTarget { .. })
        ));
    }

    #[test]
    fn overlap_precedence_table() {
        let net = pump_net();
        let base = Controls::baseline(&net);
        let pu = net.link_index("pu").unwrap();
        let speed = |w, s, e| actuator(ActuatorKind::PumpSpeed, "pu", ActuatorValue::Speed(w), s, e);
        // (events, t, expected speed)
        let table: Vec<(Vec<ActuatorEvent>, u64, f64)> = vec![
            (vec![speed(0.5, 0, 100), speed(0.8, 10, 100)], 50, 0.8),
            (vec![speed(0.8, 10, 100), speed(0.5, 0, 100)], 50, 0.8),
            (vec![speed(0.5, 0, 100), speed(0.8, 0, 100)], 50, 0.8),
            (vec![speed(0.8, 0, 100), speed(0.5, 0, 100)], 50, 0.5),
            (vec![speed(0.5, 0, 100), speed(0.8, 10, 20)], 50, 0.5),
        ];
        for (events, t, expected) in table {
            let c = apply_actuator_events(base.clone(), &events, t, &net).unwrap();
            assert_eq!(c.pump_speed[pu], expected);
        }
    }

    #[test]
    fn sensor_fault_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let drift = SensorFaultEvent::new(SensorFaultKind::Drift, SensorType::Flow, "p", 1.1, 3600, 36000);
        let y = apply_sensor_fault(10.0, &drift, 3600 + 7200, &mut rng);
        assert!((y - 12.2).abs() < 1e-12);
        assert_eq!(apply_sensor_fault(10.0, &drift, 0, &mut rng), 10.0);

        let stuck = SensorFaultEvent::new(SensorFaultKind::StuckZero, SensorType::Pressure, "n", 0.0, 0, 10);
        assert_eq!(apply_sensor_fault(7.3, &stuck, 5, &mut rng), 0.0);

        let offset = SensorFaultEvent::new(SensorFaultKind::Offset, SensorType::Pressure, "n", -2.0, 0, 10);
        assert_eq!(apply_sensor_fault(7.0, &offset, 5, &mut rng), 5.0);
        let gain = SensorFaultEvent::new(SensorFaultKind::Gain, SensorType::Pressure, "n", 2.0, 0, 10);
        assert_eq!(apply_sensor_fault(7.0, &gain, 5, &mut rng), 14.0);
        let quiet = SensorFaultEvent::new(SensorFaultKind::Gaussian, SensorType::Pressure, "n", 0.0, 0, 10);
        assert_eq!(apply_sensor_fault(7.0, &quiet, 5, &mut rng), 7.0);
        let noisy = SensorFaultEvent::new(SensorFaultKind::Gaussian, SensorType::Pressure, "n", 1.0, 0, 10);
        assert_ne!(apply_sensor_fault(7.0, &noisy, 5, &mut rng), 7.0);
    }

    #[test]
    fn window_validation() {
        assert!(EventWindow::new(10, 5).check("e", 100).is_err());
        assert!(EventWindow::new(10, 200).check("e", 100).is_err());
        let w = EventWindow {
            start_time: 10,
            end_time: 50,
            peak_time: Some(60),
        };
        assert!(w.check("e", 100).is_err());
        assert!(EventWindow::new(0, 100).check("e", 100).is_ok());
    }

    #[test]
    fn leak_checks_target_class() {
        let net = pump_net();
        let leak = LeakageEvent::abrupt("pu", 0.01, 0, 10);
        assert!(matches!(leak.check(&net, 100), Err(EventError::UnknownTarget { .. })));
    }
}
