//! Sensor placement, true-reading extraction and measurement corruption.
//!
//! Columns are ordered pressure, flow, quality, tank level; within a type
//! by element id (plain string order). Missing readings are `None` and
//! render as an empty CSV field.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{
    apply_sensor_fault, precedence_order, CommunicationEvent, CommunicationKind, EventKind, SensorFaultEvent,
};
use crate::hydraulics::{HydraulicModel, HydraulicState, StateSeries};
use crate::network::NodeKind;
use crate::quality::QualityState;
use crate::uncertainty::{SeededStream, SeriesPerturber, UncertaintyModel, UncertaintyTarget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScadaError {
    #[error("unknown sensor reference {0}")]
    UnknownSensorRef(String),
    #[error("duplicate sensor {0}")]
    DuplicateSensor(String),
    #[error("quality sensors need a quality simulation")]
    MissingQuality,
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorType {
    Pressure,
    Flow,
    Quality,
    TankLevel,
}

impl SensorType {
    pub fn name(self) -> &'static str {
        match self {
            SensorType::Pressure => "pressure",
            SensorType::Flow => "flow",
            SensorType::Quality => "quality",
            SensorType::TankLevel => "tank_level",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SensorType::Pressure => "m",
            SensorType::Flow => "m3/s",
            SensorType::Quality => "mg/L",
            SensorType::TankLevel => "m",
        }
    }
}

impl fmt::Display for SensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensorType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pressure" => Ok(SensorType::Pressure),
            "flow" => Ok(SensorType::Flow),
            "quality" => Ok(SensorType::Quality),
            "tank_level" => Ok(SensorType::TankLevel),
            other => Err(format!("unknown sensor type {other}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorPlacement {
    pub pressure_nodes: Vec<String>,
    pub flow_links: Vec<String>,
    pub quality_nodes: Vec<String>,
    pub tank_level_tanks: Vec<String>,
}

impl SensorPlacement {
    /// Columns in contract order.
    pub fn columns(&self) -> Vec<SensorColumn> {
        let mut out = Vec::new();
        for (ty, ids) in [
            (SensorType::Pressure, &self.pressure_nodes),
            (SensorType::Flow, &self.flow_links),
            (SensorType::Quality, &self.quality_nodes),
            (SensorType::TankLevel, &self.tank_level_tanks),
        ] {
            let mut ids: Vec<&String> = ids.iter().collect();
            ids.sort();
            out.extend(ids.into_iter().map(|id| SensorColumn::new(ty, id)));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pressure_nodes.len() + self.flow_links.len() + self.quality_nodes.len() + self.tank_level_tanks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks for duplicates and that every id names an element of the
    /// right class.
    pub fn check(&self, network: &crate::network::Network) -> Result<(), ScadaError> {
        let mut seen = std::collections::HashSet::new();
        for c in self.columns() {
            if !seen.insert(c.label()) {
                return Err(ScadaError::DuplicateSensor(c.label()));
            }
            let ok = match c.sensor_type {
                SensorType::Pressure | SensorType::Quality => network.node_index(&c.element_id).is_some(),
                SensorType::Flow => network.link_index(&c.element_id).is_some(),
                SensorType::TankLevel => network
                    .node_index(&c.element_id)
                    .is_some_and(|n| network.node_kind(n) == NodeKind::Tank),
            };
            if !ok {
                return Err(ScadaError::UnknownSensorRef(c.label()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SensorColumn {
    pub sensor_type: SensorType,
    pub element_id: String,
    pub unit: String,
}

impl SensorColumn {
    pub fn new(sensor_type: SensorType, element_id: &str) -> Self {
        Self {
            sensor_type,
            element_id: element_id.to_string(),
            unit: sensor_type.unit().to_string(),
        }
    }

    /// `<type>:<id>`, as used in CSV headers.
    pub fn label(&self) -> String {
        format!("{}:{}", self.sensor_type, self.element_id)
    }
}

/// Labelled event window kept alongside the readings for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthEvent {
    pub event_id: String,
    pub kind: EventKind,
    pub start_s: u64,
    pub end_s: u64,
}

/// Time × sensor matrix of readings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScadaData {
    times: Vec<u64>,
    columns: Vec<SensorColumn>,
    rows: Vec<Vec<Option<f64>>>,
    pub ground_truth: Vec<GroundTruthEvent>,
}

impl ScadaData {
    pub fn new(times: Vec<u64>, columns: Vec<SensorColumn>, rows: Vec<Vec<Option<f64>>>) -> Self {
        assert_eq!(times.len(), rows.len(), "one row per time");
        assert!(rows.iter().all(|r| r.len() == columns.len()), "row width");
        Self {
            times,
            columns,
            rows,
            ground_truth: Vec::new(),
        }
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }
    pub fn columns(&self) -> &[SensorColumn] {
        &self.columns
    }
    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }
    pub fn row(&self, i: usize) -> &[Option<f64>] {
        &self.rows[i]
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn column_index(&self, sensor_type: SensorType, element_id: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.sensor_type == sensor_type && c.element_id == element_id)
    }
    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows `range` as a new instance (ground truth is kept).
    pub fn slice(&self, range: std::ops::Range<usize>) -> ScadaData {
        ScadaData {
            times: self.times[range.clone()].to_vec(),
            columns: self.columns.clone(),
            rows: self.rows[range].to_vec(),
            ground_truth: self.ground_truth.clone(),
        }
    }

    /// CSV with header `time_s,<type>:<id>,...`; missing readings are empty
    /// fields and numbers use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.label());
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            out.push_str(&t.to_string());
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ScadaData, ScadaError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ScadaError::Csv {
            line: 1,
            message: "empty file".into(),
        })?;
        let mut fields = header.split(',');
        if fields.next() != Some("time_s") {
            return Err(ScadaError::Csv {
                line: 1,
                message: "header must start with time_s".into(),
            });
        }
        let columns = fields
            .map(|f| {
                let (ty, id) = f.split_once(':').ok_or_else(|| format!("bad column {f}"))?;
                Ok(SensorColumn::new(ty.parse()?, id))
            })
            .collect::<Result<Vec<_>, String>>()
            .map_err(|message| ScadaError::Csv { line: 1, message })?;
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| ScadaError::Csv { line: i + 1, message };
            let mut fields = line.split(',');
            let t = fields
                .next()
                .and_then(|f| f.parse::<u64>().ok())
                .ok_or_else(|| bad("bad time field".into()))?;
            let row = fields
                .map(|f| {
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .map(Some)
                            .ok_or_else(|| bad(format!("bad number {f}")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != columns.len() {
                return Err(bad(format!("expected {} readings, found {}", columns.len(), row.len())));
            }
            times.push(t);
            rows.push(row);
        }
        Ok(ScadaData::new(times, columns, rows))
    }
}

/// `event_id,kind,start_s,end_s` table of ground-truth windows.
pub fn ground_truth_to_csv(events: &[GroundTruthEvent]) -> String {
    let mut out = String::from("event_id,kind,start_s,end_s\n");
    for e in events {
        out.push_str(&format!("{},{},{},{}\n", e.event_id, e.kind, e.start_s, e.end_s));
    }
    out
}

pub fn ground_truth_from_csv(text: &str) -> Result<Vec<GroundTruthEvent>, ScadaError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| ScadaError::Csv {
            line: i + 1,
            message: message.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let kind = EventKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == f[1])
            .ok_or_else(|| bad("unknown event kind"))?;
        out.push(GroundTruthEvent {
            event_id: f[0].to_string(),
            kind,
            start_s: f[2].parse().map_err(|_| bad("bad start_s"))?,
            end_s: f[3].parse().map_err(|_| bad("bad end_s"))?,
        });
    }
    Ok(out)
}

/// Copies true values out of a simulation. Units: pressure head in m, flow
/// in m³/s, concentration in mg/L, tank level in m.
pub fn extract_readings(
    series: &StateSeries,
    quality: Option<&[QualityState]>,
    placement: &SensorPlacement,
) -> Result<ScadaData, ScadaError> {
    let reader = SensorReader::new(&series.model, placement)?;
    if reader.needs_quality() && quality.is_none() {
        return Err(ScadaError::MissingQuality);
    }
    let rows = series
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| reader.read(s, quality.map(|q| &q[k])))
        .collect();
    Ok(ScadaData::new(series.times(), reader.columns().to_vec(), rows))
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Pressure(usize),
    Flow(usize),
    Quality(usize),
    Level(usize),
}

/// Maps sensor columns onto compiled-model indices and reads one row at a
/// time.
#[derive(Debug, Clone)]
pub struct SensorReader {
    columns: Vec<SensorColumn>,
    sources: Vec<Source>,
}

impl SensorReader {
    pub fn new(model: &HydraulicModel, placement: &SensorPlacement) -> Result<Self, ScadaError> {
        let node = |id: &str| model.node_ids[..model.original_nodes].iter().position(|n| n == id);
        let link = |id: &str| model.links[..model.original_links].iter().position(|l| l.id == id);
        let first_tank = model.node_kinds.iter().position(|k| *k == NodeKind::Tank);
        let columns = placement.columns();
        let mut sources = Vec::with_capacity(columns.len());
        for c in &columns {
            let unknown = || ScadaError::UnknownSensorRef(c.label());
            let src = match c.sensor_type {
                SensorType::Pressure => Source::Pressure(node(&c.element_id).ok_or_else(unknown)?),
                SensorType::Flow => Source::Flow(link(&c.element_id).ok_or_else(unknown)?),
                SensorType::Quality => Source::Quality(node(&c.element_id).ok_or_else(unknown)?),
                SensorType::TankLevel => {
                    let n = node(&c.element_id).ok_or_else(unknown)?;
                    match (model.node_kinds[n], first_tank) {
                        (NodeKind::Tank, Some(t0)) => Source::Level(n - t0),
                        _ => return Err(unknown()),
                    }
                }
            };
            sources.push(src);
        }
        Ok(Self { columns, sources })
    }

    pub fn columns(&self) -> &[SensorColumn] {
        &self.columns
    }

    pub fn needs_quality(&self) -> bool {
        self.sources.iter().any(|s| matches!(s, Source::Quality(_)))
    }

    /// True readings at one instant; quality columns are missing when no
    /// quality state is given.
    pub fn read(&self, state: &HydraulicState, quality: Option<&QualityState>) -> Vec<Option<f64>> {
        self.sources
            .iter()
            .map(|src| match *src {
                Source::Pressure(n) => Some(state.pressure_head[n]),
                Source::Flow(l) => Some(state.flow[l]),
                Source::Quality(n) => quality.map(|q| q.node_concentration[n]),
                Source::Level(i) => Some(state.tank_level[i]),
            })
            .collect()
    }
}

/// Streaming measurement corruption: sensor noise, then sensor faults,
/// then communication events. Feeding rows one at a time gives the same
/// result as [`corrupt`] on the whole matrix.
pub struct Corruptor {
    noise: Vec<Vec<SeriesPerturber>>,
    faults: Vec<(SensorFaultEvent, usize)>,
    fault_rngs: Vec<ChaCha8Rng>,
    comms: Vec<CommunicationEvent>,
    comm_columns: Vec<Vec<bool>>,
    /// Held value per (communication event, column) while a freeze is active.
    frozen: Vec<Vec<Option<Option<f64>>>>,
    previous: Vec<Option<f64>>,
}

impl Corruptor {
    pub fn new(
        columns: &[SensorColumn],
        faults: &[SensorFaultEvent],
        comms: &[CommunicationEvent],
        noise: &[UncertaintyModel],
        stream: &SeededStream,
    ) -> Result<Self, ScadaError> {
        let find = |ty: SensorType, id: &str| {
            columns
                .iter()
                .position(|c| c.sensor_type == ty && c.element_id == id)
                .ok_or_else(|| ScadaError::UnknownSensorRef(format!("{ty}:{id}")))
        };
        let noise_models: Vec<(usize, &UncertaintyModel)> = noise
            .iter()
            .enumerate()
            .filter(|(_, m)| m.target == UncertaintyTarget::SensorNoise)
            .collect();
        let noise = columns
            .iter()
            .map(|c| {
                noise_models
                    .iter()
                    .map(|(i, m)| {
                        SeriesPerturber::new(&m.perturbation, &stream.child("sensor_noise").child(i).child(c.label()))
                    })
                    .collect()
            })
            .collect();
        let faults = faults
            .iter()
            .map(|f| Ok((f.clone(), find(f.sensor_type, &f.sensor_id)?)))
            .collect::<Result<Vec<_>, ScadaError>>()?;
        let fault_rngs = (0..faults.len())
            .map(|i| stream.child("sensor_fault").child(i).rng())
            .collect();
        let mut comm_columns = Vec::with_capacity(comms.len());
        for c in comms {
            if let (Some(ty), Some(id)) = (c.sensor_type, c.sensor_id.as_deref()) {
                find(ty, id)?;
            }
            comm_columns.push(
                columns
                    .iter()
                    .map(|col| c.applies_to(col.sensor_type, &col.element_id))
                    .collect(),
            );
        }
        Ok(Self {
            noise,
            faults,
            fault_rngs,
            frozen: vec![vec![None; columns.len()]; comms.len()],
            comms: comms.to_vec(),
            comm_columns,
            previous: vec![None; columns.len()],
        })
    }

    pub fn push(&mut self, t: u64, row: &[Option<f64>]) -> Vec<Option<f64>> {
        let mut signal: Vec<Option<f64>> = row
            .iter()
            .zip(&mut self.noise)
            .map(|(v, perturbers)| v.map(|v| perturbers.iter_mut().fold(v, |acc, p| p.next_value(acc))))
            .collect();

        for j in 0..signal.len() {
            let winner = precedence_order(
                self.faults.iter().filter(|(_, col)| *col == j).map(|(f, _)| &f.window),
                t,
            )
            .pop();
            if let Some(nth) = winner {
                let idx = self
                    .faults
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, col))| *col == j)
                    .nth(nth)
                    .map(|(i, _)| i)
                    .expect("index from same filter");
                let (fault, _) = &self.faults[idx];
                signal[j] = signal[j].map(|v| apply_sensor_fault(v, fault, t, &mut self.fault_rngs[idx]));
            }
        }

        let mut out = signal.clone();
        for (e, comm) in self.comms.iter().enumerate() {
            for j in 0..signal.len() {
                if !self.comm_columns[e][j] {
                    continue;
                }
                if comm.window.contains(t) {
                    if comm.kind == CommunicationKind::Freeze && self.frozen[e][j].is_none() {
                        // With no earlier sample the first in-window value is held.
                        self.frozen[e][j] = Some(self.previous[j].or(signal[j]));
                    }
                } else {
                    self.frozen[e][j] = None;
                }
            }
        }
        for j in 0..signal.len() {
            let active = precedence_order(
                self.comms
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| self.comm_columns[*e][j])
                    .map(|(_, c)| &c.window),
                t,
            );
            if let Some(&nth) = active.last() {
                let e = self
                    .comms
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| self.comm_columns[*e][j])
                    .nth(nth)
                    .map(|(e, _)| e)
                    .expect("index from same filter");
                out[j] = match self.comms[e].kind {
                    CommunicationKind::DataLoss => None,
                    CommunicationKind::Freeze => self.frozen[e][j].flatten(),
                };
            }
        }
        self.previous = signal;
        out
    }
}

/// Applies noise, faults and communication events to every row.
pub fn corrupt(
    scada: &ScadaData,
    faults: &[SensorFaultEvent],
    comms: &[CommunicationEvent],
    noise: &[UncertaintyModel],
    stream: &SeededStream,
) -> Result<ScadaData, ScadaError> {
    let mut c = Corruptor::new(&scada.columns, faults, comms, noise, stream)?;
    let rows = scada
        .times
        .iter()
        .zip(&scada.rows)
        .map(|(t, row)| c.push(*t, row))
        .collect();
    Ok(ScadaData {
        times: scada.times.clone(),
        columns: scada.columns.clone(),
        rows,
        ground_truth: scada.ground_truth.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::SensorFaultKind;
    use crate::uncertainty::Perturbation;

    fn sample() -> ScadaData {
        let columns = vec![
            SensorColumn::new(SensorType::Pressure, "n54"),
            SensorColumn::new(SensorType::Flow, "p1"),
        ];
        let rows = (0..6)
            .map(|i| vec![Some(3.0 + i as f64), Some(0.5 * i as f64)])
            .collect();
        ScadaData::new((0..6).map(|i| i * 300).collect(), columns, rows)
    }

    #[test]
    fn placement_column_order() {
        let p = SensorPlacement {
            pressure_nodes: vec!["n2".into(), "n10".into()],
            flow_links: vec!["b".into(), "a".into()],
            quality_nodes: vec!["q".into()],
            tank_level_tanks: vec!["t".into()],
        };
        let labels: Vec<String> = p.columns().iter().map(|c| c.label()).collect();
        assert_eq!(
            labels,
            [
                "pressure:n10",
                "pressure:n2",
                "flow:a",
                "flow:b",
                "quality:q",
                "tank_level:t"
            ]
        );
    }

    #[test]
    fn identity_pipeline_is_bitwise_equal() {
        let s = sample();
        let out = corrupt(&s, &[], &[], &[], &SeededStream::new(1)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn data_loss_blanks_a_row() {
        let s = sample();
        let loss = CommunicationEvent::all_sensors(CommunicationKind::DataLoss, 600, 900);
        let out = corrupt(&s, &[], &[loss], &[], &SeededStream::new(1)).unwrap();
        assert!(out.row(2).iter().all(|v| v.is_none()));
        assert_eq!(out.row(1), s.row(1));
        assert_eq!(out.row(3), s.row(3));
    }

    #[test]
    fn freeze_holds_pre_window_value() {
        let columns = vec![SensorColumn::new(SensorType::Pressure, "a")];
        let values = [3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let rows = values.iter().map(|v| vec![Some(*v)]).collect();
        let s = ScadaData::new((0..6).map(|i| i * 10).collect(), columns, rows);
        let freeze = CommunicationEvent::on_sensor(CommunicationKind::Freeze, SensorType::Pressure, "a", 20, 50);
        let out = corrupt(&s, &[], &[freeze], &[], &SeededStream::new(0)).unwrap();
        let got: Vec<f64> = out.column(0).into_iter().map(Option::unwrap).collect();
        assert_eq!(got, vec![3.0, 4.0, 4.0, 4.0, 4.0, 8.0]);
    }

    #[test]
    fn fault_then_loss_ordering() {
        let s = sample();
        let offset = SensorFaultEvent::new(SensorFaultKind::Offset, SensorType::Pressure, "n54", 100.0, 0, 1800);
        let loss = CommunicationEvent::on_sensor(CommunicationKind::DataLoss, SensorType::Pressure, "n54", 300, 600);
        let out = corrupt(&s, &[offset], &[loss], &[], &SeededStream::new(0)).unwrap();
        assert_eq!(out.row(0)[0], Some(103.0));
        assert_eq!(out.row(1)[0], None);
        assert_eq!(out.row(2)[0], Some(105.0));
        assert_eq!(out.column(1), s.column(1));
    }

    #[test]
    fn unknown_fault_sensor_is_rejected() {
        let s = sample();
        let f = SensorFaultEvent::new(SensorFaultKind::Offset, SensorType::Flow, "zzz", 1.0, 0, 10);
        assert!(matches!(
            corrupt(&s, &[f], &[], &[], &SeededStream::new(0)),
            Err(ScadaError::UnknownSensorRef(_))
        ));
    }

    #[test]
    fn streaming_matches_batch_with_noise() {
        let s = sample();
        let noise = vec![UncertaintyModel::new(
            Perturbation::RandomWalk { sigma: 0.1 },
            UncertaintyTarget::SensorNoise,
        )];
        let stream = SeededStream::new(8);
        let batch = corrupt(&s, &[], &[], &noise, &stream).unwrap();
        let mut c = Corruptor::new(s.columns(), &[], &[], &noise, &stream).unwrap();
        for (i, t) in s.times().iter().enumerate() {
            assert_eq!(c.push(*t, s.row(i)), batch.row(i));
        }
        assert_ne!(batch, s);
    }

    #[test]
    fn csv_shape_and_missing_fields() {
        let s = sample().slice(0..2);
        let loss = CommunicationEvent::on_sensor(CommunicationKind::DataLoss, SensorType::Pressure, "n54", 0, 300);
        let out = corrupt(&s, &[], &[loss], &[], &SeededStream::new(0)).unwrap();
        let csv = out.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next().unwrap(), "time_s,pressure:n54,flow:p1");
        assert_eq!(csv.lines().nth(1).unwrap(), "0,,0");
        assert!(!csv.contains("NaN"));
        assert_eq!(ScadaData::from_csv(&csv).unwrap(), out);
    }

    #[test]
    fn malformed_csv() {
        assert!(ScadaData::from_csv("").is_err());
        assert!(ScadaData::from_csv("time,x\n").is_err());
        let err = ScadaData::from_csv("time_s,pressure:a\n0,1\n1,abc\n").unwrap_err();
        assert_eq!(
            err,
            ScadaError::Csv {
                line: 3,
                message: "bad number abc".into()
            }
        );
    }

    #[test]
    fn ground_truth_round_trip() {
        let events = vec![GroundTruthEvent {
            event_id: "leak0".into(),
            kind: EventKind::AbruptLeakage,
            start_s: 10,
            end_s: 20,
        }];
        assert_eq!(ground_truth_from_csv(&ground_truth_to_csv(&events)).unwrap(), events);
    }
}
