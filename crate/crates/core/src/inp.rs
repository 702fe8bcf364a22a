//! Reader and writer for a subset of the EPANET INP text format.
//!
//! Supported sections: `[TITLE] [JUNCTIONS] [RESERVOIRS] [TANKS] [PIPES]
//! [PUMPS] [VALVES] [DEMANDS] [PATTERNS] [CURVES] [TIMES] [OPTIONS]`, plus
//! `[STATUS]` for initial pump/valve status. Anything else is skipped with a
//! warning. Flow units must be `LPS` or `CMS`; pipe and valve diameters are
//! read in millimetres as in SI-unit EPANET files. Everything is converted
//! to SI (m, m³/s, s) on the way in.

use std::fmt::Write as _;

use thiserror::Error;

use crate::network::{
    validate, Curve, Junction, Network, NetworkBuilder, Pattern, Pipe, Pump, Reservoir, Tank, TimeOptions, Valve,
    Violation,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InpError {
    #[error("line {line}: malformed {section} row: {message}")]
    MalformedSection {
        line: usize,
        section: String,
        message: String,
    },
    #[error("line {line}: unsupported flow units {units} (only LPS and CMS)")]
    UnsupportedUnits { line: usize, units: String },
    #[error("line {line}: unsupported option: {option}")]
    UnsupportedOption { line: usize, option: String },
    #[error("dangling reference: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    DanglingReference(Vec<Violation>),
}

impl InpError {
    /// Physical line the error points at, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            InpError::MalformedSection { line, .. }
            | InpError::UnsupportedUnits { line, .. }
            | InpError::UnsupportedOption { line, .. } => Some(*line),
            InpError::DanglingReference(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InpRow {
    /// 1-based physical line number.
    pub line: usize,
    pub tokens: Vec<String>,
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InpSection {
    /// Uppercase, bracketed, e.g. `[PIPES]`.
    pub name: String,
    pub line: usize,
    pub rows: Vec<InpRow>,
}

/// Tokenised INP file: ordered sections of whitespace-separated rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InpDocument {
    pub sections: Vec<InpSection>,
}

impl InpDocument {
    pub fn parse(text: &str) -> Result<Self, InpError> {
        let mut sections: Vec<InpSection> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let (body, comment) = match raw.find(';') {
                Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim().to_string())),
                None => (raw, None),
            };
            let body = body.trim();
            if body.is_empty() {
                continue;
            }
            if body.starts_with('[') {
                if !body.ends_with(']') || body.len() < 3 {
                    return Err(InpError::MalformedSection {
                        line,
                        section: body.to_string(),
                        message: "unterminated section header".into(),
                    });
                }
                sections.push(InpSection {
                    name: body.to_ascii_uppercase(),
                    line,
                    rows: Vec::new(),
                });
                continue;
            }
            let Some(section) = sections.last_mut() else {
                return Err(InpError::MalformedSection {
                    line,
                    section: String::new(),
                    message: "data before first section header".into(),
                });
            };
            section.rows.push(InpRow {
                line,
                tokens: body.split_whitespace().map(str::to_string).collect(),
                comment,
            });
        }
        Ok(Self { sections })
    }

    pub fn section<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a InpRow> + 'a {
        self.sections
            .iter()
            .filter(move |s| s.name == name)
            .flat_map(|s| s.rows.iter())
    }
}

const KNOWN_SECTIONS: [&str; 14] = [
    "[TITLE]",
    "[JUNCTIONS]",
    "[RESERVOIRS]",
    "[TANKS]",
    "[PIPES]",
    "[PUMPS]",
    "[VALVES]",
    "[DEMANDS]",
    "[PATTERNS]",
    "[CURVES]",
    "[TIMES]",
    "[OPTIONS]",
    "[STATUS]",
    "[END]",
];

/// Result of parsing: the network plus non-fatal warnings.
#[derive(Debug, Clone)]
pub struct ParsedInp {
    pub network: Network,
    pub warnings: Vec<String>,
}

pub fn parse_inp(text: &str) -> Result<Network, InpError> {
    parse_inp_with_warnings(text).map(|p| p.network)
}

pub fn parse_inp_with_warnings(text: &str) -> Result<ParsedInp, InpError> {
    let parsed = parse_inp_unvalidated(text)?;
    let violations = validate(&parsed.network);
    if !violations.is_empty() {
        return Err(InpError::DanglingReference(violations));
    }
    Ok(parsed)
}

/// Parses without running [`validate`], so a network with dangling
/// references or other violations can still be inspected.
pub fn parse_inp_unvalidated(text: &str) -> Result<ParsedInp, InpError> {
    let doc = InpDocument::parse(text)?;
    let mut warnings = Vec::new();
    for s in &doc.sections {
        if !KNOWN_SECTIONS.contains(&s.name.as_str()) {
            warnings.push(format!("line {}: ignoring section {}", s.line, s.name));
        }
    }

    // Options first: units decide every conversion below.
    let mut flow_factor = 1e-3;
    for row in doc.section("[OPTIONS]") {
        parse_option(row, &mut flow_factor, &mut warnings)?;
    }
    let times = parse_times(&doc, &mut warnings)?;

    let mut b = NetworkBuilder {
        times,
        ..NetworkBuilder::default()
    };
    b.title = doc
        .section("[TITLE]")
        .map(|r| r.tokens.join(" "))
        .collect::<Vec<_>>()
        .join("\n");

    for row in doc.section("[JUNCTIONS]") {
        let r = Row::new(row, "[JUNCTIONS]");
        r.arity(2, 4)?;
        b.junctions.push(Junction {
            id: r.str(0),
            elevation: r.num(1)?,
            base_demand: r.opt_num(2)?.unwrap_or(0.0) * flow_factor,
            demand_pattern: r.opt_str(3),
        });
    }
    for row in doc.section("[RESERVOIRS]") {
        let r = Row::new(row, "[RESERVOIRS]");
        r.arity(2, 3)?;
        b.reservoirs.push(Reservoir {
            id: r.str(0),
            head: r.num(1)?,
            head_pattern: r.opt_str(2),
        });
    }
    for row in doc.section("[TANKS]") {
        let r = Row::new(row, "[TANKS]");
        r.arity(6, 9)?;
        if let Some(curve) = r.opt_str(7).filter(|c| c != "*") {
            warnings.push(format!("line {}: ignoring tank volume curve {curve}", row.line));
        }
        b.tanks.push(Tank {
            id: r.str(0),
            elevation: r.num(1)?,
            init_level: r.num(2)?,
            min_level: r.num(3)?,
            max_level: r.num(4)?,
            diameter: r.num(5)?,
        });
    }
    for row in doc.section("[PIPES]") {
        let r = Row::new(row, "[PIPES]");
        r.arity(6, 8)?;
        if r.opt_num(6)?.is_some_and(|k| k != 0.0) {
            warnings.push(format!("line {}: ignoring pipe minor loss", row.line));
        }
        let open = match r.opt_str(7).map(|s| s.to_ascii_uppercase()).as_deref() {
            None | Some("OPEN") => true,
            Some("CLOSED") => false,
            Some(other) => return Err(r.malformed(format!("unsupported pipe status {other}"))),
        };
        b.pipes.push(Pipe {
            id: r.str(0),
            from_node: r.str(1),
            to_node: r.str(2),
            length: r.num(3)?,
            diameter: r.num(4)? * 1e-3,
            roughness: r.num(5)?,
            open,
        });
    }
    for row in doc.section("[PUMPS]") {
        let r = Row::new(row, "[PUMPS]");
        r.arity(5, 9)?;
        let mut curve = None;
        let mut speed = 1.0;
        let mut i = 3;
        while i < row.tokens.len() {
            if i + 1 >= row.tokens.len() {
                return Err(r.malformed("keyword without value".into()));
            }
            match row.tokens[i].to_ascii_uppercase().as_str() {
                "HEAD" => curve = Some(r.str(i + 1)),
                "SPEED" => speed = r.num(i + 1)?,
                "PATTERN" => warnings.push(format!("line {}: ignoring pump speed pattern", row.line)),
                other => return Err(r.malformed(format!("unsupported pump keyword {other}"))),
            }
            i += 2;
        }
        let Some(curve_id) = curve else {
            return Err(r.malformed("pump needs a HEAD curve".into()));
        };
        b.pumps.push(Pump {
            id: r.str(0),
            from_node: r.str(1),
            to_node: r.str(2),
            curve_id,
            speed,
            running: true,
        });
    }
    for row in doc.section("[VALVES]") {
        let r = Row::new(row, "[VALVES]");
        r.arity(6, 7)?;
        let kind = row.tokens[4].to_ascii_uppercase();
        if kind != "TCV" {
            return Err(r.malformed(format!("unsupported valve type {kind}")));
        }
        b.valves.push(Valve {
            id: r.str(0),
            from_node: r.str(1),
            to_node: r.str(2),
            diameter: r.num(3)? * 1e-3,
            minor_loss_coef: r.num(5)? + r.opt_num(6)?.unwrap_or(0.0),
            open: true,
        });
    }
    let mut demand_seen = std::collections::HashSet::new();
    for row in doc.section("[DEMANDS]") {
        let r = Row::new(row, "[DEMANDS]");
        r.arity(2, 3)?;
        let id = r.str(0);
        if !demand_seen.insert(id.clone()) {
            return Err(r.malformed(format!("multiple demand categories for {id}")));
        }
        let demand = r.num(1)? * flow_factor;
        let pattern = r.opt_str(2);
        match b.junctions.iter_mut().find(|j| j.id == id) {
            Some(j) => {
                j.base_demand = demand;
                j.demand_pattern = pattern;
            }
            None => return Err(r.malformed(format!("unknown junction {id}"))),
        }
    }
    for row in doc.section("[PATTERNS]") {
        let r = Row::new(row, "[PATTERNS]");
        r.arity(2, usize::MAX)?;
        let id = r.str(0);
        let values = (1..row.tokens.len()).map(|i| r.num(i)).collect::<Result<Vec<_>, _>>()?;
        match b.patterns.iter_mut().find(|p| p.id == id) {
            Some(p) => p.multipliers.extend(values),
            None => b.patterns.push(Pattern {
                id,
                multipliers: values,
                step: times.pattern_step_s,
            }),
        }
    }
    for row in doc.section("[CURVES]") {
        let r = Row::new(row, "[CURVES]");
        r.arity(3, 3)?;
        let id = r.str(0);
        let point = (r.num(1)? * flow_factor, r.num(2)?);
        match b.curves.iter_mut().find(|c| c.id == id) {
            Some(c) => c.points.push(point),
            None => b.curves.push(Curve {
                id,
                points: vec![point],
            }),
        }
    }
    for row in doc.section("[STATUS]") {
        let r = Row::new(row, "[STATUS]");
        r.arity(2, 2)?;
        let id = r.str(0);
        let value = row.tokens[1].to_ascii_uppercase();
        let open = match value.as_str() {
            "OPEN" => Some(true),
            "CLOSED" => Some(false),
            _ => None,
        };
        if let Some(p) = b.pumps.iter_mut().find(|p| p.id == id) {
            match open {
                Some(o) => p.running = o,
                None => p.speed = r.num(1)?,
            }
        } else if let Some(v) = b.valves.iter_mut().find(|v| v.id == id) {
            v.open = open.ok_or_else(|| r.malformed(format!("bad valve status {value}")))?;
        } else if let Some(p) = b.pipes.iter_mut().find(|p| p.id == id) {
            p.open = open.ok_or_else(|| r.malformed(format!("bad pipe status {value}")))?;
        } else {
            return Err(r.malformed(format!("unknown link {id}")));
        }
    }

    Ok(ParsedInp {
        network: b.build_unchecked(),
        warnings,
    })
}

fn parse_option(row: &InpRow, flow_factor: &mut f64, warnings: &mut Vec<String>) -> Result<(), InpError> {
    let upper: Vec<String> = row.tokens.iter().map(|t| t.to_ascii_uppercase()).collect();
    let key = upper[0].as_str();
    let value = |i: usize| upper.get(i).cloned().unwrap_or_default();
    match key {
        "UNITS" => {
            *flow_factor = match value(1).as_str() {
                "LPS" => 1e-3,
                "CMS" => 1.0,
                other => {
                    return Err(InpError::UnsupportedUnits {
                        line: row.line,
                        units: other.to_string(),
                    })
                }
            }
        }
        "HEADLOSS" => {
            if value(1) != "H-W" {
                return Err(InpError::UnsupportedOption {
                    line: row.line,
                    option: format!("Headloss {}", value(1)),
                });
            }
        }
        "DEMAND" if value(1) == "MODEL" => {
            if value(2) != "DDA" {
                return Err(InpError::UnsupportedOption {
                    line: row.line,
                    option: format!("Demand Model {}", value(2)),
                });
            }
        }
        "MINIMUM" | "REQUIRED" | "PRESSURE" => {
            if value(1) == "PRESSURE" || key == "PRESSURE" {
                return Err(InpError::UnsupportedOption {
                    line: row.line,
                    option: row.tokens.join(" "),
                });
            }
        }
        _ => warnings.push(format!("line {}: ignoring option {}", row.line, row.tokens.join(" "))),
    }
    Ok(())
}

fn parse_times(doc: &InpDocument, warnings: &mut Vec<String>) -> Result<TimeOptions, InpError> {
    let mut times = TimeOptions::default();
    for row in doc.section("[TIMES]") {
        let upper: Vec<String> = row.tokens.iter().map(|t| t.to_ascii_uppercase()).collect();
        let (slot, at) = match (upper[0].as_str(), upper.get(1).map(String::as_str)) {
            ("DURATION", _) => (Some(&mut times.duration_s), 1),
            ("HYDRAULIC", Some("TIMESTEP")) => (Some(&mut times.hydraulic_step_s), 2),
            ("QUALITY", Some("TIMESTEP")) => (Some(&mut times.quality_step_s), 2),
            ("PATTERN", Some("TIMESTEP")) => (Some(&mut times.pattern_step_s), 2),
            _ => (None, 0),
        };
        let Some(slot) = slot else {
            warnings.push(format!(
                "line {}: ignoring time option {}",
                row.line,
                row.tokens.join(" ")
            ));
            continue;
        };
        let malformed = |message: String| InpError::MalformedSection {
            line: row.line,
            section: "[TIMES]".into(),
            message,
        };
        let value = row
            .tokens
            .get(at)
            .ok_or_else(|| malformed("missing time value".into()))?;
        let seconds = parse_clock(value, row.tokens.get(at + 1).map(String::as_str))
            .ok_or_else(|| malformed(format!("bad time value {value}")))?;
        *slot = seconds;
    }
    Ok(times)
}

/// Parses `H:MM[:SS]` or a decimal number with an optional unit word
/// (hours by default).
pub fn parse_clock(value: &str, unit: Option<&str>) -> Option<u64> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() > 3 {
            return None;
        }
        let mut secs = 0u64;
        for (i, p) in parts.iter().enumerate() {
            let v: u64 = p.parse().ok()?;
            let scale = [3600u64, 60, 1][i];
            secs = secs.checked_add(v.checked_mul(scale)?)?;
        }
        return Some(secs);
    }
    let v: f64 = value.parse().ok()?;
    if !(v.is_finite() && v >= 0.0) {
        return None;
    }
    let scale = match unit.map(|u| u.to_ascii_uppercase()).as_deref() {
        None | Some("HOURS") | Some("HOUR") | Some("HRS") => 3600.0,
        Some("MIN") | Some("MINUTES") | Some("MINUTE") => 60.0,
        Some("SEC") | Some("SECONDS") | Some("SECOND") => 1.0,
        Some("DAYS") | Some("DAY") => 86400.0,
        Some(_) => return None,
    };
    let secs = (v * scale).round();
    (secs < u64::MAX as f64).then_some(secs as u64)
}

fn format_clock(secs: u64) -> String {
    format!("{}:{:02}:{:02}", secs / 3600, (secs / 60) % 60, secs % 60)
}

struct Row<'a> {
    row: &'a InpRow,
    section: &'static str,
}

impl<'a> Row<'a> {
    fn new(row: &'a InpRow, section: &'static str) -> Self {
        Self { row, section }
    }

    fn malformed(&self, message: String) -> InpError {
        InpError::MalformedSection {
            line: self.row.line,
            section: self.section.to_string(),
            message,
        }
    }

    fn arity(&self, min: usize, max: usize) -> Result<(), InpError> {
        let n = self.row.tokens.len();
        if n < min || n > max {
            return Err(self.malformed(format!("expected {min}..={max} fields, found {n}")));
        }
        Ok(())
    }

    fn str(&self, i: usize) -> String {
        self.row.tokens[i].clone()
    }

    fn opt_str(&self, i: usize) -> Option<String> {
        self.row.tokens.get(i).cloned()
    }

    fn num(&self, i: usize) -> Result<f64, InpError> {
        let tok = &self.row.tokens[i];
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.malformed(format!("field {} is not a number: {tok}", i + 1))),
        }
    }

    fn opt_num(&self, i: usize) -> Result<Option<f64>, InpError> {
        if i < self.row.tokens.len() {
            self.num(i).map(Some)
        } else {
            Ok(None)
        }
    }
}

/// Serialises a network as CMS-unit INP text.
pub fn write_inp(network: &Network) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "[TITLE]");
    for line in network.title().lines() {
        let _ = writeln!(w, "{line}");
    }

    let _ = writeln!(w, "\n[JUNCTIONS]\n;ID\tElev\tDemand\tPattern");
    for j in network.junctions() {
        let _ = write!(w, "{}\t{}\t{}", j.id, j.elevation, j.base_demand);
        if let Some(p) = &j.demand_pattern {
            let _ = write!(w, "\t{p}");
        }
        let _ = writeln!(w);
    }

    let _ = writeln!(w, "\n[RESERVOIRS]\n;ID\tHead\tPattern");
    for r in network.reservoirs() {
        let _ = write!(w, "{}\t{}", r.id, r.head);
        if let Some(p) = &r.head_pattern {
            let _ = write!(w, "\t{p}");
        }
        let _ = writeln!(w);
    }

    let _ = writeln!(w, "\n[TANKS]\n;ID\tElev\tInitLvl\tMinLvl\tMaxLvl\tDiam");
    for t in network.tanks() {
        let _ = writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            t.id, t.elevation, t.init_level, t.min_level, t.max_level, t.diameter
        );
    }

    let _ = writeln!(
        w,
        "\n[PIPES]\n;ID\tNode1\tNode2\tLength\tDiam(mm)\tC\tMinorLoss\tStatus"
    );
    for p in network.pipes() {
        let _ = writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t0\t{}",
            p.id,
            p.from_node,
            p.to_node,
            p.length,
            p.diameter * 1e3,
            p.roughness,
            if p.open { "Open" } else { "Closed" }
        );
    }

    let _ = writeln!(w, "\n[PUMPS]\n;ID\tNode1\tNode2\tParameters");
    for p in network.pumps() {
        let _ = write!(w, "{}\t{}\t{}\tHEAD {}", p.id, p.from_node, p.to_node, p.curve_id);
        if p.speed != 1.0 {
            let _ = write!(w, "\tSPEED {}", p.speed);
        }
        let _ = writeln!(w);
    }

    let _ = writeln!(w, "\n[VALVES]\n;ID\tNode1\tNode2\tDiam(mm)\tType\tSetting\tMinorLoss");
    for v in network.valves() {
        let _ = writeln!(
            w,
            "{}\t{}\t{}\t{}\tTCV\t{}\t0",
            v.id,
            v.from_node,
            v.to_node,
            v.diameter * 1e3,
            v.minor_loss_coef
        );
    }

    let closed: Vec<String> = network
        .pumps()
        .iter()
        .filter(|p| !p.running)
        .map(|p| format!("{}\tClosed", p.id))
        .chain(
            network
                .valves()
                .iter()
                .filter(|v| !v.open)
                .map(|v| format!("{}\tClosed", v.id)),
        )
        .collect();
    if !closed.is_empty() {
        let _ = writeln!(w, "\n[STATUS]");
        for line in closed {
            let _ = writeln!(w, "{line}");
        }
    }

    let _ = writeln!(w, "\n[DEMANDS]");

    let _ = writeln!(w, "\n[PATTERNS]");
    for p in network.patterns() {
        for chunk in p.multipliers.chunks(6) {
            let values: Vec<String> = chunk.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(w, "{}\t{}", p.id, values.join("\t"));
        }
    }

    let _ = writeln!(w, "\n[CURVES]");
    for c in network.curves() {
        for (q, h) in &c.points {
            let _ = writeln!(w, "{}\t{}\t{}", c.id, q, h);
        }
    }

    let t = network.times();
    let _ = writeln!(w, "\n[TIMES]");
    let _ = writeln!(w, "Duration\t{}", format_clock(t.duration_s));
    let _ = writeln!(w, "Hydraulic Timestep\t{}", format_clock(t.hydraulic_step_s));
    let _ = writeln!(w, "Quality Timestep\t{}", format_clock(t.quality_step_s));
    let _ = writeln!(w, "Pattern Timestep\t{}", format_clock(t.pattern_step_s));

    let _ = writeln!(w, "\n[OPTIONS]\nUnits\tCMS\nHeadloss\tH-W\n\n[END]");
    s
}

/// Structural equality with floats compared to 9 significant digits.
pub fn round_trip_equal(a: &Network, b: &Network) -> bool {
    fn close(x: f64, y: f64) -> bool {
        x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs())
    }
    let same_len = |x: usize, y: usize| x == y;
    if !(same_len(a.junctions().len(), b.junctions().len())
        && same_len(a.reservoirs().len(), b.reservoirs().len())
        && same_len(a.tanks().len(), b.tanks().len())
        && same_len(a.pipes().len(), b.pipes().len())
        && same_len(a.pumps().len(), b.pumps().len())
        && same_len(a.valves().len(), b.valves().len())
        && same_len(a.patterns().len(), b.patterns().len())
        && same_len(a.curves().len(), b.curves().len())
        && a.times() == b.times()
        && a.title() == b.title())
    {
        return false;
    }
    let junctions = a.junctions().iter().zip(b.junctions()).all(|(x, y)| {
        x.id == y.id
            && close(x.elevation, y.elevation)
            && close(x.base_demand, y.base_demand)
            && x.demand_pattern == y.demand_pattern
    });
    let reservoirs = a
        .reservoirs()
        .iter()
        .zip(b.reservoirs())
        .all(|(x, y)| x.id == y.id && close(x.head, y.head) && x.head_pattern == y.head_pattern);
    let tanks = a.tanks().iter().zip(b.tanks()).all(|(x, y)| {
        x.id == y.id
            && close(x.elevation, y.elevation)
            && close(x.diameter, y.diameter)
            && close(x.init_level, y.init_level)
            && close(x.min_level, y.min_level)
            && close(x.max_level, y.max_level)
    });
    let pipes = a.pipes().iter().zip(b.pipes()).all(|(x, y)| {
        x.id == y.id
            && x.from_node == y.from_node
            && x.to_node == y.to_node
            && close(x.length, y.length)
            && close(x.diameter, y.diameter)
            && close(x.roughness, y.roughness)
            && x.open == y.open
    });
    let pumps = a.pumps().iter().zip(b.pumps()).all(|(x, y)| {
        x.id == y.id
            && x.from_node == y.from_node
            && x.to_node == y.to_node
            && x.curve_id == y.curve_id
            && close(x.speed, y.speed)
            && x.running == y.running
    });
    let valves = a.valves().iter().zip(b.valves()).all(|(x, y)| {
        x.id == y.id
            && x.from_node == y.from_node
            && x.to_node == y.to_node
            && close(x.diameter, y.diameter)
            && close(x.minor_loss_coef, y.minor_loss_coef)
            && x.open == y.open
    });
    let patterns = a.patterns().iter().zip(b.patterns()).all(|(x, y)| {
        x.id == y.id
            && x.step == y.step
            && x.multipliers.len() == y.multipliers.len()
            && x.multipliers.iter().zip(&y.multipliers).all(|(m, n)| close(*m, *n))
    });
    let curves = a.curves().iter().zip(b.curves()).all(|(x, y)| {
        x.id == y.id
            && x.points.len() == y.points.len()
            && x.points
                .iter()
                .zip(&y.points)
                .all(|(p, q)| close(p.0, q.0) && close(p.1, q.1))
    });
    junctions && reservoirs && tanks && pipes && pumps && valves && patterns && curves
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[TITLE]
minimal

[JUNCTIONS]
;ID  Elev  Demand
J1   10    5       ; five litres per second

[RESERVOIRS]
R1	100

[PIPES]
P1  R1  J1  1000  300  100

[VALVES]

[OPTIONS]
Units LPS
Headloss H-W
";

    #[test]
    fn minimal_counts() {
        let net = parse_inp(MINIMAL).unwrap();
        assert_eq!(
            (net.reservoirs().len(), net.junctions().len(), net.pipes().len()),
            (1, 1, 1)
        );
        assert!(net.valves().is_empty());
        assert!((net.junctions()[0].base_demand - 0.005).abs() < 1e-15);
        assert!((net.pipes()[0].diameter - 0.3).abs() < 1e-15);
        assert_eq!(net.title(), "minimal");
    }

    #[test]
    fn document_keeps_comments_and_lines() {
        let doc = InpDocument::parse(MINIMAL).unwrap();
        let row = doc.section("[JUNCTIONS]").next().unwrap();
        assert_eq!(row.line, 6);
        assert_eq!(row.comment.as_deref(), Some("five litres per second"));
        assert_eq!(row.tokens, vec!["J1", "10", "5"]);
    }

    #[test]
    fn unknown_section_is_a_warning() {
        let text = format!("{MINIMAL}\n[ENERGY]\nGlobal Efficiency 75\n");
        let parsed = parse_inp_with_warnings(&text).unwrap();
        assert!(parsed.warnings.iter().any(|w| w.contains("[ENERGY]")));
    }

    #[test]
    fn wrong_arity_points_at_line() {
        let text = MINIMAL.replace("P1  R1  J1  1000  300  100", "P1  R1  J1  1000");
        let err = parse_inp(&text).unwrap_err();
        assert_eq!(err.line(), Some(12));
        assert!(matches!(err, InpError::MalformedSection { .. }));
    }

    #[test]
    fn gpm_is_rejected() {
        let err = parse_inp(&MINIMAL.replace("Units LPS", "Units GPM")).unwrap_err();
        assert!(matches!(err, InpError::UnsupportedUnits { line: 17, .. }));
    }

    #[test]
    fn darcy_weisbach_and_pda_rejected() {
        let err = parse_inp(&MINIMAL.replace("Headloss H-W", "Headloss D-W")).unwrap_err();
        assert!(matches!(err, InpError::UnsupportedOption { .. }));
        let err = parse_inp(&format!("{MINIMAL}Demand Model PDA\n")).unwrap_err();
        assert!(matches!(err, InpError::UnsupportedOption { .. }));
    }

    #[test]
    fn dangling_reference() {
        let text = MINIMAL.replace("P1  R1  J1", "P1  R1  X");
        let err = parse_inp(&text).unwrap_err();
        match err {
            InpError::DanglingReference(v) => assert!(v.iter().any(|v| v.element == "P1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cms_units_skip_flow_conversion() {
        let text = MINIMAL.replace("Units LPS", "Units CMS");
        let net = parse_inp(&text).unwrap();
        assert_eq!(net.junctions()[0].base_demand, 5.0);
    }

    #[test]
    fn clock_formats() {
        assert_eq!(parse_clock("14:00", None), Some(14 * 3600));
        assert_eq!(parse_clock("0:05", None), Some(300));
        assert_eq!(parse_clock("1:00:30", None), Some(3630));
        assert_eq!(parse_clock("5", Some("min")), Some(300));
        assert_eq!(parse_clock("2", Some("DAYS")), Some(172800));
        assert_eq!(parse_clock("24", None), Some(86400));
        assert_eq!(parse_clock("x", None), None);
        assert_eq!(format_clock(3630), "1:00:30");
    }

    #[test]
    fn singleton_pattern_and_zero_demand_survive() {
        let mut b = parse_inp(MINIMAL).unwrap().to_builder();
        b.junctions[0].base_demand = 0.0;
        b.junctions[0].demand_pattern = Some("flat".into());
        b.patterns.push(Pattern {
            id: "flat".into(),
            multipliers: vec![1.0],
            step: b.times.pattern_step_s,
        });
        let net = b.build().unwrap();
        let text = write_inp(&net);
        assert!(text.contains("J1\t10\t0\tflat"));
        let back = parse_inp(&text).unwrap();
        assert!(round_trip_equal(&net, &back));
        assert_eq!(back.patterns()[0].multipliers, vec![1.0]);
    }

    #[test]
    fn closed_elements_round_trip() {
        let text = format!(
            "{MINIMAL}\n[CURVES]\nC1 10 50\n[PUMPS]\nPU1 R1 J1 HEAD C1 SPEED 0.9\n[VALVES]\nV1 J1 R1 200 TCV 2.5\n[STATUS]\nPU1 Closed\nV1 Closed\n"
        );
        let net = parse_inp(&text).unwrap();
        assert!(!net.pumps()[0].running);
        assert!(!net.valves()[0].open);
        assert_eq!(net.pumps()[0].speed, 0.9);
        let back = parse_inp(&write_inp(&net)).unwrap();
        assert!(round_trip_equal(&net, &back));
    }
}
