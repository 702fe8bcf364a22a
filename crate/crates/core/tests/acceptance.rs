//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line, even when all of them pass.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wdnflow::detection::{evaluate, SensorInterpolationDetector};
use wdnflow::env::{Action, ControlEnv};
use wdnflow::events::{
    ActuatorEvent, ActuatorKind, ActuatorValue, CommunicationEvent, CommunicationKind, EventCategory, EventKind,
    EventWindow, LeakageEvent, LeakageKind, SensorFaultEvent, SensorFaultKind,
};
use wdnflow::hydraulics::{simulate, solve_snapshot, Controls, SimulationOptions, SolverSettings};
use wdnflow::inp::{parse_inp, round_trip_equal, write_inp};
use wdnflow::network::{Network, NetworkBuilder};
use wdnflow::quality::{decay, mass_balance_error, simulate_quality, QualitySettings};
use wdnflow::scada::SensorType;
use wdnflow::scenario::{bundled_network, load_network, Scenario, ScenarioConfig, BUNDLED_NETWORKS};
use wdnflow::uncertainty::{Perturbation, UncertaintyKind, UncertaintyModel, UncertaintyTarget};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn bundled(name: &str) -> Network {
    parse_inp(bundled_network(name).unwrap()).unwrap()
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn hydraulic_correctness() -> Outcome {
    let net = bundled("toy9");
    let series = simulate(&net, SimulationOptions::new(86_400, 300), &[], &[]).map_err(|e| e.to_string())?;
    let (mut mass, mut energy) = (0.0f64, 0.0f64);
    for s in &series.states {
        for (_, r) in series.model.mass_residuals(&s.flow, &s.actual_demand) {
            mass = mass.max(r.abs());
        }
        for (_, r) in series.model.pipe_energy_residuals(&s.flow, &s.head, &s.link_open) {
            energy = energy.max(r.abs());
        }
    }
    ensure!(mass <= 1e-6, "mass residual {mass:e} m3/s");
    ensure!(energy <= 1e-6, "energy residual {energy:e} m");

    let series_net = NetworkBuilder::new()
        .reservoir("R", 100.0)
        .junction("J", 0.0, 0.1)
        .pipe("P", "R", "J", 1000.0, 0.3, 100.0)
        .build()
        .unwrap();
    let s = solve_snapshot(
        &series_net,
        &[0.1],
        &Controls::baseline(&series_net),
        SolverSettings::default(),
    )
    .map_err(|e| e.to_string())?;
    let head = s.head[series_net.node_index("J").unwrap()];
    ensure!((head - 89.55).abs() / 89.55 <= 1e-3, "series head {head}");
    Ok(format!(
        "{} states, mass {mass:.1e} m3/s, energy {energy:.1e} m, series head {head:.3} m",
        series.len()
    ))
}

/// pumped with a throttle valve in parallel to P3, so every actuator kind
/// has a target.
fn pumped_with_valve() -> Network {
    parse_inp(&format!(
        "{}\n[VALVES]\nV1 J2 J4 200 TCV 0\n",
        bundled_network("pumped").unwrap()
    ))
    .unwrap()
}

fn event_inventory() -> Outcome {
    let count = |c| EventKind::ALL.iter().filter(|k| k.category() == c).count();
    let counts = [
        count(EventCategory::Leakage),
        count(EventCategory::Actuator),
        count(EventCategory::SensorFault),
        count(EventCategory::Communication),
    ];
    ensure!(
        EventKind::ALL.len() == 13 && counts == [3, 3, 5, 2],
        "event counts {counts:?}"
    );
    ensure!(
        UncertaintyKind::ALL.len() == 11,
        "{} uncertainty kinds",
        UncertaintyKind::ALL.len()
    );

    // Every kind must actually change the delivered data.
    let net = pumped_with_valve();
    let mut base = ScenarioConfig::new("inline", 6 * 3600, 300);
    base.sensors.pressure_nodes = vec!["J1".into(), "J2".into(), "J3".into(), "J4".into()];
    base.sensors.flow_links = vec!["P1".into(), "V1".into()];
    base.sensors.tank_level_tanks = vec!["T1".into()];
    let run = |c: &ScenarioConfig| -> Result<String, String> {
        let s = Scenario::new(c.clone(), net.clone()).map_err(|e| e.to_string())?;
        Ok(s.run().map_err(|e| e.to_string())?.scada.to_csv())
    };
    let baseline = run(&base)?;
    let (a, b) = (3600, 10_800);
    let fault = |k| SensorFaultEvent::new(k, SensorType::Pressure, "J2", 0.5, a, b);
    let actuator = |kind, target: &str, value| ActuatorEvent {
        kind,
        target_id: target.into(),
        value,
        window: EventWindow::new(a, b),
    };
    let mut silent = Vec::new();
    for kind in EventKind::ALL {
        let mut c = base.clone();
        match kind {
            EventKind::AbruptLeakage => c.leakages.push(LeakageEvent::abrupt("P2", 0.02, a, b)),
            EventKind::IncipientLeakage => c.leakages.push(LeakageEvent::incipient("P2", 0.02, a, b, 7200)),
            EventKind::PatternLeakage => c.leakages.push(LeakageEvent {
                kind: LeakageKind::Pattern,
                area_pattern: Some(vec![1.0, 0.0, 0.5]),
                ..LeakageEvent::abrupt("P2", 0.02, a, b)
            }),
            EventKind::PumpState => {
                c.actuator_events
                    .push(actuator(ActuatorKind::PumpState, "PU1", ActuatorValue::Flag(false)))
            }
            EventKind::PumpSpeed => {
                c.actuator_events
                    .push(actuator(ActuatorKind::PumpSpeed, "PU1", ActuatorValue::Speed(0.8)))
            }
            EventKind::ValveState => {
                c.actuator_events
                    .push(actuator(ActuatorKind::ValveState, "V1", ActuatorValue::Flag(false)))
            }
            EventKind::SensorOffset => c.sensor_faults.push(fault(SensorFaultKind::Offset)),
            EventKind::SensorDrift => c.sensor_faults.push(fault(SensorFaultKind::Drift)),
            EventKind::SensorGaussian => c.sensor_faults.push(fault(SensorFaultKind::Gaussian)),
            EventKind::SensorGain => c.sensor_faults.push(fault(SensorFaultKind::Gain)),
            EventKind::SensorStuckZero => c.sensor_faults.push(fault(SensorFaultKind::StuckZero)),
            EventKind::DataLoss => {
                c.communication_events
                    .push(CommunicationEvent::all_sensors(CommunicationKind::DataLoss, a, b))
            }
            EventKind::Freeze => {
                c.communication_events
                    .push(CommunicationEvent::all_sensors(CommunicationKind::Freeze, a, b))
            }
        }
        if run(&c)? == baseline {
            silent.push(kind.name());
        }
    }
    ensure!(silent.is_empty(), "events without effect: {silent:?}");
    Ok("13 events (3/3/5/2), each changes the data; 11 uncertainty kinds".into())
}

fn leak_detection_protocol() -> Outcome {
    let started = Instant::now();
    let scenario = Scenario::load(&scenario_path("leak_detection.toml")).map_err(|e| e.to_string())?;
    let out = scenario.run().map_err(|e| e.to_string())?;
    let data = &out.scada;
    ensure!(data.len() == 4032, "{} rows", data.len());
    let split = data.len() / 2;
    let det = SensorInterpolationDetector::fit(&data.rows()[..split]).map_err(|e| e.to_string())?;
    let result = det.apply(&data.rows()[split..]).map_err(|e| e.to_string())?;
    let times = &data.times()[split..];
    let metrics = evaluate(&result, &data.ground_truth, times);
    let elapsed = started.elapsed().as_secs_f64();

    let alarms_in = |kind: EventKind| {
        let e = data.ground_truth.iter().find(|g| g.kind == kind).unwrap();
        result
            .suspicious_time_indices
            .iter()
            .filter(|&&i| (e.start_s..e.end_s).contains(&times[i]))
            .count()
    };
    let abrupt = alarms_in(EventKind::AbruptLeakage);
    let drift = alarms_in(EventKind::SensorDrift);
    let incipient = alarms_in(EventKind::IncipientLeakage);
    ensure!(abrupt >= 1, "no alarm in the abrupt-leak window");
    ensure!(drift >= 1, "no alarm in the drift window");
    ensure!(elapsed < 60.0, "pipeline took {elapsed:.1} s");
    Ok(format!(
        "alarms abrupt {abrupt}, drift {drift}, incipient {incipient}; {} false positives; {elapsed:.1} s",
        metrics.false_positives
    ))
}

fn detector_calibration() -> Outcome {
    let mut total_rows = 0;
    for seed in 0..50u64 {
        let mut c = ScenarioConfig::new("bundled:toy9", 86_400, 300);
        c.seed = seed;
        c.sensors.pressure_nodes = (1..=8).map(|i| format!("J{i}")).collect();
        c.sensors.flow_links = vec!["P1".into(), "P4".into()];
        c.uncertainties = vec![
            UncertaintyModel::new(Perturbation::GaussAbs { sigma: 0.05 }, UncertaintyTarget::SensorNoise),
            UncertaintyModel::new(Perturbation::UniformRel { r: 0.1 }, UncertaintyTarget::PipeRoughness),
        ];
        let net = load_network(&c.network_path, Path::new(".")).map_err(|e| e.to_string())?;
        let out = Scenario::new(c, net).and_then(|s| s.run()).map_err(|e| e.to_string())?;
        let calib = &out.scada.rows()[..out.scada.len() / 2];
        let det = SensorInterpolationDetector::fit(calib).map_err(|e| e.to_string())?;
        let flagged = det.apply(calib).map_err(|e| e.to_string())?.suspicious_time_indices;
        ensure!(flagged.is_empty(), "seed {seed}: {} alarms", flagged.len());
        total_rows += calib.len();
    }
    Ok(format!("50 seeds, {total_rows} calibration rows, 0 alarms"))
}

fn quality_conservation() -> Outcome {
    let net = bundled("toy9");
    let series = simulate(&net, SimulationOptions::new(86_400, 300), &[], &[]).map_err(|e| e.to_string())?;
    let mut settings = QualitySettings {
        initial_concentration: 0.2,
        ..Default::default()
    };
    settings.source_nodes.insert("R1".into(), 1.0);
    let states = simulate_quality(&series, &net, &settings).map_err(|e| e.to_string())?;
    let err = mass_balance_error(&states);
    ensure!(err <= 1e-6, "ledger error {err:e}");

    let k = 2.5e-4;
    let efold = decay(3.7, k, 1.0 / k);
    let expected = 3.7 / std::f64::consts::E;
    ensure!((efold - expected).abs() <= 1e-12, "e-fold {efold} vs {expected}");
    let half = decay(1.0, k, std::f64::consts::LN_2 / k);
    ensure!((half - 0.5).abs() <= 1e-12, "half-life {half}");
    Ok(format!(
        "ledger error {err:.1e}, e-fold error {:.1e}",
        (efold - expected).abs()
    ))
}

fn determinism() -> Outcome {
    let path = scenario_path("toy9_faults.toml");
    let csv = || -> Result<String, String> {
        Ok(Scenario::load(&path)
            .and_then(|s| s.run())
            .map_err(|e| e.to_string())?
            .scada
            .to_csv())
    };
    let first = csv()?;
    ensure!(first == csv()?, "two runs differ");

    // Same scenario without sensor noise so that only the fault draws depend on the seed.
    let mut config = ScenarioConfig::load(&path).map_err(|e| e.to_string())?;
    config.uncertainties.clear();
    let net = load_network(&config.network_path, Path::new(".")).map_err(|e| e.to_string())?;
    let run = |seed: u64| {
        let mut c = config.clone();
        c.seed = seed;
        Scenario::new(c, net.clone())
            .and_then(|s| s.run())
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run(7)?, run(8)?);
    ensure!(
        a.series.digest() == b.series.digest(),
        "hydraulic truth depends on the seed"
    );
    ensure!(a.truth == b.truth, "noise-free readings depend on the seed");
    let fault = &config.sensor_faults[0];
    let j = a.scada.column_index(fault.sensor_type, &fault.sensor_id).unwrap();
    let (mut inside_diff, mut outside_diff) = (0, 0);
    for (k, &t) in a.scada.times().iter().enumerate() {
        if a.scada.row(k)[j] != b.scada.row(k)[j] {
            if fault.window.contains(t) {
                inside_diff += 1;
            } else {
                outside_diff += 1;
            }
        }
    }
    ensure!(inside_diff > 0, "fault draws ignore the seed");
    ensure!(
        outside_diff == 0,
        "{outside_diff} readings outside the fault window changed"
    );
    Ok(format!(
        "identical bytes ({} B); new seed changed {inside_diff} fault readings only",
        first.len()
    ))
}

fn mutate(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = rng.random_range(0..lines.len());
    match rng.random_range(0..4) {
        0 => {
            lines.remove(i);
        }
        1 => {
            let mut tokens: Vec<&str> = lines[i].split_whitespace().collect();
            if !tokens.is_empty() {
                let k = rng.random_range(0..tokens.len());
                tokens[k] = ["x", "-5", "inf", "[", ";;", "9:99:99"][rng.random_range(0..6)];
            }
            lines[i] = tokens.join(" ");
        }
        2 => {
            let keep = rng.random_range(0..=lines[i].len());
            lines[i] = lines[i].chars().take(keep).collect();
        }
        _ => {
            let junk: String = (0..rng.random_range(1..12))
                .map(|_| rng.random_range('!'..='~'))
                .collect();
            lines.insert(i, junk);
        }
    }
    lines.join("\n")
}

fn parser() -> Outcome {
    for (name, text) in BUNDLED_NETWORKS {
        let a = parse_inp(text).map_err(|e| format!("{name}: {e}"))?;
        let b = parse_inp(&write_inp(&a)).map_err(|e| format!("{name} rewritten: {e}"))?;
        ensure!(round_trip_equal(&a, &b), "{name} does not round-trip");
    }
    let text = bundled_network("toy9").unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let at = lines.iter().position(|l| l.trim() == "[PIPES]").unwrap() + 2;
    lines.insert(at, "PBAD J1 J2 100");
    let err = parse_inp(&lines.join("\n")).err().ok_or("short pipe row accepted")?;
    ensure!(
        err.line() == Some(at + 1),
        "error on line {:?}, expected {}",
        err.line(),
        at + 1
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rejected = 0;
    for n in 0..1000 {
        let edited = mutate(BUNDLED_NETWORKS[n % 3].1, &mut rng);
        let lines = edited.lines().count();
        match catch_unwind(|| parse_inp(&edited)) {
            Err(_) => return Err(format!("parser panicked on mutation {n}")),
            Ok(Err(e)) => {
                rejected += 1;
                if let Some(l) = e.line() {
                    ensure!(l >= 1 && l <= lines, "mutation {n}: line {l} of {lines}");
                }
            }
            Ok(Ok(_)) => {}
        }
    }
    Ok(format!(
        "3 fixtures round-trip; line numbers exact; 1000 mutations, {rejected} rejected, no panic"
    ))
}

fn control_env() -> Outcome {
    let mut config = ScenarioConfig::new("bundled:pumped", 86_400, 300);
    config.sensors.pressure_nodes = vec!["J1".into(), "J2".into(), "J3".into(), "J4".into()];
    config.sensors.tank_level_tanks = vec!["T1".into()];
    config.leakages.push(LeakageEvent::abrupt("P2", 0.01, 20_000, 40_000));
    config.actuator_events.push(ActuatorEvent {
        kind: ActuatorKind::PumpSpeed,
        target_id: "PU1".into(),
        value: ActuatorValue::Speed(0.9),
        window: EventWindow::new(50_000, 60_000),
    });
    let net = load_network(&config.network_path, Path::new(".")).map_err(|e| e.to_string())?;
    let scenario = Scenario::new(config, net).map_err(|e| e.to_string())?;
    let reference = scenario.simulate_hydraulics().map_err(|e| e.to_string())?;

    let mut env = ControlEnv::new(scenario.clone()).map_err(|e| e.to_string())?;
    env.reset().map_err(|e| e.to_string())?;
    while !env.is_done() {
        env.step(&Action::noop()).map_err(|e| e.to_string())?;
    }
    ensure!(
        env.states() == reference.states.as_slice(),
        "no-op episode differs from the simulation"
    );

    // Same first step with the pump switched off; everything downstream of it loses pressure.
    env.reset().map_err(|e| e.to_string())?;
    env.step(&Action::pump_off("PU1")).map_err(|e| e.to_string())?;
    let (on, off) = (&reference.states[1], &env.states()[1]);
    let mut drops = Vec::new();
    for id in ["J1", "J2", "J3", "J4"] {
        let i = scenario.network.node_index(id).unwrap();
        ensure!(
            off.pressure_head[i] < on.pressure_head[i],
            "pump off: {id} pressure {} vs {}",
            off.pressure_head[i],
            on.pressure_head[i]
        );
        drops.push(format!("{id} -{:.1}", on.pressure_head[i] - off.pressure_head[i]));
    }
    Ok(format!(
        "{} no-op steps bitwise equal; pump off lowers pressure ({} m)",
        env.total_steps(),
        drops.join(", ")
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("hydraulic correctness", hydraulic_correctness),
        ("event inventory", event_inventory),
        ("leak detection protocol", leak_detection_protocol),
        ("detector calibration", detector_calibration),
        ("quality conservation", quality_conservation),
        ("determinism", determinism),
        ("parser", parser),
        ("control environment", control_env),
    ];
    // Keep panics from the fuzz loop quiet; failures are reported below.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(reason) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({reason})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
