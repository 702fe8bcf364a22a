use proptest::prelude::*;

use wdnflow::events::LeakageEvent;
use wdnflow::hydraulics::{simulate, solve_snapshot, Controls, SimulationOptions, SolverSettings, StateSeries};
use wdnflow::inp::parse_inp;
use wdnflow::network::{Network, NetworkBuilder};
use wdnflow::scenario::bundled_network;

fn bundled(name: &str) -> Network {
    parse_inp(bundled_network(name).unwrap()).unwrap()
}

fn worst_residuals(series: &StateSeries) -> (f64, f64) {
    let mut mass = 0.0f64;
    let mut energy = 0.0f64;
    for s in &series.states {
        for (_, r) in series.model.mass_residuals(&s.flow, &s.actual_demand) {
            mass = mass.max(r.abs());
        }
        for (_, r) in series.model.pipe_energy_residuals(&s.flow, &s.head, &s.link_open) {
            energy = energy.max(r.abs());
        }
    }
    (mass, energy)
}

#[test]
fn series_pipe_matches_hand_computed_head() {
    let net = NetworkBuilder::new()
        .reservoir("R", 100.0)
        .junction("J", 0.0, 0.1)
        .pipe("P", "R", "J", 1000.0, 0.3, 100.0)
        .build()
        .unwrap();
    let s = solve_snapshot(&net, &[0.1], &Controls::baseline(&net), SolverSettings::default()).unwrap();
    // 10.667 L Q^1.852 / (C^1.852 D^4.871) with logs, independent of the library.
    let loss = 10.667 * 1000.0 * (1.852 * 0.1f64.ln() - 1.852 * 100f64.ln() - 4.871 * 0.3f64.ln()).exp();
    let j = net.node_index("J").unwrap();
    assert!(
        (s.head[j] - (100.0 - loss)).abs() < 1e-6,
        "{} vs {}",
        s.head[j],
        100.0 - loss
    );
    assert!((s.head[j] - 89.55).abs() / 89.55 < 1e-3);
}

#[test]
fn balances_hold_on_every_bundled_network() {
    for name in ["toy9", "pumped"] {
        let series = simulate(&bundled(name), SimulationOptions::new(86_400, 300), &[], &[]).unwrap();
        let (mass, energy) = worst_residuals(&series);
        assert!(
            mass <= 1e-6 && energy <= 1e-6,
            "{name}: mass {mass:e}, energy {energy:e}"
        );
    }
}

#[test]
fn leaks_keep_balances_and_lose_water() {
    let net = bundled("toy9");
    let leak = LeakageEvent::abrupt("P5", 0.02, 3600, 7200);
    let series = simulate(&net, SimulationOptions::new(10_800, 300), &[leak], &[]).unwrap();
    let (mass, energy) = worst_residuals(&series);
    assert!(mass <= 1e-6 && energy <= 1e-6);
    for s in &series.states {
        let inside = (3600..7200).contains(&s.t);
        assert_eq!(s.leak_outflow[0] > 0.0, inside, "t={}", s.t);
    }
}

#[test]
fn pumped_tank_stays_within_bounds() {
    let net = bundled("pumped");
    let series = simulate(&net, SimulationOptions::new(3 * 86_400, 300), &[], &[]).unwrap();
    let tank = &net.tanks()[0];
    for s in &series.states {
        assert!(s.tank_level[0] >= tank.min_level - 1e-12 && s.tank_level[0] <= tank.max_level + 1e-12);
    }
}

#[test]
fn repeated_runs_share_a_digest() {
    let net = bundled("toy9");
    let a = simulate(&net, SimulationOptions::new(7200, 300), &[], &[]).unwrap();
    let b = simulate(&net, SimulationOptions::new(7200, 300), &[], &[]).unwrap();
    assert_eq!(a.digest(), b.digest());
    assert_eq!(a.config_digest, b.config_digest);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn element_order_does_not_change_heads(
        junctions in Just(bundled("toy9").to_builder().junctions).prop_shuffle(),
        pipes in Just(bundled("toy9").to_builder().pipes).prop_shuffle(),
    ) {
        let base = bundled("toy9");
        let mut b = base.to_builder();
        b.junctions = junctions;
        b.pipes = pipes;
        let shuffled = b.build().unwrap();
        let opts = SimulationOptions::new(3600, 300);
        let x = simulate(&base, opts, &[], &[]).unwrap();
        let y = simulate(&shuffled, opts, &[], &[]).unwrap();
        for (sx, sy) in x.states.iter().zip(&y.states) {
            for i in 0..base.node_count() {
                let k = shuffled.node_index(base.node_id(i)).unwrap();
                prop_assert!((sx.head[i] - sy.head[k]).abs() < 1e-8);
            }
            for l in 0..base.link_count() {
                let k = shuffled.link_index(base.link_id(l)).unwrap();
                prop_assert!((sx.flow[l] - sy.flow[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn more_demand_never_raises_heads(q in 0.0f64..0.2, extra in 1e-4f64..0.05) {
        let net = NetworkBuilder::new()
            .reservoir("R", 80.0)
            .junction("A", 5.0, 0.0)
            .junction("B", 3.0, 0.0)
            .junction("C", 1.0, 0.0)
            .pipe("p1", "R", "A", 500.0, 0.4, 120.0)
            .pipe("p2", "A", "B", 300.0, 0.3, 110.0)
            .pipe("p3", "B", "C", 300.0, 0.25, 100.0)
            .pipe("p4", "A", "C", 600.0, 0.2, 100.0)
            .build()
            .unwrap();
        let controls = Controls::baseline(&net);
        let low = solve_snapshot(&net, &[0.01, q, 0.02], &controls, SolverSettings::default()).unwrap();
        let high = solve_snapshot(&net, &[0.01, q + extra, 0.02], &controls, SolverSettings::default()).unwrap();
        for i in 0..3 {
            prop_assert!(high.head[i] < low.head[i] + 1e-9, "node {}: {} vs {}", i, high.head[i], low.head[i]);
        }
    }
}
