// Load a bundled network, validate it and look at its incidence structure.
//
// cargo run --example inspect_network

use wdnflow::network::{incidence, validate, NetworkBuilder};
use wdnflow::scenario::{bundled_network, BUNDLED_NETWORKS};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, _) in BUNDLED_NETWORKS {
        let net = wdnflow::inp::parse_inp(bundled_network(name).unwrap())?;
        println!(
            "{name}: nodes {}, links {}, demand {:.4} m3/s",
            net.node_count(),
            net.link_count(),
            net.total_base_demand()
        );
    }

    let toy9 = wdnflow::inp::parse_inp(bundled_network("toy9").unwrap())?;
    assert!(validate(&toy9).is_empty());
    let inc = incidence(&toy9)?;
    for node in 0..toy9.node_count() {
        let links: Vec<String> = inc.node_links[node]
            .iter()
            .map(|(l, sign)| format!("{}{}", if *sign > 0 { "+" } else { "-" }, toy9.link_id(*l)))
            .collect();
        println!(
            "  {:<3} degree {}  {}",
            toy9.node_id(node),
            inc.degree(node),
            links.join(" ")
        );
    }

    // Validation reports problems instead of failing on the first one.
    let broken = NetworkBuilder::new()
        .junction("a", 0.0, 0.001)
        .junction("b", 0.0, 0.0)
        .pipe("p", "a", "X", 100.0, 0.1, 100.0)
        .build_unchecked();
    for v in validate(&broken) {
        println!("  violation: {v}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("inspect_network example failed");
}
