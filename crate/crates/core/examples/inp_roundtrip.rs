// INP text in, network out, and back again.
//
// cargo run --example inp_roundtrip

use wdnflow::inp::{parse_inp, parse_inp_with_warnings, round_trip_equal, write_inp};
use wdnflow::scenario::BUNDLED_NETWORKS;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, text) in BUNDLED_NETWORKS {
        let parsed = parse_inp_with_warnings(text)?;
        let written = write_inp(&parsed.network);
        let again = parse_inp(&written)?;
        assert!(round_trip_equal(&parsed.network, &again));
        println!(
            "{name}: {} bytes written, round trip ok, {} warnings",
            written.len(),
            parsed.warnings.len()
        );
    }

    let text = "[JUNCTIONS]\nJ1 10 5\n[RESERVOIRS]\nR1 50\n[PIPES]\nP1 R1 J1 100\n";
    match parse_inp(text) {
        Err(e) => println!("expected failure: {e}"),
        Ok(_) => unreachable!("the pipe row is short"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("inp_roundtrip example failed");
}
