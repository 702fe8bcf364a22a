// The eleven uncertainty models on scalars, on series and on a network.
//
// cargo run --example uncertainty

use wdnflow::scenario::bundled_network;
use wdnflow::uncertainty::{
    apply_parameter_uncertainties, perturb_scalar, perturb_series, Perturbation, SeededStream, UncertaintyKind,
    UncertaintyModel, UncertaintyTarget,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let stream = SeededStream::new(2024);
    let classic = [
        Perturbation::GaussAbs { sigma: 1.0 },
        Perturbation::GaussRel { sigma: 0.05 },
        Perturbation::UniformAbs { a: 2.0 },
        Perturbation::UniformRel { r: 0.05 },
        Perturbation::TruncGaussAbs { sigma: 1.0 },
        Perturbation::Percentage { p: 0.1 },
    ];
    for (i, p) in classic.into_iter().enumerate() {
        let m = UncertaintyModel::new(p, UncertaintyTarget::PipeRoughness);
        println!(
            "{:<16} 100 -> {:.3}",
            m.kind().name(),
            perturb_scalar(&m, 100.0, &stream.child(i))
        );
    }

    let flat = vec![10.0; 48];
    let deep = [
        Perturbation::RandomWalk { sigma: 0.1 },
        Perturbation::Sinusoidal {
            amplitude: 1.0,
            period: 48.0,
        },
        Perturbation::RegimeShift {
            a: 1.0,
            mean_dwell: 12.0,
        },
        Perturbation::Spike { p: 0.1, a: 0.5 },
        Perturbation::Compound {
            models: vec![
                Perturbation::GaussAbs { sigma: 0.05 },
                Perturbation::Spike { p: 0.05, a: 1.0 },
            ],
        },
    ];
    for p in deep {
        let m = UncertaintyModel::new(p, UncertaintyTarget::SensorNoise);
        let s = perturb_series(&m, &flat, &stream.child(m.kind().name()));
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("{:<16} range {lo:.3}..{hi:.3}", m.kind().name());
    }
    assert_eq!(UncertaintyKind::ALL.len(), 11);

    // A "twin" network with uncertain roughness; the same seed gives the same twin.
    let net = wdnflow::inp::parse_inp(bundled_network("toy9").unwrap())?;
    let models = [UncertaintyModel::new(
        Perturbation::UniformRel { r: 0.1 },
        UncertaintyTarget::PipeRoughness,
    )];
    let twin = apply_parameter_uncertainties(&net, &models, &stream);
    assert_eq!(twin, apply_parameter_uncertainties(&net, &models, &stream));
    for (a, b) in net.pipes().iter().zip(twin.pipes()).take(3) {
        println!("{} roughness {} -> {:.2}", a.id, a.roughness, b.roughness);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("uncertainty example failed");
}
