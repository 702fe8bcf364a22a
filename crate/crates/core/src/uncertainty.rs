//! Uncertainty models for hydraulic/quality parameters and sensor noise.
//!
//! Six "classic" perturbations act pointwise; five "deep" ones have memory
//! across a series (or compose other models). All randomness comes from a
//! [`SeededStream`], so every draw is a pure function of seed and path.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::network::Network;

/// Deterministic random stream identified by a seed and a hierarchical
/// path such as `scenario/pipe_roughness/p12/0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeededStream {
    seed: u64,
    path: Vec<String>,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> String {
        self.path.join("/")
    }

    pub fn child(&self, key: impl fmt::Display) -> Self {
        let mut path = self.path.clone();
        path.push(key.to_string());
        Self { seed: self.seed, path }
    }

    /// Generator for this exact (seed, path). Equal inputs give equal draws.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        for part in &self.path {
            h.update((part.len() as u64).to_le_bytes());
            h.update(part.as_bytes());
        }
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyTarget {
    PipeLength,
    PipeDiameter,
    PipeRoughness,
    DecayRate,
    SensorNoise,
}

impl UncertaintyTarget {
    fn name(self) -> &'static str {
        match self {
            UncertaintyTarget::PipeLength => "pipe_length",
            UncertaintyTarget::PipeDiameter => "pipe_diameter",
            UncertaintyTarget::PipeRoughness => "pipe_roughness",
            UncertaintyTarget::DecayRate => "decay_rate",
            UncertaintyTarget::SensorNoise => "sensor_noise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertaintyKind {
    GaussAbs,
    GaussRel,
    UniformAbs,
    UniformRel,
    TruncGaussAbs,
    Percentage,
    RandomWalk,
    Sinusoidal,
    RegimeShift,
    Spike,
    Compound,
}

impl UncertaintyKind {
    pub const ALL: [UncertaintyKind; 11] = [
        UncertaintyKind::GaussAbs,
        UncertaintyKind::GaussRel,
        UncertaintyKind::UniformAbs,
        UncertaintyKind::UniformRel,
        UncertaintyKind::TruncGaussAbs,
        UncertaintyKind::Percentage,
        UncertaintyKind::RandomWalk,
        UncertaintyKind::Sinusoidal,
        UncertaintyKind::RegimeShift,
        UncertaintyKind::Spike,
        UncertaintyKind::Compound,
    ];

    /// Name used as the `kind` tag in scenario files.
    pub fn name(self) -> &'static str {
        use UncertaintyKind::*;
        match self {
            GaussAbs => "gauss_abs",
            GaussRel => "gauss_rel",
            UniformAbs => "uniform_abs",
            UniformRel => "uniform_rel",
            TruncGaussAbs => "trunc_gauss_abs",
            Percentage => "percentage",
            RandomWalk => "random_walk",
            Sinusoidal => "sinusoidal",
            RegimeShift => "regime_shift",
            Spike => "spike",
            Compound => "compound",
        }
    }

    /// Pointwise, memoryless kinds.
    pub fn is_classic(self) -> bool {
        use UncertaintyKind::*;
        matches!(
            self,
            GaussAbs | GaussRel | UniformAbs | UniformRel | TruncGaussAbs | Percentage
        )
    }
}

/// Perturbation law with its parameters. Series-time parameters
/// (`period`, `mean_dwell`) are in samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    GaussAbs { sigma: f64 },
    GaussRel { sigma: f64 },
    UniformAbs { a: f64 },
    UniformRel { r: f64 },
    TruncGaussAbs { sigma: f64 },
    Percentage { p: f64 },
    RandomWalk { sigma: f64 },
    Sinusoidal { amplitude: f64, period: f64 },
    RegimeShift { a: f64, mean_dwell: f64 },
    Spike { p: f64, a: f64 },
    Compound { models: Vec<Perturbation> },
}

impl Perturbation {
    pub fn kind(&self) -> UncertaintyKind {
        match self {
            Perturbation::GaussAbs { .. } => UncertaintyKind::GaussAbs,
            Perturbation::GaussRel { .. } => UncertaintyKind::GaussRel,
            Perturbation::UniformAbs { .. } => UncertaintyKind::UniformAbs,
            Perturbation::UniformRel { .. } => UncertaintyKind::UniformRel,
            Perturbation::TruncGaussAbs { .. } => UncertaintyKind::TruncGaussAbs,
            Perturbation::Percentage { .. } => UncertaintyKind::Percentage,
            Perturbation::RandomWalk { .. } => UncertaintyKind::RandomWalk,
            Perturbation::Sinusoidal { .. } => UncertaintyKind::Sinusoidal,
            Perturbation::RegimeShift { .. } => UncertaintyKind::RegimeShift,
            Perturbation::Spike { .. } => UncertaintyKind::Spike,
            Perturbation::Compound { .. } => UncertaintyKind::Compound,
        }
    }

    fn check(&self, nested: bool) -> Result<(), UncertaintyError> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(UncertaintyError(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        match self {
            Perturbation::GaussAbs { sigma }
            | Perturbation::GaussRel { sigma }
            | Perturbation::TruncGaussAbs { sigma }
            | Perturbation::RandomWalk { sigma } => nonneg("sigma", *sigma),
            Perturbation::UniformAbs { a } => nonneg("a", *a),
            Perturbation::UniformRel { r } => nonneg("r", *r),
            Perturbation::Percentage { p } => {
                if p.is_finite() {
                    Ok(())
                } else {
                    Err(UncertaintyError("p must be finite".into()))
                }
            }
            Perturbation::Sinusoidal { amplitude, period } => {
                nonneg("amplitude", *amplitude)?;
                if *period > 0.0 && period.is_finite() {
                    Ok(())
                } else {
                    Err(UncertaintyError("period must be > 0".into()))
                }
            }
            Perturbation::RegimeShift { a, mean_dwell } => {
                nonneg("a", *a)?;
                if *mean_dwell > 0.0 && mean_dwell.is_finite() {
                    Ok(())
                } else {
                    Err(UncertaintyError("mean_dwell must be > 0".into()))
                }
            }
            Perturbation::Spike { p, a } => {
                nonneg("a", *a)?;
                if (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(UncertaintyError("spike probability must be in [0, 1]".into()))
                }
            }
            Perturbation::Compound { models } => {
                if nested {
                    return Err(UncertaintyError("compound models cannot be nested".into()));
                }
                if models.len() < 2 {
                    return Err(UncertaintyError("compound needs at least two models".into()));
                }
                models.iter().try_for_each(|m| m.check(true))
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid uncertainty model: {0}")]
pub struct UncertaintyError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyModel {
    #[serde(flatten)]
    pub perturbation: Perturbation,
    pub target: UncertaintyTarget,
}

impl UncertaintyModel {
    pub fn new(perturbation: Perturbation, target: UncertaintyTarget) -> Self {
        Self { perturbation, target }
    }

    pub fn kind(&self) -> UncertaintyKind {
        self.perturbation.kind()
    }

    pub fn check(&self) -> Result<(), UncertaintyError> {
        self.perturbation.check(false)
    }
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated >= 0")
}

fn uniform_sym<R: Rng>(rng: &mut R, a: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        rng.random_range(-a..=a)
    }
}

/// Stateful perturbation of a series, one sample at a time. Applying it to
/// a prefix gives the same values as applying it to the whole series.
pub struct SeriesPerturber {
    law: Perturbation,
    rng: ChaCha8Rng,
    index: u64,
    walk: f64,
    phase: f64,
    offset: f64,
    next_switch: f64,
    parts: Vec<SeriesPerturber>,
}

impl SeriesPerturber {
    pub fn new(law: &Perturbation, stream: &SeededStream) -> Self {
        let mut rng = stream.rng();
        let mut phase = 0.0;
        let mut next_switch = f64::INFINITY;
        let mut parts = Vec::new();
        match law {
            Perturbation::Sinusoidal { .. } => phase = rng.random_range(0.0..2.0 * PI),
            Perturbation::RegimeShift { mean_dwell, .. } => {
                next_switch = Exp::new(1.0 / mean_dwell).expect("mean_dwell > 0").sample(&mut rng)
            }
            Perturbation::Compound { models } => {
                parts = models
                    .iter()
                    .enumerate()
                    .map(|(i, m)| SeriesPerturber::new(m, &stream.child(i)))
                    .collect()
            }
            _ => {}
        }
        Self {
            law: law.clone(),
            rng,
            index: 0,
            walk: 0.0,
            phase,
            offset: 0.0,
            next_switch,
            parts,
        }
    }

    pub fn next_value(&mut self, v: f64) -> f64 {
        let t = self.index as f64;
        self.index += 1;
        let rng = &mut self.rng;
        match &self.law {
            Perturbation::GaussAbs { sigma } => v + normal(*sigma).sample(rng),
            Perturbation::GaussRel { sigma } => v * (1.0 + normal(*sigma).sample(rng)),
            Perturbation::UniformAbs { a } => v + uniform_sym(rng, *a),
            Perturbation::UniformRel { r } => v * (1.0 + uniform_sym(rng, *r)),
            Perturbation::TruncGaussAbs { sigma } => {
                let dist = normal(*sigma);
                loop {
                    let e = dist.sample(rng);
                    if e.abs() <= 3.0 * sigma {
                        break v + e;
                    }
                }
            }
            Perturbation::Percentage { p } => v * (1.0 + p),
            Perturbation::RandomWalk { sigma } => {
                self.walk += normal(*sigma).sample(rng);
                v + self.walk
            }
            Perturbation::Sinusoidal { amplitude, period } => {
                v + amplitude * (2.0 * PI * t / period + self.phase).sin()
            }
            Perturbation::RegimeShift { a, mean_dwell } => {
                let exp = Exp::new(1.0 / mean_dwell).expect("mean_dwell > 0");
                while t >= self.next_switch {
                    self.offset = uniform_sym(rng, *a);
                    self.next_switch += exp.sample(rng).max(f64::MIN_POSITIVE);
                }
                v + self.offset
            }
            Perturbation::Spike { p, a } => {
                let u: f64 = rng.random();
                if u < *p {
                    v + rng.random_range(1.0..=10.0) * a
                } else {
                    v
                }
            }
            Perturbation::Compound { .. } => self.parts.iter_mut().fold(v, |acc, part| part.next_value(acc)),
        }
    }
}

/// Perturbs one value. Physical parameter targets stay strictly positive
/// (decay rates stay non-negative).
pub fn perturb_scalar(model: &UncertaintyModel, value: f64, stream: &SeededStream) -> f64 {
    let v = SeriesPerturber::new(&model.perturbation, stream).next_value(value);
    clamp_physical(model.target, value, v)
}

fn clamp_physical(target: UncertaintyTarget, original: f64, v: f64) -> f64 {
    match target {
        UncertaintyTarget::PipeLength | UncertaintyTarget::PipeDiameter | UncertaintyTarget::PipeRoughness => {
            v.max(1e-3 * original.abs()).max(f64::MIN_POSITIVE)
        }
        UncertaintyTarget::DecayRate => v.max(0.0),
        UncertaintyTarget::SensorNoise => v,
    }
}

pub fn perturb_series(model: &UncertaintyModel, values: &[f64], stream: &SeededStream) -> Vec<f64> {
    let mut p = SeriesPerturber::new(&model.perturbation, stream);
    values.iter().map(|&v| p.next_value(v)).collect()
}

/// Builds the "twin" network with perturbed pipe parameters. Each pipe and
/// model gets its own substream, `<target>/<pipe id>/<model index>`.
pub fn apply_parameter_uncertainties(network: &Network, models: &[UncertaintyModel], stream: &SeededStream) -> Network {
    let mut b = network.to_builder();
    for (i, m) in models.iter().enumerate() {
        let target = m.target;
        if !matches!(
            target,
            UncertaintyTarget::PipeLength | UncertaintyTarget::PipeDiameter | UncertaintyTarget::PipeRoughness
        ) {
            continue;
        }
        for pipe in &mut b.pipes {
            let s = stream.child(target.name()).child(&pipe.id).child(i);
            let slot = match target {
                UncertaintyTarget::PipeLength => &mut pipe.length,
                UncertaintyTarget::PipeDiameter => &mut pipe.diameter,
                _ => &mut pipe.roughness,
            };
            *slot = perturb_scalar(m, *slot, &s);
        }
    }
    b.build_unchecked()
}

/// Applies every decay-rate model to `k`.
pub fn perturb_decay_rate(k: f64, models: &[UncertaintyModel], stream: &SeededStream) -> f64 {
    models
        .iter()
        .enumerate()
        .filter(|(_, m)| m.target == UncertaintyTarget::DecayRate)
        .fold(k, |acc, (i, m)| {
            perturb_scalar(m, acc, &stream.child("decay_rate").child(i))
        })
}
