#![allow(dead_code)]

use std::f64::consts::PI;

use qdsim::fock_oracle::BeamSplitter;
use qdsim::photon_stats::{EmissionProbabilities, Scheme};
use qdsim::source_model::SourceParams;
use qdsim::state::{CMat4, CVec4, TwoQubitState, C64};
use rand::Rng;

pub fn random_probs(rng: &mut impl Rng) -> EmissionProbabilities {
    let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.01..1.0));
    let s: f64 = w.iter().sum();
    let (p1, p2) = (w[1] / s, w[2] / s);
    EmissionProbabilities::new(1.0 - p1 - p2, p1, p2).unwrap()
}

/// Arbitrary beam splitters, both schemes, any phase.
pub fn random_params(rng: &mut impl Rng) -> SourceParams {
    let scheme = if rng.random_bool(0.5) { Scheme::La } else { Scheme::Rf };
    SourceParams {
        bs1: BeamSplitter::from_transmissivity(rng.random_range(0.05..0.95)).unwrap(),
        bs2: BeamSplitter::from_transmissivity(rng.random_range(0.05..0.95)).unwrap(),
        v: rng.random_range(0.0..=1.0),
        v_l: rng.random_range(0.0..=1.0),
        q: if scheme == Scheme::Rf { rng.random_range(0.05..=1.0) } else { 1.0 },
        chi: rng.random_range(-PI..PI),
        eta: rng.random_range(0.001..0.999),
        probs: random_probs(rng),
        c_wn: rng.random_range(0.0..=1.0),
        scheme,
    }
}

pub fn random_balanced_params(rng: &mut impl Rng) -> SourceParams {
    SourceParams { bs1: BeamSplitter::balanced(), bs2: BeamSplitter::balanced(), ..random_params(rng) }
}

/// Random state of the given rank (1..=4), Ginibre-style.
pub fn random_state(rng: &mut impl Rng, rank: usize) -> TwoQubitState {
    let mut m = CMat4::zeros();
    for _ in 0..rank {
        let v = CVec4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        m += v * v.adjoint();
    }
    TwoQubitState::from_unnormalized(m).unwrap()
}
