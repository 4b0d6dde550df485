//! Fixtures shared by the kernel benchmarks in `benches/`.

use seqdyn_core::{DecayLaw, MapSequence, SmoothMap, TrigTerm};

/// 2x + 0.05 sin 2πx.
pub fn perturbed_doubling() -> SmoothMap {
    SmoothMap::perturbed_doubling(0.05).expect("amplitude 0.05 keeps the map expanding")
}

pub fn doubling() -> MapSequence {
    MapSequence::constant(SmoothMap::doubling())
}

/// Doubling plus a geometrically vanishing sine perturbation.
pub fn doubling_tail() -> MapSequence {
    MapSequence::convergent_tail(
        Vec::new(),
        SmoothMap::doubling(),
        vec![TrigTerm::circle(0.05, 1)],
        DecayLaw::Geometric { scale: 1.0, ratio: 0.5 },
    )
    .expect("valid tail")
}

pub fn cat() -> MapSequence {
    MapSequence::constant(SmoothMap::perturbed_cat_map(0.001).expect("small perturbation stays hyperbolic"))
}
