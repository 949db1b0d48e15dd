//! Shared fixtures for the benchmarks.

use vdg_core::{
    build_model, parse_property, BuildOptions, GameParams, PropertyAst, TransitionModel,
};

pub const COOPERATIVE: &str = "<<p1,p2,p3>> R{\"done123\"}max=? [ F k=kmax+1 ]";
pub const VERSUS: &str = "<<p1:p2,p3>> R{\"r1\"}max=? [ F k=kmax+1 ]";

pub fn params(k_max: u32) -> GameParams {
    GameParams {
        k_max,
        ..GameParams::default()
    }
}

pub fn model(k_max: u32) -> TransitionModel {
    build_model(&params(k_max), BuildOptions::default()).expect("default model builds")
}

pub fn property(text: &str, k_max: u32) -> PropertyAst {
    parse_property(text, &params(k_max)).expect("fixture property parses")
}

/// Deterministic `size`x`size` payoff matrix with entries in [-50, 50].
pub fn matrix(size: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut x = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..size)
        .map(|_| {
            (0..size)
                .map(|_| {
                    x = x
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    ((x >> 33) % 101) as f64 - 50.0
                })
                .collect()
        })
        .collect()
}
