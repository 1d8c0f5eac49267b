//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use ladderlab::dgha::{build_dgha_triple, build_model, parse_f};
use ladderlab::quon::{build_quon_pair, QuonParams};
use ladderlab::{make_space, DressedSpace, DressingSpec, LadderTriple, C64};

pub const TOL: f64 = 1e-10;

/// Randomly dressed space with a fixed seed, so every run times the same matrices.
pub fn dressed(dim: usize) -> Arc<DressedSpace> {
    make_space(dim, DressingSpec::RandomSeeded { seed: 17, target_cond: 50.0 }).expect("valid dressing")
}

pub fn quon_triple(q: C64, dim: usize) -> (LadderTriple, Arc<DressedSpace>) {
    let space = dressed(dim);
    let params = QuonParams::with_default_alpha(q, dim).expect("q is not a root of unity");
    let model = build_quon_pair(&params, &space).expect("quon builds");
    (model.ladder_triple().expect("quon triple"), space)
}

pub fn dgha_triple(f: &str, dim: usize) -> (LadderTriple, Arc<DressedSpace>) {
    let space = dressed(dim);
    let model = build_model(&parse_f(f).expect("f parses"), dim).expect("f is admissible");
    let d = build_dgha_triple(&model, &space, TOL).expect("dgha triple");
    (d.ladder_triple(), space)
}
