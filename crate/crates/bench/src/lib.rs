//! Fixed hosts shared by the benchmarks in `benches/`.

use hypermatch::construct::{complete, critical_n, critical_plus};
use hypermatch::randomize::sparsify;
use hypermatch::{Hypergraph, RngSeed};

/// `K_n^k` in explicit form, so the solver walks real edge lists.
pub fn complete_explicit(k: usize, n: usize) -> Hypergraph {
    complete(n, k).expect("valid size").to_explicit()
}

pub fn critical(k: usize, n: usize) -> Hypergraph {
    critical_n(k, n).expect("valid size").0
}

/// The critical host with one repair layer, lightly sparsified so the
/// partition search has something to do.
pub fn noisy_critical_plus(k: usize, n: usize, keep: f64, seed: u64) -> Hypergraph {
    let h = critical_plus(k, n).expect("valid size").0;
    sparsify(&h, keep, &mut RngSeed::new(seed, 0).rng()).expect("probability in range")
}
