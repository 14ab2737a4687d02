//! Shared workload builders for the engine benchmarks: a realized node
//! population and its paired multigraph under the two-atom reference law,
//! at a fixed seed so runs are comparable across machines and commits.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

use cascade_core::acceptance::example_distribution;
use cascade_core::cgm::build_multigraph;
use cascade_core::dist::NodeSequence;
use cascade_core::seed::{mix_seed, STREAM_BUILD, STREAM_REALIZE};
use cascade_core::Multigraph;

/// Root seed for every benchmark workload.
pub const BENCH_SEED: u64 = 20_240_817;

/// Realizes `n` nodes of the reference law.
#[must_use]
pub fn reference_sequence(n: usize) -> NodeSequence {
    example_distribution().realize_sampled(n, mix_seed(BENCH_SEED, STREAM_REALIZE))
}

/// Realizes `n` nodes and pairs their half-edges into a multigraph.
#[must_use]
pub fn reference_workload(n: usize) -> (NodeSequence, Multigraph) {
    let seq = reference_sequence(n);
    let graph = build_multigraph(&seq, mix_seed(BENCH_SEED, STREAM_BUILD))
        .expect("reference workload pairs cleanly");
    (seq, graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_builds_and_is_consistent() {
        let (seq, graph) = reference_workload(2_000);
        assert_eq!(seq.n(), 2_000);
        assert_eq!(graph.n(), 2_000);
        assert_eq!(
            2 * graph.m(),
            seq.degrees().iter().map(|&d| d as usize).sum::<usize>()
        );
    }
}
