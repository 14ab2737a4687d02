//! Synchronous round-based cascade: the brute-force oracle.

use super::{CascadeError, CascadeResult};
use crate::cgm::Multigraph;

/// Runs the synchronous cascade to its fixed point.
///
/// Round 0 activates exactly the threshold-0 nodes. Each later round
/// simultaneously activates every inactive node whose exposure, the number
/// of its half-edges whose mates sit on active nodes (so parallel edges
/// count with multiplicity), strictly exceeds its threshold. Activation is
/// permanent, so exposures only grow and the iteration reaches a fixed
/// point after at most `n` rounds.
///
/// A self-loop never contributes exposure to its own node: both its balls
/// sit on that node, and only edges from already-active nodes are tallied,
/// at which point the owner needs no further exposure. Equivalently, loops
/// at inactive nodes are inert, matching the ball bookkeeping of the
/// continuous engine exactly.
///
/// `rounds` records the active-set size per round, ending with two equal
/// entries once no activation fires.
pub fn run_discrete(mg: &Multigraph, thresholds: &[u32]) -> Result<CascadeResult, CascadeError> {
    let n = mg.n();
    if thresholds.len() != n {
        return Err(CascadeError::ThresholdLengthMismatch {
            expected: n,
            found: thresholds.len(),
        });
    }

    let mut active = vec![false; n];
    let mut exposure = vec![0u32; n];
    let mut frontier: Vec<usize> = Vec::new();
    for (i, &theta) in thresholds.iter().enumerate() {
        if theta == 0 {
            active[i] = true;
            frontier.push(i);
        }
    }
    let mut size = frontier.len();
    let mut rounds = vec![size];

    loop {
        let mut next = Vec::new();
        for &u in &frontier {
            for h in mg.half_edges_of(u) {
                let v = mg.owner(mg.mate(h)) as usize;
                if !active[v] {
                    exposure[v] += 1;
                    if exposure[v] > thresholds[v] {
                        // Mark immediately so parallel edges from this same
                        // frontier do not re-queue v; v still joins A only
                        // at the end of the round (synchronous semantics
                        // need no delay: marking cannot grant exposure to
                        // others until v enters the frontier next round).
                        active[v] = true;
                        next.push(v);
                    }
                }
            }
        }
        size += next.len();
        rounds.push(size);
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    Ok(CascadeResult {
        final_active: active,
        final_size: size,
        rounds,
    })
}
