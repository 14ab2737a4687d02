//! The contagion dynamics, run two ways.
//!
//! [`run_discrete`] iterates the synchronous activation rounds directly on
//! the graph: a node with threshold `theta` activates once strictly more
//! than `theta` of its half-edges lead to active nodes (multiplicity
//! counted), and activation is permanent. It is simple enough to audit by
//! hand, which makes it the oracle for everything else.
//!
//! [`run_continuous`] runs the equivalent continuous-time white/red
//! balls-and-bins exploration: nodes are bins, half-edges are balls, white
//! balls die at unit rate, and every death recolors the mate ball red.
//! An inactive bin of degree `d` survives while at least `d - theta` of its
//! balls are still white; dropping below that flips it active. The terminal
//! active set is the same monotone fixed point for every event order, so
//! the two engines must agree exactly on every instance; the continuous one
//! additionally yields the stopping time and the trajectory statistics the
//! analytic limits describe.

mod continuous;
mod discrete;

use std::collections::BTreeMap;

use thiserror::Error;

pub(crate) use continuous::run_lean;
pub use continuous::{death_process_reference, run_continuous};
pub use discrete::run_discrete;

/// Errors from the cascade engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CascadeError {
    /// The threshold slice does not have one entry per node.
    #[error("threshold list has {found} entries for {expected} nodes")]
    ThresholdLengthMismatch {
        /// Number of nodes in the graph.
        expected: usize,
        /// Number of thresholds supplied.
        found: usize,
    },
}

/// Terminal state of a cascade run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeResult {
    /// Per-node activation mask at the fixed point.
    pub final_active: Vec<bool>,
    /// Number of active nodes at the fixed point.
    pub final_size: usize,
    /// Active-set size per synchronous round, starting with the seed set.
    /// Nondecreasing; the last two entries are equal (fixed point reached).
    /// The continuous engine reports the coarse `[seeds, final, final]`
    /// summary since it has no synchronous rounds.
    pub rounds: Vec<usize>,
}

/// What happened at one trajectory row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A white ball's exponential clock fired and it was removed.
    WhiteDeath,
    /// The mate of the dead ball was recolored red and removed.
    RedRecolor,
    /// A removal was demanded but no white active-bin ball existed; the
    /// process stops here without mutating state.
    Stop,
}

impl EventKind {
    /// Stable lowercase label used in CSV dumps.
    #[must_use]
    pub fn label(self) -> &'static str {
        match self {
            EventKind::WhiteDeath => "white-death",
            EventKind::RedRecolor => "red-recolor",
            EventKind::Stop => "stop",
        }
    }
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Sentinel ball/bin id on [`EventKind::Stop`] rows, where no ball exists.
pub const NO_BALL: u32 = u32::MAX;

/// One row of the event log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    /// Event time.
    pub time: f64,
    /// Row kind.
    pub kind: EventKind,
    /// Ball (half-edge) id; [`NO_BALL`] on stop rows.
    pub ball: u32,
    /// Bin (node) id owning the ball; [`NO_BALL`] on stop rows.
    pub bin: u32,
}

/// State of the step functions immediately after one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    /// Row time (0 for the initial point).
    pub time: f64,
    /// White balls in active bins; `-1` on the terminal stop row, the
    /// bookkeeping convention for the removal that could not be served.
    pub h_a: i64,
    /// White balls in inactive bins.
    pub h_b: u64,
    /// Active bins.
    pub a_n: u64,
    /// Inactive bins.
    pub b_n: u64,
}

/// Snapshot of where the inactive bins sit: `(d, theta, white)` maps to the
/// number of inactive bins with that degree, threshold, and surviving white
/// ball count.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancySnapshot {
    /// Snapshot time.
    pub time: f64,
    /// `(degree, threshold, white count)` to inactive-bin count.
    pub counts: BTreeMap<(u32, u32, u32), u64>,
}

/// Where to take occupancy snapshots during [`run_continuous`].
#[derive(Debug, Clone, Copy)]
pub enum SnapshotSpec<'a> {
    /// No snapshots.
    Off,
    /// `k` uniform times spanning `[0, tau]` (a single point sits at 0).
    Uniform(usize),
    /// Explicit times; entries past `tau` capture the frozen terminal
    /// occupancy.
    Times(&'a [f64]),
}

/// Full record of one continuous-time run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Time-ordered rows; paired death/recolor rows share a timestamp, and
    /// a terminal stop row is present whenever at least one event occurred.
    pub events: Vec<Event>,
    /// Step-function states: the initial point followed by one point per
    /// event row.
    pub series: Vec<SeriesPoint>,
    /// Stopping time: when a removal was demanded but no white active-bin
    /// ball existed (0 when the initial pool is already empty).
    pub tau: f64,
    /// Occupancy snapshots at the requested grid times.
    pub occupancy: Vec<OccupancySnapshot>,
}

impl Trajectory {
    /// Right-continuous evaluation of the step functions at time `t >= 0`:
    /// the state after the last row with `time <= t`. For `t >= tau` this
    /// is the frozen terminal state (with the `h_a = -1` stop sentinel when
    /// a stop row exists).
    #[must_use]
    pub fn evaluate_at(&self, t: f64) -> SeriesPoint {
        let idx = self.series.partition_point(|p| p.time <= t);
        self.series[idx.saturating_sub(1)]
    }

    /// Number of nodes, recovered from any series point.
    #[must_use]
    pub fn n(&self) -> u64 {
        self.series.first().map_or(0, |p| p.a_n + p.b_n)
    }
}

#[cfg(test)]
pub(crate) fn check_trajectory_invariants(traj: &Trajectory, n: u64) -> Result<(), String> {
    let series = &traj.series;
    if series.is_empty() {
        return Err("series must contain the initial point".into());
    }
    if series[0].time != 0.0 {
        return Err("series must start at time 0".into());
    }
    if series.len() != traj.events.len() + 1 {
        return Err("series must hold one point per event row plus the initial".into());
    }
    let mut prev = series[0];
    if prev.a_n + prev.b_n != n {
        return Err("bin counts must sum to n".into());
    }
    for (point, event) in series[1..].iter().zip(&traj.events) {
        if point.time < prev.time {
            return Err(format!("time went backwards at {:?}", point));
        }
        if point.a_n + point.b_n != n {
            return Err("bin counts must sum to n".into());
        }
        if point.a_n < prev.a_n {
            return Err("active bin count must be nondecreasing".into());
        }
        match event.kind {
            EventKind::WhiteDeath | EventKind::RedRecolor => {
                if point.h_a < 0 {
                    return Err("h_a must be nonnegative before the stop row".into());
                }
                let white = |p: &SeriesPoint| p.h_a + p.h_b as i64;
                if white(point) != white(&prev) - 1 {
                    return Err("each paired row must remove exactly one white ball".into());
                }
            }
            EventKind::Stop => {
                if point.h_a != -1 {
                    return Err("stop row must carry the h_a = -1 sentinel".into());
                }
                if (event.ball, event.bin) != (NO_BALL, NO_BALL) {
                    return Err("stop row must carry placeholder ids".into());
                }
                if point.time != traj.tau {
                    return Err("stop row time must equal tau".into());
                }
            }
        }
        prev = *point;
    }
    if let Some(last_event) = traj.events.last() {
        if last_event.kind != EventKind::Stop {
            return Err("a nonempty event log must end with the stop row".into());
        }
    } else if traj.tau != 0.0 {
        return Err("an empty event log forces tau = 0".into());
    }
    let deaths = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::WhiteDeath)
        .count();
    let recolors = traj
        .events
        .iter()
        .filter(|e| e.kind == EventKind::RedRecolor)
        .count();
    if deaths != recolors {
        return Err("every death must be paired with exactly one recolor".into());
    }
    Ok(())
}
