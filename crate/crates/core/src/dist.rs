//! Joint degree/threshold distributions and their finite realizations.
//!
//! A [`DegreeThresholdDistribution`] is a finite list of atoms
//! `(d, theta, p)`: probability mass `p` on nodes of degree `d` with
//! activation threshold `theta`. Nodes with `theta = 0` are the initial
//! seeds of the cascade. Finite support keeps every downstream series a
//! finite sum and is strictly stronger than the usual tail conditions.
//!
//! Two realization schemes produce a concrete [`NodeSequence`] of `n` nodes:
//! deterministic largest-remainder apportionment ([`realize_rounded`][DegreeThresholdDistribution::realize_rounded])
//! for reproducible theory comparisons, and i.i.d. sampling
//! ([`realize_sampled`][DegreeThresholdDistribution::realize_sampled]) for
//! central-limit experiments. Both repair an odd degree sum by bumping the
//! degree of the last maximal-degree node by one, recording the adjustment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the "masses sum to 1" invariant.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// One atom of a joint degree/threshold law.
///
/// Serializes as `{"d": .., "theta": .., "p": ..}`; unknown keys are
/// rejected, which makes distribution files self-checking against typos.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    /// Node degree.
    pub d: u32,
    /// Activation threshold: the node activates once more than `theta` of
    /// its half-edges are consumed by active neighbours; 0 means seed.
    pub theta: u32,
    /// Probability mass.
    pub p: f64,
}

/// A single violated invariant found by [`DegreeThresholdDistribution::validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    /// The atom list is empty.
    #[error("atom list is empty")]
    Empty,
    /// A mass is not strictly positive and finite.
    #[error("atom (d={d}, theta={theta}) has non-positive or non-finite mass {p}")]
    BadMass {
        /// Degree of the offending atom.
        d: u32,
        /// Threshold of the offending atom.
        theta: u32,
        /// The offending mass.
        p: f64,
    },
    /// The same `(d, theta)` pair appears more than once.
    #[error("duplicate atom (d={d}, theta={theta})")]
    DuplicateAtom {
        /// Degree of the duplicated atom.
        d: u32,
        /// Threshold of the duplicated atom.
        theta: u32,
    },
    /// Masses do not sum to 1 within [`MASS_SUM_TOL`].
    #[error("masses sum to {sum:.17} instead of 1")]
    MassSum {
        /// The actual sum.
        sum: f64,
    },
    /// All positive mass sits on degree-0 nodes, so no graph structure
    /// exists: `sum_theta p(0, theta) >= 1`.
    #[error("isolated-node mass sum_theta p(0, theta) = {sum} >= 1")]
    IsolatedMass {
        /// Total mass on degree-0 atoms.
        sum: f64,
    },
}

fn render_violations(violations: &[Violation]) -> String {
    let mut out = String::new();
    for (i, v) in violations.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{v}");
    }
    out
}

/// Errors from distribution construction and realization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    /// The atom list violates one or more invariants.
    #[error("invalid distribution: {}", render_violations(violations))]
    Invalid {
        /// Every violated invariant, in detection order.
        violations: Vec<Violation>,
    },
    /// The mean degree is zero (all mass on degree-0 nodes).
    #[error("degenerate degree law: mean degree is 0")]
    DegenerateDegreeLaw,
    /// Bootstrap preset seed fraction outside the open interval (0, 1).
    #[error("seed fraction alpha = {alpha} must lie strictly inside (0, 1)")]
    AlphaOutOfRange {
        /// The offending value.
        alpha: f64,
    },
    /// Bootstrap preset threshold must be at least 1.
    #[error("bootstrap threshold must be >= 1, got {theta}")]
    ThresholdOutOfRange {
        /// The offending threshold.
        theta: u32,
    },
    /// k-core preset requires k >= 1.
    #[error("k-core order must be >= 1, got {k}")]
    KOutOfRange {
        /// The offending order.
        k: u32,
    },
    /// Degree and threshold lists of a node sequence differ in length.
    #[error("degree list has {degrees} entries but threshold list has {thresholds}")]
    LengthMismatch {
        /// Number of degrees supplied.
        degrees: usize,
        /// Number of thresholds supplied.
        thresholds: usize,
    },
    /// A hand-built node sequence has an odd degree sum.
    #[error("degree sum {sum} is odd: half-edges cannot be paired")]
    OddDegreeSum {
        /// The offending sum.
        sum: u64,
    },
    /// A distribution file failed to parse.
    #[error("distribution file: {0}")]
    Parse(String),
}

/// A validated joint degree/threshold law with finite support.
///
/// Atoms are stored sorted by `(d, theta)`; all constructors validate, so a
/// value of this type always satisfies the invariants checked by
/// [`validate`][Self::validate].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DegreeThresholdDistribution {
    atoms: Vec<Atom>,
}

impl DegreeThresholdDistribution {
    /// Validates and canonicalizes an atom list into a distribution.
    pub fn new(mut atoms: Vec<Atom>) -> Result<Self, DistError> {
        let violations = Self::validate(&atoms);
        if !violations.is_empty() {
            return Err(DistError::Invalid { violations });
        }
        atoms.sort_by_key(|a| (a.d, a.theta));
        Ok(Self { atoms })
    }

    /// Checks every invariant of a candidate atom list, returning all
    /// violations (empty means valid).
    ///
    /// Checked invariants: non-empty list; each mass finite and strictly
    /// positive; `(d, theta)` pairs distinct; masses sum to 1 within
    /// [`MASS_SUM_TOL`]; some positive mass on degree >= 1 nodes
    /// (equivalently `sum_theta p(0, theta) < 1`, the non-degeneracy
    /// requirement).
    #[must_use]
    pub fn validate(atoms: &[Atom]) -> Vec<Violation> {
        let mut violations = Vec::new();
        if atoms.is_empty() {
            violations.push(Violation::Empty);
            return violations;
        }
        for a in atoms {
            if !(a.p.is_finite() && a.p > 0.0) {
                violations.push(Violation::BadMass {
                    d: a.d,
                    theta: a.theta,
                    p: a.p,
                });
            }
        }
        let mut keys: Vec<(u32, u32)> = atoms.iter().map(|a| (a.d, a.theta)).collect();
        keys.sort_unstable();
        for w in keys.windows(2) {
            if w[0] == w[1] {
                violations.push(Violation::DuplicateAtom {
                    d: w[0].0,
                    theta: w[0].1,
                });
            }
        }
        let sum: f64 = atoms.iter().map(|a| a.p).sum();
        // A NaN sum (possible when a mass is NaN) must also count as a
        // mass-sum violation, so spell the NaN case out.
        if (sum - 1.0).abs() > MASS_SUM_TOL || sum.is_nan() {
            violations.push(Violation::MassSum { sum });
        }
        // Degeneracy guard: without positive mass on some degree >= 1 atom
        // there are no half-edges at all (and the mean degree is 0).
        if !atoms.iter().any(|a| a.d >= 1 && a.p > 0.0) {
            let isolated: f64 = atoms.iter().filter(|a| a.d == 0).map(|a| a.p).sum();
            violations.push(Violation::IsolatedMass { sum: isolated });
        }
        violations
    }

    /// Parses the distribution file format: a JSON array of
    /// `{"d": int, "theta": int, "p": float}` objects (unknown keys rejected).
    pub fn from_json_str(text: &str) -> Result<Self, DistError> {
        let atoms: Vec<Atom> =
            serde_json::from_str(text).map_err(|e| DistError::Parse(e.to_string()))?;
        Self::new(atoms)
    }

    /// The atoms, sorted by `(d, theta)`.
    #[must_use]
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Mean degree `lambda = sum d * p(d, theta)`.
    ///
    /// Errors with [`DistError::DegenerateDegreeLaw`] when the mean is zero;
    /// this cannot happen for a validated distribution and exists to guard
    /// callers that compute on raw atom lists.
    pub fn mean_degree(&self) -> Result<f64, DistError> {
        let lambda: f64 = self.atoms.iter().map(|a| f64::from(a.d) * a.p).sum();
        if lambda > 0.0 {
            Ok(lambda)
        } else {
            Err(DistError::DegenerateDegreeLaw)
        }
    }

    /// Largest degree with positive mass.
    #[must_use]
    pub fn max_degree(&self) -> u32 {
        self.atoms.iter().map(|a| a.d).max().unwrap_or(0)
    }

    /// Total seed mass `sum_d p(d, 0)`.
    #[must_use]
    pub fn seed_fraction(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.theta == 0)
            .map(|a| a.p)
            .sum()
    }

    /// Deterministic largest-remainder apportionment of `n` nodes.
    ///
    /// Atom `(d, theta)` receives `floor(n * p)` nodes plus at most one
    /// remainder node (largest fractional parts first, ties broken by
    /// `(d, theta)` order), so every count is within 1 of `n * p`. Nodes are
    /// emitted grouped by atom in `(d, theta)` order.
    #[must_use]
    pub fn realize_rounded(&self, n: usize) -> NodeSequence {
        let counts = self.apportion(n);
        let mut degrees = Vec::with_capacity(n);
        let mut thresholds = Vec::with_capacity(n);
        for (atom, count) in self.atoms.iter().zip(&counts) {
            for _ in 0..*count {
                degrees.push(atom.d);
                thresholds.push(atom.theta);
            }
        }
        NodeSequence::with_parity_repair(degrees, thresholds)
    }

    /// Largest-remainder apportionment counts, aligned with [`Self::atoms`].
    ///
    /// Exposed for property checks; `realize_rounded` is the intended entry
    /// point.
    #[must_use]
    pub fn apportion(&self, n: usize) -> Vec<usize> {
        let mut counts: Vec<usize> = Vec::with_capacity(self.atoms.len());
        let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(self.atoms.len());
        let mut assigned = 0usize;
        for (i, a) in self.atoms.iter().enumerate() {
            let ideal = n as f64 * a.p;
            let floor = ideal.floor() as usize;
            counts.push(floor);
            assigned += floor;
            remainders.push((ideal - floor as f64, i));
        }
        // Distribute the leftover to the largest remainders; stable sort
        // keeps the (d, theta) atom order as the tie-break.
        let leftover = n.saturating_sub(assigned);
        remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("remainders are finite"));
        for &(_, i) in remainders.iter().take(leftover) {
            counts[i] += 1;
        }
        // Floor arithmetic guarantees leftover <= #atoms; top up the first
        // atom if float rounding in the ideals ever leaves a shortfall.
        let mut total: usize = counts.iter().sum();
        while total < n {
            counts[0] += 1;
            total += 1;
        }
        counts
    }

    /// Draws `n` nodes i.i.d. from the law with the pinned generator.
    #[must_use]
    pub fn realize_sampled(&self, n: usize, seed: u64) -> NodeSequence {
        let mut rng = crate::seed::rng_from(seed);
        // Cumulative masses; the final entry is forced to 1 so rounding in
        // the partial sums cannot leave an unreachable sliver at the top.
        let mut cdf = Vec::with_capacity(self.atoms.len());
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.p;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        let mut degrees = Vec::with_capacity(n);
        let mut thresholds = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
            degrees.push(self.atoms[idx].d);
            thresholds.push(self.atoms[idx].theta);
        }
        NodeSequence::with_parity_repair(degrees, thresholds)
    }
}

/// Bootstrap-percolation preset: fraction `alpha` of nodes seeded uniformly
/// at random (threshold 0), the rest given constant threshold `theta_const`.
///
/// `degree_dist` is the marginal degree law as `(d, q(d))` pairs; the result
/// has atoms `(d, 0, alpha * q(d))` and `(d, theta_const, (1 - alpha) * q(d))`.
pub fn preset_bootstrap(
    degree_dist: &[(u32, f64)],
    theta_const: u32,
    alpha: f64,
) -> Result<DegreeThresholdDistribution, DistError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DistError::AlphaOutOfRange { alpha });
    }
    if theta_const == 0 {
        return Err(DistError::ThresholdOutOfRange { theta: theta_const });
    }
    let mut atoms = Vec::with_capacity(2 * degree_dist.len());
    for &(d, q) in degree_dist {
        atoms.push(Atom {
            d,
            theta: 0,
            p: alpha * q,
        });
        atoms.push(Atom {
            d,
            theta: theta_const,
            p: (1.0 - alpha) * q,
        });
    }
    DegreeThresholdDistribution::new(atoms)
}

/// k-core preset: every degree atom `d` gets threshold `max(d - k, 0)`.
///
/// Nodes of degree at most `k` become seeds under this mapping; the cascade
/// then mirrors the peeling that exposes the k-core.
pub fn preset_kcore(
    degree_dist: &[(u32, f64)],
    k: u32,
) -> Result<DegreeThresholdDistribution, DistError> {
    if k == 0 {
        return Err(DistError::KOutOfRange { k });
    }
    let atoms = degree_dist
        .iter()
        .map(|&(d, q)| Atom {
            d,
            theta: d.saturating_sub(k),
            p: q,
        })
        .collect();
    DegreeThresholdDistribution::new(atoms)
}

/// A concrete sequence of `n` nodes with degrees and thresholds.
///
/// The degree sum is always even (constructors repair or reject), so the
/// half-edges can be paired into a multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSequence {
    degrees: Vec<u32>,
    thresholds: Vec<u32>,
    parity_adjusted: Option<usize>,
}

impl NodeSequence {
    /// Builds a sequence from explicit lists, rejecting unequal lengths and
    /// odd degree sums (no silent repair for hand-built input).
    pub fn new(degrees: Vec<u32>, thresholds: Vec<u32>) -> Result<Self, DistError> {
        if degrees.len() != thresholds.len() {
            return Err(DistError::LengthMismatch {
                degrees: degrees.len(),
                thresholds: thresholds.len(),
            });
        }
        let sum: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
        if !sum.is_multiple_of(2) {
            return Err(DistError::OddDegreeSum { sum });
        }
        Ok(Self {
            degrees,
            thresholds,
            parity_adjusted: None,
        })
    }

    /// Builds a sequence, repairing an odd degree sum by incrementing the
    /// degree of the last node holding the maximal degree.
    ///
    /// The repair changes exactly one degree by exactly one, vanishes in
    /// every n -> infinity limit, and is recorded in
    /// [`parity_adjusted`][Self::parity_adjusted].
    #[must_use]
    pub fn with_parity_repair(mut degrees: Vec<u32>, thresholds: Vec<u32>) -> Self {
        assert_eq!(
            degrees.len(),
            thresholds.len(),
            "degree and threshold lists must align"
        );
        let sum: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
        let mut parity_adjusted = None;
        if !sum.is_multiple_of(2) {
            let max_d = degrees
                .iter()
                .copied()
                .max()
                .expect("odd sum implies nodes");
            let idx = degrees
                .iter()
                .rposition(|&d| d == max_d)
                .expect("max exists");
            degrees[idx] += 1;
            parity_adjusted = Some(idx);
        }
        Self {
            degrees,
            thresholds,
            parity_adjusted,
        }
    }

    /// Number of nodes.
    #[must_use]
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Per-node degrees.
    #[must_use]
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Per-node thresholds.
    #[must_use]
    pub fn thresholds(&self) -> &[u32] {
        &self.thresholds
    }

    /// Index of the node whose degree was bumped to repair parity, if any.
    #[must_use]
    pub fn parity_adjusted(&self) -> Option<usize> {
        self.parity_adjusted
    }

    /// Tallies the realized `(d, theta)` counts `u_n(d, theta)`.
    ///
    /// Counts reflect the sequence exactly, including the parity repair, so
    /// empirical curves built from them match the simulated graph.
    #[must_use]
    pub fn counts(&self) -> EmpiricalCounts {
        let mut counts = BTreeMap::new();
        for (&d, &theta) in self.degrees.iter().zip(&self.thresholds) {
            *counts.entry((d, theta)).or_insert(0usize) += 1;
        }
        EmpiricalCounts { counts }
    }
}

/// Realized counts `u_n(d, theta)` of a node sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    counts: BTreeMap<(u32, u32), usize>,
}

impl EmpiricalCounts {
    /// The count table, keyed by `(d, theta)` in sorted order.
    #[must_use]
    pub fn table(&self) -> &BTreeMap<(u32, u32), usize> {
        &self.counts
    }

    /// Total number of nodes.
    #[must_use]
    pub fn n(&self) -> usize {
        self.counts.values().sum()
    }
}
