#![forbid(unsafe_code)]
#![warn(missing_docs)]

//! Threshold cascades on configuration-model random multigraphs.
//!
//! A node with degree `d` and integer threshold `theta` activates once more
//! than `theta` of its half-edges have been consumed by edges to active
//! neighbours; `theta = 0` nodes are the initial seeds. This crate simulates
//! that contagion two ways and computes the matching analytic limits:
//!
//! * [`dist`] - joint degree/threshold laws `p(d, theta)`, finite
//!   realizations of them, and bootstrap-percolation / k-core presets.
//! * [`cgm`] - configuration-model multigraphs built by uniform half-edge
//!   pairing, with optional simple-graph post-processing.
//! * [`cascade`] - the round-based cascade and the continuous-time
//!   balls-and-bins exploration of the same dynamics; both produce the same
//!   final active set on the same graph, exactly.
//! * [`theory`] - fluid limits: the stopping-point root `z_hat` of
//!   `phi(z) = lambda z^2 - h_B(z)`, the active-fraction curve `a_hat(t)`,
//!   and the variance `sigma2_A(t)` of the Gaussian limit of the scaled
//!   fluctuations.
//! * [`stats`] - moment estimators and a Kolmogorov-Smirnov test used to
//!   check the central limit behaviour.
//! * [`mc`] - reproducible parallel Monte Carlo trial batches.
//! * [`acceptance`] - the statistical verification suite behind the CLI
//!   `verify` subcommand and the integration tests.
//!
//! # Determinism
//!
//! Every random quantity flows from explicit 64-bit seeds through the
//! ChaCha12 generator ([`seed`]); parallel trial batches are seeded per
//! trial index, so results are identical for any worker count.
//!
//! # Example
//!
//! ```
//! use cascade_core::dist::{Atom, DegreeThresholdDistribution};
//! use cascade_core::theory::{self, QuadratureConfig};
//!
//! // 10% seeds among degree-3 nodes, the rest need 3 active neighbours.
//! let dist = DegreeThresholdDistribution::new(vec![
//!     Atom { d: 3, theta: 0, p: 0.1 },
//!     Atom { d: 3, theta: 2, p: 0.9 },
//! ])
//! .unwrap();
//! let result = theory::solve(&dist, &QuadratureConfig::default()).unwrap();
//! assert!((result.z_hat - 0.9).abs() < 1e-9);
//! assert!((result.a_hat_star - 0.1009).abs() < 1e-4);
//! ```

pub mod acceptance;
pub mod cascade;
pub mod cgm;
pub mod dist;
pub mod mc;
pub mod seed;
pub mod stats;
pub mod theory;

pub use cascade::{CascadeResult, Trajectory};
pub use cgm::Multigraph;
pub use dist::{Atom, DegreeThresholdDistribution, EmpiricalCounts, NodeSequence};
pub use mc::TrialRecord;
pub use stats::SummaryStats;
pub use theory::{QuadratureConfig, TheoryResult};
