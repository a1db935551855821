//! Random bipartite multigraphs with per-node degree distributions.
//!
//! The crate samples graphs where every left node draws its degree from its
//! own probability mass function and then picks that many uniform right
//! neighbours. On top of the sampler it provides:
//!
//! * [`matching`]: left-perfect matching with Hall-violator certificates,
//! * [`structure`]: blocked/free/half-free classification of right nodes and
//!   the partition of the non-blocked nodes into "never simultaneously
//!   unmatched" classes,
//! * [`failprob`]: the closed-form conditional failure probability for two
//!   extra left nodes, exact success probabilities, and the inequalities
//!   built on them,
//! * [`threshold`]: the matchability threshold `c*(k)` from 2-core density
//!   evolution,
//! * [`montecarlo`]: seeded, parallel failure-rate experiments,
//! * [`oracle`] and [`verify`]: brute-force reference routines and the
//!   property suites that compare the fast paths against them.

pub mod error;
pub mod failprob;
pub mod graph;
pub mod matching;
pub mod montecarlo;
pub mod oracle;
pub mod seed;
pub mod structure;
pub mod threshold;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{BipartiteMultigraph, DegreeDistribution, DegreeSpec, NearOptimalMode, SamplingMode};
pub use matching::MatchingResult;
