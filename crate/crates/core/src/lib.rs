//! Beam search for the multiple longest common subsequence (M-LCS) problem.
//!
//! The crate is layered bottom-up:
//!
//! * [`prob`]: `p(k, n)`, the probability that a uniform random string of
//!   length `n` contains a given subsequence of length `k`, evaluated by a
//!   recurrence table and three closed forms that check each other.
//! * [`instance`]: strings, next-occurrence and suffix-count tables, search
//!   nodes and the `ub`/`μ`/`var` statistics of a node's remainders.
//! * [`heuristics`]: node scores: minimum remaining length, the probability
//!   product with three `k` rules, and GCoV.
//! * [`beam`]: beam search and the two-heuristic hyper-heuristic.
//! * [`oracle`]: exact LCS for two or three strings and brute force for tiny
//!   inputs, used as referees.
//! * [`dataset`]: plain/FASTA loaders and seeded generators.
//!
//! ```
//! use mlcs_core::{beam_search, BeamConfig, HeuristicKind, Instance};
//!
//! let inst = Instance::new(b"ABC", &["BCABAABC", "CAACBBAA"]).unwrap();
//! let report = beam_search(&inst, &BeamConfig::with_heuristic(HeuristicKind::ProbKAnalyticUncorr)).unwrap();
//! assert!(report.verified);
//! assert!(report.length <= 7);
//! ```

#![forbid(unsafe_code)]

pub mod beam;
pub mod dataset;
pub mod heuristics;
pub mod instance;
pub mod oracle;
pub mod prob;

pub use beam::{beam_search, choose_heuristic, hyper_heuristic, verify_solution, BeamConfig, HhChoice, RunReport, SearchError, TieBreak};
pub use dataset::{DatasetDescriptor, DatasetError, Family};
pub use heuristics::{HeuristicConstants, HeuristicKind, HeuristicSpec, KRule, Score};
pub use instance::{Instance, InstanceError, NodeArena, NodeState};
