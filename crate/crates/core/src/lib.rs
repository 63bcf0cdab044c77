//! Solution-space exploration for stochastic community detection.
//!
//! A detector is run repeatedly on shuffled presentations of a graph; the
//! distinct partitions it returns form the solution space. A Beta-Binomial
//! model of "new partition" events decides when the space has stopped
//! growing, and per-solution frequency estimates place the space in one of
//! five categories: single, dominant, multiple, sparse or empty.

pub mod bayes;
pub mod cli;
pub mod detection;
pub mod error;
pub mod explorer;
pub mod graph;
pub mod partition;
pub mod plot;
pub mod report;
pub mod taxonomy;

pub use bayes::{
    beta_quantile, solution_estimates, BetaBinomialModel, PStableVariant, SolutionEstimate,
};
pub use detection::{detect, modularity, DetectorKind, DetectorSpec, Membership};
pub use error::{Error, Result};
pub use explorer::{
    explore, resume, Exploration, ExplorationConfig, SolutionRecord, SolutionSpace, StopReason,
};
pub use graph::{load_edge_list, EdgeListOptions, Graph, Seed};
pub use partition::{
    canonicalize, community_sizes, validate, CanonicalPartition, ValidityOptions, ValidityReport,
};
pub use report::SolutionSpaceReport;
pub use taxonomy::{classify, Category, TaxonomyThresholds};
