//! Perfect matchings in dense k-uniform hypergraphs: extremal constructions,
//! random sparsification, an exact matching oracle and an iterative
//! absorption pipeline that samples well-spread perfect matchings.

pub mod combo;
pub mod construct;
pub mod error;
pub mod experiment;
pub mod hgr;
pub mod hypergraph;
pub mod matcher;
pub mod randomize;
pub mod rng;
pub mod spreadpipe;
pub mod subset;

pub use construct::{ExtremalProfile, ExtremalType, OrderedPair};
pub use error::{Error, Result};
pub use hypergraph::{Edge, Hypergraph, RegularityEstimate, VertexId};
pub use matcher::{CountOutcome, Matching, SolveBudget, SolveOutcome, SolveStats};
pub use rng::RngSeed;
pub use subset::VertexSubset;
