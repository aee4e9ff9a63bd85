//! Intent-based relationship scoring between Web pages.
//!
//! Pages are related through keyword-scoped subnetworks whose edges are
//! capacitated with HITS hub values. Three scores come out of the flow
//! computations on those subnetworks:
//!
//! * **SeekRel**: flow both pages can push to shared descendant witnesses,
//! * **FactRel**: flow shared ancestor witnesses can push to both pages,
//! * **SurfRel**: plain max flow from one page to the other.
//!
//! SimRank and PageSim are included as baselines, and [`eval`] computes
//! precision-at-r from aggregated relevance judgments.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod flow;
pub mod format;
pub mod hits;
pub mod relscore;
pub mod subnet;
pub mod webgraph;
pub mod witness;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use flow::{max_flow, CapacityMap, FlowResult};
pub use hits::{compute_hits, HitsOptions, HitsScores};
pub use relscore::{RelScores, Relation, ScoreParams, Scorer};
pub use subnet::{build_subnetwork, select_keywords, BuildOptions, KeywordSet, Subnetwork};
pub use webgraph::{Digraph, GraphView, KeywordIndex, PageId, UrlTable, WebGraph};
pub use witness::{make_fact_witness_list, make_seek_witness_list, WitnessList};
