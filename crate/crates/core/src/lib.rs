//! Weighted collaboration networks from research-funding tables.
//!
//! The pipeline reads project, participation and topic tables, apportions
//! each organisation's contribution over calendar years, projects the yearly
//! organisation × project matrices onto weighted organisation networks, and
//! analyses them: centrality, community detection with solution-space
//! exploration and consensus, and tracking of communities across years.
//!
//! Graph and community code is generic over the edge-weight scalar (`f32` or
//! `f64`, see [`Weight`]); the aliases below fix it to `f64`.

pub mod centrality;
pub mod community;
pub mod graph;
pub mod ingest;
pub mod scalar;
pub mod solution_space;
pub mod temporal;

pub use scalar::Weight;

/// Yearly organisation network with `f64` weights.
pub type CollabGraph = graph::Graph<f64>;
/// Yearly organisation network with `f32` weights.
pub type CollabGraph32 = graph::Graph<f32>;
/// Yearly organisation × project effort matrix in kEUR.
pub type WeightMatrix = ingest::YearlyWeights<f64>;
/// One row of the centrality table.
pub type CentralityRow = centrality::CentralityRecord<f64>;
