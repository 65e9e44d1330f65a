//! Event and relation extraction over news and scholarly text, aggregated
//! into a filterable temporal and causal analysis graph with normalized
//! event popularity timelines.

pub mod app;
pub mod corpus;
pub mod data;
pub mod extraction;
pub mod month;
pub mod relations;
pub mod taxonomy;
pub mod tcag;
pub mod timeline;
pub mod vectors;
