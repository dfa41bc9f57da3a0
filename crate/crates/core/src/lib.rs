//! Modular knowledge-graph retrieval: subgraph extraction, path filtering and path
//! refinement over a triple store, plus evaluation and answer generation.

pub mod error;
pub mod extraction;
pub mod filtering;
pub mod generation;
pub mod kg;
pub mod metrics;
pub mod path;
pub mod pipeline;
pub mod presets;
pub mod prompts;
pub mod refinement;
pub mod scoring;
