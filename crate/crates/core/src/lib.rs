//! Channel embeddings built from three signals (where a channel is shared,
//! what its videos say, and what the platform recommends next to it) and the
//! tools to evaluate them against human judgments.

pub mod content;
pub mod dimensions;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod forest;
pub mod ingest;
pub mod ranking;
pub mod recommend;
pub mod seed;
pub mod social;
pub mod synthetic;
pub mod text;

pub use embedding::{EmbeddingTable, Provenance};
pub use error::{Error, Result};
