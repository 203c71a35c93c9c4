//! Recommendation embeddings: the co-recommendation graph, biased random
//! walks over it and skip-gram training on the walks.

mod alias;
mod graph;
mod sgns;
mod walk;

pub use alias::AliasTable;
pub use graph::{
    build_rec_graph, parse_crawl_records, write_crawl_records, CrawlRecord, GraphReport,
    ParsedCrawl, RecGraph,
};
pub use sgns::{
    log_sigmoid, pair_gradient, pair_loss, sigmoid, train_sgns, Corpus, NegativeSampler,
    PairGradient, SgnsConfig, TrainReport,
};
pub use walk::{generate_walks, read_walks, walks_to_ids, write_walks, WalkConfig, Walker};

use crate::embedding::EmbeddingTable;
use crate::error::Result;

/// Walks plus skip-gram training in one call.
pub fn node2vec(
    graph: &RecGraph,
    walks: &WalkConfig,
    sgns: &SgnsConfig,
) -> Result<(EmbeddingTable, TrainReport)> {
    let walks = generate_walks(graph, walks)?;
    let corpus = Corpus::from_sequences(&walks_to_ids(graph, &walks));
    train_sgns(&corpus, sgns)
}
