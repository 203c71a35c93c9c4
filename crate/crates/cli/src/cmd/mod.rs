pub mod dims;
pub mod embed;
pub mod eval;
pub mod ingest;
pub mod rank;

use clap::Args as ClapArgs;
use tube2vec::forest::{ForestConfig, MaxFeatures};

/// Forest settings shared by the subcommands that train one.
#[derive(Debug, Clone, ClapArgs)]
pub struct ForestArgs {
    /// Trees per forest.
    #[arg(long, default_value_t = ForestConfig::default().n_trees)]
    pub trees: usize,
    /// Maximum tree depth (unlimited when absent).
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Fewest samples per leaf.
    #[arg(long, default_value_t = ForestConfig::default().min_leaf)]
    pub min_leaf: usize,
    /// Features tried per split (square root of the total when absent).
    #[arg(long)]
    pub max_features: Option<usize>,
}

impl ForestArgs {
    pub fn config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            max_features: self
                .max_features
                .map_or(MaxFeatures::Sqrt, MaxFeatures::Count),
            seed,
            ..ForestConfig::default()
        }
    }
}
