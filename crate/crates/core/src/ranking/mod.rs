//! Latent scores from pairwise judgments, rank correlations and the
//! significance tests used to compare embeddings.

mod bootstrap;
mod labels;
mod plackett_luce;
mod tau;
mod ztest;

pub use bootstrap::{tau_c_difference_ci, BootstrapCi};
pub use labels::{
    label_correlation, label_rank, parse_comparisons, parse_labels, write_comparisons,
    ComparisonRecord, LabelCorrelation, PARTISAN_LABELS,
};
pub use plackett_luce::{fit_plackett_luce, PlConfig, PlScores};
pub use tau::{kendall_tau_b, pair_counts, tau_c, PairCounts};
pub use ztest::{two_proportion_ztest, ZTest};
