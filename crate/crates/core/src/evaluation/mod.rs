//! Semantic-similarity experiments: category prediction and the
//! odd-one-out triplet task.

mod category;
mod table;
mod triplets;

pub use category::{eval_category, f1_score, CategoryConfig, CategoryReport};
pub use table::{fmt_rate, ResultTable};
pub use triplets::{
    agreement_table, all_triplets, neighbors, parse_judgments, parse_triplets, predict_odd,
    sample_triplets, write_judgments, write_triplets, Agreement, Triplet, TripletJudgment,
    TripletSample, RATERS,
};
