//! Evaluation: sentence translation retrieval, word translation precision at
//! k, cross-lingual word-similarity correlation, and the doubling-split
//! learning-curve harness.

mod correlation;
mod curve;
mod retrieval;
mod wordtrans;

pub use correlation::{
    fractional_ranks, harmonic_mean, load_scored_pairs, pearson, similarity_correlation,
    spearman, CorrelationReport, ScoredPair,
};
pub use curve::{
    default_curve_sizes, embed_aligned_pairs, learning_curve, save_curve_tsv, CurveInputs,
    CurveRow, CurveSystem, DictRoute, EmbedScheme,
};
pub use retrieval::{retrieval_accuracy, RetrievalReport};
pub use wordtrans::{word_translation_precision, PrecisionReport};
