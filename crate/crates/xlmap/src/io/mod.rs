//! On-disk formats and the container types they load into.
//!
//! All formats are line-oriented UTF-8 text. Floats are written with
//! shortest-round-trip formatting, so save followed by load reproduces every
//! vector bit for bit. Loaders fail on the first malformed record with an
//! error carrying the 1-based line number.

mod freq;
mod parallel;
mod tokens;
mod vectors;

pub use freq::{count_frequencies, save_frequencies, FrequencyTable};
pub use parallel::{load_parallel, save_sentences, ParallelCorpus};
pub use tokens::{load_token_embeddings, save_token_embeddings, TokenEmbeddingCorpus, TokenEntry};
pub use vectors::{load_word_vectors, save_word_vectors, EmbeddingTable};

pub(crate) fn parse_float(field: &str, line: usize) -> crate::error::Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(crate::error::Error::NonFiniteValue { line }),
    }
}
