//! Sentence translation retrieval: for every source-side embedding, find the
//! nearest target-side embedding by cosine similarity and check that it is
//! the aligned one.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone)]
pub struct RetrievalReport {
    pub source_space: String,
    pub target_space: String,
    /// Evaluated pairs.
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Sentences the upstream pipeline could not embed (set by the caller;
    /// retrieval itself only sees embedded pairs).
    pub dropped: usize,
    /// Queries whose own vector or whose true target was all-zero; these
    /// cannot win a cosine comparison and count as wrong.
    pub zero_vectors: usize,
}

impl RetrievalReport {
    pub fn with_spaces(mut self, source: impl Into<String>, target: impl Into<String>) -> Self {
        self.source_space = source.into();
        self.target_space = target.into();
        self
    }

    pub fn with_dropped(mut self, dropped: usize) -> Self {
        self.dropped = dropped;
        self
    }
}

/// Column `i` of `src` (already mapped into the target or pivot space) is the
/// translation of column `i` of `tgt`. A query is correct when the argmax
/// over cosine similarity lands on its own index; ties break toward the
/// smallest index, so a tie involving the true index and a smaller one counts
/// as wrong.
pub fn retrieval_accuracy(src: &DenseMatrix, tgt: &DenseMatrix) -> Result<RetrievalReport> {
    if src.rows() != tgt.rows() || src.cols() != tgt.cols() {
        return Err(Error::ShapeMismatch {
            context: "retrieval sides must have identical shape",
            left_rows: src.rows(),
            left_cols: src.cols(),
            right_rows: tgt.rows(),
            right_cols: tgt.cols(),
        });
    }
    let n = src.cols();
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    let d = src.rows();
    let src_cols: Vec<Vec<f64>> = (0..n).map(|j| src.column(j)).collect();
    let tgt_cols: Vec<Vec<f64>> = (0..n).map(|j| tgt.column(j)).collect();
    let norm = |v: &[f64]| -> f64 { v.iter().map(|x| x * x).sum::<f64>().sqrt() };
    let src_norms: Vec<f64> = src_cols.iter().map(|c| norm(c)).collect();
    let tgt_norms: Vec<f64> = tgt_cols.iter().map(|c| norm(c)).collect();

    let mut correct = 0usize;
    let mut zero_vectors = 0usize;
    for i in 0..n {
        if src_norms[i] == 0.0 || tgt_norms[i] == 0.0 {
            zero_vectors += 1;
            continue; // cannot be retrieved correctly
        }
        let query = &src_cols[i];
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if tgt_norms[j] == 0.0 {
                continue;
            }
            let mut dot = 0.0;
            let cand = &tgt_cols[j];
            for k in 0..d {
                dot += query[k] * cand[k];
            }
            let cos = dot / (src_norms[i] * tgt_norms[j]);
            if best.map_or(true, |(_, b)| cos > b) {
                best = Some((j, cos));
            }
        }
        if best.map(|(j, _)| j) == Some(i) {
            correct += 1;
        }
    }
    Ok(RetrievalReport {
        source_space: String::new(),
        target_space: String::new(),
        n,
        correct,
        accuracy: correct as f64 / n as f64,
        dropped: 0,
        zero_vectors,
    })
}
