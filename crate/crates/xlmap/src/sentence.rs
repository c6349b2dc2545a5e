//! Sentence embeddings by averaging word vectors.
//!
//! Static word vectors are combined by an unweighted mean or by smooth
//! inverse frequency weighting, `a / (a + p(w))`. Contextual token vectors
//! are combined by the plain arithmetic mean. Both schemes are linear in the
//! word vectors, so they commute with any orthogonal map applied per word —
//! the property that lets one transform serve both word- and sentence-level
//! use.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::io::{load_token_embeddings, EmbeddingTable, FrequencyTable, TokenEmbeddingCorpus};
use crate::matrix::DenseMatrix;
use crate::svd::thin_svd;

/// Pseudo-token used when exporting sentence embeddings in the token-dump
/// format, one block of one token per sentence.
pub const SENT_PSEUDO_TOKEN: &str = "\u{27e8}SENT\u{27e9}";

/// Smooth-inverse-frequency weights: `weight(w) = a / (a + p(w))` with
/// `p(w) = count(w)/total`. Tokens absent from the frequency table get the
/// `p = 0` limit, weight 1.
#[derive(Debug, Clone)]
pub struct SifWeights {
    a: f64,
    probs: HashMap<String, f64>,
}

impl SifWeights {
    pub fn smoothing(&self) -> f64 {
        self.a
    }

    pub fn weight(&self, token: &str) -> f64 {
        match self.probs.get(token) {
            Some(&p) => self.a / (self.a + p),
            None => 1.0,
        }
    }
}

pub fn sif_weights(freqs: &FrequencyTable, a: f64) -> Result<SifWeights> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::InvalidParameter {
            detail: format!("SIF smoothing must be > 0, got {a}"),
        });
    }
    let total = freqs.total() as f64;
    let mut probs = HashMap::new();
    for token in freqs_tokens(freqs) {
        probs.insert(token.clone(), freqs.count(&token) as f64 / total);
    }
    Ok(SifWeights { a, probs })
}

fn freqs_tokens(freqs: &FrequencyTable) -> Vec<String> {
    // FrequencyTable does not expose its map directly; rebuild the key list
    // through the export-facing iterator.
    freqs.tokens().map(str::to_string).collect()
}

/// A sentence vector plus coverage bookkeeping: how many tokens contributed
/// out of how many the sentence had.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbedding {
    pub vector: Vec<f64>,
    pub covered_tokens: usize,
    pub total_tokens: usize,
}

/// Normalized weighted mean of the given vectors. Weights must be positive.
pub(crate) fn weighted_mean(vectors: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    debug_assert_eq!(vectors.len(), weights.len());
    let dim = vectors[0].len();
    let mut acc = vec![0.0; dim];
    let mut mass = 0.0;
    for (v, &w) in vectors.iter().zip(weights) {
        for (a, &x) in acc.iter_mut().zip(*v) {
            *a += w * x;
        }
        mass += w;
    }
    for a in &mut acc {
        *a /= mass;
    }
    acc
}

/// Average the static vectors of a sentence's in-vocabulary tokens,
/// optionally SIF-weighted. Out-of-vocabulary tokens contribute nothing,
/// neither a vector nor normalizing mass.
pub fn embed_static(
    sentence: &[String],
    table: &EmbeddingTable,
    weights: Option<&SifWeights>,
) -> Result<SentenceEmbedding> {
    let mut vectors: Vec<&[f64]> = Vec::with_capacity(sentence.len());
    let mut ws: Vec<f64> = Vec::with_capacity(sentence.len());
    for token in sentence {
        if let Some(v) = table.lookup(token) {
            vectors.push(v);
            ws.push(weights.map_or(1.0, |sw| sw.weight(token)));
        }
    }
    if vectors.is_empty() {
        return Err(Error::AllTokensOov);
    }
    Ok(SentenceEmbedding {
        vector: weighted_mean(&vectors, &ws),
        covered_tokens: vectors.len(),
        total_tokens: sentence.len(),
    })
}

/// Arithmetic mean of contextual token vectors.
pub fn embed_contextual<'a, I>(sentence_vectors: I) -> Result<SentenceEmbedding>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let vectors: Vec<&[f64]> = sentence_vectors.into_iter().collect();
    if vectors.is_empty() {
        return Err(Error::EmptySentence);
    }
    let dim = vectors[0].len();
    for v in &vectors {
        if v.len() != dim {
            return Err(Error::DimMismatch {
                source_dim: dim,
                target_dim: v.len(),
            });
        }
    }
    let ws = vec![1.0; vectors.len()];
    Ok(SentenceEmbedding {
        vector: weighted_mean(&vectors, &ws),
        covered_tokens: vectors.len(),
        total_tokens: vectors.len(),
    })
}

/// What a batch embedding run reads its vectors from.
pub enum CorpusSource<'a> {
    /// Static table lookups over tokenized sentences, optionally
    /// SIF-weighted.
    Static {
        sentences: &'a [Vec<String>],
        table: &'a EmbeddingTable,
        weights: Option<&'a SifWeights>,
    },
    /// Per-token contextual vectors, averaged arithmetically.
    Contextual { corpus: &'a TokenEmbeddingCorpus },
}

/// Embed a whole corpus. Column `i` of the result is the embedding of the
/// `i`-th retained sentence; sentences that cannot be embedded are skipped
/// and their original indices returned, never aborting the batch.
pub fn embed_corpus(source: CorpusSource) -> Result<(DenseMatrix, Vec<usize>)> {
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut dropped: Vec<usize> = Vec::new();
    let dim;
    match source {
        CorpusSource::Static {
            sentences,
            table,
            weights,
        } => {
            dim = table.dim();
            for (i, sentence) in sentences.iter().enumerate() {
                match embed_static(sentence, table, weights) {
                    Ok(e) => columns.push(e.vector),
                    Err(Error::AllTokensOov) => dropped.push(i),
                    Err(e) => return Err(e),
                }
            }
        }
        CorpusSource::Contextual { corpus } => {
            dim = corpus.dim();
            for (i, sentence) in corpus.sentences().iter().enumerate() {
                match embed_contextual(sentence.iter().map(|t| t.vector.as_slice())) {
                    Ok(e) => columns.push(e.vector),
                    Err(Error::EmptySentence) => dropped.push(i),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let matrix = DenseMatrix::from_columns(dim, columns.iter().map(|c| c.as_slice()))?;
    Ok((matrix, dropped))
}

/// Subtract the first principal component of the embedding set from every
/// column (the common-component removal step of the original SIF recipe).
/// This breaks linear commutation with orthogonal maps, so mapping paths do
/// not use it; it is exposed for monolingual sentence-similarity use.
pub fn remove_principal_component(embeddings: &DenseMatrix) -> Result<DenseMatrix> {
    let gram = embeddings.mul_transpose(embeddings)?;
    let svd = thin_svd(&gram)?;
    let pc = svd.u.column(0);
    let mut out = embeddings.clone();
    for j in 0..embeddings.cols() {
        let mut proj = 0.0;
        for i in 0..embeddings.rows() {
            proj += pc[i] * embeddings.get(i, j);
        }
        for i in 0..embeddings.rows() {
            out.set(i, j, embeddings.get(i, j) - proj * pc[i]);
        }
    }
    Ok(out)
}

/// Write sentence embeddings in the token-dump block format, one
/// pseudo-token per sentence, so the same loaders can read them back.
pub fn save_sentence_embeddings<W: Write>(embeddings: &DenseMatrix, writer: &mut W) -> Result<()> {
    writeln!(writer, "{}", embeddings.rows())?;
    for j in 0..embeddings.cols() {
        writeln!(writer, "#S {j} 1")?;
        write!(writer, "{SENT_PSEUDO_TOKEN}")?;
        for i in 0..embeddings.rows() {
            write!(writer, " {}", embeddings.get(i, j))?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Read sentence embeddings written by [`save_sentence_embeddings`].
pub fn load_sentence_embeddings<R: std::io::BufRead>(reader: R) -> Result<DenseMatrix> {
    let corpus = load_token_embeddings(reader, "sentences")?;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(corpus.len());
    for (i, sentence) in corpus.sentences().iter().enumerate() {
        if sentence.len() != 1 {
            return Err(Error::MalformedLine {
                line: 0,
                detail: format!(
                    "sentence block {i} has {} tokens, expected exactly 1",
                    sentence.len()
                ),
            });
        }
        columns.push(sentence[0].vector.clone());
    }
    DenseMatrix::from_columns(corpus.dim(), columns.iter().map(|c| c.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::count_frequencies;
    use crate::procrustes::{MappingLevel, OrthogonalMap};
    use crate::synth::random_orthogonal;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sents(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|s| s.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(entries[0].1.len(), "test");
        for (tok, v) in entries {
            t.push(*tok, v.to_vec()).unwrap();
        }
        t
    }

    #[test]
    fn sif_weight_hand_values() {
        // 900 + 100 occurrences out of 1000 total.
        let mut raw = vec!["the"; 900];
        raw.extend(vec!["cat"; 100]);
        let joined = raw.join(" ");
        let freqs = count_frequencies(&sents(&[&joined])).unwrap();
        let w = sif_weights(&freqs, 1e-3).unwrap();
        assert!((w.weight("the") - 1e-3 / (1e-3 + 0.9)).abs() < 1e-12);
        assert!((w.weight("the") - 0.0011099).abs() < 1e-6);
        assert!((w.weight("cat") - 0.009901).abs() < 1e-6);
        // Unseen token: p = 0 limit.
        assert_eq!(w.weight("dog"), 1.0);
    }

    #[test]
    fn sif_weight_midpoint() {
        // p(w) = 1e-3 with a = 1e-3 gives exactly one half.
        let mut raw = vec!["x"];
        raw.extend(vec!["pad"; 999]);
        let joined = raw.join(" ");
        let freqs = count_frequencies(&sents(&[&joined])).unwrap();
        let w = sif_weights(&freqs, 1e-3).unwrap();
        assert!((w.weight("x") - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sif_rejects_bad_smoothing() {
        let freqs = count_frequencies(&sents(&["a"])).unwrap();
        assert!(matches!(
            sif_weights(&freqs, 0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            sif_weights(&freqs, -1.0),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn sif_weights_monotone_in_count() {
        let freqs = count_frequencies(&sents(&["a a a a b b c"])).unwrap();
        let w = sif_weights(&freqs, 1e-2).unwrap();
        assert!(w.weight("a") < w.weight("b"));
        assert!(w.weight("b") < w.weight("c"));
        assert!(w.weight("c") <= 1.0 && w.weight("a") > 0.0);
    }

    #[test]
    fn singleton_sentence_is_the_vector_itself() {
        let t = table(&[("only", &[1.5, -2.0])]);
        let e = embed_static(&["only".to_string()], &t, None).unwrap();
        assert_eq!(e.vector, vec![1.5, -2.0]);
        assert_eq!((e.covered_tokens, e.total_tokens), (1, 1));
    }

    #[test]
    fn equal_weights_average() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let e = embed_static(&sents(&["a b"])[0], &t, None).unwrap();
        assert_eq!(e.vector, vec![0.5, 0.5]);
    }

    #[test]
    fn sif_weighted_mean_matches_hand_computation() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[1.0, 1.0])]);
        let freqs = count_frequencies(&sents(&["a a a a b b c"])).unwrap();
        let w = sif_weights(&freqs, 1e-2).unwrap();
        let e = embed_static(&sents(&["a b c"])[0], &t, Some(&w)).unwrap();
        let (wa, wb, wc) = (w.weight("a"), w.weight("b"), w.weight("c"));
        let mass = wa + wb + wc;
        let expect = [(wa + wc) / mass, (wb + wc) / mass];
        assert!((e.vector[0] - expect[0]).abs() < 1e-12);
        assert!((e.vector[1] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn oov_tokens_are_skipped_not_zeroed() {
        let t = table(&[("a", &[2.0, 4.0])]);
        let e = embed_static(&sents(&["a oov1 oov2"])[0], &t, None).unwrap();
        assert_eq!(e.vector, vec![2.0, 4.0]);
        assert_eq!((e.covered_tokens, e.total_tokens), (1, 3));
        assert!(matches!(
            embed_static(&sents(&["oov"])[0], &t, None),
            Err(Error::AllTokensOov)
        ));
    }

    #[test]
    fn contextual_mean() {
        let one = [3.0, -1.0];
        let e = embed_contextual([&one[..]]).unwrap();
        assert_eq!(e.vector, vec![3.0, -1.0]);

        let a = [2.0, 0.0];
        let b = [0.0, 2.0];
        let e = embed_contextual([&a[..], &b[..]]).unwrap();
        assert_eq!(e.vector, vec![1.0, 1.0]);
        assert_eq!((e.covered_tokens, e.total_tokens), (2, 2));

        assert!(matches!(
            embed_contextual(std::iter::empty()),
            Err(Error::EmptySentence)
        ));
    }

    #[test]
    fn contextual_mean_matches_independent_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let vectors: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let e = embed_contextual(vectors.iter().map(|v| v.as_slice())).unwrap();
        for i in 0..6 {
            // Sum per component in reverse order.
            let mut acc = 0.0;
            for v in vectors.iter().rev() {
                acc += v[i];
            }
            assert!((e.vector[i] - acc / 50.0).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_embedding_matches_per_sentence_calls() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let corpus = sents(&["a b", "zz", "b b a"]);
        let (matrix, dropped) = embed_corpus(CorpusSource::Static {
            sentences: &corpus,
            table: &t,
            weights: None,
        })
        .unwrap();
        assert_eq!(dropped, vec![1]);
        assert_eq!(matrix.cols(), 2);
        let first = embed_static(&corpus[0], &t, None).unwrap();
        let third = embed_static(&corpus[2], &t, None).unwrap();
        assert_eq!(matrix.column(0), first.vector);
        assert_eq!(matrix.column(1), third.vector);
    }

    #[test]
    fn token_order_does_not_matter() {
        let t = table(&[("a", &[0.3, 0.7]), ("b", &[-1.0, 0.2]), ("c", &[2.0, -0.5])]);
        let freqs = count_frequencies(&sents(&["a a b c c c"])).unwrap();
        let w = sif_weights(&freqs, 1e-2).unwrap();
        let fwd = embed_static(&sents(&["a b c"])[0], &t, Some(&w)).unwrap();
        let rev = embed_static(&sents(&["c b a"])[0], &t, Some(&w)).unwrap();
        for (x, y) in fwd.vector.iter().zip(&rev.vector) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_all_weights_leaves_embedding_unchanged() {
        let vecs: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![-0.5, 0.25], vec![3.0, -1.0]];
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        let base = weighted_mean(&refs, &[0.2, 0.5, 0.9]);
        let scaled = weighted_mean(&refs, &[0.2 * 7.0, 0.5 * 7.0, 0.9 * 7.0]);
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn averaging_commutes_with_orthogonal_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 10;
        let map = OrthogonalMap::new(
            random_orthogonal(d, &mut rng),
            "src",
            "tgt",
            MappingLevel::Word,
        )
        .unwrap();

        let vocab: Vec<(String, Vec<f64>)> = (0..8)
            .map(|i| {
                (
                    format!("w{i}"),
                    (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let mut plain = EmbeddingTable::new(d, "src");
        let mut mapped = EmbeddingTable::new(d, "tgt");
        for (tok, v) in &vocab {
            plain.push(tok.clone(), v.clone()).unwrap();
            mapped
                .push(tok.clone(), map.apply_vec(v).unwrap())
                .unwrap();
        }
        let sentence = sents(&["w0 w3 w5 w7 w3"]).remove(0);
        let freqs = count_frequencies(&sents(&["w0 w0 w3 w5 w7"])).unwrap();
        let sif = sif_weights(&freqs, 1e-3).unwrap();

        for weights in [None, Some(&sif)] {
            let before = embed_static(&sentence, &plain, weights).unwrap();
            let after = embed_static(&sentence, &mapped, weights).unwrap();
            let mapped_before = map.apply_vec(&before.vector).unwrap();
            for (a, b) in mapped_before.iter().zip(&after.vector) {
                assert!((a - b).abs() <= 1e-10, "commutation violated");
            }
        }
    }

    #[test]
    fn principal_component_removal_kills_shared_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = 5;
        let shared: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm: f64 = shared.iter().map(|v| v * v).sum::<f64>().sqrt();
        let shared: Vec<f64> = shared.into_iter().map(|v| v / norm).collect();
        let cols: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let scale: f64 = rng.gen_range(5.0..10.0);
                (0..d)
                    .map(|i| scale * shared[i] + rng.gen_range(-0.01..0.01))
                    .collect()
            })
            .collect();
        let m = DenseMatrix::from_columns(d, cols.iter().map(|c| c.as_slice())).unwrap();
        let cleaned = remove_principal_component(&m).unwrap();
        for j in 0..cleaned.cols() {
            let proj: f64 = (0..d).map(|i| cleaned.get(i, j) * shared[i]).sum();
            assert!(proj.abs() < 0.05, "residual projection {proj}");
        }
    }

    #[test]
    fn sentence_embedding_export_round_trips() {
        let m = DenseMatrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, -4.0, 0.5, 0.25]).unwrap();
        let mut buf = Vec::new();
        save_sentence_embeddings(&m, &mut buf).unwrap();
        let loaded = load_sentence_embeddings(buf.as_slice()).unwrap();
        assert_eq!(loaded.data(), m.data());
    }
}
