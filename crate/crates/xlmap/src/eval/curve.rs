//! Learning curves over nested corpus splits.
//!
//! The training corpus is split into prefixes of doubling size; for every
//! (system, size) a dictionary is built from the prefix, a map is learned,
//! and sentence translation retrieval is evaluated on a held-out test set.
//! Splits are prefixes of each other, so curves are comparable point to
//! point.

use std::io::Write;

use crate::align::{align_corpus, train_ibm1};
use crate::dict::{
    build_contextual_dictionary, build_sentence_dictionary, extract_prob_pairs,
    pairs_to_dictionary, DictionaryKind, MappingDictionary, WordPairList,
};
use crate::error::{Error, Result};
use crate::io::{count_frequencies, EmbeddingTable, ParallelCorpus, TokenEmbeddingCorpus};
use crate::mapping::{learn_mapping, MappingPolicy};
use crate::matrix::DenseMatrix;
use crate::procrustes::MappingLevel;
use crate::sentence::{embed_corpus, sif_weights, CorpusSource, SifWeights};

use super::retrieval::retrieval_accuracy;

/// How sentences are turned into vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbedScheme {
    /// Unweighted mean of static word vectors.
    StaticArithmetic,
    /// Inverse-frequency weighted mean of static word vectors.
    StaticSif { a: f64 },
    /// Arithmetic mean of per-token contextual vectors.
    TokenArithmetic,
}

/// How a system builds its mapping dictionary from a training split.
#[derive(Debug, Clone)]
pub enum DictRoute {
    /// A fixed seed dictionary; does not grow with the split.
    Static(WordPairList),
    /// Word pairs extracted from alignment probabilities trained on the
    /// split.
    Prob {
        iterations: usize,
        diagonal_tension: Option<f64>,
    },
    /// Contextual token pairs from one-to-one alignment links on the split.
    Contextual {
        iterations: usize,
        diagonal_tension: Option<f64>,
        cap: usize,
    },
    /// Paired sentence embeddings of the split.
    Sentence { scheme: EmbedScheme },
}

impl DictRoute {
    fn level(&self) -> MappingLevel {
        match self {
            DictRoute::Static(_) | DictRoute::Prob { .. } => MappingLevel::Word,
            DictRoute::Contextual { .. } => MappingLevel::Contextual,
            DictRoute::Sentence { .. } => MappingLevel::Sentence,
        }
    }
}

/// One system configuration on the curve.
#[derive(Debug, Clone)]
pub struct CurveSystem {
    pub name: String,
    pub route: DictRoute,
    /// How test sentences are embedded for retrieval.
    pub eval_scheme: EmbedScheme,
}

/// All the material a curve run may need. Token corpora and static tables
/// are optional; a system whose route or scheme needs a missing input fails
/// with `InvalidParameter`.
pub struct CurveInputs<'a> {
    pub train_text: &'a ParallelCorpus,
    pub train_src_tokens: Option<&'a TokenEmbeddingCorpus>,
    pub train_tgt_tokens: Option<&'a TokenEmbeddingCorpus>,
    pub src_table: Option<&'a EmbeddingTable>,
    pub tgt_table: Option<&'a EmbeddingTable>,
    pub test_text: &'a ParallelCorpus,
    pub test_src_tokens: Option<&'a TokenEmbeddingCorpus>,
    pub test_tgt_tokens: Option<&'a TokenEmbeddingCorpus>,
}

#[derive(Debug, Clone)]
pub struct CurveRow {
    pub split_size: usize,
    /// Retrieval accuracy per system, in input order.
    pub values: Vec<f64>,
}

/// Doubling sizes `100 * 2^i` up to the corpus size.
pub fn default_curve_sizes(corpus_size: usize) -> Vec<usize> {
    if corpus_size == 0 {
        return Vec::new();
    }
    if corpus_size < 100 {
        return vec![corpus_size];
    }
    let mut sizes = Vec::new();
    let mut size = 100usize;
    while size <= corpus_size {
        sizes.push(size);
        size *= 2;
    }
    sizes
}

/// Embed both sides of a parallel corpus and keep only the sentence pairs
/// embeddable on both sides. Returns the paired matrices and the original
/// indices of the retained pairs.
#[allow(clippy::too_many_arguments)]
pub fn embed_aligned_pairs(
    scheme: &EmbedScheme,
    text: &ParallelCorpus,
    src_tokens: Option<&TokenEmbeddingCorpus>,
    tgt_tokens: Option<&TokenEmbeddingCorpus>,
    src_table: Option<&EmbeddingTable>,
    tgt_table: Option<&EmbeddingTable>,
    src_sif: Option<&SifWeights>,
    tgt_sif: Option<&SifWeights>,
) -> Result<(DenseMatrix, DenseMatrix, Vec<usize>)> {
    let n = text.len();
    let embed_side = |is_source: bool| -> Result<(DenseMatrix, Vec<usize>)> {
        let sentences = if is_source { text.source() } else { text.target() };
        match scheme {
            EmbedScheme::StaticArithmetic | EmbedScheme::StaticSif { .. } => {
                let table = if is_source { src_table } else { tgt_table };
                let table = table.ok_or_else(|| Error::InvalidParameter {
                    detail: "embedding scheme needs static vector tables".into(),
                })?;
                let weights = match scheme {
                    EmbedScheme::StaticSif { .. } => {
                        if is_source {
                            src_sif
                        } else {
                            tgt_sif
                        }
                    }
                    _ => None,
                };
                embed_corpus(CorpusSource::Static {
                    sentences,
                    table,
                    weights,
                })
            }
            EmbedScheme::TokenArithmetic => {
                let tokens = if is_source { src_tokens } else { tgt_tokens };
                let tokens = tokens.ok_or_else(|| Error::InvalidParameter {
                    detail: "embedding scheme needs token embedding dumps".into(),
                })?;
                if tokens.len() != n {
                    return Err(Error::LineCountMismatch {
                        source_lines: n,
                        target_lines: tokens.len(),
                    });
                }
                embed_corpus(CorpusSource::Contextual { corpus: tokens })
            }
        }
    };
    let (src_emb, src_dropped) = embed_side(true)?;
    let (tgt_emb, tgt_dropped) = embed_side(false)?;

    // Columns of each matrix correspond to the retained sentence indices.
    let keep = |dropped: &[usize]| -> Vec<usize> {
        let mut flags = vec![true; n];
        for &i in dropped {
            flags[i] = false;
        }
        (0..n).filter(|&i| flags[i]).collect()
    };
    let src_kept = keep(&src_dropped);
    let tgt_kept = keep(&tgt_dropped);
    let both: Vec<usize> = src_kept
        .iter()
        .copied()
        .filter(|i| tgt_kept.binary_search(i).is_ok())
        .collect();
    let select = |m: &DenseMatrix, kept: &[usize]| -> DenseMatrix {
        let col_of: std::collections::HashMap<usize, usize> =
            kept.iter().enumerate().map(|(c, &i)| (i, c)).collect();
        let cols: Vec<Vec<f64>> = both.iter().map(|i| m.column(col_of[i])).collect();
        DenseMatrix::from_columns(m.rows(), cols.iter().map(|c| c.as_slice()))
            .expect("uniform dimension")
    };
    Ok((
        select(&src_emb, &src_kept),
        select(&tgt_emb, &tgt_kept),
        both,
    ))
}

fn build_dictionary(
    route: &DictRoute,
    split: &ParallelCorpus,
    split_src_tokens: Option<&TokenEmbeddingCorpus>,
    split_tgt_tokens: Option<&TokenEmbeddingCorpus>,
    inputs: &CurveInputs,
    src_sif: Option<&SifWeights>,
    tgt_sif: Option<&SifWeights>,
) -> Result<MappingDictionary> {
    let need_tables = || -> Result<(&EmbeddingTable, &EmbeddingTable)> {
        match (inputs.src_table, inputs.tgt_table) {
            (Some(s), Some(t)) => Ok((s, t)),
            _ => Err(Error::InvalidParameter {
                detail: "dictionary route needs static vector tables".into(),
            }),
        }
    };
    match route {
        DictRoute::Static(pairs) => {
            let (src, tgt) = need_tables()?;
            let (dict, _) = pairs_to_dictionary(pairs, src, tgt, DictionaryKind::StaticDict)?;
            Ok(dict)
        }
        DictRoute::Prob {
            iterations,
            diagonal_tension,
        } => {
            let (src, tgt) = need_tables()?;
            let run = train_ibm1(split, *iterations, *diagonal_tension)?;
            let pairs = extract_prob_pairs(&run.table);
            let (dict, _) = pairs_to_dictionary(&pairs, src, tgt, DictionaryKind::ProbDict)?;
            Ok(dict)
        }
        DictRoute::Contextual {
            iterations,
            diagonal_tension,
            cap,
        } => {
            let (src_toks, tgt_toks) = match (split_src_tokens, split_tgt_tokens) {
                (Some(s), Some(t)) => (s, t),
                _ => {
                    return Err(Error::InvalidParameter {
                        detail: "contextual route needs token embedding dumps".into(),
                    })
                }
            };
            let run = train_ibm1(split, *iterations, *diagonal_tension)?;
            let links = align_corpus(&run.table, split);
            let (dict, _) = build_contextual_dictionary(src_toks, tgt_toks, &links, *cap)?;
            Ok(dict)
        }
        DictRoute::Sentence { scheme } => {
            let (src_emb, tgt_emb, _) = embed_aligned_pairs(
                scheme,
                split,
                split_src_tokens,
                split_tgt_tokens,
                inputs.src_table,
                inputs.tgt_table,
                src_sif,
                tgt_sif,
            )?;
            build_sentence_dictionary(src_emb, tgt_emb)
        }
    }
}

/// Run the doubling-split protocol: for every size (a prefix of the training
/// corpus) and every system, build dictionary, learn map, and score
/// retrieval on the held-out test set.
pub fn learning_curve(
    inputs: &CurveInputs,
    systems: &[CurveSystem],
    sizes: &[usize],
) -> Result<Vec<CurveRow>> {
    if systems.is_empty() || sizes.is_empty() {
        return Err(Error::InvalidParameter {
            detail: "need at least one system and one split size".into(),
        });
    }
    for w in sizes.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter {
                detail: format!("split sizes must be strictly increasing, got {sizes:?}"),
            });
        }
    }
    let corpus_size = inputs.train_text.len();
    if let Some(&max) = sizes.last() {
        if max > corpus_size {
            return Err(Error::SizeExceedsCorpus {
                size: max,
                corpus: corpus_size,
            });
        }
    }
    for (tokens, label) in [
        (inputs.train_src_tokens, "source"),
        (inputs.train_tgt_tokens, "target"),
    ] {
        if let Some(t) = tokens {
            if t.len() != corpus_size {
                return Err(Error::LineCountMismatch {
                    source_lines: corpus_size,
                    target_lines: t.len(),
                });
            }
            let _ = label;
        }
    }

    // Inverse-frequency weights come from the full training corpus sides (a
    // stand-in for monolingual counts), so test embeddings are fixed across
    // split sizes.
    let needs_sif = systems.iter().any(|s| {
        matches!(s.eval_scheme, EmbedScheme::StaticSif { .. })
            || matches!(
                &s.route,
                DictRoute::Sentence {
                    scheme: EmbedScheme::StaticSif { .. }
                }
            )
    });
    let (src_sif, tgt_sif) = if needs_sif {
        let a = systems
            .iter()
            .find_map(|s| match (&s.eval_scheme, &s.route) {
                (EmbedScheme::StaticSif { a }, _) => Some(*a),
                (
                    _,
                    DictRoute::Sentence {
                        scheme: EmbedScheme::StaticSif { a },
                    },
                ) => Some(*a),
                _ => None,
            })
            .expect("needs_sif implies a SIF scheme exists");
        let src_freqs = count_frequencies(inputs.train_text.source())?;
        let tgt_freqs = count_frequencies(inputs.train_text.target())?;
        (
            Some(sif_weights(&src_freqs, a)?),
            Some(sif_weights(&tgt_freqs, a)?),
        )
    } else {
        (None, None)
    };

    // Test-set embeddings are independent of the split; compute once per
    // system.
    let mut test_pairs: Vec<(DenseMatrix, DenseMatrix)> = Vec::with_capacity(systems.len());
    for system in systems {
        let (src_emb, tgt_emb, _) = embed_aligned_pairs(
            &system.eval_scheme,
            inputs.test_text,
            inputs.test_src_tokens,
            inputs.test_tgt_tokens,
            inputs.src_table,
            inputs.tgt_table,
            src_sif.as_ref(),
            tgt_sif.as_ref(),
        )?;
        test_pairs.push((src_emb, tgt_emb));
    }

    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let split = inputs.train_text.prefix(size);
        let split_src_tokens = inputs.train_src_tokens.map(|t| t.prefix(size));
        let split_tgt_tokens = inputs.train_tgt_tokens.map(|t| t.prefix(size));
        let mut values = Vec::with_capacity(systems.len());
        for (system, (test_src, test_tgt)) in systems.iter().zip(&test_pairs) {
            let dict = build_dictionary(
                &system.route,
                &split,
                split_src_tokens.as_ref(),
                split_tgt_tokens.as_ref(),
                inputs,
                src_sif.as_ref(),
                tgt_sif.as_ref(),
            )?;
            let map = learn_mapping(&dict, &MappingPolicy::for_level(system.route.level()))?;
            let mapped = map.apply(test_src)?;
            let report = retrieval_accuracy(&mapped, test_tgt)?;
            values.push(report.accuracy);
        }
        rows.push(CurveRow {
            split_size: size,
            values,
        });
    }
    Ok(rows)
}

/// TSV export: header `size` plus one column per system, one row per split.
pub fn save_curve_tsv<W: Write>(
    rows: &[CurveRow],
    system_names: &[String],
    writer: &mut W,
) -> Result<()> {
    write!(writer, "size")?;
    for name in system_names {
        write!(writer, "\t{name}")?;
    }
    writeln!(writer)?;
    for row in rows {
        write!(writer, "{}", row.split_size)?;
        for v in &row.values {
            write!(writer, "\t{v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
