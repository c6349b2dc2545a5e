//! Mapping dictionaries: paired column matrices whose column `i` on the
//! source side corresponds to column `i` on the target side.
//!
//! Four construction routes, mirroring the alignment schemes the evaluation
//! compares: a static seed word list, word pairs extracted from alignment
//! probabilities, contextual token pairs taken from one-to-one alignment
//! links, and paired sentence embeddings.

use std::io::{BufRead, Write};

use crate::align::{AlignmentLink, TranslationTable};
use crate::error::{Error, Result};
use crate::io::{EmbeddingTable, TokenEmbeddingCorpus};
use crate::matrix::DenseMatrix;

/// Default cap on the number of dictionary columns extracted from alignment
/// links.
pub const DEFAULT_DICTIONARY_CAP: usize = 1_000_000;

/// Where a dictionary's pairs came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictionaryKind {
    StaticDict,
    ProbDict,
    Contextual,
    Sentence,
}

impl DictionaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DictionaryKind::StaticDict => "static_dict",
            DictionaryKind::ProbDict => "prob_dict",
            DictionaryKind::Contextual => "contextual",
            DictionaryKind::Sentence => "sentence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "static_dict" => Some(DictionaryKind::StaticDict),
            "prob_dict" => Some(DictionaryKind::ProbDict),
            "contextual" => Some(DictionaryKind::Contextual),
            "sentence" => Some(DictionaryKind::Sentence),
            _ => None,
        }
    }
}

/// Paired `d x n` matrices of aligned vectors, plus provenance.
#[derive(Debug, Clone)]
pub struct MappingDictionary {
    source: DenseMatrix,
    target: DenseMatrix,
    kind: DictionaryKind,
    source_space: String,
    target_space: String,
}

impl MappingDictionary {
    pub fn new(
        source: DenseMatrix,
        target: DenseMatrix,
        kind: DictionaryKind,
    ) -> Result<Self> {
        if source.rows() != target.rows() || source.cols() != target.cols() {
            return Err(Error::ShapeMismatch {
                context: "dictionary sides must have identical shape",
                left_rows: source.rows(),
                left_cols: source.cols(),
                right_rows: target.rows(),
                right_cols: target.cols(),
            });
        }
        if source.cols() == 0 {
            return Err(Error::EmptyDictionary);
        }
        Ok(MappingDictionary {
            source,
            target,
            kind,
            source_space: String::new(),
            target_space: String::new(),
        })
    }

    pub fn with_spaces(
        mut self,
        source_space: impl Into<String>,
        target_space: impl Into<String>,
    ) -> Self {
        self.source_space = source_space.into();
        self.target_space = target_space.into();
        self
    }

    pub fn len(&self) -> usize {
        self.source.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.source.rows()
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    pub fn source(&self) -> &DenseMatrix {
        &self.source
    }

    pub fn target(&self) -> &DenseMatrix {
        &self.target
    }

    pub fn source_space(&self) -> &str {
        &self.source_space
    }

    pub fn target_space(&self) -> &str {
        &self.target_space
    }
}

/// An ordered, de-duplicated list of `(source_word, target_word)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordPairList {
    pairs: Vec<(String, String)>,
}

impl WordPairList {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for (s, t) in pairs {
            let pair = (s.into(), t.into());
            if seen.insert(pair.clone()) {
                out.push(pair);
            }
        }
        WordPairList { pairs: out }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, String)> {
        self.pairs.iter()
    }

    pub fn get(&self, i: usize) -> &(String, String) {
        &self.pairs[i]
    }
}

/// Read a word-pair file: one `source_word target_word` per line (any
/// whitespace separator). Duplicate pairs are dropped, order preserved.
/// Blank lines are ignored.
pub fn load_static_pairs<R: BufRead>(reader: R) -> Result<WordPairList> {
    let mut raw = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(t), None) => raw.push((s.to_string(), t.to_string())),
            _ => {
                return Err(Error::MalformedLine {
                    line: idx + 1,
                    detail: format!("expected 'source target', got {line:?}"),
                })
            }
        }
    }
    Ok(WordPairList::from_pairs(raw))
}

pub fn save_word_pairs<W: Write>(pairs: &WordPairList, writer: &mut W) -> Result<()> {
    for (s, t) in pairs.iter() {
        writeln!(writer, "{s}\t{t}")?;
    }
    Ok(())
}

/// For every source word, emit its maximum-probability translation, but only
/// when that maximum is strictly unique. The NULL token is never a source
/// word and never a translation.
pub fn extract_prob_pairs(table: &TranslationTable) -> WordPairList {
    let mut pairs = Vec::new();
    for word in table.source_words() {
        if let Some((best, _)) = table.unique_argmax(word) {
            pairs.push((word.to_string(), best.to_string()));
        }
    }
    WordPairList { pairs }
}

/// Outcome of resolving word pairs against embedding tables.
#[derive(Debug, Clone)]
pub struct PairResolution {
    /// Indices into the input pair list that made it into the dictionary.
    pub retained: Vec<usize>,
    /// Pairs skipped because either side was out of vocabulary.
    pub skipped: usize,
}

/// Look up each pair's vectors; pairs with either token out of vocabulary are
/// skipped (and counted), column order follows the input pair order. `kind`
/// records whether the pairs came from a static seed list or from alignment
/// probabilities.
pub fn pairs_to_dictionary(
    pairs: &WordPairList,
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    kind: DictionaryKind,
) -> Result<(MappingDictionary, PairResolution)> {
    if src.dim() != tgt.dim() {
        return Err(Error::DimMismatch {
            source_dim: src.dim(),
            target_dim: tgt.dim(),
        });
    }
    let mut src_cols: Vec<&[f64]> = Vec::new();
    let mut tgt_cols: Vec<&[f64]> = Vec::new();
    let mut retained = Vec::new();
    let mut skipped = 0usize;
    for (i, (s, t)) in pairs.iter().enumerate() {
        match (src.lookup(s), tgt.lookup(t)) {
            (Some(sv), Some(tv)) => {
                src_cols.push(sv);
                tgt_cols.push(tv);
                retained.push(i);
            }
            _ => skipped += 1,
        }
    }
    if src_cols.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let dict = MappingDictionary::new(
        DenseMatrix::from_columns(src.dim(), src_cols)?,
        DenseMatrix::from_columns(tgt.dim(), tgt_cols)?,
        kind,
    )?
    .with_spaces(src.space_id(), tgt.space_id());
    Ok((dict, PairResolution { retained, skipped }))
}

/// Build a dictionary of aligned contextual token vectors.
///
/// Only one-to-one links survive: a link is kept when its source position and
/// its target position each participate in exactly one link of their
/// sentence, which excludes phrasal alignments. Retained pairs are taken in
/// corpus order (sentence, then target position) up to `cap` columns.
pub fn build_contextual_dictionary(
    src_corpus: &TokenEmbeddingCorpus,
    tgt_corpus: &TokenEmbeddingCorpus,
    links: &[AlignmentLink],
    cap: usize,
) -> Result<(MappingDictionary, Vec<AlignmentLink>)> {
    if src_corpus.dim() != tgt_corpus.dim() {
        return Err(Error::DimMismatch {
            source_dim: src_corpus.dim(),
            target_dim: tgt_corpus.dim(),
        });
    }
    let sentences = src_corpus.len().min(tgt_corpus.len());
    let mut ordered: Vec<AlignmentLink> = links.to_vec();
    ordered.sort_by_key(|l| (l.sentence_index, l.target_pos, l.source_pos));

    // Per-sentence link multiplicity of each endpoint.
    use std::collections::HashMap;
    let mut src_uses: HashMap<(usize, usize), usize> = HashMap::new();
    let mut tgt_uses: HashMap<(usize, usize), usize> = HashMap::new();
    for link in &ordered {
        if link.sentence_index >= sentences {
            return Err(Error::SentenceIndexOutOfRange {
                index: link.sentence_index,
                len: sentences,
            });
        }
        if link.source_pos >= src_corpus.sentence(link.sentence_index).len() {
            return Err(Error::SentenceIndexOutOfRange {
                index: link.source_pos,
                len: src_corpus.sentence(link.sentence_index).len(),
            });
        }
        if link.target_pos >= tgt_corpus.sentence(link.sentence_index).len() {
            return Err(Error::SentenceIndexOutOfRange {
                index: link.target_pos,
                len: tgt_corpus.sentence(link.sentence_index).len(),
            });
        }
        *src_uses
            .entry((link.sentence_index, link.source_pos))
            .or_insert(0) += 1;
        *tgt_uses
            .entry((link.sentence_index, link.target_pos))
            .or_insert(0) += 1;
    }

    let mut retained = Vec::new();
    let mut src_cols: Vec<&[f64]> = Vec::new();
    let mut tgt_cols: Vec<&[f64]> = Vec::new();
    for link in &ordered {
        if retained.len() == cap {
            break;
        }
        if src_uses[&(link.sentence_index, link.source_pos)] != 1
            || tgt_uses[&(link.sentence_index, link.target_pos)] != 1
        {
            continue;
        }
        src_cols.push(&src_corpus.sentence(link.sentence_index)[link.source_pos].vector);
        tgt_cols.push(&tgt_corpus.sentence(link.sentence_index)[link.target_pos].vector);
        retained.push(*link);
    }
    if retained.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let dict = MappingDictionary::new(
        DenseMatrix::from_columns(src_corpus.dim(), src_cols)?,
        DenseMatrix::from_columns(tgt_corpus.dim(), tgt_cols)?,
        DictionaryKind::Contextual,
    )?
    .with_spaces(src_corpus.space_id(), tgt_corpus.space_id());
    Ok((dict, retained))
}

/// Wrap paired sentence-embedding matrices as a dictionary.
pub fn build_sentence_dictionary(
    src_embeddings: DenseMatrix,
    tgt_embeddings: DenseMatrix,
) -> Result<MappingDictionary> {
    MappingDictionary::new(src_embeddings, tgt_embeddings, DictionaryKind::Sentence)
}

// ── dictionary file format ──────────────────────────────────────────
//
// Header of five `key: value` lines (dim, pairs, provenance, source,
// target), then one line per pair holding the source column followed by the
// target column, 2*dim floats.

pub fn save_mapping_dictionary<W: Write>(dict: &MappingDictionary, writer: &mut W) -> Result<()> {
    writeln!(writer, "dim: {}", dict.dim())?;
    writeln!(writer, "pairs: {}", dict.len())?;
    writeln!(writer, "provenance: {}", dict.kind().as_str())?;
    writeln!(writer, "source: {}", dict.source_space())?;
    writeln!(writer, "target: {}", dict.target_space())?;
    for j in 0..dict.len() {
        let mut first = true;
        for m in [&dict.source, &dict.target] {
            for i in 0..dict.dim() {
                if !first {
                    write!(writer, " ")?;
                }
                write!(writer, "{}", m.get(i, j))?;
                first = false;
            }
        }
        writeln!(writer)?;
    }
    Ok(())
}

pub fn load_mapping_dictionary<R: BufRead>(reader: R) -> Result<MappingDictionary> {
    let mut lines = reader.lines();
    let mut header = |key: &str, line_no: usize| -> Result<String> {
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::UnexpectedEof { line: line_no }),
        };
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(": ").or(rest.strip_prefix(":")))
            .map(|v| v.to_string())
            .ok_or_else(|| Error::BadHeader {
                detail: format!("expected '{key}: ...', got {line:?}"),
            })
    };
    let dim: usize = header("dim", 1)?.trim().parse().map_err(|_| Error::BadHeader {
        detail: "bad dim".into(),
    })?;
    let pairs: usize = header("pairs", 2)?
        .trim()
        .parse()
        .map_err(|_| Error::BadHeader {
            detail: "bad pair count".into(),
        })?;
    let kind = DictionaryKind::parse(header("provenance", 3)?.trim()).ok_or_else(|| {
        Error::BadHeader {
            detail: "unknown provenance".into(),
        }
    })?;
    let source_space = header("source", 4)?.trim().to_string();
    let target_space = header("target", 5)?.trim().to_string();

    let mut src = DenseMatrix::zeros(dim, pairs);
    let mut tgt = DenseMatrix::zeros(dim, pairs);
    let mut line_no = 5usize;
    for j in 0..pairs {
        line_no += 1;
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::UnexpectedEof { line: line_no }),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 * dim {
            return Err(Error::DimensionMismatch {
                line: line_no,
                expected: 2 * dim,
                found: fields.len(),
            });
        }
        for i in 0..dim {
            src.set(i, j, crate::io::parse_float(fields[i], line_no)?);
            tgt.set(i, j, crate::io::parse_float(fields[dim + i], line_no)?);
        }
    }
    Ok(MappingDictionary::new(src, tgt, kind)?.with_spaces(source_space, target_space))
}
