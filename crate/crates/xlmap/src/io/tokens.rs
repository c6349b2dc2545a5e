//! Per-token contextual embedding dumps.
//!
//! Format: a header line `<dim>`, then one block per sentence. A block starts
//! with `#S <sentence_index> <token_count>` and is followed by `token_count`
//! lines of `<token> <f1> ... <f_dim>`. Blocks appear in ascending sentence
//! order with no gaps, starting at 0.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TokenEntry {
    pub token: String,
    pub vector: Vec<f64>,
}

/// A corpus of sentences where every token carries its own context-dependent
/// vector. Sentence order matches the underlying text corpus line order.
#[derive(Debug, Clone)]
pub struct TokenEmbeddingCorpus {
    dim: usize,
    space_id: String,
    sentences: Vec<Vec<TokenEntry>>,
}

impl TokenEmbeddingCorpus {
    pub fn new(
        dim: usize,
        space_id: impl Into<String>,
        sentences: Vec<Vec<TokenEntry>>,
    ) -> Self {
        debug_assert!(sentences
            .iter()
            .all(|s| s.iter().all(|t| t.vector.len() == dim)));
        TokenEmbeddingCorpus {
            dim,
            space_id: space_id.into(),
            sentences,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn space_id(&self) -> &str {
        &self.space_id
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, index: usize) -> &[TokenEntry] {
        &self.sentences[index]
    }

    pub fn sentences(&self) -> &[Vec<TokenEntry>] {
        &self.sentences
    }

    /// The first `n` sentences, for nested corpus splits.
    pub fn prefix(&self, n: usize) -> TokenEmbeddingCorpus {
        TokenEmbeddingCorpus {
            dim: self.dim,
            space_id: self.space_id.clone(),
            sentences: self.sentences[..n].to_vec(),
        }
    }
}

pub fn load_token_embeddings<R: BufRead>(
    reader: R,
    space_id: impl Into<String>,
) -> Result<TokenEmbeddingCorpus> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => {
            return Err(Error::BadHeader {
                detail: "empty stream".into(),
            })
        }
    };
    let dim: usize = header
        .trim()
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::BadHeader {
            detail: format!("expected '<dim>', got {header:?}"),
        })?;

    let mut sentences: Vec<Vec<TokenEntry>> = Vec::new();
    let mut line_no = 1usize;
    loop {
        let block_line = match lines.next() {
            Some(l) => {
                line_no += 1;
                l?
            }
            None => break,
        };
        if block_line.trim().is_empty() {
            continue;
        }
        let mut parts = block_line.split_whitespace();
        if parts.next() != Some("#S") {
            return Err(Error::MalformedLine {
                line: line_no,
                detail: format!("expected '#S <index> <count>', got {block_line:?}"),
            });
        }
        let index: usize = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::MalformedLine {
                line: line_no,
                detail: "bad sentence index".into(),
            })?;
        let count: usize = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::MalformedLine {
                line: line_no,
                detail: "bad token count".into(),
            })?;
        if index != sentences.len() {
            return Err(Error::GapInSentenceIndex {
                line: line_no,
                expected: sentences.len(),
                found: index,
            });
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            line_no += 1;
            let line = match lines.next() {
                Some(l) => l?,
                None => return Err(Error::UnexpectedEof { line: line_no }),
            };
            let mut fields = line.split_whitespace();
            let token = fields.next().ok_or_else(|| Error::MalformedLine {
                line: line_no,
                detail: "empty token line".into(),
            })?;
            let mut vector = Vec::with_capacity(dim);
            for field in fields {
                vector.push(super::parse_float(field, line_no)?);
            }
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    line: line_no,
                    expected: dim,
                    found: vector.len(),
                });
            }
            entries.push(TokenEntry {
                token: token.to_string(),
                vector,
            });
        }
        sentences.push(entries);
    }
    Ok(TokenEmbeddingCorpus {
        dim,
        space_id: space_id.into(),
        sentences,
    })
}

pub fn save_token_embeddings<W: Write>(
    corpus: &TokenEmbeddingCorpus,
    writer: &mut W,
) -> Result<()> {
    writeln!(writer, "{}", corpus.dim())?;
    for (i, sentence) in corpus.sentences().iter().enumerate() {
        writeln!(writer, "#S {} {}", i, sentence.len())?;
        for entry in sentence {
            write!(writer, "{}", entry.token)?;
            for v in &entry.vector {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
    }
    Ok(())
}
