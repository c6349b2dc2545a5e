//! Static word vectors in the word2vec text convention: a header line
//! `<vocab_count> <dim>`, then one line per word with the token followed by
//! `dim` decimal floats, space-separated.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Vocabulary with one dense vector per token, in file order.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    space_id: String,
    vocab: Vec<String>,
    data: Vec<f64>, // vocab.len() * dim, vector-major
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, space_id: impl Into<String>) -> Self {
        EmbeddingTable {
            dim,
            space_id: space_id.into(),
            vocab: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Append a token. Returns `false` (keeping the first vector) if the
    /// token is already present.
    pub fn push(&mut self, token: impl Into<String>, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimMismatch {
                source_dim: self.dim,
                target_dim: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let token = token.into();
        if self.index.contains_key(&token) {
            return Ok(false);
        }
        self.index.insert(token.clone(), self.vocab.len());
        self.vocab.push(token);
        self.data.extend_from_slice(&vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn space_id(&self) -> &str {
        &self.space_id
    }

    pub fn set_space_id(&mut self, id: impl Into<String>) {
        self.space_id = id.into();
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.vector(i))
    }

    /// Position of a token in vocabulary (file) order.
    pub fn ordinal(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, ordinal: usize) -> &str {
        &self.vocab[ordinal]
    }

    pub fn vector(&self, ordinal: usize) -> &[f64] {
        &self.data[ordinal * self.dim..(ordinal + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), self.vector(i)))
    }

    /// All vectors as the columns of a `dim x len` matrix, in vocab order.
    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_columns(self.dim, (0..self.len()).map(|i| self.vector(i)))
            .expect("vectors have uniform dimension")
    }
}

/// Load a word2vec-text stream. Returns the table and the number of duplicate
/// tokens that were dropped (first occurrence wins).
pub fn load_word_vectors<R: BufRead>(
    reader: R,
    space_id: impl Into<String>,
) -> Result<(EmbeddingTable, usize)> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => {
            return Err(Error::BadHeader {
                detail: "empty stream".into(),
            })
        }
    };
    let mut parts = header.split_whitespace();
    let count: usize = parts
        .next()
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| Error::BadHeader {
            detail: format!("expected '<vocab_count> <dim>', got {header:?}"),
        })?;
    let dim: usize = parts
        .next()
        .and_then(|p| p.parse().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::BadHeader {
            detail: format!("expected '<vocab_count> <dim>', got {header:?}"),
        })?;
    if parts.next().is_some() {
        return Err(Error::BadHeader {
            detail: format!("trailing fields in header {header:?}"),
        });
    }

    let mut table = EmbeddingTable::new(dim, space_id);
    let mut duplicates = 0;
    let mut line_no = 1usize;
    for _ in 0..count {
        line_no += 1;
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::UnexpectedEof { line: line_no }),
        };
        let mut fields = line.split_whitespace();
        let token = fields.next().ok_or_else(|| Error::MalformedLine {
            line: line_no,
            detail: "empty line".into(),
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
        if !table.push(token, vector)? {
            duplicates += 1;
        }
    }
    for line in lines {
        line_no += 1;
        if !line?.trim().is_empty() {
            return Err(Error::TrailingData { line: line_no });
        }
    }
    Ok((table, duplicates))
}

pub fn save_word_vectors<W: Write>(table: &EmbeddingTable, writer: &mut W) -> Result<()> {
    writeln!(writer, "{} {}", table.len(), table.dim())?;
    for (token, vector) in table.iter() {
        write!(writer, "{token}")?;
        for v in vector {
            write!(writer, " {v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
