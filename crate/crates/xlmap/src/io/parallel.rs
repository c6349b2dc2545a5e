//! Line-aligned parallel corpora: two UTF-8 text files, one pre-tokenized
//! sentence per line, tokens separated by whitespace. The toolkit performs no
//! tokenization or case normalization of its own.

use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCorpus {
    source: Vec<Vec<String>>,
    target: Vec<Vec<String>>,
}

impl ParallelCorpus {
    /// Build from already-tokenized sides. Both sides must have the same
    /// number of sentences and no empty sentences.
    pub fn new(source: Vec<Vec<String>>, target: Vec<Vec<String>>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::LineCountMismatch {
                source_lines: source.len(),
                target_lines: target.len(),
            });
        }
        if source.iter().any(|s| s.is_empty()) || target.iter().any(|s| s.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        Ok(ParallelCorpus { source, target })
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn source(&self) -> &[Vec<String>] {
        &self.source
    }

    pub fn target(&self) -> &[Vec<String>] {
        &self.target
    }

    pub fn pair(&self, i: usize) -> (&[String], &[String]) {
        (&self.source[i], &self.target[i])
    }

    /// The first `n` sentence pairs, for nested corpus splits.
    pub fn prefix(&self, n: usize) -> ParallelCorpus {
        ParallelCorpus {
            source: self.source[..n].to_vec(),
            target: self.target[..n].to_vec(),
        }
    }
}

/// Write one side of a corpus as plain text, tokens separated by single
/// spaces.
pub fn save_sentences<W: std::io::Write>(
    sentences: &[Vec<String>],
    writer: &mut W,
) -> Result<()> {
    for sentence in sentences {
        writeln!(writer, "{}", sentence.join(" "))?;
    }
    Ok(())
}

/// Load two line-aligned text streams. Pairs where either side tokenizes to
/// nothing are dropped; the second return value counts them.
pub fn load_parallel<R1: BufRead, R2: BufRead>(
    src: R1,
    tgt: R2,
) -> Result<(ParallelCorpus, usize)> {
    let src_lines: Vec<String> = src.lines().collect::<std::io::Result<_>>()?;
    let tgt_lines: Vec<String> = tgt.lines().collect::<std::io::Result<_>>()?;
    if src_lines.len() != tgt_lines.len() {
        return Err(Error::LineCountMismatch {
            source_lines: src_lines.len(),
            target_lines: tgt_lines.len(),
        });
    }
    let mut source = Vec::with_capacity(src_lines.len());
    let mut target = Vec::with_capacity(tgt_lines.len());
    let mut dropped = 0usize;
    for (s, t) in src_lines.iter().zip(&tgt_lines) {
        let s_toks: Vec<String> = s.split_whitespace().map(str::to_string).collect();
        let t_toks: Vec<String> = t.split_whitespace().map(str::to_string).collect();
        if s_toks.is_empty() || t_toks.is_empty() {
            dropped += 1;
            continue;
        }
        source.push(s_toks);
        target.push(t_toks);
    }
    Ok((ParallelCorpus { source, target }, dropped))
}
