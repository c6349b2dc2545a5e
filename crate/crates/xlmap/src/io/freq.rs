//! Token occurrence counts, the input to inverse-frequency weighting.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Relative frequency `count(w)/total`; 0 for unseen tokens.
    pub fn probability(&self, token: &str) -> f64 {
        self.count(token) as f64 / self.total as f64
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }
}

/// Exact occurrence counts over a tokenized corpus.
pub fn count_frequencies(sentences: &[Vec<String>]) -> Result<FrequencyTable> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for sentence in sentences {
        for token in sentence {
            *counts.entry(token.clone()).or_insert(0) += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(FrequencyTable { counts, total })
}

/// TSV export `token<TAB>count`, sorted by token for stable output.
pub fn save_frequencies<W: Write>(table: &FrequencyTable, writer: &mut W) -> Result<()> {
    let mut entries: Vec<(&String, &u64)> = table.counts.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    for (token, count) in entries {
        writeln!(writer, "{token}\t{count}")?;
    }
    Ok(())
}
