//! Pearson and Spearman correlation against human similarity judgments, and
//! their harmonic mean.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::io::EmbeddingTable;

/// Standard product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            context: "correlation inputs must have equal length",
            left_rows: xs.len(),
            left_cols: 1,
            right_rows: ys.len(),
            right_cols: 1,
        });
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPairs {
            found: xs.len(),
            needed: 2,
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Fractional ranks, 1-based; tied values share the average of their ranks.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Rank correlation: Pearson on fractional ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            context: "correlation inputs must have equal length",
            left_rows: xs.len(),
            left_cols: 1,
            right_rows: ys.len(),
            right_cols: 1,
        });
    }
    if xs.len() < 2 {
        return Err(Error::TooFewPairs {
            found: xs.len(),
            needed: 2,
        });
    }
    pearson(&fractional_ranks(xs), &fractional_ranks(ys))
}

/// A human-scored cross-lingual word pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub word_a: String,
    pub word_b: String,
    pub score: f64,
}

/// TSV loader: `word_a<TAB>word_b<TAB>score`.
pub fn load_scored_pairs<R: BufRead>(reader: R) -> Result<Vec<ScoredPair>> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::MalformedLine {
                line: idx + 1,
                detail: format!("expected 'word_a\\tword_b\\tscore', got {line:?}"),
            });
        }
        let score = fields[2]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite())
            .ok_or(Error::NonFiniteValue { line: idx + 1 })?;
        pairs.push(ScoredPair {
            word_a: fields[0].to_string(),
            word_b: fields[1].to_string(),
            score,
        });
    }
    Ok(pairs)
}

#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub pearson: f64,
    pub spearman: f64,
    /// `2pq/(p+q)`; `None` when either coefficient is nonpositive, which
    /// makes the harmonic mean undefined.
    pub harmonic_mean: Option<f64>,
    /// Scored pairs after OOV skipping.
    pub n: usize,
    pub skipped_oov: usize,
}

pub fn harmonic_mean(p: f64, q: f64) -> Option<f64> {
    if p > 0.0 && q > 0.0 {
        Some(2.0 * p * q / (p + q))
    } else {
        None
    }
}

/// Score each pair by the cosine of its two vectors (both tables already in
/// a shared space) and correlate with the human scores. Pairs with either
/// word out of vocabulary, or with a zero vector, are skipped and counted.
pub fn similarity_correlation(
    scored: &[ScoredPair],
    space_a: &EmbeddingTable,
    space_b: &EmbeddingTable,
) -> Result<CorrelationReport> {
    if space_a.dim() != space_b.dim() {
        return Err(Error::DimMismatch {
            source_dim: space_a.dim(),
            target_dim: space_b.dim(),
        });
    }
    let mut human = Vec::new();
    let mut model = Vec::new();
    let mut skipped = 0usize;
    for pair in scored {
        let (Some(a), Some(b)) = (space_a.lookup(&pair.word_a), space_b.lookup(&pair.word_b))
        else {
            skipped += 1;
            continue;
        };
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            skipped += 1;
            continue;
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        human.push(pair.score);
        model.push(dot / (na * nb));
    }
    if human.len() < 2 {
        return Err(Error::TooFewPairs {
            found: human.len(),
            needed: 2,
        });
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(&human) {
        return Err(Error::ConstantScores { side: "human" });
    }
    if constant(&model) {
        return Err(Error::ConstantScores { side: "model" });
    }
    let p = pearson(&model, &human)?;
    let s = spearman(&model, &human)?;
    Ok(CorrelationReport {
        pearson: p,
        spearman: s,
        harmonic_mean: harmonic_mean(p, s),
        n: human.len(),
        skipped_oov: skipped,
    })
}
