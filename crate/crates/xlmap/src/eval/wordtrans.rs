//! Word translation precision at k: does any gold translation of a source
//! word appear among its k nearest target-vocabulary neighbors?

use std::collections::HashMap;

use crate::dict::WordPairList;
use crate::error::{Error, Result};
use crate::io::EmbeddingTable;

#[derive(Debug, Clone)]
pub struct PrecisionReport {
    pub k: usize,
    pub precision: f64,
    pub correct: usize,
    /// Source words actually scored.
    pub evaluated: usize,
    /// Source words skipped because they, or all their gold translations,
    /// were out of vocabulary.
    pub skipped_oov: usize,
}

/// Evaluate precision@k of `mapped_src` (already transformed into the target
/// space) against the whole target vocabulary. The gold standard may list
/// several valid translations per source word; any hit counts.
pub fn word_translation_precision(
    mapped_src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    gold: &WordPairList,
    k: usize,
) -> Result<PrecisionReport> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    if k == 0 {
        return Err(Error::InvalidParameter {
            detail: "k must be >= 1".into(),
        });
    }
    if mapped_src.dim() != tgt.dim() {
        return Err(Error::DimMismatch {
            source_dim: mapped_src.dim(),
            target_dim: tgt.dim(),
        });
    }

    // Group gold translations by source word, preserving first-seen order.
    let mut order: Vec<&str> = Vec::new();
    let mut translations: HashMap<&str, Vec<&str>> = HashMap::new();
    for (s, t) in gold.iter() {
        translations
            .entry(s.as_str())
            .or_insert_with(|| {
                order.push(s.as_str());
                Vec::new()
            })
            .push(t.as_str());
    }

    let norm = |v: &[f64]| -> f64 { v.iter().map(|x| x * x).sum::<f64>().sqrt() };
    let tgt_norms: Vec<f64> = (0..tgt.len()).map(|j| norm(tgt.vector(j))).collect();

    let mut evaluated = 0usize;
    let mut correct = 0usize;
    let mut skipped = 0usize;
    for source in order {
        let Some(query) = mapped_src.lookup(source) else {
            skipped += 1;
            continue;
        };
        let gold_ids: Vec<usize> = translations[source]
            .iter()
            .filter_map(|t| tgt.ordinal(t))
            .collect();
        if gold_ids.is_empty() {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        let qn = norm(query);
        if qn == 0.0 {
            continue; // cosine undefined; scored wrong
        }
        let mut scores: Vec<(f64, usize)> = Vec::with_capacity(tgt.len());
        for j in 0..tgt.len() {
            if tgt_norms[j] == 0.0 {
                continue;
            }
            let cand = tgt.vector(j);
            let dot: f64 = query.iter().zip(cand).map(|(a, b)| a * b).sum();
            scores.push((dot / (qn * tgt_norms[j]), j));
        }
        // Descending score, ascending ordinal on ties.
        scores.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let hit = scores
            .iter()
            .take(k)
            .any(|(_, j)| gold_ids.contains(j));
        if hit {
            correct += 1;
        }
    }
    if evaluated == 0 {
        return Err(Error::EmptyGold);
    }
    Ok(PrecisionReport {
        k,
        precision: correct as f64 / evaluated as f64,
        correct,
        evaluated,
        skipped_oov: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn table(entries: &[(&str, Vec<f64>)], space: &str) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(entries[0].1.len(), space);
        for (tok, v) in entries {
            t.push(*tok, v.clone()).unwrap();
        }
        t
    }

    fn random_table(prefix: &str, n: usize, d: usize, rng: &mut impl Rng) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(d, "rand");
        for i in 0..n {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            t.push(format!("{prefix}{i}"), v).unwrap();
        }
        t
    }

    #[test]
    fn identity_gold_on_identical_tables_is_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let t = random_table("w", 30, 6, &mut rng);
        let gold = WordPairList::from_pairs((0..30).map(|i| (format!("w{i}"), format!("w{i}"))));
        let report = word_translation_precision(&t, &t, &gold, 1).unwrap();
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.evaluated, 30);
        assert_eq!(report.skipped_oov, 0);
    }

    #[test]
    fn k_saturation_returns_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let src = random_table("s", 10, 4, &mut rng);
        let tgt = random_table("t", 5, 4, &mut rng);
        // Half the sources have an in-vocab gold target, half do not.
        let gold = WordPairList::from_pairs(
            (0..10).map(|i| (format!("s{i}"), format!("t{}", i))), // t5..t9 missing
        );
        let report = word_translation_precision(&src, &tgt, &gold, 100).unwrap();
        // All neighbors are returned, so every evaluated source scores a hit;
        // sources whose gold target is out of vocabulary are skipped.
        assert_eq!(report.evaluated, 5);
        assert_eq!(report.skipped_oov, 5);
        assert_eq!(report.precision, 1.0);
    }

    #[test]
    fn multiple_gold_targets_any_hit_counts() {
        let src = table(&[("q", vec![1.0, 0.0])], "s");
        let tgt = table(
            &[
                ("far", vec![0.0, 1.0]),
                ("near", vec![0.9, 0.1]),
            ],
            "t",
        );
        let gold = WordPairList::from_pairs([("q", "far"), ("q", "near")]);
        let report = word_translation_precision(&src, &tgt, &gold, 1).unwrap();
        assert_eq!(report.evaluated, 1);
        assert_eq!(report.precision, 1.0);
    }

    #[test]
    fn source_oov_skipped() {
        let src = table(&[("known", vec![1.0])], "s");
        let tgt = table(&[("x", vec![1.0])], "t");
        let gold = WordPairList::from_pairs([("known", "x"), ("missing", "x")]);
        let report = word_translation_precision(&src, &tgt, &gold, 1).unwrap();
        assert_eq!(report.evaluated, 1);
        assert_eq!(report.skipped_oov, 1);
    }

    #[test]
    fn empty_gold_rejected() {
        let t = table(&[("a", vec![1.0])], "s");
        let gold = WordPairList::from_pairs(Vec::<(String, String)>::new());
        assert!(matches!(
            word_translation_precision(&t, &t, &gold, 1),
            Err(Error::EmptyGold)
        ));
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let d = 6;
        let vocab = 200;
        let tgt = random_table("w", vocab, d, &mut rng);
        // Mapped source: the same words, perturbed, so precision is
        // nontrivial at k=1 and k=5.
        let mut src = EmbeddingTable::new(d, "s");
        for i in 0..vocab {
            let base = tgt.vector(i);
            let v: Vec<f64> = base
                .iter()
                .map(|x| x + 0.4 * rng.gen_range(-1.0..1.0))
                .collect();
            src.push(format!("w{i}"), v).unwrap();
        }
        let gold = WordPairList::from_pairs((0..vocab).map(|i| (format!("w{i}"), format!("w{i}"))));

        for k in [1, 5] {
            let report = word_translation_precision(&src, &tgt, &gold, k).unwrap();
            // Independent oracle: full sort of cosines per query.
            let mut oracle_hits = 0;
            for i in 0..vocab {
                let q = src.vector(i);
                let qn: f64 = q.iter().map(|x| x * x).sum::<f64>().sqrt();
                let mut scored: Vec<(f64, usize)> = (0..vocab)
                    .map(|j| {
                        let c = tgt.vector(j);
                        let cn: f64 = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let dot: f64 = q.iter().zip(c).map(|(a, b)| a * b).sum();
                        (dot / (qn * cn), j)
                    })
                    .collect();
                scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                if scored.iter().take(k).any(|&(_, j)| j == i) {
                    oracle_hits += 1;
                }
            }
            assert_eq!(report.correct, oracle_hits, "k={k}");
        }
    }
}
