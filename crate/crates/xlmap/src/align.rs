//! Lexical word alignment trained with EM (IBM Model 1), with an optional
//! fixed-strength diagonal position prior.
//!
//! The model conditions target tokens on source tokens: `t(f|e)` is the
//! probability that source word `e` translates to target word `f`. A special
//! NULL conditioning token with position-independent weight absorbs target
//! tokens that align to nothing. Everything is computed sequentially in a
//! fixed order, so training is bitwise-reproducible.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::io::ParallelCorpus;

/// Reserved conditioning token for unaligned target words. Not a valid
/// corpus token.
pub const NULL_TOKEN: &str = "<NULL>";

/// Probability floor applied when reading the table during the E-step.
const PROB_FLOOR: f64 = 1e-12;

/// Lexical translation probabilities `t(f|e)`. For every conditioning token
/// `e` the stored probabilities over `f` sum to 1.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    source_vocab: Vec<String>, // index 0 is NULL_TOKEN
    target_vocab: Vec<String>,
    source_index: HashMap<String, u32>,
    target_index: HashMap<String, u32>,
    probs: Vec<HashMap<u32, f64>>, // per source id
}

impl TranslationTable {
    /// `t(f|e)`; 0 for pairs never observed together.
    pub fn probability(&self, source: &str, target: &str) -> f64 {
        let (Some(&e), Some(&f)) = (self.source_index.get(source), self.target_index.get(target))
        else {
            return 0.0;
        };
        self.probs[e as usize].get(&f).copied().unwrap_or(0.0)
    }

    /// Source-language words (the conditioning side), excluding NULL, in
    /// first-occurrence order.
    pub fn source_words(&self) -> impl Iterator<Item = &str> {
        self.source_vocab.iter().skip(1).map(String::as_str)
    }

    pub fn target_words(&self) -> impl Iterator<Item = &str> {
        self.target_vocab.iter().map(String::as_str)
    }

    pub fn source_vocab_size(&self) -> usize {
        self.source_vocab.len() - 1
    }

    pub fn target_vocab_size(&self) -> usize {
        self.target_vocab.len()
    }

    /// The target word with the strictly largest `t(.|source)`, or `None`
    /// when the source is unknown or the maximum is not unique.
    pub fn unique_argmax(&self, source: &str) -> Option<(&str, f64)> {
        let &e = self.source_index.get(source)?;
        let dist = &self.probs[e as usize];
        let mut best: Option<(u32, f64)> = None;
        let mut tied = false;
        for (&f, &p) in dist {
            match best {
                None => best = Some((f, p)),
                Some((bf, bp)) => {
                    if p > bp {
                        best = Some((f, p));
                        tied = false;
                    } else if p == bp {
                        tied = true;
                        // Keep the smaller id so the reported pair is stable;
                        // the tie flag suppresses emission anyway.
                        if f < bf {
                            best = Some((f, p));
                        }
                    }
                }
            }
        }
        let (f, p) = best?;
        if tied {
            None
        } else {
            Some((self.target_vocab[f as usize].as_str(), p))
        }
    }

    /// Build a table directly from `(source, target, prob)` entries.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let mut table = TranslationTable {
            source_vocab: vec![NULL_TOKEN.to_string()],
            target_vocab: Vec::new(),
            source_index: HashMap::from([(NULL_TOKEN.to_string(), 0)]),
            target_index: HashMap::new(),
            probs: vec![HashMap::new()],
        };
        for (s, t, p) in entries {
            let e = intern(&mut table.source_vocab, &mut table.source_index, s.into());
            if e as usize >= table.probs.len() {
                table.probs.resize(e as usize + 1, HashMap::new());
            }
            let f = intern(&mut table.target_vocab, &mut table.target_index, t.into());
            table.probs[e as usize].insert(f, p);
        }
        table
    }

}

fn intern(vocab: &mut Vec<String>, index: &mut HashMap<String, u32>, token: String) -> u32 {
    if let Some(&id) = index.get(&token) {
        return id;
    }
    let id = vocab.len() as u32;
    index.insert(token.clone(), id);
    vocab.push(token);
    id
}

/// One alignment decision: target position `target_pos` of sentence
/// `sentence_index` aligns to source position `source_pos`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignmentLink {
    pub sentence_index: usize,
    pub source_pos: usize,
    pub target_pos: usize,
}

/// Outcome of EM training: the table plus the data log-likelihood observed at
/// the start of each iteration (under the parameters being refined).
#[derive(Debug)]
pub struct TrainingRun {
    pub table: TranslationTable,
    pub log_likelihoods: Vec<f64>,
}

/// Train IBM Model 1 for `iterations` EM rounds from a uniform
/// initialization. With `diagonal_tension` = λ > 0, expected counts are
/// reweighted by `exp(-λ * |i/I - j/J|)` (1-based positions); the NULL token
/// keeps a constant weight of 1.
pub fn train_ibm1(
    corpus: &ParallelCorpus,
    iterations: usize,
    diagonal_tension: Option<f64>,
) -> Result<TrainingRun> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter {
            detail: "iterations must be >= 1".into(),
        });
    }
    let lambda = diagonal_tension.unwrap_or(0.0);
    if lambda < 0.0 {
        return Err(Error::InvalidParameter {
            detail: "diagonal tension must be >= 0".into(),
        });
    }

    // Intern tokens. Source id 0 is NULL.
    let mut source_vocab = vec![NULL_TOKEN.to_string()];
    let mut source_index = HashMap::from([(NULL_TOKEN.to_string(), 0u32)]);
    let mut target_vocab: Vec<String> = Vec::new();
    let mut target_index: HashMap<String, u32> = HashMap::new();
    let sentences: Vec<(Vec<u32>, Vec<u32>)> = (0..corpus.len())
        .map(|i| {
            let (s, t) = corpus.pair(i);
            (
                s.iter()
                    .map(|w| intern(&mut source_vocab, &mut source_index, w.clone()))
                    .collect(),
                t.iter()
                    .map(|w| intern(&mut target_vocab, &mut target_index, w.clone()))
                    .collect(),
            )
        })
        .collect();

    // Uniform initialization over co-occurring pairs.
    let uniform = 1.0 / target_vocab.len() as f64;
    let mut probs: Vec<HashMap<u32, f64>> = vec![HashMap::new(); source_vocab.len()];
    for (src, tgt) in &sentences {
        for &f in tgt {
            probs[0].insert(f, uniform);
            for &e in src {
                probs[e as usize].insert(f, uniform);
            }
        }
    }

    let weight = |i: usize, src_len: usize, j: usize, tgt_len: usize| -> f64 {
        if lambda == 0.0 || i == 0 {
            1.0
        } else {
            let rel_src = i as f64 / src_len as f64;
            let rel_tgt = (j + 1) as f64 / tgt_len as f64;
            (-lambda * (rel_src - rel_tgt).abs()).exp()
        }
    };

    let mut log_likelihoods = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let mut counts: Vec<HashMap<u32, f64>> = vec![HashMap::new(); source_vocab.len()];
        let mut totals: Vec<f64> = vec![0.0; source_vocab.len()];
        let mut ll = 0.0;
        for (src, tgt) in &sentences {
            let src_len = src.len();
            let tgt_len = tgt.len();
            for (j, &f) in tgt.iter().enumerate() {
                // Candidate 0 is NULL; candidate i >= 1 is src[i-1].
                let mut denom = 0.0;
                let mut weight_sum = 0.0;
                for i in 0..=src_len {
                    let e = if i == 0 { 0 } else { src[i - 1] };
                    let w = weight(i, src_len, j, tgt_len);
                    let t = probs[e as usize]
                        .get(&f)
                        .copied()
                        .unwrap_or(0.0)
                        .max(PROB_FLOOR);
                    denom += w * t;
                    weight_sum += w;
                }
                ll += (denom / weight_sum).ln();
                for i in 0..=src_len {
                    let e = if i == 0 { 0 } else { src[i - 1] };
                    let w = weight(i, src_len, j, tgt_len);
                    let t = probs[e as usize]
                        .get(&f)
                        .copied()
                        .unwrap_or(0.0)
                        .max(PROB_FLOOR);
                    let posterior = w * t / denom;
                    *counts[e as usize].entry(f).or_insert(0.0) += posterior;
                    totals[e as usize] += posterior;
                }
            }
        }
        log_likelihoods.push(ll);
        for (e, dist) in counts.iter().enumerate() {
            let total = totals[e];
            if total == 0.0 {
                continue;
            }
            let updated: HashMap<u32, f64> =
                dist.iter().map(|(&f, &c)| (f, c / total)).collect();
            probs[e] = updated;
        }
    }

    Ok(TrainingRun {
        table: TranslationTable {
            source_vocab,
            target_vocab,
            source_index,
            target_index,
            probs,
        },
        log_likelihoods,
    })
}

/// Decode argmax alignment links. For each target position the best source
/// position under `t(f|e)` is linked; ties go to the smallest source
/// position, a strictly better NULL suppresses the link, and target tokens
/// with no probability mass at all produce no link.
pub fn align_corpus(table: &TranslationTable, corpus: &ParallelCorpus) -> Vec<AlignmentLink> {
    let mut links = Vec::new();
    for idx in 0..corpus.len() {
        let (src, tgt) = corpus.pair(idx);
        for (j, f) in tgt.iter().enumerate() {
            let null_score = table.probability(NULL_TOKEN, f);
            let mut best: Option<(usize, f64)> = None;
            for (i, e) in src.iter().enumerate() {
                let score = table.probability(e, f);
                if score > 0.0 && best.map_or(true, |(_, b)| score > b) {
                    best = Some((i, score));
                }
            }
            if let Some((i, score)) = best {
                if score >= null_score {
                    links.push(AlignmentLink {
                        sentence_index: idx,
                        source_pos: i,
                        target_pos: j,
                    });
                }
            }
        }
    }
    links
}

/// Write links in Pharaoh format: one line per sentence pair, `i-j` pairs
/// (0-based source-target positions) separated by single spaces, ordered by
/// target position.
pub fn save_pharaoh<W: Write>(
    links: &[AlignmentLink],
    sentence_count: usize,
    writer: &mut W,
) -> Result<()> {
    let mut per_sentence: Vec<Vec<(usize, usize)>> = vec![Vec::new(); sentence_count];
    for link in links {
        if link.sentence_index >= sentence_count {
            return Err(Error::SentenceIndexOutOfRange {
                index: link.sentence_index,
                len: sentence_count,
            });
        }
        per_sentence[link.sentence_index].push((link.target_pos, link.source_pos));
    }
    for line in &mut per_sentence {
        line.sort_unstable();
        let mut first = true;
        for (j, i) in line.iter() {
            if !first {
                write!(writer, " ")?;
            }
            write!(writer, "{i}-{j}")?;
            first = false;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Read Pharaoh-format links. Line `k` holds the links of sentence `k`.
pub fn load_pharaoh<R: BufRead>(reader: R) -> Result<Vec<AlignmentLink>> {
    let mut links = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        for piece in line.split_whitespace() {
            let (i, j) = piece
                .split_once('-')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| Error::MalformedLine {
                    line: idx + 1,
                    detail: format!("expected 'i-j', got {piece:?}"),
                })?;
            links.push(AlignmentLink {
                sentence_index: idx,
                source_pos: i,
                target_pos: j,
            });
        }
    }
    Ok(links)
}

/// TSV export `e<TAB>f<TAB>prob`, sorted by source token, then descending
/// probability, then target token.
pub fn save_translation_table<W: Write>(table: &TranslationTable, writer: &mut W) -> Result<()> {
    let mut sources: Vec<&String> = table.source_vocab.iter().collect();
    sources.sort();
    for e in sources {
        let eid = table.source_index[e.as_str()];
        let mut rows: Vec<(&str, f64)> = table.probs[eid as usize]
            .iter()
            .map(|(&f, &p)| (table.target_vocab[f as usize].as_str(), p))
            .collect();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        for (f, p) in rows {
            writeln!(writer, "{e}\t{f}\t{p}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(pairs: &[(&str, &str)]) -> ParallelCorpus {
        let source = pairs
            .iter()
            .map(|(s, _)| s.split_whitespace().map(str::to_string).collect())
            .collect();
        let target = pairs
            .iter()
            .map(|(_, t)| t.split_whitespace().map(str::to_string).collect())
            .collect();
        ParallelCorpus::new(source, target).unwrap()
    }

    fn toy() -> ParallelCorpus {
        corpus(&[("the house", "das haus"), ("the book", "das buch")])
    }

    #[test]
    fn toy_corpus_learns_article() {
        let run = train_ibm1(&toy(), 5, None).unwrap();
        let t = &run.table;
        assert!(t.probability("the", "das") > t.probability("the", "haus"));
        assert!(t.probability("the", "das") > 0.4);
        // Second EM round gives exactly 4/7 by hand.
        let two = train_ibm1(&toy(), 2, None).unwrap();
        assert!((two.table.probability("the", "das") - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn single_pair_distributions_normalize() {
        let run = train_ibm1(&corpus(&[("a", "x")]), 3, None).unwrap();
        // Both conditioning tokens see only one target word, so each
        // distribution collapses onto it.
        assert!((run.table.probability("a", "x") - 1.0).abs() < 1e-12);
        assert!((run.table.probability(NULL_TOKEN, "x") - 1.0).abs() < 1e-12);
        assert!(run.table.probability("a", "x") >= 0.5);
    }

    #[test]
    fn identity_corpus_anchors_words_to_themselves() {
        let pairs: Vec<(String, String)> = (0..20)
            .map(|i| (format!("w{i}"), format!("w{i}")))
            .collect();
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let run = train_ibm1(&corpus(&refs), 10, None).unwrap();
        let mut recovered = 0;
        for i in 0..20 {
            let w = format!("w{i}");
            assert!(run.table.probability(&w, &w) >= 0.9);
            if let Some((best, _)) = run.table.unique_argmax(&w) {
                if best == w {
                    recovered += 1;
                }
            }
        }
        assert!(recovered as f64 >= 0.95 * 20.0);
    }

    #[test]
    fn multi_token_identity_corpus_recovers_argmax() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sents: Vec<Vec<String>> = (0..60)
            .map(|_| {
                (0..rng.gen_range(3..8))
                    .map(|_| format!("w{}", rng.gen_range(0..20)))
                    .collect()
            })
            .collect();
        let c = ParallelCorpus::new(sents.clone(), sents).unwrap();
        let run = train_ibm1(&c, 10, None).unwrap();
        let words: Vec<&str> = run.table.source_words().collect();
        let recovered = words
            .iter()
            .filter(|w| matches!(run.table.unique_argmax(w), Some((best, _)) if best == **w))
            .count();
        assert!(
            recovered as f64 >= 0.95 * words.len() as f64,
            "recovered {recovered}/{}",
            words.len()
        );
    }

    #[test]
    fn log_likelihood_nondecreasing() {
        for c in [
            toy(),
            corpus(&[("a b c", "x y z"), ("c b", "z y"), ("a", "x")]),
            corpus(&[("je suis", "i am"), ("je pense", "i think"), ("nous sommes", "we are")]),
        ] {
            let run = train_ibm1(&c, 8, None).unwrap();
            for w in run.log_likelihoods.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "LL decreased: {:?}", run.log_likelihoods);
            }
        }
    }

    #[test]
    fn distributions_sum_to_one_after_every_iteration() {
        for iters in 1..=5 {
            let run = train_ibm1(&toy(), iters, None).unwrap();
            let t = &run.table;
            for e in std::iter::once(NULL_TOKEN).chain(t.source_words()) {
                let sum: f64 = t
                    .target_words()
                    .map(|f| t.probability(e, f))
                    .sum();
                assert!((sum - 1.0).abs() <= 1e-6, "sum(t(.|{e})) = {sum}");
            }
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = train_ibm1(&toy(), 5, Some(2.0)).unwrap();
        let b = train_ibm1(&toy(), 5, Some(2.0)).unwrap();
        let dump = |t: &TranslationTable| {
            let mut buf = Vec::new();
            save_translation_table(t, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        assert_eq!(dump(&a.table), dump(&b.table));
        assert_eq!(a.log_likelihoods, b.log_likelihoods);
    }

    #[test]
    fn diagonal_prior_prefers_nearby_positions() {
        let c = corpus(&[("a b", "x y"); 8]);
        let flat = train_ibm1(&c, 5, None).unwrap().table;
        // Without the prior the two columns are interchangeable.
        assert!(
            (flat.probability("a", "x") - flat.probability("b", "x")).abs() < 1e-9
        );
        let diag = train_ibm1(&c, 5, Some(4.0)).unwrap().table;
        assert!(diag.probability("a", "x") > diag.probability("b", "x"));
        assert!(diag.probability("b", "y") > diag.probability("a", "y"));
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(
            train_ibm1(&toy(), 0, None),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            train_ibm1(&toy(), 1, Some(-1.0)),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn alignment_links_on_toy_corpus() {
        let c = toy();
        let run = train_ibm1(&c, 10, None).unwrap();
        let links = align_corpus(&run.table, &c);
        // "das"<->"the" and "haus"<->"house" in sentence 0.
        assert!(links.contains(&AlignmentLink {
            sentence_index: 0,
            source_pos: 0,
            target_pos: 0
        }));
        assert!(links.contains(&AlignmentLink {
            sentence_index: 0,
            source_pos: 1,
            target_pos: 1
        }));
    }

    #[test]
    fn identity_table_aligns_diagonally() {
        // No two words co-occur in every sentence, so EM can tell them apart.
        let sents: Vec<Vec<String>> = vec![
            vec!["a".into(), "b".into(), "c".into()],
            vec!["b".into(), "a".into()],
            vec!["a".into(), "c".into()],
        ];
        let c = ParallelCorpus::new(sents.clone(), sents).unwrap();
        let run = train_ibm1(&c, 10, None).unwrap();
        let links = align_corpus(&run.table, &c);
        for link in &links {
            assert_eq!(link.source_pos, link.target_pos);
        }
        assert_eq!(links.len(), 7);
    }

    #[test]
    fn unseen_target_token_produces_no_link() {
        let run = train_ibm1(&toy(), 5, None).unwrap();
        let test = corpus(&[("the house", "das zzz")]);
        let links = align_corpus(&run.table, &test);
        assert_eq!(
            links,
            vec![AlignmentLink {
                sentence_index: 0,
                source_pos: 0,
                target_pos: 0
            }]
        );
    }

    #[test]
    fn unique_argmax_rejects_ties() {
        let table = TranslationTable::from_entries([
            ("a", "x", 0.6),
            ("a", "y", 0.4),
            ("b", "x", 0.5),
            ("b", "y", 0.5),
        ]);
        assert_eq!(table.unique_argmax("a"), Some(("x", 0.6)));
        assert_eq!(table.unique_argmax("b"), None);
        assert_eq!(table.unique_argmax("zzz"), None);
    }

    #[test]
    fn pharaoh_round_trip() {
        let links = vec![
            AlignmentLink {
                sentence_index: 0,
                source_pos: 1,
                target_pos: 0,
            },
            AlignmentLink {
                sentence_index: 0,
                source_pos: 0,
                target_pos: 1,
            },
            AlignmentLink {
                sentence_index: 2,
                source_pos: 3,
                target_pos: 2,
            },
        ];
        let mut buf = Vec::new();
        save_pharaoh(&links, 3, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "1-0 0-1\n\n3-2\n");
        let loaded = load_pharaoh(buf.as_slice()).unwrap();
        assert_eq!(loaded, links);
    }

    #[test]
    fn pharaoh_rejects_junk() {
        assert!(matches!(
            load_pharaoh("0-0 nope\n".as_bytes()),
            Err(Error::MalformedLine { line: 1, .. })
        ));
    }

    #[test]
    fn table_export_is_sorted() {
        let table = TranslationTable::from_entries([
            ("b", "y", 0.3),
            ("b", "x", 0.7),
            ("a", "x", 1.0),
        ]);
        let mut buf = Vec::new();
        save_translation_table(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "a\tx\t1\nb\tx\t0.7\nb\ty\t0.3\n");
    }
}
