//! Synthetic bilingual worlds for tests and demos.
//!
//! A world is a pair of vocabularies whose target-side embeddings are an exact
//! planted orthogonal transform of the source side, plus a word-for-word
//! parallel corpus and per-token "contextual" embedding dumps where every
//! token occurrence is the word's static vector perturbed by Gaussian noise.
//! Everything is driven by a single seed and is fully deterministic.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::io::{EmbeddingTable, ParallelCorpus, TokenEmbeddingCorpus, TokenEntry};
use crate::matrix::DenseMatrix;

/// Random orthogonal matrix: Gram-Schmidt of a Gaussian matrix, with a second
/// orthogonalization pass.
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut cand: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for col in &cols {
                let proj: f64 = cand.iter().zip(col).map(|(a, b)| a * b).sum();
                for (c, v) in cand.iter_mut().zip(col) {
                    *c -= proj * v;
                }
            }
        }
        let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue; // astronomically unlikely; resample
        }
        for v in &mut cand {
            *v /= norm;
        }
        cols.push(cand);
    }
    DenseMatrix::from_columns(dim, cols.iter().map(|c| c.as_slice()))
        .expect("columns have matching dimension")
}

/// Uniformly random point on the unit sphere.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Parameters of a synthetic world.
#[derive(Debug, Clone)]
pub struct WorldSpec {
    pub dim: usize,
    pub vocab_size: usize,
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Per-component standard deviation of the per-token context noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            dim: 32,
            vocab_size: 20_000,
            sentences: 20_000,
            min_len: 5,
            max_len: 15,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

/// A generated world. Target static vectors are exactly
/// `round32(rotation * source_vector)`; token dumps carry
/// `round32(static + noise)` per occurrence.
pub struct World {
    pub spec: WorldSpec,
    pub rotation: DenseMatrix,
    pub source_vectors: EmbeddingTable,
    pub target_vectors: EmbeddingTable,
    pub corpus: ParallelCorpus,
    pub source_tokens: TokenEmbeddingCorpus,
    pub target_tokens: TokenEmbeddingCorpus,
}

/// Round through f32 so that text serialization is short while staying exact:
/// files written with shortest round-trip formatting reproduce the in-memory
/// values bit for bit.
fn round32(x: f64) -> f64 {
    x as f32 as f64
}

pub fn generate(spec: &WorldSpec) -> World {
    assert!(spec.dim >= 1 && spec.vocab_size >= 1);
    assert!(spec.min_len >= 1 && spec.min_len <= spec.max_len);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let rotation = random_orthogonal(spec.dim, &mut rng);

    let width = (spec.vocab_size as f64).log10().ceil().max(1.0) as usize;
    let word = |i: usize| format!("w{i:0width$}");

    let mut source_vectors = EmbeddingTable::new(spec.dim, "src.synth");
    let mut target_vectors = EmbeddingTable::new(spec.dim, "tgt.synth");
    for i in 0..spec.vocab_size {
        let v: Vec<f64> = random_unit_vector(spec.dim, &mut rng)
            .into_iter()
            .map(round32)
            .collect();
        let mapped: Vec<f64> = rotation
            .matmul(&DenseMatrix::from_vec(spec.dim, 1, v.clone()).unwrap())
            .unwrap()
            .data()
            .iter()
            .map(|&x| round32(x))
            .collect();
        source_vectors.push(word(i), v).unwrap();
        target_vectors.push(word(i), mapped).unwrap();
    }

    let mut src_sentences = Vec::with_capacity(spec.sentences);
    let mut src_token_sents = Vec::with_capacity(spec.sentences);
    let mut tgt_token_sents = Vec::with_capacity(spec.sentences);
    for _ in 0..spec.sentences {
        let len = rng.gen_range(spec.min_len..=spec.max_len);
        let ids: Vec<usize> = (0..len).map(|_| rng.gen_range(0..spec.vocab_size)).collect();
        let tokens: Vec<String> = ids.iter().map(|&i| word(i)).collect();

        let mut src_entries = Vec::with_capacity(len);
        let mut tgt_entries = Vec::with_capacity(len);
        for (&id, tok) in ids.iter().zip(&tokens) {
            let noisy = |base: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
                base.iter()
                    .map(|&x| {
                        let eps: f64 = rng.sample(StandardNormal);
                        round32(x + spec.noise_sigma * eps)
                    })
                    .collect()
            };
            let sv = source_vectors.lookup(&word(id)).unwrap().to_vec();
            let tv = target_vectors.lookup(&word(id)).unwrap().to_vec();
            src_entries.push(TokenEntry {
                token: tok.clone(),
                vector: noisy(&sv, &mut rng),
            });
            tgt_entries.push(TokenEntry {
                token: tok.clone(),
                vector: noisy(&tv, &mut rng),
            });
        }
        src_sentences.push(tokens);
        src_token_sents.push(src_entries);
        tgt_token_sents.push(tgt_entries);
    }

    // Word-for-word parallel corpus: the target side repeats the source
    // token sequence.
    let corpus = ParallelCorpus::new(src_sentences.clone(), src_sentences.clone())
        .expect("line-aligned by construction");
    let source_tokens = TokenEmbeddingCorpus::new(spec.dim, "src.synth", src_token_sents);
    let target_tokens = TokenEmbeddingCorpus::new(spec.dim, "tgt.synth", tgt_token_sents);

    World {
        spec: spec.clone(),
        rotation,
        source_vectors,
        target_vectors,
        corpus,
        source_tokens,
        target_tokens,
    }
}

impl World {
    /// Head of the parallel materials: the first `n` sentences.
    pub fn train_slice(
        &self,
        n: usize,
    ) -> (ParallelCorpus, TokenEmbeddingCorpus, TokenEmbeddingCorpus) {
        (
            self.corpus.prefix(n),
            self.source_tokens.prefix(n),
            self.target_tokens.prefix(n),
        )
    }

    /// Tail of the parallel materials: the last `n` sentences, for held-out
    /// evaluation.
    pub fn test_slice(
        &self,
        n: usize,
    ) -> (ParallelCorpus, TokenEmbeddingCorpus, TokenEmbeddingCorpus) {
        let start = self.corpus.len() - n;
        let text = ParallelCorpus::new(
            self.corpus.source()[start..].to_vec(),
            self.corpus.target()[start..].to_vec(),
        )
        .expect("slices stay aligned");
        let tail = |c: &TokenEmbeddingCorpus| {
            TokenEmbeddingCorpus::new(c.dim(), c.space_id(), c.sentences()[start..].to_vec())
        };
        (text, tail(&self.source_tokens), tail(&self.target_tokens))
    }

    /// The identity word-pair list (every word translates to itself).
    pub fn gold_pairs(&self) -> Vec<(String, String)> {
        (0..self.source_vectors.len())
            .map(|i| {
                let w = self.source_vectors.token(i).to_string();
                (w.clone(), w)
            })
            .collect()
    }

    /// Synthetic cross-lingual similarity judgments: random word pairs scored
    /// by their source-space cosine. A perfect mapping reproduces these
    /// scores exactly.
    pub fn scored_pairs(&self, n: usize, seed: u64) -> Vec<(String, String, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = self.source_vectors.len();
        (0..n)
            .map(|_| {
                let a = rng.gen_range(0..vocab);
                let b = rng.gen_range(0..vocab);
                let va = self.source_vectors.vector(a);
                let vb = self.source_vectors.vector(b);
                let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
                (
                    self.source_vectors.token(a).to_string(),
                    self.source_vectors.token(b).to_string(),
                    dot / (na * nb),
                )
            })
            .collect()
    }
}

/// File names produced by [`write_world`], all inside the chosen directory.
pub const WORLD_FILES: &[&str] = &[
    "vectors.src.txt",
    "vectors.tgt.txt",
    "train.src.txt",
    "train.tgt.txt",
    "train.src.toks",
    "train.tgt.toks",
    "test.src.txt",
    "test.tgt.txt",
    "test.src.toks",
    "test.tgt.toks",
    "dict.txt",
    "similarity.tsv",
];

/// Write a world to disk: static vector tables, train/test parallel text,
/// train/test token dumps, and the identity seed dictionary. The last
/// `test_size` sentences form the held-out test set.
pub fn write_world(
    world: &World,
    dir: &std::path::Path,
    test_size: usize,
) -> crate::error::Result<()> {
    use crate::io::{save_sentences, save_token_embeddings, save_word_vectors};
    use std::fs::File;
    use std::io::{BufWriter, Write};

    assert!(test_size < world.corpus.len());
    let train = world.corpus.len() - test_size;
    let (train_text, train_src_toks, train_tgt_toks) = world.train_slice(train);
    let (test_text, test_src_toks, test_tgt_toks) = world.test_slice(test_size);

    std::fs::create_dir_all(dir)?;
    let writer = |name: &str| -> crate::error::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(dir.join(name))?))
    };

    save_word_vectors(&world.source_vectors, &mut writer("vectors.src.txt")?)?;
    save_word_vectors(&world.target_vectors, &mut writer("vectors.tgt.txt")?)?;
    save_sentences(train_text.source(), &mut writer("train.src.txt")?)?;
    save_sentences(train_text.target(), &mut writer("train.tgt.txt")?)?;
    save_token_embeddings(&train_src_toks, &mut writer("train.src.toks")?)?;
    save_token_embeddings(&train_tgt_toks, &mut writer("train.tgt.toks")?)?;
    save_sentences(test_text.source(), &mut writer("test.src.txt")?)?;
    save_sentences(test_text.target(), &mut writer("test.tgt.txt")?)?;
    save_token_embeddings(&test_src_toks, &mut writer("test.src.toks")?)?;
    save_token_embeddings(&test_tgt_toks, &mut writer("test.tgt.toks")?)?;
    let mut dict = writer("dict.txt")?;
    for (s, t) in world.gold_pairs() {
        writeln!(dict, "{s}\t{t}")?;
    }
    dict.flush()?;
    let mut sim = writer("similarity.tsv")?;
    for (a, b, score) in world.scored_pairs(200, world.spec.seed ^ 0x5ca1ab1e) {
        writeln!(sim, "{a}\t{b}\t{score}")?;
    }
    sim.flush()?;
    Ok(())
}
