//! Subcommand implementations: thin wiring from configuration and flags to
//! library calls, with file-based handoff between stages.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;

use xlmap::align::{align_corpus, save_pharaoh, save_translation_table, train_ibm1};
use xlmap::dict::{
    build_contextual_dictionary, build_sentence_dictionary, extract_prob_pairs,
    load_mapping_dictionary, load_static_pairs, pairs_to_dictionary, save_mapping_dictionary,
    DictionaryKind, MappingDictionary,
};
use xlmap::eval::{
    default_curve_sizes, embed_aligned_pairs, learning_curve, load_scored_pairs, retrieval_accuracy,
    save_curve_tsv, similarity_correlation, word_translation_precision, CurveInputs, CurveSystem,
    DictRoute, EmbedScheme,
};
use xlmap::io::{
    count_frequencies, load_parallel, load_token_embeddings, load_word_vectors,
    save_word_vectors, EmbeddingTable, ParallelCorpus, TokenEmbeddingCorpus,
};
use xlmap::mapping::{learn_mapping, load_map, map_words, save_map, to_pivot_pair, MappingPolicy};
use xlmap::procrustes::{MappingLevel, OrthogonalMap};
use xlmap::sentence::{
    embed_corpus, remove_principal_component, save_sentence_embeddings, sif_weights, CorpusSource,
    SifWeights,
};
use xlmap::synth::{generate, write_world, WorldSpec};

use crate::config::{require_path, PipelineConfig};
use crate::{CliError, Common};

// ── shared plumbing ─────────────────────────────────────────────────

fn load_config(common: &Common) -> Result<PipelineConfig, CliError> {
    let mut config = PipelineConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))
}

fn out_file(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn tension(value: f64) -> Option<f64> {
    if value > 0.0 {
        Some(value)
    } else {
        None
    }
}

fn load_vectors(config: &PipelineConfig) -> Result<(EmbeddingTable, EmbeddingTable), CliError> {
    let src_path = require_path(&config.paths.src_vectors, "src_vectors")?;
    let tgt_path = require_path(&config.paths.tgt_vectors, "tgt_vectors")?;
    let (src, src_dups) = load_word_vectors(open(src_path)?, config.spaces.source.clone())?;
    let (tgt, tgt_dups) = load_word_vectors(open(tgt_path)?, config.spaces.target.clone())?;
    if src_dups + tgt_dups > 0 {
        eprintln!("warning: dropped {src_dups}+{tgt_dups} duplicate vector entries");
    }
    Ok((src, tgt))
}

fn load_train_text(config: &PipelineConfig) -> Result<ParallelCorpus, CliError> {
    let src = require_path(&config.paths.src_text, "src_text")?;
    let tgt = require_path(&config.paths.tgt_text, "tgt_text")?;
    let (corpus, dropped) = load_parallel(open(src)?, open(tgt)?)?;
    if dropped > 0 {
        eprintln!("note: dropped {dropped} empty sentence pairs");
    }
    Ok(corpus)
}

fn load_tokens(path: &Path, space: &str) -> Result<TokenEmbeddingCorpus, CliError> {
    Ok(load_token_embeddings(open(path)?, space)?)
}

/// Resolve an embedding-scheme name against the SIF configuration.
fn parse_scheme(name: &str, config: &PipelineConfig) -> Result<EmbedScheme, CliError> {
    match name {
        "static-arith" => Ok(EmbedScheme::StaticArithmetic),
        "static-sif" => Ok(EmbedScheme::StaticSif { a: config.sif.a }),
        "token" => Ok(EmbedScheme::TokenArithmetic),
        other => Err(CliError::usage(format!(
            "unknown embedding scheme {other:?} (expected static-arith, static-sif, or token)"
        ))),
    }
}

/// The static scheme implied by `[sif].weighting`.
fn static_scheme(config: &PipelineConfig) -> Result<EmbedScheme, CliError> {
    match config.sif.weighting.as_str() {
        "sif" => Ok(EmbedScheme::StaticSif { a: config.sif.a }),
        "arithmetic" => Ok(EmbedScheme::StaticArithmetic),
        other => Err(CliError::usage(format!(
            "unknown sif.weighting {other:?} (expected \"sif\" or \"arithmetic\")"
        ))),
    }
}

/// Inverse-frequency weights for one language side: counts come from the
/// configured monolingual corpus, falling back to that side of the parallel
/// training corpus.
fn sif_for_side(config: &PipelineConfig, source_side: bool) -> Result<SifWeights, CliError> {
    let (mono, text, key) = if source_side {
        (&config.paths.src_mono, &config.paths.src_text, "src")
    } else {
        (&config.paths.tgt_mono, &config.paths.tgt_text, "tgt")
    };
    let path = mono.as_ref().or(text.as_ref()).ok_or_else(|| {
        CliError::usage(format!(
            "SIF weighting needs paths.{key}_mono or paths.{key}_text for frequencies"
        ))
    })?;
    if !path.exists() {
        return Err(CliError::usage(format!(
            "frequency corpus does not exist: {}",
            path.display()
        )));
    }
    let sentences: Vec<Vec<String>> = std::io::BufRead::lines(open(path)?)
        .collect::<std::io::Result<Vec<String>>>()
        .map_err(xlmap::Error::from)?
        .into_iter()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .filter(|s: &Vec<String>| !s.is_empty())
        .collect();
    let freqs = count_frequencies(&sentences)?;
    Ok(sif_weights(&freqs, config.sif.a)?)
}

fn dictionary_path(config: &PipelineConfig) -> PathBuf {
    config
        .paths
        .dictionary
        .clone()
        .unwrap_or_else(|| config.output_dir().join("dictionary.txt"))
}

fn map_path(config: &PipelineConfig) -> PathBuf {
    config
        .paths
        .map
        .clone()
        .unwrap_or_else(|| config.output_dir().join("map.txt"))
}

fn load_map_file(path: &Path) -> Result<OrthogonalMap, CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!(
            "map file does not exist: {} (run learn-map first or set paths.map)",
            path.display()
        )));
    }
    Ok(load_map(open(path)?)?)
}

// ── gen ─────────────────────────────────────────────────────────────

/// Arguments for the synthetic-world generator.
#[derive(Args, Debug)]
pub struct GenArgs {
    /// Directory to write the world and its config into.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    vocab: usize,
    #[arg(long, default_value_t = 1200)]
    sentences: usize,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    #[arg(long, default_value_t = 15)]
    max_len: usize,
    /// Per-component context noise.
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Held-out sentences at the end of the corpus.
    #[arg(long, default_value_t = 200)]
    test_size: usize,
}

pub fn gen(args: GenArgs) -> Result<(), CliError> {
    if args.test_size >= args.sentences {
        return Err(CliError::usage(
            "test-size must be smaller than the number of sentences",
        ));
    }
    let spec = WorldSpec {
        dim: args.dim,
        vocab_size: args.vocab,
        sentences: args.sentences,
        min_len: args.min_len,
        max_len: args.max_len,
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    let world = generate(&spec);
    write_world(&world, &args.out, args.test_size)?;

    let config_text = format!(
        "seed = {seed}\n\
         output_dir = \"out\"\n\n\
         [paths]\n\
         src_vectors = \"vectors.src.txt\"\n\
         tgt_vectors = \"vectors.tgt.txt\"\n\
         src_text = \"train.src.txt\"\n\
         tgt_text = \"train.tgt.txt\"\n\
         src_tokens = \"train.src.toks\"\n\
         tgt_tokens = \"train.tgt.toks\"\n\
         static_dict = \"dict.txt\"\n\
         test_src_text = \"test.src.txt\"\n\
         test_tgt_text = \"test.tgt.txt\"\n\
         test_src_tokens = \"test.src.toks\"\n\
         test_tgt_tokens = \"test.tgt.toks\"\n\
         gold_translations = \"dict.txt\"\n\
         gold_similarity = \"similarity.tsv\"\n\n\
         [spaces]\n\
         source = \"src\"\n\
         target = \"tgt\"\n\n\
         [aligner]\n\
         iterations = 5\n\
         diagonal_tension = 0.0\n\n\
         [sif]\n\
         a = 1e-3\n\
         weighting = \"sif\"\n\n\
         [mapping]\n\
         level = \"\"\n\
         normalize = \"default\"\n\n\
         [dictionary]\n\
         kind = \"prob\"\n\
         cap = 1000000\n\n\
         [curve]\n\
         sizes = []\n\
         systems = [\"word\", \"sent\"]\n\
         embeddings = \"token\"\n\n\
         [eval]\n\
         k = [1, 5]\n\
         embeddings = \"auto\"\n",
        seed = args.seed
    );
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", args.out.display())))?;
    let config_path = args.out.join("config.toml");
    std::fs::write(&config_path, config_text)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", config_path.display())))?;
    eprintln!(
        "generated world: dim={} vocab={} sentences={} sigma={} -> {}",
        args.dim,
        args.vocab,
        args.sentences,
        args.sigma,
        args.out.display()
    );
    eprintln!("config: {}", config_path.display());
    Ok(())
}

// ── align ───────────────────────────────────────────────────────────

pub fn align(
    common: &Common,
    iterations: Option<usize>,
    lambda: Option<f64>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let corpus = load_train_text(&config)?;
    let iterations = iterations.unwrap_or(config.aligner.iterations);
    let lambda = lambda.unwrap_or(config.aligner.diagonal_tension);

    let run = train_ibm1(&corpus, iterations, tension(lambda))?;
    let links = align_corpus(&run.table, &corpus);

    let out = config.output_dir();
    let (pharaoh_path, mut pharaoh) = out_file(&out, "alignments.txt")?;
    save_pharaoh(&links, corpus.len(), &mut pharaoh)?;
    pharaoh.flush().map_err(xlmap::Error::from)?;
    let (ttable_path, mut ttable) = out_file(&out, "ttable.tsv")?;
    save_translation_table(&run.table, &mut ttable)?;
    ttable.flush().map_err(xlmap::Error::from)?;

    eprintln!(
        "aligned {} sentence pairs in {iterations} iterations (log-likelihood {:.4} -> {:.4}); {} links",
        corpus.len(),
        run.log_likelihoods.first().unwrap_or(&f64::NAN),
        run.log_likelihoods.last().unwrap_or(&f64::NAN),
        links.len()
    );
    eprintln!("wrote {}", pharaoh_path.display());
    eprintln!("wrote {}", ttable_path.display());
    Ok(())
}

// ── build-dict ──────────────────────────────────────────────────────

pub fn build_dict(
    common: &Common,
    kind: Option<String>,
    cap: Option<usize>,
    embeddings: Option<String>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let kind = kind.unwrap_or_else(|| config.dictionary.kind.clone());
    let cap = cap.unwrap_or(config.dictionary.cap);
    let out = config.output_dir();

    let mut audit_rows: Vec<String> = Vec::new();
    let dict: MappingDictionary = match kind.as_str() {
        "static" => {
            let pairs = load_static_pairs(open(require_path(
                &config.paths.static_dict,
                "static_dict",
            )?)?)?;
            let (src, tgt) = load_vectors(&config)?;
            let (dict, res) = pairs_to_dictionary(&pairs, &src, &tgt, DictionaryKind::StaticDict)?;
            eprintln!(
                "static dictionary: {} pairs kept, {} skipped (out of vocabulary)",
                dict.len(),
                res.skipped
            );
            for &i in &res.retained {
                let (s, t) = pairs.get(i);
                audit_rows.push(format!("{s}\t{t}"));
            }
            dict
        }
        "prob" => {
            let corpus = load_train_text(&config)?;
            let run = train_ibm1(
                &corpus,
                config.aligner.iterations,
                tension(config.aligner.diagonal_tension),
            )?;
            let pairs = extract_prob_pairs(&run.table);
            let (src, tgt) = load_vectors(&config)?;
            let (dict, res) = pairs_to_dictionary(&pairs, &src, &tgt, DictionaryKind::ProbDict)?;
            eprintln!(
                "probability dictionary: {} source words with unique argmax, {} pairs kept, {} skipped",
                pairs.len(),
                dict.len(),
                res.skipped
            );
            for &i in &res.retained {
                let (s, t) = pairs.get(i);
                audit_rows.push(format!("{s}\t{t}"));
            }
            dict
        }
        "contextual" => {
            let corpus = load_train_text(&config)?;
            let src_toks = load_tokens(
                require_path(&config.paths.src_tokens, "src_tokens")?,
                &config.spaces.source,
            )?;
            let tgt_toks = load_tokens(
                require_path(&config.paths.tgt_tokens, "tgt_tokens")?,
                &config.spaces.target,
            )?;
            let run = train_ibm1(
                &corpus,
                config.aligner.iterations,
                tension(config.aligner.diagonal_tension),
            )?;
            let links = align_corpus(&run.table, &corpus);
            let (dict, retained) =
                build_contextual_dictionary(&src_toks, &tgt_toks, &links, cap)?;
            eprintln!(
                "contextual dictionary: {} links decoded, {} one-to-one pairs kept (cap {cap})",
                links.len(),
                dict.len()
            );
            for link in &retained {
                let s = &src_toks.sentence(link.sentence_index)[link.source_pos].token;
                let t = &tgt_toks.sentence(link.sentence_index)[link.target_pos].token;
                audit_rows.push(format!(
                    "{}\t{}\t{}\t{s}\t{t}",
                    link.sentence_index, link.source_pos, link.target_pos
                ));
            }
            dict
        }
        "sentence" => {
            let corpus = load_train_text(&config)?;
            let scheme = match &embeddings {
                Some(name) => parse_scheme(name, &config)?,
                None => {
                    if config.paths.src_tokens.is_some() && config.paths.tgt_tokens.is_some() {
                        EmbedScheme::TokenArithmetic
                    } else {
                        static_scheme(&config)?
                    }
                }
            };
            let (src_toks, tgt_toks) = if matches!(scheme, EmbedScheme::TokenArithmetic) {
                (
                    Some(load_tokens(
                        require_path(&config.paths.src_tokens, "src_tokens")?,
                        &config.spaces.source,
                    )?),
                    Some(load_tokens(
                        require_path(&config.paths.tgt_tokens, "tgt_tokens")?,
                        &config.spaces.target,
                    )?),
                )
            } else {
                (None, None)
            };
            let (src_table, tgt_table) = if matches!(scheme, EmbedScheme::TokenArithmetic) {
                (None, None)
            } else {
                let (s, t) = load_vectors(&config)?;
                (Some(s), Some(t))
            };
            let (src_sif, tgt_sif) = if matches!(scheme, EmbedScheme::StaticSif { .. }) {
                (
                    Some(sif_for_side(&config, true)?),
                    Some(sif_for_side(&config, false)?),
                )
            } else {
                (None, None)
            };
            let (src_emb, tgt_emb, retained) = embed_aligned_pairs(
                &scheme,
                &corpus,
                src_toks.as_ref(),
                tgt_toks.as_ref(),
                src_table.as_ref(),
                tgt_table.as_ref(),
                src_sif.as_ref(),
                tgt_sif.as_ref(),
            )?;
            eprintln!(
                "sentence dictionary: {} pairs embedded, {} dropped",
                retained.len(),
                corpus.len() - retained.len()
            );
            for i in &retained {
                audit_rows.push(format!("{i}"));
            }
            build_sentence_dictionary(src_emb, tgt_emb)?
                .with_spaces(&config.spaces.source, &config.spaces.target)
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown dictionary kind {other:?} (expected static, prob, contextual, or sentence)"
            )))
        }
    };

    // Word-route dictionaries inherit spaces from the vector tables; make
    // sure contextual ones carry the configured labels too.
    let dict = dict.with_spaces(&config.spaces.source, &config.spaces.target);

    let dict_path = dictionary_path(&config);
    if let Some(parent) = dict_path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    let mut writer = BufWriter::new(File::create(&dict_path).map_err(|e| {
        CliError::usage(format!("cannot create {}: {e}", dict_path.display()))
    })?);
    save_mapping_dictionary(&dict, &mut writer)?;
    writer.flush().map_err(xlmap::Error::from)?;
    let (audit_path, mut audit) = out_file(&out, "dictionary_audit.tsv")?;
    for row in &audit_rows {
        writeln!(audit, "{row}").map_err(xlmap::Error::from)?;
    }
    audit.flush().map_err(xlmap::Error::from)?;
    eprintln!("wrote {} ({} pairs)", dict_path.display(), dict.len());
    eprintln!("wrote {}", audit_path.display());
    Ok(())
}

// ── learn-map ───────────────────────────────────────────────────────

pub fn learn_map(
    common: &Common,
    level: Option<String>,
    normalize: Option<String>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let dict_path = dictionary_path(&config);
    if !dict_path.exists() {
        return Err(CliError::usage(format!(
            "dictionary does not exist: {} (run build-dict first or set paths.dictionary)",
            dict_path.display()
        )));
    }
    let dict = load_mapping_dictionary(open(&dict_path)?)?;

    let level_name = level.unwrap_or_else(|| config.mapping.level.clone());
    let level = if level_name.is_empty() {
        match dict.kind() {
            DictionaryKind::StaticDict | DictionaryKind::ProbDict => MappingLevel::Word,
            DictionaryKind::Contextual => MappingLevel::Contextual,
            DictionaryKind::Sentence => MappingLevel::Sentence,
        }
    } else {
        MappingLevel::parse(&level_name).ok_or_else(|| {
            CliError::usage(format!(
                "unknown mapping level {level_name:?} (expected word, sentence, or contextual)"
            ))
        })?
    };
    let mut policy = MappingPolicy::for_level(level);
    match normalize
        .unwrap_or_else(|| config.mapping.normalize.clone())
        .as_str()
    {
        "default" => {}
        "on" => policy.normalize_dictionary = true,
        "off" => policy.normalize_dictionary = false,
        other => {
            return Err(CliError::usage(format!(
                "unknown normalize setting {other:?} (expected on, off, or default)"
            )))
        }
    }

    let map = learn_mapping(&dict, &policy)?;
    let map_out = map_path(&config);
    if let Some(parent) = map_out.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    let mut writer = BufWriter::new(File::create(&map_out).map_err(|e| {
        CliError::usage(format!("cannot create {}: {e}", map_out.display()))
    })?);
    save_map(&map, &mut writer)?;
    writer.flush().map_err(xlmap::Error::from)?;
    eprintln!(
        "learned {} map {} -> {} from {} pairs (normalize: {})",
        map.level().as_str(),
        map.source_space(),
        map.target_space(),
        dict.len(),
        policy.normalize_dictionary
    );
    eprintln!("wrote {}", map_out.display());
    Ok(())
}

// ── apply-map ───────────────────────────────────────────────────────

pub fn apply_map(common: &Common) -> Result<(), CliError> {
    let config = load_config(common)?;
    let map = load_map_file(&map_path(&config))?;
    let src_path = require_path(&config.paths.src_vectors, "src_vectors")?;
    let (table, _) = load_word_vectors(open(src_path)?, config.spaces.source.clone())?;
    let mapped = map_words(&map, &table)?;
    let (path, mut writer) = out_file(&config.output_dir(), "mapped_vectors.txt")?;
    save_word_vectors(&mapped, &mut writer)?;
    writer.flush().map_err(xlmap::Error::from)?;
    eprintln!("mapped {} vectors into {}", mapped.len(), map.target_space());
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ── embed-sents ─────────────────────────────────────────────────────

pub fn embed_sents(
    common: &Common,
    side: &str,
    input: Option<PathBuf>,
    embeddings: Option<String>,
    remove_pc: bool,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let source_side = match side {
        "src" => true,
        "tgt" => false,
        other => {
            return Err(CliError::usage(format!(
                "unknown side {other:?} (expected src or tgt)"
            )))
        }
    };
    let scheme = match &embeddings {
        Some(name) => parse_scheme(name, &config)?,
        None => {
            let tokens = if source_side {
                &config.paths.src_tokens
            } else {
                &config.paths.tgt_tokens
            };
            if tokens.is_some() {
                EmbedScheme::TokenArithmetic
            } else {
                static_scheme(&config)?
            }
        }
    };

    let (matrix, dropped) = match scheme {
        EmbedScheme::TokenArithmetic => {
            let default = if source_side {
                &config.paths.src_tokens
            } else {
                &config.paths.tgt_tokens
            };
            let path = match &input {
                Some(p) => p.clone(),
                None => require_path(default, if source_side { "src_tokens" } else { "tgt_tokens" })?
                    .clone(),
            };
            let corpus = load_tokens(&path, if source_side { &config.spaces.source } else { &config.spaces.target })?;
            embed_corpus(CorpusSource::Contextual { corpus: &corpus })?
        }
        EmbedScheme::StaticArithmetic | EmbedScheme::StaticSif { .. } => {
            let default = if source_side {
                &config.paths.src_text
            } else {
                &config.paths.tgt_text
            };
            let path = match &input {
                Some(p) => p.clone(),
                None => {
                    require_path(default, if source_side { "src_text" } else { "tgt_text" })?.clone()
                }
            };
            let sentences: Vec<Vec<String>> = std::io::BufRead::lines(open(&path)?)
                .collect::<std::io::Result<Vec<String>>>()
                .map_err(xlmap::Error::from)?
                .into_iter()
                .map(|l| l.split_whitespace().map(str::to_string).collect())
                .collect();
            let tables = load_vectors(&config)?;
            let table = if source_side { tables.0 } else { tables.1 };
            let weights = match scheme {
                EmbedScheme::StaticSif { .. } => Some(sif_for_side(&config, source_side)?),
                _ => None,
            };
            embed_corpus(CorpusSource::Static {
                sentences: &sentences,
                table: &table,
                weights: weights.as_ref(),
            })?
        }
    };
    let matrix = if remove_pc {
        remove_principal_component(&matrix)?
    } else {
        matrix
    };
    let name = format!("sentences.{side}.emb");
    let (path, mut writer) = out_file(&config.output_dir(), &name)?;
    save_sentence_embeddings(&matrix, &mut writer)?;
    writer.flush().map_err(xlmap::Error::from)?;
    eprintln!(
        "embedded {} sentences ({} dropped){}",
        matrix.cols(),
        dropped.len(),
        if remove_pc {
            ", principal component removed"
        } else {
            ""
        }
    );
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ── eval ────────────────────────────────────────────────────────────

pub fn eval(
    common: &Common,
    metric: &str,
    k_override: Option<Vec<usize>>,
    embeddings: Option<String>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    match metric {
        "retrieval" => eval_retrieval(&config, embeddings),
        "wordtrans" => eval_wordtrans(&config, k_override),
        "similarity" => eval_similarity(&config),
        other => Err(CliError::usage(format!(
            "unknown metric {other:?} (expected retrieval, wordtrans, or similarity)"
        ))),
    }
}

fn eval_retrieval(config: &PipelineConfig, embeddings: Option<String>) -> Result<(), CliError> {
    let test_src = require_path(&config.paths.test_src_text, "test_src_text")?;
    let test_tgt = require_path(&config.paths.test_tgt_text, "test_tgt_text")?;
    let (test_text, text_dropped) = load_parallel(open(test_src)?, open(test_tgt)?)?;

    let scheme_name = embeddings.unwrap_or_else(|| config.eval.embeddings.clone());
    let scheme = match scheme_name.as_str() {
        "token" => EmbedScheme::TokenArithmetic,
        "static" => static_scheme(config)?,
        "auto" => {
            if config.paths.test_src_tokens.is_some() && config.paths.test_tgt_tokens.is_some() {
                EmbedScheme::TokenArithmetic
            } else {
                static_scheme(config)?
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown eval.embeddings {other:?} (expected static, token, or auto)"
            )))
        }
    };

    let (src_toks, tgt_toks) = if matches!(scheme, EmbedScheme::TokenArithmetic) {
        (
            Some(load_tokens(
                require_path(&config.paths.test_src_tokens, "test_src_tokens")?,
                &config.spaces.source,
            )?),
            Some(load_tokens(
                require_path(&config.paths.test_tgt_tokens, "test_tgt_tokens")?,
                &config.spaces.target,
            )?),
        )
    } else {
        (None, None)
    };
    let tables = if matches!(scheme, EmbedScheme::TokenArithmetic) {
        None
    } else {
        Some(load_vectors(config)?)
    };
    let (src_sif, tgt_sif) = if matches!(scheme, EmbedScheme::StaticSif { .. }) {
        (
            Some(sif_for_side(config, true)?),
            Some(sif_for_side(config, false)?),
        )
    } else {
        (None, None)
    };
    let (src_emb, tgt_emb, retained) = embed_aligned_pairs(
        &scheme,
        &test_text,
        src_toks.as_ref(),
        tgt_toks.as_ref(),
        tables.as_ref().map(|t| &t.0),
        tables.as_ref().map(|t| &t.1),
        src_sif.as_ref(),
        tgt_sif.as_ref(),
    )?;
    let dropped = text_dropped + (test_text.len() - retained.len());

    let src_map = load_map_file(&map_path(config))?;
    let (mapped_src, tgt_side, direction) = match &config.paths.target_map {
        Some(path) => {
            // Zero-shot retrieval through the pivot: both sides mapped in.
            let tgt_map = load_map_file(path)?;
            let (src_map, tgt_map) = to_pivot_pair(&src_map, &tgt_map)?;
            (
                src_map.apply(&src_emb)?,
                tgt_map.apply(&tgt_emb)?,
                (
                    src_map.source_space().to_string(),
                    tgt_map.source_space().to_string(),
                ),
            )
        }
        None => (
            src_map.apply(&src_emb)?,
            tgt_emb,
            (
                src_map.source_space().to_string(),
                src_map.target_space().to_string(),
            ),
        ),
    };
    let report = retrieval_accuracy(&mapped_src, &tgt_side)?
        .with_spaces(direction.0, direction.1)
        .with_dropped(dropped);

    let (path, mut writer) = out_file(&config.output_dir(), "report_retrieval.tsv")?;
    writeln!(
        writer,
        "source\ttarget\tn\tcorrect\taccuracy\tdropped\tzero_vectors"
    )
    .map_err(xlmap::Error::from)?;
    writeln!(
        writer,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        report.source_space,
        report.target_space,
        report.n,
        report.correct,
        report.accuracy,
        report.dropped,
        report.zero_vectors
    )
    .map_err(xlmap::Error::from)?;
    writer.flush().map_err(xlmap::Error::from)?;
    eprintln!(
        "retrieval {} -> {}: accuracy {:.4} ({}/{} correct, {} dropped)",
        report.source_space,
        report.target_space,
        report.accuracy,
        report.correct,
        report.n,
        report.dropped
    );
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn eval_wordtrans(config: &PipelineConfig, k_override: Option<Vec<usize>>) -> Result<(), CliError> {
    let gold = load_static_pairs(open(require_path(
        &config.paths.gold_translations,
        "gold_translations",
    )?)?)?;
    let (src, tgt) = load_vectors(config)?;
    let src_map = load_map_file(&map_path(config))?;
    let mapped = map_words(&src_map, &src)?;
    let tgt = match &config.paths.target_map {
        Some(path) => {
            let tgt_map = load_map_file(path)?;
            let (_, tgt_map) = to_pivot_pair(&src_map, &tgt_map)?;
            map_words(tgt_map, &tgt)?
        }
        None => tgt,
    };
    let ks = k_override.unwrap_or_else(|| config.eval.k.clone());
    if ks.is_empty() {
        return Err(CliError::usage("no k values configured for wordtrans"));
    }
    let (path, mut writer) = out_file(&config.output_dir(), "report_wordtrans.tsv")?;
    writeln!(writer, "k\tprecision\tcorrect\tevaluated\tskipped_oov")
        .map_err(xlmap::Error::from)?;
    for &k in &ks {
        let report = word_translation_precision(&mapped, &tgt, &gold, k)?;
        writeln!(
            writer,
            "{}\t{}\t{}\t{}\t{}",
            report.k, report.precision, report.correct, report.evaluated, report.skipped_oov
        )
        .map_err(xlmap::Error::from)?;
        eprintln!(
            "precision@{}: {:.4} ({}/{} correct, {} skipped)",
            report.k, report.precision, report.correct, report.evaluated, report.skipped_oov
        );
    }
    writer.flush().map_err(xlmap::Error::from)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn eval_similarity(config: &PipelineConfig) -> Result<(), CliError> {
    let scored = load_scored_pairs(open(require_path(
        &config.paths.gold_similarity,
        "gold_similarity",
    )?)?)?;
    let (src, tgt) = load_vectors(config)?;
    let src_map = load_map_file(&map_path(config))?;
    let mapped = map_words(&src_map, &src)?;
    let tgt = match &config.paths.target_map {
        Some(path) => {
            let tgt_map = load_map_file(path)?;
            let (_, tgt_map) = to_pivot_pair(&src_map, &tgt_map)?;
            map_words(tgt_map, &tgt)?
        }
        None => tgt,
    };
    let report = similarity_correlation(&scored, &mapped, &tgt)?;
    let (path, mut writer) = out_file(&config.output_dir(), "report_similarity.tsv")?;
    writeln!(writer, "pearson\tspearman\tharmonic_mean\tn\tskipped_oov")
        .map_err(xlmap::Error::from)?;
    let hm = report
        .harmonic_mean
        .map(|v| v.to_string())
        .unwrap_or_else(|| "undefined".into());
    writeln!(
        writer,
        "{}\t{}\t{}\t{}\t{}",
        report.pearson, report.spearman, hm, report.n, report.skipped_oov
    )
    .map_err(xlmap::Error::from)?;
    writer.flush().map_err(xlmap::Error::from)?;
    eprintln!(
        "similarity: pearson {:.4}, spearman {:.4}, harmonic mean {} over {} pairs",
        report.pearson, report.spearman, hm, report.n
    );
    eprintln!("wrote {}", path.display());
    Ok(())
}

// ── curve ───────────────────────────────────────────────────────────

pub fn curve(
    common: &Common,
    sizes: Option<Vec<usize>>,
    systems: Option<Vec<String>>,
) -> Result<(), CliError> {
    let config = load_config(common)?;
    let train_text = load_train_text(&config)?;
    let test_src = require_path(&config.paths.test_src_text, "test_src_text")?;
    let test_tgt = require_path(&config.paths.test_tgt_text, "test_tgt_text")?;
    let (test_text, _) = load_parallel(open(test_src)?, open(test_tgt)?)?;

    let scheme = parse_scheme(&config.curve.embeddings, &config)?;
    let system_names = systems.unwrap_or_else(|| config.curve.systems.clone());
    if system_names.is_empty() {
        return Err(CliError::usage("no curve systems configured"));
    }

    let needs_tokens = matches!(scheme, EmbedScheme::TokenArithmetic)
        || system_names.iter().any(|s| s == "ctx");
    let (train_src_toks, train_tgt_toks, test_src_toks, test_tgt_toks) = if needs_tokens {
        (
            Some(load_tokens(
                require_path(&config.paths.src_tokens, "src_tokens")?,
                &config.spaces.source,
            )?),
            Some(load_tokens(
                require_path(&config.paths.tgt_tokens, "tgt_tokens")?,
                &config.spaces.target,
            )?),
            Some(load_tokens(
                require_path(&config.paths.test_src_tokens, "test_src_tokens")?,
                &config.spaces.source,
            )?),
            Some(load_tokens(
                require_path(&config.paths.test_tgt_tokens, "test_tgt_tokens")?,
                &config.spaces.target,
            )?),
        )
    } else {
        (None, None, None, None)
    };
    let needs_tables = system_names.iter().any(|s| s == "dict" || s == "word")
        || !matches!(scheme, EmbedScheme::TokenArithmetic);
    let tables = if needs_tables {
        Some(load_vectors(&config)?)
    } else {
        None
    };

    let mut curve_systems = Vec::new();
    for name in &system_names {
        let route = match name.as_str() {
            "dict" => DictRoute::Static(load_static_pairs(open(require_path(
                &config.paths.static_dict,
                "static_dict",
            )?)?)?),
            "word" => DictRoute::Prob {
                iterations: config.aligner.iterations,
                diagonal_tension: tension(config.aligner.diagonal_tension),
            },
            "ctx" => DictRoute::Contextual {
                iterations: config.aligner.iterations,
                diagonal_tension: tension(config.aligner.diagonal_tension),
                cap: config.dictionary.cap,
            },
            "sent" => DictRoute::Sentence {
                scheme: scheme.clone(),
            },
            other => {
                return Err(CliError::usage(format!(
                    "unknown curve system {other:?} (expected dict, word, ctx, or sent)"
                )))
            }
        };
        curve_systems.push(CurveSystem {
            name: name.clone(),
            route,
            eval_scheme: scheme.clone(),
        });
    }

    let sizes = match sizes {
        Some(s) if !s.is_empty() => s,
        _ if !config.curve.sizes.is_empty() => config.curve.sizes.clone(),
        _ => default_curve_sizes(train_text.len()),
    };

    let inputs = CurveInputs {
        train_text: &train_text,
        train_src_tokens: train_src_toks.as_ref(),
        train_tgt_tokens: train_tgt_toks.as_ref(),
        src_table: tables.as_ref().map(|t| &t.0),
        tgt_table: tables.as_ref().map(|t| &t.1),
        test_text: &test_text,
        test_src_tokens: test_src_toks.as_ref(),
        test_tgt_tokens: test_tgt_toks.as_ref(),
    };
    let rows = learning_curve(&inputs, &curve_systems, &sizes)?;

    let (path, mut writer) = out_file(&config.output_dir(), "curve.tsv")?;
    save_curve_tsv(&rows, &system_names, &mut writer)?;
    writer.flush().map_err(xlmap::Error::from)?;
    for row in &rows {
        let cells: Vec<String> = row
            .values
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect();
        eprintln!("size {:>7}: {}", row.split_size, cells.join("  "));
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}
