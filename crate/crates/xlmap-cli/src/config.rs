//! Pipeline configuration: a TOML file naming inputs, knobs, and the output
//! directory. Command-line flags override individual fields; the file keeps
//! a run reproducible. Relative paths resolve against the config file's
//! directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    /// Where command outputs land. Created on demand.
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub spaces: Spaces,
    #[serde(default)]
    pub aligner: Aligner,
    #[serde(default)]
    pub sif: Sif,
    #[serde(default)]
    pub mapping: Mapping,
    #[serde(default)]
    pub dictionary: Dictionary,
    #[serde(default)]
    pub curve: Curve,
    #[serde(default)]
    pub eval: Eval,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub src_vectors: Option<PathBuf>,
    pub tgt_vectors: Option<PathBuf>,
    pub src_text: Option<PathBuf>,
    pub tgt_text: Option<PathBuf>,
    pub src_tokens: Option<PathBuf>,
    pub tgt_tokens: Option<PathBuf>,
    pub static_dict: Option<PathBuf>,
    pub test_src_text: Option<PathBuf>,
    pub test_tgt_text: Option<PathBuf>,
    pub test_src_tokens: Option<PathBuf>,
    pub test_tgt_tokens: Option<PathBuf>,
    pub gold_translations: Option<PathBuf>,
    pub gold_similarity: Option<PathBuf>,
    /// Monolingual corpora for frequency counts; the parallel corpus side is
    /// the fallback.
    pub src_mono: Option<PathBuf>,
    pub tgt_mono: Option<PathBuf>,
    /// Built artifacts consumed by later stages.
    pub dictionary: Option<PathBuf>,
    pub map: Option<PathBuf>,
    /// Second map for pivot (zero-shot) retrieval.
    pub target_map: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spaces {
    pub source: String,
    pub target: String,
}

impl Default for Spaces {
    fn default() -> Self {
        Spaces {
            source: "src".into(),
            target: "tgt".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aligner {
    pub iterations: usize,
    /// 0 disables the diagonal position prior.
    pub diagonal_tension: f64,
}

impl Default for Aligner {
    fn default() -> Self {
        Aligner {
            iterations: 5,
            diagonal_tension: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sif {
    pub a: f64,
    /// "sif" or "arithmetic".
    pub weighting: String,
}

impl Default for Sif {
    fn default() -> Self {
        Sif {
            a: 1e-3,
            weighting: "sif".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mapping {
    /// "word" | "sentence" | "contextual"; empty means "infer from the
    /// dictionary provenance".
    pub level: String,
    /// "on" | "off" | "default" (per-level default).
    pub normalize: String,
}

impl Default for Mapping {
    fn default() -> Self {
        Mapping {
            level: String::new(),
            normalize: "default".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dictionary {
    /// "static" | "prob" | "contextual" | "sentence".
    pub kind: String,
    pub cap: usize,
}

impl Default for Dictionary {
    fn default() -> Self {
        Dictionary {
            kind: "prob".into(),
            cap: xlmap::dict::DEFAULT_DICTIONARY_CAP,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    /// Empty means the default doubling schedule.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// System presets: "dict" | "word" | "ctx" | "sent".
    #[serde(default = "default_curve_systems")]
    pub systems: Vec<String>,
    /// Sentence embedding scheme for the curve: "static-arith" |
    /// "static-sif" | "token".
    #[serde(default = "default_curve_embeddings")]
    pub embeddings: String,
}

fn default_curve_systems() -> Vec<String> {
    vec!["word".into(), "sent".into()]
}

fn default_curve_embeddings() -> String {
    "token".into()
}

impl Default for Curve {
    fn default() -> Self {
        Curve {
            sizes: Vec::new(),
            systems: default_curve_systems(),
            embeddings: default_curve_embeddings(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eval {
    /// Neighborhood sizes for word translation precision.
    pub k: Vec<usize>,
    /// "static" | "token" | "auto" — how eval sentences are embedded.
    pub embeddings: String,
}

impl Default for Eval {
    fn default() -> Self {
        Eval {
            k: vec![1, 5],
            embeddings: "auto".into(),
        }
    }
}

impl PipelineConfig {
    /// Parse a config file and resolve its relative paths against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&path);
                }
            }
        };
        if let Some(dir) = &mut self.output_dir {
            if dir.is_relative() {
                *dir = base.join(&dir);
            }
        }
        let paths = &mut self.paths;
        for p in [
            &mut paths.src_vectors,
            &mut paths.tgt_vectors,
            &mut paths.src_text,
            &mut paths.tgt_text,
            &mut paths.src_tokens,
            &mut paths.tgt_tokens,
            &mut paths.static_dict,
            &mut paths.test_src_text,
            &mut paths.test_tgt_text,
            &mut paths.test_src_tokens,
            &mut paths.test_tgt_tokens,
            &mut paths.gold_translations,
            &mut paths.gold_similarity,
            &mut paths.src_mono,
            &mut paths.tgt_mono,
            &mut paths.dictionary,
            &mut paths.map,
            &mut paths.target_map,
        ] {
            resolve(p);
        }
    }

    /// The output directory, defaulting to `out` next to nothing in
    /// particular — callers should have set it; fall back to the current
    /// directory's `out/`.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Fetch a required path from the config, verifying it exists on disk.
pub fn require_path<'a>(
    path: &'a Option<PathBuf>,
    key: &str,
) -> Result<&'a PathBuf, CliError> {
    let path = path
        .as_ref()
        .ok_or_else(|| CliError::usage(format!("config is missing paths.{key}")))?;
    if !path.exists() {
        return Err(CliError::usage(format!(
            "paths.{key} does not exist: {}",
            path.display()
        )));
    }
    Ok(path)
}
