//! Learning and applying orthogonal maps between embedding spaces.
//!
//! A map is learned from a [`MappingDictionary`] by the Procrustes solver,
//! optionally unit-normalizing dictionary columns first. Word-level and
//! contextual dictionaries normalize by default (retrieval downstream is
//! cosine-based); sentence dictionaries do not, since averaged embeddings
//! carry meaningful mass. Applying a map never normalizes: it is a pure
//! isometry.

use std::io::{BufRead, Write};

use crate::dict::MappingDictionary;
use crate::error::{Error, Result};
use crate::io::EmbeddingTable;
use crate::matrix::DenseMatrix;
use crate::procrustes::{solve_procrustes, MappingLevel, OrthogonalMap};

/// How to treat a dictionary before solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingPolicy {
    /// Unit-normalize every dictionary column before solving.
    pub normalize_dictionary: bool,
    pub level: MappingLevel,
}

impl MappingPolicy {
    /// The default policy for each level: normalize word and contextual
    /// dictionaries, leave sentence embeddings as they are.
    pub fn for_level(level: MappingLevel) -> Self {
        MappingPolicy {
            normalize_dictionary: !matches!(level, MappingLevel::Sentence),
            level,
        }
    }
}

/// Learn an orthogonal map from dictionary pairs under the given policy.
pub fn learn_mapping(dict: &MappingDictionary, policy: &MappingPolicy) -> Result<OrthogonalMap> {
    let map = if policy.normalize_dictionary {
        let src = dict.source().normalize_columns()?;
        let tgt = dict.target().normalize_columns()?;
        solve_procrustes(&src, &tgt)?
    } else {
        solve_procrustes(dict.source(), dict.target())?
    };
    Ok(map.with_provenance(dict.source_space(), dict.target_space(), policy.level))
}

/// Transform every vector of a table by the map. Vocabulary and ordering are
/// unchanged; the result lives in the map's target space.
pub fn map_words(map: &OrthogonalMap, table: &EmbeddingTable) -> Result<EmbeddingTable> {
    if table.dim() != map.dim() {
        return Err(Error::DimMismatch {
            source_dim: map.dim(),
            target_dim: table.dim(),
        });
    }
    let mut mapped = EmbeddingTable::new(table.dim(), map.target_space());
    for (token, vector) in table.iter() {
        mapped.push(token, map.apply_vec(vector)?)?;
    }
    Ok(mapped)
}

/// Validate that two maps share a pivot target space, enabling zero-shot
/// retrieval between their source languages: both sides are mapped *into*
/// the pivot and compared there; nothing is inverted.
pub fn to_pivot_pair<'a>(
    src_map: &'a OrthogonalMap,
    tgt_map: &'a OrthogonalMap,
) -> Result<(&'a OrthogonalMap, &'a OrthogonalMap)> {
    if src_map.target_space() != tgt_map.target_space() {
        return Err(Error::PivotMismatch {
            left: src_map.target_space().to_string(),
            right: tgt_map.target_space().to_string(),
        });
    }
    Ok((src_map, tgt_map))
}

// ── map file format ─────────────────────────────────────────────────
//
// Four header lines (dim, level, source, target) followed by `dim` rows of
// `dim` entries printed with 17 significant digits, which round-trips f64
// exactly.

pub fn save_map<W: Write>(map: &OrthogonalMap, writer: &mut W) -> Result<()> {
    writeln!(writer, "dim: {}", map.dim())?;
    writeln!(writer, "level: {}", map.level().as_str())?;
    writeln!(writer, "source: {}", map.source_space())?;
    writeln!(writer, "target: {}", map.target_space())?;
    for i in 0..map.dim() {
        let row = map.matrix().row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                write!(writer, " ")?;
            }
            write!(writer, "{v:.16e}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

pub fn load_map<R: BufRead>(reader: R) -> Result<OrthogonalMap> {
    let mut lines = reader.lines();
    let mut header = |key: &str, line_no: usize| -> Result<String> {
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::UnexpectedEof { line: line_no }),
        };
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(": ").or(rest.strip_prefix(":")))
            .map(str::to_string)
            .ok_or_else(|| Error::BadHeader {
                detail: format!("expected '{key}: ...', got {line:?}"),
            })
    };
    let dim: usize = header("dim", 1)?.trim().parse().map_err(|_| Error::BadHeader {
        detail: "bad dim".into(),
    })?;
    let level = MappingLevel::parse(header("level", 2)?.trim()).ok_or_else(|| Error::BadHeader {
        detail: "unknown level".into(),
    })?;
    let source = header("source", 3)?.trim().to_string();
    let target = header("target", 4)?.trim().to_string();

    let mut matrix = DenseMatrix::zeros(dim, dim);
    let mut line_no = 4usize;
    for i in 0..dim {
        line_no += 1;
        let line = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::UnexpectedEof { line: line_no }),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim {
            return Err(Error::DimensionMismatch {
                line: line_no,
                expected: dim,
                found: fields.len(),
            });
        }
        for (j, field) in fields.iter().enumerate() {
            matrix.set(i, j, crate::io::parse_float(field, line_no)?);
        }
    }
    OrthogonalMap::new(matrix, source, target, level)
}
