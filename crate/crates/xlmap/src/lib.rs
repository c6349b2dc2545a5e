//! Cross-lingual embedding mapping toolkit.
//!
//! Learns orthogonal transforms between independently trained embedding
//! spaces from bilingual dictionaries or parallel corpora, at three levels:
//! static word vectors, contextual token vectors, and averaged sentence
//! vectors. Includes an EM word aligner for dictionary extraction and
//! retrieval/precision/correlation evaluation.

pub mod align;
pub mod dict;
pub mod error;
pub mod eval;
pub mod io;
pub mod mapping;
pub mod matrix;
pub mod procrustes;
pub mod sentence;
pub mod svd;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
pub use matrix::DenseMatrix;
pub use procrustes::{solve_procrustes, MappingLevel, OrthogonalMap};
pub use svd::{thin_svd, SvdResult};
