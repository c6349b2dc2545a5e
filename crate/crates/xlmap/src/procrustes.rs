//! Orthogonal Procrustes solver.
//!
//! Given paired column matrices `X` (source vectors) and `Y` (target vectors),
//! find the orthogonal `R` minimizing the Frobenius distance between `R*X` and
//! `Y`. The minimizer is `R = U*V^T` from the SVD of the Gram product
//! `Y*X^T`. No determinant correction is applied: reflections are legitimate
//! minimizers and are kept as-is.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::svd::thin_svd;

/// Which representation level a mapping was learned from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingLevel {
    Word,
    Sentence,
    Contextual,
}

impl MappingLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            MappingLevel::Word => "word",
            MappingLevel::Sentence => "sentence",
            MappingLevel::Contextual => "contextual",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "word" => Some(MappingLevel::Word),
            "sentence" => Some(MappingLevel::Sentence),
            "contextual" => Some(MappingLevel::Contextual),
            _ => None,
        }
    }
}

/// Residual bound enforced on `R^T R - I` when a map is constructed.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// A `d x d` orthogonal transform between two embedding spaces, plus
/// provenance: which spaces it connects and at which level it was learned.
#[derive(Debug, Clone)]
pub struct OrthogonalMap {
    matrix: DenseMatrix,
    source_space: String,
    target_space: String,
    level: MappingLevel,
}

impl OrthogonalMap {
    /// Wrap a matrix, verifying squareness and orthogonality.
    pub fn new(
        matrix: DenseMatrix,
        source_space: impl Into<String>,
        target_space: impl Into<String>,
        level: MappingLevel,
    ) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::ShapeMismatch {
                context: "orthogonal map must be square",
                left_rows: matrix.rows(),
                left_cols: matrix.cols(),
                right_rows: matrix.cols(),
                right_cols: matrix.rows(),
            });
        }
        let residual = matrix.orthogonality_residual();
        if !residual.is_finite() || residual > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
        Ok(OrthogonalMap {
            matrix,
            source_space: source_space.into(),
            target_space: target_space.into(),
            level,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn source_space(&self) -> &str {
        &self.source_space
    }

    pub fn target_space(&self) -> &str {
        &self.target_space
    }

    pub fn level(&self) -> MappingLevel {
        self.level
    }

    /// Same transform, relabelled with provenance metadata.
    pub fn with_provenance(
        mut self,
        source_space: impl Into<String>,
        target_space: impl Into<String>,
        level: MappingLevel,
    ) -> Self {
        self.source_space = source_space.into();
        self.target_space = target_space.into();
        self.level = level;
        self
    }

    /// `R * V` for a `d x m` matrix of column vectors.
    pub fn apply(&self, v: &DenseMatrix) -> Result<DenseMatrix> {
        if v.rows() != self.dim() {
            return Err(Error::ShapeMismatch {
                context: "vector dimension does not match map",
                left_rows: self.dim(),
                left_cols: self.dim(),
                right_rows: v.rows(),
                right_cols: v.cols(),
            });
        }
        self.matrix.matmul(v)
    }

    /// `R * x` for a single vector.
    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                context: "vector dimension does not match map",
                left_rows: self.dim(),
                left_cols: self.dim(),
                right_rows: x.len(),
                right_cols: 1,
            });
        }
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.matrix.row(i);
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(out)
    }
}

/// Solve for the orthogonal `R` minimizing `||R*X - Y||_F` over paired
/// columns. The returned map carries no space labels; callers attach
/// provenance with [`OrthogonalMap::with_provenance`].
pub fn solve_procrustes(x: &DenseMatrix, y: &DenseMatrix) -> Result<OrthogonalMap> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::ShapeMismatch {
            context: "paired matrices must have identical shape",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: y.rows(),
            right_cols: y.cols(),
        });
    }
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::EmptyDictionary);
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::NonFinite);
    }
    let gram = y.mul_transpose(x)?; // Y * X^T, d x d
    let svd = thin_svd(&gram)?;
    let r = svd.u.matmul(&svd.vt)?;
    OrthogonalMap::new(r, "", "", MappingLevel::Word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::random_orthogonal;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_pairs(d: usize, n: usize, rng: &mut impl Rng) -> DenseMatrix {
        let data: Vec<f64> = (0..d * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseMatrix::from_vec(d, n, data).unwrap()
    }

    #[test]
    fn identical_inputs_recover_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_pairs(6, 30, &mut rng);
        let map = solve_procrustes(&x, &x).unwrap();
        let residual = map.matrix().max_abs_diff(&DenseMatrix::identity(6));
        assert!(residual <= 1e-10, "R != I: {residual}");
    }

    #[test]
    fn recovers_planted_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 10;
        let planted = random_orthogonal(d, &mut rng);
        let x = random_pairs(d, 50, &mut rng);
        let y = planted.matmul(&x).unwrap();
        let map = solve_procrustes(&x, &y).unwrap();
        let err = map.matrix().max_abs_diff(&planted);
        assert!(err <= 1e-8, "recovery error {err}");
        assert!(map.matrix().orthogonality_residual() <= ORTHOGONALITY_TOL);
    }

    #[test]
    fn single_pair_maps_x_onto_y() {
        // Rank-1 Gram product: the map still sends x exactly to y.
        let x = DenseMatrix::from_vec(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let y = DenseMatrix::from_vec(3, 1, vec![0.0, 0.6, 0.8]).unwrap();
        let map = solve_procrustes(&x, &y).unwrap();
        let mapped = map.apply(&x).unwrap();
        assert!(mapped.max_abs_diff(&y) <= 1e-10);
    }

    #[test]
    fn shape_and_finite_errors() {
        let x = DenseMatrix::zeros(3, 4);
        let y = DenseMatrix::zeros(3, 5);
        assert!(matches!(
            solve_procrustes(&x, &y),
            Err(Error::ShapeMismatch { .. })
        ));
        let bad = DenseMatrix::from_vec(1, 1, vec![f64::INFINITY]).unwrap();
        let good = DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap();
        assert!(matches!(
            solve_procrustes(&bad, &good),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn apply_identity_and_rotation() {
        let id = OrthogonalMap::new(DenseMatrix::identity(2), "a", "b", MappingLevel::Word)
            .unwrap();
        let v = DenseMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(id.apply(&v).unwrap().data(), v.data());

        // 90-degree planar rotation sends (1,0) to (0,1).
        let rot = OrthogonalMap::new(
            DenseMatrix::from_vec(2, 2, vec![0.0, -1.0, 1.0, 0.0]).unwrap(),
            "a",
            "b",
            MappingLevel::Word,
        )
        .unwrap();
        let e0 = rot.apply_vec(&[1.0, 0.0]).unwrap();
        assert!((e0[0] - 0.0).abs() <= 1e-12 && (e0[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let id = OrthogonalMap::new(DenseMatrix::identity(3), "a", "b", MappingLevel::Word)
            .unwrap();
        assert!(matches!(
            id.apply(&DenseMatrix::zeros(2, 1)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_non_orthogonal() {
        let skew = DenseMatrix::from_vec(2, 2, vec![1.0, 0.5, 0.0, 1.0]).unwrap();
        assert!(matches!(
            OrthogonalMap::new(skew, "a", "b", MappingLevel::Word),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn preserves_norms_and_pairwise_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = 12;
        let map = OrthogonalMap::new(
            random_orthogonal(d, &mut rng),
            "a",
            "b",
            MappingLevel::Word,
        )
        .unwrap();
        let v = random_pairs(d, 20, &mut rng);
        let mapped = map.apply(&v).unwrap();
        for j in 0..v.cols() {
            let before = v.column_norm(j);
            let after = mapped.column_norm(j);
            assert!((before - after).abs() <= 1e-8);
        }
        // Pairwise distances between the first few columns.
        for a in 0..4 {
            for b in 0..4 {
                let dist = |m: &DenseMatrix| -> f64 {
                    (0..d)
                        .map(|i| {
                            let diff = m.get(i, a) - m.get(i, b);
                            diff * diff
                        })
                        .sum::<f64>()
                        .sqrt()
                };
                assert!((dist(&v) - dist(&mapped)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn beats_random_orthogonal_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 8;
        let x = random_pairs(d, 40, &mut rng);
        let noise = random_pairs(d, 40, &mut rng);
        let planted = random_orthogonal(d, &mut rng);
        let mut y = planted.matmul(&x).unwrap();
        for i in 0..d {
            for j in 0..40 {
                y.set(i, j, y.get(i, j) + 0.05 * noise.get(i, j));
            }
        }
        let map = solve_procrustes(&x, &y).unwrap();
        let residual = |r: &DenseMatrix| -> f64 {
            let rx = r.matmul(&x).unwrap();
            let mut acc = 0.0;
            for (a, b) in rx.data().iter().zip(y.data()) {
                acc += (a - b) * (a - b);
            }
            acc.sqrt()
        };
        let best = residual(map.matrix());
        for _ in 0..100 {
            let q = random_orthogonal(d, &mut rng);
            assert!(best <= residual(&q) + 1e-9);
        }
    }

    #[test]
    fn noise_averages_out_as_pairs_grow() {
        // With Y = Q*X + noise, recovery error should shrink in expectation
        // as the dictionary grows.
        let d = 8;
        let sizes = [16usize, 64, 256];
        let mut mean_err = [0.0f64; 3];
        let seeds = 24;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let planted = random_orthogonal(d, &mut rng);
            for (k, &n) in sizes.iter().enumerate() {
                let x = random_pairs(d, n, &mut rng);
                let noise = random_pairs(d, n, &mut rng);
                let mut y = planted.matmul(&x).unwrap();
                for i in 0..d {
                    for j in 0..n {
                        y.set(i, j, y.get(i, j) + 0.2 * noise.get(i, j));
                    }
                }
                let map = solve_procrustes(&x, &y).unwrap();
                let mut acc = 0.0;
                for (a, b) in map.matrix().data().iter().zip(planted.data()) {
                    acc += (a - b) * (a - b);
                }
                mean_err[k] += acc.sqrt();
            }
        }
        for v in &mut mean_err {
            *v /= seeds as f64;
        }
        assert!(
            mean_err[0] > mean_err[1] && mean_err[1] > mean_err[2],
            "errors not decreasing: {mean_err:?}"
        );
    }
}
