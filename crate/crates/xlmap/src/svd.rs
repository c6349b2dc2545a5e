//! Singular value decomposition of square matrices by one-sided Jacobi
//! rotations.
//!
//! The solver repeatedly orthogonalizes pairs of columns of a working copy of
//! the input; the accumulated rotations form V, the orthogonalized columns
//! (normalized) form U, and the column norms are the singular values. The
//! sweep order is fixed and there is no pivoting on data-dependent state, so
//! the decomposition is bitwise-deterministic for identical input.
//!
//! Columns whose norm falls to rounding level are frozen and their left
//! singular vectors are filled in afterwards by Gram-Schmidt against the
//! canonical basis; this keeps U orthonormal even for rank-deficient input,
//! which the mapping solver relies on (a dictionary of one pair produces a
//! rank-1 Gram matrix).

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Relative threshold on |a_p . a_q| below which a column pair counts as
/// orthogonal.
const PAIR_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// `U * diag(sigma) * V^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> DenseMatrix {
        let d = self.u.rows();
        let k = self.singular_values.len();
        let mut scaled = DenseMatrix::zeros(d, k);
        for i in 0..d {
            for j in 0..k {
                scaled.set(i, j, self.u.get(i, j) * self.singular_values[j]);
            }
        }
        scaled.matmul(&self.vt).expect("shape fixed by construction")
    }
}

/// Full SVD of a square matrix: `M = U * diag(sigma) * V^T` with singular
/// values sorted nonincreasing.
pub fn thin_svd(m: &DenseMatrix) -> Result<SvdResult> {
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch {
            context: "SVD input must be square",
            left_rows: m.rows(),
            left_cols: m.cols(),
            right_rows: m.cols(),
            right_cols: m.rows(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let d = m.rows();
    if d == 0 {
        return Ok(SvdResult {
            u: DenseMatrix::zeros(0, 0),
            singular_values: vec![],
            vt: DenseMatrix::zeros(0, 0),
        });
    }

    // Working copy as columns; V likewise.
    let mut a: Vec<Vec<f64>> = (0..d).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let scale = a
        .iter()
        .map(|c| norm(c))
        .fold(0.0_f64, f64::max);
    // Columns at rounding level are frozen: rotating two near-zero leftovers
    // of cancellation never converges under the relative pair criterion.
    let negligible = scale * f64::EPSILON;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d - 1 {
            for q in p + 1..d {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                if alpha.sqrt() <= negligible || beta.sqrt() <= negligible {
                    continue;
                }
                let gamma = dot(&a[p], &a[q]);
                if gamma.abs() <= PAIR_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    // Sort by singular value, descending; ties keep the original order.
    let mut order: Vec<usize> = (0..d).collect();
    let norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .expect("norms are finite")
            .then(i.cmp(&j))
    });

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut sigma = Vec::with_capacity(d);
    let mut pending: Vec<usize> = Vec::new(); // output slots needing completion
    for (slot, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > negligible {
            u_cols.push(a[j].iter().map(|x| x / norms[j]).collect());
        } else {
            u_cols.push(vec![0.0; d]);
            pending.push(slot);
        }
    }
    for slot in pending {
        u_cols[slot] = complete_column(&u_cols, d);
    }

    let u = DenseMatrix::from_columns(d, u_cols.iter().map(|c| c.as_slice()))?;
    let vt_rows: Vec<&[f64]> = order.iter().map(|&j| v[j].as_slice()).collect();
    // Rows of V^T are the right singular vectors, i.e. the columns of V.
    let vt = {
        let mut out = DenseMatrix::zeros(d, d);
        for (i, r) in vt_rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                out.set(i, j, x);
            }
        }
        out
    };

    Ok(SvdResult {
        u,
        singular_values: sigma,
        vt,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let d = cols[p].len();
    for i in 0..d {
        let xp = cols[p][i];
        let xq = cols[q][i];
        cols[p][i] = c * xp - s * xq;
        cols[q][i] = s * xp + c * xq;
    }
}

/// Pick the canonical basis vector farthest from the span of the nonzero
/// columns collected so far, orthogonalize, normalize. Deterministic: the
/// smallest index wins ties.
fn complete_column(existing: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..d {
        let mut cand = vec![0.0; d];
        cand[k] = 1.0;
        for col in existing.iter().filter(|c| norm(c) > 0.5) {
            let proj = dot(&cand, col);
            for i in 0..d {
                cand[i] -= proj * col[i];
            }
        }
        let residual = norm(&cand);
        if best.as_ref().map_or(true, |(r, _)| residual > *r) {
            best = Some((residual, cand));
        }
    }
    let (residual, mut col) = best.expect("d >= 1");
    // Span of fewer than d unit vectors always leaves some basis vector with
    // residual^2 >= 1/d.
    debug_assert!(residual > 0.0);
    for x in &mut col {
        *x /= residual;
    }
    // Second orthogonalization pass for numerical hygiene at small residuals.
    let snapshot = col.clone();
    for other in existing.iter().filter(|c| norm(c) > 0.5) {
        let proj = dot(&snapshot, other);
        for i in 0..d {
            col[i] -= proj * other[i];
        }
    }
    let n = norm(&col);
    for x in &mut col {
        *x /= n;
    }
    col
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(d: usize, rng: &mut impl Rng) -> DenseMatrix {
        let data: Vec<f64> = (0..d * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        DenseMatrix::from_vec(d, d, data).unwrap()
    }

    fn check_invariants(m: &DenseMatrix, svd: &SvdResult, tol: f64) {
        for w in svd.singular_values.windows(2) {
            assert!(w[0] >= w[1], "singular values not sorted: {w:?}");
        }
        assert!(svd.singular_values.iter().all(|&s| s >= 0.0));
        assert!(
            svd.u.orthogonality_residual() <= 1e-8,
            "U not orthonormal: {}",
            svd.u.orthogonality_residual()
        );
        assert!(
            svd.vt.transpose().orthogonality_residual() <= 1e-8,
            "V not orthonormal"
        );
        let recon = svd.reconstruct();
        let err = recon.max_abs_diff(m);
        let bound = tol * 1.0_f64.max(m.max_abs());
        assert!(err <= bound, "reconstruction error {err} > {bound}");
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let m = DenseMatrix::identity(3);
        let svd = thin_svd(&m).unwrap();
        assert_eq!(svd.singular_values, vec![1.0, 1.0, 1.0]);
        // U equals the identity up to column signs.
        for j in 0..3 {
            let col = svd.u.column(j);
            let mag: Vec<f64> = col.iter().map(|x| x.abs()).collect();
            let mut expected = vec![0.0; 3];
            expected[j] = 1.0;
            for (a, b) in mag.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        check_invariants(&m, &svd, 1e-12);
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let m = DenseMatrix::from_vec(3, 3, vec![3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0])
            .unwrap();
        let svd = thin_svd(&m).unwrap();
        assert_eq!(svd.singular_values, vec![3.0, 2.0, 1.0]);
        check_invariants(&m, &svd, 1e-12);
    }

    #[test]
    fn exchange_matrix_reconstructs() {
        let m = DenseMatrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert!((svd.singular_values[0] - 1.0).abs() < 1e-12);
        assert!((svd.singular_values[1] - 1.0).abs() < 1e-12);
        assert!(svd.reconstruct().max_abs_diff(&m) <= 1e-12);
    }

    #[test]
    fn rank_one_matrix() {
        // Outer product of unit vectors: one singular value, completed basis.
        let y = [0.6, 0.8, 0.0];
        let x = [0.0, 0.0, 1.0];
        let mut data = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                data[i * 3 + j] = y[i] * x[j];
            }
        }
        let m = DenseMatrix::from_vec(3, 3, data).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert!((svd.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(svd.singular_values[1] <= 1e-12);
        check_invariants(&m, &svd, 1e-10);
    }

    #[test]
    fn zero_matrix() {
        let m = DenseMatrix::zeros(4, 4);
        let svd = thin_svd(&m).unwrap();
        assert!(svd.singular_values.iter().all(|&s| s == 0.0));
        assert!(svd.u.orthogonality_residual() <= 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let m = DenseMatrix::from_vec(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap();
        match thin_svd(&m) {
            Err(Error::NonFinite) => {}
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square() {
        let m = DenseMatrix::zeros(2, 3);
        assert!(matches!(thin_svd(&m), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn random_matrices_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2, 3, 5, 8, 16, 33] {
            let m = random_matrix(d, &mut rng);
            let svd = thin_svd(&m).unwrap();
            check_invariants(&m, &svd, 1e-10);
        }
    }

    #[test]
    fn deterministic_given_identical_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(12, &mut rng);
        let a = thin_svd(&m).unwrap();
        let b = thin_svd(&m).unwrap();
        assert_eq!(a.u.data(), b.u.data());
        assert_eq!(a.singular_values, b.singular_values);
        assert_eq!(a.vt.data(), b.vt.data());
    }
}
