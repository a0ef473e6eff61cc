//! QR factorization in a weighted inner product.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row weights defining the inner product `<f,g> = sum_i w_i f_i g_i`.
///
/// The spatial midpoint rule weights every staggered-grid point equally, so
/// it only needs the scalar; the velocity quadrature carries one weight per
/// node.
#[derive(Clone, Copy)]
pub enum RowWeights<'a> {
    Uniform(f64),
    PerRow(&'a [f64]),
}

impl RowWeights<'_> {
    #[inline]
    pub fn dot(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        match self {
            RowWeights::Uniform(h) => h * a.dot(b),
            RowWeights::PerRow(w) => {
                let mut acc = 0.0;
                for i in 0..a.len() {
                    acc += w[i] * a[i] * b[i];
                }
                acc
            }
        }
    }

    #[inline]
    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.dot(a, a).sqrt()
    }

    /// `out = w (*) a` (elementwise).
    fn apply(&self, a: &DVector<f64>, out: &mut DVector<f64>) {
        match self {
            RowWeights::Uniform(h) => {
                out.copy_from(a);
                out.scale_mut(*h);
            }
            RowWeights::PerRow(w) => {
                for i in 0..a.len() {
                    out[i] = w[i] * a[i];
                }
            }
        }
    }
}

/// Deterministic pseudo-random vector used to replace dependent columns;
/// distinct per (seed, column, attempt).
fn filler(len: usize, seed: u64, column: usize, attempt: usize) -> DVector<f64> {
    let mix = seed
        ^ (column as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ ((attempt as u64) << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    DVector::from_fn(len, |_, _| rng.gen_range(-1.0..1.0))
}

/// Decompose `a = Q R` with `Q` orthonormal in the weighted inner product
/// and `R` upper triangular with nonnegative diagonal.
///
/// Classical Gram-Schmidt with one reorthogonalization pass. Columns whose
/// pivot falls below `1e-13` times the weighted norm of the input are
/// replaced by deterministic pseudo-random vectors (orthogonalized against
/// the preceding ones) and their `R` row is zeroed; dropping those
/// round-off-level components keeps `Q R = a` to working accuracy while
/// guaranteeing a full orthonormal basis.
pub fn weighted_qr(
    a: &DMatrix<f64>,
    weights: RowWeights<'_>,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, r) = a.shape();
    if r > n {
        return Err(Error::DimensionMismatch(format!(
            "weighted_qr: {r} columns exceed {n} rows"
        )));
    }
    let mut q = DMatrix::zeros(n, r);
    let mut rmat = DMatrix::zeros(r, r);
    let mut replaced = vec![false; r];

    // Weighted Frobenius norm of the input sets the degeneracy scale.
    let mut total = 0.0;
    for j in 0..r {
        let col = a.column(j).clone_owned();
        total += weights.dot(&col, &col);
    }
    let threshold = 1e-13 * total.sqrt();

    let mut scratch = DVector::zeros(n);
    for j in 0..r {
        let mut v = a.column(j).clone_owned();
        if j > 0 {
            let q_prev = q.columns(0, j);
            for _ in 0..2 {
                weights.apply(&v, &mut scratch);
                let h = q_prev.tr_mul(&scratch);
                v.gemv(-1.0, &q_prev, &h, 1.0);
                for i in 0..j {
                    rmat[(i, j)] += h[i];
                }
            }
        }
        let mut norm = weights.norm(&v);
        if norm <= threshold || !norm.is_finite() {
            // Dependent column: bring in a deterministic replacement.
            replaced[j] = true;
            for attempt in 0.. {
                v = filler(n, seed, j, attempt);
                if j > 0 {
                    let q_prev = q.columns(0, j);
                    for _ in 0..2 {
                        weights.apply(&v, &mut scratch);
                        let h = q_prev.tr_mul(&scratch);
                        v.gemv(-1.0, &q_prev, &h, 1.0);
                    }
                }
                norm = weights.norm(&v);
                if norm > 1e-8 * (n as f64).sqrt() {
                    break;
                }
                assert!(attempt < 16, "could not complete orthonormal basis");
            }
        }
        v.scale_mut(1.0 / norm);
        q.set_column(j, &v);
        if !replaced[j] {
            rmat[(j, j)] = norm;
        }
    }
    // Zero the rows of replaced pivots: those Q columns carry no part of the
    // input beyond round-off.
    for (j, rep) in replaced.iter().enumerate() {
        if *rep {
            for l in 0..r {
                rmat[(j, l)] = 0.0;
            }
        }
    }
    Ok((q, rmat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ortho_defect(q: &DMatrix<f64>, w: RowWeights<'_>) -> f64 {
        let r = q.ncols();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i..r {
                let d = w.dot(&q.column(i).clone_owned(), &q.column(j).clone_owned());
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - expect).abs());
            }
        }
        worst
    }

    #[test]
    fn orthonormal_input_passes_through() {
        // Build an orthonormal set under uniform weight h.
        let h = 0.25;
        let n = 16;
        let scale = 1.0 / (h * n as f64 / 2.0).sqrt();
        let mut a = DMatrix::zeros(n, 2);
        for i in 0..n {
            a[(i, 0)] = if i < n / 2 { scale } else { 0.0 };
            a[(i, 1)] = if i >= n / 2 { scale } else { 0.0 };
        }
        let (q, r) = weighted_qr(&a, RowWeights::Uniform(h), 0).unwrap();
        assert_abs_diff_eq!((&q - &a).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(1, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(0, 1)], 0.0, epsilon = 1e-12);

        let (q2, r2) = weighted_qr(&(2.0 * &a), RowWeights::Uniform(h), 0).unwrap();
        assert_abs_diff_eq!((&q2 - &a).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2[(1, 1)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_input_is_completed() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 32;
        let base = DVector::<f64>::from_fn(n, |_, _| rng.gen_range(-1.0f64..1.0));
        let mut a = DMatrix::zeros(n, 3);
        a.set_column(0, &(2.0 * &base));
        a.set_column(1, &(-0.5 * &base));
        a.set_column(2, &(3.0 * &base));
        let w = RowWeights::Uniform(1.0);
        let (q, r) = weighted_qr(&a, w, 42).unwrap();
        assert!(ortho_defect(&q, w) < 1e-12);
        // Rows 2 and 3 of R vanish, and Q R still reproduces the input.
        for l in 0..3 {
            assert_eq!(r[(1, l)], 0.0);
            assert_eq!(r[(2, l)], 0.0);
        }
        assert_abs_diff_eq!((&q * &r - &a).norm(), 0.0, epsilon = 1e-12 * a.norm());
        // Same seed, same completion.
        let (q2, _) = weighted_qr(&a, w, 42).unwrap();
        assert_eq!(q, q2);
    }

    #[test]
    fn per_row_weights_orthonormalize() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 40;
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let a = DMatrix::<f64>::from_fn(n, 5, |_, _| rng.gen_range(-1.0..1.0));
        let (q, r) = weighted_qr(&a, RowWeights::PerRow(&w), 0).unwrap();
        assert!(ortho_defect(&q, RowWeights::PerRow(&w)) < 1e-12);
        assert_abs_diff_eq!((&q * &r - &a).norm(), 0.0, epsilon = 1e-11 * a.norm());
        for j in 0..5 {
            assert!(r[(j, j)] >= 0.0);
        }
    }

    #[test]
    fn column_count_must_not_exceed_rows() {
        let a = DMatrix::<f64>::zeros(3, 5);
        assert!(weighted_qr(&a, RowWeights::Uniform(1.0), 0).is_err());
    }
}
