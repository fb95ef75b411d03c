//! Small dense linear algebra kernels for per-arm bandit state.
//!
//! Matrices are row-major `Vec<T>` of length `d*d`; dimensions here are tiny
//! (tens at most), so plain loops beat pulling in a matrix crate.

use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn mat_vec<T: Scalar>(m: &[T], dim: usize, x: &[T]) -> Vec<T> {
    (0..dim)
        .map(|i| dot(&m[i * dim..(i + 1) * dim], x))
        .collect()
}

/// `m += x x^T`.
pub fn add_outer<T: Scalar>(m: &mut [T], dim: usize, x: &[T]) {
    for i in 0..dim {
        for j in 0..dim {
            m[i * dim + j] += x[i] * x[j];
        }
    }
}

/// Rank-one Sherman-Morrison update of a maintained inverse:
/// `inv <- (A + x x^T)^{-1}` given `inv = A^{-1}`.
///
/// The result is symmetrized after the update so long update sequences do
/// not drift off the symmetric manifold.
pub fn sherman_morrison_update<T: Scalar>(inv: &mut [T], dim: usize, x: &[T]) {
    let inv_x = mat_vec(inv, dim, x);
    let denom = T::one() + dot(x, &inv_x);
    for i in 0..dim {
        for j in 0..dim {
            inv[i * dim + j] -= inv_x[i] * inv_x[j] / denom;
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = (inv[i * dim + j] + inv[j * dim + i]) / (T::one() + T::one());
            inv[i * dim + j] = avg;
            inv[j * dim + i] = avg;
        }
    }
}

pub fn identity<T: Scalar>(dim: usize) -> Vec<T> {
    let mut m = vec![T::zero(); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = T::one();
    }
    m
}
