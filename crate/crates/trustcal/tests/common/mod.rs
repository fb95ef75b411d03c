//! Independent oracles shared by the integration and acceptance suites.
//!
//! Everything here recomputes quantities from first principles (dense
//! inversion, batch solves, brute-force scans) and must stay independent of
//! the library's incremental code paths.

#![allow(dead_code)]

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mat_vec(m: &[f64], d: usize, x: &[f64]) -> Vec<f64> {
    (0..d).map(|i| dot(&m[i * d..(i + 1) * d], x)).collect()
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
pub fn gauss_jordan_inverse(m: &[f64], d: usize) -> Vec<f64> {
    let width = 2 * d;
    let mut aug = vec![0.0f64; d * width];
    for i in 0..d {
        for j in 0..d {
            aug[i * width + j] = m[i * d + j];
        }
        aug[i * width + d + i] = 1.0;
    }
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&a, &b| {
                aug[a * width + col]
                    .abs()
                    .partial_cmp(&aug[b * width + col].abs())
                    .unwrap()
            })
            .unwrap();
        assert!(
            aug[pivot_row * width + col].abs() > 1e-12,
            "singular matrix in oracle"
        );
        if pivot_row != col {
            for j in 0..width {
                aug.swap(col * width + j, pivot_row * width + j);
            }
        }
        let pivot = aug[col * width + col];
        for j in 0..width {
            aug[col * width + j] /= pivot;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = aug[row * width + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..width {
                aug[row * width + j] -= factor * aug[col * width + j];
            }
        }
    }
    let mut inv = vec![0.0f64; d * d];
    for i in 0..d {
        for j in 0..d {
            inv[i * d + j] = aug[i * width + d + j];
        }
    }
    inv
}

/// Batch ridge-regression solution with identity prior:
/// `theta = (I + sum x x^T)^{-1} (sum r x)`, all recomputed from scratch.
pub fn ridge_solution(updates: &[(Vec<f64>, f64)], d: usize) -> Vec<f64> {
    let mut a = vec![0.0f64; d * d];
    for i in 0..d {
        a[i * d + i] = 1.0;
    }
    let mut b = vec![0.0f64; d];
    for (x, r) in updates {
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] += x[i] * x[j];
            }
            b[i] += r * x[i];
        }
    }
    let inv = gauss_jordan_inverse(&a, d);
    mat_vec(&inv, d, &b)
}

/// The design matrix an update history implies: `I + sum x x^T`.
pub fn design_from_updates(updates: &[(Vec<f64>, f64)], d: usize) -> Vec<f64> {
    let mut a = vec![0.0f64; d * d];
    for i in 0..d {
        a[i * d + i] = 1.0;
    }
    for (x, _) in updates {
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] += x[i] * x[j];
            }
        }
    }
    a
}

/// UCB score recomputed from an explicit update history by direct inversion.
pub fn oracle_ucb_score(updates: &[(Vec<f64>, f64)], d: usize, alpha: f64, x: &[f64]) -> f64 {
    let a = design_from_updates(updates, d);
    let inv = gauss_jordan_inverse(&a, d);
    let theta = ridge_solution(updates, d);
    let width = dot(x, &mat_vec(&inv, d, x)).max(0.0);
    dot(&theta, x) + alpha * width.sqrt()
}

/// Cholesky factorization; `None` when the matrix is not positive definite.
pub fn cholesky(m: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0f64; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = m[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Lehmer rank of a permutation (0-based index into lexicographic order).
pub fn permutation_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0usize;
    let mut factorial = 1usize;
    for i in (0..n).rev() {
        let smaller_after = perm[i + 1..].iter().filter(|&&v| v < perm[i]).count();
        rank += smaller_after * factorial;
        factorial *= n - i;
    }
    rank
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}
