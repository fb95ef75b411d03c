//! LinUCB: disjoint linear payoff model per arm with UCB selection.
//!
//! Each arm `o` keeps a ridge design matrix `A_o` (initialized to the
//! identity), a response vector `b_o`, and coefficients `theta_o`. The score
//! of arm `o` at context `x` is
//!
//! ```text
//!   UCB_o(x) = theta_o^T x + alpha * sqrt(x^T A_o^{-1} x)
//! ```
//!
//! and an observed reward updates `A_o += x x^T`, `b_o += r x`,
//! `theta_o = A_o^{-1} b_o`. The inverse is maintained incrementally by
//! rank-one Sherman-Morrison updates (O(d^2) per step); no dense solve
//! happens outside of test oracles.

use serde::{Deserialize, Serialize};

use crate::bandit::BanditPolicy;
use crate::error::{Error, Result};
use crate::linalg::{add_outer, dot, identity, mat_vec, sherman_morrison_update};
use crate::scalar::{from_f64, Scalar};

/// Coefficient update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaUpdate {
    /// `theta = A^{-1} b` with `b = sum(r x)`: the ridge-regression form.
    #[default]
    Accumulating,
    /// `theta = A^{-1} (x r)` from the latest observation only, kept as a
    /// compatibility mode for reproduction attempts.
    LastSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinUcbConfig {
    /// Exploration weight on the confidence term (default 1.0).
    pub alpha: f64,
    pub theta_update: ThetaUpdate,
}

impl Default for LinUcbConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            theta_update: ThetaUpdate::Accumulating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ArmModel<T> {
    /// Design matrix `A_o`, symmetric positive definite.
    a: Vec<T>,
    /// Maintained `A_o^{-1}`.
    a_inv: Vec<T>,
    /// Accumulated response `b_o = sum(r x)`.
    b: Vec<T>,
    /// Coefficients.
    theta: Vec<T>,
}

impl<T: Scalar> ArmModel<T> {
    fn new(dim: usize) -> Self {
        Self {
            a: identity(dim),
            a_inv: identity(dim),
            b: vec![T::zero(); dim],
            theta: vec![T::zero(); dim],
        }
    }
}

/// Disjoint-arms LinUCB state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinUcb<T> {
    dim: usize,
    alpha: T,
    theta_update: ThetaUpdate,
    arms: Vec<ArmModel<T>>,
}

impl<T: Scalar> LinUcb<T> {
    pub fn new(dim: usize, arms: usize, config: LinUcbConfig) -> Result<Self> {
        if dim == 0 || arms == 0 {
            return Err(Error::InvalidConfig(
                "LinUCB needs dim >= 1 and at least one arm".into(),
            ));
        }
        if !config.alpha.is_finite() || config.alpha <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive and finite, got {}",
                config.alpha
            )));
        }
        Ok(Self {
            dim,
            alpha: from_f64(config.alpha),
            theta_update: config.theta_update,
            arms: (0..arms).map(|_| ArmModel::new(dim)).collect(),
        })
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.arms.len() {
            return Err(Error::ArmIndexOutOfRange {
                index: arm,
                arms: self.arms.len(),
            });
        }
        Ok(())
    }

    /// `theta_o^T x + alpha * sqrt(x^T A_o^{-1} x)`. Pure.
    pub fn ucb_score(&self, arm: usize, x: &[T]) -> Result<T> {
        self.check_arm(arm)?;
        self.check_dim(x)?;
        let model = &self.arms[arm];
        let mean = dot(&model.theta, x);
        let inv_x = mat_vec(&model.a_inv, self.dim, x);
        // Clamp tiny negative round-off before the square root.
        let width = dot(x, &inv_x).max(T::zero());
        Ok(mean + self.alpha * width.sqrt())
    }

    /// Argmax of `ucb_score` over arms; ties break to the lowest index.
    pub fn select_arm(&self, x: &[T]) -> Result<usize> {
        self.check_dim(x)?;
        let mut best = 0usize;
        let mut best_score = self.ucb_score(0, x)?;
        for arm in 1..self.arms.len() {
            let score = self.ucb_score(arm, x)?;
            if score > best_score {
                best = arm;
                best_score = score;
            }
        }
        Ok(best)
    }

    /// Fold one observation into the chosen arm's model; other arms are
    /// untouched.
    pub fn update_arm(&mut self, arm: usize, x: &[T], reward: T) -> Result<()> {
        self.check_arm(arm)?;
        self.check_dim(x)?;
        let dim = self.dim;
        let model = &mut self.arms[arm];
        add_outer(&mut model.a, dim, x);
        sherman_morrison_update(&mut model.a_inv, dim, x);
        for (b_i, &x_i) in model.b.iter_mut().zip(x) {
            *b_i += reward * x_i;
        }
        model.theta = match self.theta_update {
            ThetaUpdate::Accumulating => mat_vec(&model.a_inv, dim, &model.b),
            ThetaUpdate::LastSample => {
                let scaled: Vec<T> = x.iter().map(|&v| v * reward).collect();
                mat_vec(&model.a_inv, dim, &scaled)
            }
        };
        Ok(())
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Coefficients of one arm.
    pub fn theta(&self, arm: usize) -> Result<&[T]> {
        self.check_arm(arm)?;
        Ok(&self.arms[arm].theta)
    }

    /// Design matrix of one arm (row-major `dim * dim`).
    pub fn design_matrix(&self, arm: usize) -> Result<&[T]> {
        self.check_arm(arm)?;
        Ok(&self.arms[arm].a)
    }

    /// Maintained inverse of one arm's design matrix.
    pub fn design_inverse(&self, arm: usize) -> Result<&[T]> {
        self.check_arm(arm)?;
        Ok(&self.arms[arm].a_inv)
    }

    /// Accumulated response vector of one arm.
    pub fn response(&self, arm: usize) -> Result<&[T]> {
        self.check_arm(arm)?;
        Ok(&self.arms[arm].b)
    }
}

impl<T: Scalar> BanditPolicy<T> for LinUcb<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn arm_count(&self) -> usize {
        self.arms.len()
    }

    fn select(&mut self, x: &[T]) -> Result<usize> {
        self.select_arm(x)
    }

    fn update(&mut self, arm: usize, x: &[T], reward: T) -> Result<()> {
        self.update_arm(arm, x, reward)
    }
}
