//! Contextual bandit policies over the augmented context.
//!
//! Three estimators share one select/update contract: a linear UCB model,
//! an epsilon-greedy regression-tree model, and an epsilon-greedy online
//! MLP. Each maintains per-arm (or per-output-head) reward estimates and
//! learns from bandit feedback only: the reward of the arm it chose.

pub mod ann;
pub mod explore;
pub mod linucb;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

pub use ann::{MlpBandit, MlpConfig};
pub use explore::EpsilonSchedule;
pub use linucb::{LinUcb, LinUcbConfig, ThetaUpdate};
pub use tree::{TreeBandit, TreeBanditConfig};

/// Uniform select/update contract realized by the three algorithm states.
///
/// `select` may advance exploration state (PRNG draws); reward statistics
/// change only through `update`.
pub trait BanditPolicy<T: Scalar>: Send {
    /// Expected context length.
    fn dim(&self) -> usize;

    /// Number of arms.
    fn arm_count(&self) -> usize;

    /// Choose an arm index for the given context.
    fn select(&mut self, x: &[T]) -> Result<usize>;

    /// Feed back the observed reward for the chosen arm.
    fn update(&mut self, arm: usize, x: &[T], reward: T) -> Result<()>;
}

/// Which estimator a replay run builds, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmSpec {
    LinUcb(LinUcbConfig),
    Tree(TreeBanditConfig),
    Ann(MlpConfig),
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::LinUcb(_) => "linucb",
            AlgorithmSpec::Tree(_) => "tree",
            AlgorithmSpec::Ann(_) => "ann",
        }
    }

    /// Build a fresh policy for `dim`-length contexts over `arms` arms.
    ///
    /// `seed` drives all exploration and initialization randomness, so a
    /// (spec, dim, arms, seed) tuple always yields the same policy.
    pub fn build<T: Scalar>(
        &self,
        dim: usize,
        arms: usize,
        seed: u64,
    ) -> Result<Box<dyn BanditPolicy<T>>> {
        Ok(match self {
            AlgorithmSpec::LinUcb(cfg) => Box::new(LinUcb::new(dim, arms, cfg.clone())?),
            AlgorithmSpec::Tree(cfg) => Box::new(TreeBandit::new(dim, arms, cfg.clone(), seed)?),
            AlgorithmSpec::Ann(cfg) => Box::new(MlpBandit::new(dim, arms, cfg.clone(), seed)?),
        })
    }
}
