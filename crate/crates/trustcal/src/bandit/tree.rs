//! Decision-tree contextual bandit: one regression tree per arm, rebuilt on
//! a fixed schedule, with epsilon-greedy exploration.
//!
//! Every observation `(x, r)` joins the chosen arm's replay buffer. Each
//! `retrain_period` trials, every arm's tree is rebuilt from its buffer by
//! greedy variance-reduction splitting: candidate thresholds are midpoints
//! between consecutive sorted distinct feature values (exhaustive, never
//! sampled), subject to a maximum depth and a minimum leaf size, with ties
//! broken to the lowest feature index and then the lowest threshold. Between
//! rebuilds the tree structure is frozen; leaf values are the mean reward of
//! the buffered samples routed there.

use serde::{Deserialize, Serialize};

use crate::bandit::explore::{epsilon_greedy, EpsilonSchedule};
use crate::bandit::BanditPolicy;
use crate::error::{Error, Result};
use crate::rng::Xoshiro256PlusPlus;
use crate::scalar::{from_f64, Scalar};

/// Regression tree node. Routing sends `x[feature] <= threshold` left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode<T> {
    Leaf {
        value: T,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: T,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
}

impl<T: Scalar> TreeNode<T> {
    /// Mean reward of the leaf `x` routes to.
    pub fn predict(&self, x: &[T]) -> T {
        match self.leaf_for(x) {
            TreeNode::Leaf { value, .. } => *value,
            TreeNode::Split { .. } => unreachable!("leaf_for returns leaves"),
        }
    }

    /// The leaf node `x` routes to.
    pub fn leaf_for(&self, x: &[T]) -> &TreeNode<T> {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { .. } => return node,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeBanditConfig {
    /// Rebuild all trees every `retrain_period` trials.
    pub retrain_period: usize,
    pub epsilon: EpsilonSchedule,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeBanditConfig {
    fn default() -> Self {
        Self {
            retrain_period: 50,
            epsilon: EpsilonSchedule::default(),
            max_depth: 6,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ArmTree<T> {
    tree: TreeNode<T>,
    buffer: Vec<(Vec<T>, T)>,
}

impl<T: Scalar> ArmTree<T> {
    fn new() -> Self {
        Self {
            tree: TreeNode::Leaf {
                value: T::zero(),
                count: 0,
            },
            buffer: Vec::new(),
        }
    }
}

/// Decision-tree bandit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeBandit<T> {
    dim: usize,
    config: TreeBanditConfig,
    arms: Vec<ArmTree<T>>,
    /// Completed updates (the trial counter for the retrain schedule).
    updates: usize,
    rng: Xoshiro256PlusPlus,
}

impl<T: Scalar> TreeBandit<T> {
    pub fn new(dim: usize, arms: usize, config: TreeBanditConfig, seed: u64) -> Result<Self> {
        if dim == 0 || arms == 0 {
            return Err(Error::InvalidConfig(
                "tree bandit needs dim >= 1 and at least one arm".into(),
            ));
        }
        if config.retrain_period == 0 || config.min_leaf == 0 {
            return Err(Error::InvalidConfig(
                "retrain_period and min_leaf must be at least 1".into(),
            ));
        }
        Ok(Self {
            dim,
            config,
            arms: (0..arms).map(|_| ArmTree::new()).collect(),
            updates: 0,
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        })
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

    /// Route `x` down one arm's tree.
    pub fn predict(&self, arm: usize, x: &[T]) -> Result<T> {
        self.check_arm(arm)?;
        Ok(self.arms[arm].tree.predict(x))
    }

    pub fn tree(&self, arm: usize) -> Result<&TreeNode<T>> {
        self.check_arm(arm)?;
        Ok(&self.arms[arm].tree)
    }

    /// Epsilon-greedy selection from a single uniform draw `u` in `[0, 1)`.
    ///
    /// Until every arm has at least one buffered sample, selection is forced
    /// exploration: the lowest-indexed arm with an empty buffer.
    pub fn select_with_draw(&self, x: &[T], u: f64) -> usize {
        if let Some(cold) = self.arms.iter().position(|a| a.buffer.is_empty()) {
            return cold;
        }
        let mut greedy = 0usize;
        let mut best = self.arms[0].tree.predict(x);
        for (arm, state) in self.arms.iter().enumerate().skip(1) {
            let value = state.tree.predict(x);
            if value > best {
                greedy = arm;
                best = value;
            }
        }
        let epsilon = self.config.epsilon.rate(self.updates + 1);
        epsilon_greedy(u, epsilon, self.arms.len(), greedy)
    }

    /// Buffer an observation as trial `t`; rebuild all trees when
    /// `t % retrain_period == 0`.
    pub fn update_at(&mut self, arm: usize, x: &[T], reward: T, t: usize) -> Result<()> {
        self.check_arm(arm)?;
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        self.arms[arm].buffer.push((x.to_vec(), reward));
        if t.is_multiple_of(self.config.retrain_period) {
            self.retrain();
        }
        Ok(())
    }

    /// Rebuild every arm's tree from its buffer.
    pub fn retrain(&mut self) {
        let (max_depth, min_leaf) = (self.config.max_depth, self.config.min_leaf);
        for arm in &mut self.arms {
            arm.tree = fit_tree(&arm.buffer, max_depth, min_leaf);
        }
    }

    pub fn buffer_len(&self, arm: usize) -> Result<usize> {
        self.check_arm(arm)?;
        Ok(self.arms[arm].buffer.len())
    }
}

impl<T: Scalar> BanditPolicy<T> for TreeBandit<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn arm_count(&self) -> usize {
        self.arms.len()
    }

    fn select(&mut self, x: &[T]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let u = self.rng.next_f64();
        Ok(self.select_with_draw(x, u))
    }

    fn update(&mut self, arm: usize, x: &[T], reward: T) -> Result<()> {
        let t = self.updates + 1;
        self.update_at(arm, x, reward, t)?;
        self.updates = t;
        Ok(())
    }
}

/// Fit a regression tree on `(x, r)` samples by greedy SSE minimization.
fn fit_tree<T: Scalar>(samples: &[(Vec<T>, T)], max_depth: usize, min_leaf: usize) -> TreeNode<T> {
    let mut index: Vec<usize> = (0..samples.len()).collect();
    fit_node(samples, &mut index, 0, max_depth, min_leaf)
}

fn fit_node<T: Scalar>(
    samples: &[(Vec<T>, T)],
    index: &mut [usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> TreeNode<T> {
    let n = index.len();
    if n == 0 {
        return TreeNode::Leaf {
            value: T::zero(),
            count: 0,
        };
    }
    let count = from_f64::<T>(n as f64);
    let sum: T = index.iter().map(|&i| samples[i].1).sum();
    let sum_sq: T = index.iter().map(|&i| samples[i].1 * samples[i].1).sum();
    let mean = sum / count;
    let node_sse = sum_sq - sum * sum / count;
    let leaf = TreeNode::Leaf {
        value: mean,
        count: n,
    };

    if depth >= max_depth || n < 2 * min_leaf || node_sse <= T::zero() {
        return leaf;
    }

    let dim = samples[index[0]].0.len();
    let mut best: Option<(usize, T, T)> = None; // (feature, threshold, split sse)
    let mut order: Vec<(T, T)> = Vec::with_capacity(n);
    for feature in 0..dim {
        order.clear();
        order.extend(index.iter().map(|&i| (samples[i].0[feature], samples[i].1)));
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));
        let mut left_sum = T::zero();
        let mut left_sq = T::zero();
        for k in 1..n {
            let r = order[k - 1].1;
            left_sum += r;
            left_sq += r * r;
            let prev = order[k - 1].0;
            let next = order[k].0;
            if prev == next {
                continue; // not a boundary between distinct values
            }
            if k < min_leaf || n - k < min_leaf {
                continue;
            }
            let left_count = from_f64::<T>(k as f64);
            let right_count = from_f64::<T>((n - k) as f64);
            let right_sum = sum - left_sum;
            let right_sq = sum_sq - left_sq;
            let split_sse = (left_sq - left_sum * left_sum / left_count)
                + (right_sq - right_sum * right_sum / right_count);
            let two = T::one() + T::one();
            let threshold = (prev + next) / two;
            // Strict improvement; first hit wins ties (lowest feature, then
            // lowest threshold, by iteration order).
            if best.is_none_or(|(_, _, s)| split_sse < s) {
                best = Some((feature, threshold, split_sse));
            }
        }
    }

    match best {
        Some((feature, threshold, split_sse)) if split_sse < node_sse => {
            let mid = partition(samples, index, feature, threshold);
            let (left_idx, right_idx) = index.split_at_mut(mid);
            let left = fit_node(samples, left_idx, depth + 1, max_depth, min_leaf);
            let right = fit_node(samples, right_idx, depth + 1, max_depth, min_leaf);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
        _ => leaf,
    }
}

/// Partition `index` so entries with `x[feature] <= threshold` come first;
/// returns the boundary position. Order within halves is normalized by a
/// sort, keeping rebuilds deterministic.
fn partition<T: Scalar>(
    samples: &[(Vec<T>, T)],
    index: &mut [usize],
    feature: usize,
    threshold: T,
) -> usize {
    index.sort_by_key(|&i| (samples[i].0[feature] > threshold, i));
    index
        .iter()
        .position(|&i| samples[i].0[feature] > threshold)
        .unwrap_or(index.len())
}
