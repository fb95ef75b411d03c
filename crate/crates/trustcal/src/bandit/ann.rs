//! Neural contextual bandit: one fully connected network mapping the
//! augmented context to per-arm reward estimates, trained online.
//!
//! The network is a single rectified hidden layer (15 units by default)
//! feeding `K` linear output heads, one per arm:
//!
//! ```text
//!   z_h = c1_h + sum_i w1[h,i] x_i        h = 1..hidden
//!   out_k = c2_k + sum_h w2[k,h] max(0, z_h)
//! ```
//!
//! Feedback is bandit feedback: each update takes one squared-error gradient
//! step on the chosen arm's head only (Adam, bias-corrected moments), so no
//! gradient flows through the other heads' output weights.
//!
//! Parameters live in one flat vector laid out as `w1 | c1 | w2 | c2` with
//! `w1` and `w2` row-major; gradients use the same layout.

use serde::{Deserialize, Serialize};

use crate::bandit::explore::{epsilon_greedy, EpsilonSchedule};
use crate::bandit::BanditPolicy;
use crate::error::{Error, Result};
use crate::rng::Xoshiro256PlusPlus;
use crate::scalar::{from_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// Hidden layer width.
    pub hidden: usize,
    /// Adam step size.
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub epsilon: EpsilonSchedule,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: 15,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            epsilon: EpsilonSchedule::default(),
        }
    }
}

/// Online MLP bandit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpBandit<T> {
    dim: usize,
    arms: usize,
    hidden: usize,
    /// Flat parameters: `w1 (hidden*dim) | c1 (hidden) | w2 (arms*hidden) | c2 (arms)`.
    params: Vec<T>,
    /// Adam first-moment estimates, same layout as `params`.
    moment1: Vec<T>,
    /// Adam second-moment estimates.
    moment2: Vec<T>,
    /// Adam step counter.
    step: u64,
    updates: usize,
    config: MlpConfig,
    rng: Xoshiro256PlusPlus,
}

impl<T: Scalar> MlpBandit<T> {
    /// Build a network with Glorot-uniform weights drawn from the seeded
    /// generator (biases start at zero).
    pub fn new(dim: usize, arms: usize, config: MlpConfig, seed: u64) -> Result<Self> {
        if dim == 0 || arms == 0 || config.hidden == 0 {
            return Err(Error::InvalidConfig(
                "MLP bandit needs dim, arms, and hidden width of at least 1".into(),
            ));
        }
        if !config.learning_rate.is_finite() || config.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                config.learning_rate
            )));
        }
        let hidden = config.hidden;
        let count = hidden * dim + hidden + arms * hidden + arms;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut params = vec![T::zero(); count];
        let limit_w1 = (6.0 / (dim + hidden) as f64).sqrt();
        for slot in params.iter_mut().take(hidden * dim) {
            *slot = from_f64((rng.next_f64() * 2.0 - 1.0) * limit_w1);
        }
        let limit_w2 = (6.0 / (hidden + arms) as f64).sqrt();
        let w2_start = hidden * dim + hidden;
        for slot in params[w2_start..w2_start + arms * hidden].iter_mut() {
            *slot = from_f64((rng.next_f64() * 2.0 - 1.0) * limit_w2);
        }
        Ok(Self {
            dim,
            arms,
            hidden,
            moment1: vec![T::zero(); count],
            moment2: vec![T::zero(); count],
            params,
            step: 0,
            updates: 0,
            config,
            rng,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn param(&self, index: usize) -> T {
        self.params[index]
    }

    pub fn set_param(&mut self, index: usize, value: T) {
        self.params[index] = value;
    }

    pub fn idx_w1(&self, h: usize, i: usize) -> usize {
        h * self.dim + i
    }

    pub fn idx_c1(&self, h: usize) -> usize {
        self.hidden * self.dim + h
    }

    pub fn idx_w2(&self, k: usize, h: usize) -> usize {
        self.hidden * self.dim + self.hidden + k * self.hidden + h
    }

    pub fn idx_c2(&self, k: usize) -> usize {
        self.hidden * self.dim + self.hidden + self.arms * self.hidden + k
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
        if arm >= self.arms {
            return Err(Error::ArmIndexOutOfRange {
                index: arm,
                arms: self.arms,
            });
        }
        Ok(())
    }

    /// Pre-activations and rectified hidden activations.
    fn hidden_pass(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let mut pre = Vec::with_capacity(self.hidden);
        let mut act = Vec::with_capacity(self.hidden);
        for h in 0..self.hidden {
            let mut z = self.params[self.idx_c1(h)];
            for (i, &x_i) in x.iter().enumerate() {
                z += self.params[self.idx_w1(h, i)] * x_i;
            }
            pre.push(z);
            act.push(z.max(T::zero()));
        }
        (pre, act)
    }

    /// Per-arm reward estimates. Pure.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let (_, act) = self.hidden_pass(x);
        let mut out = Vec::with_capacity(self.arms);
        for k in 0..self.arms {
            let mut v = self.params[self.idx_c2(k)];
            for (h, &a) in act.iter().enumerate() {
                v += self.params[self.idx_w2(k, h)] * a;
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Squared error of the chosen arm's head: `(forward(x)[arm] - r)^2`.
    pub fn loss(&self, x: &[T], arm: usize, reward: T) -> Result<T> {
        self.check_arm(arm)?;
        let err = self.forward(x)?[arm] - reward;
        Ok(err * err)
    }

    /// Analytic gradient of `loss` for every parameter, in parameter layout.
    /// Only the chosen arm's output head carries gradient.
    pub fn gradients(&self, x: &[T], arm: usize, reward: T) -> Result<Vec<T>> {
        self.check_dim(x)?;
        self.check_arm(arm)?;
        let (pre, act) = self.hidden_pass(x);
        let mut out = self.params[self.idx_c2(arm)];
        for (h, &a) in act.iter().enumerate() {
            out += self.params[self.idx_w2(arm, h)] * a;
        }
        let two = T::one() + T::one();
        let d_out = two * (out - reward);

        let mut grad = vec![T::zero(); self.params.len()];
        grad[self.idx_c2(arm)] = d_out;
        for h in 0..self.hidden {
            grad[self.idx_w2(arm, h)] = d_out * act[h];
            // ReLU gate: gradient flows only through active units.
            if pre[h] > T::zero() {
                let d_z = d_out * self.params[self.idx_w2(arm, h)];
                grad[self.idx_c1(h)] = d_z;
                for (i, &x_i) in x.iter().enumerate() {
                    grad[self.idx_w1(h, i)] = d_z * x_i;
                }
            }
        }
        Ok(grad)
    }

    /// One bias-corrected Adam step along `grad`.
    pub fn apply_gradients(&mut self, grad: &[T]) {
        debug_assert_eq!(grad.len(), self.params.len());
        self.step += 1;
        let beta1 = from_f64::<T>(self.config.beta1);
        let beta2 = from_f64::<T>(self.config.beta2);
        let lr = from_f64::<T>(self.config.learning_rate);
        let eps = from_f64::<T>(self.config.adam_epsilon);
        let corr1 = T::one() - from_f64::<T>(self.config.beta1.powi(self.step as i32));
        let corr2 = T::one() - from_f64::<T>(self.config.beta2.powi(self.step as i32));
        let moments = self.moment1.iter_mut().zip(self.moment2.iter_mut());
        for ((param, &g), (m, v)) in self.params.iter_mut().zip(grad).zip(moments) {
            *m = beta1 * *m + (T::one() - beta1) * g;
            *v = beta2 * *v + (T::one() - beta2) * g * g;
            let m_hat = *m / corr1;
            let v_hat = *v / corr2;
            *param -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }

    /// One masked-MSE Adam step on the chosen arm's head.
    pub fn update_arm(&mut self, arm: usize, x: &[T], reward: T) -> Result<()> {
        let grad = self.gradients(x, arm, reward)?;
        self.apply_gradients(&grad);
        Ok(())
    }

    /// Epsilon-greedy selection from a single uniform draw `u` in `[0, 1)`;
    /// greedy ties break to the lowest arm index.
    pub fn select_with_draw(&self, x: &[T], u: f64) -> Result<usize> {
        let out = self.forward(x)?;
        let mut greedy = 0usize;
        for (k, &v) in out.iter().enumerate().skip(1) {
            if v > out[greedy] {
                greedy = k;
            }
        }
        let epsilon = self.config.epsilon.rate(self.updates + 1);
        Ok(epsilon_greedy(u, epsilon, self.arms, greedy))
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

impl<T: Scalar> BanditPolicy<T> for MlpBandit<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn arm_count(&self) -> usize {
        self.arms
    }

    fn select(&mut self, x: &[T]) -> Result<usize> {
        let u = self.rng.next_f64();
        self.select_with_draw(x, u)
    }

    fn update(&mut self, arm: usize, x: &[T], reward: T) -> Result<()> {
        self.update_arm(arm, x, reward)?;
        self.updates += 1;
        Ok(())
    }
}
