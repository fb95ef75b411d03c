//! Data model for trials, opinions, rewards, and the augmented context.
//!
//! A trial presents `j` context features to a team of `m` agents. Each agent
//! issues an opinion from a finite set of arms, the team settles on a
//! consensual opinion, and exactly one arm value leads to the ground-truth
//! outcome. The augmented context concatenates the features with every
//! opinion (agents first, team last) and is the input every bandit sees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_f64, Scalar};

/// Ordered set of the `K` distinct opinion values available at every trial.
///
/// Arm values are integers: `{0, 1}` for binary tasks, `{0, 10, ..., 100}`
/// for graded risk tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmSet {
    values: Vec<i64>,
}

impl ArmSet {
    /// Build an arm set. Requires at least two strictly increasing values.
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArmSet(format!(
                "need at least 2 arms, got {}",
                values.len()
            )));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArmSet(
                "arm values must be strictly increasing with no duplicates".into(),
            ));
        }
        Ok(Self { values })
    }

    /// The binary arm set `{0, 1}`.
    pub fn binary() -> Self {
        Self { values: vec![0, 1] }
    }

    /// Number of arms `K`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees K >= 2
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Arm value at `index`.
    pub fn value(&self, index: usize) -> Result<i64> {
        self.values
            .get(index)
            .copied()
            .ok_or(Error::ArmIndexOutOfRange {
                index,
                arms: self.values.len(),
            })
    }

    /// Index of an arm value, if it belongs to the set.
    pub fn index_of(&self, value: i64) -> Option<usize> {
        self.values.binary_search(&value).ok()
    }

    pub fn contains(&self, value: i64) -> bool {
        self.index_of(value).is_some()
    }

    fn require(&self, value: i64) -> Result<usize> {
        self.index_of(value).ok_or(Error::ArmNotInSet { value })
    }
}

/// How opinion values are written into the augmented context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OpinionEncoding {
    /// The numeric arm value itself. Preserves ordinality; one slot per opinion.
    #[serde(rename = "raw")]
    Raw,
    /// A `K`-wide indicator block per opinion. Avoids spurious ordinal
    /// structure for categorical arms.
    #[serde(rename = "onehot")]
    #[default]
    OneHot,
}

impl OpinionEncoding {
    /// Context length for `j` features, `m` agents, and `K` arms.
    pub fn context_len(&self, features: usize, agents: usize, arms: usize) -> usize {
        match self {
            OpinionEncoding::Raw => features + agents + 1,
            OpinionEncoding::OneHot => features + (agents + 1) * arms,
        }
    }
}

/// One logged decision instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord<T> {
    pub trial_id: u64,
    /// Context features `x`, length `j` (constant across a dataset).
    pub features: Vec<T>,
    /// Individual agent opinions `o_1..o_m` (arm values).
    pub agent_opinions: Vec<i64>,
    /// Consensual team opinion `o` (arm value).
    pub team_opinion: i64,
    /// The opinion whose decision yields the ground-truth outcome.
    pub truth_arm: i64,
}

impl<T: Scalar> TrialRecord<T> {
    /// Check every opinion field against the arm set.
    pub fn validate(&self, arms: &ArmSet) -> Result<()> {
        for &o in &self.agent_opinions {
            arms.require(o)?;
        }
        arms.require(self.team_opinion)?;
        arms.require(self.truth_arm)?;
        Ok(())
    }
}

/// The feature vector fed to bandits: features, then agent opinions, then
/// the team opinion, encoded per policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedContext<T>(Vec<T>);

impl<T> AugmentedContext<T> {
    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T> From<Vec<T>> for AugmentedContext<T> {
    fn from(values: Vec<T>) -> Self {
        Self(values)
    }
}

/// Build the augmented context for a trial.
///
/// Features are copied unchanged; opinions follow in agent order with the
/// team opinion last, each encoded per `encoding`.
pub fn build_augmented_context<T: Scalar>(
    record: &TrialRecord<T>,
    arms: &ArmSet,
    encoding: OpinionEncoding,
) -> Result<AugmentedContext<T>> {
    let len = encoding.context_len(
        record.features.len(),
        record.agent_opinions.len(),
        arms.len(),
    );
    let mut out = Vec::with_capacity(len);
    out.extend_from_slice(&record.features);

    let opinions = record
        .agent_opinions
        .iter()
        .copied()
        .chain(std::iter::once(record.team_opinion));
    for opinion in opinions {
        let index = arms.require(opinion)?;
        match encoding {
            OpinionEncoding::Raw => out.push(from_f64(opinion as f64)),
            OpinionEncoding::OneHot => {
                for k in 0..arms.len() {
                    out.push(if k == index { T::one() } else { T::zero() });
                }
            }
        }
    }
    debug_assert_eq!(out.len(), len);
    Ok(AugmentedContext(out))
}

/// Per-trial reward structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardSpec {
    /// 1 if the chosen arm equals the truth arm, else 0.
    Unit,
    /// +1 correct, -1 incorrect.
    Signed,
    /// `100 - |chosen - truth|` over arm values, in `[0, 100]`.
    Abs100,
}

impl RewardSpec {
    /// Per-trial maximum reward, attained at the truth arm.
    pub fn max_reward(&self) -> f64 {
        match self {
            RewardSpec::Unit | RewardSpec::Signed => 1.0,
            RewardSpec::Abs100 => 100.0,
        }
    }

    /// Width of the attainable per-trial reward interval.
    pub fn reward_range(&self) -> f64 {
        match self {
            RewardSpec::Unit => 1.0,
            RewardSpec::Signed => 2.0,
            RewardSpec::Abs100 => 100.0,
        }
    }

    fn value<T: Scalar>(&self, chosen: i64, truth: i64) -> T {
        match self {
            RewardSpec::Unit => {
                if chosen == truth {
                    T::one()
                } else {
                    T::zero()
                }
            }
            RewardSpec::Signed => {
                if chosen == truth {
                    T::one()
                } else {
                    -T::one()
                }
            }
            RewardSpec::Abs100 => from_f64(100.0 - (chosen - truth).abs() as f64),
        }
    }
}

/// Reward perceived when `chosen` is enacted and `truth` was the optimal
/// opinion. Both values must belong to the arm set.
pub fn compute_reward<T: Scalar>(
    spec: RewardSpec,
    chosen: i64,
    truth: i64,
    arms: &ArmSet,
) -> Result<T> {
    arms.require(chosen)?;
    arms.require(truth)?;
    Ok(spec.value(chosen, truth))
}
