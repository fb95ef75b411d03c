//! The dynamic trust-calibration indicator.
//!
//! Per trial, a bandit policy estimates the optimal opinion from the
//! augmented context; each agent opinion and the team opinion are then
//! labeled trusted exactly when they equal that estimate. For multi-valued
//! tasks the estimate itself serves as the fallback opinion when nothing
//! matched.
//!
//! One deployment-order caveat: the augmented context includes the team
//! opinion, which in a live setting exists only after agents confer. Replay
//! sidesteps this because every field is already logged per trial.

use serde::{Deserialize, Serialize};

use crate::bandit::BanditPolicy;
use crate::domain::{
    build_augmented_context, compute_reward, ArmSet, OpinionEncoding, RewardSpec, TrialRecord,
};
use crate::error::Result;
use crate::scalar::Scalar;

/// Per-trial trust labels plus the estimated optimal opinion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustIndication {
    /// Estimated optimal opinion (arm value).
    pub estimated_optimal: i64,
    /// `agent_labels[i]` is true iff agent `i`'s opinion equals the estimate.
    pub agent_labels: Vec<bool>,
    /// True iff the team opinion equals the estimate.
    pub team_label: bool,
    /// True iff no opinion matched, so the estimate stands alone.
    pub fallback_used: bool,
}

/// Estimate the optimal opinion for a trial and label every opinion against
/// it by exact arm equality.
///
/// Selection-time exploration state may advance per the policy contract;
/// reward statistics do not change here.
pub fn indicate<T, P>(
    policy: &mut P,
    record: &TrialRecord<T>,
    arms: &ArmSet,
    encoding: OpinionEncoding,
) -> Result<TrustIndication>
where
    T: Scalar,
    P: BanditPolicy<T> + ?Sized,
{
    let context = build_augmented_context(record, arms, encoding)?;
    let arm_index = policy.select(context.values())?;
    let estimated_optimal = arms.value(arm_index)?;
    let agent_labels: Vec<bool> = record
        .agent_opinions
        .iter()
        .map(|&o| o == estimated_optimal)
        .collect();
    let team_label = record.team_opinion == estimated_optimal;
    let fallback_used = !team_label && !agent_labels.iter().any(|&l| l);
    Ok(TrustIndication {
        estimated_optimal,
        agent_labels,
        team_label,
        fallback_used,
    })
}

/// Reveal the chosen opinion's reward to the policy (bandit feedback).
///
/// Computes `r = reward(spec, chosen, truth)` and forwards the augmented
/// context, the chosen arm, and `r` to `policy.update`.
pub fn observe<T, P>(
    policy: &mut P,
    record: &TrialRecord<T>,
    chosen: i64,
    arms: &ArmSet,
    encoding: OpinionEncoding,
    spec: RewardSpec,
) -> Result<()>
where
    T: Scalar,
    P: BanditPolicy<T> + ?Sized,
{
    let context = build_augmented_context(record, arms, encoding)?;
    let arm_index = arms
        .index_of(chosen)
        .ok_or(crate::error::Error::ArmNotInSet { value: chosen })?;
    let reward: T = compute_reward(spec, chosen, record.truth_arm, arms)?;
    policy.update(arm_index, context.values(), reward)
}
