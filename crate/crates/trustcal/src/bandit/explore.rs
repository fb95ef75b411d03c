//! Exploration schedule shared by the tree and MLP bandits.

use serde::{Deserialize, Serialize};

/// Per-trial exploration rate epsilon(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `max(floor, 1/sqrt(t))` with `t` counting trials from 1.
    SqrtDecay { floor: f64 },
    /// Constant rate, mostly for tests and calibration runs.
    Fixed { value: f64 },
}

impl EpsilonSchedule {
    pub fn rate(&self, t: usize) -> f64 {
        match *self {
            EpsilonSchedule::SqrtDecay { floor } => floor.max(1.0 / (t.max(1) as f64).sqrt()),
            EpsilonSchedule::Fixed { value } => value,
        }
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::SqrtDecay { floor: 0.01 }
    }
}

/// Epsilon-greedy arm choice from a single uniform draw `u` in `[0, 1)`.
///
/// With probability `epsilon` the arm is uniform over `0..arms` (the draw is
/// rescaled, so one `u` decides both the branch and the arm); otherwise the
/// greedy arm is returned.
pub fn epsilon_greedy(u: f64, epsilon: f64, arms: usize, greedy: usize) -> usize {
    if epsilon > 0.0 && u < epsilon {
        let r = ((u / epsilon) * arms as f64) as usize;
        r.min(arms - 1)
    } else {
        greedy
    }
}
