//! Dynamic trust calibration for human-machine teams via contextual bandits.
//!
//! A team of `m` agents (human or machine) issues per-trial opinions, then a
//! consensual team opinion leads to a decision and a reward. This crate
//! estimates the optimal opinion for every trial from the augmented context
//! (features plus all opinions), labels each opinion trusted or distrusted
//! by comparison with that estimate, and measures trust calibration as the
//! distance `T = |G - g|` between the attainable and the obtained total
//! reward. A shuffled multi-run replay harness evaluates the indicator over
//! logged or synthetic decision data with three interchangeable estimators:
//! LinUCB, a decision-tree bandit, and an online MLP bandit.
//!
//! Core numerics are generic over the scalar type (`f32` or `f64`); the
//! `*64` aliases below cover the common case.

pub mod bandit;
pub mod domain;
pub mod error;
pub mod indicator;
pub mod ingest;
mod linalg;
pub mod replay;
pub mod rng;
pub mod scalar;

pub use bandit::{
    AlgorithmSpec, BanditPolicy, EpsilonSchedule, LinUcb, LinUcbConfig, MlpBandit, MlpConfig,
    ThetaUpdate, TreeBandit, TreeBanditConfig,
};
pub use domain::{
    build_augmented_context, compute_reward, ArmSet, AugmentedContext, OpinionEncoding, RewardSpec,
    TrialRecord,
};
pub use error::{Error, Result};
pub use indicator::{indicate, observe, TrustIndication};
pub use ingest::{
    generate, load, save, ColumnMapping, ComplementarySpec, DatasetManifest, FeatureScaling,
    LinearEnv, LinearSpec, LoadedDataset, SyntheticDataset, SyntheticKind, SyntheticSpec,
};
pub use replay::{
    baseline_totals, run_replay, run_single, shuffle, t_test_vs_baseline, trust_distance,
    Baselines, PolicySnapshot, PolicyState, ReplayConfig, ReplaySummary, TTest,
};
pub use scalar::Scalar;

/// `f64` specializations of the generic core.
pub type Trial64 = TrialRecord<f64>;
pub type Context64 = AugmentedContext<f64>;
pub type LinUcb64 = LinUcb<f64>;
pub type TreeBandit64 = TreeBandit<f64>;
pub type MlpBandit64 = MlpBandit<f64>;

/// `f32` specializations of the generic core.
pub type Trial32 = TrialRecord<f32>;
pub type Context32 = AugmentedContext<f32>;
pub type LinUcb32 = LinUcb<f32>;
pub type TreeBandit32 = TreeBandit<f32>;
pub type MlpBandit32 = MlpBandit<f32>;
