//! Shuffled multi-run replay of logged decision data.
//!
//! Order affects online learning, so a dataset is replayed `runs` times
//! (default 100), each under a fresh policy and an independent Fisher-Yates
//! permutation. Per trial the indicator estimates the optimal opinion, the
//! harness credits the reward that opinion would have earned, and only that
//! reward is revealed to the policy (bandit feedback). The summary reports
//! the per-run totals' mean and standard error next to the order-independent
//! logged baselines, the trust-calibration distance `T = |G - g|` for each,
//! and a one-sample t-test of the run totals against the team baseline.
//!
//! Runs may execute in parallel; per-run state (seed, policy, accumulator)
//! is owned per run and aggregation folds in run-index order, so results are
//! bit-identical to sequential execution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bandit::{AlgorithmSpec, BanditPolicy, LinUcb, MlpBandit, TreeBandit};
use crate::domain::{compute_reward, ArmSet, OpinionEncoding, RewardSpec, TrialRecord};
use crate::error::{Error, Result};
use crate::indicator::{indicate, observe};
use crate::rng::{SplitMix64, Xoshiro256PlusPlus};
use crate::scalar::Scalar;

/// Fisher-Yates permutation of `0..n` from the crate's seeded generator.
/// Identical `(n, seed)` yields the identical permutation on every platform.
pub fn shuffle(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    Xoshiro256PlusPlus::seed_from_u64(seed).shuffle(&mut perm);
    perm
}

/// Cumulative reward lost to trust miscalibration: `T = |G - g|`.
pub fn trust_distance(max_total: f64, obtained: f64) -> f64 {
    (max_total - obtained).abs()
}

/// Order-independent totals of a logged dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    /// `G`: the total reward under optimal opinions.
    pub max_total: f64,
    /// `g` for decisions led by each agent's opinion stream.
    pub agent_totals: Vec<f64>,
    /// `g` for decisions led by the team opinion.
    pub team_total: f64,
}

impl Baselines {
    pub fn team_distance(&self) -> f64 {
        trust_distance(self.max_total, self.team_total)
    }

    pub fn agent_distances(&self) -> Vec<f64> {
        self.agent_totals
            .iter()
            .map(|&g| trust_distance(self.max_total, g))
            .collect()
    }
}

/// Sum the per-trial maximum reward and the reward of every logged opinion
/// stream. Order-independent by construction.
pub fn baseline_totals<T: Scalar>(
    records: &[TrialRecord<T>],
    arms: &ArmSet,
    spec: RewardSpec,
) -> Result<Baselines> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let agents = first.agent_opinions.len();
    let mut max_total = 0.0;
    let mut agent_totals = vec![0.0f64; agents];
    let mut team_total = 0.0;
    for (row, record) in records.iter().enumerate() {
        if record.agent_opinions.len() != agents {
            return Err(Error::InvalidRecord {
                row,
                message: format!(
                    "expected {agents} agent opinions, found {}",
                    record.agent_opinions.len()
                ),
            });
        }
        max_total += spec.max_reward();
        for (i, &opinion) in record.agent_opinions.iter().enumerate() {
            agent_totals[i] += compute_reward::<f64>(spec, opinion, record.truth_arm, arms)?;
        }
        team_total += compute_reward::<f64>(spec, record.team_opinion, record.truth_arm, arms)?;
    }
    Ok(Baselines {
        max_total,
        agent_totals,
        team_total,
    })
}

/// One-sample two-sided t-test of run totals against a fixed baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

/// Zero-variance samples use the degenerate convention: `t = +/-inf, p = 0`
/// when the mean differs from the baseline, `t = 0, p = 1` when it equals.
pub fn t_test_vs_baseline(run_totals: &[f64], baseline: f64) -> Result<TTest> {
    let n = run_totals.len();
    if n < 2 {
        return Err(Error::InsufficientRuns { needed: 2, got: n });
    }
    let nf = n as f64;
    let mean = run_totals.iter().sum::<f64>() / nf;
    let var = run_totals
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (nf - 1.0);
    let df = nf - 1.0;
    if var == 0.0 {
        return Ok(if mean == baseline {
            TTest { t: 0.0, p: 1.0, df }
        } else {
            TTest {
                t: (mean - baseline).signum() * f64::INFINITY,
                p: 0.0,
                df,
            }
        });
    }
    let se = (var / nf).sqrt();
    let t = (mean - baseline) / se;
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(TTest { t, p, df })
}

/// Replay protocol parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayConfig {
    /// Number of shuffled replays (default 100).
    pub runs: usize,
    /// Run `k` derives its seeds from `base_seed + k`.
    pub base_seed: u64,
    pub algorithm: AlgorithmSpec,
    pub reward: RewardSpec,
    pub encoding: OpinionEncoding,
    /// Execute runs on the thread pool. Output is bit-identical either way.
    pub parallel: bool,
}

impl ReplayConfig {
    pub fn new(algorithm: AlgorithmSpec, reward: RewardSpec, encoding: OpinionEncoding) -> Self {
        Self {
            runs: 100,
            base_seed: 0,
            algorithm,
            reward,
            encoding,
            parallel: true,
        }
    }
}

/// Per-algorithm replay report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub algorithm: String,
    /// Number of trials `n`.
    pub trials: usize,
    pub runs: usize,
    /// Total reward `g` of each run, in run-index order.
    pub run_totals: Vec<f64>,
    /// Sample mean of the run totals.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(runs)`; 0 for a single run.
    pub std_error: f64,
    pub baselines: Baselines,
    /// `T = |G - mean|` for the indicator.
    pub indicator_distance: f64,
    /// One-sample t-test of run totals vs the team baseline (needs >= 2 runs).
    pub t_test: Option<TTest>,
}

fn validate_dataset<T: Scalar>(
    records: &[TrialRecord<T>],
    arms: &ArmSet,
) -> Result<(usize, usize)> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let features = first.features.len();
    let agents = first.agent_opinions.len();
    for (row, record) in records.iter().enumerate() {
        if record.features.len() != features || record.agent_opinions.len() != agents {
            return Err(Error::InvalidRecord {
                row,
                message: "inconsistent feature or opinion count".into(),
            });
        }
        record.validate(arms).map_err(|e| Error::InvalidRecord {
            row,
            message: e.to_string(),
        })?;
    }
    Ok((features, agents))
}

/// Replay the dataset once under a fresh policy, in the order given by the
/// seed's permutation, and return the total reward of the indicator's
/// estimated optimal opinions.
pub fn run_single<T: Scalar>(
    records: &[TrialRecord<T>],
    arms: &ArmSet,
    config: &ReplayConfig,
    run_seed: u64,
) -> Result<f64> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let dim =
        config
            .encoding
            .context_len(first.features.len(), first.agent_opinions.len(), arms.len());
    let mut seeder = SplitMix64::new(run_seed);
    let shuffle_seed = seeder.next_u64();
    let policy_seed = seeder.next_u64();
    let permutation = shuffle(records.len(), shuffle_seed);
    let mut policy = config.algorithm.build::<T>(dim, arms.len(), policy_seed)?;

    let mut total = 0.0f64;
    for &index in &permutation {
        let record = &records[index];
        let indication = indicate(policy.as_mut(), record, arms, config.encoding)?;
        total += compute_reward::<f64>(
            config.reward,
            indication.estimated_optimal,
            record.truth_arm,
            arms,
        )?;
        observe(
            policy.as_mut(),
            record,
            indication.estimated_optimal,
            arms,
            config.encoding,
            config.reward,
        )?;
    }
    Ok(total)
}

/// Sample mean and standard error (`std / sqrt(n)`, 0 for one value).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run the full shuffled-replay protocol and aggregate the report.
pub fn run_replay<T: Scalar>(
    records: &[TrialRecord<T>],
    arms: &ArmSet,
    config: &ReplayConfig,
) -> Result<ReplaySummary> {
    if config.runs == 0 {
        return Err(Error::InvalidConfig("runs must be at least 1".into()));
    }
    validate_dataset(records, arms)?;
    let baselines = baseline_totals(records, arms, config.reward)?;

    let seeds: Vec<u64> = (0..config.runs)
        .map(|k| config.base_seed.wrapping_add(k as u64))
        .collect();
    let run_totals: Vec<f64> = if config.parallel {
        seeds
            .par_iter()
            .map(|&seed| run_single(records, arms, config, seed))
            .collect::<Result<_>>()?
    } else {
        seeds
            .iter()
            .map(|&seed| run_single(records, arms, config, seed))
            .collect::<Result<_>>()?
    };

    let (mean, std_error) = mean_and_std_error(&run_totals);
    let t_test = if config.runs >= 2 {
        Some(t_test_vs_baseline(&run_totals, baselines.team_total)?)
    } else {
        None
    };
    Ok(ReplaySummary {
        algorithm: config.algorithm.name().to_string(),
        trials: records.len(),
        runs: config.runs,
        mean,
        std_error,
        indicator_distance: trust_distance(baselines.max_total, mean),
        baselines,
        run_totals,
        t_test,
    })
}

// --- Policy state snapshots -------------------------------------------------

/// Snapshot format version.
pub const SNAPSHOT_VERSION: u32 = 1;

/// A bandit policy's full state, for resumable runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyState<T> {
    LinUcb(LinUcb<T>),
    Tree(TreeBandit<T>),
    Ann(MlpBandit<T>),
}

impl<T: Scalar> PolicyState<T> {
    pub fn into_policy(self) -> Box<dyn BanditPolicy<T>> {
        match self {
            PolicyState::LinUcb(p) => Box::new(p),
            PolicyState::Tree(p) => Box::new(p),
            PolicyState::Ann(p) => Box::new(p),
        }
    }
}

/// Versioned text snapshot of a policy state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySnapshot<T> {
    pub version: u32,
    pub state: PolicyState<T>,
}

impl<T: Scalar> PolicySnapshot<T> {
    pub fn new(state: PolicyState<T>) -> Self {
        Self {
            version: SNAPSHOT_VERSION,
            state,
        }
    }

    /// Serialize to the versioned JSON form.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parse a snapshot, rejecting unknown versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let snapshot: Self = serde_json::from_str(text)?;
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion {
                found: snapshot.version,
                expected: SNAPSHOT_VERSION,
            });
        }
        Ok(snapshot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{LinUcbConfig, TreeBanditConfig};

    fn unit_config(algorithm: AlgorithmSpec) -> ReplayConfig {
        ReplayConfig {
            runs: 4,
            base_seed: 0,
            algorithm,
            reward: RewardSpec::Unit,
            encoding: OpinionEncoding::OneHot,
            parallel: false,
        }
    }

    fn linucb_spec() -> AlgorithmSpec {
        AlgorithmSpec::LinUcb(LinUcbConfig::default())
    }

    fn record(id: u64, features: Vec<f64>, o: Vec<i64>, team: i64, truth: i64) -> TrialRecord<f64> {
        TrialRecord {
            trial_id: id,
            features,
            agent_opinions: o,
            team_opinion: team,
            truth_arm: truth,
        }
    }

    fn three_trials() -> Vec<TrialRecord<f64>> {
        vec![
            record(0, vec![0.1, 0.9], vec![1, 0], 1, 1),
            record(1, vec![0.8, 0.2], vec![0, 0], 0, 0),
            record(2, vec![0.5, 0.5], vec![1, 1], 1, 0),
        ]
    }

    #[test]
    fn shuffle_is_deterministic_and_degenerate_cases_hold() {
        assert_eq!(shuffle(0, 99), Vec::<usize>::new());
        assert_eq!(shuffle(1, 99), vec![0]);
        assert_eq!(shuffle(64, 7), shuffle(64, 7));
        assert_ne!(shuffle(64, 7), shuffle(64, 8));
        let mut sorted = shuffle(64, 7);
        sorted.sort_unstable();
        assert_eq!(sorted, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn baseline_example_three_trials() {
        let arms = ArmSet::binary();
        let b = baseline_totals(&three_trials(), &arms, RewardSpec::Unit).unwrap();
        assert_eq!(b.max_total, 3.0);
        assert_eq!(b.team_total, 2.0);
        assert_eq!(b.team_distance(), 1.0);
        assert_eq!(b.agent_totals, vec![2.0, 1.0]);
    }

    #[test]
    fn perfectly_calibrated_dataset_has_zero_distances() {
        let arms = ArmSet::binary();
        let records: Vec<_> = (0..10)
            .map(|i| {
                let truth = i % 2;
                record(i as u64, vec![0.3], vec![truth, truth], truth, truth)
            })
            .collect();
        for spec in [RewardSpec::Unit, RewardSpec::Signed, RewardSpec::Abs100] {
            let b = baseline_totals(&records, &arms, spec).unwrap();
            assert_eq!(b.team_total, b.max_total);
            assert_eq!(b.team_distance(), 0.0);
            assert!(b.agent_distances().iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn baselines_are_permutation_invariant() {
        let arms = ArmSet::binary();
        let records = three_trials();
        let base = baseline_totals(&records, &arms, RewardSpec::Unit).unwrap();
        for seed in 0..20u64 {
            let perm = shuffle(records.len(), seed);
            let shuffled: Vec<_> = perm.iter().map(|&i| records[i].clone()).collect();
            assert_eq!(
                baseline_totals(&shuffled, &arms, RewardSpec::Unit).unwrap(),
                base
            );
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let arms = ArmSet::binary();
        let empty: Vec<TrialRecord<f64>> = vec![];
        assert!(matches!(
            baseline_totals(&empty, &arms, RewardSpec::Unit).unwrap_err(),
            Error::EmptyDataset
        ));
    }

    #[test]
    fn t_test_hand_computed_example() {
        let result = t_test_vs_baseline(&[11.0, 12.0, 13.0], 10.0).unwrap();
        assert!((result.t - 3.4641016151377544).abs() < 1e-12);
        assert!((result.p - 0.0742).abs() < 5e-4, "p = {}", result.p);
        assert_eq!(result.df, 2.0);
    }

    #[test]
    fn t_test_degenerate_branches() {
        let equal = t_test_vs_baseline(&[5.0, 5.0, 5.0], 5.0).unwrap();
        assert_eq!((equal.t, equal.p), (0.0, 1.0));

        let above = t_test_vs_baseline(&[6.0, 6.0], 5.0).unwrap();
        assert_eq!(above.t, f64::INFINITY);
        assert_eq!(above.p, 0.0);

        let below = t_test_vs_baseline(&[4.0, 4.0], 5.0).unwrap();
        assert_eq!(below.t, f64::NEG_INFINITY);

        assert!(matches!(
            t_test_vs_baseline(&[1.0], 0.0).unwrap_err(),
            Error::InsufficientRuns { needed: 2, got: 1 }
        ));
    }

    #[test]
    fn same_seed_replays_identically() {
        let arms = ArmSet::binary();
        let records = three_trials();
        let config = unit_config(linucb_spec());
        let a = run_single(&records, &arms, &config, 12345).unwrap();
        let b = run_single(&records, &arms, &config, 12345).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn summary_totals_never_exceed_the_maximum() {
        let arms = ArmSet::binary();
        let records = three_trials();
        for algorithm in [
            linucb_spec(),
            AlgorithmSpec::Tree(TreeBanditConfig::default()),
            AlgorithmSpec::Ann(crate::bandit::MlpConfig::default()),
        ] {
            let summary = run_replay(&records, &arms, &unit_config(algorithm)).unwrap();
            assert!(summary.mean <= summary.baselines.max_total);
            for &g in &summary.run_totals {
                assert!(g <= summary.baselines.max_total);
            }
            assert_eq!(
                summary.indicator_distance,
                trust_distance(summary.baselines.max_total, summary.mean)
            );
        }
    }

    #[test]
    fn team_equals_truth_dataset_pins_the_team_baseline_to_max() {
        let arms = ArmSet::binary();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
        let records: Vec<_> = (0..40)
            .map(|i| {
                let truth = (rng.next_u64() % 2) as i64;
                let o1 = (rng.next_u64() % 2) as i64;
                record(
                    i as u64,
                    vec![rng.next_f64()],
                    vec![o1, truth],
                    truth,
                    truth,
                )
            })
            .collect();
        let summary = run_replay(&records, &arms, &unit_config(linucb_spec())).unwrap();
        assert_eq!(summary.baselines.team_total, summary.baselines.max_total);
        assert_eq!(summary.baselines.team_distance(), 0.0);
        assert!(summary.mean <= summary.baselines.max_total);
    }

    #[test]
    fn sequential_and_parallel_runs_are_bit_identical() {
        let arms = ArmSet::binary();
        let records = three_trials();
        let mut config = unit_config(linucb_spec());
        config.runs = 8;
        config.parallel = false;
        let sequential = run_replay(&records, &arms, &config).unwrap();
        config.parallel = true;
        let parallel = run_replay(&records, &arms, &config).unwrap();
        assert_eq!(sequential, parallel);
    }

    #[test]
    fn cumulative_distance_is_nondecreasing_for_nonnegative_specs() {
        let arms = ArmSet::new(vec![0, 10, 20]).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
        let records: Vec<_> = (0..60)
            .map(|i| {
                let pick = |r: &mut Xoshiro256PlusPlus| (r.below(3) * 10) as i64;
                let truth = pick(&mut rng);
                record(
                    i as u64,
                    vec![rng.next_f64()],
                    vec![pick(&mut rng), pick(&mut rng)],
                    pick(&mut rng),
                    truth,
                )
            })
            .collect();
        for spec in [RewardSpec::Unit, RewardSpec::Abs100] {
            let mut cumulative_max = 0.0;
            let mut cumulative_team = 0.0;
            let mut last_distance = 0.0;
            for r in &records {
                cumulative_max += spec.max_reward();
                cumulative_team +=
                    compute_reward::<f64>(spec, r.team_opinion, r.truth_arm, &arms).unwrap();
                let d = trust_distance(cumulative_max, cumulative_team);
                assert!(d >= last_distance, "T must not decrease");
                last_distance = d;
            }
        }
    }

    #[test]
    fn snapshot_round_trip_resumes_identically() {
        let arms = ArmSet::binary();
        let records = three_trials();
        let config = unit_config(linucb_spec());

        // Uninterrupted reference run.
        let reference = run_single(&records, &arms, &config, 77).unwrap();

        // Same run, but the policy is serialized and restored mid-way.
        let mut seeder = SplitMix64::new(77);
        let shuffle_seed = seeder.next_u64();
        let policy_seed = seeder.next_u64();
        let perm = shuffle(records.len(), shuffle_seed);
        let dim = OpinionEncoding::OneHot.context_len(2, 2, 2);
        let mut policy = LinUcb::<f64>::new(dim, 2, LinUcbConfig::default()).unwrap();
        let mut total = 0.0;
        let _ = policy_seed; // LinUCB draws no exploration randomness
        for (step, &index) in perm.iter().enumerate() {
            if step == 2 {
                let json = PolicySnapshot::new(PolicyState::LinUcb(policy.clone()))
                    .to_json()
                    .unwrap();
                let restored = PolicySnapshot::<f64>::from_json(&json).unwrap();
                match restored.state {
                    PolicyState::LinUcb(p) => policy = p,
                    _ => panic!("wrong variant"),
                }
            }
            let rec = &records[index];
            let ind = indicate(&mut policy, rec, &arms, OpinionEncoding::OneHot).unwrap();
            total += compute_reward::<f64>(
                RewardSpec::Unit,
                ind.estimated_optimal,
                rec.truth_arm,
                &arms,
            )
            .unwrap();
            observe(
                &mut policy,
                rec,
                ind.estimated_optimal,
                &arms,
                OpinionEncoding::OneHot,
                RewardSpec::Unit,
            )
            .unwrap();
        }
        assert_eq!(total, reference);
    }

    #[test]
    fn snapshot_rejects_unknown_versions() {
        let policy = LinUcb::<f64>::new(2, 2, LinUcbConfig::default()).unwrap();
        let mut snapshot = PolicySnapshot::new(PolicyState::LinUcb(policy));
        snapshot.version = 99;
        let json = serde_json::to_string(&snapshot).unwrap();
        assert!(matches!(
            PolicySnapshot::<f64>::from_json(&json).unwrap_err(),
            Error::SnapshotVersion {
                found: 99,
                expected: SNAPSHOT_VERSION
            }
        ));
    }
}
