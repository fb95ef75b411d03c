//! Protocol-level behavior of the replay harness: statistical quality of the
//! shuffle, bandit feedback accounting, and estimator convergence.

mod common;

use trustcal::rng::{SplitMix64, Xoshiro256PlusPlus};
use trustcal::{
    compute_reward, indicate, observe, run_single, shuffle, AlgorithmSpec, BanditPolicy,
    ComplementarySpec, EpsilonSchedule, LinUcbConfig, LinearEnv, MlpBandit, MlpConfig,
    ReplayConfig, SyntheticKind, SyntheticSpec,
};

#[test]
fn shuffle_frequencies_are_uniform_over_all_permutations() {
    // n = 5 has 120 permutations; over 10,000 seeds each should appear
    // within +/- 4 sigma of the uniform expectation.
    let n = 5usize;
    let perms = common::factorial(n); // 120
    let seeds = 10_000usize;
    let mut counts = vec![0usize; perms];
    for seed in 0..seeds {
        counts[common::permutation_rank(&shuffle(n, seed as u64))] += 1;
    }
    let p = 1.0 / perms as f64;
    let expected = seeds as f64 * p;
    let sigma = (seeds as f64 * p * (1.0 - p)).sqrt();
    for (rank, &count) in counts.iter().enumerate() {
        assert!(
            (count as f64 - expected).abs() <= 4.0 * sigma,
            "permutation {rank} appeared {count} times (expected {expected:.1} +/- {:.1})",
            4.0 * sigma
        );
    }
}

#[test]
fn replay_accounting_matches_an_independent_accumulation_pass() {
    // Drive one shuffled run by hand, logging every indication, and check
    // the total equals a second pass over the logged decisions, with exactly
    // one observe per trial.
    let spec = SyntheticSpec {
        kind: SyntheticKind::Complementary(ComplementarySpec { threshold: 0.5 }),
        trials: 300,
        features: 3,
        seed: 5,
    };
    let data = trustcal::generate::<f64>(&spec).unwrap();
    let config = ReplayConfig {
        runs: 1,
        base_seed: 9,
        algorithm: AlgorithmSpec::LinUcb(LinUcbConfig::default()),
        reward: data.reward,
        encoding: data.encoding,
        parallel: false,
    };

    // Reference: the library's own single run.
    let reference = run_single(&data.records, &data.arms, &config, 9).unwrap();

    // Instrumented replication of the same run.
    let mut seeder = SplitMix64::new(9);
    let perm = shuffle(data.records.len(), seeder.next_u64());
    let policy_seed = seeder.next_u64();
    let dim = data.encoding.context_len(3, 2, data.arms.len());
    let mut policy = config
        .algorithm
        .build::<f64>(dim, data.arms.len(), policy_seed)
        .unwrap();
    let mut logged: Vec<(usize, i64)> = Vec::new(); // (record index, chosen value)
    let mut observe_calls = 0usize;
    let mut total = 0.0;
    for &i in &perm {
        let record = &data.records[i];
        let ind = indicate(policy.as_mut(), record, &data.arms, data.encoding).unwrap();
        // The evaluated decision is the estimate itself.
        logged.push((i, ind.estimated_optimal));
        total += compute_reward::<f64>(
            data.reward,
            ind.estimated_optimal,
            record.truth_arm,
            &data.arms,
        )
        .unwrap();
        observe(
            policy.as_mut(),
            record,
            ind.estimated_optimal,
            &data.arms,
            data.encoding,
            data.reward,
        )
        .unwrap();
        observe_calls += 1;
    }
    assert_eq!(observe_calls, data.records.len(), "one update per trial");
    assert_eq!(total, reference, "instrumented run must match the library");

    // Independent accumulation over the logged decisions.
    let replayed: f64 = logged
        .iter()
        .map(|&(i, chosen)| {
            compute_reward::<f64>(data.reward, chosen, data.records[i].truth_arm, &data.arms)
                .unwrap()
        })
        .sum();
    assert_eq!(replayed, total);
}

#[test]
fn standard_error_shrinks_with_more_runs() {
    let spec = SyntheticSpec {
        kind: SyntheticKind::Complementary(ComplementarySpec { threshold: 0.5 }),
        trials: 120,
        features: 3,
        seed: 2,
    };
    let data = trustcal::generate::<f64>(&spec).unwrap();
    let mut config = ReplayConfig {
        runs: 10,
        base_seed: 0,
        algorithm: AlgorithmSpec::LinUcb(LinUcbConfig::default()),
        reward: data.reward,
        encoding: data.encoding,
        parallel: true,
    };
    let mut se_10 = Vec::new();
    let mut se_100 = Vec::new();
    for meta in 0..3u64 {
        config.base_seed = meta * 1_000;
        config.runs = 10;
        se_10.push(
            trustcal::run_replay(&data.records, &data.arms, &config)
                .unwrap()
                .std_error,
        );
        config.runs = 100;
        se_100.push(
            trustcal::run_replay(&data.records, &data.arms, &config)
                .unwrap()
                .std_error,
        );
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        avg(&se_100) <= avg(&se_10),
        "SE(100 runs) {} should not exceed SE(10 runs) {}",
        avg(&se_100),
        avg(&se_10)
    );
}

#[test]
fn mlp_prediction_error_approaches_the_noise_floor_on_the_linear_env() {
    // Train the MLP bandit online on the hidden linear environment; over the
    // final quarter, the squared error of its chosen-arm predictions against
    // observed rewards must come within 20% of the noise variance.
    let noise = 0.1f64;
    let mut env = LinearEnv::new(4, 2, noise, 3);
    let mut bandit = MlpBandit::<f64>::new(
        4,
        2,
        MlpConfig {
            learning_rate: 0.005,
            ..MlpConfig::default()
        },
        71,
    )
    .unwrap();
    let trials = 5_000usize;
    let tail = trials / 4;
    let mut sq_err = 0.0;
    let mut counted = 0usize;
    for t in 0..trials {
        let x = env.next_context();
        let arm = bandit.select(&x).unwrap();
        let reward = env.observe(arm, &x);
        if t >= trials - tail {
            let predicted = bandit.forward(&x).unwrap()[arm];
            sq_err += (predicted - reward) * (predicted - reward);
            counted += 1;
        }
        BanditPolicy::<f64>::update(&mut bandit, arm, &x, reward).unwrap();
    }
    let mse = sq_err / counted as f64;
    let bound = noise * noise * 1.2;
    assert!(mse < bound, "tail MSE {mse} must be below {bound}");
}

#[test]
fn epsilon_schedule_matches_between_tree_and_mlp() {
    // The two epsilon-greedy policies share one schedule by construction.
    let schedule = EpsilonSchedule::SqrtDecay { floor: 0.01 };
    for t in [1usize, 4, 100, 10_000, 1_000_000] {
        let expected = (1.0 / (t as f64).sqrt()).max(0.01);
        assert_eq!(schedule.rate(t), expected);
    }
}

#[test]
fn replay_is_reproducible_across_executions() {
    let spec = SyntheticSpec {
        kind: SyntheticKind::Complementary(ComplementarySpec { threshold: 0.5 }),
        trials: 200,
        features: 3,
        seed: 8,
    };
    let data = trustcal::generate::<f64>(&spec).unwrap();
    for algorithm in [
        AlgorithmSpec::LinUcb(LinUcbConfig::default()),
        AlgorithmSpec::Tree(Default::default()),
        AlgorithmSpec::Ann(MlpConfig::default()),
    ] {
        let config = ReplayConfig {
            runs: 5,
            base_seed: 4,
            algorithm,
            reward: data.reward,
            encoding: data.encoding,
            parallel: true,
        };
        let a = trustcal::run_replay(&data.records, &data.arms, &config).unwrap();
        let b = trustcal::run_replay(&data.records, &data.arms, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
    }
}

#[test]
fn distinct_seeds_usually_produce_distinct_shuffles() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let n = 64;
    let a = shuffle(n, rng.next_u64());
    let b = shuffle(n, rng.next_u64());
    assert_ne!(a, b);
}
