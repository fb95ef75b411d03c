//! Flag parsing and command dispatch.
//!
//! Exit codes: 0 success, 1 data/schema errors, 2 flag errors (clap's
//! default). `--seed` falls back to the `TRUSTCAL_SEED` environment
//! variable, then 0.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trustcal::{
    baseline_totals, generate, load, run_replay, AlgorithmSpec, ComplementarySpec, DatasetManifest,
    EpsilonSchedule, LinUcbConfig, LinearSpec, LoadedDataset, MlpConfig, OpinionEncoding,
    ReplayConfig, SyntheticKind, SyntheticSpec, ThetaUpdate, TreeBanditConfig,
};

use crate::report;

#[derive(Debug)]
pub enum CliError {
    /// Flag-level problem clap could not catch (exit 2).
    Usage(String),
    /// Data, schema, or config problem from the library (exit 1).
    Data(trustcal::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data(err) => write!(f, "{err}"),
        }
    }
}

impl From<trustcal::Error> for CliError {
    fn from(err: trustcal::Error) -> Self {
        CliError::Data(err)
    }
}

#[derive(Parser)]
#[command(
    name = "trustcal",
    version,
    about = "Trust-calibration indicator over logged or synthetic decision data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Replay a dataset through one bandit algorithm and report the summary.
    Run(RunArgs),
    /// Replay a dataset through all three algorithms into a joint table.
    Compare(CompareArgs),
    /// Generate a synthetic dataset (and its manifest) to files.
    Synth(SynthArgs),
    /// Print the logged baselines (n, G, per-opinion g, T) without bandits.
    Baselines(BaselinesArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum AlgoName {
    Linucb,
    Tree,
    Ann,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum EncodingName {
    Raw,
    Onehot,
}

impl From<EncodingName> for OpinionEncoding {
    fn from(v: EncodingName) -> Self {
        match v {
            EncodingName::Raw => OpinionEncoding::Raw,
            EncodingName::Onehot => OpinionEncoding::OneHot,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ThetaName {
    Accumulating,
    LastSample,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    JsonLines,
}

#[derive(Args)]
pub struct HyperArgs {
    /// Shuffled replays per algorithm.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Base seed; run k uses base_seed + k. Falls back to $TRUSTCAL_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// LinUCB exploration weight.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// LinUCB coefficient update rule.
    #[arg(long, value_enum, default_value_t = ThetaName::Accumulating)]
    pub theta_update: ThetaName,
    /// Floor of the epsilon(t) = max(floor, 1/sqrt(t)) schedule.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon_floor: f64,
    /// Tree bandit retrain period in trials.
    #[arg(long, default_value_t = 50)]
    pub retrain_period: usize,
    /// Tree bandit maximum depth.
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    /// Tree bandit minimum samples per leaf.
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    /// MLP hidden layer width.
    #[arg(long, default_value_t = 15)]
    pub hidden: usize,
    /// MLP Adam learning rate.
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    /// Override the manifest's opinion encoding.
    #[arg(long, value_enum)]
    pub encoding: Option<EncodingName>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub out: OutputFormat,
    /// Run replays one at a time instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args)]
pub struct RunArgs {
    /// Dataset file (delimited text with a header row).
    #[arg(long)]
    pub data: PathBuf,
    /// Dataset manifest (TOML).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Bandit algorithm estimating the optimal opinion.
    #[arg(long, value_enum)]
    pub algo: AlgoName,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum SynthKindName {
    Linear,
    Complementary,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Generator family.
    #[arg(long, value_enum)]
    pub kind: SynthKindName,
    #[arg(long, default_value_t = 5000)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub features: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output dataset path (canonical delimited layout).
    #[arg(long)]
    pub out_data: PathBuf,
    /// Output manifest path (TOML); written next to the data.
    #[arg(long)]
    pub out_manifest: PathBuf,
    /// Arms for the linear kind.
    #[arg(long, default_value_t = 3)]
    pub arms: usize,
    /// Gaussian score noise for the linear kind.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Opinion flip probability for the linear kind.
    #[arg(long, default_value_t = 0.2)]
    pub flip: f64,
    /// Expertise switch threshold for the complementary kind.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Args)]
pub struct BaselinesArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub out: OutputFormat,
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("TRUSTCAL_SEED") {
        Ok(raw) => raw.trim().parse::<u64>().map_err(|_| {
            CliError::Usage(format!(
                "TRUSTCAL_SEED must be an unsigned 64-bit integer, got {raw:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn algorithm_spec(algo: AlgoName, hyper: &HyperArgs) -> AlgorithmSpec {
    let epsilon = EpsilonSchedule::SqrtDecay {
        floor: hyper.epsilon_floor,
    };
    match algo {
        AlgoName::Linucb => AlgorithmSpec::LinUcb(LinUcbConfig {
            alpha: hyper.alpha,
            theta_update: match hyper.theta_update {
                ThetaName::Accumulating => ThetaUpdate::Accumulating,
                ThetaName::LastSample => ThetaUpdate::LastSample,
            },
        }),
        AlgoName::Tree => AlgorithmSpec::Tree(TreeBanditConfig {
            retrain_period: hyper.retrain_period,
            epsilon,
            max_depth: hyper.max_depth,
            min_leaf: hyper.min_leaf,
        }),
        AlgoName::Ann => AlgorithmSpec::Ann(MlpConfig {
            hidden: hyper.hidden,
            learning_rate: hyper.lr,
            epsilon,
            ..MlpConfig::default()
        }),
    }
}

fn replay_config(
    algo: AlgoName,
    hyper: &HyperArgs,
    dataset: &LoadedDataset<f64>,
) -> Result<ReplayConfig, CliError> {
    let mut config = ReplayConfig::new(
        algorithm_spec(algo, hyper),
        dataset.reward,
        hyper.encoding.map_or(dataset.encoding, Into::into),
    );
    config.runs = hyper.runs;
    config.base_seed = resolve_seed(hyper.seed)?;
    config.parallel = !hyper.sequential;
    Ok(config)
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
        Command::Synth(args) => synth(args),
        Command::Baselines(args) => baselines(args),
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let manifest = DatasetManifest::from_path(&args.manifest)?;
    let dataset = load::<f64>(&args.data, &manifest)?;
    let config = replay_config(args.algo, &args.hyper, &dataset)?;
    let summary = run_replay(&dataset.records, &dataset.arms, &config)?;
    report::emit_summaries(
        &report::RunMeta::new(&manifest, &args.data, &dataset, &config),
        &[(config.clone(), summary)],
        args.hyper.out.into(),
    )?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), CliError> {
    let manifest = DatasetManifest::from_path(&args.manifest)?;
    let dataset = load::<f64>(&args.data, &manifest)?;
    let mut results = Vec::new();
    let mut meta = None;
    for algo in [AlgoName::Linucb, AlgoName::Tree, AlgoName::Ann] {
        let config = replay_config(algo, &args.hyper, &dataset)?;
        let summary = run_replay(&dataset.records, &dataset.arms, &config)?;
        if meta.is_none() {
            meta = Some(report::RunMeta::new(
                &manifest, &args.data, &dataset, &config,
            ));
        }
        results.push((config, summary));
    }
    report::emit_summaries(
        &meta.expect("three algorithms ran"),
        &results,
        args.hyper.out.into(),
    )?;
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed)?;
    let kind = match args.kind {
        SynthKindName::Linear => SyntheticKind::Linear(LinearSpec {
            arm_count: args.arms,
            noise: args.sigma,
            opinion_flip: args.flip,
        }),
        SynthKindName::Complementary => SyntheticKind::Complementary(ComplementarySpec {
            threshold: args.threshold,
        }),
    };
    let spec = SyntheticSpec {
        kind,
        trials: args.trials,
        features: args.features,
        seed,
    };
    let dataset = generate::<f64>(&spec)?;
    trustcal::save(&args.out_data, &dataset.records)?;
    let manifest = DatasetManifest::canonical(
        match args.kind {
            SynthKindName::Linear => "synthetic-linear",
            SynthKindName::Complementary => "synthetic-complementary",
        },
        dataset.arms.values().to_vec(),
        dataset.reward,
        dataset.encoding,
        args.features,
        2,
    );
    std::fs::write(&args.out_manifest, manifest.to_toml()).map_err(trustcal::Error::Io)?;
    println!(
        "wrote {} trials to {} (manifest {})",
        dataset.records.len(),
        args.out_data.display(),
        args.out_manifest.display()
    );
    Ok(())
}

fn baselines(args: BaselinesArgs) -> Result<(), CliError> {
    let manifest = DatasetManifest::from_path(&args.manifest)?;
    let dataset = load::<f64>(&args.data, &manifest)?;
    let baselines = baseline_totals(&dataset.records, &dataset.arms, dataset.reward)?;
    report::emit_baselines(&manifest, &args.data, &dataset, &baselines, args.out.into())?;
    Ok(())
}
