//! Dataset loading, validation, canonical schema, and synthetic environments.
//!
//! The canonical on-disk format is UTF-8 comma-delimited text with a header
//! row and columns `trial_id, x_1..x_j, o_1..o_m, o_team, truth`. Study
//! files in other layouts are adapted through a [`DatasetManifest`] (a TOML
//! document) that maps their column names onto the schema; no bespoke
//! parsers. Missing values are rejected, and features are min-max scaled to
//! `[0, 1]` per column at load time (a constant column maps to 0).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{ArmSet, OpinionEncoding, RewardSpec, TrialRecord};
use crate::error::{Error, Result};
use crate::rng::{SplitMix64, Xoshiro256PlusPlus};
use crate::scalar::{from_f64, Scalar};

/// Column mapping from a source file onto the canonical schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    /// Feature columns, in order (`j` entries).
    pub features: Vec<String>,
    /// Agent opinion columns, in order (`m` entries).
    pub opinions: Vec<String>,
    /// Team opinion column.
    pub team: String,
    /// Ground-truth opinion column.
    pub truth: String,
    /// Optional trial id column; the row index is used when absent.
    #[serde(default)]
    pub trial_id: Option<String>,
}

/// Dataset description: arm set, reward structure, encoding, column mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub arms: Vec<i64>,
    pub reward: RewardSpec,
    pub encoding: OpinionEncoding,
    pub columns: ColumnMapping,
}

impl DatasetManifest {
    /// Manifest for a file already in the canonical layout.
    pub fn canonical(
        name: &str,
        arms: Vec<i64>,
        reward: RewardSpec,
        encoding: OpinionEncoding,
        features: usize,
        agents: usize,
    ) -> Self {
        Self {
            name: name.to_string(),
            arms,
            reward,
            encoding,
            columns: ColumnMapping {
                features: (1..=features).map(|i| format!("x_{i}")).collect(),
                opinions: (1..=agents).map(|i| format!("o_{i}")).collect(),
                team: "o_team".into(),
                truth: "truth".into(),
                trial_id: Some("trial_id".into()),
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let manifest: Self = toml::from_str(text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn arm_set(&self) -> Result<ArmSet> {
        ArmSet::new(self.arms.clone())
    }

    pub fn feature_count(&self) -> usize {
        self.columns.features.len()
    }

    pub fn agent_count(&self) -> usize {
        self.columns.opinions.len()
    }

    /// Check structural invariants: distinct columns covering
    /// `j + m + 2` names, a valid arm set, and an arm range the reward
    /// structure can price.
    pub fn validate(&self) -> Result<()> {
        let arms = self.arm_set()?;
        if self.columns.features.is_empty() {
            return Err(Error::InvalidManifest("at least one feature column".into()));
        }
        if self.columns.opinions.is_empty() {
            return Err(Error::InvalidManifest("at least one opinion column".into()));
        }
        let mut seen = HashSet::new();
        let all = self
            .columns
            .features
            .iter()
            .chain(self.columns.opinions.iter())
            .chain([&self.columns.team, &self.columns.truth])
            .chain(self.columns.trial_id.iter());
        for column in all {
            if !seen.insert(column.as_str()) {
                return Err(Error::InvalidManifest(format!(
                    "column {column:?} mapped more than once"
                )));
            }
        }
        if self.reward == RewardSpec::Abs100 {
            let span = arms.values().last().unwrap() - arms.values()[0];
            if span > 100 {
                return Err(Error::InvalidManifest(format!(
                    "abs100 reward needs an arm span of at most 100, got {span}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-column min-max constants applied at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaling {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

/// A validated, normalized dataset plus its load metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset<T> {
    pub records: Vec<TrialRecord<T>>,
    pub arms: ArmSet,
    pub reward: RewardSpec,
    pub encoding: OpinionEncoding,
    pub scaling: FeatureScaling,
}

fn parse_opinion(raw: &str, row: usize, column: &str) -> Result<i64> {
    let trimmed = raw.trim();
    if let Ok(v) = trimmed.parse::<i64>() {
        return Ok(v);
    }
    // Tolerate float-formatted integers ("70.0") from exported study files.
    if let Ok(v) = trimmed.parse::<f64>() {
        if v.fract() == 0.0 && v.abs() < 2f64.powi(53) {
            return Ok(v as i64);
        }
    }
    Err(Error::ParseField {
        row,
        column: column.to_string(),
        message: format!("expected an integer opinion value, got {raw:?}"),
    })
}

fn parse_feature(raw: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::ParseField {
            row,
            column: column.to_string(),
            message: "missing value".into(),
        });
    }
    trimmed.parse::<f64>().map_err(|e| Error::ParseField {
        row,
        column: column.to_string(),
        message: format!("not a number: {e}"),
    })
}

/// Load and validate a delimited file against a manifest.
///
/// Row order is preserved; every opinion is checked against the arm set and
/// features are min-max normalized per column.
pub fn load<T: Scalar>(path: &Path, manifest: &DatasetManifest) -> Result<LoadedDataset<T>> {
    manifest.validate()?;
    let arms = manifest.arm_set()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let position = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };

    let feature_idx: Vec<usize> = manifest
        .columns
        .features
        .iter()
        .map(|c| position(c))
        .collect::<Result<_>>()?;
    let opinion_idx: Vec<usize> = manifest
        .columns
        .opinions
        .iter()
        .map(|c| position(c))
        .collect::<Result<_>>()?;
    let team_idx = position(&manifest.columns.team)?;
    let truth_idx = position(&manifest.columns.truth)?;
    let trial_idx = manifest
        .columns
        .trial_id
        .as_deref()
        .map(position)
        .transpose()?;

    let mut raw_features: Vec<Vec<f64>> = Vec::new();
    let mut parsed: Vec<(u64, Vec<i64>, i64, i64)> = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let line = result?;
        let field = |idx: usize, column: &str| -> Result<&str> {
            line.get(idx).ok_or_else(|| Error::ParseField {
                row,
                column: column.to_string(),
                message: "missing field".into(),
            })
        };

        let mut features = Vec::with_capacity(feature_idx.len());
        for (&idx, column) in feature_idx.iter().zip(&manifest.columns.features) {
            features.push(parse_feature(field(idx, column)?, row, column)?);
        }
        let mut opinions = Vec::with_capacity(opinion_idx.len());
        for (&idx, column) in opinion_idx.iter().zip(&manifest.columns.opinions) {
            opinions.push(parse_opinion(field(idx, column)?, row, column)?);
        }
        let team = parse_opinion(
            field(team_idx, &manifest.columns.team)?,
            row,
            &manifest.columns.team,
        )?;
        let truth = parse_opinion(
            field(truth_idx, &manifest.columns.truth)?,
            row,
            &manifest.columns.truth,
        )?;
        for &value in opinions.iter().chain([&team, &truth]) {
            if !arms.contains(value) {
                return Err(Error::InvalidRecord {
                    row,
                    message: format!("opinion value {value} is not in the arm set"),
                });
            }
        }
        let trial_id = match trial_idx {
            Some(idx) => {
                let raw = field(idx, manifest.columns.trial_id.as_deref().unwrap())?;
                raw.trim().parse::<u64>().map_err(|e| Error::ParseField {
                    row,
                    column: manifest.columns.trial_id.clone().unwrap(),
                    message: format!("not a trial id: {e}"),
                })?
            }
            None => row as u64,
        };
        raw_features.push(features);
        parsed.push((trial_id, opinions, team, truth));
    }
    if parsed.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let columns = feature_idx.len();
    let mut mins = vec![f64::INFINITY; columns];
    let mut maxs = vec![f64::NEG_INFINITY; columns];
    for row in &raw_features {
        for (c, &v) in row.iter().enumerate() {
            mins[c] = mins[c].min(v);
            maxs[c] = maxs[c].max(v);
        }
    }

    let records = parsed
        .into_iter()
        .zip(raw_features)
        .map(
            |((trial_id, agent_opinions, team_opinion, truth_arm), features)| {
                let normalized = features
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| {
                        let span = maxs[c] - mins[c];
                        // Constant columns map to 0 rather than dividing by zero.
                        let scaled = if span == 0.0 {
                            0.0
                        } else {
                            (v - mins[c]) / span
                        };
                        from_f64::<T>(scaled)
                    })
                    .collect();
                TrialRecord {
                    trial_id,
                    features: normalized,
                    agent_opinions,
                    team_opinion,
                    truth_arm,
                }
            },
        )
        .collect();

    Ok(LoadedDataset {
        records,
        arms,
        reward: manifest.reward,
        encoding: manifest.encoding,
        scaling: FeatureScaling { mins, maxs },
    })
}

/// Write records in the canonical layout
/// (`trial_id, x_1..x_j, o_1..o_m, o_team, truth`).
pub fn save<T: Scalar>(path: &Path, records: &[TrialRecord<T>]) -> Result<()> {
    let first = records.first().ok_or(Error::EmptyDataset)?;
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["trial_id".to_string()];
    header.extend((1..=first.features.len()).map(|i| format!("x_{i}")));
    header.extend((1..=first.agent_opinions.len()).map(|i| format!("o_{i}")));
    header.push("o_team".into());
    header.push("truth".into());
    writer.write_record(&header)?;
    for record in records {
        let mut line = vec![record.trial_id.to_string()];
        line.extend(record.features.iter().map(|v| v.to_string()));
        line.extend(record.agent_opinions.iter().map(|v| v.to_string()));
        line.push(record.team_opinion.to_string());
        line.push(record.truth_arm.to_string());
        writer.write_record(&line)?;
    }
    writer.flush()?;
    Ok(())
}

// --- Synthetic environments -------------------------------------------------

/// Hidden linear-payoff environment for desk-scale verification.
///
/// Each arm `k` carries a hidden coefficient vector normalized to sum 1, so
/// mean payoffs over `x` in `[0,1]^dim` stay in `[0, 1]`. Observed rewards
/// add Gaussian noise of the configured standard deviation.
#[derive(Debug, Clone)]
pub struct LinearEnv {
    pub dim: usize,
    pub arm_count: usize,
    pub noise: f64,
    thetas: Vec<Vec<f64>>,
    rng: Xoshiro256PlusPlus,
}

impl LinearEnv {
    pub fn new(dim: usize, arm_count: usize, noise: f64, seed: u64) -> Self {
        let mut seeder = SplitMix64::new(seed);
        let mut theta_rng = Xoshiro256PlusPlus::seed_from_u64(seeder.next_u64());
        let rng = Xoshiro256PlusPlus::seed_from_u64(seeder.next_u64());
        let thetas = (0..arm_count)
            .map(|_| {
                let raw: Vec<f64> = (0..dim).map(|_| theta_rng.next_f64()).collect();
                let sum: f64 = raw.iter().sum();
                raw.iter().map(|v| v / sum).collect()
            })
            .collect();
        Self {
            dim,
            arm_count,
            noise,
            thetas,
            rng,
        }
    }

    pub fn next_context(&mut self) -> Vec<f64> {
        (0..self.dim).map(|_| self.rng.next_f64()).collect()
    }

    /// Noise-free mean payoff of an arm.
    pub fn mean_payoff(&self, arm: usize, x: &[f64]) -> f64 {
        self.thetas[arm].iter().zip(x).map(|(t, v)| t * v).sum()
    }

    /// Best arm and its mean payoff.
    pub fn best_arm(&self, x: &[f64]) -> (usize, f64) {
        let mut best = 0;
        let mut best_payoff = self.mean_payoff(0, x);
        for arm in 1..self.arm_count {
            let payoff = self.mean_payoff(arm, x);
            if payoff > best_payoff {
                best = arm;
                best_payoff = payoff;
            }
        }
        (best, best_payoff)
    }

    /// Noisy observed reward for pulling an arm.
    pub fn observe(&mut self, arm: usize, x: &[f64]) -> f64 {
        self.mean_payoff(arm, x) + self.noise * self.rng.next_gaussian()
    }
}

/// Hidden linear payoffs per arm; truth is the argmax of noise-perturbed
/// scores and opinions are noisy copies of truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSpec {
    /// Number of arms (labels `0..arm_count`).
    pub arm_count: usize,
    /// Gaussian score noise when drawing the truth arm; 0 makes truth the
    /// exact oracle argmax.
    pub noise: f64,
    /// Probability an agent's opinion is replaced by a uniform random arm.
    pub opinion_flip: f64,
}

/// Complementary-expertise construction: agent A is correct exactly when the
/// first feature exceeds `threshold`, agent B is correct otherwise (each
/// guesses uniformly outside their regime), and the team follows agent A.
///
/// The ground-truth opinion is carried by the second feature through a fixed
/// cut at 0.5, so a threshold rule on one feature attains the maximum reward
/// and sits inside every estimator's hypothesis class, linear scorers
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarySpec {
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SyntheticKind {
    Linear(LinearSpec),
    Complementary(ComplementarySpec),
}

/// Full description of a synthetic dataset; generation is a pure function
/// of this value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub trials: usize,
    pub features: usize,
    pub seed: u64,
}

/// Generated records plus the matching arm set and reward structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset<T> {
    pub records: Vec<TrialRecord<T>>,
    pub arms: ArmSet,
    pub reward: RewardSpec,
    pub encoding: OpinionEncoding,
}

pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<SyntheticDataset<T>> {
    if spec.trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    match spec.kind {
        SyntheticKind::Linear(linear) => generate_linear(spec, linear),
        SyntheticKind::Complementary(comp) => generate_complementary(spec, comp),
    }
}

fn generate_linear<T: Scalar>(
    spec: &SyntheticSpec,
    linear: LinearSpec,
) -> Result<SyntheticDataset<T>> {
    if linear.arm_count < 2 {
        return Err(Error::InvalidConfig(
            "linear kind needs at least 2 arms".into(),
        ));
    }
    if spec.features == 0 {
        return Err(Error::InvalidConfig(
            "linear kind needs at least 1 feature".into(),
        ));
    }
    let arms = ArmSet::new((0..linear.arm_count as i64).collect())?;
    let mut seeder = SplitMix64::new(spec.seed);
    let mut env = LinearEnv::new(
        spec.features,
        linear.arm_count,
        linear.noise,
        seeder.next_u64(),
    );
    let mut opinion_rng = Xoshiro256PlusPlus::seed_from_u64(seeder.next_u64());

    let mut records = Vec::with_capacity(spec.trials);
    for trial_id in 0..spec.trials {
        let x = env.next_context();
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for arm in 0..linear.arm_count {
            let score = env.mean_payoff(arm, &x) + linear.noise * env.rng.next_gaussian();
            if score > best_score {
                best = arm;
                best_score = score;
            }
        }
        let truth = best as i64;
        let opinion = |rng: &mut Xoshiro256PlusPlus| {
            if rng.next_f64() < linear.opinion_flip {
                rng.below(linear.arm_count as u64) as i64
            } else {
                truth
            }
        };
        let o1 = opinion(&mut opinion_rng);
        let o2 = opinion(&mut opinion_rng);
        records.push(TrialRecord {
            trial_id: trial_id as u64,
            features: x.iter().map(|&v| from_f64(v)).collect(),
            agent_opinions: vec![o1, o2],
            team_opinion: o1,
            truth_arm: truth,
        });
    }
    Ok(SyntheticDataset {
        records,
        arms,
        reward: RewardSpec::Unit,
        encoding: OpinionEncoding::OneHot,
    })
}

fn generate_complementary<T: Scalar>(
    spec: &SyntheticSpec,
    comp: ComplementarySpec,
) -> Result<SyntheticDataset<T>> {
    if spec.features < 2 {
        return Err(Error::InvalidConfig(
            "complementary kind needs at least 2 features".into(),
        ));
    }
    if !(0.0..=1.0).contains(&comp.threshold) {
        return Err(Error::InvalidConfig("threshold must lie in [0, 1]".into()));
    }
    let arms = ArmSet::binary();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.trials);
    for trial_id in 0..spec.trials {
        let x: Vec<f64> = (0..spec.features).map(|_| rng.next_f64()).collect();
        let truth = i64::from(x[1] > 0.5);
        let a_regime = x[0] > comp.threshold;
        let coin = |rng: &mut Xoshiro256PlusPlus| rng.below(2) as i64;
        let o_a = if a_regime { truth } else { coin(&mut rng) };
        let o_b = if a_regime { coin(&mut rng) } else { truth };
        records.push(TrialRecord {
            trial_id: trial_id as u64,
            features: x.iter().map(|&v| from_f64(v)).collect(),
            agent_opinions: vec![o_a, o_b],
            team_opinion: o_a,
            truth_arm: truth,
        });
    }
    Ok(SyntheticDataset {
        records,
        arms,
        reward: RewardSpec::Unit,
        encoding: OpinionEncoding::OneHot,
    })
}
