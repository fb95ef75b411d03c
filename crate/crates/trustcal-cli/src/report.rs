//! Report rendering: aligned table, CSV, or JSON lines.
//!
//! The table mirrors the layout of the replay summaries: a trials row, the
//! maximum `G`, one `g` row per logged opinion stream, and one indicator row
//! per algorithm with mean/SE, trust distance, and the t-test against the
//! team baseline. Distances in the table are recomputed from the rounded
//! printed totals so the printed arithmetic is internally consistent.
//!
//! CSV columns: `label,trials,total,std_error,distance,t,p` (empty where not
//! applicable). JSON lines: one `{"config": ..., "summary": ...}` object per
//! algorithm, full precision.

use std::path::Path;

use trustcal::{
    Baselines, DatasetManifest, LoadedDataset, OpinionEncoding, ReplayConfig, ReplaySummary,
    RewardSpec,
};

use crate::cli::{CliError, OutputFormat};

#[derive(Copy, Clone, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    JsonLines,
}

impl From<OutputFormat> for Format {
    fn from(v: OutputFormat) -> Self {
        match v {
            OutputFormat::Table => Format::Table,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::JsonLines => Format::JsonLines,
        }
    }
}

pub struct RunMeta {
    pub dataset_name: String,
    pub data_path: String,
    pub trials: usize,
    pub arms: Vec<i64>,
    pub reward: RewardSpec,
    pub encoding: OpinionEncoding,
    pub runs: usize,
    pub base_seed: u64,
    pub parallel: bool,
}

impl RunMeta {
    pub fn new(
        manifest: &DatasetManifest,
        data_path: &Path,
        dataset: &LoadedDataset<f64>,
        config: &ReplayConfig,
    ) -> Self {
        Self {
            dataset_name: manifest.name.clone(),
            data_path: data_path.display().to_string(),
            trials: dataset.records.len(),
            arms: dataset.arms.values().to_vec(),
            reward: config.reward,
            encoding: config.encoding,
            runs: config.runs,
            base_seed: config.base_seed,
            parallel: config.parallel,
        }
    }
}

fn reward_name(reward: RewardSpec) -> &'static str {
    match reward {
        RewardSpec::Unit => "unit",
        RewardSpec::Signed => "signed",
        RewardSpec::Abs100 => "abs100",
    }
}

fn encoding_name(encoding: OpinionEncoding) -> &'static str {
    match encoding {
        OpinionEncoding::Raw => "raw",
        OpinionEncoding::OneHot => "onehot",
    }
}

struct Row {
    key: String,
    pretty: String,
    total: f64,
    std_error: Option<f64>,
    distance: Option<f64>,
    t: Option<f64>,
    p: Option<f64>,
}

fn baseline_rows(baselines: &Baselines) -> Vec<Row> {
    let mut rows = vec![Row {
        key: "max".into(),
        pretty: "maximum [G]".into(),
        total: baselines.max_total,
        std_error: None,
        distance: None,
        t: None,
        p: None,
    }];
    for (i, &g) in baselines.agent_totals.iter().enumerate() {
        rows.push(Row {
            key: format!("agent_{}", i + 1),
            pretty: format!("agent o_{} [g]", i + 1),
            total: g,
            std_error: None,
            distance: Some(trustcal::trust_distance(baselines.max_total, g)),
            t: None,
            p: None,
        });
    }
    rows.push(Row {
        key: "team".into(),
        pretty: "team o [g]".into(),
        total: baselines.team_total,
        std_error: None,
        distance: Some(baselines.team_distance()),
        t: None,
        p: None,
    });
    rows
}

fn indicator_row(summary: &ReplaySummary) -> Row {
    Row {
        key: format!("indicator_{}", summary.algorithm),
        pretty: format!("indicator o* ({}) [g]", summary.algorithm),
        total: summary.mean,
        std_error: Some(summary.std_error),
        distance: Some(summary.indicator_distance),
        t: summary.t_test.map(|t| t.t),
        p: summary.t_test.map(|t| t.p),
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn print_table(meta: &RunMeta, rows: &[Row], algo_lines: &[String]) {
    println!("# trustcal {}", env!("CARGO_PKG_VERSION"));
    println!("# data: {} ({})", meta.data_path, meta.dataset_name);
    println!(
        "# arms: {:?}  reward: {}  encoding: {}",
        meta.arms,
        reward_name(meta.reward),
        encoding_name(meta.encoding)
    );
    println!(
        "# runs: {}  base_seed: {}  parallel: {}",
        meta.runs, meta.base_seed, meta.parallel
    );
    for line in algo_lines {
        println!("# {line}");
    }
    println!(
        "{:<28} {:>14} {:>10} {:>12} {:>10} {:>12}",
        "row", "total", "se", "T", "t", "p"
    );
    println!("{:<28} {:>14}", "trials [n]", meta.trials);
    let g_max = round2(rows[0].total);
    for row in rows {
        let total = round2(row.total);
        let se = row
            .std_error
            .map_or(String::new(), |v| format!("{:.2}", round2(v)));
        let distance = row
            .distance
            .map_or(String::new(), |_| format!("{:.2}", (g_max - total).abs()));
        let t = row.t.map_or(String::new(), |v| format!("{v:.4}"));
        let p = row.p.map_or(String::new(), |v| format!("{v:.4e}"));
        println!(
            "{:<28} {:>14.2} {:>10} {:>12} {:>10} {:>12}",
            row.pretty, total, se, distance, t, p
        );
    }
}

fn print_csv(meta: &RunMeta, rows: &[Row]) {
    println!("label,trials,total,std_error,distance,t,p");
    for row in rows {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        println!(
            "{},{},{},{},{},{},{}",
            row.key,
            meta.trials,
            row.total,
            opt(row.std_error),
            opt(row.distance),
            opt(row.t),
            opt(row.p),
        );
    }
}

pub fn emit_summaries(
    meta: &RunMeta,
    results: &[(ReplayConfig, ReplaySummary)],
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::JsonLines => {
            for (config, summary) in results {
                let line = serde_json::json!({ "config": config, "summary": summary });
                println!("{line}");
            }
        }
        Format::Table | Format::Csv => {
            let (_, first) = &results[0];
            let mut rows = baseline_rows(&first.baselines);
            let mut algo_lines = Vec::new();
            for (config, summary) in results {
                rows.push(indicator_row(summary));
                algo_lines.push(format!(
                    "{}: {}",
                    summary.algorithm,
                    serde_json::to_string(&config.algorithm).map_err(trustcal::Error::from)?
                ));
            }
            if format == Format::Table {
                print_table(meta, &rows, &algo_lines);
            } else {
                print_csv(meta, &rows);
            }
        }
    }
    Ok(())
}

pub fn emit_baselines(
    manifest: &DatasetManifest,
    data_path: &Path,
    dataset: &LoadedDataset<f64>,
    baselines: &Baselines,
    format: Format,
) -> Result<(), CliError> {
    let meta = RunMeta {
        dataset_name: manifest.name.clone(),
        data_path: data_path.display().to_string(),
        trials: dataset.records.len(),
        arms: dataset.arms.values().to_vec(),
        reward: dataset.reward,
        encoding: dataset.encoding,
        runs: 0,
        base_seed: 0,
        parallel: false,
    };
    let rows = baseline_rows(baselines);
    match format {
        Format::JsonLines => {
            let line = serde_json::json!({
                "dataset": meta.dataset_name,
                "trials": meta.trials,
                "baselines": baselines,
                "team_distance": baselines.team_distance(),
                "agent_distances": baselines.agent_distances(),
            });
            println!("{line}");
        }
        Format::Table => {
            println!("# trustcal {}", env!("CARGO_PKG_VERSION"));
            println!("# data: {} ({})", meta.data_path, meta.dataset_name);
            println!(
                "# arms: {:?}  reward: {}  encoding: {}",
                meta.arms,
                reward_name(meta.reward),
                encoding_name(meta.encoding)
            );
            println!("{:<28} {:>14} {:>12}", "row", "total", "T");
            println!("{:<28} {:>14}", "trials [n]", meta.trials);
            let g_max = round2(rows[0].total);
            for row in rows {
                let total = round2(row.total);
                let distance = row
                    .distance
                    .map_or(String::new(), |_| format!("{:.2}", (g_max - total).abs()));
                println!("{:<28} {:>14.2} {:>12}", row.pretty, total, distance);
            }
        }
        Format::Csv => print_csv(&meta, &rows),
    }
    Ok(())
}
