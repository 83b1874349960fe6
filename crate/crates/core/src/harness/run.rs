use std::fs;
use std::path::{Path, PathBuf};

use super::ExperimentConfig;
use crate::archive::{FrontierDoc, FrontierEntry, FRONTIER_SCHEMA_VERSION};
use crate::evolution::{run_training, GenerationMetrics, TrainingOutcome};
use crate::policy::checkpoint;
use crate::{Error, Result};

pub const METRICS_HEADER: &str = "generation,hv,sp,archive_size,stationary_fallbacks,seconds";
pub const METRICS_FILE: &str = "metrics.csv";
pub const FRONTIER_FILE: &str = "frontier.json";
pub const SELECTION_FILE: &str = "selection.jsonl";
pub const CONFIG_FILE: &str = "config.resolved.toml";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Outcome of one seed's training run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub seed: u64,
    pub final_metrics: GenerationMetrics,
}

/// Trains every configured seed (or only `seed`) and writes one run
/// directory per seed under the configured output directory.
pub fn cli_train(config_path: &Path, seed: Option<u64>, overrides: &[String]) -> Result<Vec<RunSummary>> {
    let mut cfg = ExperimentConfig::load(config_path, overrides)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    cfg.seeds
        .clone()
        .into_iter()
        .map(|s| train_seed(&cfg, s))
        .collect()
}

pub fn experiment_id(cfg: &ExperimentConfig, seed: u64) -> String {
    format!("{}-{}-s{seed}", cfg.method(), cfg.env.name())
}

fn create_run_dir(root: &Path, id: &str) -> Result<PathBuf> {
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = format!("{id}-{stamp}");
    for attempt in 0.. {
        let name = if attempt == 0 {
            base.clone()
        } else {
            format!("{base}-{attempt}")
        };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io(&dir, e)),
        }
    }
    unreachable!()
}

pub fn train_seed(cfg: &ExperimentConfig, seed: u64) -> Result<RunSummary> {
    let env = cfg.build_env()?;
    let training = cfg.training(seed);
    training.validate(env.spec().num_objectives)?;
    // Fail on an unwritable output directory before spending time on training.
    let dir = create_run_dir(&cfg.output_dir, &experiment_id(cfg, seed))?;
    let outcome = run_training(env.as_ref(), &training)?;
    write_run(&dir, cfg, seed, &outcome)?;
    Ok(RunSummary {
        dir,
        seed,
        final_metrics: outcome.history.last().expect("warmup row").clone(),
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Renders rows as CSV text.
pub(crate) fn csv_text<R, S>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

pub fn format_metrics(history: &[GenerationMetrics], wall_clock: bool) -> String {
    let header: Vec<&str> = METRICS_HEADER.split(',').collect();
    csv_text(
        &header,
        history.iter().map(|h| {
            vec![
                h.generation.to_string(),
                h.hv.to_string(),
                h.sp.map_or_else(|| "undefined".to_string(), |v| v.to_string()),
                h.archive_size.to_string(),
                h.stationary_fallbacks.to_string(),
                if wall_clock {
                    format!("{:.3}", h.seconds)
                } else {
                    "0".to_string()
                },
            ]
        }),
    )
    .expect("in-memory csv")
}

fn write_run(dir: &Path, cfg: &ExperimentConfig, seed: u64, outcome: &TrainingOutcome) -> Result<()> {
    let ckpt_dir = dir.join(CHECKPOINT_DIR);
    fs::create_dir(&ckpt_dir).map_err(|e| Error::io(&ckpt_dir, e))?;
    let mut entries = Vec::with_capacity(outcome.archive.len());
    for e in outcome.archive.iter() {
        let rel = format!("{CHECKPOINT_DIR}/{}.ckpt", e.id);
        checkpoint::save(&e.agent, &dir.join(&rel))?;
        entries.push(FrontierEntry {
            objectives: e.objectives.to_vec(),
            generation: e.generation,
            source: e.source,
            checkpoint: rel,
        });
    }
    let doc = FrontierDoc {
        schema_version: FRONTIER_SCHEMA_VERSION,
        experiment_id: experiment_id(cfg, seed),
        m: cfg.evolution.reference_point.len(),
        reference_point: cfg.evolution.reference_point.clone(),
        entries,
    };
    write(&dir.join(FRONTIER_FILE), &doc.to_json()?)?;
    write(
        &dir.join(METRICS_FILE),
        &format_metrics(&outcome.history, cfg.metrics.wall_clock),
    )?;
    let mut log = String::new();
    for s in &outcome.selections {
        log.push_str(&serde_json::to_string(s)?);
        log.push('\n');
    }
    write(&dir.join(SELECTION_FILE), &log)?;
    write(&dir.join(CONFIG_FILE), &cfg.resolved_for(seed).to_toml()?)
}

/// One parsed metrics row; `sp` is `None` where the log says `undefined`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub generation: usize,
    pub hv: f64,
    pub sp: Option<f64>,
    pub archive_size: usize,
    pub stationary_fallbacks: usize,
    pub seconds: f64,
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    if rd.headers()?.iter().collect::<Vec<_>>().join(",") != METRICS_HEADER {
        return Err(Error::Invalid(format!("metrics header must be `{METRICS_HEADER}`")));
    }
    rd.records()
        .map(|rec| {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |col: &str| Error::Invalid(format!("metrics line {line}: bad `{col}` value"));
            let num = |i: usize, col: &str| rec[i].parse::<f64>().map_err(|_| bad(col));
            let count = |i: usize, col: &str| rec[i].parse::<usize>().map_err(|_| bad(col));
            Ok(MetricsRow {
                generation: count(0, "generation")?,
                hv: num(1, "hv")?,
                sp: match &rec[2] {
                    "undefined" => None,
                    _ => Some(num(2, "sp")?),
                },
                archive_size: count(3, "archive_size")?,
                stationary_fallbacks: count(4, "stationary_fallbacks")?,
                seconds: num(5, "seconds")?,
            })
        })
        .collect()
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}
