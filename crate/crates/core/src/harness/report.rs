use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::{csv_text, read_metrics, MetricsRow, CONFIG_FILE, FRONTIER_FILE, METRICS_FILE};
use super::ExperimentConfig;
use crate::archive::FrontierDoc;
use crate::momdp::Environment;
use crate::policy::{checkpoint, evaluate, Evaluation};
use crate::{Error, Result};

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn objective_header(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("objective_{i}")).collect()
}

fn cells(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

fn header<'a>(lead: &[&'a str], names: &'a [String], tail: &[&'a str]) -> Vec<&'a str> {
    lead.iter()
        .copied()
        .chain(names.iter().map(String::as_str))
        .chain(tail.iter().copied())
        .collect()
}

/// Evaluates a checkpoint with the deterministic policy. Writes one row per
/// episode to `episodes_csv` when given.
pub fn cli_eval(
    checkpoint_path: &Path,
    env: &dyn Environment,
    episodes: usize,
    seed: u64,
    episodes_csv: Option<&Path>,
) -> Result<Evaluation> {
    if episodes == 0 {
        return Err(Error::config("episodes", "must be at least 1"));
    }
    let agent = checkpoint::load(checkpoint_path)?;
    let spec = env.spec();
    let have = (agent.policy.state_dim(), agent.policy.action_dim(), agent.num_objectives());
    let want = (spec.state_dim, spec.action_dim, spec.num_objectives);
    if have != want {
        return Err(Error::Invalid(format!(
            "checkpoint shape mismatch: environment `{}` expects (state, action, objectives) = {want:?}, checkpoint has {have:?}",
            env.name()
        )));
    }
    let ev = evaluate(env, &agent.policy, episodes, seed)?;
    if let Some(path) = episodes_csv {
        let names = objective_header(spec.num_objectives);
        let rows = ev.episodes.iter().enumerate().map(|(i, r)| {
            let mut row = vec![i.to_string()];
            row.extend(cells(r));
            row
        });
        write(path, &csv_text(&header(&["episode"], &names, &[]), rows)?)?;
    }
    Ok(ev)
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[derive(Clone, Debug)]
pub struct RunData {
    pub dir: PathBuf,
    pub method: String,
    pub metrics: Vec<MetricsRow>,
    pub frontier: FrontierDoc,
}

impl RunData {
    pub fn load(dir: &Path) -> Result<Self> {
        let cfg = ExperimentConfig::load(&dir.join(CONFIG_FILE), &[])?;
        let metrics = read_metrics(&dir.join(METRICS_FILE))?;
        if metrics.is_empty() {
            return Err(Error::Invalid(format!("{}: metrics log has no rows", dir.display())));
        }
        Ok(RunData {
            dir: dir.to_path_buf(),
            method: cfg.method(),
            metrics,
            frontier: FrontierDoc::load(&dir.join(FRONTIER_FILE))?,
        })
    }

    pub fn final_row(&self) -> &MetricsRow {
        self.metrics.last().expect("checked non-empty on load")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub runs: usize,
    pub hv_mean: f64,
    pub hv_std: f64,
    /// Over the runs whose final sparsity is defined.
    pub sp: Option<(f64, f64)>,
    pub sp_runs: usize,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub m: usize,
    pub methods: Vec<MethodSummary>,
}

impl Report {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<20} {:>4} {:>28} {:>28}\n",
            "method", "runs", "HV (mean ± std)", "SP (mean ± std)"
        );
        for s in &self.methods {
            let sp = match s.sp {
                Some((m, sd)) => format!("{m:.6e} ± {sd:.6e}"),
                None => "undefined".into(),
            };
            writeln!(
                out,
                "{:<20} {:>4} {:>28} {:>28}",
                s.method,
                s.runs,
                format!("{:.6} ± {:.6}", s.hv_mean, s.hv_std),
                sp
            )
            .unwrap();
        }
        out
    }
}

/// Aggregates finished run directories by method tag and writes
/// `summary.csv`, `curves.csv` and `frontier_scatter.csv` into `out_dir`.
pub fn cli_report(run_dirs: &[PathBuf], out_dir: &Path) -> Result<Report> {
    if run_dirs.is_empty() {
        return Err(Error::Empty("run directories"));
    }
    let runs = run_dirs.iter().map(|d| RunData::load(d)).collect::<Result<Vec<_>>>()?;
    let m = runs[0].frontier.m;
    if let Some(bad) = runs.iter().find(|r| r.frontier.m != m) {
        return Err(Error::Invalid(format!(
            "inconsistent objective count: {} has m = {}, {} has m = {m}",
            bad.dir.display(),
            bad.frontier.m,
            runs[0].dir.display()
        )));
    }

    let mut methods: Vec<String> = Vec::new();
    for r in &runs {
        if !methods.contains(&r.method) {
            methods.push(r.method.clone());
        }
    }
    let summaries: Vec<MethodSummary> = methods
        .iter()
        .map(|method| {
            let group: Vec<&RunData> = runs.iter().filter(|r| &r.method == method).collect();
            let hv: Vec<f64> = group.iter().map(|r| r.final_row().hv).collect();
            let sp: Vec<f64> = group.iter().filter_map(|r| r.final_row().sp).collect();
            let (hv_mean, hv_std) = mean_std(&hv).expect("non-empty group");
            MethodSummary {
                method: method.clone(),
                runs: group.len(),
                hv_mean,
                hv_std,
                sp: mean_std(&sp),
                sp_runs: sp.len(),
            }
        })
        .collect();

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| x.to_string());

    let summary = csv_text(
        &["method", "runs", "hv_mean", "hv_std", "sp_runs", "sp_mean", "sp_std"],
        summaries.iter().map(|s| {
            vec![
                s.method.clone(),
                s.runs.to_string(),
                s.hv_mean.to_string(),
                s.hv_std.to_string(),
                s.sp_runs.to_string(),
                opt(s.sp.map(|p| p.0)),
                opt(s.sp.map(|p| p.1)),
            ]
        }),
    )?;
    write(&out_dir.join("summary.csv"), &summary)?;

    let mut curves = Vec::new();
    let mut scatter = Vec::new();
    for r in &runs {
        let run = r.dir.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        for row in &r.metrics {
            curves.push(vec![
                r.method.clone(),
                run.clone(),
                row.generation.to_string(),
                row.hv.to_string(),
                opt(row.sp),
                row.archive_size.to_string(),
            ]);
        }
        for e in &r.frontier.entries {
            let mut row = vec![r.method.clone(), run.clone()];
            row.extend(cells(&e.objectives));
            row.push(e.generation.to_string());
            row.push(e.source.as_str().to_string());
            scatter.push(row);
        }
    }
    write(
        &out_dir.join("curves.csv"),
        &csv_text(&["method", "run", "generation", "hv", "sp", "archive_size"], curves)?,
    )?;
    let names = objective_header(m);
    write(
        &out_dir.join("frontier_scatter.csv"),
        &csv_text(&header(&["method", "run"], &names, &["generation", "source"]), scatter)?,
    )?;

    Ok(Report {
        m,
        methods: summaries,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportSummary {
    pub entries: usize,
    pub hv: f64,
    pub sp: Option<f64>,
}

/// Re-scores a frontier document, checks that its checkpoints load, and
/// writes a flat CSV of the entries.
pub fn frontier_export(frontier_path: &Path, out_csv: &Path) -> Result<ExportSummary> {
    let doc = FrontierDoc::load(frontier_path)?;
    let base = frontier_path.parent().unwrap_or(Path::new("."));
    for e in &doc.entries {
        let agent = checkpoint::load(&base.join(&e.checkpoint))?;
        if agent.num_objectives() != doc.m {
            return Err(Error::DimensionMismatch {
                expected: doc.m,
                actual: agent.num_objectives(),
            });
        }
    }
    let names = objective_header(doc.m);
    let rows = doc.entries.iter().map(|e| {
        let mut row = cells(&e.objectives);
        row.push(e.generation.to_string());
        row.push(e.source.as_str().to_string());
        row.push(e.checkpoint.clone());
        row
    });
    write(
        out_csv,
        &csv_text(&header(&[], &names, &["generation", "source", "checkpoint"]), rows)?,
    )?;
    Ok(ExportSummary {
        entries: doc.entries.len(),
        hv: doc.hypervolume()?,
        sp: doc.sparsity(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[4.0, 6.0]), Some((5.0, 1.0)));
        assert_eq!(mean_std(&[3.0]), Some((3.0, 0.0)));
        assert_eq!(mean_std(&[]), None);
    }
}
