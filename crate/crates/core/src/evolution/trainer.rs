use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{paft_select, pgr_select, GenerationConfig, JobKind, PaftConfig, Regions};
use crate::archive::{NonDominatedSet, PolicyEntry, ReferencePoint, Source};
use crate::momdp::{simplex_lattice, Environment};
use crate::pareto::{MinNormSolver, WeightVector};
use crate::policy::{
    collect_batch, estimate_gradient_set, evaluate, ppo_update, Agent, PolicyConfig, PpoConfig,
};
use crate::rng::{domain, stream};
use crate::{Error, Result};

/// Everything the loop needs besides the environment.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub generation: GenerationConfig,
    pub ppo: PpoConfig,
    pub policy: PolicyConfig,
    pub paft: PaftConfig,
    /// Deterministic episodes averaged per snapshot evaluation.
    pub eval_episodes: usize,
    /// Evaluate and archive every this many iterations (the last iteration of
    /// a lane is always evaluated).
    pub eval_every: usize,
    pub solver: MinNormSolver<f64>,
}

impl TrainingConfig {
    pub fn new(generation: GenerationConfig) -> Self {
        TrainingConfig {
            generation,
            ppo: PpoConfig::default(),
            policy: PolicyConfig::default(),
            paft: PaftConfig::default(),
            eval_episodes: 8,
            eval_every: 1,
            solver: MinNormSolver::default(),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        self.generation.validate(m)?;
        self.ppo.validate()?;
        if self.eval_episodes == 0 {
            return Err(Error::config("evaluation.episodes", "must be at least 1"));
        }
        if self.eval_every == 0 {
            return Err(Error::config("evaluation.every", "must be at least 1"));
        }
        if !(2..=3).contains(&m) {
            return Err(Error::UnsupportedObjectives(m));
        }
        Ok(())
    }

    fn reference(&self) -> ReferencePoint<f64> {
        ReferencePoint::new(self.generation.reference_point.clone())
    }
}

/// Live lineages: the most recent parameters of every tracked policy.
pub type Population = Vec<PolicyEntry>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationMetrics {
    pub generation: usize,
    pub hv: f64,
    pub sp: Option<f64>,
    pub archive_size: usize,
    pub stationary_fallbacks: usize,
    pub seconds: f64,
}

/// One line of the selection log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectionRecord {
    pub generation: usize,
    pub lane: usize,
    pub kind: &'static str,
    pub start: String,
    pub start_objectives: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// Scalarization weights at the first iteration.
    pub weights: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squared_norm: Option<f64>,
    pub stationary_fallback: bool,
    pub finish: String,
    pub finish_objectives: Vec<f64>,
}

/// Result of training one lane.
#[derive(Clone, Debug)]
pub struct LaneRecord {
    pub snapshots: Vec<PolicyEntry>,
    pub weights: Vec<Vec<f64>>,
    pub squared_norms: Vec<f64>,
    pub stationary_fallback: bool,
}

impl LaneRecord {
    pub fn finish(&self) -> &PolicyEntry {
        self.snapshots.last().expect("a lane always has a final snapshot")
    }
}

#[derive(Clone, Debug)]
enum Rule {
    Fixed(WeightVector<f64>),
    Ascent,
}

struct Lane {
    start: Arc<Agent>,
    rule: Rule,
    iters: usize,
    source: Source,
    generation: usize,
    id_prefix: String,
    rng_key: Vec<u64>,
}

fn evaluate_entry(
    env: &dyn Environment,
    cfg: &TrainingConfig,
    agent: Arc<Agent>,
    id: String,
    generation: usize,
    source: Source,
) -> Result<PolicyEntry> {
    let ev = evaluate(env, &agent.policy, cfg.eval_episodes, cfg.generation.seed)?;
    Ok(PolicyEntry {
        id,
        agent,
        objectives: ev.mean,
        generation,
        source,
    })
}

fn run_lane(env: &dyn Environment, cfg: &TrainingConfig, lane: &Lane) -> Result<LaneRecord> {
    let m = env.spec().num_objectives;
    let mut rng = stream(&lane.rng_key);
    let mut agent = lane.start.clone();
    let mut record = LaneRecord {
        snapshots: Vec::new(),
        weights: Vec::new(),
        squared_norms: Vec::new(),
        stationary_fallback: false,
    };
    if lane.iters == 0 {
        record.snapshots.push(evaluate_entry(
            env,
            cfg,
            agent,
            format!("{}-init", lane.id_prefix),
            lane.generation,
            lane.source,
        )?);
        return Ok(record);
    }

    let recompute = cfg.generation.recompute_interval;
    let mut weights: Vec<f64> = match &lane.rule {
        Rule::Fixed(w) => w.to_vec(),
        Rule::Ascent => vec![1.0 / m as f64; m],
    };
    for it in 0..lane.iters {
        let mut batch = collect_batch(env, &agent, cfg.ppo.batch_episodes, cfg.ppo.lambda, &mut rng)?;
        if cfg.ppo.normalize_advantages {
            batch = batch.with_normalized_advantages();
        }
        let due = it == 0 || (recompute > 0 && it % recompute == 0);
        if matches!(lane.rule, Rule::Ascent) && due && !record.stationary_fallback {
            let grads = estimate_gradient_set(&agent.policy, &batch)?;
            let res = cfg.solver.solve(&grads)?;
            record.squared_norms.push(res.squared_norm);
            if res.stationary {
                record.stationary_fallback = true;
                weights = WeightVector::<f64>::uniform(m).to_vec();
            } else {
                weights = res.alpha.to_vec();
            }
        }
        record.weights.push(weights.clone());
        agent = Arc::new(ppo_update(&agent, &batch, &weights, &cfg.ppo, &mut rng)?);

        let iter_no = it + 1;
        if iter_no % cfg.eval_every == 0 || iter_no == lane.iters {
            record.snapshots.push(evaluate_entry(
                env,
                cfg,
                agent.clone(),
                format!("{}-i{iter_no:03}", lane.id_prefix),
                lane.generation,
                lane.source,
            )?);
        }
    }
    Ok(record)
}

fn run_lanes(env: &dyn Environment, cfg: &TrainingConfig, lanes: &[Lane]) -> Result<Vec<LaneRecord>> {
    lanes
        .par_iter()
        .map(|lane| run_lane(env, cfg, lane))
        .collect()
}

/// `p` weights spread evenly over the simplex. Two objectives give
/// `(i/(p-1), 1 - i/(p-1))`; otherwise the smallest simplex lattice with at
/// least `p` points is thinned by farthest-point selection seeded with the
/// vertices.
pub fn even_weights(m: usize, p: usize) -> Result<Vec<WeightVector<f64>>> {
    if p < m {
        return Err(Error::config(
            "evolution.p",
            format!("{p} weights cannot cover {m} objective extremes"),
        ));
    }
    let mut degree = 1;
    let lattice = loop {
        let l = simplex_lattice(m, degree);
        if l.len() >= p {
            break l;
        }
        degree += 1;
    };
    let chosen: Vec<usize> = if lattice.len() == p {
        (0..p).collect()
    } else {
        let d2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let mut picked: Vec<usize> = (0..lattice.len())
            .filter(|&i| lattice[i].contains(&1.0))
            .collect();
        while picked.len() < p {
            let next = (0..lattice.len())
                .filter(|i| !picked.contains(i))
                .max_by(|&a, &b| {
                    let da = picked.iter().map(|&c| d2(&lattice[a], &lattice[c])).fold(f64::INFINITY, f64::min);
                    let db = picked.iter().map(|&c| d2(&lattice[b], &lattice[c])).fold(f64::INFINITY, f64::min);
                    da.partial_cmp(&db).unwrap().then(b.cmp(&a))
                })
                .expect("lattice larger than p");
            picked.push(next);
        }
        picked.sort_unstable();
        picked
    };
    chosen
        .into_iter()
        .map(|i| WeightVector::new(lattice[i].clone()))
        .collect()
}

/// Training state between generations.
#[derive(Clone, Debug)]
pub struct TrainingState {
    pub population: Population,
    pub archive: NonDominatedSet<PolicyEntry>,
    pub history: Vec<GenerationMetrics>,
    pub selections: Vec<SelectionRecord>,
    /// Snapshots not offered to the archive because they fail to dominate the
    /// reference point.
    pub below_reference: usize,
    pub generations_done: usize,
    started: Instant,
}

impl TrainingState {
    fn offer(&mut self, z: &ReferencePoint<f64>, records: &[LaneRecord]) {
        for rec in records {
            for snap in &rec.snapshots {
                if z.is_dominated_by(&snap.objectives) {
                    self.archive.insert(snap.clone());
                } else {
                    self.below_reference += 1;
                }
            }
        }
    }

    fn record_metrics(&mut self, z: &ReferencePoint<f64>, generation: usize, fallbacks: usize) -> Result<()> {
        self.history.push(GenerationMetrics {
            generation,
            hv: self.archive.hypervolume(z)?,
            sp: self.archive.sparsity(),
            archive_size: self.archive.len(),
            stationary_fallbacks: fallbacks,
            seconds: self.started.elapsed().as_secs_f64(),
        });
        Ok(())
    }
}

fn record_for(
    generation: usize,
    lane: usize,
    kind: &'static str,
    start: &PolicyEntry,
    rec: &LaneRecord,
) -> SelectionRecord {
    SelectionRecord {
        generation,
        lane,
        kind,
        start: start.id.clone(),
        start_objectives: start.objectives.to_vec(),
        region: None,
        rank: None,
        region_size: None,
        distance: None,
        gap: None,
        weights: rec.weights.first().cloned().unwrap_or_default(),
        squared_norm: rec.squared_norms.first().copied(),
        stationary_fallback: rec.stationary_fallback,
        finish: rec.finish().id.clone(),
        finish_objectives: rec.finish().objectives.to_vec(),
    }
}

/// Builds `p` random policies and trains each for `m_w` iterations on its own
/// evenly spread weight vector.
pub fn warmup(env: &dyn Environment, cfg: &TrainingConfig) -> Result<TrainingState> {
    let spec = env.spec();
    let m = spec.num_objectives;
    cfg.validate(m)?;
    let g = &cfg.generation;
    let z = cfg.reference();
    let weights = even_weights(m, g.p)?;

    let lanes: Vec<Lane> = weights
        .iter()
        .enumerate()
        .map(|(lane, w)| {
            let mut rng = stream(&[domain::INIT, g.seed, lane as u64]);
            Lane {
                start: Arc::new(Agent::init(spec.state_dim, spec.action_dim, m, &cfg.policy, &mut rng)),
                rule: Rule::Fixed(w.clone()),
                iters: g.m_w,
                source: Source::Warmup,
                generation: 0,
                id_prefix: format!("w-l{lane:02}"),
                rng_key: vec![domain::WARMUP, g.seed, lane as u64],
            }
        })
        .collect();
    let records = run_lanes(env, cfg, &lanes)?;

    let mut state = TrainingState {
        population: records.iter().map(|r| r.finish().clone()).collect(),
        archive: NonDominatedSet::new(),
        history: Vec::new(),
        selections: Vec::new(),
        below_reference: 0,
        generations_done: 0,
        started: Instant::now(),
    };
    state.offer(&z, &records);
    for (lane, rec) in records.iter().enumerate() {
        let start = rec.snapshots.first().expect("snapshot");
        let mut r = record_for(0, lane, "warmup", start, rec);
        r.start = lanes[lane].id_prefix.clone();
        r.start_objectives = Vec::new();
        r.weights = weights[lane].to_vec();
        state.selections.push(r);
    }
    state.record_metrics(&z, 0, 0)?;
    Ok(state)
}

/// Runs generation `gen_index` (zero-based) in place.
pub fn run_generation(
    state: &mut TrainingState,
    gen_index: usize,
    env: &dyn Environment,
    cfg: &TrainingConfig,
) -> Result<()> {
    let g = &cfg.generation;
    let m = env.spec().num_objectives;
    let z = cfg.reference();
    let generation = gen_index + 1;
    let (p_a, p_b) = g.lane_split(gen_index, cfg.paft.enabled);

    let regions = Regions::for_objectives(m, g.n.unwrap_or(p_a))?;
    let mut select_rng = stream(&[domain::SELECT, g.seed, gen_index as u64]);
    let picks = pgr_select(&state.population, &z, &regions, p_a, g.k, &mut select_rng)?;

    let jobs = if p_b > 0 && state.archive.len() >= 2 {
        paft_select(
            state.archive.entries(),
            cfg.paft.n_pairs(g.p, m),
            p_b,
            g.m_iters,
        )?
    } else {
        Vec::new()
    };

    let lane_key = |lane: usize| vec![domain::LANE, g.seed, gen_index as u64, lane as u64];
    let mut lanes = Vec::with_capacity(picks.len() + jobs.len());
    for (lane, pick) in picks.iter().enumerate() {
        lanes.push(Lane {
            start: state.population[pick.index].agent.clone(),
            rule: Rule::Ascent,
            iters: g.m_iters,
            source: Source::ParetoAscent,
            generation,
            id_prefix: format!("g{generation:03}-l{lane:02}"),
            rng_key: lane_key(lane),
        });
    }
    for (j, job) in jobs.iter().enumerate() {
        let lane = picks.len() + j;
        lanes.push(Lane {
            start: state.archive.entries()[job.entry].agent.clone(),
            rule: Rule::Fixed(job.weights.clone()),
            iters: job.budget_iters,
            source: match job.kind {
                JobKind::GapPair => Source::PaftPair,
                JobKind::ObjectiveExtreme => Source::PaftExtreme,
            },
            generation,
            id_prefix: format!("g{generation:03}-l{lane:02}"),
            rng_key: lane_key(lane),
        });
    }

    let records = run_lanes(env, cfg, &lanes)?;

    for (lane, (pick, rec)) in picks.iter().zip(&records).enumerate() {
        let mut r = record_for(generation, lane, "pgr", &state.population[pick.index], rec);
        r.region = Some(pick.region);
        r.rank = Some(pick.rank);
        r.region_size = Some(pick.region_size);
        r.distance = Some(pick.distance);
        state.selections.push(r);
    }
    for (j, (job, rec)) in jobs.iter().zip(&records[picks.len()..]).enumerate() {
        let kind = match job.kind {
            JobKind::GapPair => "paft_pair",
            JobKind::ObjectiveExtreme => "paft_extreme",
        };
        let mut r = record_for(generation, picks.len() + j, kind, &state.archive.entries()[job.entry], rec);
        r.gap = job.gap;
        state.selections.push(r);
    }

    state.offer(&z, &records);

    for (pick, rec) in picks.iter().zip(&records) {
        state.population[pick.index] = rec.finish().clone();
    }
    for rec in &records[picks.len()..] {
        let fin = rec.finish();
        if state.archive.iter().any(|e| e.id == fin.id) {
            state.population.push(fin.clone());
        }
    }

    let fallbacks = records[..picks.len()]
        .iter()
        .filter(|r| r.stationary_fallback)
        .count();
    state.generations_done = generation;
    state.record_metrics(&z, generation, fallbacks)
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub archive: NonDominatedSet<PolicyEntry>,
    pub history: Vec<GenerationMetrics>,
    pub selections: Vec<SelectionRecord>,
    pub population: Population,
    pub below_reference: usize,
}

/// Warmup followed by `M` generations.
pub fn run_training(env: &dyn Environment, cfg: &TrainingConfig) -> Result<TrainingOutcome> {
    let mut state = warmup(env, cfg)?;
    for gen_index in 0..cfg.generation.total_generations {
        run_generation(&mut state, gen_index, env, cfg)?;
    }
    Ok(TrainingOutcome {
        archive: state.archive,
        history: state.history,
        selections: state.selections,
        population: state.population,
        below_reference: state.below_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momdp::MoQuadratic;

    #[test]
    fn even_weights_two_objectives() {
        let w = even_weights(2, 8).unwrap();
        assert_eq!(w.len(), 8);
        assert_eq!(w[0].as_slice(), &[0.0, 1.0]);
        assert_eq!(w[7].as_slice(), &[1.0, 0.0]);
        for pair in w.windows(2) {
            assert!((pair[1][0] - pair[0][0] - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn even_weights_three_objectives_lattice() {
        let w = even_weights(3, 6).unwrap();
        let mut got: Vec<Vec<f64>> = w.iter().map(|v| v.to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.0, 0.5, 0.5],
        ];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);

        let w = even_weights(3, 8).unwrap();
        assert_eq!(w.len(), 8);
        for i in 0..3 {
            assert!(w.iter().any(|v| v[i] == 1.0));
        }
        assert!(even_weights(3, 2).is_err());
    }

    fn quick_cfg(m_w: usize, total: usize) -> TrainingConfig {
        let mut g: GenerationConfig =
            toml::from_str("M = 0\nreference_point = [-2.0, -2.0]").unwrap();
        g.total_generations = total;
        g.m_w = m_w;
        g.m_iters = 2;
        g.p = 4;
        let mut cfg = TrainingConfig::new(g);
        cfg.ppo.batch_episodes = 8;
        cfg.ppo.epochs = 2;
        cfg.eval_episodes = 1;
        cfg
    }

    fn quad() -> MoQuadratic {
        MoQuadratic::new("mo_quadratic", vec![vec![1.0, 0.0], vec![0.0, 1.0]], (0.0, 1.0)).unwrap()
    }

    #[test]
    fn untrained_warmup() {
        let out = run_training(&quad(), &quick_cfg(0, 0)).unwrap();
        assert_eq!(out.population.len(), 4);
        assert!(out.population.iter().all(|e| e.id.ends_with("-init")));
        assert_eq!(out.history.len(), 1);
        assert!(!out.archive.is_empty());
        assert!(out.archive.iter().all(|e| e.source == Source::Warmup));
    }

    #[test]
    fn lane_budget_per_generation() {
        let env = quad();
        let cfg = quick_cfg(1, 3);
        let mut state = warmup(&env, &cfg).unwrap();
        for gen_index in 0..3 {
            let before = state.selections.len();
            run_generation(&mut state, gen_index, &env, &cfg).unwrap();
            let recs = &state.selections[before..];
            let pgr = recs.iter().filter(|r| r.kind == "pgr").count();
            let paft = recs.len() - pgr;
            let (p_a, p_b) = cfg.generation.lane_split(gen_index, true);
            assert_eq!(pgr, p_a);
            assert!(paft <= p_b);
            if gen_index < cfg.generation.paft_start() {
                assert_eq!(paft, 0);
            }
        }
        assert_eq!(state.history.len(), 4);
        for w in state.history.windows(2) {
            assert!(w[1].hv >= w[0].hv);
        }
    }
}
