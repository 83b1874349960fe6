//! Pareto adaptive fine-tuning: pick the front's widest gaps and its
//! per-objective extremes, and assign each a fixed scalarization.

use serde::Serialize;

use crate::archive::HasObjectives;
use crate::pareto::WeightVector;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    GapPair,
    ObjectiveExtreme,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinetuneJob {
    /// Index into the front slice passed to [`paft_select`].
    pub entry: usize,
    pub weights: WeightVector<f64>,
    pub kind: JobKind,
    pub budget_iters: usize,
    /// Nearest-neighbour distance of the pair, for gap jobs.
    pub gap: Option<f64>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Nearest neighbour (lowest index on ties) and its distance for every point.
pub fn nearest_neighbours(points: &[&[f64]]) -> Vec<(usize, f64)> {
    (0..points.len())
        .map(|i| {
            let mut best = (usize::MAX, f64::INFINITY);
            for j in 0..points.len() {
                if j != i {
                    let d = dist(points[i], points[j]);
                    if d < best.1 {
                        best = (j, d);
                    }
                }
            }
            best
        })
        .collect()
}

/// Neighbouring pairs `(i, j, d)` with `i < j`, widest first. Two points are
/// neighbours when no third point lies strictly inside the ball having them
/// as a diameter; on a two-objective front these are the consecutive points.
/// Every mutually-nearest pair is included.
pub fn gap_pairs(points: &[&[f64]]) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let sq = |a: usize, b: usize| {
        points[a]
            .iter()
            .zip(points[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
    };
    let mut pairs = Vec::new();
    let mut by_distance: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        by_distance.clear();
        by_distance.extend((0..n).filter(|&k| k != i));
        by_distance.sort_by(|&a, &b| sq(i, a).partial_cmp(&sq(i, b)).unwrap().then(a.cmp(&b)));
        for (pos, &j) in by_distance.iter().enumerate() {
            if j < i {
                continue;
            }
            let dij = sq(i, j);
            // a blocker must be closer to i than j is
            let blocked = by_distance[..pos]
                .iter()
                .any(|&k| sq(i, k) + sq(j, k) < dij);
            if !blocked {
                pairs.push((i, j, dij.sqrt()));
            }
        }
    }
    pairs.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then((a.0, a.1).cmp(&(b.0, b.1))));
    pairs
}

/// Simplex weights pointing from `from` towards `to`: the positive part of
/// the unit gap direction, renormalized.
pub fn gap_weights(from: &[f64], to: &[f64]) -> WeightVector<f64> {
    let diff: Vec<f64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
    let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    let positive: Vec<f64> = diff
        .iter()
        .map(|&v| if norm > 0.0 { (v / norm).max(0.0) } else { 0.0 })
        .collect();
    debug_assert!(
        norm == 0.0 || positive.iter().any(|&v| v > 0.0),
        "gap endpoints must be mutually non-dominated"
    );
    WeightVector::normalized(&positive).unwrap_or_else(|| WeightVector::uniform(from.len()))
}

/// Selects fine-tuning jobs from a non-dominated front: two opposite-facing
/// jobs for each of the `n_pairs` widest neighbour gaps (no policy in two
/// pairs), then one job per objective for the entry that is best on it.
/// At most `cap` jobs.
pub fn paft_select<E: HasObjectives<f64>>(
    front: &[E],
    n_pairs: usize,
    cap: usize,
    budget_iters: usize,
) -> Result<Vec<FinetuneJob>> {
    if front.len() < 2 {
        return Err(Error::Invalid(format!(
            "fine-tuning needs at least two non-dominated policies, got {}",
            front.len()
        )));
    }
    let points: Vec<&[f64]> = front.iter().map(|e| e.objectives()).collect();
    let m = points[0].len();
    let mut jobs = Vec::new();

    let mut used = vec![false; points.len()];
    let chosen: Vec<(usize, usize, f64)> = gap_pairs(&points)
        .into_iter()
        .filter(|&(a, b, _)| {
            if used[a] || used[b] {
                return false;
            }
            used[a] = true;
            used[b] = true;
            true
        })
        .take(n_pairs)
        .collect();
    for (a, b, d) in chosen {
        jobs.push(FinetuneJob {
            entry: a,
            weights: gap_weights(points[a], points[b]),
            kind: JobKind::GapPair,
            budget_iters,
            gap: Some(d),
        });
        jobs.push(FinetuneJob {
            entry: b,
            weights: gap_weights(points[b], points[a]),
            kind: JobKind::GapPair,
            budget_iters,
            gap: Some(d),
        });
    }

    for obj in 0..m {
        let best = (0..points.len())
            .max_by(|&x, &y| {
                points[x][obj]
                    .partial_cmp(&points[y][obj])
                    .unwrap()
                    .then(y.cmp(&x))
            })
            .expect("non-empty front");
        jobs.push(FinetuneJob {
            entry: best,
            weights: WeightVector::unit(m, obj),
            kind: JobKind::ObjectiveExtreme,
            budget_iters,
            gap: None,
        });
    }
    jobs.truncate(cap);
    Ok(jobs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn front() -> Vec<Vec<f64>> {
        vec![vec![0.0, 4.0], vec![1.0, 3.0], vec![3.0, 1.0], vec![4.0, 0.0]]
    }

    #[test]
    fn widest_gap_is_the_middle_pair() {
        let f = front();
        let pts: Vec<&[f64]> = f.iter().map(|p| p.as_slice()).collect();
        // brute force nearest-neighbour distances: sqrt(2) for every point
        let nn = nearest_neighbours(&pts);
        assert!(nn.iter().all(|&(_, d)| (d - 2f64.sqrt()).abs() < 1e-12));
        let pairs = gap_pairs(&pts);
        let idx: Vec<(usize, usize)> = pairs.iter().map(|p| (p.0, p.1)).collect();
        assert_eq!(idx, vec![(1, 2), (0, 1), (2, 3)]);
        assert!((pairs[0].2 - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        let jobs = paft_select(&f, 1, 8, 5).unwrap();
        assert_eq!(jobs.len(), 4);
        assert_eq!((jobs[0].entry, jobs[1].entry), (1, 2));
        assert_eq!(jobs[0].weights.as_slice(), &[1.0, 0.0]);
        assert_eq!(jobs[1].weights.as_slice(), &[0.0, 1.0]);
        assert_eq!(jobs[2].kind, JobKind::ObjectiveExtreme);
    }

    #[test]
    fn pairs_are_disjoint_and_widest_first() {
        let f = vec![vec![0.0, 10.0], vec![5.0, 5.0], vec![6.0, 4.0], vec![10.0, 0.0]];
        let jobs = paft_select(&f, 2, 8, 1).unwrap();
        let gaps: Vec<(usize, f64)> = jobs
            .iter()
            .filter(|j| j.kind == JobKind::GapPair)
            .map(|j| (j.entry, j.gap.unwrap()))
            .collect();
        // (0,1) and (2,3) are the wide gaps; (1,2) is narrow
        assert_eq!(gaps.iter().map(|g| g.0).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert!(gaps[0].1 >= gaps[2].1);
    }

    #[test]
    fn mutually_nearest_pairs_are_neighbours() {
        let f = [vec![0.0, 4.0], vec![0.5, 3.2], vec![2.0, 2.5], vec![3.9, 0.2], vec![4.0, 0.0]];
        let pts: Vec<&[f64]> = f.iter().map(|p| p.as_slice()).collect();
        let nn = nearest_neighbours(&pts);
        let pairs = gap_pairs(&pts);
        for (i, &(j, _)) in nn.iter().enumerate() {
            if nn[j].0 == i {
                let (a, b) = (i.min(j), i.max(j));
                assert!(pairs.iter().any(|p| (p.0, p.1) == (a, b)));
            }
        }
    }

    #[test]
    fn gap_direction_rule() {
        let w = gap_weights(&[1.0, 3.0], &[3.0, 1.0]);
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
        let w = gap_weights(&[3.0, 1.0], &[1.0, 3.0]);
        assert_eq!(w.as_slice(), &[0.0, 1.0]);
        let w = gap_weights(&[0.0, 1.0, 1.0], &[1.0, 0.0, 2.0]);
        assert!((w[0] - 0.5).abs() < 1e-12 && w[1] == 0.0 && (w[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn extremes_get_unit_weights() {
        let f = front();
        let jobs = paft_select(&f, 0, 8, 5).unwrap();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[0].entry, 3);
        assert_eq!(jobs[0].weights.as_slice(), &[1.0, 0.0]);
        assert_eq!(jobs[1].entry, 0);
        assert_eq!(jobs[1].weights.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn singleton_is_an_error() {
        assert!(paft_select(&[vec![1.0, 1.0]], 1, 4, 5).is_err());
    }

    #[test]
    fn cap_truncates() {
        let jobs = paft_select(&front(), 2, 3, 5).unwrap();
        assert_eq!(jobs.len(), 3);
        assert!(jobs.iter().all(|j| j.budget_iters == 5));
    }
}
