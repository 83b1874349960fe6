//! Partitioned greedy randomized selection.
//!
//! Objective space around the reference point is cut into direction-based
//! regions. Inside every occupied region the members are ranked by distance
//! from the reference point and one of the `k` farthest is drawn at random.

use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use crate::archive::{HasObjectives, ReferencePoint};
use crate::rng::Rng;
use crate::{Error, Result};

/// Euclidean distance between an objective vector and the reference point.
pub fn distance_to_ref(j: &[f64], z: &[f64]) -> Result<f64> {
    if j.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            actual: j.len(),
        });
    }
    Ok(j.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Assignment of objective-space directions to `n` regions.
#[derive(Clone, Debug, PartialEq)]
pub enum Regions {
    /// Two objectives: equal angular sectors of `[0, 90]` degrees. A point on a
    /// boundary belongs to the higher-angle sector.
    Angular { n: usize },
    /// Any number of objectives: nearest unit direction by cosine.
    Directions(Vec<Vec<f64>>),
}

impl Regions {
    pub fn for_objectives(m: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("evolution.n", "need at least one region"));
        }
        match m {
            2 => Ok(Regions::Angular { n }),
            3 => Ok(Regions::Directions(spiral_directions(n))),
            _ => Err(Error::UnsupportedObjectives(m)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Regions::Angular { n } => *n,
            Regions::Directions(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Region of the offset `j - z` (componentwise nonnegative).
    pub fn region_of(&self, offset: &[f64]) -> usize {
        match self {
            Regions::Angular { n } => {
                let theta = offset[1].atan2(offset[0]).clamp(0.0, FRAC_PI_2);
                let pos = theta / FRAC_PI_2 * *n as f64;
                // absorb rounding so exact boundaries go up
                ((pos + 1e-9).floor() as usize).min(n - 1)
            }
            Regions::Directions(dirs) => {
                let norm = offset.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return 0;
                }
                let mut best = (f64::NEG_INFINITY, 0);
                for (r, d) in dirs.iter().enumerate() {
                    let c: f64 = d.iter().zip(offset).map(|(a, b)| a * b).sum::<f64>() / norm;
                    if c > best.0 + 1e-12 {
                        best = (c, r);
                    }
                }
                best.1
            }
        }
    }
}

/// `n` unit vectors spread over the positive octant by a golden-angle spiral.
pub fn spiral_directions(n: usize) -> Vec<Vec<f64>> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..n)
        .map(|i| {
            // equal-area steps in height over the octant cap
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = ((i as f64 * golden).fract()) * FRAC_PI_2;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// One PGR decision, kept for the selection log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PgrPick {
    /// Index into the candidate slice.
    pub index: usize,
    pub region: usize,
    pub distance: f64,
    /// Rank by distance inside the region (0 = farthest).
    pub rank: usize,
    pub region_size: usize,
    /// `false` for global random fill-ins after the per-region picks.
    pub greedy: bool,
}

/// Picks up to `count` candidates: one of the top `k` per occupied region (in
/// region order), then uniform draws from the rest until `count` is reached.
pub fn pgr_select<E: HasObjectives<f64>>(
    candidates: &[E],
    z: &ReferencePoint<f64>,
    regions: &Regions,
    count: usize,
    k: usize,
    rng: &mut Rng,
) -> Result<Vec<PgrPick>> {
    if candidates.is_empty() {
        return Err(Error::Empty("population"));
    }
    if k == 0 {
        return Err(Error::config("evolution.k", "must be at least 1"));
    }
    let mut members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); regions.len()];
    for (i, c) in candidates.iter().enumerate() {
        let j = c.objectives();
        z.check(j)?;
        let offset: Vec<f64> = j.iter().zip(z.as_slice()).map(|(a, b)| a - b).collect();
        members[regions.region_of(&offset)].push((i, distance_to_ref(j, z.as_slice())?));
    }

    let mut picks = Vec::with_capacity(count);
    let mut taken = vec![false; candidates.len()];
    for (region, list) in members.iter_mut().enumerate() {
        if picks.len() >= count {
            break;
        }
        if list.is_empty() {
            continue;
        }
        list.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let top = k.min(list.len());
        let rank = rng.random_range(0..top);
        let (index, distance) = list[rank];
        taken[index] = true;
        picks.push(PgrPick {
            index,
            region,
            distance,
            rank,
            region_size: list.len(),
            greedy: true,
        });
    }

    let mut rest: Vec<usize> = (0..candidates.len()).filter(|&i| !taken[i]).collect();
    rest.shuffle(rng);
    for index in rest.into_iter().take(count.saturating_sub(picks.len())) {
        let j = candidates[index].objectives();
        let offset: Vec<f64> = j.iter().zip(z.as_slice()).map(|(a, b)| a - b).collect();
        let region = regions.region_of(&offset);
        let distance = distance_to_ref(j, z.as_slice())?;
        let rank = members[region].iter().position(|&(i, _)| i == index).unwrap_or(0);
        picks.push(PgrPick {
            index,
            region,
            distance,
            rank,
            region_size: members[region].len(),
            greedy: false,
        });
    }
    Ok(picks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn z0() -> ReferencePoint<f64> {
        ReferencePoint::new(vec![0.0, 0.0])
    }

    #[test]
    fn distances() {
        assert_eq!(distance_to_ref(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert_eq!(distance_to_ref(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(distance_to_ref(&[1.0, 1.0, 1.0], &[0.0; 3]).unwrap(), 3f64.sqrt());
        assert!(distance_to_ref(&[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn two_region_example() {
        let pts = vec![vec![3.0, 1.0], vec![1.0, 3.0]];
        let regions = Regions::for_objectives(2, 2).unwrap();
        assert_eq!(regions.region_of(&pts[0]), 0);
        assert_eq!(regions.region_of(&pts[1]), 1);
        let picks = pgr_select(&pts, &z0(), &regions, 2, 1, &mut stream(&[0])).unwrap();
        let chosen: Vec<usize> = picks.iter().map(|p| p.index).collect();
        assert_eq!(chosen, vec![0, 1]);
        assert!(picks.iter().all(|p| p.greedy && p.rank == 0));
    }

    #[test]
    fn boundary_goes_to_higher_angle() {
        let regions = Regions::Angular { n: 2 };
        assert_eq!(regions.region_of(&[2.0, 2.0]), 1);
        let r4 = Regions::Angular { n: 4 };
        assert_eq!(r4.region_of(&[1.0, 0.0]), 0);
        assert_eq!(r4.region_of(&[0.0, 1.0]), 3);
        assert_eq!(r4.region_of(&[0.0, 0.0]), 0);
    }

    #[test]
    fn rejects_points_below_reference() {
        let pts = vec![vec![3.0, -1.0]];
        let r = pgr_select(&pts, &z0(), &Regions::Angular { n: 2 }, 1, 1, &mut stream(&[0]));
        assert!(matches!(r, Err(Error::BelowReference { .. })));
    }

    #[test]
    fn picks_are_top_k_and_cover_regions() {
        let mut rng = stream(&[5]);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)])
            .collect();
        let regions = Regions::Angular { n: 4 };
        let occupied: std::collections::BTreeSet<usize> =
            pts.iter().map(|p| regions.region_of(p)).collect();
        for _ in 0..50 {
            let picks = pgr_select(&pts, &z0(), &regions, 4, 3, &mut rng).unwrap();
            let covered: std::collections::BTreeSet<usize> =
                picks.iter().filter(|p| p.greedy).map(|p| p.region).collect();
            assert_eq!(covered, occupied);
            for p in picks.iter().filter(|p| p.greedy) {
                assert!(p.rank < 3);
                let better = pts
                    .iter()
                    .filter(|q| regions.region_of(q) == p.region)
                    .filter(|q| distance_to_ref(q, &[0.0, 0.0]).unwrap() > p.distance)
                    .count();
                assert!(better < 3);
            }
            let mut idx: Vec<usize> = picks.iter().map(|p| p.index).collect();
            idx.sort();
            idx.dedup();
            assert_eq!(idx.len(), picks.len());
        }
    }

    #[test]
    fn fills_up_when_regions_are_empty() {
        // all points in one sector
        let pts = vec![vec![5.0, 0.1], vec![4.0, 0.2], vec![3.0, 0.1]];
        let picks = pgr_select(&pts, &z0(), &Regions::Angular { n: 3 }, 3, 1, &mut stream(&[2])).unwrap();
        assert_eq!(picks.len(), 3);
        assert_eq!(picks[0].index, 0);
        assert!(picks[0].greedy && !picks[1].greedy && !picks[2].greedy);
        let picks = pgr_select(&pts, &z0(), &Regions::Angular { n: 3 }, 8, 1, &mut stream(&[2])).unwrap();
        assert_eq!(picks.len(), 3);
    }

    #[test]
    fn spiral_directions_are_unit_and_positive() {
        let d = spiral_directions(7);
        assert_eq!(d.len(), 7);
        for v in &d {
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(v.iter().all(|&x| x >= 0.0));
        }
        let r = Regions::Directions(d.clone());
        for (i, v) in d.iter().enumerate() {
            assert_eq!(r.region_of(v), i);
        }
    }
}
