use crate::{Error, Result, Scalar};

use super::ReferencePoint;

/// Exact Lebesgue measure of the union of boxes `[z, p]` (maximization).
///
/// Two objectives use a sweep over points sorted by the first objective;
/// three objectives slice along the third objective and sweep each slice.
/// Dominated or duplicate inputs are allowed.
pub fn hypervolume<T: Scalar, P: AsRef<[T]>>(points: &[P], z: &ReferencePoint<T>) -> Result<T> {
    let m = z.m();
    if !(2..=3).contains(&m) {
        return Err(Error::UnsupportedObjectives(m));
    }
    for p in points {
        let p = p.as_ref();
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("hypervolume point"));
        }
        z.check(p)?;
    }
    let z = z.as_slice();
    let pts: Vec<&[T]> = points.iter().map(|p| p.as_ref()).collect();
    Ok(match m {
        2 => area_2d(pts.iter().map(|p| (p[0], p[1])).collect(), z[0], z[1]),
        _ => volume_3d(&pts, z),
    })
}

fn area_2d<T: Scalar>(mut pts: Vec<(T, T)>, zx: T, zy: T) -> T {
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    let mut best_y = zy;
    let mut area = T::zero();
    for (x, y) in pts {
        if y > best_y {
            area += (x - zx) * (y - best_y);
            best_y = y;
        }
    }
    area
}

/// Staircase of 2D non-dominated points sorted by x descending (y ascending).
struct Staircase<T> {
    pts: Vec<(T, T)>,
}

impl<T: Scalar> Staircase<T> {
    fn insert(&mut self, x: T, y: T) {
        // first index whose x is <= the new x
        let pos = self.pts.partition_point(|p| p.0 > x);
        // a point at or left of pos-1 with larger x and y >= new y dominates it
        if pos > 0 && self.pts[pos - 1].1 >= y {
            return;
        }
        if pos < self.pts.len() && self.pts[pos].0 == x && self.pts[pos].1 >= y {
            return;
        }
        let mut end = pos;
        while end < self.pts.len() && self.pts[end].1 <= y {
            end += 1;
        }
        self.pts.splice(pos..end, std::iter::once((x, y)));
    }

    fn area(&self, zx: T, zy: T) -> T {
        let mut best_y = zy;
        let mut area = T::zero();
        for &(x, y) in &self.pts {
            area += (x - zx) * (y - best_y);
            best_y = y;
        }
        area
    }
}

fn volume_3d<T: Scalar>(pts: &[&[T]], z: &[T]) -> T {
    let mut order: Vec<&[T]> = pts.to_vec();
    order.sort_by(|a, b| b[2].partial_cmp(&a[2]).unwrap());
    let mut stairs = Staircase { pts: Vec::new() };
    let mut volume = T::zero();
    for (i, p) in order.iter().enumerate() {
        stairs.insert(p[0], p[1]);
        let floor = order.get(i + 1).map_or(z[2], |q| q[2]);
        let height = p[2] - floor;
        if height > T::zero() {
            volume += stairs.area(z[0], z[1]) * height;
        }
    }
    volume
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[f64]) -> ReferencePoint<f64> {
        ReferencePoint::new(v.to_vec())
    }

    #[test]
    fn staircase_example() {
        // union of [0,1]x[0,3], [0,2]x[0,2], [0,3]x[0,1]: 3 + 2 + 1 by inclusion-exclusion
        let pts = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(hypervolume(&pts, &z(&[0.0, 0.0])).unwrap(), 6.0);
    }

    #[test]
    fn single_boxes() {
        assert_eq!(hypervolume(&[vec![2.5, 4.0]], &z(&[0.0, 0.0])).unwrap(), 10.0);
        assert_eq!(hypervolume(&[vec![1.0, 1.0, 1.0]], &z(&[0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(hypervolume::<f64, Vec<f64>>(&[], &z(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn dominated_and_duplicate_points_do_not_count() {
        let base = vec![vec![1.0, 3.0], vec![3.0, 1.0]];
        let mut extra = base.clone();
        extra.push(vec![0.5, 0.5]);
        extra.push(vec![1.0, 3.0]);
        let r = z(&[0.0, 0.0]);
        assert_eq!(hypervolume(&base, &r).unwrap(), hypervolume(&extra, &r).unwrap());

        let base3 = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]];
        let mut extra3 = base3.clone();
        extra3.push(vec![1.0, 1.0, 1.0]);
        extra3.push(vec![3.0, 2.0, 1.0]);
        let r3 = z(&[0.0, 0.0, 0.0]);
        assert_eq!(hypervolume(&base3, &r3).unwrap(), hypervolume(&extra3, &r3).unwrap());
    }

    #[test]
    fn three_d_inclusion_exclusion() {
        // boxes (1,2,3) and (3,2,1): 6 + 6 - intersection (1,2,1) = 10
        let pts = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]];
        assert_eq!(hypervolume(&pts, &z(&[0.0, 0.0, 0.0])).unwrap(), 10.0);
    }

    #[test]
    fn rejects_points_below_reference_and_high_dims() {
        assert!(matches!(
            hypervolume(&[vec![1.0, -1.0]], &z(&[0.0, 0.0])),
            Err(Error::BelowReference { .. })
        ));
        assert!(matches!(
            hypervolume(&[vec![1.0; 4]], &z(&[0.0; 4])),
            Err(Error::UnsupportedObjectives(4))
        ));
    }

    #[test]
    fn reference_offset() {
        let pts = vec![vec![1.0, 3.0], vec![3.0, 1.0]];
        // shift everything by (-2,-5)
        let shifted = vec![vec![-1.0, -2.0], vec![1.0, -4.0]];
        assert_eq!(
            hypervolume(&pts, &z(&[0.0, 0.0])).unwrap(),
            hypervolume(&shifted, &z(&[-2.0, -5.0])).unwrap()
        );
    }
}
