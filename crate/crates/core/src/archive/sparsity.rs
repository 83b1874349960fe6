use crate::Scalar;

/// Mean squared consecutive gap of the per-objective sorted value lists.
///
/// Exact duplicate points are merged first. `None` when fewer than two
/// distinct points remain, since the normalizer `|J| - 1` vanishes.
pub fn sparsity<T: Scalar, P: AsRef<[T]>>(points: &[P]) -> Option<T> {
    let mut distinct: Vec<&[T]> = Vec::with_capacity(points.len());
    for p in points {
        let p = p.as_ref();
        if !distinct.contains(&p) {
            distinct.push(p);
        }
    }
    if distinct.len() < 2 {
        return None;
    }
    let m = distinct[0].len();
    let mut total = T::zero();
    let mut column = Vec::with_capacity(distinct.len());
    for i in 0..m {
        column.clear();
        column.extend(distinct.iter().map(|p| p[i]));
        column.sort_by(|a, b| a.partial_cmp(b).unwrap());
        total += column.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    }
    Some(total / T::from_usize_lossy(distinct.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let pts = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(sparsity(&pts), Some(2.0));
        assert_eq!(sparsity(&[vec![0.0, 0.0], vec![1.0, 1.0]]), Some(2.0));
        assert_eq!(sparsity(&[vec![0.4, 0.7], vec![0.4, 0.7]]), None);
        assert_eq!(sparsity::<f64, Vec<f64>>(&[]), None);
    }

    #[test]
    fn translation_invariant() {
        let pts = vec![vec![1.0, 3.0], vec![2.5, 2.0], vec![3.0, 0.5]];
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + 10.0, p[1] - 4.0]).collect();
        assert!((sparsity(&pts).unwrap() - sparsity(&moved).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn filling_the_largest_gap_does_not_increase() {
        let pts = vec![vec![0.0, 4.0], vec![1.0, 3.0], vec![4.0, 0.0]];
        let before = sparsity(&pts).unwrap();
        let mut filled = pts.clone();
        filled.push(vec![2.5, 1.5]);
        assert!(sparsity(&filled).unwrap() <= before);
    }
}
