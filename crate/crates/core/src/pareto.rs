//! Minimum-norm common ascent direction.
//!
//! Given one gradient per objective, the convex combination with the smallest
//! Euclidean norm is either zero (the point is Pareto stationary) or a
//! direction along which every objective increases by at least its squared
//! norm. The combination weights solve a quadratic program over the
//! probability simplex, which only depends on the gradients through their
//! `m x m` Gram matrix.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// A point on the probability simplex: nonnegative components summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct WeightVector<T = f64>(Vec<T>);

impl<T: Scalar> WeightVector<T> {
    /// Default feasibility tolerance: 1e-9 for `f64`, a few ulps for coarser types.
    pub fn tolerance(m: usize) -> T {
        T::lit(1e-9).max(T::epsilon() * T::from_usize_lossy(4 * m.max(1)))
    }

    pub fn new(values: Vec<T>) -> Result<Self> {
        let tol = Self::tolerance(values.len());
        Self::with_tolerance(values, tol)
    }

    pub fn with_tolerance(values: Vec<T>, tol: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("weight vector"));
        }
        if values.iter().any(|w| !w.is_finite() || *w < -tol) {
            return Err(Error::OffSimplex(format!("{values:?} has a negative component")));
        }
        let sum: T = values.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::OffSimplex(format!("{values:?} sums to {sum}")));
        }
        Ok(WeightVector(values.into_iter().map(|w| w.max(T::zero())).collect()))
    }

    pub fn uniform(m: usize) -> Self {
        WeightVector(vec![T::one() / T::from_usize_lossy(m); m])
    }

    /// The `i`-th vertex of the simplex.
    pub fn unit(m: usize, i: usize) -> Self {
        let mut w = vec![T::zero(); m];
        w[i] = T::one();
        WeightVector(w)
    }

    /// Rescales a nonnegative vector to sum to one. `None` if it is all zero.
    pub fn normalized(values: &[T]) -> Option<Self> {
        let sum: T = values.iter().copied().sum();
        if !(sum > T::zero()) || values.iter().any(|v| *v < T::zero()) {
            return None;
        }
        Some(WeightVector(values.iter().map(|&v| v / sum).collect()))
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for WeightVector<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl<T> From<WeightVector<T>> for Vec<T> {
    fn from(w: WeightVector<T>) -> Vec<T> {
        w.0
    }
}

impl<T> std::ops::Deref for WeightVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// `m x d` matrix whose row `i` is the gradient of objective `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet<T = f64> {
    m: usize,
    d: usize,
    data: Vec<T>,
}

impl<T: Scalar> GradientSet<T> {
    pub fn zeros(m: usize, d: usize) -> Self {
        GradientSet {
            m,
            d,
            data: vec![T::zero(); m * d],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Empty("gradient set"));
        }
        let d = rows[0].len();
        let mut data = Vec::with_capacity(m * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(GradientSet { m, d, data })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let d = self.d;
        &mut self.data[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.d.max(1)).take(self.m)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Row-major `m x m` matrix of pairwise inner products.
    pub fn gram(&self) -> Vec<T> {
        let m = self.m;
        let mut k = vec![T::zero(); m * m];
        for i in 0..m {
            for j in i..m {
                let v = dot(self.row(i), self.row(j));
                k[i * m + j] = v;
                k[j * m + i] = v;
            }
        }
        k
    }

    /// `sum_i alpha_i * row_i`.
    pub fn combine(&self, alpha: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.d];
        for (row, &a) in self.rows().zip(alpha) {
            if a == T::zero() {
                continue;
            }
            for (o, &g) in out.iter_mut().zip(row) {
                *o += a * g;
            }
        }
        out
    }

    pub fn max_row_norm_sq(&self) -> T {
        self.rows()
            .map(|r| dot(r, r))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solution of the min-norm problem.
#[derive(Clone, Debug, PartialEq)]
pub struct AscentResult<T = f64> {
    pub alpha: WeightVector<T>,
    /// `sum_i alpha_i g_i`.
    pub direction: Vec<T>,
    pub squared_norm: T,
    pub stationary: bool,
    pub iterations: usize,
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_to_simplex<T: Scalar>(v: &[T]) -> WeightVector<T> {
    let m = v.len();
    assert!(m > 0, "cannot project an empty vector");
    debug_assert!(v.iter().all(|x| x.is_finite()));

    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));

    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - T::one()) / T::from_usize_lossy(j + 1);
        if u - t > T::zero() {
            theta = t;
        }
    }
    WeightVector(v.iter().map(|&x| (x - theta).max(T::zero())).collect())
}

/// Closed-form minimizer for two objectives: the weight on the first gradient.
pub fn analytic_two_objective_alpha<T: Scalar>(g1: &[T], g2: &[T]) -> T {
    assert_eq!(g1.len(), g2.len());
    let diff_sq: T = g1.iter().zip(g2).map(|(&a, &b)| (a - b) * (a - b)).sum();
    if diff_sq.sqrt() < T::lit(1e-12) {
        return T::lit(0.5);
    }
    let num: T = g1.iter().zip(g2).map(|(&a, &b)| (b - a) * b).sum();
    (num / diff_sq).max(T::zero()).min(T::one())
}

/// Scale-aware zero threshold for the squared norm of the combined gradient.
pub fn default_stationarity_eps<T: Scalar>(g: &GradientSet<T>) -> T {
    T::lit(1e-8) * (T::one() + g.max_row_norm_sq())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinNormSolver<T = f64> {
    /// Stop once no weight moves by more than this in one iteration.
    pub tol: T,
    pub max_iters: usize,
    /// `None` selects [`default_stationarity_eps`].
    pub stationarity_eps: Option<T>,
}

impl<T: Scalar> Default for MinNormSolver<T> {
    fn default() -> Self {
        MinNormSolver {
            tol: T::lit(1e-10),
            max_iters: 10_000,
            stationarity_eps: None,
        }
    }
}

impl<T: Scalar> MinNormSolver<T> {
    pub fn solve(&self, g: &GradientSet<T>) -> Result<AscentResult<T>> {
        if !g.is_finite() {
            return Err(Error::NonFinite("gradient set"));
        }
        let m = g.m();
        if m < 2 {
            return Err(Error::UnsupportedObjectives(m));
        }
        let gram = g.gram();
        let (mut alpha, iterations) = projected_gradient(&gram, m, self.tol, self.max_iters);

        if let Some(refined) = refine_support(&gram, m, &alpha) {
            if quad_form(&gram, m, &refined) <= quad_form(&gram, m, &alpha) {
                alpha = refined;
            }
        }

        let alpha = WeightVector(alpha);
        let direction = g.combine(&alpha);
        let squared_norm = dot(&direction, &direction);
        let eps = self
            .stationarity_eps
            .unwrap_or_else(|| default_stationarity_eps(g));
        Ok(AscentResult {
            alpha,
            direction,
            squared_norm,
            stationary: squared_norm <= eps,
            iterations,
        })
    }
}

/// Solves the min-norm problem with the default stationarity threshold.
pub fn min_norm_direction<T: Scalar>(
    g: &GradientSet<T>,
    tol: T,
    max_iters: usize,
) -> Result<AscentResult<T>> {
    MinNormSolver {
        tol,
        max_iters,
        stationarity_eps: None,
    }
    .solve(g)
}

pub fn is_pareto_stationary<T: Scalar>(g: &GradientSet<T>, eps: T) -> Result<bool> {
    let res = MinNormSolver {
        stationarity_eps: Some(eps),
        ..MinNormSolver::default()
    }
    .solve(g)?;
    Ok(res.stationary)
}

fn quad_form<T: Scalar>(k: &[T], m: usize, a: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..m {
        for j in 0..m {
            s += a[i] * k[i * m + j] * a[j];
        }
    }
    s
}

fn mat_vec<T: Scalar>(k: &[T], m: usize, a: &[T]) -> Vec<T> {
    (0..m)
        .map(|i| (0..m).map(|j| k[i * m + j] * a[j]).sum())
        .collect()
}

/// Projected gradient descent on `a^T K a`, started from the barycenter.
fn projected_gradient<T: Scalar>(k: &[T], m: usize, tol: T, max_iters: usize) -> (Vec<T>, usize) {
    let max_diag = (0..m).map(|i| k[i * m + i]).fold(T::zero(), T::max);
    let max_row = (0..m)
        .map(|i| (0..m).map(|j| k[i * m + j].abs()).sum::<T>())
        .fold(T::zero(), T::max);
    let lipschitz = max_diag + max_row;
    let mut alpha = vec![T::one() / T::from_usize_lossy(m); m];
    if !(lipschitz > T::zero()) {
        // all-zero gradients: every alpha is optimal
        return (alpha, 0);
    }
    let step = T::one() / (T::lit(2.0) * lipschitz);
    let two = T::lit(2.0);

    for iter in 0..max_iters {
        let grad = mat_vec(k, m, &alpha);
        let trial: Vec<T> = alpha
            .iter()
            .zip(&grad)
            .map(|(&a, &g)| a - step * two * g)
            .collect();
        let next = project_to_simplex(&trial).0;
        let change = next
            .iter()
            .zip(&alpha)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        alpha = next;
        if change < tol {
            return (alpha, iter + 1);
        }
    }
    (alpha, max_iters)
}

/// Exact solve of the equality-constrained problem on the support found by the
/// iterative solver, with a few active-set corrections. Returns `None` when the
/// reduced system is singular or the corrections do not settle.
fn refine_support<T: Scalar>(k: &[T], m: usize, start: &[T]) -> Option<Vec<T>> {
    let mut support: Vec<bool> = start.iter().map(|&a| a > T::zero()).collect();
    let scale = (0..m).map(|i| k[i * m + i]).fold(T::zero(), T::max);
    if !(scale > T::zero()) {
        return None;
    }
    let slack = T::lit(1e-12) * scale;

    for _ in 0..(4 * m) {
        let idx: Vec<usize> = (0..m).filter(|&i| support[i]).collect();
        let sol = solve_on_support(k, m, &idx)?;
        let mut alpha = vec![T::zero(); m];
        for (&i, &a) in idx.iter().zip(&sol) {
            alpha[i] = a;
        }

        if let Some((pos, _)) = idx
            .iter()
            .zip(&sol)
            .filter(|(_, &a)| a < T::zero())
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        {
            if idx.len() == 1 {
                return None;
            }
            support[*pos] = false;
            continue;
        }

        let value = quad_form(k, m, &alpha);
        let grad = mat_vec(k, m, &alpha);
        let violator = (0..m)
            .filter(|&i| !support[i] && grad[i] < value - slack)
            .min_by(|&a, &b| grad[a].partial_cmp(&grad[b]).unwrap());
        match violator {
            Some(i) => support[i] = true,
            None => return Some(alpha),
        }
    }
    None
}

/// Solves `K_SS a = mu 1`, `1^T a = 1` by Gaussian elimination with partial pivoting.
fn solve_on_support<T: Scalar>(k: &[T], m: usize, idx: &[usize]) -> Option<Vec<T>> {
    let s = idx.len();
    if s == 0 {
        return None;
    }
    if s == 1 {
        return Some(vec![T::one()]);
    }
    let n = s + 1;
    let mut a = vec![T::zero(); n * (n + 1)];
    let w = n + 1;
    let mut scale = T::zero();
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            a[r * w + c] = k[i * m + j];
            scale = scale.max(k[i * m + j].abs());
        }
        a[r * w + s] = -T::one();
    }
    for c in 0..s {
        a[s * w + c] = T::one();
    }
    a[s * w + n] = T::one();

    let pivot_floor = T::epsilon() * T::lit(1e3) * scale.max(T::one());
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * w + col].abs().partial_cmp(&a[y * w + col].abs()).unwrap())
            .unwrap();
        if a[piv * w + col].abs() <= pivot_floor {
            return None;
        }
        if piv != col {
            for c in 0..w {
                a.swap(piv * w + c, col * w + c);
            }
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * w + col] / a[col * w + col];
            if f == T::zero() {
                continue;
            }
            for c in col..w {
                let v = a[col * w + c];
                a[r * w + c] -= f * v;
            }
        }
    }
    let sol: Vec<T> = (0..s).map(|r| a[r * w + n] / a[r * w + r]).collect();
    if sol.iter().all(|v| v.is_finite()) {
        Some(sol)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs(rows: &[&[f64]]) -> GradientSet<f64> {
        GradientSet::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Exhaustive search over alpha_1 in steps of 1e-4 (two objectives).
    fn grid_min_two(g1: &[f64], g2: &[f64]) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for s in 0..=10_000 {
            let a = s as f64 * 1e-4;
            let v: f64 = g1
                .iter()
                .zip(g2)
                .map(|(x, y)| (a * x + (1.0 - a) * y).powi(2))
                .sum();
            if v < best.0 {
                best = (v, a);
            }
        }
        best
    }

    #[test]
    fn projection_examples() {
        let w = project_to_simplex(&[0.2f64, 0.9]);
        assert!((w[0] - 0.15).abs() < 1e-12 && (w[1] - 0.85).abs() < 1e-12);
        assert_eq!(project_to_simplex(&[1.0, 0.0]).as_slice(), &[1.0, 0.0]);
        let w = project_to_simplex(&[2.0f64, 2.0, 2.0]);
        for x in w.iter() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_grid_oracle_agrees() {
        // fine grid over the 1-simplex for (0.2, 0.9)
        let mut best = (f64::INFINITY, 0.0);
        for s in 0..=100_000 {
            let a = s as f64 * 1e-5;
            let d = (a - 0.2f64).powi(2) + (1.0 - a - 0.9f64).powi(2);
            if d < best.0 {
                best = (d, a);
            }
        }
        assert!((best.1 - 0.15).abs() < 1e-5);
    }

    #[test]
    fn min_norm_orthogonal() {
        let (oracle, a) = grid_min_two(&[1.0, 0.0], &[0.0, 1.0]);
        assert!((oracle - 0.5).abs() < 1e-8 && (a - 0.5).abs() < 1e-4);
        let r = min_norm_direction(&gs(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-10, 10_000).unwrap();
        assert!((r.alpha[0] - 0.5).abs() < 1e-9);
        assert!((r.direction[0] - 0.5).abs() < 1e-9 && (r.direction[1] - 0.5).abs() < 1e-9);
        assert!((r.squared_norm - 0.5).abs() < 1e-9);
        assert!(!r.stationary);
    }

    #[test]
    fn min_norm_opposing_is_stationary() {
        let (oracle, _) = grid_min_two(&[1.0, 0.0], &[-1.0, 0.0]);
        assert!(oracle < 1e-12);
        let r = min_norm_direction(&gs(&[&[1.0, 0.0], &[-1.0, 0.0]]), 1e-10, 10_000).unwrap();
        assert!((r.alpha[0] - 0.5).abs() < 1e-9);
        assert!(r.direction.iter().all(|v| v.abs() < 1e-9));
        assert!(r.stationary);
    }

    #[test]
    fn min_norm_collinear_picks_shorter_endpoint() {
        let (_, a) = grid_min_two(&[1.0, 0.0], &[2.0, 0.0]);
        assert_eq!(a, 1.0);
        let r = min_norm_direction(&gs(&[&[1.0, 0.0], &[2.0, 0.0]]), 1e-10, 10_000).unwrap();
        assert!((r.alpha[0] - 1.0).abs() < 1e-9);
        assert!((r.direction[0] - 1.0).abs() < 1e-9 && r.direction[1].abs() < 1e-12);
    }

    #[test]
    fn analytic_examples() {
        assert!((analytic_two_objective_alpha(&[1.0f64, 0.0], &[0.0, 1.0]) - 0.5).abs() < 1e-15);
        assert_eq!(analytic_two_objective_alpha(&[1.0, 0.0], &[2.0, 0.0]), 1.0);
        assert_eq!(analytic_two_objective_alpha(&[0.3, -0.2], &[0.3, -0.2]), 0.5);
    }

    #[test]
    fn stationarity_examples() {
        assert!(is_pareto_stationary(&gs(&[&[0.7, -0.1], &[-0.7, 0.1]]), 1e-8).unwrap());
        assert!(is_pareto_stationary(&gs(&[&[0.0, 0.0], &[0.0, 0.0]]), 1e-8).unwrap());
        assert!(!is_pareto_stationary(&gs(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-8).unwrap());
    }

    #[test]
    fn non_finite_gradients_rejected() {
        let g = gs(&[&[f64::NAN, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            min_norm_direction(&g, 1e-10, 100),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn single_objective_rejected() {
        let g = gs(&[&[1.0, 0.0]]);
        assert!(min_norm_direction(&g, 1e-10, 100).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.2, -0.2]).is_err());
        assert!(WeightVector::<f64>::normalized(&[0.0, 0.0]).is_none());
        let w: WeightVector<f64> = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<WeightVector<f64>>("[0.25,0.25]").is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let g = GradientSet::<f32>::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = MinNormSolver::default().solve(&g).unwrap();
        assert!((r.alpha[0] - 0.5).abs() < 1e-6);
        assert!((analytic_two_objective_alpha(&[1.0f32, 0.0], &[0.0, 1.0]) - 0.5).abs() < 1e-7);
    }
}
