//! Nested exhaustive cross-validation with per-outer-set λ selection.
//!
//! Two instantiations are provided. Nested LOOCV holds out one unit `n` and
//! tunes λ by LOOCV on the remaining `N − 1` units, which in closed form uses
//! leave-two-out blocks `{m, n}`. Nested L2OCV holds out a pair `{m, n}` and
//! tunes by LOOCV on the rest, which uses leave-three-out blocks `{m, n, v}`.
//! All fits are read off one hat matrix per grid value.

use itertools::Itertools;
use rayon::prelude::*;

use crate::cv::{l2ocv_pair_terms, loocv_terms, pair_index, CvOutcome};
use crate::error::{Error, Result};
use crate::linalg::{block, Dataset, Penalty, RidgeContext, RidgeSolver};

/// Strictly increasing, positive, finite ridge parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("λ grid is empty".into()));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidLambda(bad));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("λ grid must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// `count` points evenly spaced in log10 between `lo` and `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || count == 0 {
            return Err(Error::InvalidInput(format!(
                "cannot build log grid from {lo} to {hi} with {count} points"
            )));
        }
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|i| 10f64.powf(a + step * i as f64)).collect();
        values[0] = lo;
        values[count - 1] = hi;
        Self::new(values)
    }

    pub fn singleton(lambda: f64) -> Result<Self> {
        Self::new(vec![lambda])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self::log_spaced(1e-3, 2500.0, 100).expect("default grid is valid")
    }
}

/// One full-data ridge context per grid value, shared by every outer set.
#[derive(Debug, Clone)]
pub struct RidgePath {
    grid: LambdaGrid,
    contexts: Vec<RidgeContext>,
}

impl RidgePath {
    pub fn new(ds: &Dataset, grid: &LambdaGrid, penalty: Penalty) -> Result<Self> {
        let solver = RidgeSolver::new(ds, penalty)?;
        let contexts = grid
            .values()
            .par_iter()
            .map(|&l| solver.context(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: grid.clone(),
            contexts,
        })
    }

    pub fn grid(&self) -> &LambdaGrid {
        &self.grid
    }

    pub fn contexts(&self) -> &[RidgeContext] {
        &self.contexts
    }

    pub fn n(&self) -> usize {
        self.contexts[0].n()
    }
}

/// Nested estimate with the λ chosen for each outer test set.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedCvResult {
    pub outcome: CvOutcome,
    pub lambdas: Vec<f64>,
    pub avg_lambda: f64,
}

impl NestedCvResult {
    fn new(per_unit: Vec<f64>, lambdas: Vec<f64>) -> Self {
        let estimate = per_unit.iter().sum::<f64>() / per_unit.len() as f64;
        let avg_lambda = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
        Self {
            outcome: CvOutcome {
                estimate,
                per_unit,
                lambdas: lambdas.clone(),
            },
            lambdas,
            avg_lambda,
        }
    }
}

/// Grid position of the smallest finite criterion; ties go to the larger λ.
fn argmin_largest(criteria: impl Iterator<Item = Option<f64>>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, c) in criteria.enumerate() {
        if let Some(c) = c.filter(|c| c.is_finite()) {
            if best.is_none_or(|(_, b)| c <= b) {
                best = Some((k, c));
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Inner LOOCV error on `[N] \ {n}`: mean over `m ≠ n` of the leave-{m, n}-out
/// error for m. `None` when any block is singular.
pub fn inner_loocv_criterion(ctx: &RidgeContext, n: usize) -> Option<f64> {
    let size = ctx.n();
    let mut acc = 0.0;
    for m in (0..size).filter(|&m| m != n) {
        let (lo, hi) = (m.min(n), m.max(n));
        let (q_lo, q_hi) = block::solve2(
            ctx.h(lo, lo),
            ctx.h(hi, hi),
            ctx.h(lo, hi),
            ctx.resid[lo],
            ctx.resid[hi],
        )?;
        let q_m = if m < n { q_lo } else { q_hi };
        acc += q_m * q_m;
    }
    Some(acc / (size - 1) as f64)
}

/// Inner LOOCV error on `[N] \ {m, n}`: mean over the remaining v of the
/// leave-{m, n, v}-out error for v.
pub fn inner_l2ocv_criterion(ctx: &RidgeContext, m: usize, n: usize) -> Option<f64> {
    let size = ctx.n();
    let (m, n) = (m.min(n), m.max(n));
    let mut acc = 0.0;
    for v in (0..size).filter(|&v| v != m && v != n) {
        let mut t = [m, n, v];
        t.sort_unstable();
        let q = block::solve3(triple_hat(ctx, t), [ctx.resid[t[0]], ctx.resid[t[1]], ctx.resid[t[2]]])?;
        let pos = t.iter().position(|&i| i == v).expect("v is in the triple");
        acc += q[pos] * q[pos];
    }
    Some(acc / (size - 2) as f64)
}

#[inline]
fn triple_hat(ctx: &RidgeContext, t: [usize; 3]) -> [f64; 6] {
    [
        ctx.h(t[0], t[0]),
        ctx.h(t[1], t[1]),
        ctx.h(t[2], t[2]),
        ctx.h(t[0], t[1]),
        ctx.h(t[0], t[2]),
        ctx.h(t[1], t[2]),
    ]
}

pub fn inner_select_loocv(path: &RidgePath, n: usize) -> Result<f64> {
    if path.n() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: path.n(),
        });
    }
    argmin_largest(path.contexts().iter().map(|c| inner_loocv_criterion(c, n)))
        .map(|k| path.grid().values()[k])
        .ok_or(Error::NoFeasibleLambda { outer: vec![n] })
}

pub fn inner_select_l2ocv(path: &RidgePath, m: usize, n: usize) -> Result<f64> {
    if path.n() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: path.n(),
        });
    }
    if m == n {
        return Err(Error::InvalidInput("outer pair needs two distinct units".into()));
    }
    argmin_largest(path.contexts().iter().map(|c| inner_l2ocv_criterion(c, m, n)))
        .map(|k| path.grid().values()[k])
        .ok_or(Error::NoFeasibleLambda {
            outer: vec![m.min(n), m.max(n)],
        })
}

pub fn nested_loocv(ds: &Dataset, grid: &LambdaGrid) -> Result<NestedCvResult> {
    if ds.n() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: ds.n(),
        });
    }
    nested_loocv_path(&RidgePath::new(ds, grid, Penalty::Full)?)
}

/// Nested LOOCV on a prebuilt path; per-unit losses are indexed by unit.
pub fn nested_loocv_path(path: &RidgePath) -> Result<NestedCvResult> {
    let n = path.n();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let criteria: Vec<Vec<Option<f64>>> = path
        .contexts()
        .par_iter()
        .map(|ctx| (0..n).map(|u| inner_loocv_criterion(ctx, u)).collect())
        .collect();
    let mut per_unit = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for u in 0..n {
        let k = argmin_largest(criteria.iter().map(|c| c[u]))
            .ok_or(Error::NoFeasibleLambda { outer: vec![u] })?;
        let ctx = &path.contexts()[k];
        let denom = 1.0 - ctx.h(u, u);
        if !(denom > 1e-12) {
            return Err(Error::SingularTestBlock {
                partition: Some(u),
                indices: vec![u],
                condition: 1.0 / denom.abs(),
            });
        }
        per_unit.push((ctx.resid[u] / denom).powi(2));
        lambdas.push(ctx.lambda);
    }
    Ok(NestedCvResult::new(per_unit, lambdas))
}

pub fn nested_l2ocv(ds: &Dataset, grid: &LambdaGrid) -> Result<NestedCvResult> {
    if ds.n() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: ds.n(),
        });
    }
    nested_l2ocv_path(&RidgePath::new(ds, grid, Penalty::Full)?)
}

#[inline]
fn unordered_index(n: usize, a: usize, b: usize) -> usize {
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Inner criteria for every outer pair at one λ, from a single sweep over triples.
///
/// Each triple `{a, b, c}` contributes `q_a²` to pair `{b, c}`, `q_b²` to `{a, c}`
/// and `q_c²` to `{a, b}`. Lexicographic triple order means each pair receives
/// its contributions in ascending v, the same order as [`inner_l2ocv_criterion`].
fn all_pair_criteria(ctx: &RidgeContext) -> Vec<Option<f64>> {
    let n = ctx.n();
    let pairs = n * (n - 1) / 2;
    let mut sums = vec![0.0; pairs];
    let mut ok = vec![true; pairs];
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                let t = [a, b, c];
                let (ab, ac, bc) = (
                    unordered_index(n, a, b),
                    unordered_index(n, a, c),
                    unordered_index(n, b, c),
                );
                match block::solve3(triple_hat(ctx, t), [ctx.resid[a], ctx.resid[b], ctx.resid[c]]) {
                    Some(q) => {
                        sums[bc] += q[0] * q[0];
                        sums[ac] += q[1] * q[1];
                        sums[ab] += q[2] * q[2];
                    }
                    None => {
                        ok[ab] = false;
                        ok[ac] = false;
                        ok[bc] = false;
                    }
                }
            }
        }
    }
    let inner = (n - 2) as f64;
    sums.into_iter()
        .zip(ok)
        .map(|(s, fine)| fine.then(|| s / inner))
        .collect()
}

/// Nested L2OCV on a prebuilt path.
///
/// Per-unit losses use the pair layout of [`pair_index`]; `lambdas` holds one
/// selected value per unordered outer pair in lexicographic order.
pub fn nested_l2ocv_path(path: &RidgePath) -> Result<NestedCvResult> {
    let n = path.n();
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let criteria: Vec<Vec<Option<f64>>> = path.contexts().par_iter().map(all_pair_criteria).collect();
    let mut per_unit = vec![0.0; n * (n - 1)];
    let mut lambdas = Vec::with_capacity(n * (n - 1) / 2);
    for (idx, (m, c)) in (0..n).tuple_combinations().enumerate() {
        let k = argmin_largest(criteria.iter().map(|cr| cr[idx]))
            .ok_or(Error::NoFeasibleLambda { outer: vec![m, c] })?;
        let ctx = &path.contexts()[k];
        let (t_m, t_c) = l2ocv_pair_terms(ctx, m, c)?;
        per_unit[pair_index(n, m, c)] = t_m;
        per_unit[pair_index(n, c, m)] = t_c;
        lambdas.push(ctx.lambda);
    }
    Ok(NestedCvResult::new(per_unit, lambdas))
}

/// Fixed-λ LOOCV losses, the singleton-grid limit of [`nested_loocv_path`].
pub fn fixed_loocv(ctx: &RidgeContext) -> Result<Vec<f64>> {
    loocv_terms(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::{ridge_ln0ocv_from_context, PartitionSpec};
    use crate::linalg::RidgeSolver;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seeded(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feats = DMatrix::from_fn(n, p - 1, |_, _| rng.random_range(-1.0..1.0));
        let beta = DVector::from_fn(p - 1, |_, _| rng.random_range(-0.5..0.5));
        let noise = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let y = &feats * beta + noise;
        Dataset::from_features(y, &feats).unwrap()
    }

    /// Refit-based prediction error for `target` with `held` removed from training.
    fn refit_error(ds: &Dataset, lambda: f64, held: &[usize], target: usize) -> f64 {
        let train: Vec<usize> = (0..ds.n()).filter(|i| !held.contains(i)).collect();
        let beta = RidgeSolver::new(&ds.select_rows(&train), Penalty::Full)
            .unwrap()
            .beta(lambda)
            .unwrap();
        ds.y()[target] - ds.x().row(target).dot(&beta.transpose())
    }

    fn naive_argmin(grid: &LambdaGrid, crit: impl Fn(f64) -> f64) -> f64 {
        let mut best = (f64::NAN, f64::INFINITY);
        for &l in grid.values() {
            let c = crit(l);
            if c <= best.1 {
                best = (l, c);
            }
        }
        best.0
    }

    #[test]
    fn grid_validation_and_default() {
        let g = LambdaGrid::default();
        assert_eq!(g.len(), 100);
        assert_eq!(g.values()[0], 1e-3);
        assert_eq!(g.values()[99], 2500.0);
        assert!(LambdaGrid::new(vec![]).is_err());
        assert!(LambdaGrid::new(vec![1.0, 1.0]).is_err());
        assert!(LambdaGrid::new(vec![0.0, 1.0]).is_err());
        assert!(LambdaGrid::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn argmin_prefers_largest_tie() {
        let c = [Some(2.0), Some(1.0), None, Some(1.0), Some(3.0)];
        assert_eq!(argmin_largest(c.into_iter()), Some(3));
        assert_eq!(argmin_largest([None, None].into_iter()), None);
    }

    #[test]
    fn inner_loocv_criterion_matches_double_refit() {
        let ds = seeded(8, 16, 1);
        let grid = LambdaGrid::new(vec![0.05, 0.5, 5.0]).unwrap();
        let path = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
        for n in [0usize, 3, 7] {
            for ctx in path.contexts() {
                let oracle: f64 = (0..8)
                    .filter(|&m| m != n)
                    .map(|m| refit_error(&ds, ctx.lambda, &[m, n], m).powi(2))
                    .sum::<f64>()
                    / 7.0;
                assert_relative_eq!(inner_loocv_criterion(ctx, n).unwrap(), oracle, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn inner_loocv_selects_oracle_minimizer() {
        let ds = seeded(8, 16, 2);
        let grid = LambdaGrid::new(vec![0.5, 2.0]).unwrap();
        let path = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
        for n in 0..8 {
            let expected = naive_argmin(&grid, |l| {
                (0..8)
                    .filter(|&m| m != n)
                    .map(|m| refit_error(&ds, l, &[m, n], m).powi(2))
                    .sum::<f64>()
            });
            assert_eq!(inner_select_loocv(&path, n).unwrap(), expected);
        }
    }

    #[test]
    fn singleton_grid_selects_its_value() {
        let ds = seeded(6, 9, 3);
        let grid = LambdaGrid::singleton(0.7).unwrap();
        let path = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
        assert_eq!(inner_select_loocv(&path, 2).unwrap(), 0.7);
        assert_eq!(inner_select_l2ocv(&path, 1, 4).unwrap(), 0.7);
    }

    #[test]
    fn inner_l2ocv_criterion_matches_triple_refit() {
        let ds = seeded(6, 10, 4);
        let grid = LambdaGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
        let path = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
        for (m, n) in (0..6).tuple_combinations() {
            for ctx in path.contexts() {
                let oracle: f64 = (0..6)
                    .filter(|&v| v != m && v != n)
                    .map(|v| refit_error(&ds, ctx.lambda, &[m, n, v], v).powi(2))
                    .sum::<f64>()
                    / 4.0;
                let closed = inner_l2ocv_criterion(ctx, m, n).unwrap();
                assert_relative_eq!(closed, oracle, max_relative = 1e-8);
                assert_eq!(closed, inner_l2ocv_criterion(ctx, n, m).unwrap());
            }
        }
    }

    #[test]
    fn triple_sweep_is_bit_identical_to_per_pair() {
        let ds = seeded(9, 20, 5);
        let grid = LambdaGrid::log_spaced(0.01, 100.0, 7).unwrap();
        let path = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
        for ctx in path.contexts() {
            let fast = all_pair_criteria(ctx);
            for (idx, (m, n)) in (0..9).tuple_combinations().enumerate() {
                assert_eq!(fast[idx], inner_l2ocv_criterion(ctx, m, n));
            }
        }
        let result = nested_l2ocv_path(&path).unwrap();
        for (idx, (m, n)) in (0..9).tuple_combinations().enumerate() {
            assert_eq!(result.lambdas[idx], inner_select_l2ocv(&path, m, n).unwrap());
        }
    }

    #[test]
    fn nested_loocv_matches_naive_double_loop() {
        let ds = seeded(10, 30, 6);
        let grid = LambdaGrid::new(vec![0.01, 0.1, 1.0, 10.0, 100.0]).unwrap();
        let fast = nested_loocv(&ds, &grid).unwrap();
        let mut total = 0.0;
        for n in 0..10 {
            let lam = naive_argmin(&grid, |l| {
                (0..10)
                    .filter(|&m| m != n)
                    .map(|m| refit_error(&ds, l, &[m, n], m).powi(2))
                    .sum::<f64>()
            });
            assert_eq!(fast.lambdas[n], lam);
            let t1 = refit_error(&ds, lam, &[n], n).powi(2);
            assert_relative_eq!(fast.outcome.per_unit[n], t1, max_relative = 1e-8);
            total += t1;
        }
        assert_relative_eq!(fast.outcome.estimate, total / 10.0, max_relative = 1e-8);
        assert_relative_eq!(
            fast.avg_lambda,
            fast.lambdas.iter().sum::<f64>() / 10.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nested_l2ocv_matches_naive_triple_loop() {
        let ds = seeded(7, 12, 7);
        let grid = LambdaGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
        let fast = nested_l2ocv(&ds, &grid).unwrap();
        let mut total = 0.0;
        for (idx, (m, n)) in (0..7).tuple_combinations().enumerate() {
            let lam = naive_argmin(&grid, |l| {
                (0..7)
                    .filter(|&v| v != m && v != n)
                    .map(|v| refit_error(&ds, l, &[m, n, v], v).powi(2))
                    .sum::<f64>()
            });
            assert_eq!(fast.lambdas[idx], lam);
            let t_m = refit_error(&ds, lam, &[m, n], m).powi(2);
            let t_n = refit_error(&ds, lam, &[m, n], n).powi(2);
            assert_relative_eq!(fast.outcome.per_unit[pair_index(7, m, n)], t_m, max_relative = 1e-8);
            assert_relative_eq!(fast.outcome.per_unit[pair_index(7, n, m)], t_n, max_relative = 1e-8);
            total += t_m + t_n;
        }
        assert_relative_eq!(fast.outcome.estimate, total / 42.0, max_relative = 1e-8);
    }

    #[test]
    fn singleton_grid_reduces_to_fixed_estimators() {
        let ds = seeded(8, 14, 8);
        let grid = LambdaGrid::singleton(1.3).unwrap();
        let ctx = RidgeSolver::new(&ds, Penalty::Full).unwrap().context(1.3).unwrap();
        let loo = nested_loocv(&ds, &grid).unwrap();
        let fixed1 = ridge_ln0ocv_from_context(&ctx, PartitionSpec::new(8, 1).unwrap()).unwrap();
        assert_eq!(loo.outcome.per_unit, fixed1.per_unit);
        let l2o = nested_l2ocv(&ds, &grid).unwrap();
        let fixed2 = ridge_ln0ocv_from_context(&ctx, PartitionSpec::new(8, 2).unwrap()).unwrap();
        assert_eq!(l2o.outcome.per_unit, fixed2.per_unit);
        assert_eq!(fixed_loocv(&ctx).unwrap(), fixed1.per_unit);
    }

    #[test]
    fn zero_feature_matches_null_loocv() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
        let feats = DMatrix::zeros(12, 1);
        let ds = Dataset::from_features(y.clone(), &feats).unwrap();
        let null = crate::cv::null_ln0ocv(y.as_slice(), 1).unwrap().estimate;
        // with the intercept left unpenalized the zero column changes nothing
        let path = RidgePath::new(&ds, &LambdaGrid::default(), Penalty::UnpenalizedIntercept).unwrap();
        let exact = nested_loocv_path(&path).unwrap();
        assert!((exact.outcome.estimate - null).abs() < 1e-9);
    }

    #[test]
    fn estimates_invariant_under_row_permutation() {
        let ds = seeded(9, 15, 10);
        let grid = LambdaGrid::log_spaced(0.01, 100.0, 9).unwrap();
        let perm = [4usize, 0, 8, 2, 6, 1, 7, 3, 5];
        let shuffled = ds.select_rows(&perm);
        let a = nested_loocv(&ds, &grid).unwrap();
        let b = nested_loocv(&shuffled, &grid).unwrap();
        assert_relative_eq!(a.outcome.estimate, b.outcome.estimate, max_relative = 1e-10);
        let c = nested_l2ocv(&ds, &grid).unwrap();
        let d = nested_l2ocv(&shuffled, &grid).unwrap();
        assert_relative_eq!(c.outcome.estimate, d.outcome.estimate, max_relative = 1e-10);
    }

    #[test]
    fn pair_table_and_partition_table_agree() {
        let ds = seeded(8, 12, 11);
        let result = nested_l2ocv(&ds, &LambdaGrid::log_spaced(0.1, 10.0, 5).unwrap()).unwrap();
        let partition_sum: f64 = (0..8)
            .tuple_combinations()
            .map(|(m, n)| {
                result.outcome.per_unit[pair_index(8, m, n)] + result.outcome.per_unit[pair_index(8, n, m)]
            })
            .sum();
        assert_relative_eq!(result.outcome.estimate, partition_sum / 56.0, max_relative = 1e-14);
    }

    #[test]
    fn reuse_of_contexts_is_exact() {
        let ds = seeded(7, 10, 12);
        let grid = LambdaGrid::new(vec![0.2, 2.0, 20.0]).unwrap();
        let path = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
        let shared = nested_loocv_path(&path).unwrap();
        for n in 0..7 {
            let fresh = RidgePath::new(&ds, &grid, Penalty::Full).unwrap();
            assert_eq!(inner_select_loocv(&fresh, n).unwrap(), shared.lambdas[n]);
        }
    }

    #[test]
    fn too_small_inputs() {
        let ds = seeded(3, 3, 13);
        assert!(matches!(
            nested_l2ocv(&ds, &LambdaGrid::default()),
            Err(Error::InsufficientData { needed: 4, .. })
        ));
        let ds = seeded(2, 3, 13);
        assert!(matches!(
            nested_loocv(&ds, &LambdaGrid::default()),
            Err(Error::InsufficientData { needed: 3, .. })
        ));
    }
}
