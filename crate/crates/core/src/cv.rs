//! Exhaustive leave-N₀-out cross-validation, closed form and by refitting.
//!
//! The closed forms never refit: for a test block `T` the held-out prediction
//! errors are `q = (I - H_T)⁻¹ r_T`, where `H` and `r` come from the full-data
//! fit. The `*_oracle` functions do the literal refits and exist to check the
//! closed forms.

use itertools::Itertools;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{block, submatrix_inverse_apply, Dataset, Penalty, RidgeContext, RidgeSolver};

const NULL_ORACLE_LIMIT: u128 = 1_000_000;
const RIDGE_ORACLE_LIMIT: u128 = 100_000;
const CLOSED_FORM_LIMIT: u128 = 50_000_000;

/// `C(n, k)` in 128-bit arithmetic, saturating on overflow.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Test-set geometry: `n0` held-out units split into an outer and inner part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionSpec {
    pub n: usize,
    pub n0: usize,
    pub n0_out: usize,
    pub n0_in: usize,
}

impl PartitionSpec {
    /// Non-nested split with every held-out unit in the outer set.
    pub fn new(n: usize, n0: usize) -> Result<Self> {
        Self::nested(n, n0, 0)
    }

    pub fn nested(n: usize, n0_out: usize, n0_in: usize) -> Result<Self> {
        let n0 = n0_out + n0_in;
        if n0 >= n {
            return Err(Error::InvalidInput(format!(
                "test-set size {n0} must be smaller than N = {n}"
            )));
        }
        Ok(Self {
            n,
            n0,
            n0_out,
            n0_in,
        })
    }

    /// Number of partitions `L = C(n, n0)`.
    pub fn count(&self) -> u128 {
        binomial(self.n, self.n0)
    }

    /// All test sets as strictly increasing index vectors, in lexicographic order.
    pub fn subsets(&self) -> impl Iterator<Item = Vec<usize>> {
        (0..self.n).combinations(self.n0)
    }
}

/// Average held-out loss plus the per-unit losses it averages.
#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub estimate: f64,
    pub per_unit: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Position of the pair term (predicted unit, companion) in a pair-layout vector.
///
/// Rows of the N×N zero-diagonal table are concatenated with the diagonal skipped.
#[inline]
pub fn pair_index(n: usize, predicted: usize, companion: usize) -> usize {
    debug_assert!(predicted != companion && predicted < n && companion < n);
    predicted * (n - 1) + if companion < predicted { companion } else { companion - 1 }
}

/// Inverse of [`pair_index`].
#[inline]
pub fn pair_from_index(n: usize, idx: usize) -> (usize, usize) {
    let m = idx / (n - 1);
    let j = idx % (n - 1);
    (m, if j < m { j } else { j + 1 })
}

fn sample_mean_var(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

fn check_null_input(y: &[f64], n0: usize) -> Result<()> {
    if y.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: y.len(),
        });
    }
    if n0 >= y.len() {
        return Err(Error::InvalidInput(format!(
            "test-set size {n0} must be smaller than N = {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite response".into()));
    }
    Ok(())
}

/// Leave-N₀-out loss of the intercept-only model, in closed form.
///
/// The per-unit vector is the loss of unit n averaged over the partitions that
/// hold it out; for `n0 == 2` it is the pair table instead.
pub fn null_ln0ocv(y: &[f64], n0: usize) -> Result<CvOutcome> {
    check_null_input(y, n0)?;
    let n = y.len();
    let nf = n as f64;
    let (mean, s2) = sample_mean_var(y);
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();

    let estimate = if n0 == 0 {
        (nf - 1.0) / nf * s2
    } else {
        (1.0 + 1.0 / (nf - n0 as f64)) * s2
    };

    let per_unit = match n0 {
        0 => centered.iter().map(|c| c * c).collect(),
        1 => {
            let scale = (nf / (nf - 1.0)).powi(2);
            centered.iter().map(|c| scale * c * c).collect()
        }
        2 => null_pair_terms(&centered),
        _ => null_unit_means(&centered, n0),
    };

    Ok(CvOutcome {
        estimate,
        per_unit,
        lambdas: Vec::new(),
    })
}

/// Pair table `[(1 + ζ)(Y_m − Ȳ) + ζ(Y_n − Ȳ)]²` with `ζ = 1/(N − 2)`.
fn null_pair_terms(centered: &[f64]) -> Vec<f64> {
    let n = centered.len();
    let zeta = 1.0 / (n as f64 - 2.0);
    let mut out = vec![0.0; n * (n - 1)];
    for m in 0..n {
        for c in 0..n {
            if c != m {
                let e = (1.0 + zeta) * centered[m] + zeta * centered[c];
                out[pair_index(n, m, c)] = e * e;
            }
        }
    }
    out
}

/// Expected squared error of unit n when it is held out together with `n0 − 1`
/// others drawn uniformly without replacement.
///
/// The error is `c + W/a` with `a = N − n0`, `c = ỹ_n(1 + 1/a)` and `W` the sum of
/// the other held-out centered responses, so its second moment follows from
/// the finite-population mean and variance of `W`.
fn null_unit_means(centered: &[f64], n0: usize) -> Vec<f64> {
    let n = centered.len();
    let a = (n - n0) as f64;
    let k = (n0 - 1) as f64;
    let pool = (n - 1) as f64;
    let total_sq: f64 = centered.iter().map(|c| c * c).sum();
    centered
        .iter()
        .map(|&cn| {
            // the others sum to -cn because the full vector is centered
            let others_mean = -cn / pool;
            let others_var = (total_sq - cn * cn) / pool - others_mean * others_mean;
            let w_mean = k * others_mean;
            let w_var = if pool > 1.0 {
                k * others_var * (pool - k) / (pool - 1.0)
            } else {
                0.0
            };
            let c = cn * (1.0 + 1.0 / a);
            (c + w_mean / a).powi(2) + w_var / (a * a)
        })
        .collect()
}

/// Literal enumeration of every partition for the intercept-only model.
pub fn null_ln0ocv_oracle(y: &[f64], n0: usize) -> Result<f64> {
    check_null_input(y, n0)?;
    let n = y.len();
    let count = binomial(n, n0);
    if count > NULL_ORACLE_LIMIT {
        return Err(Error::TooManyPartitions {
            count,
            limit: NULL_ORACLE_LIMIT,
        });
    }
    if n0 == 0 {
        let mean = y.iter().sum::<f64>() / n as f64;
        return Ok(y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64);
    }
    let total: f64 = y.iter().sum();
    let mut acc = 0.0;
    for test in (0..n).combinations(n0) {
        let test_sum: f64 = test.iter().map(|&i| y[i]).sum();
        let train_mean = (total - test_sum) / (n - n0) as f64;
        acc += test.iter().map(|&i| (y[i] - train_mean).powi(2)).sum::<f64>();
    }
    Ok(acc / (count as f64 * n0 as f64))
}

fn singular_at(partition: usize, indices: Vec<usize>, condition: f64) -> Error {
    Error::SingularTestBlock {
        partition: Some(partition),
        indices,
        condition,
    }
}

/// Squared LOOCV residuals `(r_n / (1 − h_nn))²`.
pub fn loocv_terms(ctx: &RidgeContext) -> Result<Vec<f64>> {
    (0..ctx.n())
        .map(|n| {
            let denom = 1.0 - ctx.h(n, n);
            if !(denom > 1e-12) {
                return Err(singular_at(n, vec![n], 1.0 / denom.abs()));
            }
            Ok((ctx.resid[n] / denom).powi(2))
        })
        .collect()
}

/// Squared leave-{m, n}-out prediction errors for m and n, in that order.
pub fn l2ocv_pair_terms(ctx: &RidgeContext, m: usize, n: usize) -> Result<(f64, f64)> {
    if m == n || m >= ctx.n() || n >= ctx.n() {
        return Err(Error::InvalidInput(format!("invalid pair ({m}, {n})")));
    }
    let (lo, hi) = (m.min(n), m.max(n));
    let (q_lo, q_hi) = block::solve2(
        ctx.h(lo, lo),
        ctx.h(hi, hi),
        ctx.h(lo, hi),
        ctx.resid[lo],
        ctx.resid[hi],
    )
    .ok_or_else(|| Error::SingularTestBlock {
        partition: None,
        indices: vec![lo, hi],
        condition: f64::INFINITY,
    })?;
    let (q_m, q_n) = if m < n { (q_lo, q_hi) } else { (q_hi, q_lo) };
    Ok((q_m * q_m, q_n * q_n))
}

/// Residual weights `(ω₁, ω₂)` attached to the ordered pair `(m, n)`.
///
/// `ω₁ = [(1 − h_mm)² + h_mn²] / det²` and `ω₂ = h_mn(2 − h_mm − h_nn) / det²`,
/// with `det` the determinant of `I − H_{m,n}`.
pub fn omega_weights(ctx: &RidgeContext, m: usize, n: usize) -> (f64, f64) {
    let (h_mm, h_nn, h_mn) = (ctx.h(m, m), ctx.h(n, n), ctx.h(m, n));
    let det = (1.0 - h_mm) * (1.0 - h_nn) - h_mn * h_mn;
    let det2 = det * det;
    (
        ((1.0 - h_mm).powi(2) + h_mn * h_mn) / det2,
        h_mn * (2.0 - h_mm - h_nn) / det2,
    )
}

/// Weighted-residual form `ω₁(n, m) r_m² + ω₂(n, m) r_m r_n` tied to predicting m.
///
/// Summed over both orderings of a pair this equals `t_m + t_n`; a single
/// ordering does not in general reproduce `t_m` alone.
pub fn omega_expansion(ctx: &RidgeContext, m: usize, n: usize) -> f64 {
    let (w1, w2) = omega_weights(ctx, n, m);
    let (r_m, r_n) = (ctx.resid[m], ctx.resid[n]);
    w1 * r_m * r_m + w2 * r_m * r_n
}

/// Fixed-λ leave-N₀-out estimate for the fully penalized ridge model.
pub fn ridge_ln0ocv_closed(ds: &Dataset, lambda: f64, spec: PartitionSpec) -> Result<CvOutcome> {
    let ctx = RidgeSolver::new(ds, Penalty::Full)?.context(lambda)?;
    ridge_ln0ocv_from_context(&ctx, spec)
}

/// Fixed-λ leave-N₀-out estimate from an already built context.
///
/// Per-unit layout: LOOCV terms for `n0 == 1`, the pair table for `n0 == 2`,
/// and per-unit averages over the partitions holding each unit otherwise.
pub fn ridge_ln0ocv_from_context(ctx: &RidgeContext, spec: PartitionSpec) -> Result<CvOutcome> {
    let n = ctx.n();
    if spec.n != n {
        return Err(Error::InvalidInput(format!(
            "partition spec is for N = {} but the fit has N = {n}",
            spec.n
        )));
    }
    if spec.n0 == 0 {
        return Err(Error::InvalidInput("closed form needs n0 ≥ 1".into()));
    }
    let count = spec.count();
    if count > CLOSED_FORM_LIMIT {
        return Err(Error::TooManyPartitions {
            count,
            limit: CLOSED_FORM_LIMIT,
        });
    }
    let per_unit = match spec.n0 {
        1 => loocv_terms(ctx)?,
        2 => {
            let mut table = vec![0.0; n * (n - 1)];
            for (ell, (m, c)) in (0..n).tuple_combinations().enumerate() {
                let (t_m, t_c) = l2ocv_pair_terms(ctx, m, c).map_err(|e| match e {
                    Error::SingularTestBlock {
                        indices, condition, ..
                    } => singular_at(ell, indices, condition),
                    other => other,
                })?;
                table[pair_index(n, m, c)] = t_m;
                table[pair_index(n, c, m)] = t_c;
            }
            table
        }
        n0 => {
            let mut sums = vec![0.0; n];
            for (ell, test) in spec.subsets().enumerate() {
                let q = submatrix_inverse_apply(&ctx.hat, &ctx.resid, &test).map_err(|e| match e {
                    Error::SingularTestBlock {
                        indices, condition, ..
                    } => singular_at(ell, indices, condition),
                    other => other,
                })?;
                for (&i, qi) in test.iter().zip(q.iter()) {
                    sums[i] += qi * qi;
                }
            }
            // each unit is held out in C(N−1, n0−1) partitions
            let per = binomial(n - 1, n0 - 1) as f64;
            sums.into_iter().map(|s| s / per).collect()
        }
    };
    let estimate = per_unit.iter().sum::<f64>() / per_unit.len() as f64;
    Ok(CvOutcome {
        estimate,
        per_unit,
        lambdas: Vec::new(),
    })
}

/// Refit-every-partition leave-N₀-out estimate for the fully penalized model.
pub fn ridge_ln0ocv_oracle(ds: &Dataset, lambda: f64, spec: PartitionSpec) -> Result<f64> {
    ridge_ln0ocv_oracle_with(ds, lambda, spec, Penalty::Full)
}

pub fn ridge_ln0ocv_oracle_with(
    ds: &Dataset,
    lambda: f64,
    spec: PartitionSpec,
    penalty: Penalty,
) -> Result<f64> {
    let n = ds.n();
    if spec.n != n {
        return Err(Error::InvalidInput("partition spec does not match data".into()));
    }
    let count = spec.count();
    if count > RIDGE_ORACLE_LIMIT {
        return Err(Error::TooManyPartitions {
            count,
            limit: RIDGE_ORACLE_LIMIT,
        });
    }
    if spec.n0 == 0 {
        let beta = RidgeSolver::new(ds, penalty)?.beta(lambda)?;
        let resid = ds.y() - ds.x() * beta;
        return Ok(resid.norm_squared() / n as f64);
    }
    let mut acc = 0.0;
    for test in spec.subsets() {
        let train: Vec<usize> = (0..n).filter(|i| !test.contains(i)).collect();
        let sub = ds.select_rows(&train);
        let beta = RidgeSolver::new(&sub, penalty)?.beta(lambda)?;
        for &i in &test {
            let pred = ds.x().row(i).dot(&beta.transpose());
            acc += (ds.y()[i] - pred).powi(2);
        }
    }
    Ok(acc / (count as f64 * spec.n0 as f64))
}

/// Held-out prediction for every unit in `test` after refitting without them.
pub fn refit_predictions(ds: &Dataset, lambda: f64, test: &[usize], penalty: Penalty) -> Result<DVector<f64>> {
    let train: Vec<usize> = (0..ds.n()).filter(|i| !test.contains(i)).collect();
    let beta = RidgeSolver::new(&ds.select_rows(&train), penalty)?.beta(lambda)?;
    Ok(DVector::from_iterator(
        test.len(),
        test.iter().map(|&i| ds.x().row(i).dot(&beta.transpose())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seeded(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feats = DMatrix::from_fn(n, p - 1, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        Dataset::from_features(y, &feats).unwrap()
    }

    fn ctx_for(ds: &Dataset, lambda: f64) -> RidgeContext {
        RidgeSolver::new(ds, Penalty::Full).unwrap().context(lambda).unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(100, 3), 161_700);
        assert_eq!(binomial(4, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn pair_index_round_trip() {
        let n = 6;
        let mut seen = vec![false; n * (n - 1)];
        for m in 0..n {
            for c in (0..n).filter(|&c| c != m) {
                let i = pair_index(n, m, c);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(pair_from_index(n, i), (m, c));
            }
        }
    }

    #[test]
    fn partition_enumeration() {
        let spec = PartitionSpec::new(6, 3).unwrap();
        let sets: Vec<_> = spec.subsets().collect();
        assert_eq!(sets.len() as u128, spec.count());
        assert!(sets.iter().all(|s| s.len() == 3 && s.windows(2).all(|w| w[0] < w[1])));
        assert!(PartitionSpec::new(3, 3).is_err());
        let nested = PartitionSpec::nested(7, 1, 2).unwrap();
        assert_eq!(nested.n0, 3);
    }

    #[test]
    fn null_examples() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_relative_eq!(null_ln0ocv(&y, 1).unwrap().estimate, 3.125, epsilon = 1e-14);
        assert_relative_eq!(null_ln0ocv(&y, 0).unwrap().estimate, 2.0, epsilon = 1e-14);
        assert_relative_eq!(null_ln0ocv_oracle(&y, 2).unwrap(), 10.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(null_ln0ocv_oracle(&[0.0, 0.0, 1.0], 1).unwrap(), 0.5, epsilon = 1e-14);
        for n0 in 0..4 {
            assert_eq!(null_ln0ocv(&[7.0; 6], n0).unwrap().estimate, 0.0);
        }
        assert_eq!(
            null_ln0ocv(&[1.0], 0).unwrap_err(),
            Error::InsufficientData { needed: 2, got: 1 }
        );
    }

    #[test]
    fn null_loocv_terms_match_direct_means() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        let out = null_ln0ocv(&y, 1).unwrap();
        for (n, t) in out.per_unit.iter().enumerate() {
            let others: f64 = y.iter().enumerate().filter(|(i, _)| *i != n).map(|(_, v)| v).sum();
            assert_relative_eq!(*t, (y[n] - others / 4.0).powi(2), epsilon = 1e-13);
        }
    }

    #[test]
    fn null_per_unit_mean_matches_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<f64> = (0..9).map(|_| rng.random_range(-3.0..3.0)).collect();
        for n0 in 0..6 {
            let out = null_ln0ocv(&y, n0).unwrap();
            let mean = out.per_unit.iter().sum::<f64>() / out.per_unit.len() as f64;
            assert_relative_eq!(mean, out.estimate, epsilon = 1e-10);
            assert_relative_eq!(out.estimate, null_ln0ocv_oracle(&y, n0).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn null_unit_means_match_enumeration() {
        let y = [0.3, -1.2, 2.5, 0.0, 4.1, -0.7, 1.9];
        let n = y.len();
        for n0 in 1..5 {
            let out = null_ln0ocv(&y, n0).unwrap();
            let total: f64 = y.iter().sum();
            let mut sums = vec![0.0; n];
            let mut counts = vec![0.0; n];
            for test in (0..n).combinations(n0) {
                let mean = (total - test.iter().map(|&i| y[i]).sum::<f64>()) / (n - n0) as f64;
                for &i in &test {
                    sums[i] += (y[i] - mean).powi(2);
                    counts[i] += 1.0;
                }
            }
            if n0 == 2 {
                continue;
            }
            for i in 0..n {
                assert_relative_eq!(out.per_unit[i], sums[i] / counts[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reciprocal_relation() {
        let y = [2.0, -1.0, 0.5, 3.5, 1.0, 0.0];
        let (_, s2) = sample_mean_var(&y);
        let n = y.len() as f64;
        let loo = null_ln0ocv(&y, 1).unwrap().estimate;
        assert_relative_eq!(loo * (n - 1.0) / n, s2, epsilon = 1e-13);
    }

    #[test]
    fn oracle_guard() {
        let y: Vec<f64> = (0..40).map(|i| i as f64).collect();
        assert!(matches!(
            null_ln0ocv_oracle(&y, 10),
            Err(Error::TooManyPartitions { .. })
        ));
    }

    #[test]
    fn loocv_ones_column_example() {
        let ds = Dataset::new(DVector::from_vec(vec![2.0, 4.0]), DMatrix::from_element(2, 1, 1.0)).unwrap();
        let terms = loocv_terms(&ctx_for(&ds, 0.0)).unwrap();
        assert_relative_eq!(terms[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(terms[1], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn loocv_closed_equals_term_mean() {
        let ds = seeded(10, 20, 1);
        let ctx = ctx_for(&ds, 1.0);
        let direct: f64 = (0..10)
            .map(|n| (ctx.resid[n] / (1.0 - ctx.h(n, n))).powi(2))
            .sum::<f64>()
            / 10.0;
        let out = ridge_ln0ocv_closed(&ds, 1.0, PartitionSpec::new(10, 1).unwrap()).unwrap();
        assert_relative_eq!(out.estimate, direct, max_relative = 1e-14);
    }

    #[test]
    fn huge_lambda_predicts_zero() {
        let ds = seeded(10, 20, 2);
        let out = ridge_ln0ocv_closed(&ds, 1e12, PartitionSpec::new(10, 1).unwrap()).unwrap();
        let msy = ds.y().norm_squared() / 10.0;
        assert_relative_eq!(out.estimate, msy, max_relative = 1e-9);
    }

    #[test]
    fn closed_matches_refit() {
        for &(n, p, seed) in &[(12usize, 5usize, 3u64), (12, 30, 4)] {
            let ds = seeded(n, p, seed);
            for n0 in 1..=3 {
                for &lambda in &[0.1, 1.0, 10.0] {
                    let spec = PartitionSpec::new(n, n0).unwrap();
                    let closed = ridge_ln0ocv_closed(&ds, lambda, spec).unwrap();
                    let oracle = ridge_ln0ocv_oracle(&ds, lambda, spec).unwrap();
                    assert_relative_eq!(closed.estimate, oracle, max_relative = 1e-8);
                    let mean = closed.per_unit.iter().sum::<f64>() / closed.per_unit.len() as f64;
                    assert_relative_eq!(mean, closed.estimate, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn closed_matches_refit_with_unpenalized_intercept() {
        let ds = seeded(9, 14, 8);
        let ctx = RidgeSolver::new(&ds, Penalty::UnpenalizedIntercept)
            .unwrap()
            .context(0.5)
            .unwrap();
        for n0 in 1..=2 {
            let spec = PartitionSpec::new(9, n0).unwrap();
            let closed = ridge_ln0ocv_from_context(&ctx, spec).unwrap();
            let oracle = ridge_ln0ocv_oracle_with(&ds, 0.5, spec, Penalty::UnpenalizedIntercept).unwrap();
            assert_relative_eq!(closed.estimate, oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn zero_test_oracle_is_training_mse() {
        let ds = seeded(8, 4, 5);
        let ctx = ctx_for(&ds, 0.7);
        let oracle = ridge_ln0ocv_oracle(&ds, 0.7, PartitionSpec::new(8, 0).unwrap()).unwrap();
        assert_relative_eq!(oracle, ctx.resid.norm_squared() / 8.0, max_relative = 1e-10);
    }

    #[test]
    fn intercept_only_ridge_approaches_null() {
        let y = DVector::from_vec(vec![1.0, 3.0, -2.0, 0.5, 4.0]);
        let ds = Dataset::new(y.clone(), DMatrix::from_element(5, 1, 1.0)).unwrap();
        let spec = PartitionSpec::new(5, 1).unwrap();
        let null = null_ln0ocv(y.as_slice(), 1).unwrap().estimate;
        assert_relative_eq!(ridge_ln0ocv_oracle(&ds, 0.0, spec).unwrap(), null, max_relative = 1e-12);
        let gaps: Vec<f64> = [1.0, 0.1, 0.01]
            .iter()
            .map(|&l| (ridge_ln0ocv_oracle(&ds, l, spec).unwrap() - null).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);
    }

    #[test]
    fn pair_terms_decoupled_case() {
        let ds = seeded(6, 4, 6);
        let mut ctx = ctx_for(&ds, 1.0);
        ctx.hat[(1, 3)] = 0.0;
        ctx.hat[(3, 1)] = 0.0;
        let (t1, t3) = l2ocv_pair_terms(&ctx, 1, 3).unwrap();
        let loo = loocv_terms(&ctx).unwrap();
        assert_relative_eq!(t1, loo[1], max_relative = 1e-14);
        assert_relative_eq!(t3, loo[3], max_relative = 1e-14);
        assert_eq!(omega_weights(&ctx, 1, 3).1, 0.0);
    }

    #[test]
    fn pair_terms_order_swaps() {
        let ctx = ctx_for(&seeded(7, 9, 7), 0.4);
        let (a, b) = l2ocv_pair_terms(&ctx, 2, 5).unwrap();
        let (c, d) = l2ocv_pair_terms(&ctx, 5, 2).unwrap();
        assert_eq!((a, b), (d, c));
    }

    #[test]
    fn pair_terms_exchangeable_rows() {
        // two identical rows with identical responses are exchangeable
        let mut ds = seeded(6, 5, 9);
        let mut x = ds.x().clone();
        let mut y = ds.y().clone();
        let row = x.row(0).into_owned();
        x.set_row(1, &row);
        y[1] = y[0];
        ds = Dataset::new(y, x).unwrap();
        let (a, b) = l2ocv_pair_terms(&ctx_for(&ds, 1.0), 0, 1).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn pair_terms_explicit_formula() {
        let ctx = ctx_for(&seeded(8, 12, 10), 2.0);
        let (m, n) = (6, 1);
        let (h_mm, h_nn, h_mn) = (ctx.h(m, m), ctx.h(n, n), ctx.h(m, n));
        let num = (1.0 - h_nn) * ctx.resid[m] + h_mn * ctx.resid[n];
        let den = (1.0 - h_mm) * (1.0 - h_nn) - h_mn * h_mn;
        let (t_m, _) = l2ocv_pair_terms(&ctx, m, n).unwrap();
        assert_relative_eq!(t_m, (num / den).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn omega_expansion_matches_per_pair() {
        let ctx = ctx_for(&seeded(9, 18, 11), 1.0);
        for (m, n) in (0..9).tuple_combinations() {
            let (t_m, t_n) = l2ocv_pair_terms(&ctx, m, n).unwrap();
            let expanded = omega_expansion(&ctx, m, n) + omega_expansion(&ctx, n, m);
            assert_relative_eq!(t_m + t_n, expanded, max_relative = 1e-10);
        }
    }

    #[test]
    fn pair_mean_equals_leave_two_out_oracle() {
        let ds = seeded(9, 18, 12);
        let ctx = ctx_for(&ds, 1.0);
        let mut acc = 0.0;
        for m in 0..9 {
            for n in (0..9).filter(|&n| n != m) {
                acc += l2ocv_pair_terms(&ctx, m, n).unwrap().0;
            }
        }
        let oracle = ridge_ln0ocv_oracle(&ds, 1.0, PartitionSpec::new(9, 2).unwrap()).unwrap();
        assert_relative_eq!(acc / 72.0, oracle, max_relative = 1e-8);
    }

    #[test]
    fn weight_matrix_form_agrees() {
        // rᵀ (I − H_T)⁻² r over explicit inverses, on a toy problem
        let ds = seeded(6, 8, 13);
        let ctx = ctx_for(&ds, 0.9);
        let spec = PartitionSpec::new(6, 3).unwrap();
        let mut acc = 0.0;
        for t in spec.subsets() {
            let a = DMatrix::from_fn(3, 3, |i, j| (i == j) as u8 as f64 - ctx.h(t[i], t[j]));
            let inv = a.try_inverse().unwrap();
            let w = &inv * &inv;
            let r = DVector::from_iterator(3, t.iter().map(|&i| ctx.resid[i]));
            acc += (r.transpose() * w * &r)[0];
        }
        let closed = ridge_ln0ocv_from_context(&ctx, spec).unwrap().estimate;
        assert_relative_eq!(closed, acc / (20.0 * 3.0), max_relative = 1e-10);
    }

    #[test]
    fn singular_pair_reports_partition() {
        let ds = seeded(4, 6, 14);
        let ctx = ctx_for(&ds, 0.0);
        let err = ridge_ln0ocv_from_context(&ctx, PartitionSpec::new(4, 2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SingularTestBlock { partition: Some(0), .. }));
    }
}
