//! Monte Carlo rejection-rate experiments.
//!
//! Each replicate draws one design matrix and one noise vector from its own
//! seeded stream; every signal strength in the sweep reuses them, so the
//! differences between ξ values are not blurred by fresh sampling noise.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypothesis::{kfold_cv_test_with, ExhaustiveLosses, TestKind, TestReport};
use crate::linalg::{Dataset, Penalty};
use crate::nested::LambdaGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovStructure {
    /// Unit variances with common correlation `rho`.
    CompoundSymmetric { rho: f64 },
    /// Independent columns with variance `log(j + 1)` for feature `j = 1, 2, …`.
    Heteroskedastic,
}

impl CovStructure {
    pub fn name(&self) -> &'static str {
        match self {
            CovStructure::CompoundSymmetric { .. } => "compound_symmetric",
            CovStructure::Heteroskedastic => "heteroskedastic",
        }
    }
}

const KFOLD_SEED_SALT: u64 = 0x006b_666f_6c64;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub gamma: f64,
    pub cov: CovStructure,
    pub xi: Vec<f64>,
    pub sigma2_eps: f64,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tests: Vec<TestKind>,
    pub k_folds: usize,
    pub grid: LambdaGrid,
    pub penalty: Penalty,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 50,
            gamma: 1.0,
            cov: CovStructure::CompoundSymmetric { rho: 0.025 },
            xi: vec![0.0],
            sigma2_eps: 0.5,
            b: 200,
            alpha: 0.05,
            seed: 1,
            tests: vec![TestKind::T1cv, TestKind::T2cv, TestKind::Hybrid, TestKind::Wilcoxon],
            k_folds: 5,
            grid: LambdaGrid::default(),
            penalty: Penalty::Full,
        }
    }
}

impl SimConfig {
    /// Total columns including the intercept: `N + 1` when γ = 1, else `round(γN)`.
    pub fn p(&self) -> usize {
        if self.gamma == 1.0 {
            self.n + 1
        } else {
            (self.gamma * self.n as f64).round() as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 4 {
            return bad(format!("n = {} must be at least 4", self.n));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) || self.p() < 2 {
            return bad(format!("gamma = {} must give at least one feature column", self.gamma));
        }
        if let CovStructure::CompoundSymmetric { rho } = self.cov {
            if !(0.0..1.0).contains(&rho) {
                return bad(format!("rho = {rho} must lie in [0, 1)"));
            }
        }
        if self.xi.is_empty() || self.xi.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return bad("xi must be a non-empty list of finite values ≥ 0".into());
        }
        if !(self.sigma2_eps.is_finite() && self.sigma2_eps > 0.0) {
            return bad(format!("sigma2_eps = {} must be positive", self.sigma2_eps));
        }
        if self.b == 0 {
            return bad("b must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if self.tests.is_empty() {
            return bad("at least one test must be requested".into());
        }
        if self.tests.contains(&TestKind::Kfold) && !(2..=self.n).contains(&self.k_folds) {
            return bad(format!("k_folds = {} must lie in [2, n]", self.k_folds));
        }
        Ok(())
    }
}

/// Ten signal strengths starting at zero, in steps of 0.05 under compound
/// symmetry and 0.1 under heteroskedasticity.
pub fn signal_grid(cov: CovStructure) -> Vec<f64> {
    let step = match cov {
        CovStructure::CompoundSymmetric { .. } => 0.05,
        CovStructure::Heteroskedastic => 0.1,
    };
    (0..10).map(|a| step * a as f64).collect()
}

/// N × `features` design rows drawn i.i.d. from the chosen covariance.
pub fn gen_design<R: Rng + ?Sized>(n: usize, features: usize, cov: CovStructure, rng: &mut R) -> Result<DMatrix<f64>> {
    if features == 0 {
        return Err(Error::InvalidInput("need at least one feature column".into()));
    }
    let mut x = DMatrix::zeros(n, features);
    match cov {
        CovStructure::CompoundSymmetric { rho } => {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidInput(format!("rho = {rho} must lie in [0, 1)")));
            }
            let (shared, own) = (rho.sqrt(), (1.0 - rho).sqrt());
            for i in 0..n {
                let z0: f64 = rng.sample(StandardNormal);
                for j in 0..features {
                    let zj: f64 = rng.sample(StandardNormal);
                    x[(i, j)] = shared * z0 + own * zj;
                }
            }
        }
        CovStructure::Heteroskedastic => {
            let scales: Vec<f64> = (1..=features).map(|j| ((j + 1) as f64).ln().sqrt()).collect();
            for i in 0..n {
                for (j, s) in scales.iter().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    x[(i, j)] = s * z;
                }
            }
        }
    }
    Ok(x)
}

/// Gaussian noise with variance `sigma2`.
pub fn gen_noise<R: Rng + ?Sized>(n: usize, sigma2: f64, rng: &mut R) -> Result<DVector<f64>> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidInput(format!("noise variance {sigma2} must be positive")));
    }
    let sd = sigma2.sqrt();
    Ok(DVector::from_fn(n, |_, _| sd * rng.sample::<f64, _>(StandardNormal)))
}

/// `y = X·(ξ1) + ε` with the intercept coefficient fixed at zero.
pub fn gen_response<R: Rng + ?Sized>(features: &DMatrix<f64>, xi: f64, sigma2: f64, rng: &mut R) -> Result<DVector<f64>> {
    let noise = gen_noise(features.nrows(), sigma2, rng)?;
    Ok(signal_plus(features, xi, &noise))
}

fn signal_plus(features: &DMatrix<f64>, xi: f64, noise: &DVector<f64>) -> DVector<f64> {
    let row_sums = features.column_sum();
    row_sums * xi + noise
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r`'s private stream.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ r)
}

/// Design and noise of one replicate; responses for every ξ derive from these.
pub fn replicate_data(cfg: &SimConfig, r: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(cfg.seed, r as u64));
    let x = gen_design(cfg.n, cfg.p() - 1, cfg.cov, &mut rng)?;
    let noise = gen_noise(cfg.n, cfg.sigma2_eps, &mut rng)?;
    Ok((x, noise))
}

/// Dataset of replicate `r` at signal `xi`.
pub fn replicate_dataset(cfg: &SimConfig, r: usize, xi: f64) -> Result<Dataset> {
    let (x, noise) = replicate_data(cfg, r)?;
    Dataset::from_features(signal_plus(&x, xi, &noise), &x)
}

/// All requested reports for one dataset.
pub fn evaluate_tests(
    ds: &Dataset,
    tests: &[TestKind],
    grid: &LambdaGrid,
    alpha: f64,
    penalty: Penalty,
    k_folds: usize,
    kfold_seed: u64,
) -> Result<Vec<TestReport>> {
    let exhaustive: Vec<TestKind> = tests.iter().copied().filter(|t| *t != TestKind::Kfold).collect();
    let losses = if exhaustive.is_empty() {
        None
    } else {
        let pairs = exhaustive.iter().any(|t| t.needs_pairs());
        Some(ExhaustiveLosses::compute(ds, grid, penalty, pairs)?)
    };
    tests
        .iter()
        .map(|&t| match t {
            TestKind::Kfold => kfold_cv_test_with(ds, k_folds, kfold_seed, grid, alpha, penalty),
            _ => losses.as_ref().expect("losses computed for exhaustive tests").report(t, alpha),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub test: TestKind,
    pub xi: f64,
    pub replicate: usize,
    pub report: TestReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub test: TestKind,
    pub xi: f64,
    pub replicates: usize,
    pub rejection_rate: f64,
    pub mean_delta_hat: f64,
    pub mean_avg_lambda: f64,
    pub p_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SimConfig,
    /// Ordered by ξ, then replicate, then test in configuration order.
    pub records: Vec<ReplicateRecord>,
    /// Ordered by test in configuration order, then ξ.
    pub cells: Vec<SweepCell>,
}

fn finite_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.filter(|v| v.is_finite()).fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let per_replicate: Vec<Vec<Vec<TestReport>>> = (0..cfg.b)
        .into_par_iter()
        .map(|r| {
            let (x, noise) = replicate_data(cfg, r)?;
            let kfold_seed = replicate_seed(cfg.seed ^ KFOLD_SEED_SALT, r as u64);
            cfg.xi
                .iter()
                .map(|&xi| {
                    let ds = Dataset::from_features(signal_plus(&x, xi, &noise), &x)?;
                    evaluate_tests(&ds, &cfg.tests, &cfg.grid, cfg.alpha, cfg.penalty, cfg.k_folds, kfold_seed)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(cfg.b * cfg.xi.len() * cfg.tests.len());
    for (xi_idx, &xi) in cfg.xi.iter().enumerate() {
        for (r, rep) in per_replicate.iter().enumerate() {
            for report in &rep[xi_idx] {
                records.push(ReplicateRecord {
                    test: report.test,
                    xi,
                    replicate: r,
                    report: report.clone(),
                });
            }
        }
    }

    let mut cells = Vec::with_capacity(cfg.tests.len() * cfg.xi.len());
    for (t_idx, &test) in cfg.tests.iter().enumerate() {
        for (xi_idx, &xi) in cfg.xi.iter().enumerate() {
            let reports: Vec<&TestReport> = per_replicate.iter().map(|rep| &rep[xi_idx][t_idx]).collect();
            let p_values: Vec<f64> = reports.iter().map(|r| r.p_value).collect();
            let rejections = p_values.iter().filter(|&&p| p <= cfg.alpha).count();
            cells.push(SweepCell {
                test,
                xi,
                replicates: cfg.b,
                rejection_rate: rejections as f64 / cfg.b as f64,
                mean_delta_hat: finite_mean(reports.iter().map(|r| r.delta_hat)),
                mean_avg_lambda: finite_mean(reports.iter().map(|r| r.avg_lambda)),
                p_values,
            });
        }
    }
    Ok(SweepResult {
        config: cfg.clone(),
        records,
        cells,
    })
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "NA".to_string()
    }
}

impl SweepResult {
    pub const REPLICATE_HEADER: &'static str = "test,xi,replicate,p_value,reject,delta_hat,avg_lambda";
    pub const SUMMARY_HEADER: &'static str = "test,xi,replicates,rejection_rate,mean_delta_hat,mean_avg_lambda";

    pub fn replicates_csv(&self) -> String {
        let mut s = format!("{}\n", Self::REPLICATE_HEADER);
        for rec in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                rec.test,
                num(rec.xi),
                rec.replicate,
                num(rec.report.p_value),
                rec.report.reject,
                num(rec.report.delta_hat),
                num(rec.report.avg_lambda)
            ));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = format!("{}\n", Self::SUMMARY_HEADER);
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.test,
                num(c.xi),
                c.replicates,
                num(c.rejection_rate),
                num(c.mean_delta_hat),
                num(c.mean_avg_lambda)
            ));
        }
        s
    }

    pub fn cell(&self, test: TestKind, xi: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.test == test && c.xi == xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn column_stats(x: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
        let n = x.nrows() as f64;
        let means: Vec<f64> = x.column_iter().map(|c| c.sum() / n).collect();
        let vars = x
            .column_iter()
            .zip(&means)
            .map(|(c, m)| c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
            .collect();
        (means, vars)
    }

    fn correlation(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
        let (ca, cb) = (x.column(a), x.column(b));
        let (ma, mb) = (ca.mean(), cb.mean());
        let cov: f64 = ca.iter().zip(cb.iter()).map(|(u, v)| (u - ma) * (v - mb)).sum();
        let va: f64 = ca.iter().map(|u| (u - ma).powi(2)).sum();
        let vb: f64 = cb.iter().map(|v| (v - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn independent_columns_when_rho_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = gen_design(100_000, 3, CovStructure::CompoundSymmetric { rho: 0.0 }, &mut rng).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(correlation(&x, a, b).abs() < 0.01);
        }
    }

    #[test]
    fn compound_symmetric_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gen_design(100_000, 6, CovStructure::CompoundSymmetric { rho: 0.025 }, &mut rng).unwrap();
        let mut total = 0.0;
        let mut count = 0.0;
        for a in 0..6 {
            for b in (a + 1)..6 {
                total += correlation(&x, a, b);
                count += 1.0;
            }
        }
        let mean = total / count;
        assert!((0.015..=0.035).contains(&mean), "{mean}");
        let (_, vars) = column_stats(&x);
        assert!(vars.iter().all(|v| (v - 1.0).abs() < 0.02));
    }

    #[test]
    fn heteroskedastic_first_column_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gen_design(100_000, 3, CovStructure::Heteroskedastic, &mut rng).unwrap();
        let (_, vars) = column_stats(&x);
        assert_relative_eq!(vars[0], 2f64.ln(), max_relative = 0.02);
        assert_relative_eq!(vars[2], 4f64.ln(), max_relative = 0.02);
    }

    #[test]
    fn invalid_rho_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(gen_design(5, 3, CovStructure::CompoundSymmetric { rho: 1.0 }, &mut rng).is_err());
        assert!(gen_design(5, 3, CovStructure::CompoundSymmetric { rho: -0.1 }, &mut rng).is_err());
    }

    #[test]
    fn null_response_is_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = gen_design(100_000, 2, CovStructure::Heteroskedastic, &mut rng).unwrap();
        let y = gen_response(&x, 0.0, 0.5, &mut rng).unwrap();
        let m = y.mean();
        let var = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert_relative_eq!(var, 0.5, max_relative = 0.02);
        let xy = DMatrix::from_columns(&[x.column(0).into_owned(), y]);
        assert!(correlation(&xy, 0, 1).abs() < 0.01);
    }

    #[test]
    fn signal_on_ones_feature_shifts_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ones = DMatrix::from_element(100_000, 1, 1.0);
        let y = gen_response(&ones, 0.5, 0.5, &mut rng).unwrap();
        assert!((y.mean() - 0.5).abs() < 0.01);
        assert!(gen_response(&ones, 0.5, 0.0, &mut rng).is_err());
    }

    #[test]
    fn paper_grids() {
        let cs = signal_grid(CovStructure::CompoundSymmetric { rho: 0.025 });
        assert_eq!(cs.len(), 10);
        assert_relative_eq!(cs[9], 0.45, epsilon = 1e-12);
        let h = signal_grid(CovStructure::Heteroskedastic);
        assert_relative_eq!(h[9], 0.9, epsilon = 1e-12);
    }

    #[test]
    fn column_count_rule() {
        let mut cfg = SimConfig {
            n: 50,
            ..SimConfig::default()
        };
        assert_eq!(cfg.p(), 51);
        cfg.gamma = 2.0;
        assert_eq!(cfg.p(), 100);
        cfg.gamma = 0.5;
        assert_eq!(cfg.p(), 25);
    }

    #[test]
    fn replicate_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|r| replicate_seed(7, r)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(replicate_seed(7, 0), replicate_seed(8, 0));
    }

    fn tiny_config() -> SimConfig {
        SimConfig {
            n: 12,
            gamma: 1.0,
            xi: vec![0.0, 0.5],
            b: 4,
            tests: vec![TestKind::T1cv, TestKind::T2cv, TestKind::Wilcoxon, TestKind::Kfold],
            k_folds: 3,
            grid: LambdaGrid::log_spaced(0.01, 100.0, 6).unwrap(),
            ..SimConfig::default()
        }
    }

    #[test]
    fn sweep_is_deterministic_and_consistent() {
        let cfg = tiny_config();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a.replicates_csv(), b.replicates_csv());
        assert_eq!(a.summary_csv(), b.summary_csv());
        assert_eq!(a.records.len(), 4 * 2 * 4);
        for cell in &a.cells {
            let rate = cell.p_values.iter().filter(|&&p| p <= cfg.alpha).count() as f64 / cfg.b as f64;
            assert_eq!(rate, cell.rejection_rate);
            assert!((0.0..=1.0).contains(&cell.rejection_rate));
        }
    }

    #[test]
    fn sweep_replicates_are_order_independent() {
        let cfg = tiny_config();
        let sweep = run_sweep(&cfg).unwrap();
        let ds = replicate_dataset(&cfg, 2, 0.5).unwrap();
        let direct = evaluate_tests(&ds, &[TestKind::T1cv], &cfg.grid, cfg.alpha, cfg.penalty, 3, 0).unwrap();
        let rec = sweep
            .records
            .iter()
            .find(|r| r.test == TestKind::T1cv && r.xi == 0.5 && r.replicate == 2)
            .unwrap();
        assert_eq!(rec.report, direct[0]);
    }

    #[test]
    fn config_validation() {
        let ok = tiny_config();
        assert!(ok.validate().is_ok());
        for broken in [
            SimConfig { alpha: 1.5, ..ok.clone() },
            SimConfig { b: 0, ..ok.clone() },
            SimConfig { xi: vec![], ..ok.clone() },
            SimConfig { n: 3, ..ok.clone() },
            SimConfig { k_folds: 40, ..ok.clone() },
            SimConfig {
                cov: CovStructure::CompoundSymmetric { rho: 1.0 },
                ..ok.clone()
            },
        ] {
            assert!(matches!(broken.validate(), Err(Error::Config(_))));
        }
    }
}
