//! One-sided tests of `H₀: Err⁽⁰⁾ − Err⁽¹⁾ ≤ 0`, where `Err⁽⁰⁾` is the
//! prediction error of the intercept-only model and `Err⁽¹⁾` that of tuned ridge.
//!
//! Each test compares per-unit loss vectors of the two models. The exhaustive
//! tests are deterministic functions of the data. The K-fold baseline depends
//! on a seeded fold assignment.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::cv::{loocv_terms, null_ln0ocv, pair_index};
use crate::error::{Error, Result};
use crate::linalg::{Dataset, Penalty, RidgeSolver};
use crate::nested::{nested_l2ocv_path, nested_loocv_path, LambdaGrid, RidgePath};

/// Which test produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    T1cv,
    T2cv,
    T2cvEmpirical,
    Hybrid,
    Wilcoxon,
    Kfold,
}

impl TestKind {
    pub const EXHAUSTIVE: [TestKind; 5] = [
        TestKind::T1cv,
        TestKind::T2cv,
        TestKind::T2cvEmpirical,
        TestKind::Hybrid,
        TestKind::Wilcoxon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::T1cv => "t1cv",
            TestKind::T2cv => "t2cv",
            TestKind::T2cvEmpirical => "t2cv_empirical",
            TestKind::Hybrid => "hybrid",
            TestKind::Wilcoxon => "wilcoxon",
            TestKind::Kfold => "kfold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            TestKind::T1cv,
            TestKind::T2cv,
            TestKind::T2cvEmpirical,
            TestKind::Hybrid,
            TestKind::Wilcoxon,
            TestKind::Kfold,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    /// Tests whose decision is driven by a Student-t reference distribution.
    pub fn is_t_based(self) -> bool {
        !matches!(self, TestKind::Wilcoxon)
    }

    /// Whether the test needs the leave-two-out machinery.
    pub fn needs_pairs(self) -> bool {
        matches!(self, TestKind::T2cv | TestKind::T2cvEmpirical | TestKind::Hybrid)
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one test on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub test: TestKind,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub lower_bound: f64,
    pub delta_hat: f64,
    pub avg_lambda: f64,
    pub alpha: f64,
    pub reject: bool,
    pub mode_flags: Vec<String>,
}

pub const FLAG_DEGENERATE: &str = "degenerate_variance";

fn json_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NA".to_string()
    }
}

impl TestReport {
    pub const CSV_HEADER: &'static str =
        "test,statistic,df,p_value,lower_bound,delta_hat_percent,avg_lambda,alpha,reject,mode_flags";

    pub fn is_degenerate(&self) -> bool {
        self.mode_flags.iter().any(|f| f == FLAG_DEGENERATE)
    }

    /// JSON object with floats at 17 significant digits; non-finite values become `null`.
    pub fn to_json(&self) -> String {
        let flags = self
            .mode_flags
            .iter()
            .map(|f| format!("\"{}\"", f.replace('\\', "\\\\").replace('"', "\\\"")))
            .collect::<Vec<_>>()
            .join(",");
        let mut s = String::from("{");
        let _ = write!(
            s,
            "\"test\":\"{}\",\"statistic\":{},\"df\":{},\"p_value\":{},\"lower_bound\":{},\
             \"delta_hat_percent\":{},\"avg_lambda\":{},\"alpha\":{},\"reject\":{},\"mode_flags\":[{}]",
            self.test.name(),
            json_number(self.statistic),
            self.df,
            json_number(self.p_value),
            json_number(self.lower_bound),
            json_number(self.delta_hat),
            json_number(self.avg_lambda),
            json_number(self.alpha),
            self.reject,
            flags
        );
        s.push('}');
        s
    }

    /// One CSV row matching [`TestReport::CSV_HEADER`]; flags are `;`-joined.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.test.name(),
            csv_number(self.statistic),
            self.df,
            csv_number(self.p_value),
            csv_number(self.lower_bound),
            csv_number(self.delta_hat),
            csv_number(self.avg_lambda),
            csv_number(self.alpha),
            self.reject,
            self.mode_flags.join(";")
        )
    }
}

/// JSON array of reports, one per line.
pub fn reports_to_json(reports: &[TestReport]) -> String {
    let body = reports
        .iter()
        .map(|r| format!("  {}", r.to_json()))
        .collect::<Vec<_>>()
        .join(",\n");
    format!("[\n{body}\n]\n")
}

pub fn reports_to_csv(reports: &[TestReport]) -> String {
    let mut s = String::from(TestReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.to_csv_row());
        s.push('\n');
    }
    s
}

/// Null and model losses with their per-unit paired differences.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedLossVectors {
    pub t0: Vec<f64>,
    pub t1: Vec<f64>,
    /// One difference per unit; for pair tables, the mean over companions.
    pub collapsed: Vec<f64>,
    pub avg_lambda: f64,
}

impl PairedLossVectors {
    /// Per-unit vectors of equal length N.
    pub fn per_unit(t0: Vec<f64>, t1: Vec<f64>, avg_lambda: f64) -> Result<Self> {
        if t0.len() != t1.len() || t0.is_empty() {
            return Err(Error::InvalidInput("loss vectors must have equal, non-zero length".into()));
        }
        let collapsed = t0.iter().zip(&t1).map(|(a, b)| a - b).collect();
        Ok(Self {
            t0,
            t1,
            collapsed,
            avg_lambda,
        })
    }

    /// Pair tables of length N(N−1) in the layout of [`pair_index`].
    pub fn pair_table(n: usize, t0: Vec<f64>, t1: Vec<f64>, avg_lambda: f64) -> Result<Self> {
        if n < 2 || t0.len() != n * (n - 1) || t1.len() != t0.len() {
            return Err(Error::InvalidInput("pair tables must have length N(N−1)".into()));
        }
        let u0 = row_means(n, &t0);
        let u1 = row_means(n, &t1);
        let collapsed = u0.iter().zip(&u1).map(|(a, b)| a - b).collect();
        Ok(Self {
            t0,
            t1,
            collapsed,
            avg_lambda,
        })
    }

    pub fn n(&self) -> usize {
        self.collapsed.len()
    }

    pub fn err0(&self) -> f64 {
        mean(&self.t0)
    }

    pub fn err1(&self) -> f64 {
        mean(&self.t1)
    }
}

/// Mean over companions for each predicted unit.
fn row_means(n: usize, table: &[f64]) -> Vec<f64> {
    table.chunks(n - 1).map(mean).collect()
}

/// Mean over predicted units for each companion.
fn column_means(n: usize, table: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|c| {
            (0..n)
                .filter(|&m| m != c)
                .map(|m| table[pair_index(n, m, c)])
                .sum::<f64>()
                / (n - 1) as f64
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
}

fn variance(a: &[f64]) -> f64 {
    covariance(a, a)
}

/// Percent reduction `(err0 − err1) / err0 × 100`.
pub fn delta_hat(err0: f64, err1: f64) -> Result<f64> {
    if !(err0 > 0.0) || !err0.is_finite() {
        return Err(Error::UndefinedDelta(err0));
    }
    Ok((err0 - err1) / err0 * 100.0)
}

/// Mean and variance of the null leave-N₀-out estimator for i.i.d. data.
pub fn null_theory_moments(n: usize, n0: usize, sigma2: f64, mu4: f64) -> Result<(f64, f64)> {
    if n0 >= n || n < 2 {
        return Err(Error::InvalidInput(format!("need N > N₀ and N ≥ 2, got N = {n}, N₀ = {n0}")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() || !mu4.is_finite() || mu4 < sigma2 * sigma2 {
        return Err(Error::InvalidInput("need σ² > 0 and μ₄ ≥ σ⁴".into()));
    }
    let nf = n as f64;
    let factor = if n0 == 0 {
        (nf - 1.0) / nf
    } else {
        1.0 + 1.0 / (nf - n0 as f64)
    };
    let var = (mu4 - (nf - 3.0) / (nf - 1.0) * sigma2 * sigma2) / nf * factor * factor;
    Ok((sigma2 * factor, var))
}

struct TSummary {
    mean_diff: f64,
    sd: f64,
    n: usize,
}

fn degenerate_report(test: TestKind, df: usize, alpha: f64, delta: f64, avg_lambda: f64, mut flags: Vec<String>) -> TestReport {
    flags.push(FLAG_DEGENERATE.to_string());
    TestReport {
        test,
        statistic: f64::NAN,
        df,
        p_value: 1.0,
        lower_bound: f64::NAN,
        delta_hat: delta,
        avg_lambda,
        alpha,
        reject: false,
        mode_flags: flags,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("α = {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// Upper-tail t reference with `√n` scaling, or the degenerate report.
fn t_report(
    test: TestKind,
    s: TSummary,
    alpha: f64,
    delta: f64,
    avg_lambda: f64,
    flags: Vec<String>,
) -> TestReport {
    let scale = (s.n as f64).sqrt();
    t_report_scaled(test, s, scale, alpha, delta, avg_lambda, flags)
}

/// `statistic = scale · mean / sd` against `t(n − 1)`, bound `mean − t_α · sd / scale`.
///
/// A zero null error (constant response) leaves Δ undefined and yields the
/// degenerate report, as does a non-positive variance.
fn t_report_scaled(
    test: TestKind,
    s: TSummary,
    scale: f64,
    alpha: f64,
    delta: f64,
    avg_lambda: f64,
    flags: Vec<String>,
) -> TestReport {
    let df = s.n.saturating_sub(1);
    if df == 0 || delta.is_nan() || !(s.sd > 0.0) || !s.sd.is_finite() || !s.mean_diff.is_finite() {
        return degenerate_report(test, df.max(1), alpha, delta, avg_lambda, flags);
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    let statistic = scale * s.mean_diff / s.sd;
    let p_value = dist.sf(statistic);
    let t_crit = dist.inverse_cdf(1.0 - alpha);
    let lower_bound = s.mean_diff - t_crit * s.sd / scale;
    TestReport {
        test,
        statistic,
        df,
        p_value,
        lower_bound,
        delta_hat: delta,
        avg_lambda,
        alpha,
        reject: p_value <= alpha,
        mode_flags: flags,
    }
}

fn delta_or_nan(err0: f64, err1: f64) -> f64 {
    delta_hat(err0, err1).unwrap_or(f64::NAN)
}

/// Nested LOOCV t-test with the variance assembled from its three printed pieces.
pub fn t1cv_from_losses(loo: &PairedLossVectors, y: &[f64], alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let n = loo.n();
    if y.len() != n {
        return Err(Error::InvalidInput("response length differs from loss vectors".into()));
    }
    let nf = n as f64;
    let ratio = nf / (nf - 1.0);
    let ybar = mean(y);
    let s2 = variance(y);
    let sum4: f64 = y.iter().map(|v| (v - ybar).powi(4)).sum();
    let t1bar = mean(&loo.t1);
    let s00 = ratio.powi(4) * sum4 / (nf - 1.0) - ratio.powi(3) * s2 * s2;
    let s11 = loo.t1.iter().map(|t| t * t).sum::<f64>() / (nf - 1.0) - ratio * t1bar * t1bar;
    let s01 = loo.t0.iter().zip(&loo.t1).map(|(a, b)| a * b).sum::<f64>() / (nf - 1.0)
        - ratio * ratio * s2 / nf * loo.t1.iter().sum::<f64>();
    let var = s00 + s11 - 2.0 * s01;
    let summary = TSummary {
        mean_diff: loo.err0() - loo.err1(),
        sd: if var > 0.0 { var.sqrt() } else { 0.0 },
        n,
    };
    Ok(t_report(
        TestKind::T1cv,
        summary,
        alpha,
        delta_or_nan(loo.err0(), loo.err1()),
        loo.avg_lambda,
        Vec::new(),
    ))
}

/// How the nested L2OCV variance is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2cvMode {
    /// Closed-form null terms plus empirical model and cross terms.
    AnalyticPlusEmpirical,
    /// Paired t-test on the per-unit collapsed differences.
    Empirical,
}

/// The two closed-form null variance terms of the pair-table statistic.
pub fn t2cv_null_terms(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let ybar = mean(y);
    let s2 = variance(y);
    let s4 = s2 * s2;
    let sum4: f64 = y.iter().map(|v| (v - ybar).powi(4)).sum();
    let z0 = 1.0 / (n - 2.0);
    let z = |a: f64| 1.0 + a * z0;
    let (z1, z2, z3) = (z(1.0), z(2.0), z(3.0));
    let s01 = (z0 * z1.powi(4) - z0 * z0 * z1 * z3 * z3) * sum4
        + z1.powi(4) * (2.0 * z0 * (1.0 + 3.0 * z0 / z2) - z1) * s4;
    let s02 = z0.powi(3) * z2 * z2 / z1 * sum4 - z0 * z0 * z1 * z2 * s4;
    (s01, s02)
}

pub fn t2cv_from_losses(l2o: &PairedLossVectors, y: &[f64], alpha: f64, mode: T2cvMode) -> Result<TestReport> {
    check_alpha(alpha)?;
    let n = l2o.n();
    if y.len() != n || n < 4 {
        return Err(Error::InvalidInput("pair test needs N ≥ 4 units matching the response".into()));
    }
    let delta = delta_or_nan(l2o.err0(), l2o.err1());
    let mean_diff = l2o.err0() - l2o.err1();
    let (kind, var, flag) = match mode {
        T2cvMode::AnalyticPlusEmpirical => {
            let (s01, s02) = t2cv_null_terms(y);
            let u0 = row_means(n, &l2o.t0);
            let u1 = row_means(n, &l2o.t1);
            let c1 = column_means(n, &l2o.t1);
            let var = s01 + s02 + variance(&u1) + variance(&c1) - 2.0 * covariance(&u0, &u1);
            (TestKind::T2cv, var, "analytic_plus_empirical")
        }
        T2cvMode::Empirical => (TestKind::T2cvEmpirical, variance(&l2o.collapsed), "pure_empirical"),
    };
    let summary = TSummary {
        mean_diff,
        sd: if var > 0.0 { var.sqrt() } else { 0.0 },
        n,
    };
    Ok(t_report(kind, summary, alpha, delta, l2o.avg_lambda, vec![flag.to_string()]))
}

/// Paired t-test on `D_n = (T⁽⁰⁾_n − T⁽¹⁾_n) + (U⁽⁰⁾_n − U⁽¹⁾_n)`.
pub fn hybrid_from_losses(loo: &PairedLossVectors, l2o: &PairedLossVectors, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    if loo.n() != l2o.n() {
        return Err(Error::InvalidInput("loss vectors describe different sample sizes".into()));
    }
    let combined: Vec<f64> = loo.collapsed.iter().zip(&l2o.collapsed).map(|(a, b)| a + b).collect();
    let err0 = loo.err0() + l2o.err0();
    let err1 = loo.err1() + l2o.err1();
    let summary = TSummary {
        mean_diff: mean(&combined),
        sd: variance(&combined).sqrt(),
        n: combined.len(),
    };
    Ok(t_report(
        TestKind::Hybrid,
        summary,
        alpha,
        delta_or_nan(err0, err1),
        0.5 * (loo.avg_lambda + l2o.avg_lambda),
        vec!["sd_of_summed_unit_differences".to_string()],
    ))
}

const WILCOXON_EXACT_MAX: usize = 20;

/// Sign-pattern counts of the doubled signed-rank sum for the given doubled ranks.
fn doubled_rank_counts(ranks2: &[u64]) -> Vec<f64> {
    let total: u64 = ranks2.iter().sum();
    let mut counts = vec![0.0; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

struct SignedRanks {
    nonzero: Vec<f64>,
    ranks2: Vec<u64>,
    w_plus2: u64,
    tie_sizes: Vec<usize>,
}

fn signed_ranks(diffs: &[f64]) -> SignedRanks {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let mut order: Vec<usize> = (0..nonzero.len()).collect();
    order.sort_by(|&a, &b| nonzero[a].abs().total_cmp(&nonzero[b].abs()));
    let mut ranks2 = vec![0u64; nonzero.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && nonzero[order[j + 1]].abs() == nonzero[order[i]].abs() {
            j += 1;
        }
        // mid-rank of positions i..=j (1-based) doubled: (i+1) + (j+1)
        let r2 = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks2[k] = r2;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    let w_plus2 = nonzero
        .iter()
        .zip(&ranks2)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    SignedRanks {
        nonzero,
        ranks2,
        w_plus2,
        tie_sizes,
    }
}

/// One-sided signed-rank p-value `P(W⁺ ≥ w)` under the symmetric null.
///
/// Zeros are dropped and ties get mid-ranks. The null distribution is enumerated
/// exactly for up to 20 non-zero differences, otherwise a tie-corrected normal
/// approximation with continuity correction is used.
pub fn wilcoxon_p_value(diffs: &[f64]) -> Option<(f64, f64, usize, bool)> {
    let sr = signed_ranks(diffs);
    let n = sr.nonzero.len();
    if n == 0 {
        return None;
    }
    let w_plus = sr.w_plus2 as f64 / 2.0;
    if n <= WILCOXON_EXACT_MAX {
        let counts = doubled_rank_counts(&sr.ranks2);
        let upper: f64 = counts[sr.w_plus2 as usize..].iter().sum();
        let p = upper / 2f64.powi(n as i32);
        Some((w_plus, p.min(1.0), n, true))
    } else {
        let nf = n as f64;
        let mu = nf * (nf + 1.0) / 4.0;
        let tie_adj: f64 = sr.tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adj;
        let z = (w_plus - mu - 0.5) / var.sqrt();
        let p = Normal::standard().sf(z);
        Some((w_plus, p, n, false))
    }
}

/// Walsh-average lower confidence bound for the center of symmetry.
fn walsh_lower_bound(nonzero: &[f64], alpha: f64, exact: bool) -> f64 {
    let n = nonzero.len();
    let m_total = n * (n + 1) / 2;
    let crit = if exact {
        let untied: Vec<u64> = (1..=n as u64).map(|r| 2 * r).collect();
        let counts = doubled_rank_counts(&untied);
        let scale = 2f64.powi(n as i32);
        // smallest c with P(W⁺ ≥ c) ≤ α, c in rank-sum units
        let mut tail = 0.0;
        let mut crit = None;
        for c in (0..=m_total).rev() {
            tail += counts[2 * c];
            if tail / scale <= alpha {
                crit = Some(c);
            } else {
                break;
            }
        }
        crit
    } else {
        let nf = n as f64;
        let mu = nf * (nf + 1.0) / 4.0;
        let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
        let z = Normal::standard().inverse_cdf(1.0 - alpha);
        let c = (mu + 0.5 + z * sd).ceil();
        (c <= m_total as f64).then_some(c as usize)
    };
    let Some(c) = crit else {
        return f64::NEG_INFINITY;
    };
    let mut walsh = Vec::with_capacity(m_total);
    for i in 0..n {
        for j in i..n {
            walsh.push(0.5 * (nonzero[i] + nonzero[j]));
        }
    }
    walsh.sort_by(f64::total_cmp);
    walsh[m_total - c]
}

/// Signed-rank test on the collapsed per-unit differences.
pub fn wilcoxon_test(pairs: &PairedLossVectors, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let delta = delta_or_nan(pairs.err0(), pairs.err1());
    let p = if delta.is_nan() { None } else { wilcoxon_p_value(&pairs.collapsed) };
    match p {
        None => Ok(degenerate_report(
            TestKind::Wilcoxon,
            pairs.n(),
            alpha,
            delta,
            pairs.avg_lambda,
            Vec::new(),
        )),
        Some((w_plus, p_value, n_eff, exact)) => {
            let sr = signed_ranks(&pairs.collapsed);
            Ok(TestReport {
                test: TestKind::Wilcoxon,
                statistic: w_plus,
                df: n_eff,
                p_value,
                lower_bound: walsh_lower_bound(&sr.nonzero, alpha, exact),
                delta_hat: delta,
                avg_lambda: pairs.avg_lambda,
                alpha,
                reject: p_value <= alpha,
                mode_flags: vec![if exact { "exact" } else { "normal_approximation" }.to_string()],
            })
        }
    }
}

/// Null and nested-model loss vectors computed once per dataset.
#[derive(Debug, Clone)]
pub struct ExhaustiveLosses {
    pub y: Vec<f64>,
    pub loo: PairedLossVectors,
    pub l2o: Option<PairedLossVectors>,
}

impl ExhaustiveLosses {
    /// Builds the LOOCV vectors and, when `with_pairs`, the L2OCV tables.
    pub fn compute(ds: &Dataset, grid: &LambdaGrid, penalty: Penalty, with_pairs: bool) -> Result<Self> {
        let n = ds.n();
        let needed = if with_pairs { 4 } else { 3 };
        if n < needed {
            return Err(Error::InsufficientData { needed, got: n });
        }
        let y = ds.y().as_slice().to_vec();
        let path = RidgePath::new(ds, grid, penalty)?;
        let nested1 = nested_loocv_path(&path)?;
        let null1 = null_ln0ocv(&y, 1)?;
        let loo = PairedLossVectors::per_unit(null1.per_unit, nested1.outcome.per_unit, nested1.avg_lambda)?;
        let l2o = if with_pairs {
            let nested2 = nested_l2ocv_path(&path)?;
            let null2 = null_ln0ocv(&y, 2)?;
            Some(PairedLossVectors::pair_table(
                n,
                null2.per_unit,
                nested2.outcome.per_unit,
                nested2.avg_lambda,
            )?)
        } else {
            None
        };
        Ok(Self { y, loo, l2o })
    }

    fn pairs(&self) -> Result<&PairedLossVectors> {
        self.l2o
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("pair losses were not computed".into()))
    }

    pub fn report(&self, kind: TestKind, alpha: f64) -> Result<TestReport> {
        match kind {
            TestKind::T1cv => t1cv_from_losses(&self.loo, &self.y, alpha),
            TestKind::T2cv => t2cv_from_losses(self.pairs()?, &self.y, alpha, T2cvMode::AnalyticPlusEmpirical),
            TestKind::T2cvEmpirical => t2cv_from_losses(self.pairs()?, &self.y, alpha, T2cvMode::Empirical),
            TestKind::Hybrid => hybrid_from_losses(&self.loo, self.pairs()?, alpha),
            TestKind::Wilcoxon => wilcoxon_test(&self.loo, alpha),
            TestKind::Kfold => Err(Error::InvalidInput(
                "the K-fold test needs fold settings; use kfold_cv_test".into(),
            )),
        }
    }
}

pub fn t1cv_test(ds: &Dataset, grid: &LambdaGrid, alpha: f64) -> Result<TestReport> {
    ExhaustiveLosses::compute(ds, grid, Penalty::Full, false)?.report(TestKind::T1cv, alpha)
}

pub fn t2cv_test(ds: &Dataset, grid: &LambdaGrid, alpha: f64) -> Result<TestReport> {
    ExhaustiveLosses::compute(ds, grid, Penalty::Full, true)?.report(TestKind::T2cv, alpha)
}

pub fn t2cv_empirical_test(ds: &Dataset, grid: &LambdaGrid, alpha: f64) -> Result<TestReport> {
    ExhaustiveLosses::compute(ds, grid, Penalty::Full, true)?.report(TestKind::T2cvEmpirical, alpha)
}

pub fn hybrid_test(ds: &Dataset, grid: &LambdaGrid, alpha: f64) -> Result<TestReport> {
    ExhaustiveLosses::compute(ds, grid, Penalty::Full, true)?.report(TestKind::Hybrid, alpha)
}

/// Contiguous folds over a single seeded shuffle; the first `N mod k` folds get one extra unit.
pub fn kfold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidFolds(format!("k = {k} must lie in [2, N = {n}]")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

fn argmin_largest(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v <= b) {
            best = Some((k, v));
        }
    }
    best.map(|(k, _)| k)
}

/// λ chosen by cross-validation over the given training folds.
fn tune_on_folds(ds: &Dataset, train_folds: &[&Vec<usize>], grid: &LambdaGrid, penalty: Penalty) -> Result<f64> {
    let lambdas = grid.values();
    let mut sse = vec![0.0; lambdas.len()];
    if train_folds.len() >= 2 {
        for (j, held) in train_folds.iter().enumerate() {
            let rows: Vec<usize> = train_folds
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let solver = RidgeSolver::new(&ds.select_rows(&rows), penalty)?;
            for (k, &lam) in lambdas.iter().enumerate() {
                let beta = solver.beta(lam)?;
                for &i in held.iter() {
                    let pred = ds.x().row(i).dot(&beta.transpose());
                    sse[k] += (ds.y()[i] - pred).powi(2);
                }
            }
        }
    } else {
        let sub = ds.select_rows(train_folds[0]);
        let solver = RidgeSolver::new(&sub, penalty)?;
        for (k, &lam) in lambdas.iter().enumerate() {
            sse[k] = match loocv_terms(&solver.context(lam)?) {
                Ok(t) => t.iter().sum(),
                Err(_) => f64::NAN,
            };
        }
    }
    argmin_largest(&sse)
        .map(|k| lambdas[k])
        .ok_or(Error::NoFeasibleLambda { outer: Vec::new() })
}

/// Per-fold null and model mean squared errors `(C⁽⁰⁾, C⁽¹⁾)` plus the tuned λs.
pub fn kfold_losses(
    ds: &Dataset,
    folds: &[Vec<usize>],
    grid: &LambdaGrid,
    penalty: Penalty,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut c0 = Vec::with_capacity(folds.len());
    let mut c1 = Vec::with_capacity(folds.len());
    let mut lams = Vec::with_capacity(folds.len());
    for (k, test) in folds.iter().enumerate() {
        if test.is_empty() {
            return Err(Error::InvalidFolds(format!("fold {k} is empty")));
        }
        let train_folds: Vec<&Vec<usize>> = folds.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, f)| f).collect();
        let train: Vec<usize> = train_folds.iter().flat_map(|f| f.iter().copied()).collect();
        let lam = tune_on_folds(ds, &train_folds, grid, penalty)?;
        let beta = RidgeSolver::new(&ds.select_rows(&train), penalty)?.beta(lam)?;
        let ybar_train = train.iter().map(|&i| ds.y()[i]).sum::<f64>() / train.len() as f64;
        let nk = test.len() as f64;
        c0.push(test.iter().map(|&i| (ds.y()[i] - ybar_train).powi(2)).sum::<f64>() / nk);
        c1.push(
            test.iter()
                .map(|&i| (ds.y()[i] - ds.x().row(i).dot(&beta.transpose())).powi(2))
                .sum::<f64>()
                / nk,
        );
        lams.push(lam);
    }
    Ok((c0, c1, lams))
}

/// K-fold baseline test: `C̄ / sd(C)` against `t(k − 1)` with `C_k = C⁽⁰⁾_k − C⁽¹⁾_k`.
pub fn kfold_cv_test(ds: &Dataset, k: usize, seed: u64, grid: &LambdaGrid, alpha: f64) -> Result<TestReport> {
    kfold_cv_test_with(ds, k, seed, grid, alpha, Penalty::Full)
}

pub fn kfold_cv_test_with(
    ds: &Dataset,
    k: usize,
    seed: u64,
    grid: &LambdaGrid,
    alpha: f64,
    penalty: Penalty,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let folds = kfold_assignment(ds.n(), k, seed)?;
    let (c0, c1, lams) = kfold_losses(ds, &folds, grid, penalty)?;
    let diffs: Vec<f64> = c0.iter().zip(&c1).map(|(a, b)| a - b).collect();
    let summary = TSummary {
        mean_diff: mean(&diffs),
        sd: variance(&diffs).sqrt(),
        n: k,
    };
    let flag = if k >= 3 { "inner_kfold_tuning" } else { "inner_loocv_tuning" };
    Ok(t_report_scaled(
        TestKind::Kfold,
        summary,
        1.0,
        alpha,
        delta_or_nan(mean(&c0), mean(&c1)),
        mean(&lams),
        vec![flag.to_string()],
    ))
}
