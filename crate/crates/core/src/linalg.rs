//! Dense linear algebra for the ridge smoother.
//!
//! Everything downstream works from one thin SVD of the design matrix: the
//! hat matrix `H(λ) = U diag(d²/(d²+λ)) Uᵀ`, the residuals `r = (I - H)y` and
//! the coefficients `β = V diag(d/(d²+λ)) Uᵀ y` are all cheap once `U`, `d`
//! and `V` are known, so a whole λ grid costs a single decomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition number above which a test block `I - H_T` is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Response vector plus design matrix whose first column is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
}

impl Dataset {
    pub fn new(y: DVector<f64>, x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidInput(format!(
                "design has {} rows but response has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if y.is_empty() || x.ncols() == 0 {
            return Err(Error::InvalidInput("empty dataset".into()));
        }
        if y.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in dataset".into()));
        }
        if x.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidInput(
                "first design column must be the all-ones intercept".into(),
            ));
        }
        Ok(Self { y, x })
    }

    /// Builds a dataset from feature columns only; the intercept is prepended.
    pub fn from_features(y: DVector<f64>, features: &DMatrix<f64>) -> Result<Self> {
        let n = features.nrows();
        let mut x = DMatrix::from_element(n, features.ncols() + 1, 1.0);
        x.columns_mut(1, features.ncols()).copy_from(features);
        Self::new(y, x)
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Feature columns without the intercept.
    pub fn features(&self) -> DMatrix<f64> {
        self.x.columns(1, self.p() - 1).into_owned()
    }

    /// Sub-dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            y: DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i])),
            x: self.x.select_rows(rows.iter()),
        }
    }

    /// Dataset with the response multiplied by `factor`.
    pub fn scaled_response(&self, factor: f64) -> Dataset {
        Dataset {
            y: &self.y * factor,
            x: self.x.clone(),
        }
    }
}

/// Thin SVD `X = U diag(d) Vᵀ` restricted to the numerically non-zero spectrum.
#[derive(Debug, Clone)]
pub struct SvdCache {
    pub u: DMatrix<f64>,
    pub d: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SvdCache {
    pub fn rank(&self) -> usize {
        self.d.len()
    }
}

/// Thin SVD with singular values below `max(N, P)·ε·d_max` dropped.
pub fn svd_decompose(x: &DMatrix<f64>) -> Result<SvdCache> {
    let (n, p) = x.shape();
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in matrix".into()));
    }
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let d_max = order.first().map(|&i| s[i]).unwrap_or(0.0);
    let tol = n.max(p) as f64 * f64::EPSILON * d_max;
    let kept: Vec<usize> = order.into_iter().filter(|&i| s[i] > tol).collect();

    let r = kept.len();
    let mut u_out = DMatrix::zeros(n, r);
    let mut v_out = DMatrix::zeros(p, r);
    let mut d_out = DVector::zeros(r);
    for (j, &i) in kept.iter().enumerate() {
        u_out.set_column(j, &u.column(i));
        v_out.set_column(j, &v_t.row(i).transpose());
        d_out[j] = s[i];
    }
    Ok(SvdCache {
        u: u_out,
        d: d_out,
        v: v_out,
    })
}

/// How the intercept enters the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Penalty {
    /// Every coefficient, intercept included, is shrunk: `H = X(XᵀX + λI)⁺Xᵀ`.
    #[default]
    Full,
    /// Features are centered and the intercept is left unpenalized.
    UnpenalizedIntercept,
}

/// Ridge fit quantities at one λ.
#[derive(Debug, Clone)]
pub struct RidgeContext {
    pub lambda: f64,
    pub hat: DMatrix<f64>,
    pub resid: DVector<f64>,
    pub beta: DVector<f64>,
}

impl RidgeContext {
    pub fn n(&self) -> usize {
        self.resid.len()
    }

    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hat[(i, j)]
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidLambda(lambda));
    }
    Ok(())
}

/// Per-component shrinkage `d²/(d²+λ)` and coefficient weights `d/(d²+λ)`.
fn spectral_weights(d: &DVector<f64>, lambda: f64) -> (DVector<f64>, DVector<f64>) {
    let shrink = d.map(|dp| {
        let d2 = dp * dp;
        d2 / (d2 + lambda)
    });
    let coef = d.map(|dp| dp / (dp * dp + lambda));
    (shrink, coef)
}

fn projector(u: &DMatrix<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = u.clone();
    for (mut col, &w) in scaled.column_iter_mut().zip(weights.iter()) {
        col *= w;
    }
    let mut hat = &scaled * u.transpose();
    // exact symmetry keeps the (m, n) and (n, m) pair terms bit-compatible
    let n = hat.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (hat[(i, j)] + hat[(j, i)]);
            hat[(i, j)] = avg;
            hat[(j, i)] = avg;
        }
    }
    hat
}

/// Ridge context for the fully penalized model from a precomputed SVD of `ds.x()`.
pub fn ridge_context(ds: &Dataset, svd: &SvdCache, lambda: f64) -> Result<RidgeContext> {
    check_lambda(lambda)?;
    if svd.u.nrows() != ds.n() || svd.v.nrows() != ds.p() {
        return Err(Error::InvalidInput("SVD does not match dataset shape".into()));
    }
    let (shrink, coef) = spectral_weights(&svd.d, lambda);
    let hat = projector(&svd.u, &shrink);
    let uty = svd.u.transpose() * ds.y();
    let beta = &svd.v * uty.component_mul(&coef);
    let resid = ds.y() - &hat * ds.y();
    Ok(RidgeContext {
        lambda,
        hat,
        resid,
        beta,
    })
}

/// One SVD, any number of λ evaluations.
#[derive(Debug, Clone)]
pub struct RidgeSolver {
    y: DVector<f64>,
    svd: SvdCache,
    penalty: Penalty,
    y_mean: f64,
    feature_means: DVector<f64>,
    p: usize,
}

impl RidgeSolver {
    pub fn new(ds: &Dataset, penalty: Penalty) -> Result<Self> {
        Self::from_parts(ds.x(), ds.y(), penalty)
    }

    /// `x` must carry the intercept in column 0 for the unpenalized variant.
    pub fn from_parts(x: &DMatrix<f64>, y: &DVector<f64>, penalty: Penalty) -> Result<Self> {
        let n = x.nrows();
        if n != y.len() || n == 0 {
            return Err(Error::InvalidInput("design and response sizes differ".into()));
        }
        let p = x.ncols();
        let y_mean = y.mean();
        match penalty {
            Penalty::Full => Ok(Self {
                y: y.clone(),
                svd: svd_decompose(x)?,
                penalty,
                y_mean,
                feature_means: DVector::zeros(p.saturating_sub(1)),
                p,
            }),
            Penalty::UnpenalizedIntercept => {
                let mut feats = x.columns(1, p - 1).into_owned();
                let means = DVector::from_iterator(
                    p - 1,
                    feats.column_iter().map(|c| c.mean()),
                );
                for (mut col, &m) in feats.column_iter_mut().zip(means.iter()) {
                    col.add_scalar_mut(-m);
                }
                let svd = if p > 1 {
                    svd_decompose(&feats)?
                } else {
                    SvdCache {
                        u: DMatrix::zeros(n, 0),
                        d: DVector::zeros(0),
                        v: DMatrix::zeros(0, 0),
                    }
                };
                Ok(Self {
                    y: y.clone(),
                    svd,
                    penalty,
                    y_mean,
                    feature_means: means,
                    p,
                })
            }
        }
    }

    pub fn svd(&self) -> &SvdCache {
        &self.svd
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    /// Coefficients (intercept first) without forming the hat matrix.
    pub fn beta(&self, lambda: f64) -> Result<DVector<f64>> {
        check_lambda(lambda)?;
        let (_, coef) = spectral_weights(&self.svd.d, lambda);
        let uty = self.svd.u.transpose() * &self.y;
        let b = &self.svd.v * uty.component_mul(&coef);
        match self.penalty {
            Penalty::Full => Ok(b),
            Penalty::UnpenalizedIntercept => {
                let mut full = DVector::zeros(self.p);
                let b0 = self.y_mean - self.feature_means.dot(&b);
                full[0] = b0;
                full.rows_mut(1, self.p - 1).copy_from(&b);
                Ok(full)
            }
        }
    }

    pub fn context(&self, lambda: f64) -> Result<RidgeContext> {
        check_lambda(lambda)?;
        let (shrink, _) = spectral_weights(&self.svd.d, lambda);
        let mut hat = projector(&self.svd.u, &shrink);
        if self.penalty == Penalty::UnpenalizedIntercept {
            let n = hat.nrows() as f64;
            hat.add_scalar_mut(1.0 / n);
        }
        let beta = self.beta(lambda)?;
        let resid = &self.y - &hat * &self.y;
        Ok(RidgeContext {
            lambda,
            hat,
            resid,
            beta,
        })
    }
}

/// `q = [I - H_T]⁻¹ r_T` for the principal block of `hat` at `idx`.
pub fn submatrix_inverse_apply(
    hat: &DMatrix<f64>,
    resid: &DVector<f64>,
    idx: &[usize],
) -> Result<DVector<f64>> {
    let n = hat.nrows();
    let k = idx.len();
    if hat.ncols() != n || resid.len() != n {
        return Err(Error::InvalidInput("hat/residual shape mismatch".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "test block size {k} must lie in [1, {n})"
        )));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) || idx[k - 1] >= n {
        return Err(Error::InvalidInput(
            "test indices must be strictly increasing and in range".into(),
        ));
    }
    let a = DMatrix::from_fn(k, k, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - hat[(idx[i], idx[j])]
    });
    let r = DVector::from_iterator(k, idx.iter().map(|&i| resid[i]));
    let singular = |condition: f64| Error::SingularTestBlock {
        partition: None,
        indices: idx.to_vec(),
        condition,
    };
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    // measured against the unit scale of the identity so that `H_T ≈ I` is caught
    let condition = if smin > 0.0 { smax.max(1.0) / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(singular(condition));
    }
    a.lu().solve(&r).ok_or_else(|| singular(condition))
}

/// Closed-form solves for the 2×2 and 3×3 blocks used in the hot loops.
pub mod block {
    use super::CONDITION_LIMIT;

    /// Solves `[I - H_{mn}] q = (r_m, r_n)`; `None` when the block is singular.
    #[inline]
    pub fn solve2(h_mm: f64, h_nn: f64, h_mn: f64, r_m: f64, r_n: f64) -> Option<(f64, f64)> {
        let a = 1.0 - h_mm;
        let c = 1.0 - h_nn;
        let det = a * c - h_mn * h_mn;
        let half_tr = 0.5 * (a + c);
        let spread = (0.25 * (a - c) * (a - c) + h_mn * h_mn).sqrt();
        let eig_max = half_tr + spread;
        if !(det > 0.0) || !(eig_max > 0.0) {
            return None;
        }
        let eig_min = det / eig_max;
        if eig_max.max(1.0) / eig_min > CONDITION_LIMIT {
            return None;
        }
        Some(((c * r_m + h_mn * r_n) / det, (h_mn * r_m + a * r_n) / det))
    }

    /// Solves the symmetric 3×3 system `[I - H_T] q = r_T` for `T = {i, j, k}`.
    ///
    /// `h` holds `(h_ii, h_jj, h_kk, h_ij, h_ik, h_jk)`.
    #[inline]
    pub fn solve3(h: [f64; 6], r: [f64; 3]) -> Option<[f64; 3]> {
        let a = 1.0 - h[0];
        let b = 1.0 - h[1];
        let c = 1.0 - h[2];
        let d = -h[3];
        let e = -h[4];
        let f = -h[5];
        let c00 = b * c - f * f;
        let c01 = e * f - d * c;
        let c02 = d * f - b * e;
        let c11 = a * c - e * e;
        let c12 = d * e - a * f;
        let c22 = a * b - d * d;
        let det = a * c00 + d * c01 + e * c02;
        if !(det > 0.0) || !det.is_finite() {
            return None;
        }
        let norm_a = (a * a + b * b + c * c + 2.0 * (d * d + e * e + f * f)).sqrt();
        let norm_adj = (c00 * c00
            + c11 * c11
            + c22 * c22
            + 2.0 * (c01 * c01 + c02 * c02 + c12 * c12))
            .sqrt();
        if norm_a.max(1.0) * norm_adj / det > CONDITION_LIMIT {
            return None;
        }
        Some([
            (c00 * r[0] + c01 * r[1] + c02 * r[2]) / det,
            (c01 * r[0] + c11 * r[1] + c12 * r[2]) / det,
            (c02 * r[0] + c12 * r[1] + c22 * r[2]) / det,
        ])
    }
}
