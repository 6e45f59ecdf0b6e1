//! Ridge and PLS1 regression on column-centered data.
//!
//! Both models keep the intercept out of the fit: the response and the
//! columns are centered first, and the intercept is reconstructed as
//! `ȳ − x̄ᵀβ`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{center_matrix, mean};
use crate::error::{Error, Result};

/// Where a coefficient vector came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefLabel {
    Ridge { lambda: f64 },
    Pls { k: usize },
    FeatureT1,
    Custom(String),
}

impl fmt::Display for CoefLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefLabel::Ridge { lambda } => write!(f, "ridge(lambda={lambda:e})"),
            CoefLabel::Pls { k } => write!(f, "pls(k={k})"),
            CoefLabel::FeatureT1 => f.write_str("feature_t1"),
            CoefLabel::Custom(s) => f.write_str(s),
        }
    }
}

/// Linear predictor `ŷ(x) = intercept + xᵀβ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub label: CoefLabel,
}

impl CoefficientVector {
    /// Anchors `beta` at the given means: `intercept = ȳ − x̄ᵀβ`.
    pub fn anchored(beta: Vec<f64>, x_mean: &[f64], y_mean: f64, label: CoefLabel) -> Self {
        let intercept = y_mean - dot(x_mean, &beta);
        Self {
            beta,
            intercept,
            label,
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }
}

pub fn predict(cv: &CoefficientVector, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.ncols() != cv.p() {
        return Err(Error::Argument(format!(
            "matrix has {} columns, coefficients have {}",
            x.ncols(),
            cv.p()
        )));
    }
    let beta = DVector::from_column_slice(&cv.beta);
    Ok((x * beta).iter().map(|v| v + cv.intercept).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_centered(xc: &DMatrix<f64>, yc: &[f64]) -> Result<()> {
    if xc.nrows() != yc.len() {
        return Err(Error::Argument(format!(
            "matrix has {} rows, response has {}",
            xc.nrows(),
            yc.len()
        )));
    }
    if xc.nrows() < 2 {
        return Err(Error::Argument("need at least 2 samples".into()));
    }
    let n = xc.nrows() as f64;
    let scale = xc.amax();
    for j in 0..xc.ncols() {
        let s: f64 = xc.column(j).iter().sum();
        if s.abs() > 1e-8 * n * scale {
            return Err(Error::Argument(format!(
                "column {j} is not centered (sum {s:e})"
            )));
        }
    }
    Ok(())
}

/// Column-centered design and response together with the removed means.
#[derive(Debug, Clone)]
pub struct CenteredData {
    pub xc: DMatrix<f64>,
    pub yc: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
}

impl CenteredData {
    pub fn from_raw(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Argument(format!(
                "matrix has {} rows, response has {}",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() < 2 {
            return Err(Error::Argument("need at least 2 samples".into()));
        }
        let (xc, x_mean) = center_matrix(x);
        let y_mean = mean(y);
        let yc = y.iter().map(|v| v - y_mean).collect();
        Ok(Self {
            xc,
            yc,
            x_mean,
            y_mean,
        })
    }

    pub fn n(&self) -> usize {
        self.xc.nrows()
    }

    pub fn p(&self) -> usize {
        self.xc.ncols()
    }

    /// Ridge factorization anchored at this data's means.
    pub fn ridge(&self) -> Result<RidgePathModel> {
        Ok(ridge_fit(&self.xc, &self.yc)?.with_means(self.x_mean.clone(), self.y_mean))
    }

    /// PLS1 fit anchored at this data's means.
    pub fn pls(&self, k: usize) -> Result<PlsModel> {
        let mut model = pls_fit(&self.xc, &self.yc, k)?;
        model.x_mean = self.x_mean.clone();
        model.y_mean = self.y_mean;
        Ok(model)
    }
}

/// Relative rank cutoff `ε·max(n, p)` applied to `s / s₁`.
pub fn default_rank_tol(n: usize, p: usize) -> f64 {
    f64::EPSILON * n.max(p) as f64
}

/// Descending singular values kept after truncation at `rank_tol·s₁`,
/// with matching left and right vectors.
struct ThinSvd {
    u: DMatrix<f64>,
    s: Vec<f64>,
    v: DMatrix<f64>,
}

fn thin_svd(x: &DMatrix<f64>, rank_tol: f64) -> Result<ThinSvd> {
    let (n, p) = x.shape();
    let svd = x.clone().svd(true, true);
    let u = svd
        .u
        .ok_or_else(|| Error::Numeric("SVD did not return U".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return Vᵀ".into()))?;
    let sv = svd.singular_values;
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric(
            "SVD produced non-finite singular values".into(),
        ));
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let s1 = order.first().map_or(0.0, |&i| sv[i]);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| s1 > 0.0 && sv[i] > rank_tol * s1)
        .collect();
    let r = keep.len();
    let mut uo = DMatrix::zeros(n, r);
    let mut vo = DMatrix::zeros(p, r);
    for (c, &i) in keep.iter().enumerate() {
        uo.set_column(c, &u.column(i));
        vo.set_column(c, &v_t.row(i).transpose());
    }
    Ok(ThinSvd {
        u: uo,
        s: keep.iter().map(|&i| sv[i]).collect(),
        v: vo,
    })
}

/// Numerical rank under the default tolerance.
pub fn numerical_rank(x: &DMatrix<f64>) -> Result<usize> {
    let tol = default_rank_tol(x.nrows(), x.ncols());
    let sv = x.clone().singular_values();
    let s1 = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    if !s1.is_finite() {
        return Err(Error::Numeric("non-finite singular value".into()));
    }
    Ok(sv.iter().filter(|&&s| s1 > 0.0 && s > tol * s1).count())
}

/// Thin SVD of the centered training matrix, reusable across λ.
#[derive(Debug, Clone)]
pub struct RidgePathModel {
    u: DMatrix<f64>,
    s: Vec<f64>,
    v: DMatrix<f64>,
    uty: Vec<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
    rank_tol: f64,
}

/// Factorizes centered data. The model's means are zero; use
/// [`RidgePathModel::with_means`] or [`fit_ridge_path`] to anchor intercepts.
pub fn ridge_fit(xc: &DMatrix<f64>, yc: &[f64]) -> Result<RidgePathModel> {
    check_centered(xc, yc)?;
    let rank_tol = default_rank_tol(xc.nrows(), xc.ncols());
    let ThinSvd { u, s, v } = thin_svd(xc, rank_tol)?;
    let uty = (0..s.len())
        .map(|i| dot(u.column(i).as_slice(), yc))
        .collect();
    Ok(RidgePathModel {
        u,
        s,
        v,
        uty,
        x_mean: vec![0.0; xc.ncols()],
        y_mean: 0.0,
        rank_tol,
    })
}

/// Centers raw `x`, `y` and factorizes.
pub fn fit_ridge_path(x: &DMatrix<f64>, y: &[f64]) -> Result<RidgePathModel> {
    CenteredData::from_raw(x, y)?.ridge()
}

impl RidgePathModel {
    pub fn with_means(mut self, x_mean: Vec<f64>, y_mean: f64) -> Self {
        assert_eq!(x_mean.len(), self.p(), "x_mean length");
        self.x_mean = x_mean;
        self.y_mean = y_mean;
        self
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn p(&self) -> usize {
        self.v.nrows()
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    /// Largest singular value, zero for an all-zero matrix.
    pub fn s1(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn uty(&self) -> &[f64] {
        &self.uty
    }

    pub fn x_mean(&self) -> &[f64] {
        &self.x_mean
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Coordinates of β(λ) in the basis of right singular vectors:
    /// `s_i / (s_i² + λ) · (Uᵀy)_i`.
    pub fn path_coords(&self, lambda: f64) -> Vec<f64> {
        self.s
            .iter()
            .zip(&self.uty)
            .map(|(s, c)| s / (s * s + lambda) * c)
            .collect()
    }

    /// `Vᵀb`
    pub fn rowspace_coords(&self, b: &[f64]) -> Vec<f64> {
        (0..self.rank())
            .map(|i| dot(self.v.column(i).as_slice(), b))
            .collect()
    }

    /// `V c`
    pub fn from_coords(&self, coords: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(coords);
        (&self.v * c).iter().copied().collect()
    }

    pub fn beta_raw(&self, lambda: f64) -> Result<Vec<f64>> {
        if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() {
            return Err(Error::Argument(format!(
                "lambda must be a finite non-negative number, got {lambda}"
            )));
        }
        Ok(self.from_coords(&self.path_coords(lambda)))
    }
}

/// `β(λ) = V diag(s/(s²+λ)) Uᵀy`; λ = 0 gives minimum-norm least squares
/// on the truncated rank.
pub fn ridge_beta(model: &RidgePathModel, lambda: f64) -> Result<CoefficientVector> {
    let beta = model.beta_raw(lambda)?;
    Ok(CoefficientVector::anchored(
        beta,
        &model.x_mean,
        model.y_mean,
        CoefLabel::Ridge { lambda },
    ))
}

/// NIPALS PLS1 fit with `k` components.
#[derive(Debug, Clone)]
pub struct PlsModel {
    pub k: usize,
    pub weights: DMatrix<f64>,
    pub scores: DMatrix<f64>,
    pub loadings: DMatrix<f64>,
    pub q: Vec<f64>,
    pub beta: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub y_mean: f64,
}

impl PlsModel {
    pub fn coefficients(&self) -> CoefficientVector {
        CoefficientVector::anchored(
            self.beta.clone(),
            &self.x_mean,
            self.y_mean,
            CoefLabel::Pls { k: self.k },
        )
    }

    /// `T q`, the fitted centered response from the deflation recursion.
    pub fn fitted_centered(&self) -> Vec<f64> {
        (&self.scores * DVector::from_column_slice(&self.q))
            .iter()
            .copied()
            .collect()
    }
}

/// Coefficient vectors for k = 1, 2, ... from one NIPALS run.
#[derive(Debug, Clone)]
pub struct PlsPath {
    pub betas: Vec<Vec<f64>>,
    /// Set when deflation degenerated before the requested component count.
    pub truncated: Option<String>,
    model: PlsModel,
}

impl PlsPath {
    /// Model holding all computed components.
    pub fn full_model(&self) -> &PlsModel {
        &self.model
    }
}

/// Runs NIPALS for up to `k_max` components, stopping early on a vanishing
/// weight vector.
pub fn pls_path(xc: &DMatrix<f64>, yc: &[f64], k_max: usize) -> Result<PlsPath> {
    check_centered(xc, yc)?;
    if k_max == 0 {
        return Err(Error::Argument("component count must be at least 1".into()));
    }
    let rank = numerical_rank(xc)?;
    if k_max > rank {
        return Err(Error::Argument(format!(
            "{k_max} components requested but the data has rank {rank}"
        )));
    }
    let (n, p) = xc.shape();
    let mut xd = xc.clone();
    let mut yd = DVector::from_column_slice(yc);
    let mut w_cols: Vec<DVector<f64>> = Vec::new();
    let mut t_cols: Vec<DVector<f64>> = Vec::new();
    let mut p_cols: Vec<DVector<f64>> = Vec::new();
    let mut q = Vec::new();
    let mut betas = Vec::new();
    let mut truncated = None;
    let mut first_norm = 0.0;
    let tol = default_rank_tol(n, p);

    for comp in 0..k_max {
        let w_raw = xd.tr_mul(&yd);
        let w_norm = w_raw.norm();
        if comp == 0 {
            first_norm = w_norm;
        }
        if !w_norm.is_finite() || w_norm <= tol * first_norm || w_norm == 0.0 {
            truncated = Some(format!("weight vector vanished at component {}", comp + 1));
            break;
        }
        let w = w_raw / w_norm;
        let t = &xd * &w;
        let tt = t.dot(&t);
        if tt == 0.0 {
            truncated = Some(format!("zero score vector at component {}", comp + 1));
            break;
        }
        let load = xd.tr_mul(&t) / tt;
        let qk = yd.dot(&t) / tt;
        xd -= &t * load.transpose();
        yd -= &t * qk;
        w_cols.push(w);
        t_cols.push(t);
        p_cols.push(load);
        q.push(qk);
        betas.push(pls_beta(&w_cols, &p_cols, &q)?);
    }
    if w_cols.is_empty() {
        return Err(Error::Degenerate(
            "first PLS weight vector is zero (response uncorrelated with data)".into(),
        ));
    }
    let k = w_cols.len();
    let model = PlsModel {
        k,
        weights: DMatrix::from_columns(&w_cols),
        scores: DMatrix::from_columns(&t_cols),
        loadings: DMatrix::from_columns(&p_cols),
        q,
        beta: betas[k - 1].clone(),
        x_mean: vec![0.0; p],
        y_mean: 0.0,
    };
    Ok(PlsPath {
        betas,
        truncated,
        model,
    })
}

/// `β = W (PᵀW)⁻¹ q`
fn pls_beta(w: &[DVector<f64>], p: &[DVector<f64>], q: &[f64]) -> Result<Vec<f64>> {
    let wm = DMatrix::from_columns(w);
    let pm = DMatrix::from_columns(p);
    let ptw = pm.tr_mul(&wm);
    let coef = ptw
        .lu()
        .solve(&DVector::from_column_slice(q))
        .ok_or_else(|| Error::Numeric("PᵀW is singular".into()))?;
    Ok((wm * coef).iter().copied().collect())
}

/// NIPALS PLS1 on centered data with exactly `k` components.
pub fn pls_fit(xc: &DMatrix<f64>, yc: &[f64], k: usize) -> Result<PlsModel> {
    let path = pls_path(xc, yc, k)?;
    if let Some(msg) = path.truncated {
        return Err(Error::Degenerate(msg));
    }
    Ok(path.model)
}

/// Centers raw data and fits PLS1, anchoring the intercept at the means.
pub fn fit_pls(x: &DMatrix<f64>, y: &[f64], k: usize) -> Result<PlsModel> {
    CenteredData::from_raw(x, y)?.pls(k)
}
