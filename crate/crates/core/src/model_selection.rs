//! k-fold cross-validation over ridge λ and PLS component counts, with
//! minimum-error and one-standard-error selection.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::FunctionalDataset;
use crate::error::{Error, Result};
use crate::path_analysis::log_grid;
use crate::regression::{
    pls_path, predict, ridge_beta, CenteredData, CoefLabel, CoefficientVector,
};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_CV_GRID_POINTS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvPath {
    /// Grid holds λ values; larger is more regularized.
    Ridge,
    /// Grid holds component counts; smaller is more regularized.
    Pls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Min,
    OneSe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCurve {
    pub path: CvPath,
    pub grid: Vec<f64>,
    /// Mean held-out RMSE across folds.
    pub mean_error: Vec<f64>,
    /// Sample standard deviation across folds divided by √folds.
    pub se: Vec<f64>,
    pub fold_assignment: Vec<usize>,
    pub seed: u64,
    /// `fold_errors[f][g]`: RMSE of fold `f` at grid point `g`.
    pub fold_errors: Vec<Vec<f64>>,
}

impl CvCurve {
    pub fn folds(&self) -> usize {
        self.fold_errors.len()
    }
}

/// 60 log-spaced points over `[1e-8·s₁², 1e4·s₁²]`.
pub fn default_lambda_grid(s1: f64) -> Result<Vec<f64>> {
    if !(s1 > 0.0 && s1.is_finite()) {
        return Err(Error::Degenerate(format!(
            "largest singular value is {s1}; cannot scale a λ grid"
        )));
    }
    let s2 = s1 * s1;
    Ok(log_grid(1e-8 * s2, 1e4 * s2, DEFAULT_CV_GRID_POINTS))
}

/// Seeded shuffle, then round-robin fold ids. Fold sizes differ by at most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Argument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if n < folds {
        return Err(Error::Argument(format!("{n} samples for {folds} folds")));
    }
    if n / folds < 2 {
        return Err(Error::Argument(format!(
            "{n} samples over {folds} folds leaves a fold with fewer than 2 samples"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut ids = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        ids[i] = pos % folds;
    }
    Ok(ids)
}

struct Fold {
    train: CenteredData,
    test_x: DMatrix<f64>,
    test_y: Vec<f64>,
}

fn split_fold(x: &DMatrix<f64>, y: &[f64], ids: &[usize], fold: usize) -> Result<Fold> {
    let train: Vec<usize> = (0..y.len()).filter(|&i| ids[i] != fold).collect();
    let test: Vec<usize> = (0..y.len()).filter(|&i| ids[i] == fold).collect();
    let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    Ok(Fold {
        train: CenteredData::from_raw(&x.select_rows(&train), &train_y)?,
        test_x: x.select_rows(&test),
        test_y: test.iter().map(|&i| y[i]).collect(),
    })
}

pub(crate) fn rmse(pred: &[f64], y: &[f64]) -> f64 {
    let ss: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    (ss / y.len() as f64).sqrt()
}

fn assemble(
    path: CvPath,
    grid: Vec<f64>,
    fold_errors: Vec<Vec<f64>>,
    fold_assignment: Vec<usize>,
    seed: u64,
) -> CvCurve {
    let folds = fold_errors.len() as f64;
    let mut mean_error = Vec::with_capacity(grid.len());
    let mut se = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let m = fold_errors.iter().map(|f| f[g]).sum::<f64>() / folds;
        let var = fold_errors.iter().map(|f| (f[g] - m).powi(2)).sum::<f64>() / (folds - 1.0);
        mean_error.push(m);
        se.push((var / folds).sqrt());
    }
    CvCurve {
        path,
        grid,
        mean_error,
        se,
        fold_assignment,
        seed,
        fold_errors,
    }
}

fn check_inputs(ds: &FunctionalDataset, y: &[f64]) -> Result<()> {
    if y.len() != ds.n() {
        return Err(Error::Argument(format!(
            "response has {} entries for {} samples",
            y.len(),
            ds.n()
        )));
    }
    Ok(())
}

/// Ridge CV: each fold re-centers on its own training rows and factorizes
/// once for the whole λ grid.
pub fn cv_ridge(
    ds: &FunctionalDataset,
    y: &[f64],
    lambda_grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvCurve> {
    check_inputs(ds, y)?;
    if lambda_grid.is_empty() {
        return Err(Error::Argument("empty λ grid".into()));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::Argument(format!("invalid λ {l} in grid")));
    }
    let ids = fold_assignment(ds.n(), folds, seed)?;
    let mut fold_errors = Vec::with_capacity(folds);
    for f in 0..folds {
        let fold = split_fold(ds.values(), y, &ids, f)?;
        let model = fold.train.ridge()?;
        let errs = lambda_grid
            .iter()
            .map(|&l| {
                let cv = ridge_beta(&model, l)?;
                Ok(rmse(&predict(&cv, &fold.test_x)?, &fold.test_y))
            })
            .collect::<Result<Vec<_>>>()?;
        fold_errors.push(errs);
    }
    Ok(assemble(
        CvPath::Ridge,
        lambda_grid.to_vec(),
        fold_errors,
        ids,
        seed,
    ))
}

/// PLS CV over k = 1..=k_max. A fold whose deflation exhausts before k_max
/// reuses its last coefficient vector for the remaining k.
pub fn cv_pls(
    ds: &FunctionalDataset,
    y: &[f64],
    k_max: usize,
    folds: usize,
    seed: u64,
) -> Result<CvCurve> {
    check_inputs(ds, y)?;
    if k_max == 0 {
        return Err(Error::Argument("k_max must be at least 1".into()));
    }
    let ids = fold_assignment(ds.n(), folds, seed)?;
    let mut fold_errors = Vec::with_capacity(folds);
    for f in 0..folds {
        let fold = split_fold(ds.values(), y, &ids, f)?;
        let path = pls_path(&fold.train.xc, &fold.train.yc, k_max)?;
        let errs = (0..k_max)
            .map(|k| {
                let beta = path.betas[k.min(path.betas.len() - 1)].clone();
                let cv = CoefficientVector::anchored(
                    beta,
                    &fold.train.x_mean,
                    fold.train.y_mean,
                    CoefLabel::Pls { k: k + 1 },
                );
                Ok(rmse(&predict(&cv, &fold.test_x)?, &fold.test_y))
            })
            .collect::<Result<Vec<_>>>()?;
        fold_errors.push(errs);
    }
    let grid = (1..=k_max).map(|k| k as f64).collect();
    Ok(assemble(CvPath::Pls, grid, fold_errors, ids, seed))
}

/// `true` when grid value `a` is more regularized than `b`.
fn more_regularized(path: CvPath, a: f64, b: f64) -> bool {
    match path {
        CvPath::Ridge => a > b,
        CvPath::Pls => a < b,
    }
}

/// Index of the selected grid point.
pub fn select_index(curve: &CvCurve, rule: Rule) -> Result<usize> {
    if curve.grid.is_empty() {
        return Err(Error::Argument("empty CV curve".into()));
    }
    let mut best = 0;
    for i in 1..curve.grid.len() {
        let (m, mb) = (curve.mean_error[i], curve.mean_error[best]);
        if m < mb || (m == mb && more_regularized(curve.path, curve.grid[i], curve.grid[best])) {
            best = i;
        }
    }
    if rule == Rule::Min {
        return Ok(best);
    }
    let threshold = curve.mean_error[best] + curve.se[best];
    let mut pick = best;
    for i in 0..curve.grid.len() {
        if curve.mean_error[i] <= threshold
            && more_regularized(curve.path, curve.grid[i], curve.grid[pick])
        {
            pick = i;
        }
    }
    Ok(pick)
}

/// Selected grid value (λ, or k as a float).
pub fn select(curve: &CvCurve, rule: Rule) -> Result<f64> {
    select_index(curve, rule).map(|i| curve.grid[i])
}
