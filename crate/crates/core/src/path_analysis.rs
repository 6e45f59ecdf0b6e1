//! Closest point on a regression solution path to a target coefficient
//! vector, and row-space/nullspace diagnostics.
//!
//! Ridge distances are evaluated in the basis of right singular vectors, so
//! each λ costs O(r) once the target has been projected. With `c(λ)` the
//! path coordinates and `τ = Vᵀt`:
//!
//! * coefficient distance: `Σ (c_i(λ) − τ_i)² + ‖t − Vτ‖²`
//! * prediction distance:  `Σ s_i² (c_i(λ) − τ_i)²`

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{
    dot, norm, pls_path, ridge_beta, CenteredData, CoefLabel, CoefficientVector, RidgePathModel,
};

/// Relative λ tolerance of the golden-section refinement.
pub const LAMBDA_REL_TOL: f64 = 1e-6;
pub const DEFAULT_GRID_POINTS: usize = 200;
pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `‖β − t‖²`
    #[default]
    CoefficientDistance,
    /// `‖X_c β − X_c t‖²`
    PredictionDistance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSearchResult {
    pub objective: Objective,
    pub lambda_star: Option<f64>,
    pub k_star: Option<usize>,
    pub distance_at_opt: f64,
    /// Evaluated `(λ or k, distance)` pairs in ascending parameter order.
    pub distance_curve: Vec<(f64, f64)>,
    pub beta_star: CoefficientVector,
    pub warning: Option<String>,
}

/// `[1e-10·s₁², 1e8·s₁²]`
pub fn default_lambda_range(model: &RidgePathModel) -> (f64, f64) {
    let s2 = model.s1() * model.s1();
    (1e-10 * s2, 1e8 * s2)
}

/// Distance from ridge path points to a fixed target.
#[derive(Debug, Clone)]
pub struct RidgeDistance<'a> {
    model: &'a RidgePathModel,
    target_coords: Vec<f64>,
    null_sq: f64,
    objective: Objective,
}

impl<'a> RidgeDistance<'a> {
    pub fn new(model: &'a RidgePathModel, target: &[f64], objective: Objective) -> Result<Self> {
        if target.len() != model.p() {
            return Err(Error::Argument(format!(
                "target has {} coefficients, model has {}",
                target.len(),
                model.p()
            )));
        }
        let target_coords = model.rowspace_coords(target);
        let row = model.from_coords(&target_coords);
        let null_sq = target
            .iter()
            .zip(&row)
            .map(|(t, r)| (t - r) * (t - r))
            .sum();
        Ok(Self {
            model,
            target_coords,
            null_sq,
            objective,
        })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let s = self.model.singular_values();
        let uty = self.model.uty();
        let mut acc = 0.0;
        for i in 0..s.len() {
            let c = s[i] / (s[i] * s[i] + lambda) * uty[i];
            let d = c - self.target_coords[i];
            acc += match self.objective {
                Objective::CoefficientDistance => d * d,
                Objective::PredictionDistance => s[i] * s[i] * d * d,
            };
        }
        match self.objective {
            Objective::CoefficientDistance => acc + self.null_sq,
            Objective::PredictionDistance => acc,
        }
    }
}

/// `count` log-spaced points from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// Index of the smallest value; the first index wins exact ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns the best
/// evaluated point and its value.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fd < fc { (d, fd) } else { (c, fc) };
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc < best_f {
                (best_x, best_f) = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd < best_f {
                (best_x, best_f) = (d, fd);
            }
        }
    }
    (best_x, best_f)
}

/// Two-stage search: log grid over `[max(lo, 1e-12·s₁²), hi]`, then
/// golden-section refinement in `ln λ` around the best grid point.
pub fn ridge_closest(
    model: &RidgePathModel,
    target: &CoefficientVector,
    objective: Objective,
    lambda_range: (f64, f64),
    grid_points: usize,
) -> Result<PathSearchResult> {
    let (lo, hi) = lambda_range;
    if !(lo >= 0.0 && hi.is_finite() && lo < hi) {
        return Err(Error::Argument(format!(
            "lambda range [{lo}, {hi}] is empty or invalid"
        )));
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::Argument(format!(
            "grid_points must be at least {MIN_GRID_POINTS}, got {grid_points}"
        )));
    }
    if model.rank() == 0 {
        return Err(Error::Degenerate("training matrix has rank 0".into()));
    }
    let floor = 1e-12 * model.s1() * model.s1();
    let lower = lo.max(floor);
    if lower >= hi {
        return Err(Error::Argument(format!(
            "lambda range [{lo}, {hi}] lies below the resolvable floor {floor:e}"
        )));
    }
    let dist = RidgeDistance::new(model, &target.beta, objective)?;
    let grid = log_grid(lower, hi, grid_points);
    let values: Vec<f64> = grid.iter().map(|&l| dist.eval(l)).collect();
    let best = argmin(&values);

    let left = grid[best.saturating_sub(1)].ln();
    let right = grid[(best + 1).min(grid.len() - 1)].ln();
    let tol = LAMBDA_REL_TOL * 0.1;
    let (u_star, d_star) = golden_section(|u| dist.eval(u.exp()), left, right, tol);

    let mut curve: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let (lambda_star, distance_at_opt) = if d_star < values[best] {
        let l = u_star.exp().clamp(lower, hi);
        let d = dist.eval(l);
        if d < values[best] {
            let pos = curve.partition_point(|(g, _)| *g < l);
            if curve.get(pos).map(|(g, _)| *g) != Some(l) {
                curve.insert(pos, (l, d));
            }
            (l, d)
        } else {
            (grid[best], values[best])
        }
    } else {
        (grid[best], values[best])
    };

    Ok(PathSearchResult {
        objective,
        lambda_star: Some(lambda_star),
        k_star: None,
        distance_at_opt,
        distance_curve: curve,
        beta_star: ridge_beta(model, lambda_star)?,
        warning: None,
    })
}

fn pls_distance(data: &CenteredData, beta: &[f64], target: &[f64], objective: Objective) -> f64 {
    let diff: Vec<f64> = beta.iter().zip(target).map(|(b, t)| b - t).collect();
    match objective {
        Objective::CoefficientDistance => dot(&diff, &diff),
        Objective::PredictionDistance => {
            let r = &data.xc * DVector::from_column_slice(&diff);
            r.dot(&r)
        }
    }
}

/// Exhaustive search over k = 1..=k_max. Ties go to the smaller k.
pub fn pls_closest(
    data: &CenteredData,
    target: &CoefficientVector,
    objective: Objective,
    k_max: usize,
) -> Result<PathSearchResult> {
    if target.p() != data.p() {
        return Err(Error::Argument(format!(
            "target has {} coefficients, data has {}",
            target.p(),
            data.p()
        )));
    }
    let path = pls_path(&data.xc, &data.yc, k_max)?;
    let curve: Vec<(f64, f64)> = path
        .betas
        .iter()
        .enumerate()
        .map(|(i, b)| {
            (
                (i + 1) as f64,
                pls_distance(data, b, &target.beta, objective),
            )
        })
        .collect();
    let dists: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let best = argmin(&dists);
    let k_star = best + 1;
    Ok(PathSearchResult {
        objective,
        lambda_star: None,
        k_star: Some(k_star),
        distance_at_opt: dists[best],
        distance_curve: curve,
        beta_star: CoefficientVector::anchored(
            path.betas[best].clone(),
            &data.x_mean,
            data.y_mean,
            CoefLabel::Pls { k: k_star },
        ),
        warning: path.truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullspaceReport {
    pub rowspace_norm: f64,
    pub nullspace_norm: f64,
    pub beta_label: String,
}

/// Splits `beta` into its projection onto span(V_r) and the remainder.
pub fn nullspace_report(
    model: &RidgePathModel,
    beta: &CoefficientVector,
) -> Result<NullspaceReport> {
    if beta.p() != model.p() {
        return Err(Error::Argument(format!(
            "coefficients have length {}, model has {}",
            beta.p(),
            model.p()
        )));
    }
    let coords = model.rowspace_coords(&beta.beta);
    let row = model.from_coords(&coords);
    let null: Vec<f64> = beta.beta.iter().zip(&row).map(|(b, r)| b - r).collect();
    Ok(NullspaceReport {
        rowspace_norm: norm(&coords),
        nullspace_norm: norm(&null),
        beta_label: beta.label.to_string(),
    })
}
