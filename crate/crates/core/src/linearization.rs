//! First-order Taylor linearization of a compressing feature at the column
//! mean, followed by a univariate slope fit against the response.

use crate::dataset::{mean, summarize, FunctionalDataset};
use crate::error::{Error, Result};
use crate::features::{evaluate, gradient, CompressingFeature, GradientVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    /// `z_i = g(x̄) + (x_i − x̄)ᵀ∇g(x̄)`
    pub z: Vec<f64>,
    /// `g(x̄)`
    pub anchor_value: f64,
    pub gradient: GradientVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub residuals: Vec<f64>,
}

/// Linearization output scaled so its predictions regress onto `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCoefficients {
    pub anchor_value: f64,
    pub z: Vec<f64>,
    pub z_mean: f64,
    pub slope: f64,
    /// `slope · ∇g(x̄)`
    pub beta_t1: Vec<f64>,
    /// `(y − ȳ) − slope·(z − z̄)`
    pub residuals: Vec<f64>,
    pub gradient: GradientVector,
    pub y_mean: f64,
}

impl FeatureCoefficients {
    /// `ȳ + m(z_i − z̄)` for every training sample.
    pub fn fitted(&self) -> Vec<f64> {
        self.z
            .iter()
            .map(|zi| self.y_mean + self.slope * (zi - self.z_mean))
            .collect()
    }

    /// Training coefficient of determination of the linearized model.
    pub fn r_squared(&self, y: &[f64]) -> f64 {
        let ss_res: f64 = self.residuals.iter().map(|r| r * r).sum();
        let ss_tot: f64 = y.iter().map(|v| (v - self.y_mean).powi(2)).sum();
        1.0 - ss_res / ss_tot
    }
}

/// `y_i = g(x_i)` for every sample.
pub fn response_from_feature<F: CompressingFeature>(
    ds: &FunctionalDataset,
    f: &F,
) -> Result<Vec<f64>> {
    (0..ds.n())
        .map(|i| {
            evaluate(f, &ds.row(i)).map_err(|e| Error::Evaluation {
                location: format!("sample {i}"),
                msg: e.to_string(),
            })
        })
        .collect()
}

pub fn linearize<F: CompressingFeature>(ds: &FunctionalDataset, f: &F) -> Result<Linearization> {
    let x_mean = summarize(ds, None)?.column_mean;
    let anchor_value = evaluate(f, &x_mean)?;
    let grad = gradient(f, &x_mean)?;
    let z = (0..ds.n())
        .map(|i| {
            let row = ds.values().row(i);
            anchor_value
                + row
                    .iter()
                    .zip(&x_mean)
                    .zip(&grad.values)
                    .map(|((x, m), g)| (x - m) * g)
                    .sum::<f64>()
        })
        .collect();
    Ok(Linearization {
        z,
        anchor_value,
        gradient: grad,
    })
}

/// Univariate OLS of centered `y` on centered `z`.
pub fn fit_slope(z: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if z.len() != y.len() {
        return Err(Error::Argument(format!(
            "z has {} entries, y has {}",
            z.len(),
            y.len()
        )));
    }
    let n = z.len();
    if n < 2 {
        return Err(Error::Argument(format!("slope fit needs n >= 2, got {n}")));
    }
    let z_mean = mean(z);
    let y_mean = mean(y);
    let szz: f64 = z.iter().map(|v| (v - z_mean).powi(2)).sum();
    let max_sq = z.iter().fold(0.0f64, |m, v| m.max(v * v));
    if szz / n as f64 <= 1e-14 * max_sq {
        return Err(Error::Degenerate(
            "linearized feature is constant over the samples".into(),
        ));
    }
    let szy: f64 = z
        .iter()
        .zip(y)
        .map(|(zi, yi)| (zi - z_mean) * (yi - y_mean))
        .sum();
    let slope = szy / szz;
    let residuals = z
        .iter()
        .zip(y)
        .map(|(zi, yi)| (yi - y_mean) - slope * (zi - z_mean))
        .collect();
    Ok(SlopeFit { slope, residuals })
}

pub fn feature_coefficients<F: CompressingFeature>(
    ds: &FunctionalDataset,
    f: &F,
    y: &[f64],
) -> Result<FeatureCoefficients> {
    if y.len() != ds.n() {
        return Err(Error::Argument(format!(
            "response has {} entries for {} samples",
            y.len(),
            ds.n()
        )));
    }
    let lin = linearize(ds, f)?;
    let fit = fit_slope(&lin.z, y)?;
    let beta_t1 = lin.gradient.values.iter().map(|g| fit.slope * g).collect();
    Ok(FeatureCoefficients {
        anchor_value: lin.anchor_value,
        z_mean: mean(&lin.z),
        z: lin.z,
        slope: fit.slope,
        beta_t1,
        residuals: fit.residuals,
        gradient: lin.gradient,
        y_mean: mean(y),
    })
}
