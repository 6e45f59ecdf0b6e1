//! Compressing features `g: R^p -> R` and their gradients.
//!
//! Features are written once against [`Scalar`], so the same code evaluates
//! plain values and forward-mode derivatives.

mod dual;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use self::dual::{Dual, Scalar};
use crate::error::{Error, Result};

pub const DEFAULT_PERIOD: f64 = 0.06;

pub trait CompressingFeature {
    fn name(&self) -> String;

    /// Named constants of the feature, for reporting.
    fn params(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// `g(x) = sum_j x_j^2`
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SumOfSquares;

impl CompressingFeature for SumOfSquares {
    fn name(&self) -> String {
        "sum_of_squares".into()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        x.iter().map(|&v| v * v).sum()
    }
}

/// `g(x) = sum_j sin(2π x_j / period)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinusoidal {
    period: f64,
}

impl Sinusoidal {
    pub fn new(period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Argument(format!(
                "sinusoidal period must be positive, got {period}"
            )));
        }
        Ok(Self { period })
    }

    pub fn period(&self) -> f64 {
        self.period
    }
}

impl CompressingFeature for Sinusoidal {
    fn name(&self) -> String {
        "sinusoidal".into()
    }

    fn params(&self) -> Vec<(String, f64)> {
        vec![("period".into(), self.period)]
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let freq = 2.0 * PI / self.period;
        x.iter().map(|&v| v.scale(freq).sin()).sum()
    }
}

/// `g(x) = c^T x`
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub coefficients: Vec<f64>,
}

impl CompressingFeature for Linear {
    fn name(&self) -> String {
        "linear".into()
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        assert_eq!(x.len(), self.coefficients.len(), "linear feature length");
        x.iter()
            .zip(&self.coefficients)
            .map(|(&v, &c)| v.scale(c))
            .sum()
    }
}

/// `alpha·f + beta·g`
#[derive(Debug, Clone, PartialEq)]
pub struct Combination<F, G> {
    pub alpha: f64,
    pub f: F,
    pub beta: f64,
    pub g: G,
}

impl<F: CompressingFeature, G: CompressingFeature> CompressingFeature for Combination<F, G> {
    fn name(&self) -> String {
        format!(
            "{}*{}+{}*{}",
            self.alpha,
            self.f.name(),
            self.beta,
            self.g.name()
        )
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.f.eval(x).scale(self.alpha) + self.g.eval(x).scale(self.beta)
    }
}

pub fn builtin_sum_of_squares() -> SumOfSquares {
    SumOfSquares
}

pub fn builtin_sinusoidal(period: f64) -> Result<Sinusoidal> {
    Sinusoidal::new(period)
}

/// Feature selected by name, as it appears in run configs:
/// `{"feature":"sum_of_squares"}`, `{"feature":"sinusoidal","period":0.06}`
/// or `{"feature":"linear","coefficients":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "feature", rename_all = "snake_case", deny_unknown_fields)]
pub enum Feature {
    SumOfSquares,
    Sinusoidal {
        #[serde(default = "default_period")]
        period: f64,
    },
    Linear {
        coefficients: Vec<f64>,
    },
}

fn default_period() -> f64 {
    DEFAULT_PERIOD
}

impl Feature {
    pub fn validate(&self, p: Option<usize>) -> Result<()> {
        match self {
            Feature::SumOfSquares => Ok(()),
            Feature::Sinusoidal { period } => Sinusoidal::new(*period).map(|_| ()),
            Feature::Linear { coefficients } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Argument("linear coefficients must be finite".into()));
                }
                match p {
                    Some(p) if p != coefficients.len() => Err(Error::Argument(format!(
                        "linear feature has {} coefficients for {p} grid points",
                        coefficients.len()
                    ))),
                    _ => Ok(()),
                }
            }
        }
    }
}

impl CompressingFeature for Feature {
    fn name(&self) -> String {
        match self {
            Feature::SumOfSquares => SumOfSquares.name(),
            Feature::Sinusoidal { .. } => "sinusoidal".into(),
            Feature::Linear { .. } => "linear".into(),
        }
    }

    fn params(&self) -> Vec<(String, f64)> {
        match self {
            Feature::Sinusoidal { period } => vec![("period".into(), *period)],
            _ => Vec::new(),
        }
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Feature::SumOfSquares => SumOfSquares.eval(x),
            Feature::Sinusoidal { period } => {
                let freq = 2.0 * PI / period;
                x.iter().map(|&v| v.scale(freq).sin()).sum()
            }
            Feature::Linear { coefficients } => {
                x.iter().zip(coefficients).map(|(&v, &c)| v.scale(c)).sum()
            }
        }
    }
}

/// Gradient of a feature together with the point it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector {
    pub values: Vec<f64>,
    pub anchor: Vec<f64>,
}

/// Evaluates `f` at `x`, failing on a non-finite result.
pub fn evaluate<F: CompressingFeature>(f: &F, x: &[f64]) -> Result<f64> {
    let v = f.eval(x);
    if !v.is_finite() {
        return Err(Error::Evaluation {
            location: format!("feature `{}`", f.name()),
            msg: format!("value is {v}"),
        });
    }
    Ok(v)
}

/// Exact gradient by forward-mode differentiation, one seeded pass per
/// component.
pub fn gradient<F: CompressingFeature>(f: &F, x: &[f64]) -> Result<GradientVector> {
    let mut seeded: Vec<Dual> = x.iter().map(|&v| Dual::constant(v)).collect();
    let mut values = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        seeded[j].deriv = 1.0;
        let out = f.eval(&seeded);
        seeded[j].deriv = 0.0;
        if !(out.value.is_finite() && out.deriv.is_finite()) {
            return Err(Error::Evaluation {
                location: format!("gradient component {j}"),
                msg: format!("non-finite dual result {out:?}"),
            });
        }
        values.push(out.deriv);
    }
    Ok(GradientVector {
        values,
        anchor: x.to_vec(),
    })
}

/// Central finite differences with step `rel_step·(1+|x_j|)` per component.
pub fn gradient_fd<F: CompressingFeature>(
    f: &F,
    x: &[f64],
    rel_step: f64,
) -> Result<GradientVector> {
    if !(rel_step > 0.0 && rel_step.is_finite()) {
        return Err(Error::Argument(format!(
            "rel_step must be positive, got {rel_step}"
        )));
    }
    let mut probe = x.to_vec();
    let mut values = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = rel_step * (1.0 + x[j].abs());
        probe[j] = x[j] + h;
        let up = evaluate(f, &probe)?;
        probe[j] = x[j] - h;
        let down = evaluate(f, &probe)?;
        probe[j] = x[j];
        values.push((up - down) / (2.0 * h));
    }
    Ok(GradientVector {
        values,
        anchor: x.to_vec(),
    })
}
