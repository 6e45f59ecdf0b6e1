//! Functional datasets: sampled curves over a shared, strictly monotone grid.
//!
//! Rows of [`FunctionalDataset::values`] are samples, columns are grid
//! points. Everything here is immutable once constructed.

mod csv;
mod split;
mod synth;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use self::csv::{load_csv, parse_csv, to_csv_string, write_csv, Layout};
pub use self::split::{apply_split, SplitDatasets, SplitSpec};
pub use self::synth::{synthesize, synthesize_with_truth, SynthParams, Synthetic};

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    values: DMatrix<f64>,
    grid: Vec<f64>,
    sample_ids: Vec<String>,
}

impl FunctionalDataset {
    /// Builds a dataset after checking shape, finiteness and grid monotonicity.
    pub fn new(values: DMatrix<f64>, grid: Vec<f64>, sample_ids: Vec<String>) -> Result<Self> {
        if grid.len() != values.ncols() {
            return Err(Error::Validation(format!(
                "grid has {} points but values have {} columns",
                grid.len(),
                values.ncols()
            )));
        }
        if sample_ids.len() != values.nrows() {
            return Err(Error::Validation(format!(
                "{} sample ids for {} rows",
                sample_ids.len(),
                values.nrows()
            )));
        }
        if grid.is_empty() {
            return Err(Error::Validation("grid is empty".into()));
        }
        if let Some(j) = grid.iter().position(|g| !g.is_finite()) {
            return Err(Error::Validation(format!("grid point {j} is not finite")));
        }
        check_monotone(&grid)?;
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::Validation(format!(
                        "non-finite value at sample {i}, grid index {j}"
                    )));
                }
            }
        }
        Ok(Self {
            values,
            grid,
            sample_ids,
        })
    }

    /// Builds a dataset with ids `"0"`, `"1"`, ...
    pub fn from_values(values: DMatrix<f64>, grid: Vec<f64>) -> Result<Self> {
        let ids = (0..values.nrows()).map(|i| i.to_string()).collect();
        Self::new(values, grid, ids)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::Validation(format!(
                "row index {bad} out of bounds for {} samples",
                self.n()
            )));
        }
        let values = self.values.select_rows(rows);
        let ids = rows.iter().map(|&r| self.sample_ids[r].clone()).collect();
        Ok(Self {
            values,
            grid: self.grid.clone(),
            sample_ids: ids,
        })
    }

    /// Same samples and grid with new values of identical shape.
    pub fn with_values(&self, values: DMatrix<f64>) -> Result<Self> {
        Self::new(values, self.grid.clone(), self.sample_ids.clone())
    }
}

fn check_monotone(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Ok(());
    }
    let increasing = grid[1] > grid[0];
    for (j, w) in grid.windows(2).enumerate() {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Err(Error::Validation(format!(
                "grid is not strictly monotone at index {}",
                j + 1
            )));
        }
    }
    Ok(())
}

/// Column statistics of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub column_mean: Vec<f64>,
    /// Population standard deviation (divisor `n`).
    pub column_std: Vec<f64>,
    pub response_mean: Option<f64>,
}

pub fn summarize(ds: &FunctionalDataset, y: Option<&[f64]>) -> Result<DatasetSummary> {
    let n = ds.n();
    if n == 0 {
        return Err(Error::Argument("cannot summarize an empty dataset".into()));
    }
    if let Some(y) = y {
        if y.len() != n {
            return Err(Error::Argument(format!(
                "response has {} entries for {n} samples",
                y.len()
            )));
        }
    }
    let column_mean = column_means(ds.values());
    let column_std = column_mean
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let ss: f64 = ds
                .values()
                .column(j)
                .iter()
                .map(|v| (v - m) * (v - m))
                .sum();
            (ss / n as f64).sqrt()
        })
        .collect();
    Ok(DatasetSummary {
        column_mean,
        column_std,
        response_mean: y.map(mean),
    })
}

/// Subtracts the column means, returning the centered matrix and summary.
pub fn center(ds: &FunctionalDataset) -> Result<(DMatrix<f64>, DatasetSummary)> {
    if ds.n() < 2 {
        return Err(Error::Argument(format!(
            "centering needs at least 2 samples, got {}",
            ds.n()
        )));
    }
    let summary = summarize(ds, None)?;
    let centered = center_with(ds.values(), &summary.column_mean);
    Ok((centered, summary))
}

/// Scales each centered column to unit standard deviation. Constant columns
/// are left centered but unscaled.
pub fn zscore(ds: &FunctionalDataset) -> Result<FunctionalDataset> {
    let (mut xc, summary) = center(ds)?;
    for (j, &s) in summary.column_std.iter().enumerate() {
        if s > 0.0 {
            xc.column_mut(j).iter_mut().for_each(|v| *v /= s);
        }
    }
    ds.with_values(xc)
}

pub(crate) fn column_means(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| x.column(j).iter().sum::<f64>() / n)
        .collect()
}

pub(crate) fn center_with(x: &DMatrix<f64>, means: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - means[j])
}

/// Column-centers a raw matrix. Returns the centered matrix and the means.
pub fn center_matrix(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let means = column_means(x);
    (center_with(x, &means), means)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
