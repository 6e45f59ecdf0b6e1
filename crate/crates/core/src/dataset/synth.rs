//! Seeded low-rank smooth curves for tests and desk-scale case studies.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::FunctionalDataset;
use crate::error::{Error, Result};

pub const GRID_START: f64 = 2.0;
pub const GRID_END: f64 = 3.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthParams {
    pub n: usize,
    pub p: usize,
    /// Bump width as a multiple of half the spacing between bump centers.
    pub smoothness: f64,
    pub rank: usize,
    pub noise_std: f64,
    pub seed: u64,
}

/// Generated dataset together with its noiseless part.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: FunctionalDataset,
    pub noiseless: DMatrix<f64>,
}

pub fn synthesize(params: &SynthParams) -> Result<FunctionalDataset> {
    synthesize_with_truth(params).map(|s| s.dataset)
}

/// Each row is `sum_k a_ik * phi_k(v) + noise` where the `phi_k` are
/// Gaussian bumps spread evenly over `[2.0, 3.5]`.
pub fn synthesize_with_truth(params: &SynthParams) -> Result<Synthetic> {
    let SynthParams {
        n,
        p,
        smoothness,
        rank,
        noise_std,
        seed,
    } = *params;
    if n == 0 || p == 0 {
        return Err(Error::Argument("n and p must be positive".into()));
    }
    if rank == 0 || rank > n.min(p) {
        return Err(Error::Argument(format!(
            "rank must be in 1..={}, got {rank}",
            n.min(p)
        )));
    }
    if !(smoothness > 0.0 && smoothness.is_finite()) {
        return Err(Error::Argument(format!(
            "smoothness must be positive, got {smoothness}"
        )));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::Argument(format!(
            "noise_std must be non-negative, got {noise_std}"
        )));
    }

    let grid: Vec<f64> = (0..p)
        .map(|j| {
            if p == 1 {
                GRID_START
            } else {
                GRID_START + (GRID_END - GRID_START) * j as f64 / (p - 1) as f64
            }
        })
        .collect();
    let span = GRID_END - GRID_START;
    let width = smoothness * span / (2.0 * rank as f64);
    let basis = DMatrix::from_fn(rank, p, |k, j| {
        let center = GRID_START + span * (k as f64 + 0.5) / rank as f64;
        let d = (grid[j] - center) / width;
        (-0.5 * d * d).exp()
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let means: Vec<f64> = (0..rank)
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * rng.random_range(0.02..0.08)
        })
        .collect();
    let weights = DMatrix::from_fn(n, rank, |_, k| {
        means[k] + 0.03 * std_normal.sample(&mut rng)
    });
    let noiseless = &weights * &basis;
    let mut values = noiseless.clone();
    if noise_std > 0.0 {
        // column-major fill keeps the draw order fixed for a given shape
        for v in values.iter_mut() {
            *v += noise_std * std_normal.sample(&mut rng);
        }
    }
    let dataset = FunctionalDataset::from_values(values, grid)?;
    Ok(Synthetic { dataset, noiseless })
}
