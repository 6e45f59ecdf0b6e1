//! Clean-room reference computations shared by the integration and
//! acceptance tests. Nothing here calls into the library's numerics.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix(n: usize, p: usize, scale: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, p, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vec(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

pub fn col_means(x: &DMatrix<f64>) -> Vec<f64> {
    (0..x.ncols())
        .map(|j| x.column(j).iter().sum::<f64>() / x.nrows() as f64)
        .collect()
}

pub fn centered(x: &DMatrix<f64>, y: &[f64]) -> (DMatrix<f64>, Vec<f64>) {
    let m = col_means(x);
    let xc = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - m[j]);
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    (xc, y.iter().map(|v| v - ym).collect())
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b)) / norm(b)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

pub fn mat_vec(x: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (x * DVector::from_column_slice(v))
        .iter()
        .copied()
        .collect()
}

pub fn mat_t_vec(x: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (x.transpose() * DVector::from_column_slice(v))
        .iter()
        .copied()
        .collect()
}

/// Normal-equations ridge by Cholesky with two rounds of iterative refinement.
/// Uses the `n × n` kernel form `β = Xᵀ(XXᵀ + λI)⁻¹y` when `p > n`; for
/// centered data its near-singular direction is the constant vector, which
/// `Xᵀ` annihilates.
pub fn dense_ridge(xc: &DMatrix<f64>, yc: &[f64], lambda: f64) -> Vec<f64> {
    let (n, p) = xc.shape();
    if p > n {
        let a = xc * xc.transpose() + DMatrix::identity(n, n) * lambda;
        let b = DVector::from_column_slice(yc);
        let chol = a
            .clone()
            .cholesky()
            .expect("kernel matrix is SPD for λ > 0");
        let mut alpha = chol.solve(&b);
        for _ in 0..2 {
            let r = &b - &a * &alpha;
            alpha += chol.solve(&r);
        }
        return mat_t_vec(xc, alpha.as_slice());
    }
    let a = xc.transpose() * xc + DMatrix::identity(p, p) * lambda;
    let b = DVector::from_vec(mat_t_vec(xc, yc));
    let chol = a
        .clone()
        .cholesky()
        .expect("normal matrix is SPD for λ > 0");
    let mut beta = chol.solve(&b);
    for _ in 0..2 {
        let r = &b - &a * &beta;
        beta += chol.solve(&r);
    }
    beta.iter().copied().collect()
}

/// Orthonormal basis for span of `vectors` by modified Gram–Schmidt applied
/// twice. Vectors whose residual falls below `tol` times their norm are dropped.
pub fn gram_schmidt(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let nw = norm(&w);
        if nw > tol * scale {
            basis.push(w.iter().map(|v| v / nw).collect());
        }
    }
    basis
}

/// Row-space basis of `xc` from its rows.
pub fn row_space_basis(xc: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = (0..xc.nrows())
        .map(|i| xc.row(i).iter().copied().collect())
        .collect();
    gram_schmidt(&rows, tol)
}

/// `(‖P β‖, ‖β − P β‖)` with `P` the projector onto `basis`.
pub fn split_norms(basis: &[Vec<f64>], beta: &[f64]) -> (f64, f64) {
    let mut proj = vec![0.0; beta.len()];
    for q in basis {
        let c = dot(beta, q);
        for (pi, qi) in proj.iter_mut().zip(q) {
            *pi += c * qi;
        }
    }
    (norm(&proj), norm(&sub(beta, &proj)))
}

/// PLS1 with k components characterized as least squares restricted to the
/// Krylov space `K_k(XᵀX, Xᵀy)`.
pub fn krylov_pls(xc: &DMatrix<f64>, yc: &[f64], k: usize) -> Vec<f64> {
    let p = xc.ncols();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut v = mat_t_vec(xc, yc);
    for _ in 0..k {
        let q = gram_schmidt(&[v.clone()], 0.0);
        let mut w = q[0].clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = norm(&w);
        let w: Vec<f64> = w.iter().map(|x| x / nw).collect();
        v = mat_t_vec(xc, &mat_vec(xc, &w));
        basis.push(w);
    }
    let kmat = DMatrix::from_fn(p, k, |i, j| basis[j][i]);
    let xk = xc * &kmat;
    let c = xk
        .svd(true, true)
        .solve(&DVector::from_column_slice(yc), 1e-14)
        .expect("small least-squares solve");
    (kmat * c).iter().copied().collect()
}

/// Refits ridge from scratch on every fold's training rows and returns
/// `errors[f][g]`, the held-out RMSE of fold `f` at `grid[g]`.
pub fn naive_cv_ridge(
    x: &DMatrix<f64>,
    y: &[f64],
    ids: &[usize],
    folds: usize,
    grid: &[f64],
) -> Vec<Vec<f64>> {
    (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..y.len()).filter(|&i| ids[i] != f).collect();
            let test: Vec<usize> = (0..y.len()).filter(|&i| ids[i] == f).collect();
            let xt = x.select_rows(&train);
            let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let xm = col_means(&xt);
            let ym = yt.iter().sum::<f64>() / yt.len() as f64;
            let (xtc, ytc) = centered(&xt, &yt);
            grid.iter()
                .map(|&l| {
                    let beta = dense_ridge(&xtc, &ytc, l);
                    let sse: f64 = test
                        .iter()
                        .map(|&i| {
                            let pred = ym
                                + (0..x.ncols())
                                    .map(|j| (x[(i, j)] - xm[j]) * beta[j])
                                    .sum::<f64>();
                            (pred - y[i]).powi(2)
                        })
                        .sum();
                    (sse / test.len() as f64).sqrt()
                })
                .collect()
        })
        .collect()
}

/// Intercept-and-slope least squares via SVD, returning the slope.
pub fn lstsq_slope(z: &[f64], y: &[f64]) -> f64 {
    let a = DMatrix::from_fn(z.len(), 2, |i, j| if j == 0 { 1.0 } else { z[i] });
    let sol = a
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), 0.0)
        .expect("2-column solve");
    sol[1]
}

/// Central finite-difference gradient with per-coordinate step.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], rel: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = rel * (1.0 + x[j].abs());
            xp[j] = x[j] + h;
            let fp = f(&xp);
            xp[j] = x[j] - h;
            let fm = f(&xp);
            xp[j] = x[j];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Textbook NIPALS PLS1 on plain row-major vectors. Returns the coefficient
/// vector for `k` components, `W (PᵀW)⁻¹ q` with the triangular system solved
/// by back substitution.
pub fn nipals(xc: &DMatrix<f64>, yc: &[f64], k: usize) -> Vec<f64> {
    let (n, p) = xc.shape();
    let mut x: Vec<Vec<f64>> = (0..n)
        .map(|i| xc.row(i).iter().copied().collect())
        .collect();
    let mut y = yc.to_vec();
    let (mut ws, mut ps, mut qs) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..k {
        let mut w = vec![0.0; p];
        for i in 0..n {
            for j in 0..p {
                w[j] += x[i][j] * y[i];
            }
        }
        let nw = norm(&w);
        w.iter_mut().for_each(|v| *v /= nw);
        let t: Vec<f64> = x.iter().map(|row| dot(row, &w)).collect();
        let tt = dot(&t, &t);
        let mut load = vec![0.0; p];
        for i in 0..n {
            for j in 0..p {
                load[j] += x[i][j] * t[i] / tt;
            }
        }
        let q = dot(&y, &t) / tt;
        for i in 0..n {
            for j in 0..p {
                x[i][j] -= t[i] * load[j];
            }
            y[i] -= t[i] * q;
        }
        ws.push(w);
        ps.push(load);
        qs.push(q);
    }
    // PᵀW is upper triangular for NIPALS weights
    let m: Vec<Vec<f64>> = (0..k)
        .map(|a| (0..k).map(|b| dot(&ps[a], &ws[b])).collect())
        .collect();
    let mut c = vec![0.0; k];
    for a in (0..k).rev() {
        let s: f64 = (a + 1..k).map(|b| m[a][b] * c[b]).sum();
        c[a] = (qs[a] - s) / m[a][a];
    }
    (0..p)
        .map(|j| (0..k).map(|a| ws[a][j] * c[a]).sum())
        .collect()
}
