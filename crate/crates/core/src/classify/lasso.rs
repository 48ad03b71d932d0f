//! l1-penalized least squares of the binary labels on the features, by
//! cyclic coordinate descent with soft-thresholding updates.
//!
//! The objective is `n^-1 sum_i (y_i - b0 - x_i^T b)^2 + lambda sum_j |b_j|`.
//! Features and labels are centered internally, which solves out the
//! intercept; under the `n^-1` scaling the coordinate update soft-thresholds
//! at `lambda/2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::classify::LabeledDataset;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LassoOptions {
    /// Full coordinate cycles.
    pub max_iters: usize,
    /// Convergence threshold on the largest coordinate change in a cycle.
    pub tol: f64,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub beta0: f64,
    pub lambda: f64,
    /// Coordinate cycles used.
    pub cycles: usize,
}

/// Centered design shared across a regularization path, supporting warm
/// starts.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    /// Centered columns, column-major.
    cols: Vec<f64>,
    y_centered: Vec<f64>,
    /// `(1/n) sum_i x_cij^2` per column; zero for constant features.
    col_sq: Vec<f64>,
    col_means: Vec<f64>,
    y_mean: f64,
    n: usize,
    p: usize,
}

impl LassoProblem {
    pub fn new(train: &LabeledDataset) -> Self {
        let n = train.n_samples();
        let p = train.n_features();
        let mut col_means = vec![0.0f64; p];
        for i in 0..n {
            for (m, v) in col_means.iter_mut().zip(train.features().row(i)) {
                *m += v;
            }
        }
        for m in &mut col_means {
            *m /= n as f64;
        }
        let mut cols = vec![0.0f64; n * p];
        let mut col_sq = vec![0.0f64; p];
        for i in 0..n {
            let row = train.features().row(i);
            for j in 0..p {
                let c = row[j] - col_means[j];
                cols[j * n + i] = c;
                col_sq[j] += c * c;
            }
        }
        for s in &mut col_sq {
            *s /= n as f64;
        }
        let y_mean =
            train.labels().iter().map(|&l| l as f64).sum::<f64>() / n as f64;
        let y_centered = train
            .labels()
            .iter()
            .map(|&l| l as f64 - y_mean)
            .collect();
        Self {
            cols,
            y_centered,
            col_sq,
            col_means,
            y_mean,
            n,
            p,
        }
    }

    /// Smallest penalty at which the all-zero solution is optimal:
    /// `2 max_j |n^-1 sum_i x_cij y_ci|`.
    pub fn lambda_max(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.p {
            let col = &self.cols[j * self.n..(j + 1) * self.n];
            let mut dot = 0.0;
            for (x, y) in col.iter().zip(&self.y_centered) {
                dot += x * y;
            }
            best = best.max(math::abs(dot) / self.n as f64);
        }
        2.0 * best
    }

    /// Solve at one penalty, optionally warm-starting from a previous
    /// coefficient vector.
    pub fn fit(
        &self,
        lambda: f64,
        opts: &LassoOptions,
        warm_start: Option<&[f64]>,
    ) -> Result<LassoFit> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lasso penalty must be finite and non-negative"));
        }
        let n = self.n;
        let inv_n = 1.0 / n as f64;
        let threshold = lambda / 2.0;
        let mut beta = match warm_start {
            Some(b) if b.len() == self.p => b.to_vec(),
            Some(_) => {
                return Err(Error::InvalidArgument("warm start has the wrong length"))
            }
            None => vec![0.0; self.p],
        };
        // Residual r = y_c - X_c beta.
        let mut residual = self.y_centered.clone();
        for j in 0..self.p {
            if beta[j] != 0.0 {
                let col = &self.cols[j * n..(j + 1) * n];
                for (r, x) in residual.iter_mut().zip(col) {
                    *r -= x * beta[j];
                }
            }
        }

        let mut cycles = 0;
        let mut converged = false;
        while cycles < opts.max_iters {
            cycles += 1;
            let mut max_change = 0.0f64;
            for j in 0..self.p {
                let sq = self.col_sq[j];
                if sq == 0.0 {
                    continue;
                }
                let col = &self.cols[j * n..(j + 1) * n];
                let mut dot = 0.0;
                for (x, r) in col.iter().zip(&residual) {
                    dot += x * r;
                }
                let z = dot * inv_n + sq * beta[j];
                let new = soft_threshold(z, threshold) / sq;
                let change = new - beta[j];
                if change != 0.0 {
                    for (r, x) in residual.iter_mut().zip(col) {
                        *r -= x * change;
                    }
                    beta[j] = new;
                    max_change = max_change.max(math::abs(change));
                }
            }
            if max_change < opts.tol {
                converged = true;
                break;
            }
        }

        let beta0 = self.y_mean
            - self
                .col_means
                .iter()
                .zip(&beta)
                .map(|(m, b)| m * b)
                .sum::<f64>();
        if !converged {
            return Err(Error::LassoNonConvergence {
                max_iters: opts.max_iters,
                beta,
                beta0,
            });
        }
        Ok(LassoFit {
            beta,
            beta0,
            lambda,
            cycles,
        })
    }

    /// Penalized objective value, used by the descent-invariant tests.
    pub fn objective(&self, beta: &[f64], lambda: f64) -> f64 {
        let n = self.n;
        let mut residual = self.y_centered.clone();
        for j in 0..self.p {
            if beta[j] != 0.0 {
                let col = &self.cols[j * n..(j + 1) * n];
                for (r, x) in residual.iter_mut().zip(col) {
                    *r -= x * beta[j];
                }
            }
        }
        let rss: f64 = residual.iter().map(|r| r * r).sum();
        rss / n as f64 + lambda * beta.iter().map(|b| math::abs(*b)).sum::<f64>()
    }
}

#[inline]
fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// One-shot fit from zero coefficients.
pub fn mzy_lasso(train: &LabeledDataset, lambda: f64, opts: &LassoOptions) -> Result<LassoFit> {
    LassoProblem::new(train).fit(lambda, opts, None)
}
