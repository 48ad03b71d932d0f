//! Correlation screening: drop one feature of every pair whose absolute
//! sample correlation exceeds the threshold, which defaults to
//! `2 sqrt(log(N)/N)` — the approximate maximum absolute correlation of
//! independent features.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::matrix::Matrix;
use crate::rng::{stream, tag, NoiseSource};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ScreenResult {
    /// Retained feature indices, ascending.
    pub retained: Vec<usize>,
    /// Features removed by a coin flip against a correlated partner.
    pub removed: Vec<usize>,
    /// Zero-variance features; their correlations are treated as 0, so they
    /// are never removed, but downstream code may want to know.
    pub zero_variance: Vec<usize>,
    pub threshold: f64,
}

/// `2 sqrt(ln(N)/N)` for `N` features.
pub fn default_screen_threshold(n_features: usize) -> f64 {
    2.0 * math::sqrt(math::ln(n_features as f64) / n_features as f64)
}

/// Scan feature pairs in index order and remove one member of each pair
/// whose absolute correlation exceeds the threshold, chosen by a seeded coin
/// flip. Deterministic for a given dataset and seed.
pub fn screen_correlated(
    features: &Matrix,
    threshold: Option<f64>,
    seed: u64,
) -> Result<ScreenResult> {
    let n = features.rows();
    let p = features.cols();
    if n < 3 {
        return Err(Error::InvalidArgument("screening needs at least 3 samples"));
    }
    let thr = threshold.unwrap_or_else(|| default_screen_threshold(p));
    if !(thr > 0.0) || !thr.is_finite() {
        return Err(Error::InvalidArgument("screening threshold must be positive"));
    }

    // Unit-normalized centered columns, so correlation is a plain dot
    // product; zero-variance columns become all-zero and correlate with
    // nothing.
    let mut cols = vec![0.0f64; p * n];
    let mut zero_variance = Vec::new();
    for j in 0..p {
        let mut mean = 0.0;
        for i in 0..n {
            mean += features.get(i, j);
        }
        mean /= n as f64;
        let mut norm_sq = 0.0;
        for i in 0..n {
            let c = features.get(i, j) - mean;
            cols[j * n + i] = c;
            norm_sq += c * c;
        }
        if norm_sq == 0.0 {
            zero_variance.push(j);
        } else {
            let inv = 1.0 / math::sqrt(norm_sq);
            for v in &mut cols[j * n..(j + 1) * n] {
                *v *= inv;
            }
        }
    }

    let mut rng = NoiseSource::new(stream(seed, &[tag("screen_correlated")]));
    let mut keep = vec![true; p];
    let mut removed = Vec::new();
    for i in 0..p {
        if !keep[i] {
            continue;
        }
        let col_i = &cols[i * n..(i + 1) * n];
        for j in i + 1..p {
            if !keep[j] {
                continue;
            }
            let col_j = &cols[j * n..(j + 1) * n];
            let mut corr = 0.0;
            for (a, b) in col_i.iter().zip(col_j) {
                corr += a * b;
            }
            if math::abs(corr) > thr {
                let drop_i = rng.next_bool();
                if drop_i {
                    keep[i] = false;
                    removed.push(i);
                    break;
                } else {
                    keep[j] = false;
                    removed.push(j);
                }
            }
        }
    }
    removed.sort_unstable();
    let retained = (0..p).filter(|&j| keep[j]).collect();
    Ok(ScreenResult {
        retained,
        removed,
        zero_variance,
        threshold: thr,
    })
}
