//! Feature standardization: divide each feature by its training-sample
//! standard deviation (sample variance denominator `n - 1`), applying the
//! training-derived scale to the test features unchanged. Zero-variance
//! features keep scale 1 and are flagged.

use npeb_core::classify::LabeledDataset;
use npeb_core::matrix::Matrix;

use crate::{AppError, AppResult};

#[derive(Debug, Clone)]
pub struct ScaleReport {
    /// Per-feature divisor applied (the training standard deviation, or 1).
    pub scales: Vec<f64>,
    pub zero_variance: Vec<usize>,
}

pub fn standardize(
    train: &LabeledDataset,
    test: &Matrix,
) -> AppResult<(LabeledDataset, Matrix, ScaleReport)> {
    let n = train.n_samples();
    let p = train.n_features();
    if n < 2 {
        return Err(AppError::data("standardization needs at least 2 training samples"));
    }
    if test.cols() != p {
        return Err(AppError::data(format!(
            "test table has {} features, training has {p}",
            test.cols()
        )));
    }

    let mut scales = vec![1.0f64; p];
    let mut zero_variance = Vec::new();
    for j in 0..p {
        let mut mean = 0.0;
        for i in 0..n {
            mean += train.features().get(i, j);
        }
        mean /= n as f64;
        let mut ss = 0.0;
        for i in 0..n {
            let c = train.features().get(i, j) - mean;
            ss += c * c;
        }
        let sd = (ss / (n - 1) as f64).sqrt();
        if sd > 0.0 {
            scales[j] = sd;
        } else {
            zero_variance.push(j);
        }
    }

    let scale_matrix = |m: &Matrix| -> Matrix {
        let mut out = m.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for (v, s) in row.iter_mut().zip(&scales) {
                *v /= s;
            }
        }
        out
    };

    let scaled_train = LabeledDataset::new(
        scale_matrix(train.features()),
        train.labels().to_vec(),
    )
    .map_err(|e| AppError::data(e.to_string()))?;
    let scaled_test = scale_matrix(test);
    Ok((
        scaled_train,
        scaled_test,
        ScaleReport {
            scales,
            zero_variance,
        },
    ))
}
