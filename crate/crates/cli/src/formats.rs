//! On-disk formats: observation files, delimited feature tables, model
//! files, prediction tables, and result tables.
//!
//! Model files are JSON; floating-point values are written in the shortest
//! form that parses back to the identical bits, so round trips are lossless
//! (stronger than the 17-significant-digit contract).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use npeb_core::classify::{
    ClassifierModel, GroupSummary, LabeledDataset, LinearRule, NpmleRule,
};
use npeb_core::density::MixingDistribution;
use npeb_core::matrix::Matrix;
use npeb_core::npmle::NpmleFit;
use npeb_core::sim::{MethodSummary, RateRow};

use crate::{AppError, AppResult};

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> AppResult<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// One value per line; blank lines and `#` comments are skipped.
pub fn load_observations(path: &Path) -> AppResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            AppError::data(format!(
                "{}: line {} is not a number: {line:?}",
                path.display(),
                line_no + 1
            ))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(AppError::data(format!(
            "{}: no observations found",
            path.display()
        )));
    }
    Ok(values)
}

/// Options for parsing a delimited sample-by-feature table.
#[derive(Debug, Clone)]
pub struct TableOptions {
    pub delimiter: char,
    pub has_header: bool,
    /// Label column as a header name or zero-based index; `None` means the
    /// table has no label column (features only).
    pub label_column: Option<String>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            has_header: true,
            label_column: Some(String::from("label")),
        }
    }
}

/// A parsed table: features plus labels when a label column was designated.
#[derive(Debug)]
pub struct ParsedTable {
    pub features: Matrix,
    pub labels: Option<Vec<u8>>,
    pub feature_names: Option<Vec<String>>,
}

impl ParsedTable {
    pub fn into_labeled(self, path: &Path) -> AppResult<LabeledDataset> {
        let labels = self.labels.ok_or_else(|| {
            AppError::data(format!("{}: no label column designated", path.display()))
        })?;
        LabeledDataset::new(self.features, labels)
            .map_err(|e| AppError::data(format!("{}: {e}", path.display())))
    }
}

/// Parse a delimited table, reporting the row and column of the first
/// offending cell on failure. Rows are samples, columns are features.
pub fn load_table(path: &Path, options: &TableOptions) -> AppResult<ParsedTable> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let mut header: Option<Vec<String>> = None;
    if options.has_header {
        let (_, line) = lines
            .next()
            .ok_or_else(|| AppError::data(format!("{}: empty table", path.display())))?;
        header = Some(
            line.split(options.delimiter)
                .map(|c| c.trim().to_string())
                .collect(),
        );
    }

    // Resolve the label column.
    let label_idx: Option<usize> = match &options.label_column {
        None => None,
        Some(spec) => {
            if let Some(h) = &header {
                match h.iter().position(|name| name == spec) {
                    Some(idx) => Some(idx),
                    None => match spec.parse::<usize>() {
                        Ok(idx) if idx < h.len() => Some(idx),
                        _ => {
                            return Err(AppError::data(format!(
                                "{}: label column {spec:?} not found in header",
                                path.display()
                            )))
                        }
                    },
                }
            } else {
                Some(spec.parse::<usize>().map_err(|_| {
                    AppError::data(format!(
                        "{}: without a header the label column must be a zero-based index, got {spec:?}",
                        path.display()
                    ))
                })?)
            }
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    let mut width: Option<usize> = header.as_ref().map(|h| h.len());
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(options.delimiter).map(|c| c.trim()).collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(AppError::data(format!(
                    "{}: row {line_no} has {} cells, expected {w}",
                    path.display(),
                    cells.len()
                )))
            }
            _ => {}
        }
        if let Some(li) = label_idx {
            if li >= cells.len() {
                return Err(AppError::data(format!(
                    "{}: row {line_no} has no column {li}",
                    path.display()
                )));
            }
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col, cell) in cells.iter().enumerate() {
            if Some(col) == label_idx {
                let label: u8 = match *cell {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(AppError::data(format!(
                            "{}: row {line_no} column {}: label must be 0 or 1, got {other:?}",
                            path.display(),
                            col + 1
                        )))
                    }
                };
                labels.push(label);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    AppError::data(format!(
                        "{}: row {line_no} column {}: not a number: {cell:?}",
                        path.display(),
                        col + 1
                    ))
                })?;
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(AppError::data(format!("{}: no data rows", path.display())));
    }
    let features = Matrix::from_rows(&rows)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, name)| name)
            .collect()
    });
    Ok(ParsedTable {
        features,
        labels: if label_idx.is_some() { Some(labels) } else { None },
        feature_names,
    })
}

/// Serialized mixture fit.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitFile {
    pub kind: String,
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub noise_sd: f64,
    pub neg_log_lik: f64,
    pub kkt_max_gradient: f64,
    pub active_atom_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitFile {
    pub fn from_fit(fit: &NpmleFit) -> Self {
        Self {
            kind: String::from("npmle_fit"),
            atoms: fit.mix.atoms().to_vec(),
            weights: fit.mix.weights().to_vec(),
            noise_sd: fit.noise_sd,
            neg_log_lik: fit.final_neg_log_lik,
            kkt_max_gradient: fit.kkt_max_gradient,
            active_atom_gap: fit.active_atom_gap,
            iterations: fit.iterations,
            converged: fit.converged,
        }
    }

    pub fn mixing(&self) -> AppResult<MixingDistribution> {
        MixingDistribution::new(self.atoms.clone(), self.weights.clone())
            .map_err(|e| AppError::data(format!("invalid mixture in model file: {e}")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PriorPayload {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub noise_sd: f64,
}

/// Serialized classifier: the fit file schema extended with a variant tag
/// and its payload.
#[derive(Debug, Serialize, Deserialize)]
pub struct ClassifierFile {
    pub kind: String,
    pub variant: String,
    pub pi_hat: f64,
    pub n0: usize,
    pub n1: usize,
    pub xbar0: Vec<f64>,
    pub xbar1: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior0: Option<PriorPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior1: Option<PriorPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
}

impl ClassifierFile {
    pub fn from_model(model: &ClassifierModel, summary: &GroupSummary) -> Self {
        let mut file = Self {
            kind: String::from("classifier"),
            variant: model.variant_name().to_string(),
            pi_hat: model.pi_hat(),
            n0: summary.n0,
            n1: summary.n1,
            xbar0: summary.xbar0.clone(),
            xbar1: summary.xbar1.clone(),
            prior0: None,
            prior1: None,
            direction: None,
            lambda: None,
            bandwidth: None,
            intercept: None,
        };
        match model {
            ClassifierModel::Npmle(rule) => {
                file.prior0 = Some(PriorPayload {
                    atoms: rule.prior0().atoms().to_vec(),
                    weights: rule.prior0().weights().to_vec(),
                    noise_sd: rule.fit0().noise_sd,
                });
                file.prior1 = Some(PriorPayload {
                    atoms: rule.prior1().atoms().to_vec(),
                    weights: rule.prior1().weights().to_vec(),
                    noise_sd: rule.fit1().noise_sd,
                });
            }
            ClassifierModel::NaiveBayes { rule } => {
                file.direction = Some(rule.direction.clone());
            }
            ClassifierModel::ThresholdedNb { rule, lambda } => {
                file.direction = Some(rule.direction.clone());
                file.lambda = Some(*lambda);
            }
            ClassifierModel::GpTweedie { rule, bandwidth, .. } => {
                file.direction = Some(rule.direction.clone());
                file.bandwidth = Some(*bandwidth);
            }
            ClassifierModel::MzyLasso {
                rule,
                lambda,
                intercept,
            } => {
                file.direction = Some(rule.direction.clone());
                file.lambda = Some(*lambda);
                file.intercept = Some(*intercept);
            }
        }
        file
    }

    pub fn into_model(self) -> AppResult<ClassifierModel> {
        let summary = GroupSummary {
            delta_hat: self
                .xbar1
                .iter()
                .zip(&self.xbar0)
                .map(|(b, a)| b - a)
                .collect(),
            xbar0: self.xbar0,
            xbar1: self.xbar1,
            n0: self.n0,
            n1: self.n1,
        };
        let bad = |m: &str| AppError::data(format!("classifier file: {m}"));
        match self.variant.as_str() {
            "npmle" => {
                let p0 = self.prior0.ok_or_else(|| bad("missing prior0"))?;
                let p1 = self.prior1.ok_or_else(|| bad("missing prior1"))?;
                let prior0 = MixingDistribution::new(p0.atoms, p0.weights)
                    .map_err(|e| bad(&e.to_string()))?;
                let prior1 = MixingDistribution::new(p1.atoms, p1.weights)
                    .map_err(|e| bad(&e.to_string()))?;
                let rule = NpmleRule::from_priors(summary, prior0, prior1, self.pi_hat)
                    .map_err(|e| bad(&e.to_string()))?;
                Ok(ClassifierModel::Npmle(rule))
            }
            variant => {
                let direction = self.direction.ok_or_else(|| bad("missing direction"))?;
                let rule = LinearRule::new(direction, summary.midpoint(), self.pi_hat)
                    .map_err(|e| bad(&e.to_string()))?;
                match variant {
                    "nb" => Ok(ClassifierModel::NaiveBayes { rule }),
                    "thresholded_nb" => Ok(ClassifierModel::ThresholdedNb {
                        rule,
                        lambda: self.lambda.ok_or_else(|| bad("missing lambda"))?,
                    }),
                    "gp_tweedie" => Ok(ClassifierModel::GpTweedie {
                        rule,
                        bandwidth: self.bandwidth.unwrap_or(0.0),
                        fallback_features: Vec::new(),
                    }),
                    "mzy_lasso" => Ok(ClassifierModel::MzyLasso {
                        rule,
                        lambda: self.lambda.unwrap_or(0.0),
                        intercept: self.intercept.unwrap_or(0.0),
                    }),
                    other => Err(bad(&format!("unknown variant {other:?}"))),
                }
            }
        }
    }
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> AppResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::data(format!("serialization failed: {e}")))?;
    write_atomic(path, &(text + "\n"))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))
}

/// Predictions: `id,label,score`, one row per test sample.
pub fn prediction_csv(labels: &[u8], scores: &[f64]) -> String {
    let mut out = String::from("id,label,score\n");
    for (i, (l, s)) in labels.iter().zip(scores).enumerate() {
        out.push_str(&format!("{i},{l},{s}\n"));
    }
    out
}

/// Scenario identification columns shared by the result-table writers.
#[derive(Debug, Clone)]
pub struct ScenarioLabel {
    pub n_features: usize,
    pub mu1: String,
    pub m: usize,
    pub delta: f64,
    pub noise: String,
}

pub fn result_table_csv(rows: &[(ScenarioLabel, Vec<MethodSummary>)]) -> String {
    let mut out =
        String::from("n_features,mu1,m,delta,noise,method,mean_rate,std_err,reps,failures\n");
    for (label, summaries) in rows {
        for s in summaries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6},{:.6},{},{}\n",
                label.n_features,
                label.mu1,
                label.m,
                label.delta,
                label.noise,
                s.method.name(),
                s.mean_rate,
                s.std_err,
                s.reps_used,
                s.failures
            ));
        }
    }
    out
}

pub fn rate_table_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("n,median_hellinger,iqr,reps,non_converged,failures\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.8},{:.8},{},{},{}\n",
            r.n, r.median_hellinger, r.iqr, r.reps_used, r.non_converged, r.failures
        ));
    }
    out
}
