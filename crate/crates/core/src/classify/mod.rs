//! Two-group classification rules for high-dimensional data.
//!
//! The main rule estimates a mixing distribution per group from the feature
//! means by grid maximum likelihood and classifies with the resulting
//! posterior predictive ratio. The comparison rules all share the linear
//! form `direction^T (x - midpoint) > log((1 - pi)/pi)` with different
//! choices of direction: the raw mean difference (naive Bayes), a
//! hard-thresholded difference, a kernel/Tweedie-shrunken difference, or an
//! l1-penalized regression coefficient vector.

mod gp;
mod lasso;
mod screen;

pub use gp::{gp_tweedie, silverman_bandwidth, tweedie_default_bandwidth, GpShrinkage};
pub use lasso::{mzy_lasso, LassoFit, LassoOptions, LassoProblem};
pub use screen::{default_screen_threshold, screen_correlated, ScreenResult};

use alloc::vec::Vec;

use crate::density::MixingDistribution;
use crate::math;
use crate::matrix::Matrix;
use crate::npmle::{self, NpmleFit, ObservationSet, SolveOptions};
use crate::posterior::posterior_law;
use crate::{Error, Result};

/// Feature matrix (samples by features) with binary labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<u8>,
}

impl LabeledDataset {
    /// Requires finite features, labels in {0, 1}, and at least one sample
    /// per label.
    pub fn new(features: Matrix, labels: Vec<u8>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                got: labels.len(),
            });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1"));
        }
        if !labels.contains(&0) || !labels.contains(&1) {
            return Err(Error::InvalidArgument("need at least one sample per label"));
        }
        if features.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("features must be finite"));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// Same samples restricted to the listed feature columns.
    pub fn select_features(&self, keep: &[usize]) -> Result<Self> {
        Ok(Self {
            features: self.features.select_columns(keep)?,
            labels: self.labels.clone(),
        })
    }
}

/// Per-feature group means and their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub xbar0: Vec<f64>,
    pub xbar1: Vec<f64>,
    pub delta_hat: Vec<f64>,
    pub n0: usize,
    pub n1: usize,
}

impl GroupSummary {
    pub fn n_features(&self) -> usize {
        self.delta_hat.len()
    }

    /// Per-feature midpoint `(xbar0 + xbar1)/2`.
    pub fn midpoint(&self) -> Vec<f64> {
        self.xbar0
            .iter()
            .zip(&self.xbar1)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// Exact group means per feature.
pub fn summarize(train: &LabeledDataset) -> GroupSummary {
    let p = train.n_features();
    let mut sum0 = alloc::vec![0.0f64; p];
    let mut sum1 = alloc::vec![0.0f64; p];
    let mut n0 = 0usize;
    let mut n1 = 0usize;
    for (i, &label) in train.labels().iter().enumerate() {
        let row = train.features().row(i);
        if label == 0 {
            n0 += 1;
            for (s, v) in sum0.iter_mut().zip(row) {
                *s += v;
            }
        } else {
            n1 += 1;
            for (s, v) in sum1.iter_mut().zip(row) {
                *s += v;
            }
        }
    }
    let xbar0: Vec<f64> = sum0.iter().map(|s| s / n0 as f64).collect();
    let xbar1: Vec<f64> = sum1.iter().map(|s| s / n1 as f64).collect();
    let delta_hat = xbar1
        .iter()
        .zip(&xbar0)
        .map(|(b, a)| b - a)
        .collect();
    GroupSummary {
        xbar0,
        xbar1,
        delta_hat,
        n0,
        n1,
    }
}

/// A classification decision. `score` is the rule's decision statistic: the
/// log density ratio for the posterior-predictive rule (label 1 when
/// negative), the linear discriminant score for the others (label 1 when
/// positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub label: u8,
    pub score: f64,
}

/// `log((1 - pi)/pi)` computed as a difference of logs so that swapping the
/// groups negates it exactly.
fn log_prior_odds(pi_hat: f64) -> f64 {
    math::ln(1.0 - pi_hat) - math::ln(pi_hat)
}

fn check_pi_hat(pi_hat: f64) -> Result<()> {
    if !(pi_hat > 0.0 && pi_hat < 1.0) {
        return Err(Error::InvalidArgument("pi_hat must lie strictly inside (0, 1)"));
    }
    Ok(())
}

/// Posterior law of one feature, pruned of atoms that cannot influence the
/// predictive density at f64 precision.
#[derive(Debug, Clone)]
struct CompactLaw {
    atoms: Vec<f64>,
    log_weights: Vec<f64>,
}

/// Log weights this far below the maximum contribute below one ulp.
const LAW_PRUNE_LOG: f64 = -40.0;

impl CompactLaw {
    fn from_prior(prior: &MixingDistribution, xbar: f64, n_k: usize) -> Result<Self> {
        let law = posterior_law(prior, xbar, n_k)?;
        let max = law
            .log_weights()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut atoms = Vec::new();
        let mut log_weights = Vec::new();
        for (&a, &l) in law.atoms().iter().zip(law.log_weights()) {
            if l - max >= LAW_PRUNE_LOG {
                atoms.push(a);
                log_weights.push(l);
            }
        }
        Ok(Self { atoms, log_weights })
    }

    /// log of `sum_k v_k phi(x - mu_k)`.
    ///
    /// Two passes over a short atom list beat allocating a scratch buffer
    /// per feature per test point.
    #[inline]
    fn predictive_log_density(&self, x: f64) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for (a, l) in self.atoms.iter().zip(&self.log_weights) {
            let z = x - a;
            let t = l + math::LN_INV_SQRT_2PI - 0.5 * z * z;
            if t > m {
                m = t;
            }
        }
        let mut acc = 0.0;
        for (a, l) in self.atoms.iter().zip(&self.log_weights) {
            let z = x - a;
            let t = l + math::LN_INV_SQRT_2PI - 0.5 * z * z;
            acc += math::exp(t - m);
        }
        m + math::ln(acc)
    }
}

/// The posterior-predictive classification rule built from two per-group
/// grid-mixture fits.
#[derive(Debug, Clone)]
pub struct NpmleRule {
    summary: GroupSummary,
    fit0: NpmleFit,
    fit1: NpmleFit,
    pi_hat: f64,
    laws0: Vec<CompactLaw>,
    laws1: Vec<CompactLaw>,
}

impl NpmleRule {
    /// Fit both group priors on the per-feature group means, using noise
    /// scale `1/sqrt(n_k)` for group `k`, and cache the per-feature
    /// posterior laws. Errors if either fit fails its optimality
    /// certificate.
    pub fn fit(
        train: &LabeledDataset,
        grid_size: Option<usize>,
        pi_hat: f64,
        opts: &SolveOptions,
    ) -> Result<Self> {
        check_pi_hat(pi_hat)?;
        let summary = summarize(train);
        Self::from_summary(summary, grid_size, pi_hat, opts)
    }

    /// Fit from precomputed group means.
    pub fn from_summary(
        summary: GroupSummary,
        grid_size: Option<usize>,
        pi_hat: f64,
        opts: &SolveOptions,
    ) -> Result<Self> {
        check_pi_hat(pi_hat)?;
        let p = summary.n_features();
        let k = grid_size.unwrap_or_else(|| npmle::default_grid_size(p));
        let sd0 = 1.0 / math::sqrt(summary.n0 as f64);
        let sd1 = 1.0 / math::sqrt(summary.n1 as f64);
        let obs0 = ObservationSet::new(summary.xbar0.clone(), sd0)?;
        let obs1 = ObservationSet::new(summary.xbar1.clone(), sd1)?;
        let fit0 = npmle::solve(&obs0, k, opts)?;
        let fit1 = npmle::solve(&obs1, k, opts)?;
        if !fit0.converged || !fit1.converged {
            return Err(Error::NumericFailure("a group prior fit failed its optimality certificate"));
        }
        let mut laws0 = Vec::with_capacity(p);
        let mut laws1 = Vec::with_capacity(p);
        for j in 0..p {
            laws0.push(CompactLaw::from_prior(&fit0.mix, summary.xbar0[j], summary.n0)?);
            laws1.push(CompactLaw::from_prior(&fit1.mix, summary.xbar1[j], summary.n1)?);
        }
        Ok(Self {
            summary,
            fit0,
            fit1,
            pi_hat,
            laws0,
            laws1,
        })
    }

    /// Build a rule directly from known priors (no fitting); used for oracle
    /// comparisons and deserialized models.
    pub fn from_priors(
        summary: GroupSummary,
        prior0: MixingDistribution,
        prior1: MixingDistribution,
        pi_hat: f64,
    ) -> Result<Self> {
        check_pi_hat(pi_hat)?;
        let p = summary.n_features();
        let mut laws0 = Vec::with_capacity(p);
        let mut laws1 = Vec::with_capacity(p);
        for j in 0..p {
            laws0.push(CompactLaw::from_prior(&prior0, summary.xbar0[j], summary.n0)?);
            laws1.push(CompactLaw::from_prior(&prior1, summary.xbar1[j], summary.n1)?);
        }
        let fit0 = NpmleFit {
            mix: prior0,
            noise_sd: 1.0 / math::sqrt(summary.n0 as f64),
            final_neg_log_lik: f64::NAN,
            iterations: 0,
            kkt_max_gradient: f64::NAN,
            active_atom_gap: f64::NAN,
            converged: true,
        };
        let fit1 = NpmleFit {
            mix: prior1,
            noise_sd: 1.0 / math::sqrt(summary.n1 as f64),
            final_neg_log_lik: f64::NAN,
            iterations: 0,
            kkt_max_gradient: f64::NAN,
            active_atom_gap: f64::NAN,
            converged: true,
        };
        Ok(Self {
            summary,
            fit0,
            fit1,
            pi_hat,
            laws0,
            laws1,
        })
    }

    pub fn summary(&self) -> &GroupSummary {
        &self.summary
    }

    pub fn prior0(&self) -> &MixingDistribution {
        &self.fit0.mix
    }

    pub fn prior1(&self) -> &MixingDistribution {
        &self.fit1.mix
    }

    pub fn fit0(&self) -> &NpmleFit {
        &self.fit0
    }

    pub fn fit1(&self) -> &NpmleFit {
        &self.fit1
    }

    pub fn pi_hat(&self) -> f64 {
        self.pi_hat
    }

    /// Log ratio of the group-0 to group-1 posterior predictive densities,
    /// plus the log prior odds. Label 1 exactly when the ratio is strictly
    /// negative; ties go to 0.
    pub fn classify(&self, xnew: &[f64]) -> Result<Decision> {
        if xnew.len() != self.summary.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.summary.n_features(),
                got: xnew.len(),
            });
        }
        let mut log_ratio = log_prior_odds(self.pi_hat);
        for ((x, l0), l1) in xnew.iter().zip(&self.laws0).zip(&self.laws1) {
            log_ratio += l0.predictive_log_density(*x) - l1.predictive_log_density(*x);
        }
        Ok(Decision {
            label: u8::from(log_ratio < 0.0),
            score: log_ratio,
        })
    }

    /// Per-feature posterior mean difference, the feature-ranking statistic.
    pub fn posterior_mean_differences(&self) -> Vec<f64> {
        self.laws0
            .iter()
            .zip(&self.laws1)
            .map(|(l0, l1)| mean_of(l1) - mean_of(l0))
            .collect()
    }
}

fn mean_of(law: &CompactLaw) -> f64 {
    let mut acc = 0.0;
    for (a, l) in law.atoms.iter().zip(&law.log_weights) {
        acc += a * math::exp(*l);
    }
    acc
}

/// A linear discriminant: `direction^T (x - midpoint)` against the log prior
/// odds.
#[derive(Debug, Clone)]
pub struct LinearRule {
    pub direction: Vec<f64>,
    pub midpoint: Vec<f64>,
    pub pi_hat: f64,
}

impl LinearRule {
    pub fn new(direction: Vec<f64>, midpoint: Vec<f64>, pi_hat: f64) -> Result<Self> {
        check_pi_hat(pi_hat)?;
        if direction.len() != midpoint.len() {
            return Err(Error::DimensionMismatch {
                expected: direction.len(),
                got: midpoint.len(),
            });
        }
        Ok(Self {
            direction,
            midpoint,
            pi_hat,
        })
    }

    pub fn classify(&self, xnew: &[f64]) -> Result<Decision> {
        if xnew.len() != self.direction.len() {
            return Err(Error::DimensionMismatch {
                expected: self.direction.len(),
                got: xnew.len(),
            });
        }
        let mut score = 0.0;
        for ((d, m), x) in self.direction.iter().zip(&self.midpoint).zip(xnew) {
            score += d * (x - m);
        }
        score -= log_prior_odds(self.pi_hat);
        Ok(Decision {
            label: u8::from(score > 0.0),
            score,
        })
    }
}

/// Any of the fitted classification rules, tagged by variant.
// The posterior-predictive variant is much bigger than the linear ones, but
// models are built once and then only borrowed.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum ClassifierModel {
    Npmle(NpmleRule),
    NaiveBayes {
        rule: LinearRule,
    },
    ThresholdedNb {
        rule: LinearRule,
        lambda: f64,
    },
    GpTweedie {
        rule: LinearRule,
        bandwidth: f64,
        fallback_features: Vec<usize>,
    },
    MzyLasso {
        rule: LinearRule,
        lambda: f64,
        intercept: f64,
    },
}

impl ClassifierModel {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Npmle(_) => "npmle",
            Self::NaiveBayes { .. } => "nb",
            Self::ThresholdedNb { .. } => "thresholded_nb",
            Self::GpTweedie { .. } => "gp_tweedie",
            Self::MzyLasso { .. } => "mzy_lasso",
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Self::Npmle(r) => r.summary.n_features(),
            Self::NaiveBayes { rule }
            | Self::ThresholdedNb { rule, .. }
            | Self::GpTweedie { rule, .. }
            | Self::MzyLasso { rule, .. } => rule.direction.len(),
        }
    }

    pub fn pi_hat(&self) -> f64 {
        match self {
            Self::Npmle(r) => r.pi_hat,
            Self::NaiveBayes { rule }
            | Self::ThresholdedNb { rule, .. }
            | Self::GpTweedie { rule, .. }
            | Self::MzyLasso { rule, .. } => rule.pi_hat,
        }
    }

    pub fn classify(&self, xnew: &[f64]) -> Result<Decision> {
        match self {
            Self::Npmle(r) => r.classify(xnew),
            Self::NaiveBayes { rule }
            | Self::ThresholdedNb { rule, .. }
            | Self::GpTweedie { rule, .. }
            | Self::MzyLasso { rule, .. } => rule.classify(xnew),
        }
    }
}

/// The naive Bayes rule: identity covariance, raw mean-difference direction.
pub fn naive_bayes(summary: &GroupSummary, pi_hat: f64) -> Result<ClassifierModel> {
    let rule = LinearRule::new(summary.delta_hat.clone(), summary.midpoint(), pi_hat)?;
    Ok(ClassifierModel::NaiveBayes { rule })
}

/// Hard-thresholded mean differences: `delta_j * 1{|delta_j| >= lambda}`.
pub fn threshold_delta(summary: &GroupSummary, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument("threshold must be non-negative"));
    }
    Ok(summary
        .delta_hat
        .iter()
        .map(|&d| if math::abs(d) >= lambda { d } else { 0.0 })
        .collect())
}

/// Naive Bayes with a hard-thresholded direction.
pub fn thresholded_nb(summary: &GroupSummary, lambda: f64, pi_hat: f64) -> Result<ClassifierModel> {
    let rule = LinearRule::new(threshold_delta(summary, lambda)?, summary.midpoint(), pi_hat)?;
    Ok(ClassifierModel::ThresholdedNb { rule, lambda })
}

/// The thresholded rule tuned on labeled test data.
#[derive(Debug, Clone)]
pub struct OracleNbSelection {
    pub lambda_star: f64,
    pub test_error: f64,
    pub model: ClassifierModel,
}

/// Evaluate the thresholded rule over a grid of thresholds on the labeled
/// test set and keep the smallest threshold attaining minimum error.
///
/// With no grid supplied, the grid is `{0}` together with the distinct
/// `|delta_j|` values and infinity, which are all the points at which the
/// rule can change.
pub fn oracle_nb(
    summary: &GroupSummary,
    labeled_test: &LabeledDataset,
    lambda_grid: Option<&[f64]>,
    pi_hat: f64,
) -> Result<OracleNbSelection> {
    check_pi_hat(pi_hat)?;
    if labeled_test.n_features() != summary.n_features() {
        return Err(Error::DimensionMismatch {
            expected: summary.n_features(),
            got: labeled_test.n_features(),
        });
    }
    let default_grid;
    let grid: &[f64] = match lambda_grid {
        Some(g) => {
            if g.is_empty() {
                return Err(Error::InvalidArgument("threshold grid must be nonempty"));
            }
            if g.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidArgument("threshold grid must be sorted ascending"));
            }
            g
        }
        None => {
            let mut g: Vec<f64> = summary.delta_hat.iter().map(|&d| math::abs(d)).collect();
            g.push(0.0);
            g.push(f64::INFINITY);
            g.sort_unstable_by(f64::total_cmp);
            g.dedup();
            default_grid = g;
            &default_grid
        }
    };

    let p = summary.n_features();
    // Features ordered by descending |delta|: any threshold retains a prefix.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_unstable_by(|&a, &b| {
        math::abs(summary.delta_hat[b])
            .total_cmp(&math::abs(summary.delta_hat[a]))
            .then(a.cmp(&b))
    });
    let sorted_abs: Vec<f64> = order.iter().map(|&j| math::abs(summary.delta_hat[j])).collect();
    // Prefix length retained by each candidate threshold.
    let prefix_len: Vec<usize> = grid
        .iter()
        .map(|&lam| sorted_abs.partition_point(|&a| a >= lam))
        .collect();

    let midpoint = summary.midpoint();
    let odds = log_prior_odds(pi_hat);
    let mut mistakes = alloc::vec![0usize; grid.len()];
    let mut cumulative = alloc::vec![0.0f64; p + 1];
    for (i, &truth) in labeled_test.labels().iter().enumerate() {
        let row = labeled_test.features().row(i);
        for (t, &j) in order.iter().enumerate() {
            cumulative[t + 1] =
                cumulative[t] + summary.delta_hat[j] * (row[j] - midpoint[j]);
        }
        for (g_idx, &len) in prefix_len.iter().enumerate() {
            let score = cumulative[len] - odds;
            let label = u8::from(score > 0.0);
            if label != truth {
                mistakes[g_idx] += 1;
            }
        }
    }

    let n_test = labeled_test.n_samples();
    let mut best_idx = 0usize;
    for (g_idx, &m) in mistakes.iter().enumerate() {
        if m < mistakes[best_idx] {
            best_idx = g_idx;
        }
    }
    let lambda_star = grid[best_idx];
    let model = thresholded_nb(summary, lambda_star, pi_hat)?;
    Ok(OracleNbSelection {
        lambda_star,
        test_error: mistakes[best_idx] as f64 / n_test as f64,
        model,
    })
}

/// The kernel/Tweedie rule: naive Bayes with the shrunken difference vector.
pub fn gp_rule(
    summary: &GroupSummary,
    bandwidth: Option<f64>,
    pi_hat: f64,
) -> Result<ClassifierModel> {
    let shrinkage = gp_tweedie(summary, bandwidth)?;
    let rule = LinearRule::new(shrinkage.delta_tilde, summary.midpoint(), pi_hat)?;
    Ok(ClassifierModel::GpTweedie {
        rule,
        bandwidth: shrinkage.bandwidth,
        fallback_features: shrinkage.fallback_features,
    })
}

/// The lasso discriminant: the fitted coefficient vector replaces the
/// covariance-scaled difference in the linear rule.
pub fn mzy_rule(
    fit: &LassoFit,
    summary: &GroupSummary,
    pi_hat: f64,
) -> Result<ClassifierModel> {
    if fit.beta.len() != summary.n_features() {
        return Err(Error::DimensionMismatch {
            expected: summary.n_features(),
            got: fit.beta.len(),
        });
    }
    let rule = LinearRule::new(fit.beta.clone(), summary.midpoint(), pi_hat)?;
    Ok(ClassifierModel::MzyLasso {
        rule,
        lambda: fit.lambda,
        intercept: fit.beta0,
    })
}
