//! Seeded synthetic-data experiments.
//!
//! Two harnesses: classifier comparisons over replications of a two-group
//! design, and the Hellinger convergence check for the grid mixture
//! estimator. Every replication derives its own random stream from
//! `(master seed, scenario tag, replication index)`, so results are
//! independent of execution order and can be reproduced replication by
//! replication.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::classify::{
    gp_rule, naive_bayes, oracle_nb, summarize, GroupSummary, LabeledDataset, LassoOptions,
    LassoProblem, NpmleRule,
};
use crate::density::{hellinger_distance, MixingDistribution, MixtureDensity};
use crate::math;
use crate::matrix::Matrix;
use crate::npmle::{default_grid_size, solve, ObservationSet, SolveOptions};
use crate::rng::{stream, tag, NoiseSource};
use crate::{Error, Result};

/// Noise distribution for one coordinate vector; every family has
/// unit-variance coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    Gaussian,
    /// Scaled t with 3 degrees of freedom, `t_3 / sqrt(3)`.
    T3,
    /// Stationary first-order autoregression with the given correlation.
    Ar1(f64),
    /// Equicorrelated coordinates via a shared factor.
    Exchangeable(f64),
}

impl NoiseFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            NoiseFamily::Ar1(rho) | NoiseFamily::Exchangeable(rho)
                if !(0.0..1.0).contains(&rho) =>
            {
                Err(Error::InvalidArgument("correlation must lie in [0, 1)"))
            }
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            NoiseFamily::Gaussian => String::from("gaussian"),
            NoiseFamily::T3 => String::from("t3"),
            NoiseFamily::Ar1(rho) => format!("ar1({rho})"),
            NoiseFamily::Exchangeable(rho) => format!("exchangeable({rho})"),
        }
    }
}

/// Shape of the group-1 mean vector (group 0 is always zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mu1Pattern {
    /// First `m` coordinates equal `delta / sqrt(m)`, so the vector has
    /// Euclidean norm `delta`.
    Flat { m: usize, delta: f64 },
    /// `2/sqrt(10) * (1,1,1,1,1,1,1,-1,-1,-1,0,...)`, the fixed direction
    /// used alongside correlated noise.
    FixedVector,
}

impl Mu1Pattern {
    pub fn build(&self, n_features: usize) -> Result<Vec<f64>> {
        match *self {
            Mu1Pattern::Flat { m, delta } => gen_mu1(n_features, m, delta),
            Mu1Pattern::FixedVector => fixed_vector_mu1(n_features),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Mu1Pattern::Flat { m, delta } => format!("flat(m={m},delta={delta})"),
            Mu1Pattern::FixedVector => String::from("fixed_vector"),
        }
    }
}

/// Mean vector with the first `m` of `n` coordinates at `delta/sqrt(m)`.
pub fn gen_mu1(n: usize, m: usize, delta: f64) -> Result<Vec<f64>> {
    if m < 1 || m > n {
        return Err(Error::InvalidArgument("need 1 <= m <= N"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument("delta must be positive"));
    }
    let value = delta / math::sqrt(m as f64);
    let mut mu = alloc::vec![0.0; n];
    for v in mu.iter_mut().take(m) {
        *v = value;
    }
    Ok(mu)
}

/// The ten-coordinate fixed direction `2/sqrt(10) * (1^7, -1^3, 0, ...)`.
pub fn fixed_vector_mu1(n: usize) -> Result<Vec<f64>> {
    if n < 10 {
        return Err(Error::InvalidArgument("fixed_vector needs at least 10 features"));
    }
    let v = 2.0 / math::sqrt(10.0);
    let mut mu = alloc::vec![0.0; n];
    for (j, slot) in mu.iter_mut().enumerate().take(10) {
        *slot = if j < 7 { v } else { -v };
    }
    Ok(mu)
}

/// One noise vector from a fresh stream; see [`fill_noise`] for the
/// in-stream variant the harness uses.
pub fn gen_noise(n: usize, family: &NoiseFamily, seed: u64) -> Result<Vec<f64>> {
    family.validate()?;
    let mut src = NoiseSource::new(stream(seed, &[tag("gen_noise")]));
    let mut out = alloc::vec![0.0; n];
    fill_noise(&mut out, family, &mut src);
    Ok(out)
}

/// Fill a coordinate vector with one draw of the family.
pub fn fill_noise(out: &mut [f64], family: &NoiseFamily, src: &mut NoiseSource<ChaCha8Rng>) {
    match *family {
        NoiseFamily::Gaussian => {
            for v in out.iter_mut() {
                *v = src.next_standard_normal();
            }
        }
        NoiseFamily::T3 => {
            for v in out.iter_mut() {
                *v = src.next_scaled_t3();
            }
        }
        NoiseFamily::Ar1(rho) => {
            let scale = math::sqrt(1.0 - rho * rho);
            let mut prev = src.next_standard_normal();
            if let Some(first) = out.first_mut() {
                *first = prev;
            }
            for v in out.iter_mut().skip(1) {
                prev = rho * prev + scale * src.next_standard_normal();
                *v = prev;
            }
        }
        NoiseFamily::Exchangeable(rho) => {
            let shared = math::sqrt(rho) * src.next_standard_normal();
            let scale = math::sqrt(1.0 - rho);
            for v in out.iter_mut() {
                *v = shared + scale * src.next_standard_normal();
            }
        }
    }
}

/// Classification rules the harness can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Npmle,
    Nb,
    OracleNb,
    GpTweedie,
    /// Lasso discriminant with the penalty tuned on the labeled test set.
    MzyOracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Npmle => "npmle",
            Method::Nb => "nb",
            Method::OracleNb => "oracle_nb",
            Method::GpTweedie => "gp",
            Method::MzyOracle => "mzy",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "npmle" => Some(Method::Npmle),
            "nb" => Some(Method::Nb),
            "oracle_nb" | "oracle-nb" => Some(Method::OracleNb),
            "gp" | "gp_tweedie" => Some(Method::GpTweedie),
            "mzy" | "mzy_oracle" => Some(Method::MzyOracle),
            _ => None,
        }
    }
}

pub const ALL_METHODS: [Method; 5] = [
    Method::Npmle,
    Method::Nb,
    Method::OracleNb,
    Method::GpTweedie,
    Method::MzyOracle,
];

/// One simulation scenario.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n_features: usize,
    pub mu1: Mu1Pattern,
    pub noise: NoiseFamily,
    pub n0: usize,
    pub n1: usize,
    pub n_test0: usize,
    pub n_test1: usize,
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Grid size for the mixture fits; default `floor(sqrt(N))`.
    pub grid_size: Option<usize>,
    pub pi_hat: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.mu1.build(self.n_features)?;
        if self.n0 < 1 || self.n1 < 1 {
            return Err(Error::InvalidArgument("both training groups need samples"));
        }
        if self.n_test0 + self.n_test1 < 1 {
            return Err(Error::InvalidArgument("test set must be nonempty"));
        }
        if self.reps < 1 {
            return Err(Error::InvalidArgument("need at least one replication"));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("select at least one method"));
        }
        if !(self.pi_hat > 0.0 && self.pi_hat < 1.0) {
            return Err(Error::InvalidArgument("pi_hat must lie strictly inside (0, 1)"));
        }
        Ok(())
    }

    /// Stream tag derived from the data-generating parameters only, so the
    /// same draws back every method set and replication count.
    pub fn scenario_tag(&self) -> u64 {
        let desc = format!(
            "n={};mu1={};noise={};n0={};n1={};t0={};t1={}",
            self.n_features,
            self.mu1.describe(),
            self.noise.describe(),
            self.n0,
            self.n1,
            self.n_test0,
            self.n_test1,
        );
        tag(&desc)
    }
}

/// Per-method aggregate over replications.
#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_rate: f64,
    pub std_err: f64,
    pub reps_used: usize,
    pub failures: usize,
}

/// One scenario's aggregated results.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<MethodSummary>,
}

/// Fraction of disagreements between two label sequences.
pub fn misclassification_rate(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::InvalidArgument("need at least one label"));
    }
    let mistakes = predicted
        .iter()
        .zip(truth)
        .filter(|(p, t)| p != t)
        .count();
    Ok(mistakes as f64 / truth.len() as f64)
}

fn draw_dataset(
    n_features: usize,
    mu1: &[f64],
    noise: &NoiseFamily,
    n0: usize,
    n1: usize,
    src: &mut NoiseSource<ChaCha8Rng>,
) -> LabeledDataset {
    let total = n0 + n1;
    let mut data = alloc::vec![0.0f64; total * n_features];
    let mut labels = Vec::with_capacity(total);
    for i in 0..total {
        let row = &mut data[i * n_features..(i + 1) * n_features];
        fill_noise(row, noise, src);
        let label = u8::from(i >= n0);
        if label == 1 {
            for (v, m) in row.iter_mut().zip(mu1) {
                *v += m;
            }
        }
        labels.push(label);
    }
    let features = Matrix::from_flat(data, total, n_features)
        .expect("internal dimension bookkeeping");
    LabeledDataset::new(features, labels).expect("generated data is valid by construction")
}

/// Penalty values for the tuned lasso: geometric path from the null-model
/// penalty down three decades.
fn lasso_path(problem: &LassoProblem) -> Vec<f64> {
    let lam_max = problem.lambda_max();
    if !(lam_max > 0.0) {
        return alloc::vec![0.0];
    }
    let steps = 30usize;
    let ratio = 1e-3f64;
    (0..steps)
        .map(|t| lam_max * math::exp(math::ln(ratio) * t as f64 / (steps - 1) as f64))
        .collect()
}

/// Run one replication; returns the per-method test misclassification
/// rates, with failures carried as errors rather than imputed.
pub fn run_replication(cfg: &ExperimentConfig, rep: usize) -> Vec<(Method, Result<f64>)> {
    let mut src = NoiseSource::new(stream(
        cfg.seed,
        &[cfg.scenario_tag(), rep as u64],
    ));
    let mu1 = cfg.mu1.build(cfg.n_features).expect("validated config");
    let train = draw_dataset(cfg.n_features, &mu1, &cfg.noise, cfg.n0, cfg.n1, &mut src);
    let test = draw_dataset(
        cfg.n_features,
        &mu1,
        &cfg.noise,
        cfg.n_test0,
        cfg.n_test1,
        &mut src,
    );
    let summary = summarize(&train);

    cfg.methods
        .iter()
        .map(|&method| (method, run_method(cfg, method, &train, &summary, &test)))
        .collect()
}

fn run_method(
    cfg: &ExperimentConfig,
    method: Method,
    train: &LabeledDataset,
    summary: &GroupSummary,
    test: &LabeledDataset,
) -> Result<f64> {
    match method {
        Method::Npmle => {
            let rule = NpmleRule::from_summary(
                summary.clone(),
                cfg.grid_size,
                cfg.pi_hat,
                &SolveOptions::default(),
            )?;
            let mut predicted = Vec::with_capacity(test.n_samples());
            for i in 0..test.n_samples() {
                predicted.push(rule.classify(test.features().row(i))?.label);
            }
            misclassification_rate(&predicted, test.labels())
        }
        Method::Nb => {
            let model = naive_bayes(summary, cfg.pi_hat)?;
            let mut predicted = Vec::with_capacity(test.n_samples());
            for i in 0..test.n_samples() {
                predicted.push(model.classify(test.features().row(i))?.label);
            }
            misclassification_rate(&predicted, test.labels())
        }
        Method::OracleNb => Ok(oracle_nb(summary, test, None, cfg.pi_hat)?.test_error),
        Method::GpTweedie => {
            let model = gp_rule(summary, None, cfg.pi_hat)?;
            let mut predicted = Vec::with_capacity(test.n_samples());
            for i in 0..test.n_samples() {
                predicted.push(model.classify(test.features().row(i))?.label);
            }
            misclassification_rate(&predicted, test.labels())
        }
        Method::MzyOracle => {
            let problem = LassoProblem::new(train);
            let opts = LassoOptions::default();
            let odds = math::ln(1.0 - cfg.pi_hat) - math::ln(cfg.pi_hat);
            let midpoint = summary.midpoint();
            let mut warm: Option<Vec<f64>> = None;
            let mut best: Option<f64> = None;
            let mut any_fit = false;
            for lam in lasso_path(&problem) {
                let fit = match problem.fit(lam, &opts, warm.as_deref()) {
                    Ok(f) => f,
                    Err(_) => continue,
                };
                any_fit = true;
                let mut mistakes = 0usize;
                for (i, &truth) in test.labels().iter().enumerate() {
                    let row = test.features().row(i);
                    let mut score = 0.0;
                    for ((b, m), x) in fit.beta.iter().zip(&midpoint).zip(row) {
                        score += b * (x - m);
                    }
                    score -= odds;
                    if u8::from(score > 0.0) != truth {
                        mistakes += 1;
                    }
                }
                let rate = mistakes as f64 / test.n_samples() as f64;
                if best.is_none_or(|b| rate < b) {
                    best = Some(rate);
                }
                warm = Some(fit.beta);
            }
            if !any_fit {
                return Err(Error::NumericFailure("no lasso fit on the penalty path converged"));
            }
            Ok(best.expect("at least one fit evaluated"))
        }
    }
}

/// Aggregate per-replication outcomes in replication order.
pub fn aggregate_replications(
    cfg: &ExperimentConfig,
    outcomes: &[Vec<(Method, Result<f64>)>],
) -> ResultTable {
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for (m_idx, &method) in cfg.methods.iter().enumerate() {
        let mut rates = Vec::with_capacity(outcomes.len());
        let mut failures = 0usize;
        for rep in outcomes {
            match &rep[m_idx].1 {
                Ok(rate) => rates.push(*rate),
                Err(_) => failures += 1,
            }
        }
        let n = rates.len();
        let mean_rate = if n > 0 {
            rates.iter().sum::<f64>() / n as f64
        } else {
            f64::NAN
        };
        let std_err = if n > 1 {
            let ss: f64 = rates.iter().map(|r| (r - mean_rate) * (r - mean_rate)).sum();
            math::sqrt(ss / (n - 1) as f64) / math::sqrt(n as f64)
        } else {
            0.0
        };
        rows.push(MethodSummary {
            method,
            mean_rate,
            std_err,
            reps_used: n,
            failures,
        });
    }
    ResultTable { rows }
}

/// Run every replication sequentially and aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let outcomes: Vec<_> = (0..cfg.reps).map(|r| run_replication(cfg, r)).collect();
    Ok(aggregate_replications(cfg, &outcomes))
}

/// Configuration of the Hellinger convergence check.
#[derive(Debug, Clone)]
pub struct RateExperimentConfig {
    /// The true mixing distribution; must be compactly supported, which a
    /// finite atom list always is.
    pub prior: MixingDistribution,
    pub n_values: Vec<usize>,
    pub reps: usize,
    pub quad_points: usize,
    pub seed: u64,
}

impl RateExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidArgument("need at least one sample size"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("sample sizes must be strictly ascending"));
        }
        if self.reps < 1 {
            return Err(Error::InvalidArgument("need at least one replication"));
        }
        if self.quad_points < 1001 || self.quad_points % 2 == 0 {
            return Err(Error::InvalidArgument("quadrature points must be odd and at least 1001"));
        }
        Ok(())
    }
}

/// Hellinger distance summary at one sample size.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub n: usize,
    pub median_hellinger: f64,
    pub iqr: f64,
    pub reps_used: usize,
    /// Draws whose fit missed the optimality certificate (still included in
    /// the summary; a certified miss is a distance estimate, not a hole).
    pub non_converged: usize,
    /// Draws that failed outright and were excluded.
    pub failures: usize,
}

/// One draw: sample `n` observations from the convolved prior, fit with
/// `K = floor(sqrt(n))`, and measure the Hellinger distance between the
/// fitted and true convolution densities.
pub fn rate_replication(cfg: &RateExperimentConfig, n: usize, rep: usize) -> Result<(f64, bool)> {
    let mut src = NoiseSource::new(stream(
        cfg.seed,
        &[tag("rate_experiment"), n as u64, rep as u64],
    ));
    let atoms = cfg.prior.atoms();
    let weights = cfg.prior.weights();
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        // Inverse-CDF draw of the latent mean.
        let u = src.next_uniform();
        let mut acc = 0.0;
        let mut mu = atoms[atoms.len() - 1];
        for (a, w) in atoms.iter().zip(weights) {
            acc += w;
            if u < acc {
                mu = *a;
                break;
            }
        }
        values.push(mu + src.next_standard_normal());
    }
    let obs = ObservationSet::new(values, 1.0)?;
    let fit = solve(&obs, default_grid_size(n), &SolveOptions::default())?;
    let fitted = MixtureDensity::new(fit.mix.clone(), 1.0)?;
    let truth = MixtureDensity::new(cfg.prior.clone(), 1.0)?;
    let h = hellinger_distance(&fitted, &truth, cfg.quad_points)?;
    Ok((h, fit.converged))
}

/// Aggregate rate replications for one sample size, in replication order.
pub fn aggregate_rate(
    n: usize,
    draws: &[Result<(f64, bool)>],
) -> RateRow {
    let mut distances = Vec::with_capacity(draws.len());
    let mut non_converged = 0usize;
    let mut failures = 0usize;
    for d in draws {
        match d {
            Ok((h, converged)) => {
                distances.push(*h);
                if !converged {
                    non_converged += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let mut sorted = distances.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let (median, iqr) = if sorted.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            math::quantile(&sorted, 0.5),
            math::quantile(&sorted, 0.75) - math::quantile(&sorted, 0.25),
        )
    };
    RateRow {
        n,
        median_hellinger: median,
        iqr,
        reps_used: distances.len(),
        non_converged,
        failures,
    }
}

/// Run the full rate check sequentially.
pub fn rate_experiment(cfg: &RateExperimentConfig) -> Result<Vec<RateRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_values.len());
    for &n in &cfg.n_values {
        let draws: Vec<_> = (0..cfg.reps)
            .map(|rep| rate_replication(cfg, n, rep))
            .collect();
        rows.push(aggregate_rate(n, &draws));
    }
    Ok(rows)
}
