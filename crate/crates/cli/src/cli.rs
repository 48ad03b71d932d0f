//! Command definitions and dispatch for the `npeb` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use npeb_core::classify::{
    gp_rule, mzy_lasso, naive_bayes, oracle_nb, screen_correlated, summarize, ClassifierModel,
    GroupSummary, LabeledDataset, LassoOptions, LassoProblem, NpmleRule,
};
use npeb_core::matrix::Matrix;
use npeb_core::npmle::{default_grid_size, solve, ObservationSet, SolveOptions};
use npeb_core::posterior::posterior_law_with_sd;
use npeb_core::sim::{misclassification_rate, Method};

use crate::config::{load_experiment_configs, load_rate_config};
use crate::formats::{
    load_json, load_observations, load_table, prediction_csv, rate_table_csv, result_table_csv,
    save_json, write_atomic, ClassifierFile, FitFile, ScenarioLabel, TableOptions,
};
use crate::manifest::ManifestBuilder;
use crate::runner::{rate_experiment_parallel, run_experiment_parallel};
use crate::standardize::standardize;
use crate::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Delimited tables.
    Csv,
    /// JSON, with floats written losslessly.
    StructuredText,
}

#[derive(Debug, Parser)]
#[command(
    name = "npeb",
    version,
    about = "Nonparametric empirical-Bayes mixture estimation and classification"
)]
pub struct CliArgs {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed for anything randomized; overrides a config-file seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Grid size override; the default is floor(sqrt(sample size)).
    #[arg(long, global = true)]
    pub k: Option<usize>,

    /// Class-prior estimate used by the classifiers.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub pi_hat: f64,

    /// Output path (or stem, for commands with several outputs).
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Format for table outputs.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the grid mixture to a one-column observation file.
    Fit(FitArgs),
    /// Posterior means for observations under a fitted (or freshly fit) prior.
    Denoise(DenoiseArgs),
    /// Train classifiers on a labeled table and predict a test table.
    Classify(ClassifyArgs),
    /// Run simulation scenarios from a config file.
    Simulate(SimulateArgs),
    /// Run the Hellinger convergence-rate check from a config file.
    RateCheck(RateCheckArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Observation file: one value per line, `#` comments allowed.
    #[arg(long)]
    pub input: PathBuf,
    /// Gaussian noise scale of each observation.
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fitted model file; without it the prior is fit to the input first.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Noise scale of each observation; defaults to the model's stored
    /// scale, or 1 when fitting fresh.
    #[arg(long)]
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Training table (samples by features).
    #[arg(long)]
    pub train: PathBuf,
    /// Test table.
    #[arg(long)]
    pub test: PathBuf,
    /// Cell delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Tables have no header row (label column must then be an index).
    #[arg(long)]
    pub no_header: bool,
    /// Label column name or zero-based index in the training table.
    #[arg(long, default_value = "label")]
    pub label_column: String,
    /// Labels for the training table in a separate one-per-line file
    /// (the table is then all features).
    #[arg(long)]
    pub labels_file: Option<PathBuf>,
    /// The test table carries the same label column as the training table.
    #[arg(long)]
    pub test_has_labels: bool,
    /// Labels for the test table in a separate one-per-line file.
    #[arg(long)]
    pub test_labels_file: Option<PathBuf>,
    /// Tables are feature-major (rows are features) and must be transposed.
    #[arg(long)]
    pub transpose: bool,
    /// Comma-separated rules: npmle, nb, oracle_nb, gp, mzy.
    #[arg(long, default_value = "npmle")]
    pub methods: String,
    /// Drop one feature of each highly correlated pair before fitting.
    #[arg(long)]
    pub screen: bool,
    /// Override the screening threshold (default 2 sqrt(ln(N)/N)).
    #[arg(long)]
    pub screen_threshold: Option<f64>,
    /// Scale each feature by its training standard deviation.
    #[arg(long)]
    pub standardize: bool,
    /// Penalty for the mzy rule when the test set is unlabeled.
    #[arg(long)]
    pub mzy_lambda: Option<f64>,
    /// Also write each fitted model beside the predictions.
    #[arg(long)]
    pub save_model: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario config file; see the package documentation for the schema.
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads for the replications.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Also render a grouped-bar chart of the result table.
    #[arg(long)]
    pub chart: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateCheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

pub fn run(cli: CliArgs) -> AppResult<()> {
    match &cli.command {
        Command::Fit(args) => run_fit(&cli, args),
        Command::Denoise(args) => run_denoise(&cli, args),
        Command::Classify(args) => run_classify(&cli, args),
        Command::Simulate(args) => run_simulate(&cli, args),
        Command::RateCheck(args) => run_rate_check(&cli, args),
    }
}

fn solve_options() -> SolveOptions {
    SolveOptions::default()
}

fn run_fit(cli: &CliArgs, args: &FitArgs) -> AppResult<()> {
    if !(args.noise_sd > 0.0) {
        return Err(AppError::usage("--noise-sd must be positive"));
    }
    let values = load_observations(&args.input)?;
    let k = cli.k.unwrap_or_else(|| default_grid_size(values.len()));
    let obs = ObservationSet::new(values, args.noise_sd)?;
    let fit = solve(&obs, k, &solve_options())?;
    let output = cli
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("npmle_fit.json"));
    save_json(&output, &FitFile::from_fit(&fit))?;
    let mut manifest = ManifestBuilder::new("fit", cli.seed.unwrap_or(0));
    manifest
        .digest(format!("input={};noise_sd={};k={k}", args.input.display(), args.noise_sd).as_bytes())
        .add_output(&output);
    manifest.write(&output)?;
    println!(
        "fit: {} observations, {} atoms, converged={}, kkt_max_gradient={:.6}",
        obs.len(),
        fit.mix.len(),
        fit.converged,
        fit.kkt_max_gradient
    );
    println!("wrote {}", output.display());
    Ok(())
}

fn run_denoise(cli: &CliArgs, args: &DenoiseArgs) -> AppResult<()> {
    if let Some(sd) = args.noise_sd {
        if !(sd > 0.0) {
            return Err(AppError::usage("--noise-sd must be positive"));
        }
    }
    let values = load_observations(&args.input)?;
    let (prior, noise_sd) = match &args.model {
        Some(path) => {
            let file: FitFile = load_json(path)?;
            let sd = args.noise_sd.unwrap_or(file.noise_sd);
            if !(sd > 0.0) {
                return Err(AppError::data("model file carries a non-positive noise_sd"));
            }
            (file.mixing()?, sd)
        }
        None => {
            let sd = args.noise_sd.unwrap_or(1.0);
            let k = cli.k.unwrap_or_else(|| default_grid_size(values.len()));
            let obs = ObservationSet::new(values.clone(), sd)?;
            (solve(&obs, k, &solve_options())?.mix, sd)
        }
    };
    let mut out = String::from("id,x,posterior_mean\n");
    for (i, &x) in values.iter().enumerate() {
        let law = posterior_law_with_sd(&prior, x, noise_sd)?;
        out.push_str(&format!("{i},{x},{}\n", law.mean()));
    }
    let output = cli
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("denoised.csv"));
    write_atomic(&output, &out)?;
    let mut manifest = ManifestBuilder::new("denoise", cli.seed.unwrap_or(0));
    manifest
        .digest(format!("input={};noise_sd={noise_sd}", args.input.display()).as_bytes())
        .add_output(&output);
    manifest.write(&output)?;
    println!("denoised {} observations -> {}", values.len(), output.display());
    Ok(())
}

fn load_labels_file(path: &Path) -> AppResult<Vec<u8>> {
    let values = load_observations(path)?;
    values
        .iter()
        .map(|&v| {
            if v == 0.0 {
                Ok(0u8)
            } else if v == 1.0 {
                Ok(1u8)
            } else {
                Err(AppError::data(format!(
                    "{}: labels must be 0 or 1, got {v}",
                    path.display()
                )))
            }
        })
        .collect()
}

fn transpose(m: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(m.cols(), m.rows());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(j, i, m.get(i, j));
        }
    }
    out
}

fn run_classify(cli: &CliArgs, args: &ClassifyArgs) -> AppResult<()> {
    let methods: Vec<Method> = args
        .methods
        .split(',')
        .map(|item| {
            let item = item.trim();
            Method::parse(item)
                .ok_or_else(|| AppError::usage(format!("unknown method {item:?}")))
        })
        .collect::<AppResult<_>>()?;

    // Training table.
    let train_table_opts = TableOptions {
        delimiter: args.delimiter,
        has_header: !args.no_header,
        label_column: if args.labels_file.is_some() {
            None
        } else {
            Some(args.label_column.clone())
        },
    };
    let parsed_train = load_table(&args.train, &train_table_opts)?;
    let mut train_features = parsed_train.features;
    if args.transpose {
        train_features = transpose(&train_features);
    }
    let train_labels = match &args.labels_file {
        Some(path) => load_labels_file(path)?,
        None => parsed_train.labels.ok_or_else(|| {
            AppError::data(format!("{}: no labels found", args.train.display()))
        })?,
    };
    let mut train = LabeledDataset::new(train_features, train_labels)
        .map_err(|e| AppError::data(format!("{}: {e}", args.train.display())))?;

    // Test table.
    let test_table_opts = TableOptions {
        delimiter: args.delimiter,
        has_header: !args.no_header,
        label_column: if args.test_has_labels && args.test_labels_file.is_none() {
            Some(args.label_column.clone())
        } else {
            None
        },
    };
    let parsed_test = load_table(&args.test, &test_table_opts)?;
    let mut test_features = parsed_test.features;
    if args.transpose {
        test_features = transpose(&test_features);
    }
    let test_labels: Option<Vec<u8>> = match &args.test_labels_file {
        Some(path) => Some(load_labels_file(path)?),
        None => parsed_test.labels,
    };
    if let Some(labels) = &test_labels {
        if labels.len() != test_features.rows() {
            return Err(AppError::data(format!(
                "test labels count {} does not match {} test samples",
                labels.len(),
                test_features.rows()
            )));
        }
    }
    if test_features.cols() != train.n_features() {
        return Err(AppError::data(format!(
            "dimension mismatch: training has {} features, test has {}",
            train.n_features(),
            test_features.cols()
        )));
    }

    let output = cli
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("predictions"));
    let seed = cli.seed.unwrap_or(0);
    let mut manifest = ManifestBuilder::new("classify", seed);
    manifest.digest(
        format!(
            "train={};test={};methods={};screen={};standardize={};seed={};pi={}",
            args.train.display(),
            args.test.display(),
            args.methods,
            args.screen,
            args.standardize,
            seed,
            cli.pi_hat,
        )
        .as_bytes(),
    );

    // Optional correlation screening, decided on training features only.
    if args.screen {
        let result = screen_correlated(train.features(), args.screen_threshold, seed)?;
        println!(
            "screening: retained {} of {} features (threshold {:.6}, {} zero-variance)",
            result.retained.len(),
            train.n_features(),
            result.threshold,
            result.zero_variance.len()
        );
        train = train.select_features(&result.retained)?;
        test_features = test_features.select_columns(&result.retained)?;
    }

    // Optional standardization by training scales.
    if args.standardize {
        let (scaled_train, scaled_test, report) = standardize(&train, &test_features)?;
        if !report.zero_variance.is_empty() {
            println!(
                "standardize: {} zero-variance features left unscaled",
                report.zero_variance.len()
            );
        }
        train = scaled_train;
        test_features = scaled_test;
    }

    let summary = summarize(&train);
    let mut outputs = Vec::new();
    for method in methods {
        let model = fit_method(cli, args, method, &train, &summary, &test_features, &test_labels)?;
        let mut labels = Vec::with_capacity(test_features.rows());
        let mut scores = Vec::with_capacity(test_features.rows());
        for i in 0..test_features.rows() {
            let d = model.classify(test_features.row(i))?;
            labels.push(d.label);
            scores.push(d.score);
        }
        let path = output.with_file_name(format!(
            "{}_{}.csv",
            output
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| String::from("predictions")),
            method.name()
        ));
        write_atomic(&path, &prediction_csv(&labels, &scores))?;
        outputs.push(path.clone());
        if let Some(truth) = &test_labels {
            let rate = misclassification_rate(&labels, truth)?;
            let mistakes = labels.iter().zip(truth).filter(|(a, b)| a != b).count();
            println!(
                "method {}: {mistakes}/{} misclassified (rate {rate:.4}) -> {}",
                method.name(),
                truth.len(),
                path.display()
            );
        } else {
            println!("method {}: predictions -> {}", method.name(), path.display());
        }
        if args.save_model {
            let model_path = path.with_extension("model.json");
            save_json(&model_path, &ClassifierFile::from_model(&model, &summary))?;
            outputs.push(model_path);
        }
    }
    for path in &outputs {
        manifest.add_output(path);
    }
    manifest.write(outputs.first().unwrap_or(&output))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit_method(
    cli: &CliArgs,
    args: &ClassifyArgs,
    method: Method,
    train: &LabeledDataset,
    summary: &GroupSummary,
    test_features: &Matrix,
    test_labels: &Option<Vec<u8>>,
) -> AppResult<ClassifierModel> {
    let pi = cli.pi_hat;
    match method {
        Method::Npmle => {
            let rule = NpmleRule::from_summary(summary.clone(), cli.k, pi, &solve_options())?;
            Ok(ClassifierModel::Npmle(rule))
        }
        Method::Nb => Ok(naive_bayes(summary, pi)?),
        Method::OracleNb => {
            let truth = test_labels.as_ref().ok_or_else(|| {
                AppError::usage("oracle_nb requires test labels (--test-has-labels or --test-labels-file)")
            })?;
            let labeled = LabeledDataset::new(test_features.clone(), truth.clone())
                .map_err(|e| AppError::data(e.to_string()))?;
            let sel = oracle_nb(summary, &labeled, None, pi)?;
            println!(
                "oracle_nb: lambda = {:.6}, test error {:.4}",
                sel.lambda_star, sel.test_error
            );
            Ok(sel.model)
        }
        Method::GpTweedie => Ok(gp_rule(summary, None, pi)?),
        Method::MzyOracle => {
            if let Some(lambda) = args.mzy_lambda {
                let fit = mzy_lasso(train, lambda, &LassoOptions::default())?;
                Ok(npeb_core::classify::mzy_rule(&fit, summary, pi)?)
            } else {
                let truth = test_labels.as_ref().ok_or_else(|| {
                    AppError::usage(
                        "mzy requires either --mzy-lambda or test labels to tune the penalty",
                    )
                })?;
                let problem = LassoProblem::new(train);
                let lam_max = problem.lambda_max();
                let mut best: Option<(f64, f64, npeb_core::classify::LassoFit)> = None;
                let mut warm: Option<Vec<f64>> = None;
                for t in 0..30 {
                    let lambda = lam_max * (1e-3f64).powf(t as f64 / 29.0);
                    let fit = match problem.fit(lambda, &LassoOptions::default(), warm.as_deref()) {
                        Ok(f) => f,
                        Err(_) => continue,
                    };
                    warm = Some(fit.beta.clone());
                    let model = npeb_core::classify::mzy_rule(&fit, summary, pi)?;
                    let mut mistakes = 0usize;
                    for (i, &label) in truth.iter().enumerate() {
                        if model.classify(test_features.row(i))?.label != label {
                            mistakes += 1;
                        }
                    }
                    let rate = mistakes as f64 / truth.len() as f64;
                    if best.as_ref().is_none_or(|(r, _, _)| rate < *r) {
                        best = Some((rate, lambda, fit));
                    }
                }
                let (rate, lambda, fit) =
                    best.ok_or_else(|| AppError::Numeric("no lasso fit converged".into()))?;
                println!("mzy: lambda = {lambda:.6}, test error {rate:.4}");
                Ok(npeb_core::classify::mzy_rule(&fit, summary, pi)?)
            }
        }
    }
}

fn run_simulate(cli: &CliArgs, args: &SimulateArgs) -> AppResult<()> {
    if args.threads < 1 {
        return Err(AppError::usage("--threads must be at least 1"));
    }
    let configs = load_experiment_configs(
        &args.config,
        cli.seed,
        cli.k,
        None,
    )?;
    let mut rows = Vec::new();
    for cfg in &configs {
        let table = run_experiment_parallel(cfg, args.threads)?;
        let (m, delta) = match cfg.mu1 {
            npeb_core::sim::Mu1Pattern::Flat { m, delta } => (m, delta),
            npeb_core::sim::Mu1Pattern::FixedVector => (10, 2.0),
        };
        let label = ScenarioLabel {
            n_features: cfg.n_features,
            mu1: match cfg.mu1 {
                npeb_core::sim::Mu1Pattern::Flat { .. } => String::from("flat"),
                npeb_core::sim::Mu1Pattern::FixedVector => String::from("fixed_vector"),
            },
            m,
            delta,
            noise: cfg.noise.describe(),
        };
        for summary in &table.rows {
            println!(
                "{} m={} delta={} {}: {} mean_rate={:.4} se={:.4} ({} reps, {} failures)",
                label.noise,
                label.m,
                label.delta,
                label.n_features,
                summary.method.name(),
                summary.mean_rate,
                summary.std_err,
                summary.reps_used,
                summary.failures
            );
        }
        rows.push((label, table.rows));
    }

    let output = cli.output.clone().unwrap_or_else(|| {
        PathBuf::from(match cli.format {
            OutputFormat::Csv => "results.csv",
            OutputFormat::StructuredText => "results.json",
        })
    });
    match cli.format {
        OutputFormat::Csv => write_atomic(&output, &result_table_csv(&rows))?,
        OutputFormat::StructuredText => {
            #[derive(serde::Serialize)]
            struct JsonRow<'a> {
                n_features: usize,
                mu1: &'a str,
                m: usize,
                delta: f64,
                noise: &'a str,
                method: &'a str,
                mean_rate: f64,
                std_err: f64,
                reps: usize,
                failures: usize,
            }
            let mut json_rows = Vec::new();
            for (label, summaries) in &rows {
                for s in summaries {
                    json_rows.push(JsonRow {
                        n_features: label.n_features,
                        mu1: &label.mu1,
                        m: label.m,
                        delta: label.delta,
                        noise: &label.noise,
                        method: s.method.name(),
                        mean_rate: s.mean_rate,
                        std_err: s.std_err,
                        reps: s.reps_used,
                        failures: s.failures,
                    });
                }
            }
            save_json(&output, &json_rows)?;
        }
    }
    let mut manifest = ManifestBuilder::new("simulate", configs.first().map(|c| c.seed).unwrap_or(0));
    manifest.digest(&std::fs::read(&args.config)?);
    manifest.add_output(&output);
    if let Some(chart_path) = &args.chart {
        write_atomic(chart_path, &crate::chart::result_chart_svg(&rows))?;
        manifest.add_output(chart_path);
    }
    manifest.write(&output)?;
    println!("wrote {}", output.display());
    Ok(())
}

fn run_rate_check(cli: &CliArgs, args: &RateCheckArgs) -> AppResult<()> {
    if args.threads < 1 {
        return Err(AppError::usage("--threads must be at least 1"));
    }
    let cfg = load_rate_config(&args.config, cli.seed)?;
    let rows = rate_experiment_parallel(&cfg, args.threads)?;
    for r in &rows {
        println!(
            "n={}: median Hellinger {:.6}, iqr {:.6} ({} reps, {} uncertified, {} failures)",
            r.n, r.median_hellinger, r.iqr, r.reps_used, r.non_converged, r.failures
        );
    }
    let output = cli.output.clone().unwrap_or_else(|| {
        PathBuf::from(match cli.format {
            OutputFormat::Csv => "rate_check.csv",
            OutputFormat::StructuredText => "rate_check.json",
        })
    });
    match cli.format {
        OutputFormat::Csv => write_atomic(&output, &rate_table_csv(&rows))?,
        OutputFormat::StructuredText => {
            #[derive(serde::Serialize)]
            struct JsonRow {
                n: usize,
                median_hellinger: f64,
                iqr: f64,
                reps: usize,
                non_converged: usize,
                failures: usize,
            }
            let json_rows: Vec<JsonRow> = rows
                .iter()
                .map(|r| JsonRow {
                    n: r.n,
                    median_hellinger: r.median_hellinger,
                    iqr: r.iqr,
                    reps: r.reps_used,
                    non_converged: r.non_converged,
                    failures: r.failures,
                })
                .collect();
            save_json(&output, &json_rows)?;
        }
    }
    let mut manifest = ManifestBuilder::new("rate-check", cfg.seed);
    manifest.digest(&std::fs::read(&args.config)?);
    manifest.add_output(&output);
    manifest.write(&output)?;
    println!("wrote {}", output.display());
    Ok(())
}
