//! Key-value configuration files for the simulation harnesses.
//!
//! One `key = value` pair per line, `#` comments, comma-separated lists
//! where noted. A simulate config expands to one scenario per combination
//! of `m`, `delta`, and `noise` entries.
//!
//! ```text
//! # simulate
//! seed = 42
//! n_features = 1000
//! mu1 = flat            # flat | fixed_vector
//! m = 10, 100           # list allowed (flat pattern only)
//! delta = 3, 6          # list allowed (flat pattern only)
//! noise = gaussian      # gaussian | t3 | ar1:RHO | exchangeable:RHO (list allowed)
//! n0 = 25
//! n1 = 25
//! n_test0 = 200
//! n_test1 = 200
//! reps = 100
//! methods = npmle, nb, gp, oracle_nb, mzy
//! k = default           # or a grid size
//! pi_hat = 0.5
//!
//! # rate-check
//! seed = 7
//! atoms = -2, 2
//! weights = 0.5, 0.5
//! n_values = 500, 2000, 8000, 32000
//! reps = 20
//! quad_points = 10001
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use npeb_core::density::MixingDistribution;
use npeb_core::sim::{ExperimentConfig, Method, Mu1Pattern, NoiseFamily, RateExperimentConfig};

use crate::{AppError, AppResult};

pub struct KeyValues {
    entries: BTreeMap<String, String>,
    path: String,
}

impl KeyValues {
    pub fn parse(path: &Path) -> AppResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AppError::data(format!(
                    "{}: line {}: expected `key = value`, got {raw:?}",
                    path.display(),
                    line_no + 1
                ))
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            entries,
            path: path.display().to_string(),
        })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> AppResult<&str> {
        self.get(key)
            .ok_or_else(|| AppError::data(format!("{}: missing key {key:?}", self.path)))
    }

    fn parse_scalar<T: std::str::FromStr>(&self, key: &str, raw: &str) -> AppResult<T> {
        raw.trim().parse().map_err(|_| {
            AppError::data(format!(
                "{}: key {key:?}: cannot parse {raw:?}",
                self.path
            ))
        })
    }

    fn scalar<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> AppResult<T> {
        match self.get(key) {
            Some(raw) => self.parse_scalar(key, raw),
            None => default
                .ok_or_else(|| AppError::data(format!("{}: missing key {key:?}", self.path))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> AppResult<Vec<T>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|item| self.parse_scalar(key, item))
            .collect()
    }
}

fn parse_noise(path: &str, raw: &str) -> AppResult<NoiseFamily> {
    let raw = raw.trim();
    if raw == "gaussian" {
        return Ok(NoiseFamily::Gaussian);
    }
    if raw == "t3" {
        return Ok(NoiseFamily::T3);
    }
    for (name, build) in [
        ("ar1", NoiseFamily::Ar1 as fn(f64) -> NoiseFamily),
        ("exchangeable", NoiseFamily::Exchangeable as fn(f64) -> NoiseFamily),
    ] {
        if let Some(rest) = raw.strip_prefix(name) {
            let rho_text = rest
                .trim_start_matches([':', '('])
                .trim_end_matches(')');
            let rho: f64 = rho_text.parse().map_err(|_| {
                AppError::data(format!("{path}: bad correlation in noise {raw:?}"))
            })?;
            return Ok(build(rho));
        }
    }
    Err(AppError::data(format!(
        "{path}: unknown noise family {raw:?} (expected gaussian, t3, ar1:RHO, exchangeable:RHO)"
    )))
}

/// The scenarios described by a simulate config file, expanded over the
/// `m`, `delta`, and `noise` lists.
pub fn load_experiment_configs(
    path: &Path,
    seed_override: Option<u64>,
    k_override: Option<usize>,
    pi_override: Option<f64>,
) -> AppResult<Vec<ExperimentConfig>> {
    let kv = KeyValues::parse(path)?;
    let n_features: usize = kv.scalar("n_features", None)?;
    let n0: usize = kv.scalar("n0", Some(25))?;
    let n1: usize = kv.scalar("n1", Some(25))?;
    let n_test0: usize = kv.scalar("n_test0", Some(200))?;
    let n_test1: usize = kv.scalar("n_test1", Some(200))?;
    let reps: usize = kv.scalar("reps", Some(100))?;
    let seed: u64 = match seed_override {
        Some(s) => s,
        None => kv.scalar("seed", Some(0))?,
    };
    let pi_hat: f64 = match pi_override {
        Some(p) => p,
        None => kv.scalar("pi_hat", Some(0.5))?,
    };
    let grid_size: Option<usize> = match k_override {
        Some(k) => Some(k),
        None => match kv.get("k") {
            None => None,
            Some("default") => None,
            Some(raw) => Some(kv.parse_scalar("k", raw)?),
        },
    };

    let methods: Vec<Method> = match kv.get("methods") {
        None => vec![Method::Npmle],
        Some(raw) => raw
            .split(',')
            .map(|item| {
                let item = item.trim();
                Method::parse(item).ok_or_else(|| {
                    AppError::data(format!(
                        "{}: unknown method {item:?} (expected npmle, nb, oracle_nb, gp, mzy)",
                        path.display()
                    ))
                })
            })
            .collect::<AppResult<_>>()?,
    };

    let noises: Vec<NoiseFamily> = match kv.get("noise") {
        None => vec![NoiseFamily::Gaussian],
        Some(raw) => raw
            .split(',')
            .map(|item| parse_noise(&kv.path, item))
            .collect::<AppResult<_>>()?,
    };

    let mu1_kind = kv.get("mu1").unwrap_or("flat");
    let patterns: Vec<Mu1Pattern> = match mu1_kind {
        "fixed_vector" => vec![Mu1Pattern::FixedVector],
        "flat" => {
            let ms: Vec<usize> = kv.list("m")?;
            let deltas: Vec<f64> = kv.list("delta")?;
            let mut out = Vec::new();
            for &m in &ms {
                for &delta in &deltas {
                    out.push(Mu1Pattern::Flat { m, delta });
                }
            }
            out
        }
        other => {
            return Err(AppError::data(format!(
                "{}: unknown mu1 pattern {other:?} (expected flat or fixed_vector)",
                path.display()
            )))
        }
    };

    let mut configs = Vec::new();
    for noise in &noises {
        for pattern in &patterns {
            let cfg = ExperimentConfig {
                n_features,
                mu1: *pattern,
                noise: *noise,
                n0,
                n1,
                n_test0,
                n_test1,
                reps,
                seed,
                methods: methods.clone(),
                grid_size,
                pi_hat,
            };
            cfg.validate()
                .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
            configs.push(cfg);
        }
    }
    Ok(configs)
}

pub fn load_rate_config(path: &Path, seed_override: Option<u64>) -> AppResult<RateExperimentConfig> {
    let kv = KeyValues::parse(path)?;
    let atoms: Vec<f64> = kv.list("atoms")?;
    let weights: Vec<f64> = kv.list("weights")?;
    let prior = MixingDistribution::new(atoms, weights)
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let cfg = RateExperimentConfig {
        prior,
        n_values: kv.list("n_values")?,
        reps: kv.scalar("reps", Some(20))?,
        quad_points: kv.scalar("quad_points", Some(10_001))?,
        seed: match seed_override {
            Some(s) => s,
            None => kv.scalar("seed", Some(0))?,
        },
    };
    cfg.validate()
        .map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::write_atomic;
    use std::path::PathBuf;

    fn tmp(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("npeb_cfg_{}_{name}", std::process::id()));
        p
    }

    #[test]
    fn simulate_config_expands_scenarios() {
        let path = tmp("sim.cfg");
        write_atomic(
            &path,
            "n_features = 100\nm = 5, 10\ndelta = 3, 6\nreps = 2\nmethods = nb, npmle\nseed = 9\n",
        )
        .unwrap();
        let configs = load_experiment_configs(&path, None, None, None).unwrap();
        assert_eq!(configs.len(), 4);
        assert_eq!(configs[0].methods, vec![Method::Nb, Method::Npmle]);
        assert_eq!(configs[0].seed, 9);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn noise_spellings() {
        assert!(matches!(parse_noise("t", "gaussian").unwrap(), NoiseFamily::Gaussian));
        assert!(matches!(parse_noise("t", "ar1:0.5").unwrap(), NoiseFamily::Ar1(r) if r == 0.5));
        assert!(matches!(
            parse_noise("t", "exchangeable(0.3)").unwrap(),
            NoiseFamily::Exchangeable(r) if r == 0.3
        ));
        assert!(parse_noise("t", "cauchy").is_err());
    }

    #[test]
    fn rate_config_parses() {
        let path = tmp("rate.cfg");
        write_atomic(
            &path,
            "atoms = -2, 2\nweights = 0.5, 0.5\nn_values = 100, 200\nreps = 3\nseed = 4\n",
        )
        .unwrap();
        let cfg = load_rate_config(&path, None).unwrap();
        assert_eq!(cfg.n_values, vec![100, 200]);
        assert_eq!(cfg.quad_points, 10_001);
        std::fs::remove_file(&path).unwrap();
    }
}
