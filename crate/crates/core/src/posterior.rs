//! Posterior laws under a fitted discrete prior.
//!
//! For a group average `xbar` of `n_k` unit-variance observations, the
//! posterior over the latent mean reweights the prior atoms by
//! `phi(sqrt(n_k) * (xbar - mu_k))`; everything is kept in the log domain
//! because downstream classifiers multiply thousands of such ratios.

use alloc::vec::Vec;

use crate::density::{normal_log_density, MixingDistribution};
use crate::math;
use crate::{Error, Result};

/// A posterior over the prior's atoms, with normalized log weights.
#[derive(Debug, Clone)]
pub struct PosteriorLaw {
    atoms: Vec<f64>,
    log_weights: Vec<f64>,
    degenerate: bool,
}

impl PosteriorLaw {
    /// Atoms, identical to the prior's.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    /// Normalized log weights, aligned with [`Self::atoms`].
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Linear-domain weights.
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|&l| math::exp(l)).collect()
    }

    /// Set when every reweighting term underflowed and the law fell back to
    /// the atom nearest the conditioning value.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Posterior mean; always within the atom range.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for (a, l) in self.atoms.iter().zip(&self.log_weights) {
            if *l != f64::NEG_INFINITY {
                acc += a * math::exp(*l);
            }
        }
        acc
    }

    /// log of the unit-noise predictive density `sum_k v_k phi(x - mu_k)`.
    pub fn predictive_log_density(&self, x: f64) -> Result<f64> {
        let mut m = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(self.atoms.len());
        for (a, l) in self.atoms.iter().zip(&self.log_weights) {
            if *l == f64::NEG_INFINITY {
                continue;
            }
            let t = l + normal_log_density(x, *a, 1.0)?;
            if t > m {
                m = t;
            }
            terms.push(t);
        }
        if m == f64::NEG_INFINITY {
            return Err(Error::NumericFailure("predictive density underflowed everywhere"));
        }
        let mut acc = 0.0;
        for t in terms {
            acc += math::exp(t - m);
        }
        Ok(m + math::ln(acc))
    }
}

/// Posterior law given an average of `n_k` observations, i.e. conditioning
/// noise scale `1/sqrt(n_k)`.
pub fn posterior_law(prior: &MixingDistribution, xbar: f64, n_k: usize) -> Result<PosteriorLaw> {
    if n_k < 1 {
        return Err(Error::InvalidArgument("posterior_law requires n_k >= 1"));
    }
    posterior_law_with_sd(prior, xbar, 1.0 / math::sqrt(n_k as f64))
}

/// Posterior law for an observation `x` with arbitrary Gaussian noise scale.
pub fn posterior_law_with_sd(
    prior: &MixingDistribution,
    x: f64,
    noise_sd: f64,
) -> Result<PosteriorLaw> {
    if !(noise_sd > 0.0) || !noise_sd.is_finite() {
        return Err(Error::InvalidArgument("posterior noise_sd must be positive"));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("posterior conditioning value must be finite"));
    }
    let atoms = prior.atoms();
    let weights = prior.weights();
    let mut log_weights = Vec::with_capacity(atoms.len());
    for (&a, &w) in atoms.iter().zip(weights) {
        if w <= 0.0 {
            log_weights.push(f64::NEG_INFINITY);
            continue;
        }
        log_weights.push(math::ln(w) + normal_log_density(x, a, noise_sd)?);
    }
    let log_z = math::logsumexp(&log_weights);
    if log_z == f64::NEG_INFINITY || !log_z.is_finite() {
        // Every term underflowed: the exact posterior's limit concentrates on
        // the nearest atom.
        let nearest = prior.nearest_atom(x);
        for (k, l) in log_weights.iter_mut().enumerate() {
            *l = if k == nearest { 0.0 } else { f64::NEG_INFINITY };
        }
        return Ok(PosteriorLaw {
            atoms: atoms.to_vec(),
            log_weights,
            degenerate: true,
        });
    }
    for l in &mut log_weights {
        if *l != f64::NEG_INFINITY {
            *l -= log_z;
        }
    }
    Ok(PosteriorLaw {
        atoms: atoms.to_vec(),
        log_weights,
        degenerate: false,
    })
}

/// log of the predictive density `phi * F_j^k` at `x`, i.e. the posterior
/// law convolved with unit Gaussian noise.
pub fn predictive_log_density(
    prior: &MixingDistribution,
    xbar: f64,
    n_k: usize,
    x: f64,
) -> Result<f64> {
    posterior_law(prior, xbar, n_k)?.predictive_log_density(x)
}

/// Posterior mean of the latent mean given the group average.
pub fn posterior_mean(prior: &MixingDistribution, xbar: f64, n_k: usize) -> Result<f64> {
    Ok(posterior_law(prior, xbar, n_k)?.mean())
}

/// Difference of the two groups' posterior means for one feature.
pub fn posterior_mean_difference(
    prior0: &MixingDistribution,
    prior1: &MixingDistribution,
    xbar0: f64,
    xbar1: f64,
    n0: usize,
    n1: usize,
) -> Result<f64> {
    Ok(posterior_mean(prior1, xbar1, n1)? - posterior_mean(prior0, xbar0, n0)?)
}
