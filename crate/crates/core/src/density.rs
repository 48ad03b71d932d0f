//! Gaussian and discrete-mixture densities, evaluated in the log domain, plus
//! the Hellinger distance between densities with declared supports.
//!
//! A [`MixingDistribution`] is a discrete prior: support atoms with simplex
//! weights. Convolving it with Gaussian noise of scale `sd` gives the marginal
//! density of an observation, available in log form through
//! [`mixture_log_density`] and as an integrable [`Density`] through
//! [`MixtureDensity`].

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Weight below which a mixture atom is ignored during log-domain evaluation,
/// so that `ln(weight)` never produces `-inf + finite` pathologies.
const NEGLIGIBLE_WEIGHT: f64 = 1e-300;

/// Effective support half-width of a Gaussian in units of its standard
/// deviation; tail mass beyond this is below 1e-14.
const SUPPORT_SDS: f64 = 8.0;

/// A discrete mixing distribution: ascending support atoms and simplex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingDistribution {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl MixingDistribution {
    /// Validates and builds a discrete distribution.
    ///
    /// Atoms must be finite and strictly ascending, weights non-negative and
    /// summing to 1 within 1e-12, with equal, non-zero lengths.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("mixing distribution needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        for pair in atoms.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidArgument("atoms must be strictly ascending"));
            }
        }
        let mut sum = 0.0;
        for (&a, &w) in atoms.iter().zip(&weights) {
            if !a.is_finite() || !w.is_finite() {
                return Err(Error::InvalidArgument("atoms and weights must be finite"));
            }
            if w < 0.0 {
                return Err(Error::InvalidArgument("weights must be non-negative"));
            }
            sum += w;
        }
        if math::abs(sum - 1.0) > 1e-12 {
            return Err(Error::InvalidArgument("weights must sum to 1 within 1e-12"));
        }
        Ok(Self { atoms, weights })
    }

    /// The distribution placing all mass on a single point.
    pub fn point_mass(at: f64) -> Self {
        Self {
            atoms: alloc::vec![at],
            weights: alloc::vec![1.0],
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mean of the distribution.
    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a * w)
            .sum()
    }

    /// Index of the atom closest to `x` (ties resolve to the lower atom).
    pub fn nearest_atom(&self, x: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, &a) in self.atoms.iter().enumerate() {
            let d = math::abs(a - x);
            if d < best_dist {
                best_dist = d;
                best = k;
            }
        }
        best
    }
}

/// log of the N(mean, sd^2) density at `x`, exact in the log domain.
///
/// No underflow for standardized deviations up to a few hundred; the result
/// is simply a large negative number.
pub fn normal_log_density(x: f64, mean: f64, sd: f64) -> Result<f64> {
    if !x.is_finite() || !mean.is_finite() || !sd.is_finite() {
        return Err(Error::InvalidArgument("normal_log_density requires finite inputs"));
    }
    if sd <= 0.0 {
        return Err(Error::InvalidArgument("normal_log_density requires sd > 0"));
    }
    let z = (x - mean) / sd;
    Ok(math::LN_INV_SQRT_2PI - 0.5 * z * z - math::ln(sd))
}

/// log of the mixture density `sum_k w_k * phi((x - mu_k)/sd)/sd`, computed by
/// log-sum-exp over the atoms carrying non-negligible weight.
pub fn mixture_log_density(mix: &MixingDistribution, x: f64, sd: f64) -> Result<f64> {
    if sd <= 0.0 || !sd.is_finite() {
        return Err(Error::InvalidArgument("mixture_log_density requires sd > 0"));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("mixture_log_density requires finite x"));
    }
    let mut any = false;
    let mut m = f64::NEG_INFINITY;
    let mut terms: Vec<f64> = Vec::with_capacity(mix.len());
    for (&a, &w) in mix.atoms.iter().zip(&mix.weights) {
        if w < NEGLIGIBLE_WEIGHT {
            continue;
        }
        any = true;
        let t = math::ln(w) + normal_log_density(x, a, sd)?;
        if t > m {
            m = t;
        }
        terms.push(t);
    }
    if !any {
        return Err(Error::InvalidState("mixture has no atom with usable weight"));
    }
    let mut acc = 0.0;
    for t in terms {
        acc += math::exp(t - m);
    }
    Ok(m + math::ln(acc))
}

/// A density with a declared interval outside of which it is numerically
/// negligible. Implementations must integrate to 1 over the support under
/// Simpson quadrature, up to 1e-6.
pub trait Density {
    fn density(&self, x: f64) -> f64;
    /// Interval `(lo, hi)` covering all but negligible mass.
    fn support(&self) -> (f64, f64);
}

/// A single Gaussian as a [`Density`].
#[derive(Debug, Clone, Copy)]
pub struct GaussianDensity {
    pub mean: f64,
    pub sd: f64,
}

impl Density for GaussianDensity {
    fn density(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        math::exp(math::LN_INV_SQRT_2PI - 0.5 * z * z) / self.sd
    }

    fn support(&self) -> (f64, f64) {
        (
            self.mean - SUPPORT_SDS * self.sd,
            self.mean + SUPPORT_SDS * self.sd,
        )
    }
}

/// The Gaussian convolution of a discrete mixing distribution, as a
/// [`Density`].
#[derive(Debug, Clone)]
pub struct MixtureDensity {
    mix: MixingDistribution,
    noise_sd: f64,
}

impl MixtureDensity {
    pub fn new(mix: MixingDistribution, noise_sd: f64) -> Result<Self> {
        if noise_sd <= 0.0 || !noise_sd.is_finite() {
            return Err(Error::InvalidArgument("MixtureDensity requires noise_sd > 0"));
        }
        Ok(Self { mix, noise_sd })
    }

    pub fn mixing(&self) -> &MixingDistribution {
        &self.mix
    }
}

impl Density for MixtureDensity {
    fn density(&self, x: f64) -> f64 {
        match mixture_log_density(&self.mix, x, self.noise_sd) {
            Ok(l) => math::exp(l),
            Err(_) => 0.0,
        }
    }

    fn support(&self) -> (f64, f64) {
        let lo = self.mix.atoms[0] - SUPPORT_SDS * self.noise_sd;
        let hi = self.mix.atoms[self.mix.len() - 1] + SUPPORT_SDS * self.noise_sd;
        (lo, hi)
    }
}

/// Hellinger distance `[ integral (sqrt(p) - sqrt(q))^2 dx ]^(1/2)` by
/// composite Simpson quadrature over the union of the declared supports.
///
/// `grid_points` must be odd and at least 1001. Points where both densities
/// underflow contribute zero, which is below the quadrature tolerance.
pub fn hellinger_distance<P: Density + ?Sized, Q: Density + ?Sized>(
    p: &P,
    q: &Q,
    grid_points: usize,
) -> Result<f64> {
    if grid_points % 2 == 0 {
        return Err(Error::InvalidArgument("hellinger_distance needs an odd number of grid points"));
    }
    if grid_points < 1001 {
        return Err(Error::InvalidArgument("hellinger_distance needs at least 1001 grid points"));
    }
    let (plo, phi) = p.support();
    let (qlo, qhi) = q.support();
    let lo = plo.min(qlo);
    let hi = phi.max(qhi);
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument("hellinger_distance needs finite supports"));
    }
    let integrand = |x: f64| {
        let d = math::sqrt(p.density(x)) - math::sqrt(q.density(x));
        d * d
    };
    let total = math::simpson(integrand, lo, hi, grid_points);
    Ok(math::sqrt(total.max(0.0)))
}
