//! Scalar math helpers for the `no_std` build.
//!
//! Transcendentals route through `libm` so results are identical whether the
//! crate is built with or without `std`.

/// ln(2*pi)
pub const LN_2PI: f64 = 1.8378770664093453;

/// ln(1/sqrt(2*pi)), the log of the standard normal density at its mode.
pub const LN_INV_SQRT_2PI: f64 = -0.9189385332046727;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// log(sum(exp(xs))) anchored at the maximum term.
///
/// Entries equal to negative infinity are skipped; returns negative infinity
/// when every entry is.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for &x in xs {
        if x != f64::NEG_INFINITY {
            acc += exp(x - m);
        }
    }
    m + ln(acc)
}

/// Linear-interpolation quantile of an ascending-sorted, nonempty slice.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = floor(pos) as usize;
    let frac = pos - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Composite Simpson quadrature of `f` over `[a, b]` with `n` nodes.
///
/// `n` must be odd and at least 3; the caller validates.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let x = a + h * i as f64;
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(x);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_handles_extreme_spread() {
        // exp(-1000) underflows but the anchored sum must not.
        let v = logsumexp(&[-1000.0, -1000.5]);
        let expected = -1000.0 + ln(1.0 + exp(-0.5));
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_all_neg_inf() {
        assert_eq!(logsumexp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        // Simpson is exact through degree 3.
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 5);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_standard_normal_mass() {
        let v = simpson(
            |x| exp(-0.5 * x * x + LN_INV_SQRT_2PI),
            -8.0,
            8.0,
            1001,
        );
        assert!((v - 1.0).abs() < 1e-9);
    }
}
