//! The modified Bessel function `K_0` and the law of a product of two
//! independent standard normals, whose density is `K_0(|x|) / pi`.

use std::f64::consts::PI;

use super::LawError;
use crate::quad::integrate;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the power series is used, above it the asymptotic
/// expansion. At `x = 8` the series loses about three digits to
/// cancellation (`I_0(8) ~ 427`) and the optimally truncated asymptotic
/// series is accurate to about `exp(-16)` relative; both stay well inside
/// `1e-10` absolute.
pub const K0_SWITCH: f64 = 8.0;

/// `-(ln(x/2) + gamma) I_0(x) + sum_{k>=1} (x^2/4)^k / (k!)^2 H_k`.
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let lead = -((0.5 * x).ln() + EULER_GAMMA);
    let mut term = 1.0; // (x^2/4)^k / (k!)^2
    let mut harmonic = 0.0;
    let mut sum = lead;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = term * (lead + harmonic);
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) && term < 1e-17 {
            break;
        }
    }
    sum
}

/// `exp(x) K_0(x)` by the asymptotic expansion, truncated at its smallest term.
fn k0_scaled_asymptotic(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * odd * odd / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() * sum
}

pub fn bessel_k0(x: f64) -> Result<f64, LawError> {
    if !(x > 0.0) {
        return Err(LawError::NonPositive(x));
    }
    Ok(if x <= K0_SWITCH {
        k0_series(x)
    } else {
        k0_scaled_asymptotic(x) * (-x).exp()
    })
}

/// `exp(x) K_0(x)`, finite for large `x`.
pub fn bessel_k0_scaled(x: f64) -> Result<f64, LawError> {
    if !(x > 0.0) {
        return Err(LawError::NonPositive(x));
    }
    Ok(if x <= K0_SWITCH {
        k0_series(x) * x.exp()
    } else {
        k0_scaled_asymptotic(x)
    })
}

/// Density of `N_1 N_2`; singular at 0.
pub fn density_product_two_normals(x: f64) -> Result<f64, LawError> {
    if x == 0.0 {
        return Err(LawError::Singular);
    }
    if !x.is_finite() {
        return Ok(0.0);
    }
    Ok(bessel_k0(x.abs())? / PI)
}

/// Up to here `int_0^a K_0` uses the integrated series.
const INTEGRAL_SERIES_LIMIT: f64 = 2.0;
/// `int_60^inf K_0 < 1e-26`.
const INTEGRAL_TAIL: f64 = 60.0;

/// `int_0^a K_0(u) du` by integrating the series term by term, which
/// absorbs the logarithmic singularity at 0.
fn k0_integral_series(a: f64) -> f64 {
    let half = 0.5 * a;
    let log_half = half.ln();
    let mut coeff = 1.0; // (a/2)^(2k) / (k!)^2
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 0..200 {
        if k > 0 {
            let kf = k as f64;
            coeff *= half * half / (kf * kf);
            harmonic += 1.0 / kf;
        }
        let m = (2 * k + 1) as f64;
        let add = coeff * (-(log_half + EULER_GAMMA) / m + 1.0 / (m * m) + harmonic / m);
        sum += add;
        if add.abs() < 1e-18 && k > 2 {
            break;
        }
    }
    a * sum
}

/// `int_0^a K_0(u) du` for `a >= 0`; tends to `pi / 2`.
pub fn bessel_k0_integral(a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    if a <= INTEGRAL_SERIES_LIMIT {
        return k0_integral_series(a);
    }
    let k0 = |u: f64| bessel_k0(u).expect("positive argument");
    k0_integral_series(INTEGRAL_SERIES_LIMIT)
        + integrate(k0, INTEGRAL_SERIES_LIMIT, a.min(INTEGRAL_TAIL), 1e-14)
}

/// `P(N_1 N_2 <= x)`.
pub fn cdf_product_two_normals(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let half_mass = bessel_k0_integral(x.abs()) / PI;
    if x > 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K_0(x) = int_0^inf exp(-x cosh t) dt` by the trapezoid rule, which
    /// converges geometrically for this analytic, rapidly decaying integrand.
    fn k0_oracle(x: f64) -> f64 {
        let h = 1.0 / 64.0;
        let mut sum = 0.5 * (-x).exp();
        let mut k = 1;
        loop {
            let v = (-x * (k as f64 * h).cosh()).exp();
            sum += v;
            if v < 1e-300 || k > 100_000 {
                break;
            }
            k += 1;
        }
        sum * h
    }

    #[test]
    fn k0_reference_values() {
        assert!((bessel_k0(1.0).unwrap() - 0.421_024_438_240_708_3).abs() < 1e-12);
        // Leading small-argument terms ln(2/x) - gamma give 4.7212 here.
        let small = (2.0f64 / 0.01).ln() - EULER_GAMMA;
        assert!((small - 4.7212).abs() < 1e-3);
        assert!((bessel_k0(0.01).unwrap() - 4.7212).abs() < 1e-4);
        assert!(bessel_k0(2.0).unwrap() < bessel_k0(1.0).unwrap());
        assert_eq!(bessel_k0(0.0), Err(LawError::NonPositive(0.0)));
        assert!(bessel_k0(-1.0).is_err());
    }

    #[test]
    fn k0_matches_integral_representation() {
        let mut x = 1e-6;
        while x <= 50.0 {
            let err = (bessel_k0(x).unwrap() - k0_oracle(x)).abs();
            assert!(err < 1e-10, "x = {x}: error {err}");
            x *= 1.17;
        }
        for &x in &[7.9, 8.0, 8.0001, 8.1, 9.0, 12.0, 20.0, 50.0] {
            let err = (bessel_k0(x).unwrap() - k0_oracle(x)).abs();
            assert!(err < 1e-10, "x = {x}: error {err}");
            let scaled = bessel_k0_scaled(x).unwrap() * (-x).exp();
            assert!((scaled - bessel_k0(x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn density_properties() {
        assert_eq!(density_product_two_normals(0.0), Err(LawError::Singular));
        for &x in &[0.1, 0.5, 1.0, 3.0, 7.5] {
            assert_eq!(
                density_product_two_normals(x).unwrap(),
                density_product_two_normals(-x).unwrap()
            );
        }
        assert!((density_product_two_normals(1.0).unwrap() - 0.134_01).abs() < 1e-5);
        // Total mass by adaptive quadrature away from 0, with the small
        // neighbourhood of 0 integrated from the series.
        let p = |x: f64| density_product_two_normals(x).unwrap();
        let eps = 1e-3;
        let inner = 2.0 * k0_integral_series(eps) / PI;
        let outer = 2.0 * crate::quad::integrate(p, eps, 60.0, 1e-12);
        assert!((inner + outer - 1.0).abs() < 1e-6);
    }

    #[test]
    fn integral_pieces_join() {
        // Series and quadrature agree where both apply.
        let k0 = |u: f64| bessel_k0(u).unwrap();
        let direct = k0_integral_series(1.0) + crate::quad::integrate(k0, 1.0, 2.0, 1e-14);
        assert!((direct - k0_integral_series(2.0)).abs() < 1e-12);
        assert!((bessel_k0_integral(80.0) - PI / 2.0).abs() < 1e-12);
    }
}
