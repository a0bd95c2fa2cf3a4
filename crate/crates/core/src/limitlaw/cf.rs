use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::bessel::bessel_k0_scaled;
use super::LawError;
use crate::quad::expect_normal_adaptive;

/// Characteristic function values on a grid of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfGrid {
    pub t_values: Vec<f64>,
    /// Real parts.
    pub cf_values: Vec<f64>,
    /// Largest imaginary part seen (0 for analytic symmetric laws).
    pub max_imag: f64,
}

impl CfGrid {
    pub fn new(t_values: Vec<f64>, cf_values: Vec<f64>) -> Self {
        assert_eq!(t_values.len(), cf_values.len());
        CfGrid {
            t_values,
            cf_values,
            max_imag: 0.0,
        }
    }

    /// Tabulates `cf` on `t_values`.
    pub fn tabulate(
        t_values: &[f64],
        cf: impl Fn(f64) -> Result<f64, LawError>,
    ) -> Result<Self, LawError> {
        let values = t_values.iter().map(|&t| cf(t)).collect::<Result<_, _>>()?;
        Ok(CfGrid::new(t_values.to_vec(), values))
    }

    /// `n` evenly spaced points on `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    /// `max_t |self(t) - other(t)|` on a shared grid.
    pub fn max_gap(&self, other: &CfGrid) -> f64 {
        assert_eq!(self.t_values, other.t_values, "grids differ");
        self.cf_values
            .iter()
            .zip(&other.cf_values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise product (the law of an independent sum).
    pub fn product(&self, other: &CfGrid) -> CfGrid {
        assert_eq!(self.t_values, other.t_values, "grids differ");
        CfGrid::new(
            self.t_values.clone(),
            self.cf_values
                .iter()
                .zip(&other.cf_values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }

    /// Checks `cf(0) = 1` (where 0 is on the grid) and `|cf| <= 1`.
    pub fn is_admissible(&self, tol: f64) -> bool {
        self.t_values
            .iter()
            .zip(&self.cf_values)
            .all(|(&t, &v)| v.abs() <= 1.0 + tol && (t != 0.0 || (v - 1.0).abs() <= tol))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,cf")?;
        for (t, v) in self.t_values.iter().zip(&self.cf_values) {
            writeln!(out, "{t:?},{v:?}")?;
        }
        Ok(())
    }
}

/// `E[exp(i t N_1 ... N_d)]`.
///
/// For `d = 3`, conditioning on two factors gives
/// `E[(1 + s^2 N^2)^(-1/2)] = exp(a) K_0(a) / (s sqrt(2 pi))` with
/// `a = 1 / (4 s^2)`, `s = |t M|`, which is integrated against the law of
/// the remaining normal `M`.
pub fn cf_product_normals(t: f64, d: usize) -> Result<f64, LawError> {
    match d {
        2 => Ok(1.0 / (1.0 + t * t).sqrt()),
        3 => {
            if t == 0.0 {
                return Ok(1.0);
            }
            let inner = |m: f64| {
                let s = (t * m).abs();
                if s < 1e-4 {
                    // E[(1 + s^2 N^2)^(-1/2)] = 1 - s^2/2 + 9 s^4 / 8 - ...
                    let s2 = s * s;
                    1.0 - 0.5 * s2 + 1.125 * s2 * s2
                } else {
                    let a = 0.25 / (s * s);
                    bessel_k0_scaled(a).expect("positive") / (s * (2.0 * PI).sqrt())
                }
            };
            Ok(expect_normal_adaptive(inner, 1e-13))
        }
        _ => Err(LawError::BadParameter(format!("dimension {d} not in {{2, 3}}"))),
    }
}

/// `mean exp(-eta^2 t^2 / 2)` over the given `eta^2` samples.
pub fn cf_eta_mixture(eta_sq: &[f64], t: f64) -> Result<f64, LawError> {
    if eta_sq.is_empty() {
        return Err(LawError::EmptySamples);
    }
    if let Some(&bad) = eta_sq.iter().find(|v| !(**v >= 0.0)) {
        return Err(LawError::NegativeSample(bad));
    }
    let h = -0.5 * t * t;
    Ok(eta_sq.iter().map(|v| (h * v).exp()).sum::<f64>() / eta_sq.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn closed_forms() {
        assert_eq!(cf_product_normals(0.0, 2).unwrap(), 1.0);
        assert_eq!(cf_product_normals(0.0, 3).unwrap(), 1.0);
        assert!((cf_product_normals(1.0, 2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(cf_product_normals(1.0, 4).is_err());
    }

    #[test]
    fn three_factor_cf_matches_double_integral() {
        // Independent oracle: E[(1 + t^2 N^2 M^2)^(-1/2)] as an iterated
        // integral of the smooth integrand over both normals.
        let dens = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        for &t in &[0.25, 1.0, 2.5] {
            let oracle = 4.0
                * integrate(
                    |m| {
                        dens(m)
                            * integrate(
                                |n| dens(n) / (1.0 + t * t * n * n * m * m).sqrt(),
                                0.0,
                                12.0,
                                1e-13,
                            )
                    },
                    0.0,
                    12.0,
                    1e-11,
                );
            let v = cf_product_normals(t, 3).unwrap();
            assert!((v - oracle).abs() < 1e-8, "t = {t}: {v} vs {oracle}");
        }
        assert!((cf_product_normals(1.0, 3).unwrap() - 0.846_912_498_123_288_4).abs() < 1e-6);
    }

    #[test]
    fn eta_mixture() {
        assert!((cf_eta_mixture(&[2.0, 2.0], 1.5).unwrap() - (-2.25f64).exp()).abs() < 1e-15);
        assert_eq!(cf_eta_mixture(&[0.3], 0.0).unwrap(), 1.0);
        assert_eq!(cf_eta_mixture(&[], 1.0), Err(LawError::EmptySamples));
        assert_eq!(cf_eta_mixture(&[1.0, -0.5], 1.0), Err(LawError::NegativeSample(-0.5)));
    }

    #[test]
    fn grid_helpers() {
        let t = CfGrid::linspace(0.0, 3.0, 13);
        assert_eq!(t.len(), 13);
        assert_eq!(t[12], 3.0);
        let g = CfGrid::tabulate(&t, |t| cf_product_normals(t, 2)).unwrap();
        assert!(g.is_admissible(1e-12));
        assert_eq!(g.max_gap(&g), 0.0);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,cf\n0.0,1.0\n"));
    }
}
