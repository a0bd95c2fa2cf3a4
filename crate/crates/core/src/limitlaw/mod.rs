//! Reference limit laws for normalized partial sums: samplers, distribution
//! functions and characteristic functions.

mod bessel;
mod cf;

pub use bessel::{
    bessel_k0, bessel_k0_integral, bessel_k0_scaled, cdf_product_two_normals,
    density_product_two_normals, K0_SWITCH,
};
pub use cf::{cf_eta_mixture, cf_product_normals, CfGrid};

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};
use thiserror::Error;

use crate::fields::CoeffTensor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("invalid law parameter: {0}")]
    BadParameter(String),
    #[error("argument must be positive, got {0}")]
    NonPositive(f64),
    #[error("density is singular at 0")]
    Singular,
    #[error("eta^2 samples must be nonnegative, got {0}")]
    NegativeSample(f64),
    #[error("no eta^2 samples")]
    EmptySamples,
    #[error("unsupported for this law: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LimitLaw {
    /// Centered normal.
    Normal { variance: f64 },
    /// `sum lambda N_a^(1) N_b^(2) (N_c^(3))` over independent normal families.
    ChaosProduct { tensor: CoeffTensor },
    /// `N_1 ... N_d`; `d = 2` is the Bessel law.
    ProductOfNormals { d: usize },
    /// `eta N` with `eta^2` drawn uniformly from the samples.
    EtaMixture { eta_sq: Vec<f64> },
    /// `scale N^2`, the law of `eta^2` for product-type fields.
    ChiSquared1 { scale: f64 },
    /// Sum of independent draws from each part.
    Convolution { parts: Vec<LimitLaw> },
}

impl LimitLaw {
    pub fn standard_normal() -> Self {
        LimitLaw::Normal { variance: 1.0 }
    }

    pub fn bessel() -> Self {
        LimitLaw::ProductOfNormals { d: 2 }
    }

    pub fn validate(&self) -> Result<(), LawError> {
        match self {
            LimitLaw::Normal { variance } if !(variance.is_finite() && *variance > 0.0) => Err(
                LawError::BadParameter(format!("variance must be positive, got {variance}")),
            ),
            LimitLaw::ChaosProduct { tensor } => tensor
                .validate()
                .map_err(|e| LawError::BadParameter(e.to_string())),
            LimitLaw::ProductOfNormals { d } if !(2..=3).contains(d) => Err(
                LawError::BadParameter(format!("dimension {d} not in {{2, 3}}")),
            ),
            LimitLaw::EtaMixture { eta_sq } => {
                if eta_sq.is_empty() {
                    return Err(LawError::EmptySamples);
                }
                match eta_sq.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    Some(&bad) => Err(LawError::NegativeSample(bad)),
                    None => Ok(()),
                }
            }
            LimitLaw::ChiSquared1 { scale } if !(scale.is_finite() && *scale > 0.0) => Err(
                LawError::BadParameter(format!("scale must be positive, got {scale}")),
            ),
            LimitLaw::Convolution { parts } => {
                if parts.is_empty() {
                    return Err(LawError::BadParameter("convolution of no laws".into()));
                }
                parts.iter().try_for_each(LimitLaw::validate)
            }
            _ => Ok(()),
        }
    }

    /// Whether [`cdf_limit`] supports the law.
    pub fn has_cdf(&self) -> bool {
        matches!(
            self,
            LimitLaw::Normal { .. }
                | LimitLaw::ProductOfNormals { d: 2 }
                | LimitLaw::ChiSquared1 { .. }
        )
    }

    pub fn variance(&self) -> f64 {
        match self {
            LimitLaw::Normal { variance } => *variance,
            LimitLaw::ChaosProduct { tensor } => tensor.sum_sq(),
            LimitLaw::ProductOfNormals { .. } => 1.0,
            LimitLaw::EtaMixture { eta_sq } => eta_sq.iter().sum::<f64>() / eta_sq.len() as f64,
            LimitLaw::ChiSquared1 { scale } => 2.0 * scale * scale,
            LimitLaw::Convolution { parts } => parts.iter().map(LimitLaw::variance).sum(),
        }
    }

    /// Real part of the characteristic function at `t`.
    pub fn cf(&self, t: f64) -> Result<f64, LawError> {
        match self {
            LimitLaw::Normal { variance } => Ok((-0.5 * variance * t * t).exp()),
            LimitLaw::ProductOfNormals { d } => cf_product_normals(t, *d),
            LimitLaw::ChaosProduct { tensor } if tensor.entries.len() == 1 => {
                cf_product_normals(tensor.entries[0].lambda * t, tensor.d)
            }
            LimitLaw::ChaosProduct { .. } => Err(LawError::Unsupported(
                "closed-form cf of a multi-term chaos product".into(),
            )),
            LimitLaw::EtaMixture { eta_sq } => cf_eta_mixture(eta_sq, t),
            LimitLaw::ChiSquared1 { scale } => {
                // Re (1 - 2 i s t)^(-1/2)
                let w = 2.0 * scale * t;
                let modulus = (1.0 + w * w).powf(-0.25);
                Ok(modulus * (0.5 * w.atan()).cos())
            }
            LimitLaw::Convolution { parts } => {
                // Real parts multiply only when every part is symmetric.
                let mut prod = 1.0;
                for p in parts {
                    if !p.is_symmetric() {
                        return Err(LawError::Unsupported(format!(
                            "convolution cf with the asymmetric part {}",
                            p.name()
                        )));
                    }
                    prod *= p.cf(t)?;
                }
                Ok(prod)
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            LimitLaw::ChiSquared1 { .. } => false,
            LimitLaw::Convolution { parts } => parts.iter().all(LimitLaw::is_symmetric),
            _ => true,
        }
    }

    pub fn cf_grid(&self, t_values: &[f64]) -> Result<CfGrid, LawError> {
        CfGrid::tabulate(t_values, |t| self.cf(t))
    }
}

/// One draw from `law`.
pub fn sample_limit<R: Rng + ?Sized>(law: &LimitLaw, rng: &mut R) -> f64 {
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    match law {
        LimitLaw::Normal { variance } => variance.sqrt() * normal(),
        LimitLaw::ProductOfNormals { d } => (0..*d).map(|_| normal()).product(),
        LimitLaw::ChaosProduct { tensor } => {
            // One independent normal per (axis, basis index), drawn in a
            // fixed order.
            let mut family: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); tensor.d];
            for term in &tensor.entries {
                for (axis, &a) in term.index.iter().enumerate() {
                    family[axis].insert(a, 0.0);
                }
            }
            for axis in family.iter_mut() {
                for v in axis.values_mut() {
                    *v = normal();
                }
            }
            tensor
                .entries
                .iter()
                .map(|term| {
                    term.lambda
                        * term
                            .index
                            .iter()
                            .enumerate()
                            .map(|(axis, a)| family[axis][a])
                            .product::<f64>()
                })
                .sum()
        }
        LimitLaw::EtaMixture { eta_sq } => {
            let pick = rng.random_range(0..eta_sq.len());
            eta_sq[pick].sqrt() * rng.sample::<f64, _>(StandardNormal)
        }
        LimitLaw::ChiSquared1 { scale } => {
            let n = normal();
            scale * n * n
        }
        LimitLaw::Convolution { parts } => parts.iter().map(|p| sample_limit(p, rng)).sum(),
    }
}

/// Distribution function at `x`.
pub fn cdf_limit(law: &LimitLaw, x: f64) -> Result<f64, LawError> {
    match law {
        LimitLaw::Normal { variance } => {
            Ok(0.5 * erfc(-x / (2.0 * variance).sqrt()))
        }
        LimitLaw::ProductOfNormals { d: 2 } => Ok(cdf_product_two_normals(x)),
        LimitLaw::ChiSquared1 { scale } => {
            if x <= 0.0 {
                Ok(0.0)
            } else {
                Ok(erf((x / (2.0 * scale)).sqrt()))
            }
        }
        other => Err(LawError::Unsupported(format!(
            "no distribution function for {}",
            other.name()
        ))),
    }
}

impl LimitLaw {
    pub fn name(&self) -> String {
        match self {
            LimitLaw::Normal { variance } => format!("normal({variance})"),
            LimitLaw::ChaosProduct { tensor } => {
                format!("chaos_product(d={}, terms={})", tensor.d, tensor.entries.len())
            }
            LimitLaw::ProductOfNormals { d } => format!("product_of_normals({d})"),
            LimitLaw::EtaMixture { eta_sq } => format!("eta_mixture(n={})", eta_sq.len()),
            LimitLaw::ChiSquared1 { scale } => format!("chi_squared_1({scale})"),
            LimitLaw::Convolution { parts } => format!(
                "convolution({})",
                parts.iter().map(LimitLaw::name).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}
