use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::FieldError;

/// Law of the i.i.d. axis (or cell) driver variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    #[default]
    Gaussian,
    Rademacher,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosTerm {
    /// One positive basis index per axis.
    pub index: Vec<u32>,
    pub lambda: f64,
}

/// Sparse coefficients `lambda_{a,b[,c]}` of a chaos field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffTensor {
    pub d: usize,
    pub entries: Vec<ChaosTerm>,
}

impl CoeffTensor {
    pub fn new(d: usize, entries: Vec<(Vec<u32>, f64)>) -> Result<Self, FieldError> {
        let t = CoeffTensor {
            d,
            entries: entries
                .into_iter()
                .map(|(index, lambda)| ChaosTerm { index, lambda })
                .collect(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if !(2..=3).contains(&self.d) {
            return Err(FieldError::BadTensor(format!("dimension {} not in {{2, 3}}", self.d)));
        }
        if self.entries.is_empty() {
            return Err(FieldError::EmptyTensor);
        }
        let mut seen = BTreeSet::new();
        for term in &self.entries {
            if term.index.len() != self.d {
                return Err(FieldError::BadTensor(format!(
                    "index {:?} has {} components, expected {}",
                    term.index,
                    term.index.len(),
                    self.d
                )));
            }
            if term.index.contains(&0) {
                return Err(FieldError::HermiteOrderZero);
            }
            if !term.lambda.is_finite() {
                return Err(FieldError::BadTensor(format!(
                    "non-finite coefficient at {:?}",
                    term.index
                )));
            }
            if !seen.insert(term.index.clone()) {
                return Err(FieldError::BadTensor(format!("repeated index {:?}", term.index)));
            }
        }
        if self.sum_sq() <= 0.0 {
            return Err(FieldError::BadTensor("all coefficients are zero".into()));
        }
        Ok(())
    }

    /// `sum lambda^2`, the cell variance of the chaos field.
    pub fn sum_sq(&self) -> f64 {
        self.entries.iter().map(|t| t.lambda * t.lambda).sum()
    }

    pub fn max_order(&self) -> u32 {
        self.entries
            .iter()
            .flat_map(|t| t.index.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// Description of a built-in stationary martingale-difference field.
///
/// `stream` selects the family of driver sequences. Two specs with the same
/// stream and driver share axis drivers, so e.g. a chaos field with the
/// single coefficient `lambda_{1,1} = 1` coincides cell by cell with the
/// product field on the same stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    /// `U_i V_j (W_k)` with independent axis sequences.
    ProductIid {
        #[serde(default)]
        driver: Driver,
        #[serde(default)]
        stream: u64,
    },
    /// `sum lambda h_a(xi_i) h_b(zeta_j) (h_c(theta_k))`.
    Chaos {
        tensor: CoeffTensor,
        #[serde(default)]
        driver: Driver,
        #[serde(default)]
        stream: u64,
    },
    /// `X_i Y_j z (-1)^(i+j)` with Rademacher `X`, `Y`, `z`; two-dimensional.
    SignFlip {
        #[serde(default)]
        stream: u64,
    },
    /// Independent cells.
    Iid {
        #[serde(default)]
        driver: Driver,
        #[serde(default)]
        stream: u64,
    },
    Zero,
    /// Cellwise sum `g + h`.
    Composite { g: Box<FieldSpec>, h: Box<FieldSpec> },
    /// The martingale-difference truncation `f_C` of a local two-dimensional spec.
    Truncated { base: Box<FieldSpec>, c: f64 },
}

impl FieldSpec {
    pub fn product_iid() -> Self {
        FieldSpec::ProductIid {
            driver: Driver::Gaussian,
            stream: 0,
        }
    }

    pub fn chaos(tensor: CoeffTensor) -> Self {
        FieldSpec::Chaos {
            tensor,
            driver: Driver::Gaussian,
            stream: 0,
        }
    }

    pub fn sign_flip() -> Self {
        FieldSpec::SignFlip { stream: 0 }
    }

    pub fn iid(driver: Driver) -> Self {
        FieldSpec::Iid { driver, stream: 0 }
    }

    pub fn composite(g: FieldSpec, h: FieldSpec) -> Self {
        FieldSpec::Composite {
            g: Box::new(g),
            h: Box::new(h),
        }
    }

    /// Same spec reading drivers from another stream.
    pub fn on_stream(self, new: u64) -> Self {
        match self {
            FieldSpec::ProductIid { driver, .. } => FieldSpec::ProductIid {
                driver,
                stream: new,
            },
            FieldSpec::Chaos { tensor, driver, .. } => FieldSpec::Chaos {
                tensor,
                driver,
                stream: new,
            },
            FieldSpec::SignFlip { .. } => FieldSpec::SignFlip { stream: new },
            FieldSpec::Iid { driver, .. } => FieldSpec::Iid {
                driver,
                stream: new,
            },
            FieldSpec::Truncated { base, c } => FieldSpec::Truncated {
                base: Box::new(base.on_stream(new)),
                c,
            },
            other => other,
        }
    }

    /// Fixed dimension of the spec, if it has one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FieldSpec::Chaos { tensor, .. } => Some(tensor.d),
            FieldSpec::SignFlip { .. } | FieldSpec::Truncated { .. } => Some(2),
            FieldSpec::Composite { g, h } => g.dim().or(h.dim()),
            _ => None,
        }
    }

    /// Driver streams read by the spec.
    pub fn streams(&self) -> BTreeSet<u64> {
        match self {
            FieldSpec::ProductIid { stream, .. }
            | FieldSpec::Chaos { stream, .. }
            | FieldSpec::SignFlip { stream }
            | FieldSpec::Iid { stream, .. } => BTreeSet::from([*stream]),
            FieldSpec::Zero => BTreeSet::new(),
            FieldSpec::Composite { g, h } => g.streams().union(&h.streams()).copied().collect(),
            FieldSpec::Truncated { base, .. } => base.streams(),
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        match self {
            FieldSpec::Chaos { tensor, driver, .. } => {
                tensor.validate()?;
                if *driver == Driver::Rademacher && tensor.max_order() > 1 {
                    return Err(FieldError::UnsupportedDriver(
                        "Rademacher drivers only carry the first-order basis element".into(),
                    ));
                }
                Ok(())
            }
            FieldSpec::Composite { g, h } => {
                g.validate()?;
                h.validate()?;
                if let (Some(a), Some(b)) = (g.dim(), h.dim()) {
                    if a != b {
                        return Err(FieldError::DimensionMismatch { spec: a, window: b });
                    }
                }
                if let Some(s) = g.streams().intersection(&h.streams()).next() {
                    return Err(FieldError::SharedStreams(*s));
                }
                Ok(())
            }
            FieldSpec::Truncated { base, c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(FieldError::BadTruncation(*c));
                }
                base.validate()?;
                super::LocalCell::from_spec(base).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Checks the spec against a window dimension.
    pub fn check_window(&self, d: usize) -> Result<(), FieldError> {
        self.validate()?;
        match self.dim() {
            Some(s) if s != d => Err(FieldError::DimensionMismatch { spec: s, window: d }),
            _ => Ok(()),
        }
    }

    /// `E[f^2]` for the cell function.
    pub fn cell_variance(&self) -> f64 {
        match self {
            FieldSpec::ProductIid { .. } | FieldSpec::SignFlip { .. } | FieldSpec::Iid { .. } => 1.0,
            FieldSpec::Chaos { tensor, .. } => tensor.sum_sq(),
            FieldSpec::Zero => 0.0,
            FieldSpec::Composite { g, h } => g.cell_variance() + h.cell_variance(),
            FieldSpec::Truncated { base, c } => super::LocalCell::from_spec(base)
                .map(|cell| super::Truncation::new(cell, *c).norm_sq())
                .unwrap_or(f64::NAN),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        let hash = Sha256::digest(&json);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_validation() {
        assert_eq!(CoeffTensor::new(2, vec![]), Err(FieldError::EmptyTensor));
        assert_eq!(
            CoeffTensor::new(2, vec![(vec![0, 1], 1.0)]),
            Err(FieldError::HermiteOrderZero)
        );
        assert!(CoeffTensor::new(2, vec![(vec![1, 1], 1.0), (vec![1, 1], 2.0)]).is_err());
        assert!(CoeffTensor::new(3, vec![(vec![1, 1], 1.0)]).is_err());
        assert!(CoeffTensor::new(2, vec![(vec![1, 1], 0.0)]).is_err());
        let t = CoeffTensor::new(3, vec![(vec![1, 1, 1], 0.6), (vec![2, 2, 2], 0.8)]).unwrap();
        assert!((t.sum_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn composite_rules() {
        let ok = FieldSpec::composite(FieldSpec::product_iid(), FieldSpec::iid(Driver::Gaussian).on_stream(1));
        assert!(ok.validate().is_ok());
        let shared = FieldSpec::composite(FieldSpec::product_iid(), FieldSpec::iid(Driver::Gaussian));
        assert_eq!(shared.validate(), Err(FieldError::SharedStreams(0)));
        let t3 = CoeffTensor::new(3, vec![(vec![1, 1, 1], 1.0)]).unwrap();
        let mixed = FieldSpec::composite(FieldSpec::chaos(t3), FieldSpec::sign_flip().on_stream(2));
        assert!(matches!(mixed.validate(), Err(FieldError::DimensionMismatch { .. })));
        assert!(FieldSpec::sign_flip().check_window(3).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            kind = "composite"
            [g]
            kind = "chaos"
            tensor = { d = 3, entries = [{ index = [1, 1, 1], lambda = 0.6 }, { index = [2, 2, 2], lambda = 0.8 }] }
            [h]
            kind = "iid"
            driver = "rademacher"
            stream = 4
        "#;
        let spec: FieldSpec = toml::from_str(text).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.dim(), Some(3));
        assert!((spec.cell_variance() - 2.0).abs() < 1e-12);
        let back: FieldSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(toml::from_str::<FieldSpec>("kind = \"bogus\"").is_err());
    }

    #[test]
    fn digest_is_stable_and_discriminating() {
        let a = FieldSpec::product_iid();
        assert_eq!(a.digest(), FieldSpec::product_iid().digest());
        assert_eq!(a.digest().len(), 64);
        assert_ne!(a.digest(), a.clone().on_stream(1).digest());
    }
}
