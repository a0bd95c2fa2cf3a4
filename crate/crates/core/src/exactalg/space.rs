use num::{BigRational, One, Signed, Zero};

use super::ExactError;

/// Exact rational scalar.
pub type Q = BigRational;

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Q, ExactError> {
    let t = s.trim();
    let q: Q = t
        .parse()
        .map_err(|_| ExactError::ParseRational(s.to_string()))?;
    Ok(q)
}

/// A finite probability space `{0, .., n-1}` with exact rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    weights: Vec<Q>,
}

impl FiniteSpace {
    pub fn new(weights: Vec<Q>) -> Result<Self, ExactError> {
        if weights.is_empty() {
            return Err(ExactError::EmptySpace);
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(ExactError::BadWeights(format!(
                "weight of point {i} is negative ({})",
                weights[i]
            )));
        }
        let total: Q = weights.iter().sum();
        if !total.is_one() {
            return Err(ExactError::BadWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(FiniteSpace { weights })
    }

    pub fn uniform(n: usize) -> Result<Self, ExactError> {
        if n == 0 {
            return Err(ExactError::EmptySpace);
        }
        let w = Q::new(1.into(), (n as u64).into());
        Ok(FiniteSpace { weights: vec![w; n] })
    }

    pub fn parse(weights: &[impl AsRef<str>]) -> Result<Self, ExactError> {
        let w = weights
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        FiniteSpace::new(w)
    }

    /// Product measure on `self x other`; point `(a, b)` has index
    /// `a * other.size() + b`.
    pub fn product(&self, other: &FiniteSpace) -> FiniteSpace {
        let mut weights = Vec::with_capacity(self.size() * other.size());
        for a in &self.weights {
            for b in &other.weights {
                weights.push(a * b);
            }
        }
        FiniteSpace { weights }
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, point: usize) -> &Q {
        &self.weights[point]
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn measure(&self, points: impl IntoIterator<Item = usize>) -> Q {
        points
            .into_iter()
            .fold(Q::zero(), |acc, i| acc + &self.weights[i])
    }

    /// `E[f g]`.
    pub fn inner(&self, f: &[Q], g: &[Q]) -> Q {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .fold(Q::zero(), |acc, (w, (a, b))| acc + w * a * b)
    }

    pub fn indicator(&self, point: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.size()];
        v[point] = Q::one();
        v
    }
}
