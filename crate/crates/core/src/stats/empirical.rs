use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::limitlaw::{cdf_limit, CfGrid, LimitLaw};

/// A sorted sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    samples: Vec<f64>,
    provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl EmpiricalDist {
    /// Sorts `samples`; needs at least two finite values.
    pub fn new(mut samples: Vec<f64>, provenance: impl Into<String>) -> Result<Self, StatsError> {
        if samples.len() < 2 {
            return Err(StatsError::TooFewSamples(samples.len()));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(*bad));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDist {
            samples,
            provenance: provenance.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.count() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (self.count() - 1) as f64
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mean: self.mean(),
            variance: self.variance(),
            min: self.samples[0],
            max: self.samples[self.count() - 1],
        }
    }

    /// Fraction of samples `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|v| *v <= x) as f64 / self.count() as f64
    }

    /// Applies a map to every sample (re-sorting).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, StatsError> {
        EmpiricalDist::new(self.samples.iter().map(|&x| f(x)).collect(), self.provenance.clone())
    }

    /// Single-column CSV.
    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "value")?;
        for v in &self.samples {
            writeln!(out, "{v:?}")?;
        }
        Ok(())
    }

    /// `x, F_n(x)` at each distinct sample value.
    pub fn write_ecdf_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,ecdf")?;
        let n = self.count() as f64;
        for (i, v) in self.samples.iter().enumerate() {
            if i + 1 < self.count() && self.samples[i + 1] == *v {
                continue;
            }
            writeln!(out, "{v:?},{:?}", (i + 1) as f64 / n)?;
        }
        Ok(())
    }
}

/// What an empirical distribution is compared with.
#[derive(Clone, Copy, Debug)]
pub enum Reference<'a> {
    Law(&'a LimitLaw),
    Sample(&'a EmpiricalDist),
}

/// `sup_x |F_n(x) - F(x)|` against a law with a distribution function.
pub fn ks_one_sample(a: &EmpiricalDist, law: &LimitLaw) -> Result<f64, StatsError> {
    if !law.has_cdf() {
        return Err(StatsError::Law(crate::limitlaw::LawError::Unsupported(format!(
            "one-sample KS needs a distribution function; {} has none",
            law.name()
        ))));
    }
    let n = a.count() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.samples().iter().enumerate() {
        let f = cdf_limit(law, x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// `sup_x |F_n(x) - G_m(x)|`.
pub fn ks_two_sample(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    let (xs, ys) = (a.samples(), b.samples());
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

pub fn ks_distance(a: &EmpiricalDist, reference: Reference<'_>) -> Result<f64, StatsError> {
    match reference {
        Reference::Law(law) => ks_one_sample(a, law),
        Reference::Sample(b) => Ok(ks_two_sample(a, b)),
    }
}

/// Empirical characteristic function: real parts, with the largest
/// imaginary part recorded.
pub fn ecf(a: &EmpiricalDist, t_grid: &[f64]) -> CfGrid {
    let n = a.count() as f64;
    let mut max_imag: f64 = 0.0;
    let values = t_grid
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0, 0.0);
            for &x in a.samples() {
                let (s, c) = (t * x).sin_cos();
                re += c;
                im += s;
            }
            max_imag = max_imag.max((im / n).abs());
            re / n
        })
        .collect();
    let mut grid = CfGrid::new(t_grid.to_vec(), values);
    grid.max_imag = max_imag;
    grid
}
