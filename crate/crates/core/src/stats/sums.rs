use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::empirical::{EmpiricalDist, Moments};
use super::StatsError;
use crate::fields::{FieldSpec, Realization, Replicate, Sampler, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// `(cells)^(-1/2) sum f`.
    PartialSum,
    /// Mean over rows of the squared normalized row sums (two-dimensional).
    VStatistic,
}

impl StatisticKind {
    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::PartialSum => "partial_sum",
            StatisticKind::VStatistic => "v_statistic",
        }
    }
}

/// How replicate statistics are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumPath {
    /// Factorized sums when the spec allows, cell enumeration otherwise.
    Auto,
    /// Always enumerate cells.
    Generic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub spec_digest: String,
    pub window: Window,
    pub replicates: usize,
    pub seed: u64,
    pub statistic: StatisticKind,
    /// `true` when every replicate used the factorized path.
    pub fast_path: bool,
    pub dist: EmpiricalDist,
    pub moments: Moments,
}

pub fn partial_sum(r: &Realization) -> f64 {
    r.values.iter().sum::<f64>() / (r.values.len() as f64).sqrt()
}

pub fn v_statistic(r: &Realization) -> Result<f64, StatsError> {
    if r.window.dim() != 2 {
        return Err(StatsError::NeedsTwoDimensions(r.window.dim()));
    }
    let n = r.window.len(1);
    let scale = (n as f64).sqrt();
    let rows: Vec<f64> = r.values.chunks(n).map(|row| row.iter().sum::<f64>() / scale).collect();
    Ok(mean_square(&rows))
}

fn mean_square(rows: &[f64]) -> f64 {
    rows.iter().map(|v| v * v).sum::<f64>() / rows.len() as f64
}

/// Statistic of one replicate without storing the realization.
pub fn replicate_statistic(rep: &Replicate<'_>, window: &Window, kind: StatisticKind, path: SumPath) -> f64 {
    if path == SumPath::Auto {
        let fast = match kind {
            StatisticKind::PartialSum => rep.fast_partial_sum(),
            StatisticKind::VStatistic => rep.fast_row_sums().map(|rows| mean_square(&rows)),
        };
        if let Some(v) = fast {
            return v;
        }
    }
    let line = window.line_len();
    let mut cells = vec![0.0; line];
    let mut scratch = Vec::new();
    let mut total = 0.0;
    let mut squares = 0.0;
    for l in 0..window.line_count() {
        rep.fill_line(&window.line_prefix(l), &mut cells, &mut scratch);
        let s: f64 = cells.iter().sum();
        total += s;
        squares += s * s;
    }
    match kind {
        StatisticKind::PartialSum => total / (window.cells() as f64).sqrt(),
        // On a two-dimensional window each line is a row.
        StatisticKind::VStatistic => squares / line as f64 / window.line_count() as f64,
    }
}

/// Statistics of replicates `0..count`, in replicate order.
pub fn replicate_values(
    sampler: &Sampler,
    kind: StatisticKind,
    count: usize,
    path: SumPath,
) -> Result<Vec<f64>, StatsError> {
    let window = sampler.window();
    if kind == StatisticKind::VStatistic && window.dim() != 2 {
        return Err(StatsError::NeedsTwoDimensions(window.dim()));
    }
    Ok((0..count as u64)
        .into_par_iter()
        .map(|r| replicate_statistic(&sampler.replicate(r), window, kind, path))
        .collect())
}

/// `R` independent replicate statistics of `spec` over `window`.
pub fn replicate_stats(
    spec: &FieldSpec,
    window: &Window,
    kind: StatisticKind,
    replicates: usize,
    seed: u64,
) -> Result<SumReport, StatsError> {
    replicate_stats_with(spec, window, kind, replicates, seed, SumPath::Auto)
}

pub fn replicate_stats_with(
    spec: &FieldSpec,
    window: &Window,
    kind: StatisticKind,
    replicates: usize,
    seed: u64,
    path: SumPath,
) -> Result<SumReport, StatsError> {
    if replicates < 2 {
        return Err(StatsError::TooFewSamples(replicates));
    }
    let sampler = Sampler::new(spec, window, seed)?;
    let values = replicate_values(&sampler, kind, replicates, path)?;
    let fast_path = path == SumPath::Auto && {
        let rep = sampler.replicate(0);
        match kind {
            StatisticKind::PartialSum => rep.has_fast_path(),
            StatisticKind::VStatistic => rep.fast_row_sums().is_some(),
        }
    };
    let dist = EmpiricalDist::new(values, format!("{}:{seed}", sampler.digest()))?;
    Ok(SumReport {
        spec_digest: sampler.digest().to_string(),
        window: window.clone(),
        replicates,
        seed,
        statistic: kind,
        fast_path,
        moments: dist.moments(),
        dist,
    })
}
