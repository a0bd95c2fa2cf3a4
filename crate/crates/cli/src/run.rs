use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use mdfield::limitlaw::sample_limit;
use mdfield::rng::StreamKey;
use mdfield::stats::{
    convolution_from_composite, ecf, ks_one_sample, ks_two_sample, queue_condition_norm,
    replicate_stats, truncation_check, Moments, StatisticKind,
};
use mdfield::{EmpiricalDist, FieldSpec, LimitLaw, Window};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{CompareMode, ExperimentConfig, ExtraCheck, LawCheck};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Stream tag for reference-law draws; far from any field stream.
const REFERENCE_STREAM: u64 = 0x5EF0_0000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One tolerance comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: String,
    pub reference: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcfPoint {
    pub t: f64,
    pub ecf: f64,
}

/// Everything here is a function of the config and seed alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    pub spec: FieldSpec,
    pub spec_digest: String,
    pub window: Window,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub seed: u64,
    pub statistic: StatisticKind,
    pub fast_path: bool,
    pub moments: Moments,
    pub ks_results: Vec<Outcome>,
    pub comparisons: Vec<Outcome>,
    pub checks: Vec<Outcome>,
    pub ecf_grid: Vec<EcfPoint>,
    pub ecf_max_imag: f64,
    pub verdict: Verdict,
}

impl Report {
    pub fn outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.ks_results.iter().chain(&self.comparisons).chain(&self.checks)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Skip writing artifacts.
    pub dry: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub samples: EmpiricalDist,
    pub out_dir: Option<PathBuf>,
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let (report, samples) = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| compute(&cfg))?,
        None => compute(&cfg)?,
    };
    let out_dir = if opts.dry {
        None
    } else {
        let dir = opts
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
        write_artifacts(&dir, &cfg, &report, &samples, opts)?;
        Some(dir)
    };
    Ok(RunOutcome {
        report,
        samples,
        out_dir,
    })
}

fn compute(cfg: &ExperimentConfig) -> Result<(Report, EmpiricalDist), CliError> {
    let sums = replicate_stats(&cfg.field, &cfg.window, cfg.statistic, cfg.replicates, cfg.seed)?;
    let dist = sums.dist;
    let grid = ecf(&dist, &cfg.t_grid);

    let mut ks_results = Vec::new();
    let mut comparisons = Vec::new();
    for (idx, check) in cfg.laws.iter().enumerate() {
        let tolerance = check.tolerance.unwrap_or(cfg.tolerances.for_mode(check.mode));
        let (value, detail) = compare(cfg, idx, check, &dist)?;
        let outcome = Outcome {
            kind: mode_name(check.mode).into(),
            reference: check.reference.name(),
            value,
            tolerance,
            pass: value <= tolerance,
            detail,
        };
        match check.mode {
            CompareMode::Ks | CompareMode::KsTwoSample => ks_results.push(outcome),
            _ => comparisons.push(outcome),
        }
    }

    let mut checks = Vec::new();
    for check in &cfg.checks {
        checks.push(extra(cfg, check, &dist)?);
    }

    let verdict = if ks_results.iter().chain(&comparisons).chain(&checks).all(|o| o.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        spec: cfg.field.clone(),
        spec_digest: sums.spec_digest,
        window: cfg.window.clone(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        statistic: cfg.statistic,
        fast_path: sums.fast_path,
        moments: sums.moments,
        ks_results,
        comparisons,
        checks,
        ecf_grid: grid
            .t_values
            .iter()
            .zip(&grid.cf_values)
            .map(|(&t, &ecf)| EcfPoint { t, ecf })
            .collect(),
        ecf_max_imag: grid.max_imag,
        verdict,
    };
    Ok((report, dist))
}

fn mode_name(mode: CompareMode) -> &'static str {
    match mode {
        CompareMode::Ks => "ks",
        CompareMode::KsTwoSample => "ks_two_sample",
        CompareMode::Ecf => "ecf",
        CompareMode::Variance => "variance",
    }
}

fn reference_draws(cfg: &ExperimentConfig, idx: usize, law: &LimitLaw, n: usize) -> Vec<f64> {
    let mut rng = StreamKey::root(cfg.seed)
        .child(REFERENCE_STREAM)
        .child(idx as u64)
        .rng();
    (0..n).map(|_| sample_limit(law, &mut rng)).collect()
}

fn compare(
    cfg: &ExperimentConfig,
    idx: usize,
    check: &LawCheck,
    dist: &EmpiricalDist,
) -> Result<(f64, Option<serde_json::Value>), CliError> {
    let law = &check.reference;
    Ok(match check.mode {
        CompareMode::Ks => (ks_one_sample(dist, law)?, None),
        CompareMode::KsTwoSample => {
            let n = check.draws.expect("validated");
            let draws = EmpiricalDist::new(reference_draws(cfg, idx, law, n), law.name())?;
            (ks_two_sample(dist, &draws), Some(json!({ "draws": n })))
        }
        CompareMode::Ecf => {
            let reference = law.cf_grid(&cfg.t_grid)?;
            let empirical = ecf(dist, &cfg.t_grid);
            (empirical.max_gap(&reference), Some(json!({ "reference_cf": reference.cf_values })))
        }
        CompareMode::Variance => {
            let target = law.variance();
            let sample_var = dist.variance();
            let mut gap = (sample_var / target - 1.0).abs();
            let mut detail = json!({ "target": target, "sample_variance": sample_var });
            if let Some(n) = check.draws {
                let draws = EmpiricalDist::new(reference_draws(cfg, idx, law, n), law.name())?;
                let v = draws.variance();
                gap = gap.max((v / target - 1.0).abs());
                detail["reference_variance"] = json!(v);
                detail["draws"] = json!(n);
            }
            (gap, Some(detail))
        }
    })
}

fn extra(cfg: &ExperimentConfig, check: &ExtraCheck, dist: &EmpiricalDist) -> Result<Outcome, CliError> {
    Ok(match check {
        ExtraCheck::QueueNorm { ell, expected } => {
            let value = queue_condition_norm(&cfg.field, *ell)?;
            let gap = (value - expected).abs();
            Outcome {
                kind: "queue_norm".into(),
                reference: format!("ell = {ell}"),
                value,
                tolerance: 0.0,
                pass: gap == 0.0,
                detail: Some(json!({ "expected": expected })),
            }
        }
        ExtraCheck::Convolution => {
            let FieldSpec::Composite { g, h } = &cfg.field else {
                return Err(CliError::Config("convolution check needs a composite field".into()));
            };
            if cfg.statistic != StatisticKind::PartialSum {
                return Err(CliError::Config("convolution check needs partial sums".into()));
            }
            let rep = convolution_from_composite(g, h, &cfg.window, dist, cfg.seed, &cfg.t_grid)?;
            let tolerance = cfg.tolerances.convolution;
            Outcome {
                kind: "convolution".into(),
                reference: "product of part cfs".into(),
                value: rep.product_gap,
                tolerance,
                pass: rep.product_gap <= tolerance,
                detail: Some(json!({ "closed_form_gap": rep.closed_form_gap })),
            }
        }
        ExtraCheck::Truncation { levels } => {
            let results = levels
                .iter()
                .map(|&c| truncation_check(&cfg.field, c))
                .collect::<Result<Vec<_>, _>>()?;
            let tolerance = cfg.tolerances.martingale;
            let residual = results.iter().map(|r| r.martingale_residual).fold(0.0, f64::max);
            let guard = results.iter().map(|r| r.convergence_gap).fold(0.0, f64::max);
            let mut sorted: Vec<_> = results.iter().collect();
            sorted.sort_by(|a, b| a.c.total_cmp(&b.c));
            let monotone = sorted.windows(2).all(|w| w[1].gap_norm < w[0].gap_norm);
            let bounded = results.iter().all(|r| r.passes(tolerance));
            Outcome {
                kind: "truncation".into(),
                reference: "martingale residual".into(),
                value: residual,
                tolerance,
                pass: residual <= tolerance && monotone && bounded && guard < 1e-9,
                detail: Some(json!({
                    "monotone": monotone,
                    "bounds_hold": bounded,
                    "convergence_gap": guard,
                    "levels": results,
                })),
            }
        }
    })
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_artifacts(
    dir: &Path,
    cfg: &ExperimentConfig,
    report: &Report,
    samples: &EmpiricalDist,
    opts: &RunOptions,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let path = dir.join("report.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| CliError::io(&path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io(&path))?;

    let path = dir.join("samples.csv");
    let mut w = create(&path)?;
    samples.write_samples_csv(&mut w).and_then(|_| w.flush()).map_err(io(&path))?;

    let path = dir.join("ecdf.csv");
    let mut w = create(&path)?;
    samples.write_ecdf_csv(&mut w).and_then(|_| w.flush()).map_err(io(&path))?;

    let path = dir.join("ecf.csv");
    let mut w = create(&path)?;
    ecf(samples, &cfg.t_grid).write_csv(&mut w).and_then(|_| w.flush()).map_err(io(&path))?;

    // Run-specific facts live apart from the reproducible report.
    let path = dir.join("meta.json");
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({
        "timestamp_unix": stamp,
        "threads": opts.threads,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    });
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| CliError::io(&path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io(&path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(field: &str, laws: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "name = \"small\"\nseed = 3\nreplicates = 400\nwindow = [32, 32]\n\
             [field]\nkind = \"{field}\"\n{laws}"
        ))
        .unwrap()
    }

    #[test]
    fn dry_run_report() {
        let cfg = small(
            "iid",
            "[[laws]]\nmode = \"ks\"\ntolerance = 0.2\nreference = { law = \"normal\", variance = 1.0 }\n\
             [[laws]]\nmode = \"variance\"\ntolerance = 0.5\nreference = { law = \"normal\", variance = 1.0 }\n\
             [[checks]]\ncheck = \"queue_norm\"\nell = 1\nexpected = 0.0\n",
        );
        let out = run_experiment(&cfg, &RunOptions { dry: true, ..Default::default() }).unwrap();
        let r = &out.report;
        assert_eq!(r.verdict, Verdict::Pass, "{r:#?}");
        assert_eq!(r.ks_results.len(), 1);
        assert_eq!(r.comparisons.len(), 1);
        assert_eq!(r.checks[0].value, 0.0);
        assert_eq!(r.ecf_grid.len(), 13);
        assert_eq!(out.samples.count(), 400);
        assert!(out.out_dir.is_none());
    }

    #[test]
    fn failing_tolerance_gives_fail() {
        let cfg = small(
            "product_iid",
            "[[laws]]\nmode = \"ks\"\ntolerance = 0.001\nreference = { law = \"normal\", variance = 1.0 }\n",
        );
        let out = run_experiment(&cfg, &RunOptions { dry: true, ..Default::default() }).unwrap();
        assert_eq!(out.report.verdict, Verdict::Fail);
    }

    #[test]
    fn seed_override() {
        let cfg = small("product_iid", "");
        let a = run_experiment(&cfg, &RunOptions { dry: true, seed: Some(9), ..Default::default() }).unwrap();
        let mut cfg9 = cfg.clone();
        cfg9.seed = 9;
        let b = run_experiment(&cfg9, &RunOptions { dry: true, ..Default::default() }).unwrap();
        assert_eq!(a.report, b.report);
        assert_eq!(a.report.seed, 9);
    }
}
