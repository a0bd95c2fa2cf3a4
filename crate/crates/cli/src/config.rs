use std::path::{Path, PathBuf};

use mdfield::stats::StatisticKind;
use mdfield::{FieldSpec, LimitLaw, Window};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// How a reference law is compared with the replicate statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    /// One-sample KS against the law's distribution function.
    Ks,
    /// Two-sample KS against draws from the law.
    KsTwoSample,
    /// Largest gap between the empirical and the law's cf on `t_grid`.
    Ecf,
    /// Relative gap between sample variance and the law's variance (and
    /// the variance of law draws, when `draws` is set).
    Variance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawCheck {
    pub mode: CompareMode,
    pub reference: LimitLaw,
    /// Number of reference draws for sampling-based modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    /// Overrides the mode's default tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Checks that do not compare against a reference law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtraCheck {
    /// `||E[f | F_(inf, -l) v I_1]||_2` equals `expected` exactly.
    QueueNorm { ell: u64, expected: f64 },
    /// Composite cf against the product of the part cfs.
    Convolution,
    /// Martingale condition, monotone gap and `4 x tail` bound of `f_C`.
    Truncation { levels: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_ks")]
    pub ks: f64,
    #[serde(default = "Tolerances::default_ecf")]
    pub ecf: f64,
    /// Relative.
    #[serde(default = "Tolerances::default_variance")]
    pub variance: f64,
    #[serde(default = "Tolerances::default_ecf")]
    pub convolution: f64,
    #[serde(default = "Tolerances::default_martingale")]
    pub martingale: f64,
}

impl Tolerances {
    fn default_ks() -> f64 {
        0.02
    }
    fn default_ecf() -> f64 {
        0.02
    }
    fn default_variance() -> f64 {
        0.05
    }
    fn default_martingale() -> f64 {
        1e-8
    }

    pub fn for_mode(&self, mode: CompareMode) -> f64 {
        match mode {
            CompareMode::Ks | CompareMode::KsTwoSample => self.ks,
            CompareMode::Ecf => self.ecf,
            CompareMode::Variance => self.variance,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ks: Self::default_ks(),
            ecf: Self::default_ecf(),
            variance: Self::default_variance(),
            convolution: Self::default_ecf(),
            martingale: Self::default_martingale(),
        }
    }
}

/// One reproducible batch run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub field: FieldSpec,
    pub window: Window,
    #[serde(default = "default_statistic")]
    pub statistic: StatisticKind,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub laws: Vec<LawCheck>,
    #[serde(default)]
    pub checks: Vec<ExtraCheck>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_statistic() -> StatisticKind {
    StatisticKind::PartialSum
}

/// 13 points on `[0, 3]`.
pub fn default_t_grid() -> Vec<f64> {
    mdfield::CfGrid::linspace(0.0, 3.0, 13)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every invariant that can be decided before sampling.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.replicates < 2 {
            return bad(format!("replicates must be >= 2, got {}", self.replicates));
        }
        self.field.validate()?;
        self.field.check_window(self.window.dim())?;
        if self.statistic == StatisticKind::VStatistic && self.window.dim() != 2 {
            return bad(format!(
                "v_statistic needs a two-dimensional window, got {}",
                self.window
            ));
        }
        if let Some(t) = self.t_grid.iter().find(|t| !t.is_finite()) {
            return bad(format!("t_grid entry {t} is not finite"));
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("ks", tol.ks),
            ("ecf", tol.ecf),
            ("variance", tol.variance),
            ("convolution", tol.convolution),
            ("martingale", tol.martingale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        for check in &self.laws {
            check.reference.validate()?;
            let law = check.reference.name();
            match check.mode {
                CompareMode::Ks if !check.reference.has_cdf() => {
                    return bad(format!("mode ks needs a distribution function; {law} has none"))
                }
                CompareMode::KsTwoSample if check.draws.unwrap_or(0) < 2 => {
                    return bad(format!("mode ks_two_sample against {law} needs draws >= 2"))
                }
                CompareMode::Ecf if self.t_grid.is_empty() => {
                    return bad("mode ecf needs a nonempty t_grid".into())
                }
                CompareMode::Ecf if !check.reference.is_symmetric() => {
                    return bad(format!("mode ecf compares real parts; {law} is not symmetric"))
                }
                CompareMode::Ecf => {
                    // Laws without a closed-form cf fail here rather than mid-run.
                    check.reference.cf(1.0)?;
                }
                CompareMode::Variance if check.draws == Some(1) => {
                    return bad("mode variance needs draws >= 2".into())
                }
                _ => {}
            }
            if let Some(t) = check.tolerance {
                if !(t.is_finite() && t > 0.0) {
                    return bad(format!("tolerance override for {law} must be positive, got {t}"));
                }
            }
        }
        for check in &self.checks {
            match check {
                ExtraCheck::Convolution => {
                    if !matches!(self.field, FieldSpec::Composite { .. }) {
                        return bad("convolution check needs a composite field".into());
                    }
                    if self.t_grid.is_empty() {
                        return bad("convolution check needs a nonempty t_grid".into());
                    }
                }
                ExtraCheck::Truncation { levels } => {
                    if levels.is_empty() {
                        return bad("truncation check needs at least one level".into());
                    }
                    for &c in levels {
                        mdfield::stats::truncate_fc(&self.field, c)?;
                    }
                }
                ExtraCheck::QueueNorm { .. } => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "tiny"
        seed = 1
        replicates = 4
        window = [8, 8]
        [field]
        kind = "product_iid"
    "#;

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.statistic, StatisticKind::PartialSum);
        assert_eq!(cfg.t_grid.len(), 13);
        assert_eq!(cfg.tolerances, Tolerances::default());
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_single_replicate() {
        let text = MINIMAL.replace("replicates = 4", "replicates = 1");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("replicates must be >= 2"), "{err}");
    }

    #[test]
    fn rejects_unknown_spec_and_unsupported_pairs() {
        let text = MINIMAL.replace("product_iid", "brownian_sheet");
        assert!(matches!(ExperimentConfig::parse(&text), Err(CliError::Config(_))));
        let text = format!(
            "{MINIMAL}\n[[laws]]\nmode = \"ks\"\nreference = {{ law = \"product_of_normals\", d = 3 }}\n"
        );
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("distribution function"), "{err}");
        let text = MINIMAL.replace("[8, 8]", "[8, 8, 8]");
        assert!(ExperimentConfig::parse(&text).is_ok());
        let text = MINIMAL.replace("[8, 8]", "[8, 8, 8]").replace("seed = 1", "seed = 1\nstatistic = \"v_statistic\"");
        assert!(ExperimentConfig::parse(&text).is_err());
        let text = MINIMAL.replace("seed = 1\n", "");
        assert!(ExperimentConfig::parse(&text).is_err());
    }
}
