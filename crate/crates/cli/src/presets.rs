//! Built-in experiment configurations, one per reference example.

use crate::config::ExperimentConfig;
use crate::CliError;

const PRESETS: &[(&str, &str)] = &[
    ("bessel", include_str!("../presets/bessel.toml")),
    ("normal-baseline", include_str!("../presets/normal-baseline.toml")),
    ("product-iid-2d", include_str!("../presets/product-iid-2d.toml")),
    ("product-iid-3d", include_str!("../presets/product-iid-3d.toml")),
    ("chaos-2term", include_str!("../presets/chaos-2term.toml")),
    ("eta-squared", include_str!("../presets/eta-squared.toml")),
    ("convolution", include_str!("../presets/convolution.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

/// The TOML source of a preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn preset(name: &str) -> Result<ExperimentConfig, CliError> {
    let text = preset_source(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    ExperimentConfig::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_under_their_own_name() {
        for name in preset_names() {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.name, name);
        }
        assert!(matches!(preset("nope"), Err(CliError::UnknownPreset(_))));
    }
}
