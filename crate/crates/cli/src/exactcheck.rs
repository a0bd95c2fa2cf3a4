use std::path::{Path, PathBuf};

use mdfield::exactalg::fixture::{Fixture, FixtureOutcome};
use mdfield::fields::{torus_parity, TorusParity};
use serde::Serialize;

use crate::CliError;

/// Largest exponent for the torus parity table.
pub const PARITY_MAX: u32 = 64;

const BUNDLED: &[(&str, &str)] = &[
    ("prop-pro-torus.toml", include_str!("../fixtures/exact/prop-pro-torus.toml")),
    ("prop-pro-invariants.toml", include_str!("../fixtures/exact/prop-pro-invariants.toml")),
    ("independence-2x3x5.toml", include_str!("../fixtures/exact/independence-2x3x5.toml")),
    ("independence-z6.toml", include_str!("../fixtures/exact/independence-z6.toml")),
    ("lemma-two-cycles.toml", include_str!("../fixtures/exact/lemma-two-cycles.toml")),
    ("lemma-identity.toml", include_str!("../fixtures/exact/lemma-identity.toml")),
    ("lemma-shift-discrete.toml", include_str!("../fixtures/exact/lemma-shift-discrete.toml")),
    ("commuting-product.toml", include_str!("../fixtures/exact/commuting-product.toml")),
    (
        "commuting-uniform-halves.toml",
        include_str!("../fixtures/exact/commuting-uniform-halves.toml"),
    ),
];

/// The deliberately broken filtration, for demonstrating a failing run.
pub const BROKEN_FIXTURE: &str = include_str!("../fixtures/broken/broken-filtration.toml");

#[derive(Clone, Debug)]
pub enum FixtureSource {
    Bundled,
    Directory(PathBuf),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSummary {
    pub fixtures: Vec<FixtureOutcome>,
    pub parity: Vec<TorusParity>,
}

impl ExactSummary {
    pub fn all_passed(&self) -> bool {
        self.fixtures.iter().all(FixtureOutcome::all_passed)
            && self.parity.iter().all(TorusParity::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FixtureOutcome> {
        self.fixtures.iter().filter(|f| !f.all_passed())
    }
}

fn load_dir(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            files.push((path.display().to_string(), text));
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::NoFixtures(dir.to_path_buf()));
    }
    Ok(files)
}

/// Runs every fixture and the torus parity table.
pub fn run_exactcheck(source: &FixtureSource) -> Result<ExactSummary, CliError> {
    let files: Vec<(String, String)> = match source {
        FixtureSource::Bundled => BUNDLED
            .iter()
            .map(|(n, t)| (n.to_string(), t.to_string()))
            .collect(),
        FixtureSource::Directory(dir) => load_dir(dir)?,
    };
    let mut fixtures = Vec::with_capacity(files.len());
    for (name, text) in &files {
        let fx = Fixture::parse(text).map_err(|e| CliError::Fixture(name.clone(), e))?;
        fixtures.push(fx.run().map_err(|e| CliError::Fixture(name.clone(), e))?);
    }
    let parity = (0..=PARITY_MAX).map(torus_parity).collect();
    Ok(ExactSummary { fixtures, parity })
}
