//! TOML fixtures for the exact checks.
//!
//! ```toml
//! name = "crt-z6"
//! kind = "independence"
//! points = 6
//! weights = ["1/6", "1/6", "1/6", "1/6", "1/6", "1/6"]
//! generators = [[3, 4, 5, 0, 1, 2], [2, 3, 4, 5, 0, 1], [0, 1, 2, 3, 4, 5]]
//! ```
//!
//! Weights are `"num/den"` strings, permutations are image arrays and
//! partitions are label arrays (any integers; equal labels share a block).

use serde::{Deserialize, Serialize};

use super::{
    check_completely_commuting, verify_independence, verify_lemma_class, verify_prop_pro,
    ExactError, FiltrationGrid, FiniteAction, FiniteSpace, IdentityReport, Partition, Permutation,
    Status,
};

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FixtureCheck {
    /// Commutation of `E[.|F]` and `E[.|J v C]` for a `Z^2` action.
    PropPro {
        generators: Vec<Vec<usize>>,
        invariant: Vec<i64>,
        coarse: Vec<i64>,
    },
    /// Independence of the sub-action invariant algebras.
    Independence { generators: Vec<Vec<usize>> },
    /// `K n F_inf = K n F_-inf` for a pullback filtration.
    LemmaClass {
        permutation: Vec<usize>,
        base: Vec<i64>,
    },
    /// Complete commutation of a filtration grid.
    Commuting {
        index_low: Vec<i64>,
        index_high: Vec<i64>,
        cells: Vec<Vec<i64>>,
        #[serde(default)]
        generators: Option<Vec<Vec<usize>>>,
    },
}

impl FixtureCheck {
    pub fn kind(&self) -> &'static str {
        match self {
            FixtureCheck::PropPro { .. } => "prop_pro",
            FixtureCheck::Independence { .. } => "independence",
            FixtureCheck::LemmaClass { .. } => "lemma_class",
            FixtureCheck::Commuting { .. } => "commuting",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub points: usize,
    pub weights: Vec<String>,
    #[serde(flatten)]
    pub check: FixtureCheck,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureOutcome {
    pub fixture: String,
    pub kind: String,
    pub reports: Vec<IdentityReport>,
}

impl FixtureOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(IdentityReport::passed)
    }
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self, ExactError> {
        let fx: Fixture = toml::from_str(text).map_err(|e| ExactError::Fixture(e.to_string()))?;
        if fx.weights.len() != fx.points {
            return Err(ExactError::Fixture(format!(
                "{}: {} weights for {} points",
                fx.name,
                fx.weights.len(),
                fx.points
            )));
        }
        Ok(fx)
    }

    pub fn space(&self) -> Result<FiniteSpace, ExactError> {
        FiniteSpace::parse(&self.weights)
    }

    /// Runs the check. Structural problems (bad permutations, malformed
    /// grids) are errors; violated hypotheses become `precondition_failed`
    /// reports so that a suite can continue.
    pub fn run(&self) -> Result<FixtureOutcome, ExactError> {
        let space = self.space()?;
        let partition = |labels: &[i64]| -> Result<Partition, ExactError> {
            if labels.len() != self.points {
                return Err(ExactError::Fixture(format!(
                    "{}: partition has {} labels for {} points",
                    self.name,
                    labels.len(),
                    self.points
                )));
            }
            Ok(Partition::from_labels(labels))
        };
        let precondition = |e: ExactError, identity: &str| match e {
            ExactError::Precondition(msg) => Ok(vec![IdentityReport {
                identity: identity.to_string(),
                status: Status::PreconditionFailed,
                witness: Some(serde_json::Value::String(msg)),
            }]),
            other => Err(other),
        };
        let reports = match &self.check {
            FixtureCheck::PropPro {
                generators,
                invariant,
                coarse,
            } => {
                let action = FiniteAction::from_maps(generators.clone())?;
                verify_prop_pro(&space, &action, &partition(invariant)?, &partition(coarse)?)?
            }
            FixtureCheck::Independence { generators } => {
                let action = FiniteAction::from_maps(generators.clone())?;
                match verify_independence(&space, &action) {
                    Ok(r) => vec![r],
                    Err(e) => precondition(e, "independence of sub-action invariants")?,
                }
            }
            FixtureCheck::LemmaClass { permutation, base } => {
                let s = Permutation::new(permutation.clone())?;
                match verify_lemma_class(&space, &s, &partition(base)?) {
                    Ok(r) => vec![r],
                    Err(e) => precondition(e, "K n F_inf = K n F_-inf")?,
                }
            }
            FixtureCheck::Commuting {
                index_low,
                index_high,
                cells,
                generators,
            } => {
                let cells = cells
                    .iter()
                    .map(|c| partition(c))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut grid = FiltrationGrid::new(index_low.clone(), index_high.clone(), cells)?;
                if let Some(g) = generators {
                    grid = grid.with_action(FiniteAction::from_maps(g.clone())?)?;
                }
                let report = check_completely_commuting(&space, &grid)?;
                vec![IdentityReport {
                    identity: "E[E[f|F_a]|F_b] = E[f|F_min(a,b)]".into(),
                    status: if report.holds { Status::Pass } else { Status::Fail },
                    witness: report
                        .witness
                        .map(|w| serde_json::to_value(w).expect("witness serializes")),
                }]
            }
        };
        Ok(FixtureOutcome {
            fixture: self.name.clone(),
            kind: self.check.kind().to_string(),
            reports,
        })
    }
}
