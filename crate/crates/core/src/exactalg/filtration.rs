use serde::Serialize;

use super::action::FiniteAction;
use super::partition::{cond_exp, Partition};
use super::space::{FiniteSpace, Q};
use super::ExactError;

/// A filtration indexed by a finite box of `Z^d`, one partition per index,
/// stored row-major with the last coordinate varying fastest.
#[derive(Clone, Debug)]
pub struct FiltrationGrid {
    low: Vec<i64>,
    high: Vec<i64>,
    cells: Vec<Partition>,
    action: Option<FiniteAction>,
}

impl FiltrationGrid {
    /// Validates shape and monotonicity: the partition at `a` refines the one
    /// at `b` whenever `b <= a` coordinatewise.
    pub fn new(low: Vec<i64>, high: Vec<i64>, cells: Vec<Partition>) -> Result<Self, ExactError> {
        if low.is_empty() || low.len() != high.len() {
            return Err(ExactError::MalformedGrid(
                "index bounds must be nonempty and of equal dimension".into(),
            ));
        }
        if low.iter().zip(&high).any(|(l, h)| l > h) {
            return Err(ExactError::MalformedGrid("empty index range".into()));
        }
        let expected: usize = low
            .iter()
            .zip(&high)
            .map(|(l, h)| (h - l + 1) as usize)
            .product();
        if cells.len() != expected {
            return Err(ExactError::MalformedGrid(format!(
                "expected {expected} cells, got {}",
                cells.len()
            )));
        }
        let n = cells[0].size();
        if let Some(c) = cells.iter().find(|c| c.size() != n) {
            return Err(ExactError::SizeMismatch {
                left: n,
                right: c.size(),
            });
        }
        let grid = FiltrationGrid {
            low,
            high,
            cells,
            action: None,
        };
        for idx in grid.indices() {
            for axis in 0..grid.dim() {
                if idx[axis] == grid.high[axis] {
                    continue;
                }
                let mut next = idx.clone();
                next[axis] += 1;
                if !grid.cell(&next).refines(grid.cell(&idx))? {
                    return Err(ExactError::MalformedGrid(format!(
                        "not monotone: cell {next:?} does not refine cell {idx:?}"
                    )));
                }
            }
        }
        Ok(grid)
    }

    /// Attaches an action and checks stationarity: the cell at `v + e_t` is
    /// the preimage of the cell at `v` under generator `t`.
    pub fn with_action(mut self, action: FiniteAction) -> Result<Self, ExactError> {
        if action.dim() != self.dim() || action.size() != self.space_size() {
            return Err(ExactError::MalformedGrid(
                "action does not match grid dimension or space".into(),
            ));
        }
        for idx in self.indices() {
            for axis in 0..self.dim() {
                if idx[axis] == self.high[axis] {
                    continue;
                }
                let mut next = idx.clone();
                next[axis] += 1;
                let shifted = self.cell(&idx).pullback(action.generator(axis).as_slice())?;
                if &shifted != self.cell(&next) {
                    return Err(ExactError::MalformedGrid(format!(
                        "not stationary along axis {axis} at {idx:?}"
                    )));
                }
            }
        }
        self.action = Some(action);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn space_size(&self) -> usize {
        self.cells[0].size()
    }

    pub fn action(&self) -> Option<&FiniteAction> {
        self.action.as_ref()
    }

    pub fn indices(&self) -> Vec<Vec<i64>> {
        let mut out = vec![self.low.clone()];
        for axis in 0..self.dim() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (self.low[axis]..=self.high[axis]).map(move |v| {
                        let mut p = prefix.clone();
                        p[axis] = v;
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn cell(&self, index: &[i64]) -> &Partition {
        let mut flat = 0usize;
        for axis in 0..self.dim() {
            let span = (self.high[axis] - self.low[axis] + 1) as usize;
            flat = flat * span + (index[axis] - self.low[axis]) as usize;
        }
        &self.cells[flat]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutingWitness {
    /// `f` is the indicator of this point.
    pub point: usize,
    pub first: Vec<i64>,
    pub second: Vec<i64>,
    /// `E[E[f | F_first] | F_second]`
    pub lhs: Vec<String>,
    /// `E[f | F_min(first, second)]`
    pub rhs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutingReport {
    pub holds: bool,
    pub witness: Option<CommutingWitness>,
}

/// Checks `E[E[f | F_a] | F_b] = E[f | F_min(a, b)]` for every point indicator
/// `f` and every ordered pair of indices; by linearity this covers all `f`.
pub fn check_completely_commuting(
    space: &FiniteSpace,
    grid: &FiltrationGrid,
) -> Result<CommutingReport, ExactError> {
    if space.size() != grid.space_size() {
        return Err(ExactError::SizeMismatch {
            left: space.size(),
            right: grid.space_size(),
        });
    }
    let indices = grid.indices();
    for point in 0..space.size() {
        let f = space.indicator(point);
        let first_stage: Vec<Vec<Q>> = indices
            .iter()
            .map(|a| cond_exp(space, &f, grid.cell(a)))
            .collect::<Result<_, _>>()?;
        for (ia, a) in indices.iter().enumerate() {
            for (ib, b) in indices.iter().enumerate() {
                let lhs = cond_exp(space, &first_stage[ia], grid.cell(b))?;
                let lo: Vec<i64> = a.iter().zip(b).map(|(x, y)| *x.min(y)).collect();
                let rhs = if &lo == a {
                    first_stage[ia].clone()
                } else if &lo == b {
                    first_stage[ib].clone()
                } else {
                    cond_exp(space, &f, grid.cell(&lo))?
                };
                if lhs != rhs {
                    return Ok(CommutingReport {
                        holds: false,
                        witness: Some(CommutingWitness {
                            point,
                            first: a.clone(),
                            second: b.clone(),
                            lhs: lhs.iter().map(ToString::to_string).collect(),
                            rhs: rhs.iter().map(ToString::to_string).collect(),
                        }),
                    });
                }
            }
        }
    }
    Ok(CommutingReport {
        holds: true,
        witness: None,
    })
}
