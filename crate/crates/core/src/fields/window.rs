use serde::{Deserialize, Serialize};

use super::FieldError;

/// A box `[1, l] x [1, m] (x [1, n])` of lattice sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Window {
    lengths: Vec<usize>,
}

impl Window {
    pub fn new(lengths: Vec<usize>) -> Result<Self, FieldError> {
        if !(2..=3).contains(&lengths.len()) {
            return Err(FieldError::BadWindow(format!(
                "dimension must be 2 or 3, got {}",
                lengths.len()
            )));
        }
        if lengths.contains(&0) {
            return Err(FieldError::BadWindow("side lengths must be >= 1".into()));
        }
        let mut cells: usize = 1;
        for &l in &lengths {
            cells = cells.checked_mul(l).ok_or(FieldError::WindowOverflow)?;
        }
        // Sums use i64 lattice coordinates.
        if cells > i64::MAX as usize {
            return Err(FieldError::WindowOverflow);
        }
        Ok(Window { lengths })
    }

    pub fn square(side: usize) -> Self {
        Window::new(vec![side, side]).expect("valid square window")
    }

    pub fn cube(side: usize) -> Self {
        Window::new(vec![side, side, side]).expect("valid cubic window")
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn len(&self, axis: usize) -> usize {
        self.lengths[axis]
    }

    pub fn cells(&self) -> usize {
        self.lengths.iter().product()
    }

    /// Length of the last axis, the unit of line-wise generation.
    pub fn line_len(&self) -> usize {
        *self.lengths.last().expect("nonempty")
    }

    pub fn line_count(&self) -> usize {
        self.cells() / self.line_len()
    }

    /// 0-based positions of the leading axes for line number `line`.
    pub fn line_prefix(&self, line: usize) -> Vec<usize> {
        let mut prefix = vec![0; self.dim() - 1];
        let mut rest = line;
        for axis in (0..self.dim() - 1).rev() {
            prefix[axis] = rest % self.lengths[axis];
            rest /= self.lengths[axis];
        }
        prefix
    }
}

impl TryFrom<Vec<usize>> for Window {
    type Error = FieldError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Window::new(v)
    }
}

impl From<Window> for Vec<usize> {
    fn from(w: Window) -> Self {
        w.lengths
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.lengths.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("x"))
    }
}
