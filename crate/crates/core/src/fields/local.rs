//! Cell functions that depend only on the origin drivers, and the
//! martingale-difference truncation `f_C` built from them.
//!
//! For a two-dimensional cell function `f(x, y)` of the first-axis driver
//! `x` and the second-axis driver `y`,
//!
//! ```text
//! g   = f 1{|f| <= C}
//! f_C = g - E_x g - E_y g + E_xy g
//! ```
//!
//! where `E_x` integrates out `x` only. Rademacher drivers are integrated
//! exactly; Gaussian drivers by adaptive Gauss-Kronrod quadrature, which
//! integrates each smooth piece between the jumps introduced by the
//! indicator, so nested integrals only ever see continuous integrands.

use super::hermite::hermite_table;
use super::spec::{Driver, FieldSpec};
use super::FieldError;
use crate::quad::{expect_normal_adaptive, integrate, NORMAL_CUTOFF};

/// Highest basis order a local cell evaluates without allocating.
pub(crate) const MAX_LOCAL_ORDER: usize = 63;

/// Grid resolution for locating jumps of the indicator.
const CROSSING_GRID: usize = 2400;

/// Points in `(-NORMAL_CUTOFF, NORMAL_CUTOFF)` where `h` changes sign, by a
/// grid scan refined with bisection. Pairs of crossings closer than the
/// grid spacing are not resolved.
fn level_crossings(h: impl Fn(f64) -> f64) -> Vec<f64> {
    let step = 2.0 * NORMAL_CUTOFF / CROSSING_GRID as f64;
    let mut out = Vec::new();
    let mut prev_t = -NORMAL_CUTOFF;
    let mut prev = h(prev_t) <= 0.0;
    for k in 1..=CROSSING_GRID {
        let t = -NORMAL_CUTOFF + k as f64 * step;
        let cur = h(t) <= 0.0;
        if cur != prev {
            let (mut lo, mut hi) = (prev_t, t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (h(mid) <= 0.0) == prev {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = cur;
        prev_t = t;
    }
    out
}

/// A two-dimensional cell function of the origin drivers.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalCell {
    /// `sum lambda h_a(x) h_b(y)`.
    Axes {
        driver: Driver,
        terms: Vec<(u32, u32, f64)>,
    },
    /// `x y s` with Rademacher `x`, `y` and a known sign `s = z (-1)^(i+j)`.
    SignFlip,
    /// The cell's own driver `e`; `x` carries it and `y` is ignored.
    Cell { driver: Driver },
    Zero,
}

impl LocalCell {
    pub fn from_spec(spec: &FieldSpec) -> Result<Self, FieldError> {
        match spec {
            FieldSpec::ProductIid { driver, .. } => Ok(LocalCell::Axes {
                driver: *driver,
                terms: vec![(1, 1, 1.0)],
            }),
            FieldSpec::Chaos { tensor, driver, .. } => {
                if tensor.d != 2 {
                    return Err(FieldError::NonLocal(
                        "truncation is defined for two-dimensional fields".into(),
                    ));
                }
                if tensor.max_order() as usize > MAX_LOCAL_ORDER {
                    return Err(FieldError::BadTensor(format!(
                        "order above {MAX_LOCAL_ORDER} in a truncated field"
                    )));
                }
                Ok(LocalCell::Axes {
                    driver: *driver,
                    terms: tensor
                        .entries
                        .iter()
                        .map(|t| (t.index[0], t.index[1], t.lambda))
                        .collect(),
                })
            }
            FieldSpec::SignFlip { .. } => Ok(LocalCell::SignFlip),
            FieldSpec::Iid { driver, .. } => Ok(LocalCell::Cell { driver: *driver }),
            FieldSpec::Zero => Ok(LocalCell::Zero),
            FieldSpec::Composite { .. } => Err(FieldError::NonLocal(
                "composite fields mix driver families".into(),
            )),
            FieldSpec::Truncated { .. } => Err(FieldError::NonLocal(
                "conditional-expectation terms depend on the whole driver law".into(),
            )),
        }
    }

    /// Law of `x` (and of `y`, where used).
    pub fn driver(&self) -> Driver {
        match self {
            LocalCell::Axes { driver, .. } | LocalCell::Cell { driver } => *driver,
            LocalCell::SignFlip | LocalCell::Zero => Driver::Rademacher,
        }
    }

    /// Whether the value depends on the sign `s`.
    pub fn uses_sign(&self) -> bool {
        matches!(self, LocalCell::SignFlip)
    }

    pub fn eval(&self, x: f64, y: f64, s: f64) -> f64 {
        match self {
            LocalCell::Axes { terms, .. } => {
                let order = terms
                    .iter()
                    .map(|&(a, b, _)| a.max(b) as usize)
                    .max()
                    .unwrap_or(0);
                let mut hx = [0.0; MAX_LOCAL_ORDER + 1];
                let mut hy = [0.0; MAX_LOCAL_ORDER + 1];
                hermite_table(x, &mut hx[..=order]);
                hermite_table(y, &mut hy[..=order]);
                terms
                    .iter()
                    .map(|&(a, b, l)| l * hx[a as usize] * hy[b as usize])
                    .sum()
            }
            LocalCell::SignFlip => x * y * s,
            LocalCell::Cell { .. } => x,
            LocalCell::Zero => 0.0,
        }
    }
}

/// `f_C` for a [`LocalCell`].
#[derive(Clone, Debug)]
pub struct Truncation {
    cell: LocalCell,
    c: f64,
    tol: f64,
    /// `E_xy g` for `s = +1` and `s = -1`.
    mean: [f64; 2],
}

fn sign_slot(s: f64) -> usize {
    usize::from(s < 0.0)
}

impl Truncation {
    /// Absolute quadrature tolerance; integrals over a single smooth piece
    /// run a thousand times tighter.
    pub const DEFAULT_TOL: f64 = 1e-10;

    pub fn new(cell: LocalCell, c: f64) -> Self {
        Self::with_tolerance(cell, c, Self::DEFAULT_TOL)
    }

    pub fn with_tolerance(cell: LocalCell, c: f64, tol: f64) -> Self {
        let mut t = Truncation {
            cell,
            c,
            tol,
            mean: [0.0; 2],
        };
        t.mean = [t.compute_mean(1.0), t.compute_mean(-1.0)];
        t
    }

    pub fn from_spec(spec: &FieldSpec, c: f64) -> Result<Self, FieldError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(FieldError::BadTruncation(c));
        }
        Ok(Self::new(LocalCell::from_spec(spec)?, c))
    }

    pub fn cell(&self) -> &LocalCell {
        &self.cell
    }

    pub fn level(&self) -> f64 {
        self.c
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `E[h(D)]` over one driver variable, for smooth `h`.
    pub fn expect(&self, h: impl Fn(f64) -> f64) -> f64 {
        match self.cell.driver() {
            Driver::Rademacher => 0.5 * (h(1.0) + h(-1.0)),
            Driver::Gaussian => expect_normal_adaptive(h, self.tol),
        }
    }

    /// `E[h(D)]` where `h` may jump where `|along(D)| = C`; Gaussian
    /// integrals are split at those points.
    fn expect_split(&self, h: impl Fn(f64) -> f64, along: impl Fn(f64) -> f64) -> f64 {
        if self.cell.driver() == Driver::Rademacher {
            return 0.5 * (h(1.0) + h(-1.0));
        }
        let mut edges = vec![-NORMAL_CUTOFF];
        edges.extend(level_crossings(|t| along(t).abs() - self.c));
        edges.push(NORMAL_CUTOFF);
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let tol = 1e-3 * self.tol / edges.len() as f64;
        edges
            .windows(2)
            .map(|w| integrate(|t| h(t) * norm * (-0.5 * t * t).exp(), w[0], w[1], tol))
            .sum()
    }

    /// Integrates out `x` at fixed `y`.
    fn along_x(&self, y: f64, s: f64, h: impl Fn(f64) -> f64) -> f64 {
        self.expect_split(h, |x| self.f(x, y, s))
    }

    /// Integrates out `y` at fixed `x`.
    fn along_y(&self, x: f64, s: f64, h: impl Fn(f64) -> f64) -> f64 {
        self.expect_split(h, |y| self.f(x, y, s))
    }

    fn signs(&self) -> &'static [f64] {
        if self.cell.uses_sign() {
            &[1.0, -1.0]
        } else {
            &[1.0]
        }
    }

    pub fn f(&self, x: f64, y: f64, s: f64) -> f64 {
        self.cell.eval(x, y, s)
    }

    /// `f 1{|f| <= C}`.
    pub fn g(&self, x: f64, y: f64, s: f64) -> f64 {
        let v = self.cell.eval(x, y, s);
        if v.abs() <= self.c {
            v
        } else {
            0.0
        }
    }

    /// `f 1{|f| > C}`.
    fn tail(&self, x: f64, y: f64, s: f64) -> f64 {
        let v = self.cell.eval(x, y, s);
        if v.abs() > self.c {
            v
        } else {
            0.0
        }
    }

    /// `E_x g(., y)`.
    pub fn mean_given_y(&self, y: f64, s: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.mean[0],
            _ => self.along_x(y, s, |x| self.g(x, y, s)),
        }
    }

    /// `E_y g(x, .)`.
    pub fn mean_given_x(&self, x: f64, s: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.g(x, 0.0, s),
            _ => self.along_y(x, s, |y| self.g(x, y, s)),
        }
    }

    pub fn mean(&self, s: f64) -> f64 {
        self.mean[sign_slot(s)]
    }

    fn compute_mean(&self, s: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.expect_split(|x| self.g(x, 0.0, s), |x| x),
            _ => self.expect(|y| self.mean_given_y(y, s)),
        }
    }

    /// `f_C` from precomputed partial means.
    #[inline]
    pub fn value_with(&self, x: f64, y: f64, s: f64, given_y: f64, given_x: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.g(x, y, s) - self.mean[0],
            _ => self.g(x, y, s) - given_y - given_x + self.mean(s),
        }
    }

    pub fn value(&self, x: f64, y: f64, s: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.g(x, y, s) - self.mean[0],
            _ => self.value_with(x, y, s, self.mean_given_y(y, s), self.mean_given_x(x, s)),
        }
    }

    /// `E_x f_C(., y)`, integrating the full four-term expression.
    pub fn residual_given_y(&self, y: f64, s: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.expect_split(|x| self.value(x, y, s), |x| x),
            _ => {
                let given_y = self.mean_given_y(y, s);
                self.along_x(y, s, |x| self.value_with(x, y, s, given_y, self.mean_given_x(x, s)))
            }
        }
    }

    /// `E_y f_C(x, .)`.
    pub fn residual_given_x(&self, x: f64, s: f64) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.value(x, 0.0, s),
            _ => {
                let given_x = self.mean_given_x(x, s);
                self.along_y(x, s, |y| self.value_with(x, y, s, self.mean_given_y(y, s), given_x))
            }
        }
    }

    /// `||Q u||^2 = ||u||^2 - ||E_x u||^2 - ||E_y u||^2 + (E u)^2` where
    /// `Q = (I - E_x)(I - E_y)`, averaged over the sign `s`.
    fn projected_norm_sq(&self, u: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let signs = self.signs();
        let mut total = 0.0;
        for &s in signs {
            let full = self.expect(|y| self.along_x(y, s, |x| u(x, y, s).powi(2)));
            let by_y = self.expect(|y| self.along_x(y, s, |x| u(x, y, s)).powi(2));
            let by_x = self.expect(|x| self.along_y(x, s, |y| u(x, y, s)).powi(2));
            let mean = self.expect(|y| self.along_x(y, s, |x| u(x, y, s)));
            total += full - by_y - by_x + mean * mean;
        }
        (total / signs.len() as f64).max(0.0)
    }

    fn cell_norm_sq(&self, u: impl Fn(f64) -> f64, centered: bool) -> f64 {
        let sq = self.expect_split(|x| u(x).powi(2), |x| x);
        let m = if centered {
            self.expect_split(&u, |x| x)
        } else {
            0.0
        };
        (sq - m * m).max(0.0)
    }

    /// `E[f_C^2]`.
    pub fn norm_sq(&self) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self.cell_norm_sq(|x| self.g(x, 0.0, 1.0), true),
            _ => self.projected_norm_sq(|x, y, s| self.g(x, y, s)),
        }
    }

    /// `||f 1{|f| > C}||_2`.
    pub fn tail_norm(&self) -> f64 {
        let sq = match self.cell {
            LocalCell::Cell { .. } => self.cell_norm_sq(|x| self.tail(x, 0.0, 1.0), false),
            _ => {
                let signs = self.signs();
                signs
                    .iter()
                    .map(|&s| self.expect(|y| self.along_x(y, s, |x| self.tail(x, y, s).powi(2))))
                    .sum::<f64>()
                    / signs.len() as f64
            }
        };
        sq.sqrt()
    }

    /// `||f - f_C||_2`.
    ///
    /// For a martingale-difference `f`, `(I - E_x)(I - E_y) f = f`, so
    /// `f - f_C = (I - E_x)(I - E_y)(f 1{|f| > C})`; for a single cell
    /// driver `f - f_C = r - E r` with `r = f 1{|f| > C}`.
    pub fn gap_norm(&self) -> f64 {
        match self.cell {
            LocalCell::Cell { .. } => self
                .cell_norm_sq(|x| self.tail(x, 0.0, 1.0), true)
                .sqrt(),
            _ => self.projected_norm_sq(|x, y, s| self.tail(x, y, s)).sqrt(),
        }
    }

    /// Largest change in `E_xy g` and in `E_x g` on a few probe points when
    /// the quadrature tolerance is tightened a hundredfold.
    pub fn convergence_gap(&self) -> f64 {
        let tight = Truncation::with_tolerance(self.cell.clone(), self.c, self.tol / 100.0);
        let mut gap: f64 = 0.0;
        for &s in self.signs() {
            gap = gap.max((tight.mean(s) - self.mean(s)).abs());
            for &p in &[-2.5, -1.0, -0.3, 0.0, 0.7, 1.9, 3.2] {
                gap = gap.max((tight.mean_given_y(p, s) - self.mean_given_y(p, s)).abs());
                gap = gap.max((tight.mean_given_x(p, s) - self.mean_given_x(p, s)).abs());
            }
        }
        gap
    }
}
