use serde::{Deserialize, Serialize};

use super::hermite::hermite_table;
use super::local::{LocalCell, Truncation};
use super::spec::{CoeffTensor, Driver, FieldSpec};
use super::window::Window;
use super::FieldError;
use crate::rng::StreamKey;

const AXIS_TAG: u64 = 0x10;
const COIN_TAG: u64 = 0x20;
const CELL_TAG: u64 = 0x30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_digest: String,
    pub seed: u64,
    pub replicate: u64,
}

/// Cell values over a window, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub window: Window,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl Realization {
    /// Value at 1-based lattice coordinates.
    pub fn at(&self, index: &[usize]) -> f64 {
        assert_eq!(index.len(), self.window.dim(), "index dimension");
        let mut flat = 0;
        for (axis, &i) in index.iter().enumerate() {
            let len = self.window.len(axis);
            assert!((1..=len).contains(&i), "index {i} outside 1..={len}");
            flat = flat * len + (i - 1);
        }
        self.values[flat]
    }

    /// Same window and provenance with values scaled by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Realization {
        Realization {
            window: self.window.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

fn replicate_key(seed: u64, stream: u64, replicate: u64) -> StreamKey {
    StreamKey::root(seed).child(stream).child(replicate)
}

fn draw(key: StreamKey, driver: Driver, out: &mut [f64]) {
    match driver {
        Driver::Gaussian => key.fill_normal(1, out),
        Driver::Rademacher => key.fill_sign(1, out),
    }
}

fn axis_values(key: StreamKey, axis: usize, driver: Driver, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    draw(key.child(AXIS_TAG + axis as u64), driver, &mut v);
    v
}

fn line_key(key: StreamKey, prefix: &[usize]) -> StreamKey {
    prefix
        .iter()
        .fold(key.child(CELL_TAG), |k, &p| k.child(p as u64 + 1))
}

/// `(-1)^i` for the 1-based lattice index of 0-based position `p`.
#[inline]
fn alternating(p: usize) -> f64 {
    if p % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, Debug)]
enum Compiled {
    Product { driver: Driver, stream: u64 },
    Chaos { tensor: CoeffTensor, driver: Driver, stream: u64 },
    SignFlip { stream: u64 },
    Iid { driver: Driver, stream: u64 },
    Zero,
    Truncated { trunc: Box<Truncation>, stream: u64 },
    Composite(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn new(spec: &FieldSpec) -> Result<Self, FieldError> {
        Ok(match spec {
            FieldSpec::ProductIid { driver, stream } => Compiled::Product {
                driver: *driver,
                stream: *stream,
            },
            FieldSpec::Chaos {
                tensor,
                driver,
                stream,
            } => Compiled::Chaos {
                tensor: tensor.clone(),
                driver: *driver,
                stream: *stream,
            },
            FieldSpec::SignFlip { stream } => Compiled::SignFlip { stream: *stream },
            FieldSpec::Iid { driver, stream } => Compiled::Iid {
                driver: *driver,
                stream: *stream,
            },
            FieldSpec::Zero => Compiled::Zero,
            FieldSpec::Composite { g, h } => {
                Compiled::Composite(Box::new(Compiled::new(g)?), Box::new(Compiled::new(h)?))
            }
            FieldSpec::Truncated { base, c } => Compiled::Truncated {
                trunc: Box::new(Truncation::from_spec(base, *c)?),
                stream: base.streams().into_iter().next().unwrap_or(0),
            },
        })
    }
}

/// Draws realizations of one spec over one window under one master seed.
#[derive(Clone, Debug)]
pub struct Sampler {
    window: Window,
    seed: u64,
    digest: String,
    compiled: Compiled,
}

impl Sampler {
    pub fn new(spec: &FieldSpec, window: &Window, seed: u64) -> Result<Self, FieldError> {
        spec.check_window(window.dim())?;
        Ok(Sampler {
            window: window.clone(),
            seed,
            digest: spec.digest(),
            compiled: Compiled::new(spec)?,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Driver values for one replicate.
    pub fn replicate(&self, replicate: u64) -> Replicate<'_> {
        Replicate {
            sampler: self,
            replicate,
            plan: self.plan(&self.compiled, replicate),
        }
    }

    fn plan<'a>(&'a self, c: &'a Compiled, r: u64) -> Plan<'a> {
        let w = &self.window;
        match c {
            Compiled::Product { driver, stream } => {
                let key = replicate_key(self.seed, *stream, r);
                Plan::Product {
                    axes: (0..w.dim())
                        .map(|t| axis_values(key, t, *driver, w.len(t)))
                        .collect(),
                }
            }
            Compiled::Chaos {
                tensor,
                driver,
                stream,
            } => {
                let key = replicate_key(self.seed, *stream, r);
                let mut orders: Vec<Vec<u32>> = vec![Vec::new(); w.dim()];
                for term in &tensor.entries {
                    for (axis, &a) in term.index.iter().enumerate() {
                        if !orders[axis].contains(&a) {
                            orders[axis].push(a);
                        }
                    }
                }
                let max = tensor.max_order() as usize;
                let mut tables = Vec::with_capacity(w.dim());
                let mut h = vec![0.0; max + 1];
                for (axis, axis_orders) in orders.iter().enumerate() {
                    let raw = axis_values(key, axis, *driver, w.len(axis));
                    let mut table = vec![Vec::with_capacity(raw.len()); axis_orders.len()];
                    for &x in &raw {
                        hermite_table(x, &mut h);
                        for (slot, &a) in axis_orders.iter().enumerate() {
                            table[slot].push(h[a as usize]);
                        }
                    }
                    tables.push(table);
                }
                let terms = tensor
                    .entries
                    .iter()
                    .map(|t| {
                        let slots = t
                            .index
                            .iter()
                            .enumerate()
                            .map(|(axis, a)| {
                                orders[axis].iter().position(|b| b == a).expect("order")
                            })
                            .collect();
                        (slots, t.lambda)
                    })
                    .collect();
                Plan::Chaos { tables, terms }
            }
            Compiled::SignFlip { stream } => {
                let key = replicate_key(self.seed, *stream, r);
                let mut x = axis_values(key, 0, Driver::Rademacher, w.len(0));
                let mut y = axis_values(key, 1, Driver::Rademacher, w.len(1));
                for (p, v) in x.iter_mut().enumerate() {
                    *v *= alternating(p);
                }
                for (p, v) in y.iter_mut().enumerate() {
                    *v *= alternating(p);
                }
                Plan::SignFlip {
                    x,
                    y,
                    z: key.child(COIN_TAG).sign(0),
                }
            }
            Compiled::Iid { driver, stream } => Plan::Iid {
                key: replicate_key(self.seed, *stream, r),
                driver: *driver,
            },
            Compiled::Zero => Plan::Zero,
            Compiled::Truncated { trunc, stream } => {
                let key = replicate_key(self.seed, *stream, r);
                let driver = trunc.cell().driver();
                match trunc.cell() {
                    LocalCell::Cell { .. } => Plan::TruncatedCell { trunc, key, driver },
                    cell => {
                        let x = axis_values(key, 0, driver, w.len(0));
                        let y = axis_values(key, 1, driver, w.len(1));
                        let z = if cell.uses_sign() {
                            key.child(COIN_TAG).sign(0)
                        } else {
                            1.0
                        };
                        let both = cell.uses_sign();
                        let tab = |v: &[f64], f: &dyn Fn(f64, f64) -> f64| -> Vec<[f64; 2]> {
                            v.iter()
                                .map(|&u| [f(u, 1.0), if both { f(u, -1.0) } else { 0.0 }])
                                .collect()
                        };
                        let given_x = tab(&x, &|u, s| trunc.mean_given_x(u, s));
                        let given_y = tab(&y, &|u, s| trunc.mean_given_y(u, s));
                        Plan::Truncated {
                            trunc,
                            x,
                            y,
                            z,
                            given_x,
                            given_y,
                        }
                    }
                }
            }
            Compiled::Composite(g, h) => {
                Plan::Composite(Box::new(self.plan(g, r)), Box::new(self.plan(h, r)))
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Plan<'a> {
    Product {
        axes: Vec<Vec<f64>>,
    },
    Chaos {
        /// `tables[axis][slot][position]` holds `h_a` of the axis driver.
        tables: Vec<Vec<Vec<f64>>>,
        terms: Vec<(Vec<usize>, f64)>,
    },
    SignFlip {
        /// Axis signs already multiplied by `(-1)^i`.
        x: Vec<f64>,
        y: Vec<f64>,
        z: f64,
    },
    Iid {
        key: StreamKey,
        driver: Driver,
    },
    Zero,
    Truncated {
        trunc: &'a Truncation,
        x: Vec<f64>,
        y: Vec<f64>,
        z: f64,
        given_x: Vec<[f64; 2]>,
        given_y: Vec<[f64; 2]>,
    },
    TruncatedCell {
        trunc: &'a Truncation,
        key: StreamKey,
        driver: Driver,
    },
    Composite(Box<Plan<'a>>, Box<Plan<'a>>),
}

impl Plan<'_> {
    fn add_line(&self, prefix: &[usize], out: &mut [f64], scratch: &mut Vec<f64>) {
        match self {
            Plan::Product { axes } => {
                let c: f64 = prefix.iter().enumerate().map(|(t, &p)| axes[t][p]).product();
                let last = axes.last().expect("axes");
                for (o, v) in out.iter_mut().zip(last) {
                    *o += c * v;
                }
            }
            Plan::Chaos { tables, terms } => {
                let d = tables.len();
                for (slots, lambda) in terms {
                    let c: f64 = lambda
                        * prefix
                            .iter()
                            .enumerate()
                            .map(|(t, &p)| tables[t][slots[t]][p])
                            .product::<f64>();
                    for (o, v) in out.iter_mut().zip(&tables[d - 1][slots[d - 1]]) {
                        *o += c * v;
                    }
                }
            }
            Plan::SignFlip { x, y, z } => {
                let c = z * x[prefix[0]];
                for (o, v) in out.iter_mut().zip(y) {
                    *o += c * v;
                }
            }
            Plan::Iid { key, driver } => {
                scratch.resize(out.len(), 0.0);
                draw(line_key(*key, prefix), *driver, scratch);
                for (o, v) in out.iter_mut().zip(scratch.iter()) {
                    *o += v;
                }
            }
            Plan::Zero => {}
            Plan::Truncated {
                trunc,
                x,
                y,
                z,
                given_x,
                given_y,
            } => {
                let i = prefix[0];
                for (j, o) in out.iter_mut().enumerate() {
                    let s = if trunc.cell().uses_sign() {
                        z * alternating(i) * alternating(j)
                    } else {
                        1.0
                    };
                    let slot = usize::from(s < 0.0);
                    *o += trunc.value_with(x[i], y[j], s, given_y[j][slot], given_x[i][slot]);
                }
            }
            Plan::TruncatedCell { trunc, key, driver } => {
                scratch.resize(out.len(), 0.0);
                draw(line_key(*key, prefix), *driver, scratch);
                for (o, &e) in out.iter_mut().zip(scratch.iter()) {
                    *o += trunc.value_with(e, 0.0, 1.0, 0.0, 0.0);
                }
            }
            Plan::Composite(g, h) => {
                g.add_line(prefix, out, scratch);
                h.add_line(prefix, out, scratch);
            }
        }
    }

    /// Unnormalized sum over the window.
    fn total(&self) -> Option<f64> {
        match self {
            Plan::Product { axes } => Some(axes.iter().map(|a| a.iter().sum::<f64>()).product()),
            Plan::Chaos { tables, terms } => Some(
                terms
                    .iter()
                    .map(|(slots, lambda)| {
                        lambda
                            * slots
                                .iter()
                                .enumerate()
                                .map(|(t, &s)| tables[t][s].iter().sum::<f64>())
                                .product::<f64>()
                    })
                    .sum(),
            ),
            Plan::SignFlip { x, y, z } => Some(z * x.iter().sum::<f64>() * y.iter().sum::<f64>()),
            Plan::Zero => Some(0.0),
            Plan::Composite(g, h) => Some(g.total()? + h.total()?),
            _ => None,
        }
    }

    /// Unnormalized row sums `sum_j f(i, j)` of a two-dimensional window.
    fn add_row_totals(&self, rows: &mut [f64]) -> bool {
        match self {
            Plan::Product { axes } => {
                let s: f64 = axes[1].iter().sum();
                for (r, u) in rows.iter_mut().zip(&axes[0]) {
                    *r += u * s;
                }
                true
            }
            Plan::Chaos { tables, terms } => {
                for (slots, lambda) in terms {
                    let s: f64 = lambda * tables[1][slots[1]].iter().sum::<f64>();
                    for (r, u) in rows.iter_mut().zip(&tables[0][slots[0]]) {
                        *r += u * s;
                    }
                }
                true
            }
            Plan::SignFlip { x, y, z } => {
                let s: f64 = z * y.iter().sum::<f64>();
                for (r, u) in rows.iter_mut().zip(x) {
                    *r += u * s;
                }
                true
            }
            Plan::Zero => true,
            Plan::Composite(g, h) => g.add_row_totals(rows) && h.add_row_totals(rows),
            _ => false,
        }
    }

    fn factorized(&self) -> bool {
        match self {
            Plan::Product { .. } | Plan::Chaos { .. } | Plan::SignFlip { .. } | Plan::Zero => true,
            Plan::Composite(g, h) => g.factorized() && h.factorized(),
            _ => false,
        }
    }
}

/// One replicate's drivers, able to produce cells line by line or, for
/// product-structured specs, window sums directly from the axis sequences.
#[derive(Clone, Debug)]
pub struct Replicate<'a> {
    sampler: &'a Sampler,
    replicate: u64,
    plan: Plan<'a>,
}

impl Replicate<'_> {
    pub fn id(&self) -> u64 {
        self.replicate
    }

    /// Writes the cells of one last-axis line; `prefix` holds 0-based
    /// positions on the leading axes.
    pub fn fill_line(&self, prefix: &[usize], out: &mut [f64], scratch: &mut Vec<f64>) {
        out.fill(0.0);
        self.plan.add_line(prefix, out, scratch);
    }

    /// Whether the window sums are available in `O(l + m + n)`.
    pub fn has_fast_path(&self) -> bool {
        self.plan.factorized()
    }

    /// `(cells)^(-1/2) sum f` from the axis sequences.
    pub fn fast_partial_sum(&self) -> Option<f64> {
        let n = self.sampler.window.cells() as f64;
        self.plan.total().map(|t| t / n.sqrt())
    }

    /// `n^(-1/2) sum_j f(i, j)` for each row `i` of a two-dimensional window.
    pub fn fast_row_sums(&self) -> Option<Vec<f64>> {
        let w = &self.sampler.window;
        if w.dim() != 2 {
            return None;
        }
        let mut rows = vec![0.0; w.len(0)];
        if !self.plan.add_row_totals(&mut rows) {
            return None;
        }
        let scale = (w.len(1) as f64).sqrt();
        for r in &mut rows {
            *r /= scale;
        }
        Some(rows)
    }

    pub fn realize(&self) -> Realization {
        let w = &self.sampler.window;
        let line = w.line_len();
        let mut values = vec![0.0; w.cells()];
        let mut scratch = Vec::new();
        for (l, chunk) in values.chunks_mut(line).enumerate() {
            self.fill_line(&w.line_prefix(l), chunk, &mut scratch);
        }
        Realization {
            window: w.clone(),
            values,
            provenance: Provenance {
                spec_digest: self.sampler.digest.clone(),
                seed: self.sampler.seed,
                replicate: self.replicate,
            },
        }
    }
}

pub fn sample(
    spec: &FieldSpec,
    window: &Window,
    seed: u64,
    replicate: u64,
) -> Result<Realization, FieldError> {
    Ok(Sampler::new(spec, window, seed)?.replicate(replicate).realize())
}

/// `U_i V_j (W_k)` with standard normal axis sequences, replicate 0.
pub fn sample_product_iid(window: &Window, seed: u64) -> Realization {
    sample(&FieldSpec::product_iid(), window, seed, 0).expect("product field fits any window")
}

pub fn sample_chaos_field(
    tensor: &CoeffTensor,
    window: &Window,
    seed: u64,
) -> Result<Realization, FieldError> {
    sample(&FieldSpec::chaos(tensor.clone()), window, seed, 0)
}

pub fn sample_signflip(window: &Window, seed: u64) -> Result<Realization, FieldError> {
    sample(&FieldSpec::sign_flip(), window, seed, 0)
}

pub fn sample_iid_field(window: &Window, driver: Driver, seed: u64) -> Realization {
    sample(&FieldSpec::iid(driver), window, seed, 0).expect("iid field fits any window")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(l: &[usize]) -> Window {
        Window::new(l.to_vec()).unwrap()
    }

    #[test]
    fn product_cells_factor() {
        let w = window(&[3, 4, 5]);
        let r = sample_product_iid(&w, 7);
        assert_eq!(r.values.len(), 60);
        let u: Vec<f64> = (1..=3).map(|i| r.at(&[i, 1, 1])).collect();
        // U_i V_j W_k: ratios along an axis do not depend on the other indices.
        for i in 1..=3 {
            for j in 1..=4 {
                for k in 1..=5 {
                    let ratio = r.at(&[i, j, k]) / r.at(&[1, j, k]);
                    assert!((ratio - u[i - 1] / u[0]).abs() < 1e-9 * ratio.abs().max(1.0));
                }
            }
        }
        assert_eq!(r, sample_product_iid(&w, 7));
        assert_ne!(r.values, sample_product_iid(&w, 8).values);
    }

    #[test]
    fn drivers_do_not_depend_on_window_size() {
        let small = sample_product_iid(&window(&[4, 4]), 3);
        let big = sample_product_iid(&window(&[9, 6]), 3);
        for i in 1..=4 {
            for j in 1..=4 {
                assert_eq!(small.at(&[i, j]), big.at(&[i, j]));
            }
        }
        let small = sample_iid_field(&window(&[2, 3, 4]), Driver::Gaussian, 3);
        let big = sample_iid_field(&window(&[5, 5, 8]), Driver::Gaussian, 3);
        assert_eq!(small.at(&[2, 3, 4]), big.at(&[2, 3, 4]));
    }

    #[test]
    fn first_order_chaos_matches_product() {
        let t = CoeffTensor::new(3, vec![(vec![1, 1, 1], 1.0)]).unwrap();
        let w = window(&[4, 3, 5]);
        let chaos = sample_chaos_field(&t, &w, 11).unwrap();
        let prod = sample_product_iid(&w, 11);
        assert_eq!(chaos.values, prod.values);
        assert_ne!(chaos.provenance.spec_digest, prod.provenance.spec_digest);
        assert!(sample_chaos_field(&t, &window(&[3, 3]), 1).is_err());
    }

    #[test]
    fn chaos_restricted_to_a_sub_tensor() {
        let w = window(&[5, 6]);
        let full = CoeffTensor::new(2, vec![(vec![1, 2], 0.6), (vec![3, 1], 0.8)]).unwrap();
        let part_a = CoeffTensor::new(2, vec![(vec![1, 2], 0.6)]).unwrap();
        let part_b = CoeffTensor::new(2, vec![(vec![3, 1], 0.8)]).unwrap();
        let f = sample_chaos_field(&full, &w, 2).unwrap();
        let a = sample_chaos_field(&part_a, &w, 2).unwrap();
        let b = sample_chaos_field(&part_b, &w, 2).unwrap();
        for k in 0..f.values.len() {
            assert!((f.values[k] - a.values[k] - b.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_flip_cells_and_blocks() {
        let w = window(&[7, 9]);
        let r = sample_signflip(&w, 5).unwrap();
        assert!(r.values.iter().all(|v| *v == 1.0 || *v == -1.0));
        for i in 1..7 {
            for j in 1..9 {
                let p = r.at(&[i, j]) * r.at(&[i + 1, j]) * r.at(&[i, j + 1]) * r.at(&[i + 1, j + 1]);
                assert_eq!(p, 1.0);
            }
        }
        assert!(matches!(
            sample_signflip(&window(&[2, 2, 2]), 0),
            Err(FieldError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fast_paths_match_direct_summation() {
        let t = CoeffTensor::new(2, vec![(vec![1, 1], 0.6), (vec![2, 3], 0.8)]).unwrap();
        let specs = [
            FieldSpec::product_iid(),
            FieldSpec::chaos(t),
            FieldSpec::sign_flip(),
            FieldSpec::composite(FieldSpec::product_iid(), FieldSpec::sign_flip().on_stream(1)),
        ];
        let w = window(&[13, 8]);
        for spec in &specs {
            let s = Sampler::new(spec, &w, 9).unwrap();
            for rep in 0..3 {
                let r = s.replicate(rep);
                let real = r.realize();
                let direct: f64 = real.values.iter().sum::<f64>() / (w.cells() as f64).sqrt();
                let fast = r.fast_partial_sum().unwrap();
                assert!((fast - direct).abs() < 1e-12 * direct.abs().max(1.0), "{spec:?}");
                let rows = r.fast_row_sums().unwrap();
                for i in 0..13 {
                    let row: f64 = real.values[i * 8..(i + 1) * 8].iter().sum::<f64>() / 8f64.sqrt();
                    assert!((rows[i] - row).abs() < 1e-12);
                }
            }
        }
        let iid = Sampler::new(&FieldSpec::iid(Driver::Gaussian), &w, 1).unwrap();
        assert!(iid.replicate(0).fast_partial_sum().is_none());
        assert!(!iid.replicate(0).has_fast_path());
    }

    #[test]
    fn composite_is_cellwise_sum() {
        let w = window(&[4, 6]);
        let g = FieldSpec::product_iid();
        let h = FieldSpec::iid(Driver::Gaussian).on_stream(1);
        let c = sample(&FieldSpec::composite(g.clone(), h.clone()), &w, 4, 2).unwrap();
        let gr = sample(&g, &w, 4, 2).unwrap();
        let hr = sample(&h, &w, 4, 2).unwrap();
        for k in 0..24 {
            assert!((c.values[k] - gr.values[k] - hr.values[k]).abs() < 1e-15);
        }
        let z = sample(&FieldSpec::composite(g.clone(), FieldSpec::Zero), &w, 4, 2).unwrap();
        assert_eq!(z.values, gr.values);
    }

    #[test]
    fn truncated_sign_flip_identity_at_level_one() {
        let w = window(&[6, 5]);
        let base = FieldSpec::sign_flip();
        let t = FieldSpec::Truncated {
            base: Box::new(base.clone()),
            c: 1.0,
        };
        assert_eq!(sample(&t, &w, 3, 1).unwrap().values, sample(&base, &w, 3, 1).unwrap().values);
    }

    #[test]
    fn truncated_product_is_bounded_and_shares_drivers() {
        let w = window(&[20, 20]);
        let base = FieldSpec::product_iid();
        let t = FieldSpec::Truncated {
            base: Box::new(base.clone()),
            c: 1.0,
        };
        let tr = sample(&t, &w, 3, 0).unwrap();
        let br = sample(&base, &w, 3, 0).unwrap();
        let mut changed = 0;
        for (a, b) in tr.values.iter().zip(&br.values) {
            assert!(a.abs() <= 4.0);
            if b.abs() <= 1.0 {
                // Symmetric drivers: all correction terms vanish.
                assert!((a - b).abs() < 1e-10);
            } else {
                changed += 1;
                assert!(a.abs() < 1e-10);
            }
        }
        assert!(changed > 0);
    }
}
