//! Quadrature rules: Gauss-Hermite for the standard normal weight,
//! Gauss-Legendre, and adaptive Gauss-Kronrod (7, 15).

use std::f64::consts::PI;

/// Half-width of the window used when integrating against the standard
/// normal density; the mass outside is below 1e-32.
pub const NORMAL_CUTOFF: f64 = 12.0;

/// Nodes and weights for `E[g(N)]`, `N ~ N(0, 1)`: weights sum to one and the
/// rule is exact for polynomials of degree `< 2n`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        // Newton iteration on the orthonormal physicists' Hermite recurrence,
        // then rescale to the probabilists' weight exp(-x^2/2)/sqrt(2 pi).
        let mut x_phys = vec![0.0; n];
        let mut w_phys = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let pim4 = PI.powf(-0.25);
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x_phys[0],
                3 => 1.91 * z - 0.91 * x_phys[1],
                _ => 2.0 * z - x_phys[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x_phys[i] = z;
            x_phys[n - 1 - i] = -z;
            w_phys[i] = 2.0 / (pp * pp);
            w_phys[n - 1 - i] = w_phys[i];
        }
        let scale = 1.0 / PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = x_phys
            .iter()
            .zip(&w_phys)
            .map(|(&x, &w)| (x * std::f64::consts::SQRT_2, w * scale))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussHermite {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Returns the Kronrod estimate, the Kronrod-Gauss difference and the
/// Kronrod estimate of `int |f|` (used as a roundoff floor).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut absolute = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        kronrod += WGK[j] * (lo + hi);
        absolute += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    (
        kronrod * half,
        ((kronrod - gauss) * half).abs(),
        absolute * half.abs(),
    )
}

/// Most subintervals [`integrate`] will create.
const MAX_INTERVALS: usize = 2000;

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    absolute: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]` to
/// absolute tolerance `tol`: the subinterval with the largest error
/// estimate is bisected until the summed estimate drops below `tol` (or
/// below the roundoff level of `int |f|`), with at most a fixed number of
/// subintervals. Jump discontinuities cost about one bisection per bit.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut heap = std::collections::BinaryHeap::new();
    let (value, err, absolute) = gk15(&f, a, b);
    let (mut total_err, mut total_abs) = (err, absolute);
    heap.push(Piece {
        a,
        b,
        value,
        err,
        absolute,
    });
    while total_err > tol && total_err > 1e-14 * total_abs && heap.len() < MAX_INTERVALS {
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        total_abs -= worst.absolute;
        for (lo, hi) in [(worst.a, m), (m, worst.b)] {
            let (v, e, ab) = gk15(&f, lo, hi);
            total_err += e;
            total_abs += ab;
            heap.push(Piece {
                a: lo,
                b: hi,
                value: v,
                err: e,
                absolute: ab,
            });
        }
        // Refresh the running sums to limit cancellation error.
        if heap.len() % 256 == 0 {
            total_err = heap.iter().map(|p| p.err).sum();
            total_abs = heap.iter().map(|p| p.absolute).sum();
        }
    }
    heap.iter().map(|p| p.value).sum()
}

/// `E[g(N)]` for a standard normal `N` by adaptive quadrature on
/// `[-NORMAL_CUTOFF, NORMAL_CUTOFF]`; suitable for piecewise smooth `g`.
pub fn expect_normal_adaptive(g: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let norm = 1.0 / (2.0 * PI).sqrt();
    // Split at 0 so symmetric integrands see symmetric subdivisions.
    let f = |x: f64| g(x) * norm * (-0.5 * x * x).exp();
    integrate(&f, -NORMAL_CUTOFF, 0.0, 0.5 * tol) + integrate(&f, 0.0, NORMAL_CUTOFF, 0.5 * tol)
}
