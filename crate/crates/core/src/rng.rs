//! Counter-based random streams.
//!
//! Every random quantity in the crate is a pure function of a [`StreamKey`]
//! and an integer counter, so realizations do not depend on evaluation order
//! or on how replicates are scheduled across threads. Keys are derived by
//! hashing a path of tags (master seed, stream, role, replicate, ...).

use rand::RngCore;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const ROOT_SALT: u64 = 0x6A09_E667_F3BC_C909;
const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// The SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn root(seed: u64) -> Self {
        StreamKey(mix64(seed ^ ROOT_SALT))
    }

    /// Derives an independent sub-stream.
    #[inline]
    pub fn child(self, tag: u64) -> Self {
        StreamKey(mix64(self.0 ^ mix64(tag.wrapping_add(GAMMA))))
    }

    #[inline]
    pub fn word(self, counter: u64) -> u64 {
        mix64(self.0.wrapping_add(counter.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    #[inline]
    pub fn uniform(self, counter: u64) -> f64 {
        ((self.word(counter) >> 11) as f64 + 0.5) * TWO_POW_MINUS_53
    }

    /// Standard normal indexed by a lattice coordinate.
    ///
    /// Coordinates `2p` and `2p + 1` share one Box-Muller pair, so filling a
    /// run of consecutive indices costs one logarithm per two values.
    #[inline]
    pub fn normal(self, index: i64) -> f64 {
        let (radius, angle) = self.polar(index.div_euclid(2));
        if index.rem_euclid(2) == 0 {
            radius * angle.cos()
        } else {
            radius * angle.sin()
        }
    }

    /// Writes `normal(start + k)` into `out[k]`.
    pub fn fill_normal(self, start: i64, out: &mut [f64]) {
        let mut k = 0;
        let len = out.len();
        if len == 0 {
            return;
        }
        if start.rem_euclid(2) == 1 {
            out[0] = self.normal(start);
            k = 1;
        }
        while k + 1 < len {
            let (radius, angle) = self.polar((start + k as i64).div_euclid(2));
            let (s, c) = angle.sin_cos();
            out[k] = radius * c;
            out[k + 1] = radius * s;
            k += 2;
        }
        if k < len {
            out[k] = self.normal(start + k as i64);
        }
    }

    /// Rademacher sign (+1 or -1) indexed by a lattice coordinate.
    #[inline]
    pub fn sign(self, index: i64) -> f64 {
        if self.word(index as u64) >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn fill_sign(self, start: i64, out: &mut [f64]) {
        for (k, v) in out.iter_mut().enumerate() {
            *v = self.sign(start + k as i64);
        }
    }

    /// A sequential generator positioned at the start of this stream.
    pub fn rng(self) -> CounterRng {
        CounterRng { key: self, counter: 0 }
    }

    #[inline]
    fn polar(self, pair: i64) -> (f64, f64) {
        let base = (pair as u64).wrapping_mul(2);
        let u1 = self.uniform(base);
        let u2 = self.uniform(base.wrapping_add(1));
        ((-2.0 * u1.ln()).sqrt(), std::f64::consts::TAU * u2)
    }
}

/// `RngCore` adapter over a [`StreamKey`]; the n-th output word is
/// `key.word(n)`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: StreamKey,
    counter: u64,
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.key.word(self.counter);
        self.counter = self.counter.wrapping_add(1);
        w
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_matches_pointwise() {
        let key = StreamKey::root(7).child(3);
        for start in [-5i64, -4, 0, 1, 2, 17] {
            for len in [0usize, 1, 2, 3, 8, 9] {
                let mut buf = vec![0.0; len];
                key.fill_normal(start, &mut buf);
                for (k, v) in buf.iter().enumerate() {
                    assert_eq!(v.to_bits(), key.normal(start + k as i64).to_bits());
                }
            }
        }
    }

    #[test]
    fn children_differ() {
        let root = StreamKey::root(1);
        assert_ne!(root.child(0), root.child(1));
        assert_ne!(root.child(0).word(0), root.child(1).word(0));
        assert_ne!(StreamKey::root(1), StreamKey::root(2));
    }

    #[test]
    fn normal_moments() {
        let key = StreamKey::root(11);
        let n = 200_000;
        let mut buf = vec![0.0; n];
        key.fill_normal(1, &mut buf);
        let mean = buf.iter().sum::<f64>() / n as f64;
        let var = buf.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let kurt = buf.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        assert!((kurt - 3.0).abs() < 0.06, "fourth moment {kurt}");
    }

    #[test]
    fn signs_balanced() {
        let key = StreamKey::root(5).child(9);
        let n = 100_000;
        let s: f64 = (0..n).map(|i| key.sign(i)).sum();
        assert!(s.abs() / (n as f64) < 0.01);
    }

    #[test]
    fn uniform_in_open_interval() {
        let key = StreamKey::root(0);
        for c in 0..10_000 {
            let u = key.uniform(c);
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
