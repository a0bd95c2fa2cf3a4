use super::partition::{Partition, UnionFind};
use super::space::FiniteSpace;
use super::ExactError;

/// A bijection of `{0, .., n-1}`; `apply(x)` is the image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, ExactError> {
        let n = map.len();
        let mut hit = vec![false; n];
        for (x, &y) in map.iter().enumerate() {
            if y >= n {
                return Err(ExactError::NotPermutation(format!(
                    "image {y} of point {x} is out of range 0..{n}"
                )));
            }
            if std::mem::replace(&mut hit[y], true) {
                return Err(ExactError::NotPermutation(format!("point {y} is hit twice")));
            }
        }
        Ok(Permutation(map))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// `x -> x + step (mod n)`.
    pub fn cyclic_shift(n: usize, step: usize) -> Self {
        Permutation((0..n).map(|x| (x + step) % n).collect())
    }

    /// Shift of one coordinate on the product `Z_{dims[0]} x .. x Z_{dims[d-1]}`
    /// (row-major, last coordinate fastest).
    pub fn coordinate_shift(dims: &[usize], axis: usize, step: usize) -> Self {
        let n: usize = dims.iter().product();
        let stride: usize = dims[axis + 1..].iter().product();
        let len = dims[axis];
        Permutation(
            (0..n)
                .map(|x| {
                    let c = (x / stride) % len;
                    let nc = (c + step) % len;
                    x - c * stride + nc * stride
                })
                .collect(),
        )
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `self` after `other`: `x -> self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&y| self.0[y]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.size()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn pow(&self, k: usize) -> Permutation {
        let mut out = Permutation::identity(self.size());
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    pub fn preserves(&self, space: &FiniteSpace) -> bool {
        self.size() == space.size()
            && self
                .0
                .iter()
                .enumerate()
                .all(|(x, &y)| space.weight(x) == space.weight(y))
    }

    /// The sigma-algebra of `self` is mapped onto itself.
    pub fn leaves_invariant(&self, p: &Partition) -> Result<bool, ExactError> {
        Ok(&p.pullback(&self.0)? == p)
    }
}

/// A `Z^d` action on a finite set given by `d` pairwise commuting
/// generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAction {
    generators: Vec<Permutation>,
}

impl FiniteAction {
    pub fn new(generators: Vec<Permutation>) -> Result<Self, ExactError> {
        let first = generators.first().ok_or(ExactError::NoGenerators)?;
        let n = first.size();
        for g in &generators {
            if g.size() != n {
                return Err(ExactError::SizeMismatch {
                    left: n,
                    right: g.size(),
                });
            }
        }
        for a in 0..generators.len() {
            for b in a + 1..generators.len() {
                if generators[a].compose(&generators[b]) != generators[b].compose(&generators[a]) {
                    return Err(ExactError::NonCommuting(a, b));
                }
            }
        }
        Ok(FiniteAction { generators })
    }

    pub fn from_maps(maps: Vec<Vec<usize>>) -> Result<Self, ExactError> {
        FiniteAction::new(
            maps.into_iter()
                .map(Permutation::new)
                .collect::<Result<_, _>>()?,
        )
    }

    /// Unit shifts of each coordinate of `Z_{dims[0]} x .. x Z_{dims[d-1]}`.
    pub fn coordinate_rotations(dims: &[usize]) -> Self {
        FiniteAction {
            generators: (0..dims.len())
                .map(|axis| Permutation::coordinate_shift(dims, axis, 1))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn size(&self) -> usize {
        self.generators[0].size()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn generator(&self, axis: usize) -> &Permutation {
        &self.generators[axis]
    }

    pub fn preserves(&self, space: &FiniteSpace) -> bool {
        self.generators.iter().all(|g| g.preserves(space))
    }

    /// Partition into orbits of the group generated by the chosen
    /// generators: the sigma-algebra of sets invariant under all of them.
    pub fn orbit_partition(&self, subset: &[usize]) -> Result<Partition, ExactError> {
        if subset.is_empty() {
            return Err(ExactError::EmptyGeneratorSubset);
        }
        let mut uf = UnionFind::new(self.size());
        for &t in subset {
            let g = self
                .generators
                .get(t)
                .ok_or(ExactError::GeneratorOutOfRange(t))?;
            for x in 0..g.size() {
                uf.union(x, g.apply(x));
            }
        }
        Ok(uf.into_partition())
    }

    pub fn invariant_partition(&self) -> Partition {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.orbit_partition(&all).expect("action has generators")
    }

    pub fn is_transitive(&self) -> bool {
        self.invariant_partition().block_count() == 1
    }
}
