use std::collections::HashMap;
use std::hash::Hash;

use num::Zero;

use super::space::{FiniteSpace, Q};
use super::ExactError;

/// A partition of `{0, .., n-1}`, the atoms of a finite sigma-algebra.
///
/// Labels are kept canonical (numbered by first occurrence), so two
/// partitions are equal as sigma-algebras iff they are equal as values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    block_count: usize,
}

impl Partition {
    /// Builds a partition from arbitrary per-point labels; points sharing a
    /// label share a block.
    pub fn from_labels<L: Eq + Hash + Clone>(labels: &[L]) -> Self {
        let mut seen: HashMap<L, usize> = HashMap::new();
        let mut canon = Vec::with_capacity(labels.len());
        for l in labels {
            let next = seen.len();
            canon.push(*seen.entry(l.clone()).or_insert(next));
        }
        Partition {
            block_count: seen.len(),
            labels: canon,
        }
    }

    pub fn from_blocks(size: usize, blocks: &[&[usize]]) -> Result<Self, ExactError> {
        let mut labels = vec![usize::MAX; size];
        for (b, block) in blocks.iter().enumerate() {
            for &p in block.iter() {
                if p >= size {
                    return Err(ExactError::MalformedGrid(format!("point {p} out of range")));
                }
                if labels[p] != usize::MAX {
                    return Err(ExactError::MalformedGrid(format!("point {p} in two blocks")));
                }
                labels[p] = b;
            }
        }
        if let Some(p) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(ExactError::MalformedGrid(format!("point {p} in no block")));
        }
        Ok(Partition::from_labels(&labels))
    }

    pub fn trivial(size: usize) -> Self {
        Partition {
            labels: vec![0; size],
            block_count: usize::from(size > 0),
        }
    }

    pub fn discrete(size: usize) -> Self {
        Partition {
            labels: (0..size).collect(),
            block_count: size,
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, point: usize) -> usize {
        self.labels[point]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.block_count];
        for (p, &l) in self.labels.iter().enumerate() {
            out[l].push(p);
        }
        out
    }

    fn same_host(&self, other: &Partition) -> Result<(), ExactError> {
        if self.size() != other.size() {
            return Err(ExactError::SizeMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(())
    }

    /// Coarsest partition refining both (the sigma-algebra `p v q`).
    pub fn join(&self, other: &Partition) -> Result<Partition, ExactError> {
        self.same_host(other)?;
        let pairs: Vec<(usize, usize)> = self
            .labels
            .iter()
            .copied()
            .zip(other.labels.iter().copied())
            .collect();
        Ok(Partition::from_labels(&pairs))
    }

    /// Finest partition coarsening both (the sigma-algebra `p n q`): the
    /// connected components of the block-overlap graph.
    pub fn meet(&self, other: &Partition) -> Result<Partition, ExactError> {
        self.same_host(other)?;
        let mut uf = UnionFind::new(self.size());
        let mut first_in_p = vec![usize::MAX; self.block_count];
        let mut first_in_q = vec![usize::MAX; other.block_count];
        for point in 0..self.size() {
            for (first, label) in [
                (&mut first_in_p, self.labels[point]),
                (&mut first_in_q, other.labels[point]),
            ] {
                if first[label] == usize::MAX {
                    first[label] = point;
                } else {
                    uf.union(first[label], point);
                }
            }
        }
        Ok(uf.into_partition())
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> Result<bool, ExactError> {
        self.same_host(coarser)?;
        let mut image = vec![usize::MAX; self.block_count];
        for (p, &l) in self.labels.iter().enumerate() {
            let target = coarser.labels[p];
            if image[l] == usize::MAX {
                image[l] = target;
            } else if image[l] != target {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A vector is measurable iff it is constant on every block.
    pub fn is_measurable<T: PartialEq>(&self, f: &[T]) -> bool {
        self.measurability_witness(f).is_none()
    }

    /// Two points of one block where `f` differs, if any.
    pub fn measurability_witness<T: PartialEq>(&self, f: &[T]) -> Option<(usize, usize)> {
        let mut rep = vec![usize::MAX; self.block_count];
        for (p, &l) in self.labels.iter().enumerate() {
            if rep[l] == usize::MAX {
                rep[l] = p;
            } else if f[rep[l]] != f[p] {
                return Some((rep[l], p));
            }
        }
        None
    }

    /// `x ~ y` in the result iff `perm(x) ~ perm(y)` here; as a sigma-algebra
    /// this is the preimage `perm^{-1}(self)`.
    pub fn pullback(&self, perm: &[usize]) -> Result<Partition, ExactError> {
        if perm.len() != self.size() {
            return Err(ExactError::SizeMismatch {
                left: self.size(),
                right: perm.len(),
            });
        }
        let labels: Vec<usize> = perm.iter().map(|&x| self.labels[x]).collect();
        Ok(Partition::from_labels(&labels))
    }
}

/// `E[f | p]`: on each block, the weighted average of `f` over the block.
pub fn cond_exp(space: &FiniteSpace, f: &[Q], p: &Partition) -> Result<Vec<Q>, ExactError> {
    if f.len() != space.size() {
        return Err(ExactError::SizeMismatch {
            left: space.size(),
            right: f.len(),
        });
    }
    if p.size() != space.size() {
        return Err(ExactError::SizeMismatch {
            left: space.size(),
            right: p.size(),
        });
    }
    let mut mass = vec![Q::zero(); p.block_count()];
    let mut integral = vec![Q::zero(); p.block_count()];
    for (point, &l) in p.labels().iter().enumerate() {
        let w = space.weight(point);
        mass[l] += w;
        integral[l] += w * &f[point];
    }
    let mut avg = Vec::with_capacity(p.block_count());
    for (block, (m, i)) in mass.into_iter().zip(integral).enumerate() {
        if m.is_zero() {
            return Err(ExactError::ZeroWeightBlock { block });
        }
        avg.push(i / m);
    }
    Ok(p.labels().iter().map(|&l| avg[l].clone()).collect())
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    pub(crate) fn into_partition(mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_labels(&roots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;
    use proptest::prelude::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn pq() -> (Partition, Partition) {
        let p = Partition::from_blocks(4, &[&[0, 1], &[2, 3]]).unwrap();
        let q = Partition::from_blocks(4, &[&[0, 2], &[1, 3]]).unwrap();
        (p, q)
    }

    #[test]
    fn join_examples() {
        let (p, q) = pq();
        assert_eq!(p.join(&q).unwrap(), Partition::discrete(4));
        assert_eq!(p.join(&Partition::trivial(4)).unwrap(), p);
        assert_eq!(p.join(&p).unwrap(), p);
    }

    #[test]
    fn meet_examples() {
        let (p, q) = pq();
        assert_eq!(p.meet(&q).unwrap(), Partition::trivial(4));
        assert_eq!(p.meet(&Partition::discrete(4)).unwrap(), p);
        assert_eq!(p.meet(&p).unwrap(), p);
    }

    #[test]
    fn mismatched_hosts() {
        let (p, _) = pq();
        let r = Partition::trivial(5);
        assert!(matches!(p.join(&r), Err(ExactError::SizeMismatch { .. })));
        assert!(matches!(p.meet(&r), Err(ExactError::SizeMismatch { .. })));
    }

    #[test]
    fn cond_exp_examples() {
        let space = FiniteSpace::uniform(4).unwrap();
        let (p, _) = pq();
        let f = vec![q(0), q(2), q(4), q(6)];
        assert_eq!(cond_exp(&space, &f, &p).unwrap(), vec![q(1), q(1), q(5), q(5)]);
        assert_eq!(
            cond_exp(&space, &f, &Partition::trivial(4)).unwrap(),
            vec![q(3); 4]
        );
        assert_eq!(cond_exp(&space, &f, &Partition::discrete(4)).unwrap(), f);
    }

    #[test]
    fn cond_exp_zero_weight_block() {
        let space = FiniteSpace::parse(&["1/2", "1/2", "0"]).unwrap();
        let p = Partition::from_blocks(3, &[&[0, 1], &[2]]).unwrap();
        let f = vec![q(1), q(2), q(3)];
        assert_eq!(
            cond_exp(&space, &f, &p),
            Err(ExactError::ZeroWeightBlock { block: 1 })
        );
    }

    #[test]
    fn refinement_and_measurability() {
        let (p, q) = pq();
        assert!(Partition::discrete(4).refines(&p).unwrap());
        assert!(p.refines(&Partition::trivial(4)).unwrap());
        assert!(!p.refines(&q).unwrap());
        assert!(p.is_measurable(&[1, 1, 7, 7]));
        assert_eq!(p.measurability_witness(&[1, 2, 7, 7]), Some((0, 1)));
    }

    fn arb_case() -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>)> {
        (1usize..=24).prop_flat_map(|n| {
            (
                prop::collection::vec(0u8..5, n),
                prop::collection::vec(0u8..5, n),
                prop::collection::vec(1u8..6, n),
                prop::collection::vec(0u8..9, n),
            )
        })
    }

    fn space_from(w: &[u8]) -> FiniteSpace {
        let total: i64 = w.iter().map(|&x| x as i64).sum();
        FiniteSpace::new(
            w.iter()
                .map(|&x| Q::new((x as i64).into(), total.into()))
                .collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn lattice_absorption((a, b, _, _) in arb_case()) {
            let p = Partition::from_labels(&a);
            let q = Partition::from_labels(&b);
            prop_assert_eq!(p.meet(&p.join(&q).unwrap()).unwrap(), p.clone());
            prop_assert_eq!(p.join(&p.meet(&q).unwrap()).unwrap(), p.clone());
            prop_assert!(p.join(&q).unwrap().refines(&p).unwrap());
            prop_assert!(q.refines(&p.meet(&q).unwrap()).unwrap());
        }

        #[test]
        fn tower_property((a, b, w, _) in arb_case()) {
            let space = space_from(&w);
            let fine = Partition::from_labels(&a);
            // q coarsened by p: make q = p meet something.
            let coarse = fine.meet(&Partition::from_labels(&b)).unwrap();
            for point in 0..space.size() {
                let f = space.indicator(point);
                let two_step = cond_exp(&space, &cond_exp(&space, &f, &fine).unwrap(), &coarse).unwrap();
                prop_assert_eq!(two_step, cond_exp(&space, &f, &coarse).unwrap());
            }
        }

        #[test]
        fn projection_contracts((a, _, w, f) in arb_case()) {
            let space = space_from(&w);
            let p = Partition::from_labels(&a);
            let f: Vec<Q> = f.iter().map(|&x| q(x as i64 - 4)).collect();
            let e = cond_exp(&space, &f, &p).unwrap();
            prop_assert!(space.inner(&e, &e) <= space.inner(&f, &f));
            prop_assert!(p.is_measurable(&e));
            // E[f] is preserved.
            let one = vec![Q::one(); space.size()];
            prop_assert_eq!(space.inner(&e, &one), space.inner(&f, &one));
        }

        #[test]
        fn relabeling_equivariance((a, b, w, f) in arb_case(), shift in 0usize..24) {
            let n = a.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let space = space_from(&w);
            let p = Partition::from_labels(&a);
            let q = Partition::from_labels(&b);
            let f: Vec<Q> = f.iter().map(|&x| q_of(x)).collect();
            // Relabel points: new point i is old point perm[i].
            let w2: Vec<u8> = perm.iter().map(|&i| w[i]).collect();
            let space2 = space_from(&w2);
            let p2 = p.pullback(&perm).unwrap();
            let q2 = q.pullback(&perm).unwrap();
            let f2: Vec<Q> = perm.iter().map(|&i| f[i].clone()).collect();
            let joined2 = p2.join(&q2).unwrap();
            prop_assert_eq!(joined2, p.join(&q).unwrap().pullback(&perm).unwrap());
            prop_assert_eq!(p2.meet(&q2).unwrap(), p.meet(&q).unwrap().pullback(&perm).unwrap());
            let e = cond_exp(&space, &f, &p).unwrap();
            let e2 = cond_exp(&space2, &f2, &p2).unwrap();
            let e_perm: Vec<Q> = perm.iter().map(|&i| e[i].clone()).collect();
            prop_assert_eq!(e2, e_perm);
        }
    }

    fn q_of(x: u8) -> Q {
        Q::new((x as i64).into(), 3.into())
    }
}
