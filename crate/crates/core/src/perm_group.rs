//! Finite permutation groups acting on coordinates of ℝⁿ.
//!
//! Indices are 0-based internally; JSON uses 1-based image arrays.
//! The action is on coordinates: `apply(g, x)[i] = x[g(i)]`. With the product
//! `(g * h)(i) = h(g(i))` this gives `apply(g, apply(h, x)) = apply(g * h, x)`.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default closure cap.
pub const DEFAULT_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(one_based: Vec<usize>) -> Result<Self> {
        Permutation::from_one_based(&one_based)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.one_based()
    }
}

impl Permutation {
    /// Builds a permutation from 0-based images.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidPermutation(format!(
                    "images {:?} are not a bijection of 0..{n}",
                    images
                )));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&i| i == 0) {
            return Err(Error::InvalidPermutation(format!(
                "1-based images {:?} contain 0",
                images
            )));
        }
        Self::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// Transposition of `i` and `j` (0-based).
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        if i >= n || j >= n {
            return Err(Error::InvalidPermutation(format!("({i} {j}) outside 0..{n}")));
        }
        images.swap(i, j);
        Ok(Self { images })
    }

    /// The cycle `c[0] -> c[1] -> ... -> c[0]` (0-based), fixing everything else.
    pub fn cycle(n: usize, c: &[usize]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for (k, &a) in c.iter().enumerate() {
            if a >= n {
                return Err(Error::InvalidPermutation(format!("cycle entry {a} outside 0..{n}")));
            }
            images[a] = c[(k + 1) % c.len()];
        }
        Self::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self * other`, the element acting as `self` followed by `other` on vectors.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&i| other.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.degree(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.images.iter().map(|&j| x[j]).collect()
    }

    /// Matrix `M` with `M x = apply(self, x)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.degree();
        let mut m = DMatrix::zeros(n, n);
        for (i, &j) in self.images.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        m
    }
}

/// A finite group of permutations with uniform Haar weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    degree: usize,
    generators: Vec<Permutation>,
}

impl Serialize for PermutationGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr {
            degree: self.degree,
            generators: self.generators.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermutationGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GroupRepr::deserialize(d)?;
        generate_group(r.degree, r.generators, DEFAULT_CAP).map_err(serde::de::Error::custom)
    }
}

/// Closes `generators` under composition. Elements are returned sorted, identity first.
pub fn generate_group(
    degree: usize,
    generators: Vec<Permutation>,
    cap: usize,
) -> Result<PermutationGroup> {
    for g in &generators {
        if g.degree() != degree {
            return Err(Error::InvalidPermutation(format!(
                "generator of degree {} in a group of degree {degree}",
                g.degree()
            )));
        }
    }
    let cap = cap.max(1);
    let id = Permutation::identity(degree);
    let mut seen: BTreeSet<Permutation> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(a) = queue.pop_front() {
        for g in &generators {
            let b = a.compose(g);
            if !seen.contains(&b) {
                if seen.len() >= cap {
                    return Err(Error::CapExceeded { cap });
                }
                seen.insert(b.clone());
                queue.push_back(b);
            }
        }
    }
    Ok(PermutationGroup {
        degree,
        generators,
        elements: seen.into_iter().collect(),
    })
}

impl PermutationGroup {
    pub fn trivial(n: usize) -> Self {
        generate_group(n, vec![], 1).expect("trivial group")
    }

    /// Full symmetric group on `n` points.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::on_blocks(n, &[(0..n).collect()], Family::Symmetric, DEFAULT_CAP)
    }

    /// Cyclic shift group on `n` points.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::on_blocks(n, &[(0..n).collect()], Family::Cyclic, DEFAULT_CAP)
    }

    /// Direct product of one `family` group per block (0-based indices).
    pub fn on_blocks(n: usize, blocks: &[Vec<usize>], family: Family, cap: usize) -> Result<Self> {
        let mut gens = Vec::new();
        for b in blocks {
            gens.extend(family.generators(n, b)?);
        }
        generate_group(n, gens, cap)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn haar_weight(&self) -> f64 {
        1.0 / self.elements.len() as f64
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn apply(&self, g: &Permutation, x: &[f64]) -> Result<Vec<f64>> {
        g.apply(x)
    }

    /// Orbit of every point under the group.
    pub fn orbits(&self) -> OrbitPartition {
        orbits(self)
    }
}

/// Families of transitive groups used to build block products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Trivial,
    Cyclic,
    Dihedral,
    Symmetric,
}

impl Family {
    pub fn generators(self, n: usize, block: &[usize]) -> Result<Vec<Permutation>> {
        let b = block.len();
        if b < 2 || self == Family::Trivial {
            return Ok(vec![]);
        }
        let mut gens = vec![Permutation::cycle(n, block)?];
        match self {
            Family::Symmetric => gens.push(Permutation::transposition(n, block[0], block[1])?),
            Family::Dihedral if b > 2 => {
                let mut images: Vec<usize> = (0..n).collect();
                for k in 0..b {
                    images[block[k]] = block[(b - k) % b];
                }
                gens.push(Permutation::new(images)?);
            }
            _ => {}
        }
        Ok(gens)
    }
}

/// Orbits of `{0..n}` ordered by their minima; each block is sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl OrbitPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block containing `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&i))
            .expect("index covered by the partition")
    }

    /// Blocks with 1-based members, for reports.
    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| i + 1).collect())
            .collect()
    }
}

pub fn orbits(g: &PermutationGroup) -> OrbitPartition {
    let n = g.degree();
    let mut block_id = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for start in 0..n {
        if block_id[start] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut block = vec![start];
        block_id[start] = id;
        let mut k = 0;
        while k < block.len() {
            let i = block[k];
            for gen in g.generators() {
                let j = gen.image(i);
                if block_id[j] == usize::MAX {
                    block_id[j] = id;
                    block.push(j);
                }
            }
            k += 1;
        }
        block.sort_unstable();
        blocks.push(block);
    }
    OrbitPartition { blocks }
}

/// True iff every orbit has fewer than `c` points.
pub fn orbit_sizes_bounded(g: &PermutationGroup, c: usize) -> bool {
    orbits(g).blocks.iter().all(|b| b.len() < c)
}

/// Splits `0..n` into consecutive blocks of the given sizes.
pub fn interval_blocks(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let b = (start..start + s).collect();
            start += s;
            b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bfs_order(n: usize, gens: &[Permutation]) -> usize {
        // Independent oracle: closure under products in both orders plus inverses.
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        set.insert((0..n).collect());
        loop {
            let cur: Vec<Vec<usize>> = set.iter().cloned().collect();
            let before = set.len();
            for a in &cur {
                for g in gens {
                    let ga: Vec<usize> = (0..n).map(|i| g.image(a[i])).collect();
                    let ag: Vec<usize> = (0..n).map(|i| a[g.image(i)]).collect();
                    set.insert(ga);
                    set.insert(ag);
                }
            }
            if set.len() == before {
                return set.len();
            }
        }
    }

    #[test]
    fn closure_examples() {
        let swap = Permutation::from_one_based(&[2, 1]).unwrap();
        assert_eq!(generate_group(2, vec![swap], 100).unwrap().order(), 2);
        let c3 = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(generate_group(3, vec![c3.clone()], 100).unwrap().order(), 3);
        assert_eq!(bfs_order(3, &[c3]), 3);
        let s = vec![
            Permutation::from_one_based(&[2, 1, 3]).unwrap(),
            Permutation::from_one_based(&[1, 3, 2]).unwrap(),
        ];
        assert_eq!(bfs_order(3, &s), 6);
        assert_eq!(generate_group(3, s, 100).unwrap().order(), 6);
    }

    #[test]
    fn cap_and_validation() {
        let s5 = PermutationGroup::symmetric(5).unwrap();
        assert_eq!(s5.order(), 120);
        let err = generate_group(5, s5.generators().to_vec(), 50).unwrap_err();
        assert_eq!(err, Error::CapExceeded { cap: 50 });
        assert!(matches!(
            Permutation::from_one_based(&[1, 1, 2]),
            Err(Error::InvalidPermutation(_))
        ));
        assert!(serde_json::from_str::<Permutation>("[0, 1]").is_err());
    }

    #[test]
    fn orbit_examples() {
        let g = generate_group(3, vec![Permutation::from_one_based(&[2, 1, 3]).unwrap()], 10)
            .unwrap();
        assert_eq!(orbits(&g).one_based(), vec![vec![1, 2], vec![3]]);
        assert_eq!(orbits(&PermutationGroup::cyclic(4).unwrap()).blocks, vec![vec![0, 1, 2, 3]]);
        assert_eq!(orbits(&PermutationGroup::trivial(3)).sizes(), vec![1, 1, 1]);
        assert!(orbit_sizes_bounded(&g, 3));
        assert!(!orbit_sizes_bounded(&PermutationGroup::symmetric(4).unwrap(), 4));
        assert!(orbit_sizes_bounded(&PermutationGroup::trivial(3), 2));
    }

    #[test]
    fn apply_examples() {
        let swap = Permutation::from_one_based(&[2, 1]).unwrap();
        assert_eq!(swap.apply(&[1.0, -1.0]).unwrap(), vec![-1.0, 1.0]);
        let c = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        let x = [1.0, 2.0, 3.0];
        let via_matrix = c.matrix() * nalgebra::DVector::from_column_slice(&x);
        assert_eq!(c.apply(&x).unwrap(), via_matrix.as_slice().to_vec());
        assert_eq!(c.apply(&x).unwrap(), vec![2.0, 3.0, 1.0]);
        assert!(matches!(c.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let g = PermutationGroup::symmetric(3).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"degree":3,"generators":[[2,3,1],[2,1,3]]}"#);
        let back: PermutationGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dihedral_order() {
        let d = PermutationGroup::on_blocks(5, &[(0..5).collect()], Family::Dihedral, 100).unwrap();
        assert_eq!(d.order(), 10);
    }

    proptest! {
        #[test]
        fn group_axioms(sizes in prop::collection::vec(1usize..4, 1..4), fam in 0usize..4,
                        x in prop::collection::vec(-5i32..5, 12)) {
            let n: usize = sizes.iter().sum();
            let family = [Family::Trivial, Family::Cyclic, Family::Dihedral, Family::Symmetric][fam];
            let g = PermutationGroup::on_blocks(n, &interval_blocks(&sizes), family, DEFAULT_CAP).unwrap();
            let x: Vec<f64> = x[..n].iter().map(|&v| v as f64).collect();
            for a in g.elements() {
                prop_assert!(g.contains(&a.inverse()));
                for b in g.elements() {
                    let ab = a.compose(b);
                    prop_assert!(g.contains(&ab));
                    prop_assert_eq!(a.apply(&b.apply(&x).unwrap()).unwrap(), ab.apply(&x).unwrap());
                }
            }
            let orb = orbits(&g);
            for block in &orb.blocks {
                for a in g.elements() {
                    let mut img: Vec<usize> = block.iter().map(|&i| a.image(i)).collect();
                    img.sort_unstable();
                    prop_assert_eq!(&img, block);
                }
            }
        }
    }
}
