//! Seeded random instances: vectors, matrices, weights and permutation groups.
//!
//! All randomness goes through [`rng`], a ChaCha8 stream keyed by a `u64` seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::perm_group::{generate_group, Family, Permutation, PermutationGroup, DEFAULT_CAP};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `k` derived from `seed`, for parallel loops.
pub fn sub_rng(seed: u64, k: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k + 1);
    r
}

/// Uniform entries in `[-scale, scale]`.
pub fn random_vec<R: Rng>(r: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-scale..=scale)).collect()
}

/// Gaussian direction scaled to Euclidean length `len`.
pub fn random_direction<R: Rng>(r: &mut R, n: usize, len: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.sample(rand_distr::StandardNormal)).collect();
        let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if s > 1e-12 {
            return v.iter().map(|a| a * len / s).collect();
        }
    }
}

pub fn random_matrix<R: Rng>(r: &mut R, m: usize, n: usize, scale: f64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m, n, |_, _| r.gen_range(-scale..=scale))
}

/// Non-increasing weights in `[lo, hi)`, constant on each of `blocks`
/// (consecutive index ranges) when given.
pub fn random_weights<R: Rng>(r: &mut R, n: usize, lo: f64, hi: f64, blocks: Option<&[Vec<usize>]>) -> Vec<f64> {
    let k = blocks.map_or(n, <[Vec<usize>]>::len);
    let mut vals: Vec<f64> = (0..k).map(|_| r.gen_range(lo..hi)).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    match blocks {
        None => vals,
        Some(bs) => {
            let mut w = vec![0.0; n];
            for (b, v) in bs.iter().zip(vals) {
                for &i in b {
                    w[i] = v;
                }
            }
            w
        }
    }
}

/// Shape of random groups.
#[derive(Clone, Debug)]
pub struct GroupShape {
    pub max_block: usize,
    pub max_order: usize,
    /// Orbits are consecutive index ranges.
    pub contiguous: bool,
}

impl Default for GroupShape {
    fn default() -> Self {
        Self { max_block: 5, max_order: 120, contiguous: false }
    }
}

fn family_order(f: Family, b: usize) -> usize {
    match f {
        Family::Trivial => 1,
        _ if b < 2 => 1,
        Family::Cyclic => b,
        Family::Dihedral => if b > 2 { 2 * b } else { 2 },
        Family::Symmetric => (1..=b).product(),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Random block partition of `0..n` with sizes at most `max_block`.
pub fn random_blocks<R: Rng>(r: &mut R, n: usize, max_block: usize, contiguous: bool) -> Vec<Vec<usize>> {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = r.gen_range(1..=max_block.min(left).max(1));
        sizes.push(s);
        left -= s;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if !contiguous {
        idx.shuffle(r);
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    for s in sizes {
        let mut b = idx[start..start + s].to_vec();
        b.sort_unstable();
        blocks.push(b);
        start += s;
    }
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// A random group whose orbits have at most `shape.max_block` points and whose
/// order is at most `shape.max_order`. Either a product of per-block groups, or
/// the cyclic group of one permutation cycling every block at once.
pub fn random_group<R: Rng>(r: &mut R, n: usize, shape: &GroupShape) -> PermutationGroup {
    loop {
        let blocks = random_blocks(r, n, shape.max_block, shape.contiguous);
        if r.gen_bool(0.2) {
            let mut images: Vec<usize> = (0..n).collect();
            let mut order = 1;
            for b in &blocks {
                for (k, &a) in b.iter().enumerate() {
                    images[a] = b[(k + 1) % b.len()];
                }
                order = order / gcd(order, b.len()) * b.len();
            }
            if order <= shape.max_order {
                let g = Permutation::new(images).expect("block cycle");
                return generate_group(n, vec![g], DEFAULT_CAP).expect("cyclic group");
            }
            continue;
        }
        let fams = [Family::Trivial, Family::Cyclic, Family::Dihedral, Family::Symmetric];
        let chosen: Vec<Family> = blocks.iter().map(|_| fams[r.gen_range(0..4)]).collect();
        let order: usize = blocks
            .iter()
            .zip(&chosen)
            .map(|(b, f)| family_order(*f, b.len()))
            .fold(1usize, |a, o| a.saturating_mul(o));
        if order > shape.max_order {
            continue;
        }
        let mut gens = Vec::new();
        for (b, f) in blocks.iter().zip(&chosen) {
            gens.extend(f.generators(n, b).expect("block generators"));
        }
        return generate_group(n, gens, DEFAULT_CAP).expect("product group");
    }
}
