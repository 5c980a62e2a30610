#![allow(dead_code)]

use fct_core::{BitVector, HoeffdingTree, TreeConfig};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hoeffding tree grown on a noisy random linear-threshold concept over
/// `3..=max_dim` binary attributes.
pub fn random_tree(seed: u64, max_dim: usize) -> HoeffdingTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(3..=max_dim);
    grow(&mut rng, d)
}

/// As [`random_tree`] with a fixed number of attributes.
pub fn random_tree_with_dim(seed: u64, d: usize) -> HoeffdingTree {
    grow(&mut ChaCha8Rng::seed_from_u64(seed), d)
}

fn grow(rng: &mut ChaCha8Rng, d: usize) -> HoeffdingTree {
    let weights: Vec<f64> = (0..d)
        .map(|_| {
            // a few attributes dominate so trees reach varied depths
            let w: f64 = rng.random_range(-1.0..1.0);
            if rng.random_bool(0.4) {
                w * 4.0
            } else {
                w
            }
        })
        .collect();
    let bias: f64 = rng.random_range(-1.0..1.0);
    let noise = rng.random_range(0.0..0.15);
    let n = rng.random_range(200..6_000);
    let mut tree = HoeffdingTree::new(d, TreeConfig::default());
    for _ in 0..n {
        let bits: Vec<bool> = (0..d).map(|_| rng.random()).collect();
        let score: f64 = bits
            .iter()
            .zip(&weights)
            .map(|(&b, w)| if b { *w } else { -*w })
            .sum::<f64>()
            + bias;
        let label = (score > 0.0) ^ rng.random_bool(noise);
        tree.train(&BitVector::from_bools(&bits), u8::from(label), true);
    }
    tree
}

pub fn all_inputs(d: usize) -> impl Iterator<Item = BitVector> {
    (0..1u64 << d).map(move |v| BitVector::from_u64(v, d))
}

/// Exact spectrum by brute force: `2^d * omega_j` for every `j`, indexed by
/// the same integer encoding as `BitVector::from_u64`.
pub fn brute_force_scaled(tree: &HoeffdingTree) -> Vec<i64> {
    let d = tree.dim();
    let mut v: Vec<i64> = all_inputs(d)
        .map(|x| i64::from(tree.classify(&x)))
        .collect();
    // in-place Walsh-Hadamard butterfly
    let mut h = 1;
    while h < v.len() {
        for start in (0..v.len()).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    v
}

pub fn brute_force_spectrum(tree: &HoeffdingTree) -> Vec<Rational64> {
    let scale = 1i64 << tree.dim();
    brute_force_scaled(tree)
        .into_iter()
        .map(|w| Rational64::new(w, scale))
        .collect()
}

/// Sum of squared coefficients per order.
pub fn order_energies(spectrum: &[Rational64], d: usize) -> Vec<Rational64> {
    let mut e = vec![Rational64::from_integer(0); d + 1];
    for (j, w) in spectrum.iter().enumerate() {
        e[(j as u64).count_ones() as usize] += *w * *w;
    }
    e
}

/// Attributes tested anywhere in the tree.
pub fn tree_attributes(tree: &HoeffdingTree) -> Vec<bool> {
    let mut used = vec![false; tree.dim()];
    for p in tree.extract_paths() {
        for a in p.defined_attributes() {
            used[a] = true;
        }
    }
    used
}
