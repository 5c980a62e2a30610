//! Incremental (VFDT-style) binary decision tree over binary features.
//!
//! Leaves keep per-attribute class counts; every `grace_period` instances a
//! leaf compares the information gain of its two best candidate attributes and
//! splits once the Hoeffding bound separates them (or the bound falls under the
//! tie threshold). Children are seeded with the class counts the parent saw on
//! their side of the split.

use std::fmt;

use crate::bits::BitVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    /// Probability of choosing the correct split attribute.
    pub split_confidence: f64,
    pub tie_threshold: f64,
    /// Instances a leaf accumulates between split checks.
    pub grace_period: u32,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            split_confidence: 0.99,
            tie_threshold: 0.01,
            grace_period: 32,
        }
    }
}

/// Hoeffding bound for a gain range of 1 bit:
/// `sqrt(ln(1/δ) / 2n)` with `δ = 1 - split_confidence`.
pub fn hoeffding_bound(split_confidence: f64, n: f64) -> f64 {
    let delta = 1.0 - split_confidence;
    ((1.0 / delta).ln() / (2.0 * n)).sqrt()
}

fn entropy(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0]) + f64::from(counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = f64::from(c) / n;
            -p * p.log2()
        })
        .sum()
}

/// Information gain of splitting `stats[bit][class]` on an attribute.
pub fn information_gain(stats: [[u32; 2]; 2]) -> f64 {
    let total = [stats[0][0] + stats[1][0], stats[0][1] + stats[1][1]];
    let n = f64::from(total[0]) + f64::from(total[1]);
    if n == 0.0 {
        return 0.0;
    }
    let weighted: f64 = stats
        .iter()
        .map(|side| (f64::from(side[0]) + f64::from(side[1])) / n * entropy(*side))
        .sum();
    (entropy(total) - weighted).max(0.0)
}

#[derive(Debug, Clone)]
struct LeafStats {
    /// `attribute_counts[a][bit][class]`, counted since the leaf was created.
    attribute_counts: Vec<[[u32; 2]; 2]>,
    since_check: u32,
}

impl LeafStats {
    fn new(dim: usize) -> Self {
        LeafStats {
            attribute_counts: vec![[[0; 2]; 2]; dim],
            since_check: 0,
        }
    }
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf(LeafStats),
    Split {
        attribute: usize,
        children: [usize; 2],
    },
}

#[derive(Debug, Clone)]
struct Node {
    /// Class counts of every instance that reached this node (plus the seed).
    class_counts: [u32; 2],
    kind: NodeKind,
}

impl Node {
    fn majority(&self) -> Option<u8> {
        match self.class_counts[1].cmp(&self.class_counts[0]) {
            std::cmp::Ordering::Greater => Some(1),
            std::cmp::Ordering::Less => Some(0),
            std::cmp::Ordering::Equal => None,
        }
    }
}

/// One root-to-leaf path: the `(attribute, bit)` tests on it and the leaf class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreePath {
    pub conditions: Vec<(usize, bool)>,
    pub class: u8,
}

impl TreePath {
    /// Whether `x` follows this path.
    pub fn covers(&self, x: &BitVector) -> bool {
        self.conditions.iter().all(|&(a, b)| x.get(a) == b)
    }

    pub fn defined_attributes(&self) -> impl Iterator<Item = usize> + '_ {
        self.conditions.iter().map(|&(a, _)| a)
    }
}

#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    nodes: Vec<Node>,
    dim: usize,
    root_attribute: Option<usize>,
    config: TreeConfig,
}

impl HoeffdingTree {
    /// Single-leaf tree over `dim` binary attributes.
    pub fn new(dim: usize, config: TreeConfig) -> Self {
        HoeffdingTree {
            nodes: vec![Node {
                class_counts: [0; 2],
                kind: NodeKind::Leaf(LeafStats::new(dim)),
            }],
            dim,
            root_attribute: None,
            config,
        }
    }

    /// Tree whose root tests `attribute` from the start.
    pub fn with_root(dim: usize, attribute: usize, config: TreeConfig) -> Self {
        assert!(attribute < dim, "root attribute {attribute} out of range");
        let mut tree = Self::new(dim, config);
        tree.split_leaf(0, attribute);
        tree.root_attribute = Some(attribute);
        tree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn root_attribute(&self) -> Option<usize> {
        self.root_attribute
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf(_)))
            .count()
    }

    pub fn depth(&self) -> usize {
        self.extract_paths()
            .iter()
            .map(|p| p.conditions.len())
            .max()
            .unwrap_or(0)
    }

    /// Majority class of the reached leaf. Ties (including empty leaves)
    /// inherit the nearest ancestor's majority; class 0 at the root.
    pub fn classify(&self, x: &BitVector) -> u8 {
        let mut node = 0;
        let mut majority = 0;
        loop {
            let n = &self.nodes[node];
            if let Some(m) = n.majority() {
                majority = m;
            }
            match n.kind {
                NodeKind::Leaf(_) => return majority,
                NodeKind::Split {
                    attribute,
                    children,
                } => node = children[usize::from(x.get(attribute))],
            }
        }
    }

    /// Routes the instance to a leaf and updates statistics; when `allow_split`
    /// the leaf may split. Returns whether a split happened (node count +2).
    pub fn train(&mut self, x: &BitVector, label: u8, allow_split: bool) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        let class = usize::from(label);
        let mut node = 0;
        loop {
            self.nodes[node].class_counts[class] += 1;
            match self.nodes[node].kind {
                NodeKind::Split {
                    attribute,
                    children,
                } => node = children[usize::from(x.get(attribute))],
                NodeKind::Leaf(ref mut stats) => {
                    for (a, counts) in stats.attribute_counts.iter_mut().enumerate() {
                        counts[usize::from(x.get(a))][class] += 1;
                    }
                    stats.since_check += 1;
                    if stats.since_check < self.config.grace_period || !allow_split {
                        return false;
                    }
                    stats.since_check = 0;
                    break;
                }
            }
        }
        let path_mask = self.path_mask(x);
        match self.best_split(node, &path_mask) {
            Some(attribute) => {
                self.split_leaf(node, attribute);
                true
            }
            None => false,
        }
    }

    /// Attributes tested on the path `x` follows.
    fn path_mask(&self, x: &BitVector) -> Vec<bool> {
        let mut mask = vec![false; self.dim];
        let mut node = 0;
        while let NodeKind::Split {
            attribute,
            children,
        } = self.nodes[node].kind
        {
            mask[attribute] = true;
            node = children[usize::from(x.get(attribute))];
        }
        mask
    }

    fn best_split(&self, node: usize, path_mask: &[bool]) -> Option<usize> {
        let NodeKind::Leaf(stats) = &self.nodes[node].kind else {
            return None;
        };
        let mut best: Option<(usize, f64)> = None;
        let mut second = 0.0f64;
        let mut seen = 0u64;
        for (a, counts) in stats.attribute_counts.iter().enumerate() {
            if path_mask[a] {
                continue;
            }
            if seen == 0 {
                seen = counts.iter().flatten().map(|&c| u64::from(c)).sum();
            }
            let gain = information_gain(*counts);
            match best {
                Some((_, g)) if gain <= g => second = second.max(gain),
                Some((_, g)) => {
                    second = g;
                    best = Some((a, gain));
                }
                None => best = Some((a, gain)),
            }
        }
        let (attribute, gain) = best?;
        if gain <= 0.0 || seen == 0 {
            return None;
        }
        let epsilon = hoeffding_bound(self.config.split_confidence, seen as f64);
        (gain - second > epsilon || epsilon < self.config.tie_threshold).then_some(attribute)
    }

    fn split_leaf(&mut self, node: usize, attribute: usize) {
        let seeds = match &self.nodes[node].kind {
            NodeKind::Leaf(stats) => stats.attribute_counts[attribute],
            NodeKind::Split { .. } => unreachable!("split of an internal node"),
        };
        let first = self.nodes.len();
        for seed in seeds {
            self.nodes.push(Node {
                class_counts: seed,
                kind: NodeKind::Leaf(LeafStats::new(self.dim)),
            });
        }
        self.nodes[node].kind = NodeKind::Split {
            attribute,
            children: [first, first + 1],
        };
    }

    /// One entry per leaf, in depth-first order (bit 0 branch first).
    pub fn extract_paths(&self) -> Vec<TreePath> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new(), 0u8)];
        while let Some((node, conditions, inherited)) = stack.pop() {
            let n = &self.nodes[node];
            let majority = n.majority().unwrap_or(inherited);
            match n.kind {
                NodeKind::Leaf(_) => out.push(TreePath {
                    conditions,
                    class: majority,
                }),
                NodeKind::Split {
                    attribute,
                    children,
                } => {
                    for bit in [true, false] {
                        let mut c = conditions.clone();
                        c.push((attribute, bit));
                        stack.push((children[usize::from(bit)], c, majority));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for HoeffdingTree {
    /// Indented dump: one line per node.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn walk(
            t: &HoeffdingTree,
            f: &mut fmt::Formatter<'_>,
            node: usize,
            depth: usize,
            label: &str,
        ) -> fmt::Result {
            let n = &t.nodes[node];
            let pad = "  ".repeat(depth);
            match n.kind {
                NodeKind::Leaf(_) => writeln!(
                    f,
                    "{pad}{label}leaf {:?} -> {}",
                    n.class_counts,
                    n.majority().map_or("tie".to_string(), |m| m.to_string())
                ),
                NodeKind::Split {
                    attribute,
                    children,
                } => {
                    writeln!(f, "{pad}{label}x{} {:?}", attribute + 1, n.class_counts)?;
                    walk(t, f, children[0], depth + 1, "0: ")?;
                    walk(t, f, children[1], depth + 1, "1: ")
                }
            }
        }
        walk(self, f, 0, 0, "")
    }
}

/// Builds trees with a given shape directly; used by tests and examples that
/// need a known tree.
pub mod build {
    use super::*;

    /// Description of a tree shape with fixed leaf classes.
    #[derive(Debug, Clone)]
    pub enum Shape {
        Leaf(u8),
        Split(usize, Box<Shape>, Box<Shape>),
    }

    pub fn leaf(class: u8) -> Shape {
        Shape::Leaf(class)
    }

    pub fn split(attribute: usize, zero: Shape, one: Shape) -> Shape {
        Shape::Split(attribute, Box::new(zero), Box::new(one))
    }

    /// Materializes `shape`; each leaf gets a single count for its class.
    pub fn tree(dim: usize, shape: &Shape) -> HoeffdingTree {
        let mut t = HoeffdingTree::new(dim, TreeConfig::default());
        t.nodes.clear();
        fn add(t: &mut HoeffdingTree, shape: &Shape) -> usize {
            let id = t.nodes.len();
            t.nodes.push(Node {
                class_counts: [0; 2],
                kind: NodeKind::Leaf(LeafStats::new(t.dim)),
            });
            match shape {
                Shape::Leaf(c) => {
                    t.nodes[id].class_counts[usize::from(*c)] = 1;
                }
                Shape::Split(a, zero, one) => {
                    let z = add(t, zero);
                    let o = add(t, one);
                    t.nodes[id].kind = NodeKind::Split {
                        attribute: *a,
                        children: [z, o],
                    };
                }
            }
            id
        }
        add(&mut t, shape);
        t
    }

    /// The three-attribute example tree: `x3 = 0 -> 1`, else `x1 = 0 -> 1`,
    /// else `0`. Attribute ids are 0-based.
    pub fn example_tree() -> HoeffdingTree {
        tree(3, &split(2, leaf(1), split(0, leaf(1), leaf(0))))
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(rng: &mut ChaCha8Rng, d: usize) -> BitVector {
        let bits: Vec<bool> = (0..d).map(|_| rng.random()).collect();
        BitVector::from_bools(&bits)
    }

    #[test]
    fn hoeffding_bound_at_first_check() {
        let eps = hoeffding_bound(0.99, 32.0);
        assert!((eps - (100f64.ln() / 64.0).sqrt()).abs() < 1e-15);
        assert!((eps - 0.2683).abs() < 1e-4);
    }

    #[test]
    fn information_gain_extremes() {
        assert_eq!(information_gain([[10, 0], [0, 10]]), 1.0);
        assert_eq!(information_gain([[5, 5], [5, 5]]), 0.0);
        assert_eq!(information_gain([[0, 0], [0, 0]]), 0.0);
    }

    #[test]
    fn pure_stream_never_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = HoeffdingTree::new(4, TreeConfig::default());
        for _ in 0..50_000 {
            let x = random_bits(&mut rng, 4);
            t.train(&x, 1, true);
        }
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.classify(&BitVector::zeros(4)), 1);
    }

    #[test]
    fn learns_single_attribute_concept() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = HoeffdingTree::new(3, TreeConfig::default());
        let data: Vec<BitVector> = (0..10_000).map(|_| random_bits(&mut rng, 3)).collect();
        for x in &data {
            t.train(x, u8::from(x.get(2)), true);
        }
        assert!(t
            .extract_paths()
            .iter()
            .all(|p| p.defined_attributes().any(|a| a == 2)));
        let correct = data
            .iter()
            .filter(|x| t.classify(x) == u8::from(x.get(2)))
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn example_tree_classification() {
        let t = example_tree();
        for x2 in [false, true] {
            assert_eq!(t.classify(&BitVector::from_bools(&[false, x2, false])), 1);
            assert_eq!(t.classify(&BitVector::from_bools(&[true, x2, true])), 0);
            assert_eq!(t.classify(&BitVector::from_bools(&[false, x2, true])), 1);
        }
    }

    #[test]
    fn single_leaf_majority() {
        let mut t = HoeffdingTree::new(2, TreeConfig::default());
        let x = BitVector::zeros(2);
        for _ in 0..3 {
            t.train(&x, 0, false);
        }
        for _ in 0..7 {
            t.train(&x, 1, false);
        }
        assert_eq!(t.classify(&BitVector::from_bools(&[true, true])), 1);
        let paths = t.extract_paths();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].conditions.is_empty());
    }

    #[test]
    fn empty_leaf_inherits_and_empty_root_is_zero() {
        let t = HoeffdingTree::new(2, TreeConfig::default());
        assert_eq!(t.classify(&BitVector::zeros(2)), 0);
        let mut t = HoeffdingTree::with_root(2, 0, TreeConfig::default());
        assert_eq!(t.node_count(), 3);
        // only the 0-branch sees data; the empty 1-branch inherits the root majority
        let x = BitVector::from_bools(&[false, false]);
        for _ in 0..5 {
            t.train(&x, 1, false);
        }
        assert_eq!(t.classify(&BitVector::from_bools(&[true, false])), 1);
    }

    #[test]
    fn example_paths() {
        let paths = example_tree().extract_paths();
        let mut got: Vec<(Vec<(usize, bool)>, u8)> =
            paths.into_iter().map(|p| (p.conditions, p.class)).collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                (vec![(2, false)], 1),
                (vec![(2, true), (0, false)], 1),
                (vec![(2, true), (0, true)], 0),
            ]
        );
    }

    #[test]
    fn complete_tree_has_all_paths() {
        fn full(depth: usize, d: usize) -> Shape {
            if depth == d {
                leaf(1)
            } else {
                split(depth, full(depth + 1, d), full(depth + 1, d))
            }
        }
        let t = tree(4, &full(0, 4));
        let paths = t.extract_paths();
        assert_eq!(paths.len(), 16);
        assert!(paths.iter().all(|p| p.conditions.len() == 4));
        assert_eq!(t.node_count(), 31);
    }

    #[test]
    fn frozen_growth_does_not_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = HoeffdingTree::new(3, TreeConfig::default());
        for _ in 0..5_000 {
            let x = random_bits(&mut rng, 3);
            assert!(!t.train(&x, u8::from(x.get(0)), false));
        }
        assert_eq!(t.node_count(), 1);
    }

    fn grow_random(seed: u64, d: usize, n: usize) -> HoeffdingTree {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut t = HoeffdingTree::new(d, TreeConfig::default());
        for _ in 0..n {
            let x = random_bits(&mut rng, d);
            let s: f64 = (0..d).filter(|&a| x.get(a)).map(|a| weights[a]).sum();
            let mut y = u8::from(s > 0.0);
            if rng.random::<f64>() < 0.05 {
                y ^= 1;
            }
            t.train(&x, y, true);
        }
        t
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn structural_invariants(seed in any::<u64>(), d in 2usize..9) {
            let t = grow_random(seed, d, 4_000);
            let paths = t.extract_paths();
            prop_assert_eq!(t.node_count(), 2 * t.leaf_count() - 1);
            prop_assert_eq!(paths.len(), t.leaf_count());
            let covered: u64 = paths.iter().map(|p| 1u64 << (d - p.conditions.len())).sum();
            prop_assert_eq!(covered, 1u64 << d);
            for p in &paths {
                let mut attrs: Vec<usize> = p.defined_attributes().collect();
                attrs.sort_unstable();
                attrs.dedup();
                prop_assert_eq!(attrs.len(), p.conditions.len());
            }
            for v in 0..(1u64 << d) {
                let x = BitVector::from_u64(v, d);
                let covering: Vec<&TreePath> = paths.iter().filter(|p| p.covers(&x)).collect();
                prop_assert_eq!(covering.len(), 1);
                prop_assert_eq!(covering[0].class, t.classify(&x));
            }
        }
    }
}
