//! Forest of Hoeffding trees ("active memory"), one tree rooted at each
//! attribute. Every tree is scored on and trained with every labeled
//! instance; growth stops once the shared node budget is reached.

use crate::accuracy::SlidingAccuracy;
use crate::error::{Error, Result};
use crate::hoeffding_tree::{information_gain, HoeffdingTree, TreeConfig};
use crate::stream::Instance;

/// Cost model: bytes per tree node.
pub const NODE_BYTES: usize = 32;
/// Cost model: bytes per tree accuracy estimator.
pub const ESTIMATOR_BYTES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub tree: TreeConfig,
    pub max_node_count: usize,
    pub tree_cap: usize,
    /// Sliding window of the per-tree accuracy estimators.
    pub accuracy_window: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            tree: TreeConfig::default(),
            max_node_count: 5_000,
            tree_cap: 50,
            accuracy_window: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    trees: Vec<HoeffdingTree>,
    estimators: Vec<SlidingAccuracy>,
    node_total: usize,
    config: ForestConfig,
}

impl Forest {
    /// One tree per root attribute, `min(dim, tree_cap)` trees. With more
    /// attributes than the cap, the roots are the attributes with the highest
    /// information gain on `calibration` (lowest index on ties).
    pub fn new(dim: usize, config: ForestConfig, calibration: &[Instance]) -> Self {
        assert!(dim >= 1, "forest needs at least one attribute");
        let roots = select_roots(dim, config.tree_cap.max(1), calibration);
        let trees: Vec<HoeffdingTree> = roots
            .iter()
            .map(|&a| HoeffdingTree::with_root(dim, a, config.tree))
            .collect();
        let node_total = trees.iter().map(HoeffdingTree::node_count).sum();
        let estimators = trees
            .iter()
            .map(|_| SlidingAccuracy::new(config.accuracy_window))
            .collect();
        Forest {
            trees,
            estimators,
            node_total,
            config,
        }
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[HoeffdingTree] {
        &self.trees
    }

    pub fn tree(&self, id: usize) -> &HoeffdingTree {
        &self.trees[id]
    }

    pub fn estimator(&self, id: usize) -> &SlidingAccuracy {
        &self.estimators[id]
    }

    pub fn node_count(&self) -> usize {
        self.node_total
    }

    /// Each tree classifies `inst` (scoring its estimator), then trains on it.
    pub fn train(&mut self, inst: &Instance) {
        for (tree, est) in self.trees.iter_mut().zip(&mut self.estimators) {
            est.record(tree.classify(&inst.features) == inst.label);
            let allow_split = self.node_total + 2 <= self.config.max_node_count;
            if tree.train(&inst.features, inst.label, allow_split) {
                self.node_total += 2;
            }
        }
    }

    /// Tree with the highest sliding accuracy, lowest index on ties.
    pub fn best_tree(&self) -> Result<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, est) in self.estimators.iter().enumerate() {
            if let Some(acc) = est.accuracy() {
                if best.is_none_or(|(_, b)| acc > b) {
                    best = Some((i, acc));
                }
            }
        }
        best.ok_or_else(|| Error::NotReady("no tree has been scored yet".into()))
    }

    /// Bytes under the cost model: `NODE_BYTES` per node plus
    /// `ESTIMATOR_BYTES` per tree.
    pub fn memory_bytes(&self) -> usize {
        self.node_total * NODE_BYTES + self.trees.len() * ESTIMATOR_BYTES
    }
}

fn select_roots(dim: usize, cap: usize, calibration: &[Instance]) -> Vec<usize> {
    if dim <= cap {
        return (0..dim).collect();
    }
    let mut counts = vec![[[0u32; 2]; 2]; dim];
    for inst in calibration {
        for (a, c) in counts.iter_mut().enumerate() {
            c[usize::from(inst.features.get(a))][usize::from(inst.label)] += 1;
        }
    }
    let mut ranked: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .map(|(a, c)| (a, information_gain(*c)))
        .collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut roots: Vec<usize> = ranked.into_iter().take(cap).map(|(a, _)| a).collect();
    roots.sort_unstable();
    roots
}
