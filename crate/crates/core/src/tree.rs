//! CART classification trees grown on a weighted bootstrap sample.
//!
//! A tree is grown on the distinct in-bag rows, each weighted by its number
//! of copies, which gives the same splits as growing on the expanded
//! multiset. Split search sorts packed `(rank, label, weight)` keys, where
//! `rank` is the position of the value among the distinct values of the
//! column across the whole dataset.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::seed::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    /// Rows with `value <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Gini decrease weighted by the node's share of the in-bag sample.
        decrease: f64,
    },
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    /// Copies of each training-table row in this tree's bootstrap sample.
    in_bag: Vec<u32>,
    /// Out-of-bag evaluation units, ascending. See [`crate::forest::OobRule`].
    oob: Vec<usize>,
}

impl Tree {
    /// Assembles a tree from parts. Node 0 is the root; children must come
    /// after their parent.
    pub fn from_parts(nodes: Vec<TreeNode>, in_bag: Vec<u32>, oob: Vec<usize>) -> Self {
        Tree { nodes, in_bag, oob }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn in_bag(&self) -> &[u32] {
        &self.in_bag
    }

    pub fn oob(&self) -> &[usize] {
        &self.oob
    }

    /// Class-1 probability of the leaf reached when feature `j` takes
    /// `value(j)`.
    #[inline]
    pub fn predict_with(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut node = 0;
        loop {
            match self.nodes[node] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => node = if value(feature) <= threshold { left } else { right },
                TreeNode::Leaf { counts } => {
                    return f64::from(counts[1]) / f64::from(counts[0] + counts[1]);
                }
            }
        }
    }

    #[inline]
    pub fn predict_row(&self, data: &Dataset, row: usize) -> f64 {
        self.predict_with(|j| data.value(row, j))
    }

    pub fn predict_values(&self, values: &[f64]) -> f64 {
        self.predict_with(|j| values[j])
    }

    /// Flags of the features used by at least one split.
    pub fn used_features(&self, p: usize) -> Vec<bool> {
        let mut used = vec![false; p];
        for node in &self.nodes {
            if let TreeNode::Split { feature, .. } = node {
                used[*feature] = true;
            }
        }
        used
    }

    /// Per-feature sum of recorded impurity decreases.
    pub fn impurity_decrease_by_feature(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for node in &self.nodes {
            if let TreeNode::Split { feature, decrease, .. } = node {
                out[*feature] += decrease;
            }
        }
        out
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

/// Per-column ranks of every value among the column's distinct values.
pub(crate) struct RankIndex {
    n: usize,
    ranks: Vec<u32>,
    distinct: Vec<Vec<f64>>,
}

impl RankIndex {
    pub(crate) fn new(data: &Dataset) -> Self {
        let n = data.n();
        let mut ranks = vec![0u32; n * data.p()];
        let mut distinct = Vec::with_capacity(data.p());
        let mut order: Vec<usize> = (0..n).collect();
        for j in 0..data.p() {
            let col = data.column(j);
            order.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut values = Vec::new();
            for &i in &order {
                if values.last() != Some(&col[i]) {
                    values.push(col[i]);
                }
                ranks[j * n + i] = (values.len() - 1) as u32;
            }
            distinct.push(values);
        }
        RankIndex { n, ranks, distinct }
    }

    #[inline]
    fn rank(&self, row: u32, feature: usize) -> u32 {
        self.ranks[feature * self.n + row as usize]
    }

    /// Midpoint between two adjacent distinct values, never equal to the
    /// upper one.
    fn threshold(&self, feature: usize, lo: u32) -> f64 {
        let a = self.distinct[feature][lo as usize];
        let b = self.distinct[feature][lo as usize + 1];
        let mid = a + (b - a) / 2.0;
        if mid < b {
            mid
        } else {
            a
        }
    }
}

pub(crate) struct GrowParams {
    pub mtry: usize,
    pub min_leaf_size: u32,
}

struct BestSplit {
    score: f64,
    feature: usize,
    rank_lo: u32,
}

const LABEL_BIT: u64 = 1 << 31;
const WEIGHT_MASK: u64 = LABEL_BIT - 1;

/// Grows a tree on `rows` (distinct dataset rows) with copy counts
/// `weights[row]`.
pub(crate) fn grow(
    data: &Dataset,
    ranks: &RankIndex,
    weights: &[u32],
    mut rows: Vec<u32>,
    params: &GrowParams,
    rng: &mut Rng,
) -> Vec<TreeNode> {
    let p = data.p();
    let labels = data.labels();
    let class_counts = |rows: &[u32]| {
        rows.iter().fold([0u32; 2], |mut c, &r| {
            c[labels[r as usize] as usize] += weights[r as usize];
            c
        })
    };
    let root_counts = class_counts(&rows);
    let root_total = f64::from(root_counts[0] + root_counts[1]);

    let mut nodes = vec![TreeNode::Leaf { counts: root_counts }];
    let mut stack = vec![(0usize, 0usize, rows.len(), root_counts)];
    let mut keys: Vec<u64> = Vec::with_capacity(rows.len());
    let mut features: Vec<usize> = Vec::with_capacity(params.mtry);

    while let Some((node, start, end, counts)) = stack.pop() {
        let total = counts[0] + counts[1];
        if counts[0] == 0 || counts[1] == 0 || total < 2 * params.min_leaf_size {
            continue;
        }
        let slice = &rows[start..end];
        features.clear();
        features.extend(index::sample(rng, p, params.mtry).into_iter());
        features.sort_unstable();

        let (c0, c1) = (f64::from(counts[0]), f64::from(counts[1]));
        let parent_term = (c0 * c0 + c1 * c1) / f64::from(total);
        let mut best: Option<BestSplit> = None;
        for &f in &features {
            keys.clear();
            keys.extend(slice.iter().map(|&r| {
                (u64::from(ranks.rank(r, f)) << 32)
                    | (u64::from(labels[r as usize]) << 31)
                    | u64::from(weights[r as usize])
            }));
            keys.sort_unstable();
            if keys[0] >> 32 == keys[keys.len() - 1] >> 32 {
                continue;
            }
            let (mut l0, mut l1) = (0u32, 0u32);
            for w in keys.windows(2) {
                let weight = (w[0] & WEIGHT_MASK) as u32;
                if w[0] & LABEL_BIT == 0 {
                    l0 += weight;
                } else {
                    l1 += weight;
                }
                let (ra, rb) = ((w[0] >> 32) as u32, (w[1] >> 32) as u32);
                if ra == rb {
                    continue;
                }
                let nl = l0 + l1;
                let nr = total - nl;
                if nl < params.min_leaf_size || nr < params.min_leaf_size {
                    continue;
                }
                let (r0, r1) = (counts[0] - l0, counts[1] - l1);
                let (fl0, fl1, fr0, fr1) = (f64::from(l0), f64::from(l1), f64::from(r0), f64::from(r1));
                let score = (fl0 * fl0 + fl1 * fl1) / f64::from(nl) + (fr0 * fr0 + fr1 * fr1) / f64::from(nr);
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(BestSplit {
                        score,
                        feature: f,
                        rank_lo: ra,
                    });
                }
            }
        }
        let Some(best) = best else { continue };
        let gain = best.score - parent_term;
        if gain <= 1e-12 * f64::from(total) {
            continue;
        }

        // partition [start, end) so rows with rank <= rank_lo come first
        let slice = &mut rows[start..end];
        let mut mid = 0;
        for i in 0..slice.len() {
            if ranks.rank(slice[i], best.feature) <= best.rank_lo {
                slice.swap(i, mid);
                mid += 1;
            }
        }
        let left_counts = class_counts(&slice[..mid]);
        let right_counts = [counts[0] - left_counts[0], counts[1] - left_counts[1]];
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf { counts: left_counts });
        nodes.push(TreeNode::Leaf { counts: right_counts });
        nodes[node] = TreeNode::Split {
            feature: best.feature,
            threshold: ranks.threshold(best.feature, best.rank_lo),
            left,
            right,
            decrease: gain / root_total,
        };
        stack.push((right, start + mid, end, right_counts));
        stack.push((left, start, start + mid, left_counts));
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedSpec;

    fn gini(c: [u32; 2]) -> f64 {
        let n = f64::from(c[0] + c[1]);
        1.0 - (f64::from(c[0]) / n).powi(2) - (f64::from(c[1]) / n).powi(2)
    }

    fn grow_all(data: &Dataset, mtry: usize, seed: u64) -> Vec<TreeNode> {
        let ranks = RankIndex::new(data);
        let weights = vec![1u32; data.n()];
        let rows = (0..data.n() as u32).collect();
        grow(
            data,
            &ranks,
            &weights,
            rows,
            &GrowParams { mtry, min_leaf_size: 1 },
            &mut SeedSpec(seed).rng(),
        )
    }

    #[test]
    fn two_rows_single_split() {
        let data = Dataset::from_rows(&[vec![1.0], vec![3.0]], vec![0, 1]).unwrap();
        let nodes = grow_all(&data, 1, 0);
        assert_eq!(nodes.len(), 3);
        match nodes[0] {
            TreeNode::Split { feature, threshold, decrease, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 2.0);
                assert!((decrease - 0.5).abs() < 1e-15);
            }
            _ => panic!("root should split"),
        }
        assert_eq!(nodes[1], TreeNode::Leaf { counts: [1, 0] });
        assert_eq!(nodes[2], TreeNode::Leaf { counts: [0, 1] });
    }

    #[test]
    fn weighted_rows_match_expanded_rows() {
        let rows = vec![vec![0.1, 5.0], vec![0.4, 1.0], vec![0.3, 2.0], vec![0.9, 0.5], vec![0.7, 3.0]];
        let labels = vec![0, 1, 0, 1, 1];
        let data = Dataset::from_rows(&rows, labels.clone()).unwrap();
        let ranks = RankIndex::new(&data);
        let weights = vec![2, 1, 3, 1, 2];
        let params = GrowParams { mtry: 2, min_leaf_size: 1 };
        let weighted = grow(&data, &ranks, &weights, (0..5).collect(), &params, &mut SeedSpec(1).rng());

        let mut exp_rows = Vec::new();
        let mut exp_labels = Vec::new();
        for (i, &w) in weights.iter().enumerate() {
            for _ in 0..w {
                exp_rows.push(rows[i].clone());
                exp_labels.push(labels[i]);
            }
        }
        let exp = Dataset::from_rows(&exp_rows, exp_labels).unwrap();
        let exp_ranks = RankIndex::new(&exp);
        let expanded = grow(
            &exp,
            &exp_ranks,
            &vec![1; exp.n()],
            (0..exp.n() as u32).collect(),
            &params,
            &mut SeedSpec(1).rng(),
        );
        assert_eq!(weighted, expanded);
    }

    #[test]
    fn leaves_are_pure_on_distinct_rows_and_decreases_telescope() {
        let mut rng = SeedSpec(9).rng();
        use rand::Rng as _;
        let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let labels: Vec<u8> = (0..60).map(|i| u8::from(i % 3 == 0)).collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let nodes = grow_all(&data, 2, 5);
        let tree = Tree::from_parts(nodes, vec![], vec![]);
        for node in tree.nodes() {
            if let TreeNode::Leaf { counts } = node {
                assert!(counts[0] == 0 || counts[1] == 0, "impure leaf {counts:?}");
            }
        }
        // total decrease equals root impurity when every leaf is pure
        let total: f64 = tree.impurity_decrease_by_feature(4).iter().sum();
        assert!((total - gini([40, 20])).abs() < 1e-12);
        // training rows are classified perfectly
        for i in 0..data.n() {
            assert_eq!(tree.predict_row(&data, i), f64::from(data.label(i)));
        }
    }

    #[test]
    fn identical_rows_with_mixed_labels_stop() {
        let data = Dataset::from_rows(&[vec![1.0], vec![1.0], vec![1.0]], vec![0, 1, 1]).unwrap();
        let nodes = grow_all(&data, 1, 0);
        assert_eq!(nodes, vec![TreeNode::Leaf { counts: [1, 2] }]);
        let tree = Tree::from_parts(nodes, vec![], vec![]);
        assert!((tree.predict_values(&[1.0]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn min_leaf_size_respected() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i % 2 == 0)).collect();
        let data = Dataset::from_rows(&rows, labels).unwrap();
        let ranks = RankIndex::new(&data);
        let nodes = grow(
            &data,
            &ranks,
            &vec![1; 20],
            (0..20).collect(),
            &GrowParams { mtry: 1, min_leaf_size: 3 },
            &mut SeedSpec(0).rng(),
        );
        for node in &nodes {
            if let TreeNode::Leaf { counts } = node {
                assert!(counts[0] + counts[1] >= 3);
            }
        }
    }

    #[test]
    fn split_ties_prefer_lowest_feature_then_threshold() {
        // both features separate the classes identically
        let rows = vec![vec![0.0, 10.0], vec![1.0, 11.0], vec![2.0, 12.0], vec![3.0, 13.0]];
        let data = Dataset::from_rows(&rows, vec![0, 0, 1, 1]).unwrap();
        let nodes = grow_all(&data, 2, 0);
        assert!(matches!(nodes[0], TreeNode::Split { feature: 0, threshold, .. } if threshold == 1.5));
    }
}
