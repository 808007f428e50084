//! C4.5 decision tree: gain-ratio splits, `min_leaf` pre-pruning and
//! pessimistic (confidence-bound) post-pruning.
//!
//! Continuous features split in two at a midpoint between consecutive distinct
//! training values; categorical features split into one branch per observed
//! value, unseen values falling back to the node's majority class. A split is
//! admissible only if every branch keeps at least `min_leaf` instances, so the
//! grown tree satisfies the leaf-size constraint everywhere.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{argmax_label, check_trainable, InputSpec, Predictor};
use crate::dataset::{Dataset, FeatureKind, Instance, Label};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SplitTest {
    /// `children[0]` takes `x <= threshold`, `children[1]` the rest.
    Threshold { threshold: f64 },
    /// `children[i]` takes `values[i]`.
    Categories { values: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        class: Label,
        /// (negative, positive) training counts.
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        test: SplitTest,
        counts: [usize; 2],
        children: Vec<Node>,
    },
}

impl Node {
    fn leaf(counts: [usize; 2]) -> Node {
        Node::Leaf {
            class: majority(counts),
            counts,
        }
    }

    pub fn counts(&self) -> [usize; 2] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => *counts,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => 1 + children.iter().map(Node::node_count).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> Vec<&Node> {
        match self {
            Node::Leaf { .. } => vec![self],
            Node::Split { children, .. } => children.iter().flat_map(Node::leaves).collect(),
        }
    }

    fn classify(&self, x: &[f64]) -> Label {
        match self {
            Node::Leaf { class, .. } => *class,
            Node::Split {
                feature,
                test,
                counts,
                children,
            } => {
                let v = x[*feature];
                match test {
                    SplitTest::Threshold { threshold } => {
                        children[usize::from(v > *threshold)].classify(x)
                    }
                    SplitTest::Categories { values } => {
                        match values.iter().position(|&c| c as f64 == v) {
                            Some(i) => children[i].classify(x),
                            None => majority(*counts),
                        }
                    }
                }
            }
        }
    }
}

fn majority(counts: [usize; 2]) -> Label {
    argmax_label(counts[0] as f64, counts[1] as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C45Model {
    input: InputSpec,
    min_leaf: usize,
    root: Node,
}

impl C45Model {
    /// Grow an unpruned tree.
    pub fn grow(train: &Dataset, min_leaf: usize) -> Result<Self> {
        check_trainable(train)?;
        if min_leaf == 0 {
            return Err(Error::Config(vec!["c45.min_leaf must be >= 1".into()]));
        }
        let rows = train.dense()?;
        let labels = train.labels();
        let kinds = InputSpec::of(train);
        let builder = Builder {
            rows: &rows,
            labels: &labels,
            kinds: kinds.kinds(),
            min_leaf,
        };
        let all: Vec<usize> = (0..rows.len()).collect();
        Ok(Self {
            input: kinds.clone(),
            min_leaf,
            root: builder.build(&all),
        })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }
}

impl Predictor for C45Model {
    fn predict(&self, instance: &Instance) -> Result<Label> {
        let x = self.input.check(instance)?;
        Ok(self.root.classify(&x))
    }
}

fn entropy(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// (information gain, split information) of partitioning `parent` into
/// `branches`.
fn gain_and_split_info(parent: [usize; 2], branches: &[[usize; 2]]) -> (f64, f64) {
    let n = (parent[0] + parent[1]) as f64;
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for b in branches {
        let size = (b[0] + b[1]) as f64;
        if size == 0.0 {
            continue;
        }
        let w = size / n;
        remainder += w * entropy(*b);
        split_info -= w * w.log2();
    }
    (entropy(parent) - remainder, split_info)
}

fn ratio(gain: f64, split_info: f64) -> f64 {
    if split_info <= 0.0 {
        0.0
    } else {
        gain / split_info
    }
}

/// Gain ratio of splitting `d` on `feature`. Categorical features split on
/// every observed value; continuous features need a `threshold`
/// (`<= threshold` vs `> threshold`). Zero when the split has a single branch.
pub fn gain_ratio(d: &Dataset, feature: usize, threshold: Option<f64>) -> Result<f64> {
    if feature >= d.n_features() {
        return Err(Error::Config(vec![format!("feature index {feature} out of range")]));
    }
    if d.is_empty() {
        return Ok(0.0);
    }
    let kind = d.schema().kind(feature);
    let parent = d.class_counts();
    let branches: Vec<[usize; 2]> = match (kind, threshold) {
        (FeatureKind::Continuous, Some(t)) => {
            let mut b = [[0; 2]; 2];
            for inst in d.instances() {
                let v = inst.values[feature].ok_or(Error::MissingValues)?;
                b[usize::from(v > t)][inst.label.index()] += 1;
            }
            b.to_vec()
        }
        (FeatureKind::Categorical { arity }, None) => {
            let mut b = vec![[0; 2]; arity as usize];
            for inst in d.instances() {
                let v = inst.values[feature].ok_or(Error::MissingValues)?;
                b[v as usize][inst.label.index()] += 1;
            }
            b
        }
        (FeatureKind::Continuous, None) => {
            return Err(Error::Config(vec!["continuous feature needs a threshold".into()]))
        }
        (FeatureKind::Categorical { .. }, Some(_)) => {
            return Err(Error::Config(vec!["categorical feature takes no threshold".into()]))
        }
    };
    let (gain, split_info) = gain_and_split_info(parent, &branches);
    Ok(ratio(gain, split_info))
}

struct Candidate {
    feature: usize,
    gain: f64,
    gain_ratio: f64,
    test: SplitTest,
    partitions: Vec<Vec<usize>>,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [Label],
    kinds: &'a [FeatureKind],
    min_leaf: usize,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 2] {
        let mut c = [0; 2];
        for &i in idx {
            c[self.labels[i].index()] += 1;
        }
        c
    }

    fn build(&self, idx: &[usize]) -> Node {
        let counts = self.counts(idx);
        if counts[0] == 0 || counts[1] == 0 || idx.len() < 2 * self.min_leaf {
            return Node::leaf(counts);
        }
        let candidates: Vec<Candidate> = (0..self.kinds.len())
            .filter_map(|f| self.best_split(f, idx, counts))
            .filter(|c| c.gain > 0.0)
            .collect();
        if candidates.is_empty() {
            return Node::leaf(counts);
        }
        // only splits with at least average gain compete on gain ratio
        let mean_gain = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
        let mut best: Option<&Candidate> = None;
        for c in candidates.iter().filter(|c| c.gain >= mean_gain - 1e-12) {
            if best.is_none_or(|b| c.gain_ratio > b.gain_ratio) {
                best = Some(c);
            }
        }
        let best = best.expect("the maximal-gain candidate always passes the guard");
        Node::Split {
            feature: best.feature,
            test: best.test.clone(),
            counts,
            children: best.partitions.iter().map(|p| self.build(p)).collect(),
        }
    }

    fn best_split(&self, feature: usize, idx: &[usize], parent: [usize; 2]) -> Option<Candidate> {
        match self.kinds[feature] {
            FeatureKind::Categorical { .. } => {
                let mut values: Vec<u32> = idx.iter().map(|&i| self.rows[i][feature] as u32).collect();
                values.sort_unstable();
                values.dedup();
                if values.len() < 2 {
                    return None;
                }
                let partitions: Vec<Vec<usize>> = values
                    .iter()
                    .map(|&v| {
                        idx.iter()
                            .copied()
                            .filter(|&i| self.rows[i][feature] as u32 == v)
                            .collect()
                    })
                    .collect();
                if partitions.iter().any(|p| p.len() < self.min_leaf) {
                    return None;
                }
                let branches: Vec<[usize; 2]> = partitions.iter().map(|p| self.counts(p)).collect();
                let (gain, split_info) = gain_and_split_info(parent, &branches);
                Some(Candidate {
                    feature,
                    gain,
                    gain_ratio: ratio(gain, split_info),
                    test: SplitTest::Categories { values },
                    partitions,
                })
            }
            FeatureKind::Continuous => {
                let mut order: Vec<usize> = idx.to_vec();
                order.sort_by(|&a, &b| self.rows[a][feature].total_cmp(&self.rows[b][feature]));
                let n = order.len();
                let mut left = [0usize; 2];
                let mut best: Option<(f64, f64, f64, usize)> = None; // gain, split_info, threshold, cut
                for cut in 1..n {
                    left[self.labels[order[cut - 1]].index()] += 1;
                    let lo = self.rows[order[cut - 1]][feature];
                    let hi = self.rows[order[cut]][feature];
                    if lo == hi || cut < self.min_leaf || n - cut < self.min_leaf {
                        continue;
                    }
                    let right = [parent[0] - left[0], parent[1] - left[1]];
                    let (gain, split_info) = gain_and_split_info(parent, &[left, right]);
                    if best.is_none_or(|b| gain > b.0) {
                        best = Some((gain, split_info, (lo + hi) / 2.0, cut));
                    }
                }
                let (gain, split_info, threshold, cut) = best?;
                let mut lower = order[..cut].to_vec();
                let mut upper = order[cut..].to_vec();
                lower.sort_unstable();
                upper.sort_unstable();
                Some(Candidate {
                    feature,
                    gain,
                    gain_ratio: ratio(gain, split_info),
                    test: SplitTest::Threshold { threshold },
                    partitions: vec![lower, upper],
                })
            }
        }
    }
}

/// Normal deviate for confidence level `cf`; zero (no pessimism) for
/// `cf >= 0.5`.
fn confidence_deviate(cf: f64) -> f64 {
    if cf >= 0.5 {
        return 0.0;
    }
    let normal = Normal::standard();
    normal.inverse_cdf(1.0 - cf)
}

/// Predicted error count `n · U` where `U` is the upper confidence bound
/// (Wilson score form) on the binomial error rate given `errors` out of `n`.
pub fn pessimistic_errors(n: usize, errors: usize, cf: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = confidence_deviate(cf);
    let n_f = n as f64;
    let f = errors as f64 / n_f;
    if z == 0.0 {
        return errors as f64;
    }
    let z2 = z * z;
    let upper = (f + z2 / (2.0 * n_f) + z * (f / n_f - f * f / n_f + z2 / (4.0 * n_f * n_f)).sqrt())
        / (1.0 + z2 / n_f);
    n_f * upper
}

fn leaf_errors(counts: [usize; 2]) -> usize {
    counts[0].min(counts[1])
}

fn subtree_errors(node: &Node, cf: f64) -> f64 {
    node.leaves()
        .iter()
        .map(|leaf| {
            let c = leaf.counts();
            pessimistic_errors(c[0] + c[1], leaf_errors(c), cf)
        })
        .sum()
}

fn prune_node(node: &Node, cf: f64) -> Node {
    match node {
        Node::Leaf { .. } => node.clone(),
        Node::Split {
            feature,
            test,
            counts,
            children,
        } => {
            let pruned = Node::Split {
                feature: *feature,
                test: test.clone(),
                counts: *counts,
                children: children.iter().map(|c| prune_node(c, cf)).collect(),
            };
            let as_leaf = pessimistic_errors(counts[0] + counts[1], leaf_errors(*counts), cf);
            if as_leaf <= subtree_errors(&pruned, cf) + 1e-9 {
                Node::leaf(*counts)
            } else {
                pruned
            }
        }
    }
}

/// Bottom-up pessimistic pruning at confidence `cf`: a subtree collapses to a
/// leaf when the leaf's estimated errors do not exceed the subtree's.
pub fn c45_prune(model: &C45Model, cf: f64) -> C45Model {
    C45Model {
        input: model.input.clone(),
        min_leaf: model.min_leaf,
        root: prune_node(&model.root, cf),
    }
}
