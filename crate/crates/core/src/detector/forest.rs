//! Random forest classifier with Gini splits, bootstrap resampling, sqrt-d
//! feature subsampling, and mean-decrease-impurity importances.
//!
//! Determinism: all randomness comes from one SplitMix64 seed, training
//! rows are canonicalized (sorted) before anything is drawn, and split
//! ties break on the lowest feature index then lowest threshold — so the
//! fitted forest is a pure function of (data multiset, seed), independent
//! of input row order.

use crate::corpus::Label;
use crate::rng::Rng;

use super::DetectorError;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        ai_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict_ai_fraction(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { ai_fraction } => return *ai_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            min_leaf: 1,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Tree>,
    n_features: usize,
    /// Raw (unnormalized) impurity-decrease totals per feature.
    importance_raw: Vec<f64>,
    pub params: ForestParams,
    pub seed: u64,
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [Label],
    n_candidates: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    n_total: f64,
    nodes: Vec<Node>,
    importance: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

fn gini(n_ai: usize, n_total: usize) -> f64 {
    if n_total == 0 {
        return 0.0;
    }
    let p = n_ai as f64 / n_total as f64;
    2.0 * p * (1.0 - p)
}

impl<'a> TreeBuilder<'a> {
    /// Best split on one feature, or None if the feature is constant over
    /// the node.
    fn best_split_on(&self, idx: &[usize], feature: usize) -> Option<SplitChoice> {
        let mut vals: Vec<(f64, Label)> = idx
            .iter()
            .map(|&i| (self.rows[i][feature], self.labels[i]))
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let n = vals.len();
        let total_ai = vals.iter().filter(|(_, l)| *l == Label::Ai).count();
        let parent = gini(total_ai, n);

        let mut best: Option<SplitChoice> = None;
        let mut left_ai = 0usize;
        for i in 1..n {
            if vals[i - 1].1 == Label::Ai {
                left_ai += 1;
            }
            if vals[i].0 == vals[i - 1].0 {
                continue;
            }
            if i < self.min_leaf || n - i < self.min_leaf {
                continue;
            }
            let right_ai = total_ai - left_ai;
            let weighted = (i as f64 * gini(left_ai, i)
                + (n - i) as f64 * gini(right_ai, n - i))
                / n as f64;
            let decrease = parent - weighted;
            let threshold = vals[i - 1].0 + (vals[i].0 - vals[i - 1].0) / 2.0;
            let better = match &best {
                None => decrease > 1e-15,
                Some(b) => decrease > b.decrease + 1e-15,
            };
            if better {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
        best
    }

    fn choose_split(&self, idx: &[usize], rng: &mut Rng) -> Option<SplitChoice> {
        let d = self.rows[0].len();
        let candidates = rng.sample_indices(d, self.n_candidates.min(d));
        let pick_best = |features: &[usize]| -> Option<SplitChoice> {
            let mut best: Option<SplitChoice> = None;
            for &f in features {
                if let Some(s) = self.best_split_on(idx, f) {
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            s.decrease > b.decrease + 1e-15
                                || ((s.decrease - b.decrease).abs() <= 1e-15
                                    && (s.feature, s.threshold) < (b.feature, b.threshold))
                        }
                    };
                    if better {
                        best = Some(s);
                    }
                }
            }
            best
        };
        let mut sorted_candidates = candidates;
        sorted_candidates.sort_unstable();
        if let Some(s) = pick_best(&sorted_candidates) {
            return Some(s);
        }
        // All sampled candidates were constant or uninformative: widen the
        // search to every feature before giving up on the node.
        let all: Vec<usize> = (0..d).collect();
        pick_best(&all)
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        let n = idx.len();
        let n_ai = idx
            .iter()
            .filter(|&&i| self.labels[i] == Label::Ai)
            .count();
        let make_leaf = |nodes: &mut Vec<Node>| {
            nodes.push(Node::Leaf {
                ai_fraction: n_ai as f64 / n as f64,
            });
            nodes.len() - 1
        };
        if n_ai == 0 || n_ai == n || n < 2 * self.min_leaf {
            return make_leaf(&mut self.nodes);
        }
        if let Some(limit) = self.max_depth {
            if depth >= limit {
                return make_leaf(&mut self.nodes);
            }
        }
        let Some(split) = self.choose_split(&idx, rng) else {
            return make_leaf(&mut self.nodes);
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.rows[i][split.feature] <= split.threshold);
        self.importance[split.feature] += n as f64 * split.decrease / self.n_total;

        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { ai_fraction: 0.0 }); // placeholder
        let left = self.build(left_idx, depth + 1, rng);
        let right = self.build(right_idx, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

impl RandomForest {
    /// Fit a forest. `rows` are feature vectors sharing one schema; labels
    /// must contain both classes.
    pub fn fit(
        rows: &[Vec<f64>],
        labels: &[Label],
        params: ForestParams,
        seed: u64,
    ) -> Result<RandomForest, DetectorError> {
        assert_eq!(rows.len(), labels.len());
        if rows.is_empty() {
            return Err(DetectorError::SingleClass);
        }
        let d = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == d), "ragged feature rows");
        assert!(
            rows.iter().flatten().all(|v| v.is_finite()),
            "features must be finite"
        );
        let n_ai = labels.iter().filter(|l| **l == Label::Ai).count();
        if n_ai == 0 || n_ai == labels.len() {
            return Err(DetectorError::SingleClass);
        }

        // Canonicalize row order so the fit is invariant to input order.
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| {
            rows[a]
                .iter()
                .zip(&rows[b])
                .find_map(|(x, y)| {
                    let c = x.partial_cmp(y).expect("finite features");
                    (c != std::cmp::Ordering::Equal).then_some(c)
                })
                .unwrap_or_else(|| labels[a].cmp(&labels[b]))
        });
        let canon_rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
        let canon_labels: Vec<Label> = order.iter().map(|&i| labels[i]).collect();

        let n_candidates = ((d as f64).sqrt().floor() as usize).max(1);
        let mut root_rng = Rng::new(seed);
        let mut trees = Vec::with_capacity(params.n_trees);
        let mut importance_raw = vec![0.0f64; d];
        for _ in 0..params.n_trees {
            let mut tree_rng = root_rng.fork();
            let n = canon_rows.len();
            let bootstrap: Vec<usize> = (0..n)
                .map(|_| tree_rng.gen_range(n as u64) as usize)
                .collect();
            let mut builder = TreeBuilder {
                rows: &canon_rows,
                labels: &canon_labels,
                n_candidates,
                min_leaf: params.min_leaf,
                max_depth: params.max_depth,
                n_total: bootstrap.len() as f64,
                nodes: Vec::new(),
                importance: vec![0.0f64; d],
            };
            builder.build(bootstrap, 0, &mut tree_rng);
            for (acc, v) in importance_raw.iter_mut().zip(&builder.importance) {
                *acc += v;
            }
            trees.push(Tree {
                nodes: builder.nodes,
            });
        }
        Ok(RandomForest {
            trees,
            n_features: d,
            importance_raw,
            params,
            seed,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Probability of the AI label: mean over trees of the reached leaf's
    /// AI class fraction (for fully grown trees the leaves are pure, so
    /// this is the fraction of trees voting AI).
    pub fn predict_proba_ai(&self, row: &[f64]) -> Result<f64, DetectorError> {
        if row.len() != self.n_features {
            return Err(DetectorError::SchemaMismatch {
                expected: format!("{} features", self.n_features),
                got: format!("{} features", row.len()),
            });
        }
        let sum: f64 = self
            .trees
            .iter()
            .map(|t| t.predict_ai_fraction(row))
            .sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// Mean-decrease-impurity importances normalized to sum to 1. A
    /// feature never used in any split (for instance one that is constant
    /// across the dataset) has importance exactly 0. If no split exists
    /// anywhere the importances are all zero.
    pub fn importances(&self) -> Vec<f64> {
        let total: f64 = self.importance_raw.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.n_features];
        }
        self.importance_raw.iter().map(|v| v / total).collect()
    }
}
