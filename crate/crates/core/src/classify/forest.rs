use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::TrainingSet;
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::par;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
    /// Fit each tree on a bootstrap resample (off: every tree sees all rows).
    pub bootstrap: bool,
    /// Keep at most this many negatives per positive; `None` keeps all.
    pub max_negative_ratio: Option<f64>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            seed: 0,
            bootstrap: true,
            max_negative_ratio: Some(20.0),
        }
    }
}

/// Binary tree in flat arrays. Node 0 is the root; `feature[i] < 0` marks a
/// leaf whose positive fraction is `value[i]`. Internal nodes send `x[f] <=
/// threshold` to `left`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tree {
    pub feature: Vec<i64>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub value: Vec<f64>,
}

impl Tree {
    /// A single leaf predicting `value`.
    pub fn leaf(value: f64) -> Self {
        Tree {
            feature: vec![-1],
            threshold: vec![0.0],
            left: vec![0],
            right: vec![0],
            value: vec![value],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            let f = self.feature[i];
            if f < 0 {
                return self.value[i];
            }
            i = if x[f as usize] <= self.threshold[i] {
                self.left[i] as usize
            } else {
                self.right[i] as usize
            };
        }
    }

    /// Structural checks used after deserialisation.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = self.feature.len();
        let bad = |what: String| Err(Error::InvalidArgument(format!("malformed tree: {what}")));
        if n == 0
            || [
                self.threshold.len(),
                self.left.len(),
                self.right.len(),
                self.value.len(),
            ] != [n; 4]
        {
            return bad("array lengths differ or tree is empty".into());
        }
        for i in 0..n {
            if !(0.0..=1.0).contains(&self.value[i]) {
                return bad(format!("node {i} value {} outside [0, 1]", self.value[i]));
            }
            if self.feature[i] >= 0 {
                // children must come after their parent, which also rules out cycles
                let (l, r) = (self.left[i] as usize, self.right[i] as usize);
                if self.feature[i] as usize >= dim || l <= i || r <= i || l >= n || r >= n {
                    return bad(format!("node {i} has invalid feature or children"));
                }
            }
        }
        Ok(())
    }

    fn push(&mut self, value: f64) -> usize {
        self.feature.push(-1);
        self.threshold.push(0.0);
        self.left.push(0);
        self.right.push(0);
        self.value.push(value);
        self.feature.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestModel {
    pub kind: FeatureKind,
    pub dim: usize,
    pub config: ForestConfig,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Mean leaf positive fraction over the trees.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        if self.trees.is_empty() {
            return Err(Error::InvalidArgument("forest has no trees".into()));
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        Ok((sum / self.trees.len() as f64).clamp(0.0, 1.0))
    }

    pub fn predict_prob(&self, x: &FeatureVector) -> Result<f64> {
        if x.kind != self.kind {
            return Err(Error::InvalidArgument(format!(
                "{:?} vector given to a {:?} model",
                x.kind, self.kind
            )));
        }
        self.predict(&x.values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidArgument("forest has no trees".into()));
        }
        self.trees.iter().try_for_each(|t| t.validate(self.dim))
    }
}

/// Rows kept for training: every positive, and negatives subsampled to the
/// configured ratio with a seeded shuffle. Returned in ascending row order.
fn training_rows(ts: &TrainingSet, cfg: &ForestConfig) -> Vec<usize> {
    let pos: Vec<usize> = (0..ts.len()).filter(|&i| ts.labels[i]).collect();
    let mut neg: Vec<usize> = (0..ts.len()).filter(|&i| !ts.labels[i]).collect();
    if let Some(ratio) = cfg.max_negative_ratio {
        let cap = ((pos.len() as f64 * ratio).ceil() as usize).max(1);
        if neg.len() > cap {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            neg.shuffle(&mut rng);
            neg.truncate(cap);
        }
    }
    let mut rows = pos;
    rows.extend(neg);
    rows.sort_unstable();
    rows
}

pub fn train_forest(ts: &TrainingSet, cfg: &ForestConfig) -> Result<ForestModel> {
    if cfg.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    let positives = ts.positives();
    if positives == 0 || positives == ts.len() {
        return Err(Error::DegenerateTrainingSet(format!(
            "{:?} set has {} positive and {} negative rows",
            ts.kind,
            positives,
            ts.len() - positives
        )));
    }
    if let Some(row) = ts.rows.iter().find(|r| r.len() != ts.dim) {
        return Err(Error::DimensionMismatch {
            expected: ts.dim,
            actual: row.len(),
        });
    }
    let rows = training_rows(ts, cfg);
    let trees = par::map_range(cfg.n_trees, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64 + 1);
        let sample: Vec<usize> = if cfg.bootstrap {
            (0..rows.len()).map(|_| rows[rng.gen_range(0..rows.len())]).collect()
        } else {
            rows.clone()
        };
        grow_tree(ts, sample, cfg, &mut rng)
    });
    Ok(ForestModel {
        kind: ts.kind,
        dim: ts.dim,
        config: cfg.clone(),
        trees,
    })
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn fraction(ts: &TrainingSet, idx: &[usize]) -> (usize, f64) {
    let pos = idx.iter().filter(|&&i| ts.labels[i]).count();
    (pos, pos as f64 / idx.len() as f64)
}

fn grow_tree(ts: &TrainingSet, sample: Vec<usize>, cfg: &ForestConfig, rng: &mut ChaCha8Rng) -> Tree {
    let mtry = ((ts.dim as f64).sqrt().round() as usize).clamp(1, ts.dim.max(1));
    let min_leaf = cfg.min_leaf.max(1);
    let mut tree = Tree::default();
    let (_, root_value) = fraction(ts, &sample);
    let root = tree.push(root_value);
    let mut stack = vec![(root, sample, 0usize)];
    let mut features: Vec<usize> = (0..ts.dim).collect();
    let mut column: Vec<(f64, bool)> = Vec::new();
    while let Some((node, idx, depth)) = stack.pop() {
        let (pos, _) = fraction(ts, &idx);
        let n = idx.len();
        if depth >= cfg.max_depth || n < 2 * min_leaf || pos == 0 || pos == n {
            continue;
        }
        let parent_score = (pos * pos + (n - pos) * (n - pos)) as f64 / n as f64;
        let mut best: Option<Split> = None;
        let mut any_usable = false;
        // partial Fisher-Yates: features are drawn without replacement, and
        // drawing continues past mtry while no drawn feature varies in the node
        for k in 0..ts.dim {
            if k >= mtry && any_usable {
                break;
            }
            let j = rng.gen_range(k..ts.dim);
            features.swap(k, j);
            let f = features[k];
            column.clear();
            column.extend(idx.iter().map(|&i| (ts.rows[i][f], ts.labels[i])));
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if column[0].0 == column[n - 1].0 {
                continue;
            }
            any_usable = true;
            let mut left_pos = 0usize;
            for s in 0..n - 1 {
                if column[s].1 {
                    left_pos += 1;
                }
                let (a, b) = (column[s].0, column[s + 1].0);
                let nl = s + 1;
                if a == b || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let nr = n - nl;
                let right_pos = pos - left_pos;
                let score = (left_pos * left_pos + (nl - left_pos) * (nl - left_pos)) as f64 / nl as f64
                    + (right_pos * right_pos + (nr - right_pos) * (nr - right_pos)) as f64 / nr as f64;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mid = a + (b - a) / 2.0;
                    best = Some(Split {
                        feature: f,
                        threshold: if mid < b { mid } else { a },
                        score,
                    });
                }
            }
        }
        let Some(split) = best.filter(|s| s.score > parent_score + 1e-12) else {
            continue;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| ts.rows[i][split.feature] <= split.threshold);
        let l = tree.push(fraction(ts, &left_idx).1);
        let r = tree.push(fraction(ts, &right_idx).1);
        tree.feature[node] = split.feature as i64;
        tree.threshold[node] = split.threshold;
        tree.left[node] = l as u32;
        tree.right[node] = r as u32;
        stack.push((r, right_idx, depth + 1));
        stack.push((l, left_idx, depth + 1));
    }
    tree
}

/// Area under the ROC curve (Mann-Whitney statistic, ties count one half).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let (mut rank_sum, mut i) = (0.0, 0);
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += avg_rank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return 0.5;
    }
    (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn set(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> TrainingSet {
        TrainingSet {
            kind: FeatureKind::Move,
            dim: rows[0].len(),
            rows,
            labels,
        }
    }

    fn separable(seed: u64) -> TrainingSet {
        // two classes on either side of the line x + y = 0 with margin 1
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 2.0).unwrap();
        let (mut rows, mut labels) = (Vec::new(), Vec::new());
        while rows.len() < 200 {
            let (x, y): (f64, f64) = (noise.sample(&mut rng), noise.sample(&mut rng));
            let d = (x + y) / 2f64.sqrt();
            if d.abs() < 0.5 {
                continue;
            }
            rows.push(vec![x, y]);
            labels.push(d > 0.0);
        }
        set(rows, labels)
    }

    #[test]
    fn separable_set_trains_to_high_auc() {
        let ts = separable(3);
        let m = train_forest(&ts, &ForestConfig::default()).unwrap();
        let scores: Vec<f64> = ts.rows.iter().map(|r| m.predict(r).unwrap()).collect();
        assert!(roc_auc(&scores, &ts.labels) >= 0.99);
        m.validate().unwrap();
    }

    #[test]
    fn constant_features_predict_base_rate() {
        let rows = vec![vec![1.0, 2.0]; 10];
        let labels = (0..10).map(|i| i < 3).collect();
        let ts = set(rows, labels);
        let cfg = ForestConfig {
            bootstrap: false,
            n_trees: 5,
            ..Default::default()
        };
        let m = train_forest(&ts, &cfg).unwrap();
        assert_eq!(m.predict(&[1.0, 2.0]).unwrap(), 0.3);
        assert_eq!(m.predict(&[-5.0, 9.0]).unwrap(), 0.3);
    }

    #[test]
    fn single_class_is_rejected() {
        let ts = set(vec![vec![0.0]; 4], vec![true; 4]);
        assert!(matches!(
            train_forest(&ts, &ForestConfig::default()),
            Err(Error::DegenerateTrainingSet(_))
        ));
    }

    #[test]
    fn deterministic_and_parallel_agnostic() {
        let mut ts = separable(9);
        let rows = ts.rows.clone();
        let labels = ts.labels.clone();
        ts.rows.extend(rows);
        ts.labels.extend(labels);
        let cfg = ForestConfig {
            n_trees: 20,
            ..Default::default()
        };
        let a = train_forest(&ts, &cfg).unwrap();
        let b = train_forest(&ts, &cfg).unwrap();
        let c = par::sequential(|| train_forest(&ts, &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn prediction_is_mean_of_leaves() {
        let model = |trees: Vec<Tree>| ForestModel {
            kind: FeatureKind::Move,
            dim: 1,
            config: ForestConfig::default(),
            trees,
        };
        assert_eq!(model(vec![Tree::leaf(1.0); 4]).predict(&[0.0]).unwrap(), 1.0);
        assert_eq!(model(vec![Tree::leaf(0.0); 4]).predict(&[0.0]).unwrap(), 0.0);
        let half = model(vec![Tree::leaf(1.0), Tree::leaf(0.0), Tree::leaf(1.0), Tree::leaf(0.0)]);
        assert_eq!(half.predict(&[0.0]).unwrap(), 0.5);
        assert!(matches!(
            half.predict(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut more = half.clone();
        more.trees.push(Tree::leaf(1.0));
        assert!(more.predict(&[0.0]).unwrap() >= half.predict(&[0.0]).unwrap());
    }

    #[test]
    fn negatives_are_downsampled() {
        let mut labels = vec![false; 100];
        labels[0] = true;
        let ts = set((0..100).map(|i| vec![i as f64]).collect(), labels);
        let cfg = ForestConfig::default();
        let rows = training_rows(&ts, &cfg);
        assert_eq!(rows.len(), 21);
        assert!(rows.contains(&0));
        assert_eq!(rows, training_rows(&ts, &cfg));
    }

    #[test]
    fn auc_oracle() {
        assert_eq!(roc_auc(&[0.1, 0.9], &[false, true]), 1.0);
        assert_eq!(roc_auc(&[0.9, 0.1], &[false, true]), 0.0);
        assert_eq!(roc_auc(&[0.5, 0.5], &[false, true]), 0.5);
        // 3 pos, 2 neg; pairs won: (0.8>0.3,0.8>0.6,0.7>0.3,0.7>0.6,0.4>0.3) = 5 of 6
        assert!((roc_auc(&[0.8, 0.7, 0.4, 0.3, 0.6], &[true, true, true, false, false]) - 5.0 / 6.0).abs() < 1e-15);
    }
}
