//! Random forest over dense feature rows, written for small neighborhood
//! datasets: bootstrap resampling, per-split feature sampling, Gini impurity,
//! leaf majority. All randomness comes from the caller's stream, so a fixed
//! seed fixes the forest.

use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    /// Below this many training rows the forest degenerates to a majority
    /// vote; tiny bootstrap samples produce meaningless trees.
    pub min_rows: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 50,
            max_depth: 8,
            min_rows: 5,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(bool),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn predict(&self, row: &[f64]) -> bool {
        match self {
            Node::Leaf(l) => *l,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Forest {
    trees: Vec<Node>,
    fallback: Option<bool>,
}

/// Majority with ties toward `false`, matching the neighborhood-majority
/// convention used everywhere else.
fn majority(labels: &[bool], idx: &[usize]) -> bool {
    let pos = idx.iter().filter(|&&i| labels[i]).count();
    pos * 2 > idx.len()
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [bool],
    max_depth: usize,
    n_features: usize,
    sample_size: usize,
}

impl TreeBuilder<'_> {
    /// Distinct feature ids via partial Fisher-Yates; order is part of the
    /// deterministic tie-break (first strictly better split wins).
    fn sample_features(&self, stream: &mut Stream) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..self.n_features).collect();
        let m = self.sample_size.min(self.n_features);
        for slot in 0..m {
            let pick = slot + stream.next_below((self.n_features - slot) as u64) as usize;
            pool.swap(slot, pick);
        }
        pool.truncate(m);
        pool
    }

    fn build(&self, idx: &[usize], depth: usize, stream: &mut Stream) -> Node {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        if pos == 0 || pos == idx.len() {
            return Node::Leaf(pos == idx.len());
        }
        if depth == self.max_depth {
            return Node::Leaf(majority(self.labels, idx));
        }
        let mut best: Option<(f64, usize, f64)> = None;
        for feature in self.sample_features(stream) {
            let mut values: Vec<(f64, bool)> = idx
                .iter()
                .map(|&i| (self.rows[i][feature], self.labels[i]))
                .collect();
            values.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let total_pos = pos;
            let mut left_n = 0usize;
            let mut left_pos = 0usize;
            for w in 0..values.len() - 1 {
                left_n += 1;
                if values[w].1 {
                    left_pos += 1;
                }
                if values[w].0 == values[w + 1].0 {
                    continue;
                }
                let right_n = idx.len() - left_n;
                let weighted = (left_n as f64 * gini(left_pos, left_n)
                    + right_n as f64 * gini(total_pos - left_pos, right_n))
                    / idx.len() as f64;
                let threshold = values[w].0 + (values[w + 1].0 - values[w].0) / 2.0;
                if best.map_or(true, |(b, _, _)| weighted < b) {
                    best = Some((weighted, feature, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return Node::Leaf(majority(self.labels, idx));
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(&left_idx, depth + 1, stream)),
            right: Box::new(self.build(&right_idx, depth + 1, stream)),
        }
    }
}

impl Forest {
    pub fn train(
        rows: &[Vec<f64>],
        labels: &[bool],
        params: &ForestParams,
        stream: &mut Stream,
    ) -> Forest {
        assert_eq!(rows.len(), labels.len());
        if rows.len() < params.min_rows {
            let all: Vec<usize> = (0..labels.len()).collect();
            return Forest {
                trees: Vec::new(),
                fallback: Some(majority(labels, &all)),
            };
        }
        let n_features = rows[0].len();
        let builder = TreeBuilder {
            rows,
            labels,
            max_depth: params.max_depth,
            n_features,
            sample_size: (n_features as f64).sqrt().ceil() as usize,
        };
        let trees = (0..params.trees)
            .map(|t| {
                let mut tree_stream = stream.derive(t as u64);
                let sample: Vec<usize> = (0..rows.len())
                    .map(|_| tree_stream.next_below(rows.len() as u64) as usize)
                    .collect();
                builder.build(&sample, 0, &mut tree_stream)
            })
            .collect();
        Forest {
            trees,
            fallback: None,
        }
    }

    /// Majority vote over trees; ties toward `false`.
    pub fn predict(&self, row: &[f64]) -> bool {
        if let Some(l) = self.fallback {
            return l;
        }
        let pos = self.trees.iter().filter(|t| t.predict(row)).count();
        pos * 2 > self.trees.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(stream: &mut Stream, n_per_class: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..2 * n_per_class {
            let pos = i % 2 == 0;
            let center = if pos { 6.0 } else { 1.0 };
            rows.push(vec![
                center + stream.next_standard_normal() * 0.5,
                center + stream.next_standard_normal() * 0.5,
            ]);
            labels.push(pos);
        }
        (rows, labels)
    }

    #[test]
    fn tiny_training_sets_fall_back_to_majority() {
        let rows = vec![vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![true, true, false];
        let mut stream = Stream::new(1, "rf-test");
        let f = Forest::train(&rows, &labels, &ForestParams::default(), &mut stream);
        assert!(f.predict(&[0.0]));
        assert!(f.predict(&[100.0]));
    }

    #[test]
    fn separable_data_is_learned_across_seeds() {
        let mut correct = 0;
        let total = 100;
        for seed in 0..total {
            let mut stream = Stream::new(seed, "rf-separable");
            let (rows, labels) = separable(&mut stream, 10);
            let f = Forest::train(&rows, &labels, &ForestParams::default(), &mut stream);
            let hit = f.predict(&[6.0, 6.0]) && !f.predict(&[1.0, 1.0]);
            if hit {
                correct += 1;
            }
        }
        assert!(correct >= 95, "only {correct}/{total} seeds learned the split");
    }

    #[test]
    fn same_seed_gives_identical_predictions() {
        let mut s1 = Stream::new(9, "rf-det");
        let (rows, labels) = separable(&mut s1, 15);
        let f1 = Forest::train(&rows, &labels, &ForestParams::default(), &mut Stream::new(3, "rf-train"));
        let f2 = Forest::train(&rows, &labels, &ForestParams::default(), &mut Stream::new(3, "rf-train"));
        for row in &rows {
            assert_eq!(f1.predict(row), f2.predict(row));
        }
    }

    #[test]
    fn pure_nodes_stop_splitting() {
        let rows = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0], vec![2.0], vec![2.0]];
        let labels = vec![true; 6];
        let mut stream = Stream::new(4, "rf-pure");
        let f = Forest::train(&rows, &labels, &ForestParams::default(), &mut stream);
        assert!(f.predict(&[5.0]));
    }
}
