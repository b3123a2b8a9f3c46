//! Multinomial naive Bayes on raw counts, Laplace-smoothed, log-space.
//! Features are the dense columns handed in by the caller; dimensions absent
//! from the training rows contribute nothing at prediction time.

#[derive(Debug, Clone)]
pub struct Multinomial {
    log_prior: [f64; 2],
    /// Per feature, log p(feature | class) for class 0 and 1.
    log_prob: Vec<[f64; 2]>,
}

impl Multinomial {
    pub fn train(rows: &[Vec<f64>], labels: &[bool], alpha: f64) -> Multinomial {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        let mut class_counts = [0usize; 2];
        let mut feature_mass = vec![[0.0f64; 2]; d];
        let mut class_mass = [0.0f64; 2];
        for (row, &label) in rows.iter().zip(labels) {
            let c = label as usize;
            class_counts[c] += 1;
            for (f, &v) in row.iter().enumerate() {
                feature_mass[f][c] += v;
                class_mass[c] += v;
            }
        }
        let log_prior = [0, 1].map(|c| {
            if class_counts[c] == 0 {
                f64::NEG_INFINITY
            } else {
                (class_counts[c] as f64 / n as f64).ln()
            }
        });
        let log_prob = feature_mass
            .iter()
            .map(|mass| {
                [0, 1].map(|c| {
                    ((mass[c] + alpha) / (class_mass[c] + alpha * d as f64)).ln()
                })
            })
            .collect();
        Multinomial {
            log_prior,
            log_prob,
        }
    }

    pub fn scores(&self, row: &[f64]) -> [f64; 2] {
        let mut s = self.log_prior;
        for (f, &v) in row.iter().enumerate() {
            if v > 0.0 {
                s[0] += v * self.log_prob[f][0];
                s[1] += v * self.log_prob[f][1];
            }
        }
        s
    }

    /// Ties go to class 0.
    pub fn predict(&self, row: &[f64]) -> bool {
        let s = self.scores(row);
        s[1] > s[0]
    }
}
