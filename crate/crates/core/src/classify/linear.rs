//! Ridge least squares on {0,1} targets. The ridge term keeps the normal
//! equations positive definite on rank-deficient sparse neighborhoods, so
//! Cholesky factorization never fails.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct Ridge {
    /// Feature weights followed by the intercept weight.
    weights: Vec<f64>,
}

impl Ridge {
    /// Fit θ = argmin ‖Xθ − y‖² + α‖θ‖², with an appended all-ones column
    /// as the intercept. When features outnumber rows the dual form
    /// θ = Xᵀ(XXᵀ + αI)⁻¹y solves the same system through the smaller Gram
    /// matrix.
    pub fn train(rows: &[Vec<f64>], labels: &[bool], alpha: f64) -> Ridge {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.len()) + 1;
        let x = DMatrix::from_fn(n, d, |r, c| {
            if c + 1 == d {
                1.0
            } else {
                rows[r][c]
            }
        });
        let y = DVector::from_fn(n, |r, _| if labels[r] { 1.0 } else { 0.0 });
        let weights = if d <= n {
            let mut gram = x.transpose() * &x;
            for i in 0..d {
                gram[(i, i)] += alpha;
            }
            let rhs = x.transpose() * &y;
            gram.cholesky().expect("ridge gram is positive definite").solve(&rhs)
        } else {
            let mut gram = &x * x.transpose();
            for i in 0..n {
                gram[(i, i)] += alpha;
            }
            let dual = gram.cholesky().expect("ridge gram is positive definite").solve(&y);
            x.transpose() * dual
        };
        Ridge {
            weights: weights.iter().copied().collect(),
        }
    }

    pub fn decision_value(&self, row: &[f64]) -> f64 {
        let d = self.weights.len();
        let mut v = self.weights[d - 1];
        for (w, x) in self.weights[..d - 1].iter().zip(row) {
            v += w * x;
        }
        v
    }

    /// Threshold 0.5; a value exactly on the threshold goes to `false`.
    pub fn predict(&self, row: &[f64]) -> bool {
        self.decision_value(row) > 0.5
    }
}
