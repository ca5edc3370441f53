//! Multinomial logistic regression with an L2 penalty on the non-intercept
//! weights, fitted by full-batch gradient descent with a backtracking
//! (Armijo) line search from zero initialization.
//!
//! Classes that do not occur in the training data are masked out of the
//! softmax: their optimum lies at an infinite negative intercept, which
//! gradient descent cannot reach.

use serde::{Deserialize, Serialize};

use super::argmax_first;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::rules::ClassCode;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    /// Stop once the largest absolute gradient entry is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo: f64,
    pub shrink: f64,
    pub initial_step: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions { tolerance: 1e-6, max_iterations: 5000, armijo: 1e-4, shrink: 0.5, initial_step: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub lambda: f64,
    /// Row `k` holds class `k + 1`: feature weights, then the intercept.
    pub weights: Vec<Vec<f64>>,
    /// Classes that took part in training.
    pub active: Vec<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    /// Objective value after every accepted step, starting at the initial point.
    pub losses: Vec<f64>,
    pub gradient_max: f64,
    pub converged: bool,
}

/// Training problem in flat form: `w[k * (d + 1) + j]`.
pub struct Problem<'a> {
    rows: Vec<&'a [f64]>,
    labels: Vec<usize>,
    active: Vec<usize>,
    n_features: usize,
    lambda: f64,
}

impl<'a> Problem<'a> {
    pub fn new(ds: &'a Dataset, lambda: f64) -> Result<Self> {
        if ds.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n_features = ds.rows[0].features.len();
        let mut present = vec![false; ds.n_classes];
        let mut labels = Vec::with_capacity(ds.rows.len());
        for r in &ds.rows {
            if r.features.len() != n_features {
                return Err(Error::WidthMismatch { expected: n_features, got: r.features.len() });
            }
            let k = usize::from(r.label)
                .checked_sub(1)
                .filter(|&k| k < ds.n_classes)
                .ok_or_else(|| Error::Invariant(format!("label {} outside 1..={}", r.label, ds.n_classes)))?;
            present[k] = true;
            labels.push(k);
        }
        Ok(Problem {
            rows: ds.rows.iter().map(|r| r.features.as_slice()).collect(),
            labels,
            active: (0..ds.n_classes).filter(|&k| present[k]).collect(),
            n_features,
            lambda,
        })
    }

    fn stride(&self) -> usize {
        self.n_features + 1
    }

    pub fn n_params(&self) -> usize {
        self.active.len() * self.stride()
    }

    /// Penalized negative log-likelihood over the active classes and, if
    /// `grad` is given, its gradient.
    pub fn objective(&self, w: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let stride = self.stride();
        let d = self.n_features;
        let na = self.active.len();
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut logits = vec![0.0; na];
        let mut loss = 0.0;
        for (x, &y) in self.rows.iter().zip(&self.labels) {
            for (a, z) in logits.iter_mut().enumerate() {
                let wk = &w[a * stride..(a + 1) * stride];
                *z = wk[d] + wk[..d].iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>();
            }
            let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = logits.iter().map(|z| (z - m).exp()).sum();
            let lse = m + sum.ln();
            let ya = self.active.iter().position(|&k| k == y).expect("label is active");
            loss += lse - logits[ya];
            if let Some(g) = grad.as_deref_mut() {
                for a in 0..na {
                    let p = (logits[a] - lse).exp();
                    let r = p - if a == ya { 1.0 } else { 0.0 };
                    let gk = &mut g[a * stride..(a + 1) * stride];
                    for (gj, xj) in gk[..d].iter_mut().zip(x.iter()) {
                        *gj += r * xj;
                    }
                    gk[d] += r;
                }
            }
        }
        let mut penalty = 0.0;
        for a in 0..na {
            for j in 0..d {
                let v = w[a * stride + j];
                penalty += v * v;
                if let Some(g) = grad.as_deref_mut() {
                    g[a * stride + j] += self.lambda * v;
                }
            }
        }
        loss + 0.5 * self.lambda * penalty
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn train_logistic(ds: &Dataset, lambda: f64) -> Result<LogisticModel> {
    train_logistic_with(ds, lambda, &LogisticOptions::default()).map(|(m, _)| m)
}

pub fn train_logistic_with(ds: &Dataset, lambda: f64, opts: &LogisticOptions) -> Result<(LogisticModel, TrainReport)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    let problem = Problem::new(ds, lambda)?;
    let n = problem.n_params();
    let mut w = vec![0.0; n];
    let mut report = TrainReport::default();

    // A single present class is degenerate: keep the zero model, which
    // predicts that class because it is the only active one.
    if problem.active.len() > 1 {
        let mut grad = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut loss = problem.objective(&w, Some(&mut grad));
        report.losses.push(loss);
        let mut step = opts.initial_step;
        loop {
            let gmax = max_abs(&grad);
            report.gradient_max = gmax;
            if gmax <= opts.tolerance {
                report.converged = true;
                break;
            }
            if report.iterations >= opts.max_iterations {
                break;
            }
            let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
            // Try a longer step than last time before backtracking.
            step = (step * 2.0).min(1e6);
            let accepted = loop {
                for ((t, wi), gi) in trial.iter_mut().zip(&w).zip(&grad) {
                    *t = wi - step * gi;
                }
                let candidate = problem.objective(&trial, None);
                if candidate <= loss - opts.armijo * step * gnorm2 {
                    break Some(candidate);
                }
                step *= opts.shrink;
                if step < 1e-20 {
                    break None;
                }
            };
            let Some(new_loss) = accepted else { break };
            std::mem::swap(&mut w, &mut trial);
            loss = problem.objective(&w, Some(&mut grad));
            debug_assert!(loss <= new_loss + 1e-12 * new_loss.abs().max(1.0));
            report.losses.push(loss);
            report.iterations += 1;
        }
    } else {
        report.converged = true;
    }

    let stride = problem.stride();
    let mut weights = vec![vec![0.0; stride]; ds.n_classes];
    let mut active = vec![false; ds.n_classes];
    for (a, &k) in problem.active.iter().enumerate() {
        weights[k].copy_from_slice(&w[a * stride..(a + 1) * stride]);
        active[k] = true;
    }
    if weights.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Invariant("non-finite logistic weights".into()));
    }
    Ok((LogisticModel { n_classes: ds.n_classes, n_features: problem.n_features, lambda, weights, active }, report))
}

impl LogisticModel {
    /// A model with all classes active and every weight zero.
    pub fn zeros(n_classes: usize, n_features: usize) -> Self {
        LogisticModel {
            n_classes,
            n_features,
            lambda: 1.0,
            weights: vec![vec![0.0; n_features + 1]; n_classes],
            active: vec![true; n_classes],
        }
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::WidthMismatch { expected: self.n_features, got: row.len() });
        }
        Ok(())
    }

    fn logit(&self, k: usize, row: &[f64]) -> f64 {
        let wk = &self.weights[k];
        wk[self.n_features] + wk[..self.n_features].iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Softmax over the active classes; inactive classes get probability 0.
    pub fn probabilities(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_width(row)?;
        let logits: Vec<Option<f64>> = (0..self.n_classes).map(|k| self.active[k].then(|| self.logit(k, row))).collect();
        let m = logits.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| z.map_or(0.0, |z| (z - m).exp())).collect();
        let sum: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / sum).collect())
    }

    pub fn predict(&self, row: &[f64]) -> Result<ClassCode> {
        self.check_width(row)?;
        argmax_first((0..self.n_classes).filter(|&k| self.active[k]).map(|k| ((k + 1) as ClassCode, self.logit(k, row))))
            .ok_or_else(|| Error::Invariant("logistic model has no active class".into()))
    }

    /// Frobenius norm of the non-intercept weights.
    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().flat_map(|w| &w[..self.n_features]).map(|x| x * x).sum::<f64>().sqrt()
    }
}
