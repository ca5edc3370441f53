//! Naive Bayes with Gaussian likelihoods for continuous columns and
//! Laplace-smoothed categorical likelihoods for one-hot groups. A one-hot
//! group is read as one categorical variable whose value is the position of
//! its 1, or "absent" when the group is all zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::argmax_first;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::rules::ClassCode;

pub const VARIANCE_FLOOR: f64 = 1e-9;
pub const LAPLACE_ALPHA: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianColumn {
    pub column: usize,
    /// Per class; unused for classes with prior 0.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalGroup {
    pub start: usize,
    pub len: usize,
    /// `probs[class][value]`, value `len` meaning "absent".
    pub probs: Vec<Vec<f64>>,
}

impl CategoricalGroup {
    fn value(&self, row: &[f64]) -> usize {
        row[self.start..self.start + self.len].iter().position(|&x| x != 0.0).unwrap_or(self.len)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub priors: Vec<f64>,
    pub gaussians: Vec<GaussianColumn>,
    pub categorical: Vec<CategoricalGroup>,
}

pub fn train_nb(ds: &Dataset) -> Result<NaiveBayesModel> {
    if ds.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = ds.n_classes;
    let width = ds.rows[0].features.len();
    let n = ds.rows.len() as f64;
    let mut class_rows: Vec<Vec<&[f64]>> = vec![Vec::new(); k];
    for r in &ds.rows {
        if r.features.len() != width {
            return Err(Error::WidthMismatch { expected: width, got: r.features.len() });
        }
        let c = usize::from(r.label)
            .checked_sub(1)
            .filter(|&c| c < k)
            .ok_or_else(|| Error::Invariant(format!("label {} outside 1..={k}", r.label)))?;
        class_rows[c].push(&r.features);
    }
    let priors = class_rows.iter().map(|rows| rows.len() as f64 / n).collect();

    let mut gaussians = Vec::new();
    let mut categorical = Vec::new();
    for group in &ds.layout {
        if group.one_hot {
            let mut probs = Vec::with_capacity(k);
            for rows in &class_rows {
                let mut counts = vec![0.0; group.len + 1];
                for row in rows {
                    let v = row[group.range()].iter().position(|&x| x != 0.0).unwrap_or(group.len);
                    counts[v] += 1.0;
                }
                let denom = rows.len() as f64 + LAPLACE_ALPHA * (group.len + 1) as f64;
                probs.push(counts.iter().map(|c| (c + LAPLACE_ALPHA) / denom).collect());
            }
            categorical.push(CategoricalGroup { start: group.start, len: group.len, probs });
        } else {
            for column in group.range() {
                let mut mean = vec![0.0; k];
                let mut variance = vec![VARIANCE_FLOOR; k];
                for (c, rows) in class_rows.iter().enumerate() {
                    if rows.is_empty() {
                        continue;
                    }
                    let m = rows.iter().map(|r| r[column]).sum::<f64>() / rows.len() as f64;
                    let v = rows.iter().map(|r| (r[column] - m).powi(2)).sum::<f64>() / rows.len() as f64;
                    mean[c] = m;
                    variance[c] = v.max(VARIANCE_FLOOR);
                }
                gaussians.push(GaussianColumn { column, mean, variance });
            }
        }
    }
    Ok(NaiveBayesModel { n_classes: k, n_features: width, priors, gaussians, categorical })
}

impl NaiveBayesModel {
    /// Unnormalized log posterior per class; `None` for classes with prior 0.
    pub fn log_joint(&self, row: &[f64]) -> Result<Vec<Option<f64>>> {
        if row.len() != self.n_features {
            return Err(Error::WidthMismatch { expected: self.n_features, got: row.len() });
        }
        Ok((0..self.n_classes)
            .map(|c| {
                if self.priors[c] <= 0.0 {
                    return None;
                }
                let mut s = self.priors[c].ln();
                for g in &self.gaussians {
                    let (m, v) = (g.mean[c], g.variance[c]);
                    let x = row[g.column];
                    s += -0.5 * (2.0 * PI * v).ln() - (x - m).powi(2) / (2.0 * v);
                }
                for g in &self.categorical {
                    s += g.probs[c][g.value(row)].ln();
                }
                Some(s)
            })
            .collect())
    }

    pub fn posterior(&self, row: &[f64]) -> Result<Vec<f64>> {
        let lj = self.log_joint(row)?;
        let m = lj.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = lj.iter().map(|x| x.map_or(0.0, |x| (x - m).exp())).collect();
        let sum: f64 = e.iter().sum();
        Ok(e.into_iter().map(|x| x / sum).collect())
    }

    pub fn predict(&self, row: &[f64]) -> Result<ClassCode> {
        let lj = self.log_joint(row)?;
        argmax_first(lj.iter().enumerate().filter_map(|(c, s)| s.map(|s| ((c + 1) as ClassCode, s))))
            .ok_or_else(|| Error::Invariant("naive Bayes model has no class".into()))
    }
}
