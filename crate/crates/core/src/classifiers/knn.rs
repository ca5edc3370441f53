use serde::{Deserialize, Serialize};

use super::argmax_first;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::rules::ClassCode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<ClassCode>,
}

impl KnnModel {
    pub fn fit(ds: &Dataset, k: usize) -> Result<Self> {
        if ds.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if k == 0 || k > ds.rows.len() {
            return Err(Error::Config(format!("k = {k} must lie in 1..={}", ds.rows.len())));
        }
        Ok(KnnModel {
            k,
            n_classes: ds.n_classes,
            points: ds.rows.iter().map(|r| r.features.clone()).collect(),
            labels: ds.labels(),
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<ClassCode> {
        let width = self.points[0].len();
        if row.len() != width {
            return Err(Error::WidthMismatch { expected: width, got: row.len() });
        }
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        // Stable sort keeps row order among equal distances.
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut votes = vec![0usize; self.n_classes.max(1) + 1];
        for &(_, i) in order.iter().take(self.k) {
            let l = usize::from(self.labels[i]);
            if l >= votes.len() {
                votes.resize(l + 1, 0);
            }
            votes[l] += 1;
        }
        Ok(argmax_first(votes.iter().enumerate().skip(1).map(|(c, &v)| (c as ClassCode, v as f64))).expect("at least one class"))
    }
}

pub fn knn_predict(ds: &Dataset, row: &[f64], k: usize) -> Result<ClassCode> {
    KnnModel::fit(ds, k)?.predict(row)
}
