//! Deterministic classifiers. Every tie is broken towards the smallest
//! class code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, DatasetRow};
use crate::rules::ClassCode;

pub mod genealogy;
pub mod knn;
pub mod logistic;
pub mod naive_bayes;

pub use genealogy::{genealogy_predict, genealogy_vote, GenealogyLevel, GenealogyModel};
pub use knn::{knn_predict, KnnModel};
pub use logistic::{train_logistic, LogisticModel, LogisticOptions, TrainReport};
pub use naive_bayes::{train_nb, NaiveBayesModel};

/// Regularization strengths swept by default.
pub const DEFAULT_LAMBDAS: [f64; 5] = [1.0, 0.5, 0.1, 0.01, 1e-8];
pub const DEFAULT_KS: [usize; 4] = [1, 3, 5, 7];

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Majority,
    GenusMajority,
    FamilyMajority,
    NaiveBayes,
    Logistic { lambda: f64 },
    Knn { k: usize },
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierSpec::Logistic { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::Config(format!("lambda must be positive, got {lambda}")))
            }
            ClassifierSpec::Knn { k: 0 } => Err(Error::Config("k must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn train(&self, ds: &Dataset) -> Result<TrainedModel> {
        self.validate()?;
        if ds.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(match *self {
            ClassifierSpec::Majority => TrainedModel::Majority { class: majority_train(&ds.labels()).expect("nonempty") },
            ClassifierSpec::GenusMajority => TrainedModel::Genealogy(GenealogyModel::fit(ds, GenealogyLevel::Genus)),
            ClassifierSpec::FamilyMajority => TrainedModel::Genealogy(GenealogyModel::fit(ds, GenealogyLevel::Family)),
            ClassifierSpec::NaiveBayes => TrainedModel::NaiveBayes(train_nb(ds)?),
            ClassifierSpec::Logistic { lambda } => TrainedModel::Logistic(train_logistic(ds, lambda)?),
            ClassifierSpec::Knn { k } => TrainedModel::Knn(KnnModel::fit(ds, k)?),
        })
    }

    /// Column label used in reports.
    pub fn label(&self) -> String {
        match *self {
            ClassifierSpec::Majority => "Majority".into(),
            ClassifierSpec::GenusMajority => "Same Genus".into(),
            ClassifierSpec::FamilyMajority => "Same Family".into(),
            ClassifierSpec::NaiveBayes => "Naive Bayes".into(),
            ClassifierSpec::Logistic { lambda } => lambda_label(lambda),
            ClassifierSpec::Knn { k } => format!("kNN{k}"),
        }
    }
}

/// `LR1`, `LR.5`, `LR.01`, `LR-8` style labels.
pub fn lambda_label(lambda: f64) -> String {
    if lambda >= 1.0 && lambda.fract() == 0.0 {
        return format!("LR{}", lambda as u64);
    }
    if lambda < 1.0 {
        let exp = -lambda.log10();
        if exp >= 3.0 && (exp - exp.round()).abs() < 1e-9 {
            return format!("LR-{}", exp.round() as i64);
        }
        let s = lambda.to_string();
        return format!("LR{}", s.trim_start_matches('0'));
    }
    format!("LR{lambda}")
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ClassifierSpec::Majority => f.write_str("majority"),
            ClassifierSpec::GenusMajority => f.write_str("genus"),
            ClassifierSpec::FamilyMajority => f.write_str("family"),
            ClassifierSpec::NaiveBayes => f.write_str("nb"),
            ClassifierSpec::Logistic { lambda } => write!(f, "lr:{lambda}"),
            ClassifierSpec::Knn { k } => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s.as_str(), None),
        };
        let bad = || Error::Config(format!("unknown classifier `{s}`"));
        let spec = match (kind, arg) {
            ("majority", None) => ClassifierSpec::Majority,
            ("genus", None) => ClassifierSpec::GenusMajority,
            ("family", None) => ClassifierSpec::FamilyMajority,
            ("nb", None) => ClassifierSpec::NaiveBayes,
            ("lr", Some(a)) => ClassifierSpec::Logistic { lambda: a.parse().map_err(|_| bad())? },
            ("knn", Some(a)) => ClassifierSpec::Knn { k: a.parse().map_err(|_| bad())? },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Most frequent label; ties go to the smallest code.
pub fn majority_train(labels: &[ClassCode]) -> Option<ClassCode> {
    let mut counts = [0usize; 256];
    for &l in labels {
        counts[usize::from(l)] += 1;
    }
    let (best, &n) = counts.iter().enumerate().rev().max_by_key(|(_, &c)| c)?;
    (n > 0).then_some(best as ClassCode)
}

/// Index of the maximum score; ties go to the first index.
pub(crate) fn argmax_first(scores: impl IntoIterator<Item = (ClassCode, f64)>) -> Option<ClassCode> {
    let mut best: Option<(ClassCode, f64)> = None;
    for (c, s) in scores {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((c, s)),
        }
    }
    best.map(|(c, _)| c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Majority { class: ClassCode },
    Genealogy(GenealogyModel),
    NaiveBayes(NaiveBayesModel),
    Logistic(LogisticModel),
    Knn(KnnModel),
}

impl TrainedModel {
    pub fn predict(&self, row: &DatasetRow) -> Result<ClassCode> {
        match self {
            TrainedModel::Majority { class } => Ok(*class),
            TrainedModel::Genealogy(m) => Ok(m.predict(Some(&row.genus), Some(&row.family))),
            TrainedModel::NaiveBayes(m) => m.predict(&row.features),
            TrainedModel::Logistic(m) => m.predict(&row.features),
            TrainedModel::Knn(m) => m.predict(&row.features),
        }
    }

    /// Versioned JSON for inspection.
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "format_version": MODEL_FORMAT_VERSION,
            "model": self,
        });
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }
}
