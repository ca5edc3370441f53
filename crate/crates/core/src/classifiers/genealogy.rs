//! Majority label propagation from genealogically related languages.

use serde::{Deserialize, Serialize};

use super::majority_train;
use crate::error::Result;
use crate::features::Dataset;
use crate::rules::{ClassCode, RuleId};
use crate::wals::WalsDatabase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenealogyLevel {
    Genus,
    Family,
}

/// Training peer: genus, family and label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Peer {
    pub genus: String,
    pub family: String,
    pub label: ClassCode,
}

/// Majority label among peers at `level`, falling back from genus to family
/// to the global majority when the peer set is empty.
pub fn genealogy_vote(peers: &[Peer], genus: Option<&str>, family: Option<&str>, level: GenealogyLevel) -> Option<ClassCode> {
    let vote = |pred: &dyn Fn(&Peer) -> bool| {
        let labels: Vec<ClassCode> = peers.iter().filter(|p| pred(p)).map(|p| p.label).collect();
        majority_train(&labels)
    };
    let by_genus = || genus.and_then(|g| vote(&|p: &Peer| p.genus == g));
    let by_family = || family.and_then(|f| vote(&|p: &Peer| p.family == f));
    let global = || vote(&|_: &Peer| true);
    match level {
        GenealogyLevel::Genus => by_genus().or_else(by_family).or_else(global),
        GenealogyLevel::Family => by_family().or_else(global),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenealogyModel {
    pub level: GenealogyLevel,
    pub peers: Vec<Peer>,
}

impl GenealogyModel {
    pub fn fit(ds: &Dataset, level: GenealogyLevel) -> Self {
        GenealogyModel {
            level,
            peers: ds.rows.iter().map(|r| Peer { genus: r.genus.clone(), family: r.family.clone(), label: r.label }).collect(),
        }
    }

    pub fn predict(&self, genus: Option<&str>, family: Option<&str>) -> ClassCode {
        genealogy_vote(&self.peers, genus, family, self.level).expect("model has at least one peer")
    }
}

/// Genealogical prediction of `rule` for `language` from the labeled
/// `training` languages of the database. `None` only if no training
/// language has a label for the rule.
pub fn genealogy_predict(
    db: &WalsDatabase,
    rule: &RuleId,
    language: &str,
    level: GenealogyLevel,
    training: &[&str],
) -> Result<Option<ClassCode>> {
    let target = db.language(language)?;
    let mut peers = Vec::new();
    for code in training {
        let rec = db.language(code)?;
        if let Some(label) = rec.value(rule) {
            peers.push(Peer { genus: rec.genus.clone(), family: rec.family.clone(), label });
        }
    }
    Ok(genealogy_vote(&peers, Some(&target.genus), Some(&target.family), level))
}
