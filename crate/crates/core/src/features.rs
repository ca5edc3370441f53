//! Classifier inputs assembled from text, rule and genealogy blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{ClassCode, RuleId, STUDY_RULES};
use crate::wals::{LanguageRecord, WalsDatabase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Text,
    Rules,
    Genealogy,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Text => "Text",
            Block::Rules => "Rules",
            Block::Genealogy => "Genealogy",
        })
    }
}

impl std::str::FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Ok(Block::Text),
            "rules" => Ok(Block::Rules),
            "genealogy" => Ok(Block::Genealogy),
            other => Err(Error::Config(format!("unknown feature block `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureBlockSpec {
    blocks: BTreeSet<Block>,
    pub target_rule: RuleId,
}

impl FeatureBlockSpec {
    pub fn new(blocks: impl IntoIterator<Item = Block>, target_rule: RuleId) -> Result<Self> {
        let blocks: BTreeSet<Block> = blocks.into_iter().collect();
        if blocks.is_empty() {
            return Err(Error::Config("at least one feature block is required".into()));
        }
        Ok(FeatureBlockSpec { blocks, target_rule })
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        self.blocks.iter().copied()
    }

    pub fn has(&self, block: Block) -> bool {
        self.blocks.contains(&block)
    }

    /// "Text+Rules" style label.
    pub fn label(&self) -> String {
        self.blocks.iter().map(Block::to_string).collect::<Vec<_>>().join("+")
    }
}

/// A named span of dataset columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnGroup {
    pub name: String,
    pub block: Block,
    pub start: usize,
    pub len: usize,
    /// At most one column of the span is 1, the rest 0.
    pub one_hot: bool,
}

impl ColumnGroup {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub language: String,
    pub genus: String,
    pub family: String,
    pub features: Vec<f64>,
    pub label: ClassCode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rule: RuleId,
    /// Size of the target rule's domain.
    pub n_classes: usize,
    pub layout: Vec<ColumnGroup>,
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn width(&self) -> usize {
        self.layout.iter().map(|g| g.len).sum()
    }

    pub fn labels(&self) -> Vec<ClassCode> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// The dataset with row `i` removed.
    pub fn without(&self, i: usize) -> Dataset {
        let mut rows = self.rows.clone();
        rows.remove(i);
        Dataset { rows, ..self.clone_empty() }
    }

    pub fn clone_empty(&self) -> Dataset {
        Dataset { rule: self.rule.clone(), n_classes: self.n_classes, layout: self.layout.clone(), rows: Vec::new() }
    }

    /// Continuous-valued dataset with a single text-like column block.
    pub fn continuous(rule: RuleId, n_classes: usize, rows: Vec<DatasetRow>) -> Dataset {
        let width = rows.first().map_or(0, |r| r.features.len());
        Dataset {
            rule,
            n_classes,
            layout: vec![ColumnGroup { name: "text".into(), block: Block::Text, start: 0, len: width, one_hot: false }],
            rows,
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for g in &self.layout {
            match g.block {
                Block::Text => names.extend((1..=g.len).map(|i| format!("{}:f{i}", g.name))),
                _ => names.extend((1..=g.len).map(|i| format!("{}={i}", g.name))),
            }
        }
        names
    }
}

/// Genus and family vocabularies, frozen over a cohort.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenealogyVocab {
    pub genera: Vec<String>,
    pub families: Vec<String>,
}

impl GenealogyVocab {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a LanguageRecord>) -> Self {
        let mut genera = BTreeSet::new();
        let mut families = BTreeSet::new();
        for r in records {
            genera.insert(r.genus.clone());
            families.insert(r.family.clone());
        }
        GenealogyVocab { genera: genera.into_iter().collect(), families: families.into_iter().collect() }
    }

    fn one_hot(vocab: &[String], value: Option<&str>) -> Vec<f64> {
        let mut v = vec![0.0; vocab.len()];
        if let Some(i) = value.and_then(|x| vocab.iter().position(|g| g == x)) {
            v[i] = 1.0;
        }
        v
    }

    /// Genus one-hot followed by family one-hot. Values outside the
    /// vocabulary encode as zeros.
    pub fn encode_lenient(&self, genus: Option<&str>, family: Option<&str>) -> Vec<f64> {
        let mut v = Self::one_hot(&self.genera, genus);
        v.extend(Self::one_hot(&self.families, family));
        v
    }

    pub fn encode(&self, record: &LanguageRecord) -> Result<Vec<f64>> {
        if !self.genera.contains(&record.genus) || !self.families.contains(&record.family) {
            return Err(Error::Invariant(format!("genealogy of `{}` missing from the cohort vocabulary", record.wals_code)));
        }
        Ok(self.encode_lenient(Some(&record.genus), Some(&record.family)))
    }
}

/// The five non-target rules in canonical order.
pub fn context_rules(target: &RuleId) -> Vec<RuleId> {
    STUDY_RULES.iter().filter(|r| **r != target.as_str()).map(|r| RuleId::from(*r)).collect()
}

fn rules_encoding(db: &WalsDatabase, values: &BTreeMap<RuleId, ClassCode>, target: &RuleId) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for rule in context_rules(target) {
        let def = db.rule(&rule)?;
        let mut group = vec![0.0; def.domain_size()];
        if let Some(&v) = values.get(&rule) {
            group[usize::from(v) - 1] = 1.0;
        }
        out.extend(group);
    }
    Ok(out)
}

/// One-hot encodings of the language's values for the five non-target
/// rules; missing values give an all-zero group.
pub fn rules_block(db: &WalsDatabase, language: &str, target: &RuleId) -> Result<Vec<f64>> {
    let record = db.language(language)?;
    rules_encoding(db, &record.rule_values, target)
}

pub fn genealogy_block(db: &WalsDatabase, language: &str, vocab: &GenealogyVocab) -> Result<Vec<f64>> {
    vocab.encode(db.language(language)?)
}

/// Column layout and row encoder for one target rule and block selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub spec: FeatureBlockSpec,
    pub text_width: usize,
    pub vocab: GenealogyVocab,
    pub layout: Vec<ColumnGroup>,
}

impl FeatureEncoder {
    pub fn new(db: &WalsDatabase, spec: FeatureBlockSpec, text_width: usize, vocab: GenealogyVocab) -> Result<Self> {
        let mut layout = Vec::new();
        let mut start = 0;
        let mut push = |name: String, block, len, one_hot| {
            layout.push(ColumnGroup { name, block, start, len, one_hot });
            start += len;
        };
        for block in spec.blocks() {
            match block {
                Block::Text => push(format!("text{}", spec.target_rule), Block::Text, text_width, false),
                Block::Rules => {
                    for rule in context_rules(&spec.target_rule) {
                        push(rule.to_string(), Block::Rules, db.rule(&rule)?.domain_size(), true);
                    }
                }
                Block::Genealogy => {
                    push("genus".into(), Block::Genealogy, vocab.genera.len(), true);
                    push("family".into(), Block::Genealogy, vocab.families.len(), true);
                }
            }
        }
        Ok(FeatureEncoder { spec, text_width, vocab, layout })
    }

    pub fn width(&self) -> usize {
        self.layout.iter().map(|g| g.len).sum()
    }

    /// Encodes a language that may be absent from the database.
    pub fn encode(
        &self,
        db: &WalsDatabase,
        text: Option<&[f64]>,
        rule_values: &BTreeMap<RuleId, ClassCode>,
        genus: Option<&str>,
        family: Option<&str>,
    ) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.width());
        for block in self.spec.blocks() {
            match block {
                Block::Text => {
                    let t = text.ok_or_else(|| Error::Config("text features required".into()))?;
                    if t.len() != self.text_width {
                        return Err(Error::WidthMismatch { expected: self.text_width, got: t.len() });
                    }
                    row.extend_from_slice(t);
                }
                Block::Rules => row.extend(rules_encoding(db, rule_values, &self.spec.target_rule)?),
                Block::Genealogy => row.extend(self.vocab.encode_lenient(genus, family)),
            }
        }
        Ok(row)
    }
}

/// Rows for every language with a value for the target rule and a corpus,
/// in WALS-code order. `text` maps language codes to the target rule's text
/// vector and must cover the cohort when the text block is requested.
pub fn assemble(
    db: &WalsDatabase,
    text: &BTreeMap<String, Vec<f64>>,
    corpus_set: &BTreeSet<String>,
    spec: &FeatureBlockSpec,
) -> Result<(Dataset, FeatureEncoder)> {
    let rule = &spec.target_rule;
    let n_classes = db.rule(rule)?.domain_size();
    let cohort = db.languages_with(rule, corpus_set)?;
    let vocab = GenealogyVocab::from_records(cohort.iter().copied());

    let mut text_width = None;
    if spec.has(Block::Text) {
        for l in &cohort {
            let v = text.get(&l.wals_code).ok_or_else(|| Error::MissingTextVector(l.wals_code.clone()))?;
            match text_width {
                None => text_width = Some(v.len()),
                Some(w) if w != v.len() => return Err(Error::WidthMismatch { expected: w, got: v.len() }),
                _ => {}
            }
        }
    }
    let text_width = text_width.unwrap_or_else(|| default_text_width(rule));
    let encoder = FeatureEncoder::new(db, spec.clone(), text_width, vocab)?;

    let mut rows = Vec::with_capacity(cohort.len());
    for l in cohort {
        if spec.has(Block::Genealogy) {
            // Guarded: every cohort genealogy is in the vocabulary by construction.
            encoder.vocab.encode(l)?;
        }
        let features =
            encoder.encode(db, text.get(&l.wals_code).map(Vec::as_slice), &l.rule_values, Some(&l.genus), Some(&l.family))?;
        rows.push(DatasetRow {
            language: l.wals_code.clone(),
            genus: l.genus.clone(),
            family: l.family.clone(),
            features,
            label: l.rule_values[rule],
        });
    }
    let ds = Dataset { rule: rule.clone(), n_classes, layout: encoder.layout.clone(), rows };
    Ok((ds, encoder))
}

pub fn default_text_width(rule: &RuleId) -> usize {
    if rule.as_str() == "92A" {
        4
    } else {
        6
    }
}

/// `language,label,<columns...>` CSV.
pub fn format_dataset_csv(ds: &Dataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["language".to_string(), "label".to_string()];
    header.extend(ds.column_names());
    w.write_record(&header).expect("in-memory csv");
    for r in &ds.rows {
        let mut rec = vec![r.language.clone(), r.label.to_string()];
        rec.extend(r.features.iter().map(|x| x.to_string()));
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Serialize)]
struct LayoutSidecar<'a> {
    rule: &'a RuleId,
    n_classes: usize,
    layout: &'a [ColumnGroup],
}

pub fn format_layout_json(ds: &Dataset) -> String {
    let side = LayoutSidecar { rule: &ds.rule, n_classes: ds.n_classes, layout: &ds.layout };
    serde_json::to_string_pretty(&side).expect("layout serializes") + "\n"
}

/// Writes `<stem>.csv` and `<stem>.layout.json` into `dir`.
pub fn write_dataset(ds: &Dataset, dir: &Path, stem: &str) -> Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, format_dataset_csv(ds)).map_err(|e| Error::io(&csv_path, e))?;
    let json_path = dir.join(format!("{stem}.layout.json"));
    std::fs::write(&json_path, format_layout_json(ds)).map_err(|e| Error::io(&json_path, e))
}
