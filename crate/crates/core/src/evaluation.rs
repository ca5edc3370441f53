//! Leave-one-out cross-validation and report tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierSpec, DEFAULT_KS, DEFAULT_LAMBDAS};
use crate::error::{Error, Result};
use crate::extraction::TextFeatureVector;
use crate::features::{assemble, Block, Dataset, FeatureBlockSpec};
use crate::rules::{ClassCode, RuleId};
use crate::wals::WalsDatabase;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoocvResult {
    pub rule: RuleId,
    pub spec: ClassifierSpec,
    /// Feature blocks the dataset was assembled from, when known.
    pub blocks: Option<FeatureBlockSpec>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// language → (gold, predicted)
    pub per_language: BTreeMap<String, (ClassCode, ClassCode)>,
}

/// Trains on every row but one and predicts the held-out row, for each row.
/// Folds run in parallel on the current rayon pool; results do not depend
/// on fold order.
pub fn loocv(ds: &Dataset, spec: &ClassifierSpec) -> Result<LoocvResult> {
    let n = ds.rows.len();
    if n < 2 {
        return Err(Error::CohortTooSmall(n));
    }
    spec.validate()?;
    let predictions = (0..n)
        .into_par_iter()
        .map(|i| {
            let train = ds.without(i);
            spec.train(&train)?.predict(&ds.rows[i])
        })
        .collect::<Result<Vec<ClassCode>>>()?;
    let mut per_language = BTreeMap::new();
    let mut correct = 0;
    for (row, pred) in ds.rows.iter().zip(predictions) {
        if row.label == pred {
            correct += 1;
        }
        per_language.insert(row.language.clone(), (row.label, pred));
    }
    Ok(LoocvResult {
        rule: ds.rule.clone(),
        spec: *spec,
        blocks: None,
        correct,
        total: n,
        accuracy: correct as f64 / n as f64,
        per_language,
    })
}

/// `loocv` on a dataset assembled from `blocks`.
pub fn loocv_blocks(ds: &Dataset, spec: &ClassifierSpec, blocks: &FeatureBlockSpec) -> Result<LoocvResult> {
    let mut r = loocv(ds, spec)?;
    r.blocks = Some(blocks.clone());
    Ok(r)
}

/// A labeled table of accuracies. `None` cells are not applicable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl Grid {
    pub fn max(&self) -> Option<f64> {
        self.rows.iter().flat_map(|(_, c)| c.iter().flatten()).cloned().fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleGrid {
    pub rule: RuleId,
    pub name: String,
    pub n: usize,
    pub grid: Grid,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub grids: Vec<RuleGrid>,
    pub genealogy: Vec<GenealogyRow>,
    pub knn: Vec<RuleGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenealogyRow {
    pub rule: RuleId,
    pub best_other: f64,
    pub same_genus: f64,
    pub same_family: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub lambdas: Vec<f64>,
    pub ks: Vec<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { lambdas: DEFAULT_LAMBDAS.to_vec(), ks: DEFAULT_KS.to_vec() }
    }
}

impl GridConfig {
    pub fn classifiers(&self) -> Vec<ClassifierSpec> {
        let mut v = vec![ClassifierSpec::Majority, ClassifierSpec::NaiveBayes];
        v.extend(self.lambdas.iter().map(|&lambda| ClassifierSpec::Logistic { lambda }));
        v
    }
}

/// Text vectors per rule: rule → language → normalized vector.
pub type TextTable = BTreeMap<RuleId, BTreeMap<String, Vec<f64>>>;

pub fn feature_sets(rule: &RuleId) -> Vec<FeatureBlockSpec> {
    [vec![Block::Text], vec![Block::Rules], vec![Block::Text, Block::Rules]]
        .into_iter()
        .map(|b| FeatureBlockSpec::new(b, rule.clone()).expect("nonempty"))
        .collect()
}

/// Normalized vectors of an `extract_all` result.
pub fn text_table(vectors: &BTreeMap<RuleId, BTreeMap<String, TextFeatureVector>>) -> TextTable {
    vectors.iter().map(|(r, langs)| (r.clone(), langs.iter().map(|(l, v)| (l.clone(), v.normalized.clone())).collect())).collect()
}

fn rule_text<'a>(text: &'a TextTable, rule: &RuleId, empty: &'a BTreeMap<String, Vec<f64>>) -> &'a BTreeMap<String, Vec<f64>> {
    text.get(rule).unwrap_or(empty)
}

/// Feature sets × classifiers accuracy grid for one rule.
pub fn run_grid(
    db: &WalsDatabase,
    text: &TextTable,
    corpus_set: &BTreeSet<String>,
    rule: &RuleId,
    config: &GridConfig,
) -> Result<RuleGrid> {
    let empty = BTreeMap::new();
    let text = rule_text(text, rule, &empty);
    let classifiers = config.classifiers();
    let mut rows = Vec::new();
    let mut n = 0;
    for fs in feature_sets(rule) {
        let (ds, _) = assemble(db, text, corpus_set, &fs)?;
        n = ds.rows.len();
        let cells = classifiers
            .par_iter()
            .map(|spec| loocv_blocks(&ds, spec, &fs).map(|r| Some(r.accuracy)))
            .collect::<Result<Vec<_>>>()?;
        rows.push((fs.label(), cells));
    }
    Ok(RuleGrid {
        rule: rule.clone(),
        name: db.rule(rule)?.name.clone(),
        n,
        grid: Grid { corner: "Features".into(), columns: classifiers.iter().map(ClassifierSpec::label).collect(), rows },
    })
}

/// Genus and family majority accuracies next to the best cell of `grid`.
pub fn run_genealogy(db: &WalsDatabase, corpus_set: &BTreeSet<String>, rule: &RuleId, grid: &RuleGrid) -> Result<GenealogyRow> {
    let fs = FeatureBlockSpec::new([Block::Rules], rule.clone())?;
    let (ds, _) = assemble(db, &BTreeMap::new(), corpus_set, &fs)?;
    let genus = loocv(&ds, &ClassifierSpec::GenusMajority)?;
    let family = loocv(&ds, &ClassifierSpec::FamilyMajority)?;
    Ok(GenealogyRow {
        rule: rule.clone(),
        best_other: grid.grid.max().unwrap_or(0.0),
        same_genus: genus.accuracy,
        same_family: family.accuracy,
    })
}

/// k-nearest-neighbor control runs on the Text and Rules feature sets.
/// Values of k that exceed the training-fold size are left empty.
pub fn run_knn(
    db: &WalsDatabase,
    text: &TextTable,
    corpus_set: &BTreeSet<String>,
    rule: &RuleId,
    ks: &[usize],
) -> Result<RuleGrid> {
    let empty = BTreeMap::new();
    let text = rule_text(text, rule, &empty);
    let mut rows = Vec::new();
    let mut n = 0;
    for fs in feature_sets(rule).into_iter().take(2) {
        let (ds, _) = assemble(db, text, corpus_set, &fs)?;
        n = ds.rows.len();
        let cells =
            ks.par_iter()
                .map(|&k| {
                    if k + 1 > ds.rows.len() {
                        Ok(None)
                    } else {
                        loocv(&ds, &ClassifierSpec::Knn { k }).map(|r| Some(r.accuracy))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
        rows.push((fs.label(), cells));
    }
    Ok(RuleGrid {
        rule: rule.clone(),
        name: db.rule(rule)?.name.clone(),
        n,
        grid: Grid { corner: "Features".into(), columns: ks.iter().map(|k| format!("kNN{k}")).collect(), rows },
    })
}

pub fn run_experiments(
    db: &WalsDatabase,
    text: &TextTable,
    corpus_set: &BTreeSet<String>,
    rules: &[RuleId],
    config: &GridConfig,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::default();
    for rule in rules {
        let grid = run_grid(db, text, corpus_set, rule, config)?;
        report.genealogy.push(run_genealogy(db, corpus_set, rule, &grid)?);
        report.grids.push(grid);
        if !config.ks.is_empty() {
            report.knn.push(run_knn(db, text, corpus_set, rule, &config.ks)?);
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Tsv => "tsv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn percent(x: f64) -> String {
    format!("{:.1}%", x * 100.0)
}

fn cell(x: &Option<f64>) -> String {
    x.map(percent).unwrap_or_else(|| "-".into())
}

pub fn emit_grid(title: &str, grid: &Grid, format: ReportFormat) -> String {
    let mut out = String::new();
    let mut header = vec![grid.corner.clone()];
    header.extend(grid.columns.iter().cloned());
    match format {
        ReportFormat::Tsv => {
            if !title.is_empty() {
                let _ = writeln!(out, "# {title}");
            }
            let _ = writeln!(out, "{}", header.join("\t"));
            for (label, cells) in &grid.rows {
                let mut line = vec![label.clone()];
                line.extend(cells.iter().map(cell));
                let _ = writeln!(out, "{}", line.join("\t"));
            }
        }
        ReportFormat::Markdown => {
            if !title.is_empty() {
                let _ = writeln!(out, "### {title}\n");
            }
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for (label, cells) in &grid.rows {
                let mut line = vec![label.clone()];
                line.extend(cells.iter().map(cell));
                let _ = writeln!(out, "| {} |", line.join(" | "));
            }
        }
    }
    out
}

pub fn rule_title(g: &RuleGrid) -> String {
    format!("{}: {} N={}", g.rule, g.name, g.n)
}

pub fn genealogy_grid(rows: &[GenealogyRow]) -> Grid {
    Grid {
        corner: "Rule".into(),
        columns: vec!["Best Other".into(), "Same Genus".into(), "Same Family".into()],
        rows: rows
            .iter()
            .map(|r| (r.rule.to_string(), vec![Some(r.best_other), Some(r.same_genus), Some(r.same_family)]))
            .collect(),
    }
}

pub fn emit_rule_grid(g: &RuleGrid, format: ReportFormat) -> String {
    emit_grid(&rule_title(g), &g.grid, format)
}

pub fn emit_genealogy(rows: &[GenealogyRow], format: ReportFormat) -> String {
    emit_grid("Accuracy using genealogical neighbors", &genealogy_grid(rows), format)
}

/// Whole report: every rule grid, then the genealogy table, then the k-NN
/// control grids.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> String {
    let mut parts: Vec<String> = report.grids.iter().map(|g| emit_rule_grid(g, format)).collect();
    parts.push(emit_genealogy(&report.genealogy, format));
    parts.extend(report.knn.iter().map(|g| emit_grid(&format!("{} k-NN", rule_title(g)), &g.grid, format)));
    parts.join("\n")
}
