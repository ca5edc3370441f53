//! Sparse language × rule database with genus/family metadata.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{known_rule_name, ClassCode, RuleId};

const REQUIRED: [&str; 4] = ["wals_code", "name", "genus", "family"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleDef {
    pub id: RuleId,
    pub name: String,
    /// `(code, label)` with codes 1..=K in order.
    pub values: Vec<(ClassCode, String)>,
}

impl RuleDef {
    pub fn new(id: RuleId, name: impl Into<String>, values: Vec<(ClassCode, String)>) -> std::result::Result<Self, String> {
        if values.is_empty() {
            return Err(format!("rule {id} has no values"));
        }
        let mut labels = BTreeSet::new();
        for (pos, (code, label)) in values.iter().enumerate() {
            if usize::from(*code) != pos + 1 {
                return Err(format!("rule {id}: codes must be consecutive from 1, found {code} at position {}", pos + 1));
            }
            if !labels.insert(label.as_str()) {
                return Err(format!("rule {id}: duplicate label `{label}`"));
            }
        }
        Ok(RuleDef { id, name: name.into(), values })
    }

    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn contains(&self, code: ClassCode) -> bool {
        code >= 1 && usize::from(code) <= self.values.len()
    }

    pub fn label(&self, code: ClassCode) -> Option<&str> {
        self.values.get(usize::from(code).checked_sub(1)?).map(|(_, l)| l.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageRecord {
    pub wals_code: String,
    pub name: String,
    pub genus: String,
    pub family: String,
    pub rule_values: BTreeMap<RuleId, ClassCode>,
}

impl LanguageRecord {
    pub fn value(&self, rule: &RuleId) -> Option<ClassCode> {
        self.rule_values.get(rule).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalsDatabase {
    rules: BTreeMap<RuleId, RuleDef>,
    /// Rule columns in file order.
    columns: Vec<RuleId>,
    languages: Vec<LanguageRecord>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl WalsDatabase {
    pub fn new(rules: Vec<RuleDef>, columns: Vec<RuleId>, languages: Vec<LanguageRecord>) -> Result<Self> {
        let rules: BTreeMap<RuleId, RuleDef> = rules.into_iter().map(|r| (r.id.clone(), r)).collect();
        for c in &columns {
            if !rules.contains_key(c) {
                return Err(Error::UnknownRule(c.clone()));
            }
        }
        let mut index = HashMap::new();
        for (row, lang) in languages.iter().enumerate() {
            let ctx = "database";
            if index.insert(lang.wals_code.clone(), row).is_some() {
                return Err(Error::DuplicateLanguage { context: ctx.into(), row: row + 1, code: lang.wals_code.clone() });
            }
            if lang.genus.is_empty() || lang.family.is_empty() {
                return Err(Error::InvalidRecord {
                    context: ctx.into(),
                    row: row + 1,
                    message: format!("language `{}` lacks genus or family", lang.wals_code),
                });
            }
            for (rule, &code) in &lang.rule_values {
                let def = rules.get(rule).ok_or_else(|| Error::UnknownRule(rule.clone()))?;
                if !def.contains(code) {
                    return Err(Error::DomainViolation {
                        context: ctx.into(),
                        row: row + 1,
                        column: rule.to_string(),
                        value: code.to_string(),
                    });
                }
            }
        }
        Ok(WalsDatabase { rules, columns, languages, index })
    }

    pub fn rule(&self, id: &RuleId) -> Result<&RuleDef> {
        self.rules.get(id).ok_or_else(|| Error::UnknownRule(id.clone()))
    }

    pub fn rules(&self) -> impl Iterator<Item = &RuleDef> {
        self.rules.values()
    }

    pub fn columns(&self) -> &[RuleId] {
        &self.columns
    }

    pub fn languages(&self) -> &[LanguageRecord] {
        &self.languages
    }

    pub fn language(&self, code: &str) -> Result<&LanguageRecord> {
        self.index.get(code).map(|&i| &self.languages[i]).ok_or_else(|| Error::UnknownLanguage(code.to_string()))
    }

    pub fn contains_language(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    /// Records with a value for `rule` whose code is in `corpus_set`,
    /// ordered by WALS code.
    pub fn languages_with(&self, rule: &RuleId, corpus_set: &BTreeSet<String>) -> Result<Vec<&LanguageRecord>> {
        self.rule(rule)?;
        let mut out: Vec<&LanguageRecord> =
            self.languages.iter().filter(|l| l.rule_values.contains_key(rule) && corpus_set.contains(&l.wals_code)).collect();
        out.sort_by(|a, b| a.wals_code.cmp(&b.wals_code));
        Ok(out)
    }
}

fn csv_err(context: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::parse(context, line, e.to_string())
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(bytes)
}

/// Parses `rules.csv` (`rule_id,code,label`). Rows of one rule may appear
/// in any order but their codes must form 1..=K. Rule names come from the
/// built-in table, falling back to the id.
pub fn parse_rules_csv(bytes: &[u8], context: &str) -> Result<Vec<RuleDef>> {
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(|e| csv_err(context, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn { context: context.into(), column: name.into() })
    };
    let (ci, cc, cl) = (col("rule_id")?, col("code")?, col("label")?);
    let mut by_rule: BTreeMap<RuleId, Vec<(ClassCode, String)>> = BTreeMap::new();
    let mut order: Vec<RuleId> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(context, e))?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let id = RuleId::new(&rec[ci]);
        let code: ClassCode = rec[cc].trim().parse().map_err(|_| Error::InvalidRecord {
            context: context.into(),
            row,
            message: format!("code `{}` is not a small positive integer", &rec[cc]),
        })?;
        if !by_rule.contains_key(&id) {
            order.push(id.clone());
        }
        by_rule.entry(id).or_default().push((code, rec[cl].to_string()));
    }
    order
        .into_iter()
        .map(|id| {
            let mut values = by_rule.remove(&id).unwrap_or_default();
            values.sort_by_key(|(c, _)| *c);
            let name = known_rule_name(id.as_str()).unwrap_or(id.as_str()).to_string();
            RuleDef::new(id, name, values).map_err(|message| Error::InvalidRecord { context: context.into(), row: 0, message })
        })
        .collect()
}

pub fn parse_wals_csv(bytes: &[u8], rules: Vec<RuleDef>, context: &str) -> Result<WalsDatabase> {
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(|e| csv_err(context, e))?.clone();
    for req in REQUIRED {
        if !headers.iter().any(|h| h == req) {
            return Err(Error::MissingColumn { context: context.into(), column: req.into() });
        }
    }
    let pos = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (pc, pn, pg, pf) = (pos("wals_code"), pos("name"), pos("genus"), pos("family"));
    let rule_map: BTreeMap<RuleId, &RuleDef> = rules.iter().map(|r| (r.id.clone(), r)).collect();
    let mut rule_cols: Vec<(usize, RuleId)> = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if REQUIRED.contains(&h) {
            continue;
        }
        let id = RuleId::new(h);
        if !rule_map.contains_key(&id) {
            return Err(Error::UnknownRule(id));
        }
        rule_cols.push((i, id));
    }

    let mut languages = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(context, e))?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let code = rec[pc].to_string();
        if code.is_empty() {
            return Err(Error::InvalidRecord { context: context.into(), row, message: "empty wals_code".into() });
        }
        if !seen.insert(code.clone()) {
            return Err(Error::DuplicateLanguage { context: context.into(), row, code });
        }
        let (genus, family) = (rec[pg].to_string(), rec[pf].to_string());
        if genus.is_empty() || family.is_empty() {
            return Err(Error::InvalidRecord {
                context: context.into(),
                row,
                message: format!("language `{code}` lacks genus or family"),
            });
        }
        let mut rule_values = BTreeMap::new();
        for (i, id) in &rule_cols {
            let cell = rec[*i].trim();
            if cell.is_empty() {
                continue;
            }
            let domain_err =
                || Error::DomainViolation { context: context.into(), row, column: id.to_string(), value: cell.to_string() };
            let v: ClassCode = cell.parse().map_err(|_| domain_err())?;
            if !rule_map[id].contains(v) {
                return Err(domain_err());
            }
            rule_values.insert(id.clone(), v);
        }
        languages.push(LanguageRecord { wals_code: code, name: rec[pn].to_string(), genus, family, rule_values });
    }
    let columns = rule_cols.into_iter().map(|(_, id)| id).collect();
    WalsDatabase::new(rules, columns, languages)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads `wals.csv` together with its `rules.csv` companion.
pub fn load_wals_csv(wals_path: impl AsRef<Path>, rules_path: impl AsRef<Path>) -> Result<WalsDatabase> {
    let (wp, rp) = (wals_path.as_ref(), rules_path.as_ref());
    let rules = parse_rules_csv(&read_bytes(rp)?, &rp.display().to_string())?;
    parse_wals_csv(&read_bytes(wp)?, rules, &wp.display().to_string())
}

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w).expect("writing csv to memory");
    String::from_utf8(w.into_inner().expect("flush")).expect("csv output is UTF-8")
}

pub fn format_rules_csv(db: &WalsDatabase) -> String {
    csv_string(|w| {
        w.write_record(["rule_id", "code", "label"])?;
        let mut ids: Vec<&RuleId> = db.columns.iter().collect();
        for r in db.rules.keys() {
            if !ids.contains(&r) {
                ids.push(r);
            }
        }
        for id in ids {
            for (code, label) in &db.rules[id].values {
                w.write_record([id.as_str(), &code.to_string(), label])?;
            }
        }
        Ok(())
    })
}

pub fn format_wals_csv(db: &WalsDatabase) -> String {
    csv_string(|w| {
        let mut header: Vec<&str> = REQUIRED.to_vec();
        header.extend(db.columns.iter().map(RuleId::as_str));
        w.write_record(&header)?;
        for l in &db.languages {
            let mut rec = vec![l.wals_code.clone(), l.name.clone(), l.genus.clone(), l.family.clone()];
            rec.extend(db.columns.iter().map(|c| l.value(c).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

pub fn write_wals_csv(db: &WalsDatabase, wals_path: impl AsRef<Path>, rules_path: impl AsRef<Path>) -> Result<()> {
    let (wp, rp) = (wals_path.as_ref(), rules_path.as_ref());
    std::fs::write(wp, format_wals_csv(db)).map_err(|e| Error::io(wp, e))?;
    std::fs::write(rp, format_rules_csv(db)).map_err(|e| Error::io(rp, e))
}

/// `rules.csv` contents for the six built-in rules.
pub fn builtin_rule_defs() -> Vec<RuleDef> {
    crate::rules::STUDY_RULES
        .iter()
        .map(|id| {
            let values = crate::rules::known_rule_values(id).unwrap().iter().map(|(c, l)| (*c, l.to_string())).collect();
            RuleDef::new(RuleId::from(*id), known_rule_name(id).unwrap(), values).unwrap()
        })
        .collect()
}
