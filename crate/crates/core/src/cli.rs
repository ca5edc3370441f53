//! Command-line front end.
//!
//! Every option can come from a JSON config file (`--config`) or from a flag
//! of the same name; flags win.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{ClassifierSpec, TrainedModel, DEFAULT_KS, DEFAULT_LAMBDAS};
use crate::corpus::{corpus_languages, read_corpus, ParallelCorpus};
use crate::error::{Error, Result};
use crate::evaluation::{
    emit_genealogy, emit_grid, emit_rule_grid, rule_title, run_experiments, text_table, GridConfig, ReportFormat, TextTable,
};
use crate::extraction::{extract_all, ExtractionConfig, TextFeatureVector, DEFAULT_CLAUSE_LABELS};
use crate::features::{assemble, Block, DatasetRow, FeatureBlockSpec};
use crate::rules::{study_rules, RuleId};
use crate::synthetic::{default_benchmark, verify_manifest, write_benchmark};
use crate::wals::{load_wals_csv, WalsDatabase};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "wals-typology", version, about = "Predict WALS typology from word-aligned parallel text")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write per-rule text feature CSVs for every corpus language.
    Extract,
    /// Run the leave-one-out grids and write report tables.
    Evaluate,
    /// Predict rule values for one language.
    Predict(PredictArgs),
    /// Generate the synthetic benchmark, or verify one.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub language: String,
    /// Genus to use when the language is absent from WALS.
    #[arg(long)]
    pub genus: Option<String>,
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub sentences: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Check an existing directory against its manifest instead of writing.
    #[arg(long)]
    pub verify: Option<PathBuf>,
}

/// Flags mirroring the config file.
#[derive(Debug, Default, Args, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigArgs {
    /// JSON config file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// WALS language table (wals.csv).
    #[arg(long, global = true)]
    pub wals: Option<PathBuf>,
    /// Rule value labels (rules.csv).
    #[arg(long, global = true)]
    pub rules_csv: Option<PathBuf>,
    /// Directory with one subdirectory per language corpus.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Directory of previously extracted feature CSVs.
    #[arg(long, global = true)]
    pub features: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Rules to process [default: all six].
    #[arg(long, global = true, value_delimiter = ',')]
    pub rules: Option<Vec<RuleId>>,
    /// Feature blocks for predict: text, rules, genealogy [default: text].
    #[arg(long, global = true, value_delimiter = ',')]
    pub blocks: Option<Vec<Block>>,
    /// Classifier for predict, e.g. nb, lr:0.1, knn:3, genus [default: lr:1].
    #[arg(long, global = true)]
    pub classifier: Option<String>,
    /// LR regularization sweep [default: 1,0.5,0.1,0.01,1e-8].
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// k-NN sweep [default: 1,3,5,7].
    #[arg(long, global = true, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Dependency labels that open a dependent clause.
    #[arg(long, global = true, value_delimiter = ',')]
    pub clause_labels: Option<Vec<String>>,
    /// Smoothing for question particle scores [default: 0.5].
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Minimum polar-question count for a particle candidate [default: 3].
    #[arg(long, global = true)]
    pub min_freq: Option<u64>,
    /// Report formats: tsv, markdown [default: both].
    #[arg(long, global = true, value_delimiter = ',')]
    pub formats: Option<Vec<String>>,
    /// Seed for synth [default: 42].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

impl ConfigArgs {
    /// Fields of `over` that are set replace those of `self`.
    pub fn merge(self, over: ConfigArgs) -> ConfigArgs {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigArgs { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            config,
            wals,
            rules_csv,
            corpus,
            features,
            out,
            rules,
            blocks,
            classifier,
            lambdas,
            ks,
            clause_labels,
            alpha,
            min_freq,
            formats,
            seed,
            jobs
        )
    }
}

/// Settings after merging the config file, flags and defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub wals: Option<PathBuf>,
    pub rules_csv: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub rules: Vec<RuleId>,
    pub blocks: Vec<Block>,
    pub classifier: ClassifierSpec,
    pub lambdas: Vec<f64>,
    pub ks: Vec<usize>,
    pub extraction: ExtractionConfig,
    pub formats: Vec<ReportFormat>,
    pub seed: u64,
    pub jobs: Option<usize>,
}

#[derive(Serialize)]
struct HashedSettings<'a> {
    rules: &'a [RuleId],
    blocks: &'a [Block],
    classifier: String,
    lambdas: &'a [f64],
    ks: &'a [usize],
    extraction: &'a ExtractionConfig,
    seed: u64,
}

impl RunConfig {
    pub fn resolve(args: ConfigArgs) -> Result<RunConfig> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<ConfigArgs>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigArgs::default(),
        };
        let a = file.merge(args);
        let lambdas = a.lambdas.unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
        if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Config("lambdas must be a nonempty list of positive numbers".into()));
        }
        let ks = a.ks.unwrap_or_else(|| DEFAULT_KS.to_vec());
        if ks.contains(&0) {
            return Err(Error::Config("k values must be at least 1".into()));
        }
        let rules = a.rules.unwrap_or_else(study_rules);
        for r in &rules {
            if !crate::rules::STUDY_RULES.contains(&r.as_str()) {
                return Err(Error::Config(format!("unsupported rule `{r}`")));
            }
        }
        let blocks = a.blocks.unwrap_or_else(|| vec![Block::Text]);
        if blocks.is_empty() {
            return Err(Error::Config("at least one feature block is required".into()));
        }
        let classifier: ClassifierSpec = a.classifier.as_deref().unwrap_or("lr:1").parse()?;
        let defaults = ExtractionConfig::default();
        let extraction = ExtractionConfig {
            clause_labels: match a.clause_labels {
                Some(l) => l.into_iter().collect(),
                None => DEFAULT_CLAUSE_LABELS.iter().map(|s| s.to_string()).collect(),
            },
            alpha: a.alpha.unwrap_or(defaults.alpha),
            min_freq: a.min_freq.unwrap_or(defaults.min_freq),
        };
        if !(extraction.alpha > 0.0 && extraction.alpha.is_finite()) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        let formats = match a.formats {
            Some(f) => f.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?,
            None => vec![ReportFormat::Tsv, ReportFormat::Markdown],
        };
        if a.jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            wals: a.wals,
            rules_csv: a.rules_csv,
            corpus: a.corpus,
            features: a.features,
            out: a.out,
            rules,
            blocks,
            classifier,
            lambdas,
            ks,
            extraction,
            formats,
            seed: a.seed.unwrap_or(DEFAULT_SEED),
            jobs: a.jobs,
        })
    }

    /// Hash of the settings that affect results. Paths, output location and
    /// thread count are excluded.
    pub fn config_hash(&self) -> String {
        let s = HashedSettings {
            rules: &self.rules,
            blocks: &self.blocks,
            classifier: self.classifier.to_string(),
            lambdas: &self.lambdas,
            ks: &self.ks,
            extraction: &self.extraction,
            seed: self.seed,
        };
        let json = serde_json::to_string(&s).expect("settings serialize");
        Sha256::digest(json.as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn metadata(&self) -> String {
        format!("{} {} config={} seed={}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"), self.config_hash(), self.seed)
    }

    fn grid(&self) -> GridConfig {
        GridConfig { lambdas: self.lambdas.clone(), ks: self.ks.clone() }
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        match path {
            Some(p) if p.exists() => Ok(p),
            Some(p) => Err(Error::Config(format!("--{flag} {} does not exist", p.display()))),
            None => Err(Error::Config(format!("--{flag} is required"))),
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        let out = self.out.as_deref().ok_or_else(|| Error::Config("--out is required".into()))?;
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(out)
    }

    fn database(&self) -> Result<WalsDatabase> {
        let wals = self.require(&self.wals, "wals")?;
        let rules = self.require(&self.rules_csv, "rules-csv")?;
        load_wals_csv(wals, rules)
    }

    fn corpora(&self) -> Result<BTreeMap<String, ParallelCorpus>> {
        let dir = self.require(&self.corpus, "corpus")?;
        corpus_languages(dir)?.into_iter().map(|(code, path)| read_corpus(&path, &code).map(|c| (code, c))).collect()
    }
}

/// Header of a text-feature CSV for `rule` with `width` vector columns.
pub fn feature_columns(rule: &RuleId, width: usize) -> Vec<String> {
    let mut cols = vec!["language".to_string(), "rule".to_string()];
    cols.extend((1..=width).map(|i| format!("f{i}")));
    cols.push("n_instances".into());
    if rule.as_str() == "92A" {
        cols.push("particle".into());
    }
    cols
}

/// `features_<rule>.csv` contents, preceded by a `#` metadata line.
pub fn format_features_csv(rule: &RuleId, vectors: &BTreeMap<String, TextFeatureVector>, metadata: &str) -> String {
    let width = vectors.values().next().map(|v| v.normalized.len()).unwrap_or_else(|| crate::features::default_text_width(rule));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(feature_columns(rule, width)).expect("in-memory csv");
    for (lang, v) in vectors {
        let mut rec = vec![lang.clone(), rule.to_string()];
        rec.extend(v.normalized.iter().map(|x| x.to_string()));
        rec.push(v.n_instances.to_string());
        if rule.as_str() == "92A" {
            rec.push(v.particle.clone().unwrap_or_default());
        }
        w.write_record(&rec).expect("in-memory csv");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    format!("# {metadata}\n{body}")
}

/// Parsed row of a feature CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub normalized: Vec<f64>,
    pub n_instances: u64,
    pub particle: Option<String>,
}

pub fn parse_features_csv(bytes: &[u8], context: &str) -> Result<(RuleId, BTreeMap<String, FeatureRow>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let header = r.headers().map_err(|e| Error::parse(context, 1, e.to_string()))?.clone();
    let idx = |name: &str| header.iter().position(|h| h == name);
    let lang_col = idx("language").ok_or_else(|| Error::MissingColumn { context: context.into(), column: "language".into() })?;
    let n_col =
        idx("n_instances").ok_or_else(|| Error::MissingColumn { context: context.into(), column: "n_instances".into() })?;
    let rule_col = idx("rule").ok_or_else(|| Error::MissingColumn { context: context.into(), column: "rule".into() })?;
    let f_cols: Vec<usize> = (1..).map_while(|i| idx(&format!("f{i}"))).collect();
    let particle_col = idx("particle");
    let mut rule: Option<RuleId> = None;
    let mut rows = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let line = rec.as_ref().ok().and_then(|r| r.position()).map_or(i + 2, |p| p.line() as usize);
        let rec = rec.map_err(|e| Error::parse(context, line, e.to_string()))?;
        let bad = |m: String| Error::InvalidRecord { context: context.into(), row: line, message: m };
        let this_rule = RuleId::from(&rec[rule_col]);
        match &rule {
            None => rule = Some(this_rule),
            Some(r) if *r != this_rule => return Err(bad(format!("mixed rules `{r}` and `{this_rule}`"))),
            _ => {}
        }
        let normalized = f_cols
            .iter()
            .map(|&c| rec[c].parse::<f64>().map_err(|_| bad(format!("bad number `{}`", &rec[c]))))
            .collect::<Result<Vec<_>>>()?;
        let n_instances = rec[n_col].parse().map_err(|_| bad(format!("bad count `{}`", &rec[n_col])))?;
        let particle = particle_col.map(|c| rec[c].to_string()).filter(|p| !p.is_empty());
        let lang = rec[lang_col].to_string();
        if rows.contains_key(&lang) {
            return Err(Error::DuplicateLanguage { context: context.into(), row: line, code: lang });
        }
        rows.insert(lang, FeatureRow { normalized, n_instances, particle });
    }
    let rule = rule.or_else(|| {
        Path::new(context).file_stem().and_then(|s| s.to_str()).and_then(|s| s.strip_prefix("features_")).map(RuleId::from)
    });
    let rule = rule.ok_or_else(|| Error::InvalidRecord {
        context: context.into(),
        row: 1,
        message: "cannot determine the rule of an empty feature file".into(),
    })?;
    Ok((rule, rows))
}

pub fn features_file(rule: &RuleId) -> String {
    format!("features_{rule}.csv")
}

fn write(path: PathBuf, contents: String) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

pub fn cmd_extract(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let corpora = cfg.corpora()?;
    let out = cfg.out_dir()?;
    let vectors = extract_all(corpora.values(), &cfg.rules, &cfg.extraction)?;
    let meta = cfg.metadata();
    let mut written = Vec::new();
    for (rule, v) in &vectors {
        let path = out.join(features_file(rule));
        write(path.clone(), format_features_csv(rule, v, &meta))?;
        written.push(path);
    }
    Ok(written)
}

fn load_text(cfg: &RunConfig) -> Result<(TextTable, BTreeSet<String>)> {
    if cfg.features.is_some() {
        let dir = cfg.require(&cfg.features, "features")?;
        let mut table = TextTable::new();
        let mut langs = BTreeSet::new();
        for rule in &cfg.rules {
            let path = dir.join(features_file(rule));
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let (_, rows) = parse_features_csv(&bytes, &path.display().to_string())?;
            langs.extend(rows.keys().cloned());
            table.insert(rule.clone(), rows.into_iter().map(|(l, r)| (l, r.normalized)).collect());
        }
        Ok((table, langs))
    } else {
        let corpora = cfg.corpora()?;
        let vectors = extract_all(corpora.values(), &cfg.rules, &cfg.extraction)?;
        Ok((text_table(&vectors), corpora.keys().cloned().collect()))
    }
}

fn with_header(format: ReportFormat, meta: &str, body: String) -> String {
    match format {
        ReportFormat::Tsv => format!("# {meta}\n{body}"),
        ReportFormat::Markdown => format!("<!-- {meta} -->\n\n{body}"),
    }
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let db = cfg.database()?;
    let (text, langs) = load_text(cfg)?;
    let out = cfg.out_dir()?;
    let report = run_experiments(&db, &text, &langs, &cfg.rules, &cfg.grid())?;
    let meta = cfg.metadata();
    let mut written = Vec::new();
    for &format in &cfg.formats {
        let ext = format.extension();
        for g in &report.grids {
            let path = out.join(format!("report_{}.{ext}", g.rule));
            write(path.clone(), with_header(format, &meta, emit_rule_grid(g, format)))?;
            written.push(path);
        }
        let path = out.join(format!("report_genealogy.{ext}"));
        write(path.clone(), with_header(format, &meta, emit_genealogy(&report.genealogy, format)))?;
        written.push(path);
        if !report.knn.is_empty() {
            let body = report
                .knn
                .iter()
                .map(|g| emit_grid(&format!("{} k-NN", rule_title(g)), &g.grid, format))
                .collect::<Vec<_>>()
                .join("\n");
            let path = out.join(format!("report_knn.{ext}"));
            write(path.clone(), with_header(format, &meta, body))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub rule: RuleId,
    pub code: u8,
    pub label: String,
}

/// Trains on every other language and predicts each requested rule for
/// `args.language`, which may be missing from WALS.
pub fn cmd_predict(cfg: &RunConfig, args: &PredictArgs) -> Result<Vec<Prediction>> {
    let db = cfg.database()?;
    let corpora = cfg.corpora()?;
    let lang = args.language.as_str();
    let record = db.language(lang).ok();
    let corpus = corpora.get(lang);
    if record.is_none() && corpus.is_none() {
        return Err(Error::UnknownLanguage(lang.into()));
    }
    let vectors = extract_all(corpora.values(), &cfg.rules, &cfg.extraction)?;
    let mut text = text_table(&vectors);
    let training: BTreeSet<String> = corpora.keys().filter(|c| *c != lang).cloned().collect();
    let genus = args.genus.as_deref().or(record.map(|r| r.genus.as_str()));
    let family = args.family.as_deref().or(record.map(|r| r.family.as_str()));
    let empty = BTreeMap::new();
    let values = record.map_or(&empty, |r| &r.rule_values);
    let mut out = Vec::new();
    for rule in &cfg.rules {
        let spec = FeatureBlockSpec::new(cfg.blocks.iter().copied(), rule.clone())?;
        let rule_text = text.remove(rule).unwrap_or_default();
        let target_text = rule_text.get(lang).cloned();
        let (ds, encoder) = assemble(&db, &rule_text, &training, &spec)?;
        if spec.has(Block::Text) && target_text.is_none() {
            return Err(Error::MissingTextVector(lang.into()));
        }
        let model = cfg.classifier.train(&ds)?;
        let row = DatasetRow {
            language: lang.into(),
            genus: genus.unwrap_or_default().into(),
            family: family.unwrap_or_default().into(),
            features: encoder.encode(&db, target_text.as_deref(), values, genus, family)?,
            label: 0,
        };
        let code = match &model {
            TrainedModel::Genealogy(m) => m.predict(genus, family),
            _ => model.predict(&row)?,
        };
        let label = db.rule(rule)?.label(code).unwrap_or("?").to_string();
        out.push(Prediction { rule: rule.clone(), code, label });
    }
    Ok(out)
}

pub fn format_predictions(cfg: &RunConfig, language: &str, preds: &[Prediction]) -> String {
    let mut s = format!("# {}\nlanguage\trule\tcode\tlabel\n", cfg.metadata());
    for p in preds {
        s.push_str(&format!("{language}\t{}\t{}\t{}\n", p.rule, p.code, p.label));
    }
    s
}

pub fn cmd_synth(cfg: &RunConfig, args: &SynthArgs) -> Result<Vec<String>> {
    if let Some(dir) = &args.verify {
        let bad = verify_manifest(dir)?;
        if !bad.is_empty() {
            return Err(Error::InvalidRecord {
                context: dir.display().to_string(),
                row: 0,
                message: format!("checksum mismatch: {}", bad.join(", ")),
            });
        }
        return Ok(vec![]);
    }
    let mut spec = default_benchmark();
    spec.seed = cfg.seed;
    if let Some(n) = args.sentences {
        spec.sentences_per_language = n;
    }
    if let Some(noise) = args.noise {
        spec = spec.with_noise(noise);
    }
    let out = cfg.out.as_deref().ok_or_else(|| Error::Config("--out is required".into()))?;
    write_benchmark(&spec, out)?;
    Ok(spec.languages.iter().map(|l| l.code.clone()).collect())
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<String> {
    Ok(match &cli.command {
        Command::Extract => {
            let files = cmd_extract(cfg)?;
            format!("wrote {} feature files\n", files.len())
        }
        Command::Evaluate => {
            let files = cmd_evaluate(cfg)?;
            format!("wrote {} report files\n", files.len())
        }
        Command::Predict(args) => format_predictions(cfg, &args.language, &cmd_predict(cfg, args)?),
        Command::Synth(args) => {
            let langs = cmd_synth(cfg, args)?;
            if args.verify.is_some() {
                "manifest ok\n".to_string()
            } else {
                format!("wrote {} languages\n", langs.len())
            }
        }
    })
}

/// Runs a parsed command line and returns its stdout text.
pub fn run(cli: Cli) -> Result<String> {
    let cfg = RunConfig::resolve(cli.config.clone())?;
    match cfg.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Config(e.to_string()))?;
            pool.install(|| dispatch(&cli, &cfg))
        }
        None => dispatch(&cli, &cfg),
    }
}
