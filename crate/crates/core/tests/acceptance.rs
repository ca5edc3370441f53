//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on
//! any failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use wals_typology::classifiers::genealogy::Peer;
use wals_typology::classifiers::logistic::{train_logistic_with, Problem};
use wals_typology::classifiers::{genealogy_predict, train_nb, ClassifierSpec, GenealogyLevel, LogisticOptions, DEFAULT_LAMBDAS};
use wals_typology::corpus::{
    format_alignments, format_conll, format_sentences, parse_alignments, parse_conll, parse_sentences, read_corpus, write_corpus,
    DependencyTree, ParallelCorpus,
};
use wals_typology::evaluation::{loocv, run_experiments, text_table, ExperimentReport, GridConfig, RuleGrid};
use wals_typology::extraction::{context_counts, counted_instances, extract_all, ExtractionConfig};
use wals_typology::particles::build_92a_vector;
use wals_typology::rules::{study_rules, RuleId, ORDER_RULES};
use wals_typology::synthetic::{default_benchmark, generate, planted_particle, SyntheticSpec};
use wals_typology::wals::{format_rules_csv, format_wals_csv, parse_rules_csv, parse_wals_csv, LanguageRecord, WalsDatabase};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn extraction_oracle() -> Outcome {
    let (corpus, expected) = eight_sentence_fixture();
    let cfg = ExtractionConfig::default();
    for (rule, want) in &expected {
        let got = context_counts(rule, &corpus, &cfg).unwrap().as_array();
        ensure(got == *want, || format!("{rule}: got {got:?}, want {want:?}"))?;
    }
    Ok(format!("{} rules on {} pairs", expected.len(), corpus.pairs.len()))
}

fn projection_exclusivity() -> Outcome {
    let cfg = ExtractionConfig::default();
    let (mut kept_total, mut excluded_total) = (0, 0);
    for seed in 0..1000 {
        let pair = random_pair(&mut rng(seed));
        for rule in ORDER_RULES {
            let kept: BTreeSet<(usize, usize)> =
                counted_instances(rule, &pair, &cfg).unwrap().iter().map(|i| (i.src_head, i.src_dep)).collect();
            for (h, d) in brute_candidates(&pair, rule) {
                let exclusive = brute_exclusive(&pair, h).is_some() && brute_exclusive(&pair, d).is_some();
                ensure(exclusive == kept.contains(&(h, d)), || format!("seed {seed} {rule} ({h}, {d})"))?;
                if exclusive {
                    kept_total += 1;
                } else {
                    excluded_total += 1;
                }
            }
            ensure(kept.len() <= brute_candidates(&pair, rule).len(), || format!("seed {seed} {rule}: extra instance"))?;
        }
    }
    ensure(kept_total > 0 && excluded_total > 0, || "vacuous fixture".into())?;
    Ok(format!("1000 pairs, {kept_total} kept, {excluded_total} excluded"))
}

fn logistic_gradient() -> Outcome {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        use rand::Rng;
        let (n, d, k) = (r.gen_range(5..30), r.gen_range(1..6), r.gen_range(2..5));
        let ds = random_dataset(&mut r, n, d, k);
        let lambda = DEFAULT_LAMBDAS[r.gen_range(0..DEFAULT_LAMBDAS.len())];
        let p = Problem::new(&ds, lambda).unwrap().n_params();
        let random: Vec<f64> = (0..p).map(|_| r.gen_range(-1.5..1.5)).collect();
        worst = worst.max(gradient_error(&ds, lambda, &vec![0.0; p], 1e-5));
        worst = worst.max(gradient_error(&ds, lambda, &random, 1e-5));
    }
    ensure(worst <= 1e-4, || format!("max relative error {worst:e}"))?;
    for seed in 0..10 {
        let ds = random_dataset(&mut rng(seed), 60, 3, 3);
        let mut norms = Vec::new();
        for lambda in DEFAULT_LAMBDAS {
            let (m, report) = train_logistic_with(&ds, lambda, &LogisticOptions::default()).unwrap();
            ensure(report.losses.windows(2).all(|w| w[1] <= w[0]), || format!("loss rose, seed {seed} lambda {lambda}"))?;
            norms.push(m.weight_norm());
        }
        ensure(norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-6)), || format!("norms {norms:?}"))?;
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn naive_bayes_closed_form() -> Outcome {
    let m = train_nb(&four_point_dataset()).unwrap();
    let mut worst: f64 = 0.0;
    for x in [0.05, 0.5, 0.52, 0.95] {
        worst = worst.max((m.posterior(&[x]).unwrap()[0] - four_point_posterior(x)).abs());
    }
    ensure(worst <= 1e-9, || format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e}"))
}

fn loocv_equivalence() -> Outcome {
    let mut specs =
        vec![ClassifierSpec::Majority, ClassifierSpec::GenusMajority, ClassifierSpec::FamilyMajority, ClassifierSpec::NaiveBayes];
    specs.extend(DEFAULT_LAMBDAS.map(|lambda| ClassifierSpec::Logistic { lambda }));
    specs.extend([1, 3, 5].map(|k| ClassifierSpec::Knn { k }));
    let mut r = rng(2024);
    for i in 0..25 {
        let ds = random_dataset(&mut r, 15, 1 + i % 4, 2 + i % 3);
        for spec in &specs {
            let got: Vec<_> = loocv(&ds, spec).unwrap().per_language.values().map(|&(_, p)| p).collect();
            ensure(got == naive_loocv(&ds, spec), || format!("dataset {i} {spec:?}"))?;
        }
    }
    Ok(format!("25 datasets x {} specs", specs.len()))
}

fn genealogy_oracle() -> Outcome {
    let rule = RuleId::from("T1");
    let mut checks = 0;
    for seed in 0..100 {
        let db = random_db(seed);
        let labeled: Vec<&LanguageRecord> = db.languages().iter().filter(|l| l.value(&rule).is_some()).collect();
        for held in &labeled {
            let training: Vec<&str> =
                labeled.iter().filter(|l| l.wals_code != held.wals_code).map(|l| l.wals_code.as_str()).collect();
            let peers: Vec<Peer> = training
                .iter()
                .map(|c| {
                    let l = db.language(c).unwrap();
                    Peer { genus: l.genus.clone(), family: l.family.clone(), label: l.value(&rule).unwrap() }
                })
                .collect();
            for level in [GenealogyLevel::Genus, GenealogyLevel::Family] {
                let got = genealogy_predict(&db, &rule, &held.wals_code, level, &training).unwrap();
                let want = vote_oracle(&peers, Some(&held.genus), Some(&held.family), level);
                ensure(got == want, || format!("seed {seed} {}", held.wals_code))?;
                for poison in 1..=3 {
                    let mut langs = db.languages().to_vec();
                    let l = langs.iter_mut().find(|l| l.wals_code == held.wals_code).unwrap();
                    l.rule_values.insert(rule.clone(), poison);
                    let poisoned = WalsDatabase::new(db.rules().cloned().collect(), db.columns().to_vec(), langs).unwrap();
                    let again = genealogy_predict(&poisoned, &rule, &held.wals_code, level, &training).unwrap();
                    ensure(again == got, || format!("poisoning changed seed {seed} {}", held.wals_code))?;
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} held-out votes"))
}

fn benchmark_report(spec: &SyntheticSpec) -> (ExperimentReport, BTreeMap<String, ParallelCorpus>) {
    let (db, corpora) = generate(spec).unwrap();
    let rules = study_rules();
    let vectors = extract_all(corpora.values(), &rules, &ExtractionConfig::default()).unwrap();
    let set: BTreeSet<String> = corpora.keys().cloned().collect();
    let report = run_experiments(&db, &text_table(&vectors), &set, &rules, &GridConfig::default()).unwrap();
    (report, corpora)
}

fn cell(g: &RuleGrid, row: &str, column: &str) -> f64 {
    let c = g.grid.columns.iter().position(|x| x == column).unwrap();
    g.grid.rows.iter().find(|(r, _)| r == row).unwrap().1[c].unwrap()
}

fn synthetic_end_to_end() -> Outcome {
    let spec = default_benchmark();
    let (report, corpora) = benchmark_report(&spec);
    for g in &report.grids {
        for column in ["Naive Bayes", "LR1", "LR.5", "LR.1", "LR.01", "LR-8"] {
            let acc = cell(g, "Text", column);
            ensure(acc == 1.0, || format!("{} Text/{column} = {acc}", g.rule))?;
        }
    }
    for row in &report.genealogy {
        ensure(row.same_genus == 1.0, || format!("{} Same Genus = {}", row.rule, row.same_genus))?;
    }
    let mut recovered = 0;
    for lang in &spec.languages {
        if let Some(p) = planted_particle(lang, spec.seed) {
            let got = build_92a_vector(&corpora[&lang.code], &ExtractionConfig::default()).particle;
            ensure(got.as_deref() == Some(p.as_str()), || format!("{}: {got:?} vs {p}", lang.code))?;
            recovered += 1;
        }
    }
    Ok(format!("6 rules at 1.0, {recovered} particles recovered"))
}

fn noise_degradation() -> Outcome {
    let (report, _) = benchmark_report(&default_benchmark().with_noise(0.3));
    let mut detail = Vec::new();
    for g in report.grids.iter().filter(|g| ["83A", "85A", "86A", "88A"].contains(&g.rule.as_str())) {
        let (lr, maj) = (cell(g, "Text", "LR1"), cell(g, "Text", "Majority"));
        ensure(lr > maj, || format!("{}: LR1 {lr} <= Majority {maj}", g.rule))?;
        detail.push(format!("{} {:.2}>{:.2}", g.rule, lr, maj));
    }
    Ok(detail.join(", "))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn report_golden_files() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let bench = tmp.path().join("bench");
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_wals-typology")).args(args).output().unwrap();
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())
    };
    let p = |x: &Path| x.to_str().unwrap().to_string();
    run(&["synth", "--out", &p(&bench)])?;
    let mut snaps = Vec::new();
    for (i, jobs) in ["1", "4", "1"].iter().enumerate() {
        let out = tmp.path().join(format!("r{i}"));
        run(&[
            "evaluate",
            "--wals",
            &p(&bench.join("wals.csv")),
            "--rules-csv",
            &p(&bench.join("rules.csv")),
            "--corpus",
            &p(&bench),
            "--out",
            &p(&out),
            "--jobs",
            jobs,
        ])?;
        snaps.push(snapshot(&out));
    }
    ensure(snaps[0] == snaps[1] && snaps[1] == snaps[2], || "reports differ between runs".into())?;
    let percent = |s: &str| s == "-" || s.strip_suffix('%').and_then(|v| v.split_once('.')).is_some_and(|(_, f)| f.len() == 1);
    for rule in study_rules() {
        let text = String::from_utf8(snaps[0][&format!("report_{rule}.tsv")].clone()).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        ensure(lines.len() == 4, || format!("{rule}: {} table lines", lines.len()))?;
        for row in &lines[1..] {
            let cells: Vec<&str> = row.split('\t').collect();
            ensure(cells.len() == 8 && cells[1..].iter().all(|c| percent(c)), || format!("{rule}: bad row {row}"))?;
        }
    }
    let gen = String::from_utf8(snaps[0]["report_genealogy.tsv"].clone()).unwrap();
    let header = gen.lines().find(|l| !l.starts_with('#')).unwrap();
    ensure(header == "Rule\tBest Other\tSame Genus\tSame Family", || format!("genealogy header {header}"))?;
    Ok(format!("{} files identical across 3 runs", snaps[0].len()))
}

fn round_trip_corpus(c: &ParallelCorpus) -> Result<(), String> {
    let trees: Vec<DependencyTree> = c.pairs.iter().map(|p| p.source.clone()).collect();
    let sents: Vec<Vec<String>> = c.pairs.iter().map(|p| p.target_forms.clone()).collect();
    let links: Vec<_> = c.pairs.iter().map(|p| p.links.clone()).collect();
    ensure(parse_conll(&format_conll(&trees), "c").unwrap() == trees, || format!("{} CoNLL", c.language_code))?;
    ensure(parse_sentences(&format_sentences(&sents)) == sents, || format!("{} sentences", c.language_code))?;
    ensure(parse_alignments(&format_alignments(&links), "a").unwrap() == links, || format!("{} Pharaoh", c.language_code))?;
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), c).unwrap();
    ensure(&read_corpus(dir.path(), &c.language_code).unwrap() == c, || format!("{} directory", c.language_code))
}

fn format_round_trips() -> Outcome {
    let (fixture, _) = eight_sentence_fixture();
    round_trip_corpus(&fixture)?;
    let random = ParallelCorpus { language_code: "rnd".into(), pairs: (0..200).map(|s| random_pair(&mut rng(s))).collect() };
    round_trip_corpus(&random)?;
    let (db, corpora) = generate(&default_benchmark()).unwrap();
    for c in corpora.values() {
        round_trip_corpus(c)?;
    }
    let rules = parse_rules_csv(format_rules_csv(&db).as_bytes(), "rules").unwrap();
    ensure(parse_wals_csv(format_wals_csv(&db).as_bytes(), rules, "wals").unwrap() == db, || "benchmark WALS".into())?;
    for seed in 0..100 {
        let db = random_db(seed);
        let rules = parse_rules_csv(format_rules_csv(&db).as_bytes(), "rules").unwrap();
        ensure(parse_wals_csv(format_wals_csv(&db).as_bytes(), rules, "wals").unwrap() == db, || format!("random WALS {seed}"))?;
    }
    Ok(format!("{} corpora, 101 databases", corpora.len() + 2))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("extraction oracle", Some(Duration::from_secs(1)), extraction_oracle),
        ("projection exclusivity", None, projection_exclusivity),
        ("logistic gradient check", None, logistic_gradient),
        ("naive bayes closed form", None, naive_bayes_closed_form),
        ("loocv brute-force equivalence", Some(Duration::from_secs(30)), loocv_equivalence),
        ("genealogy vote oracle", None, genealogy_oracle),
        ("synthetic end to end", Some(Duration::from_secs(300)), synthetic_end_to_end),
        ("noise degradation", None, noise_degradation),
        ("report golden files", None, report_golden_files),
        ("format round trips", None, format_round_trips),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > *l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("{tag} {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
