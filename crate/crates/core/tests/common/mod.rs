//! Independent oracles and fixtures shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wals_typology::classifiers::genealogy::Peer;
use wals_typology::classifiers::logistic::Problem;
use wals_typology::classifiers::{ClassifierSpec, GenealogyLevel};
use wals_typology::corpus::{ParallelCorpus, SentencePair};
use wals_typology::features::{Dataset, DatasetRow};
use wals_typology::fixtures::{build_pair, joseph_pair};
use wals_typology::rules::RuleId;
use wals_typology::wals::{LanguageRecord, RuleDef, WalsDatabase};
use wals_typology::ClassCode;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Eight hand-parsed pairs and, per rule, the raw counts
/// (same_all, diff_all, same_q, diff_q, same_dep, diff_dep) worked out by
/// hand for each sentence.
pub fn eight_sentence_fixture() -> (ParallelCorpus, BTreeMap<&'static str, [u64; 6]>) {
    let pairs = vec![
        // 83A same; 85A one same (at Dothan), one different (after brothers); 86A same.
        joseph_pair(),
        // Question. 83A different, 88A different.
        build_pair(
            &[
                ("Did", "VERB", 4, "aux"),
                ("the", "DET", 3, "det"),
                ("man", "NOUN", 4, "nsubj"),
                ("see", "VERB", 0, "ROOT"),
                ("this", "DET", 6, "det"),
                ("house", "NOUN", 4, "dobj"),
                ("?", ".", 4, "punct"),
            ],
            &["mann", "haus", "dies", "sehen", "ka", "?"],
            &[(3, 1), (6, 2), (5, 3), (4, 4), (7, 6)],
        ),
        // Passive inside a complement clause: 107A different, dependent clause.
        build_pair(
            &[
                ("He", "PRON", 2, "nsubj"),
                ("said", "VERB", 0, "ROOT"),
                ("that", "ADP", 7, "mark"),
                ("the", "DET", 5, "det"),
                ("king", "NOUN", 7, "nsubjpass"),
                ("was", "VERB", 7, "auxpass"),
                ("killed", "VERB", 2, "ccomp"),
                (".", ".", 2, "punct"),
            ],
            &["er", "sagte", "dass", "getötet", "wurde", "könig", "."],
            &[(1, 1), (2, 2), (3, 3), (7, 4), (6, 5), (5, 6), (8, 7)],
        ),
        // `son` links to two target words, so nothing here is counted.
        build_pair(
            &[
                ("The", "DET", 2, "det"),
                ("man", "NOUN", 3, "nsubj"),
                ("saw", "VERB", 0, "ROOT"),
                ("his", "PRON", 5, "poss"),
                ("son", "NOUN", 3, "dobj"),
                (".", ".", 3, "punct"),
            ],
            &["mann", "sah", "sein", "sohn", "."],
            &[(2, 1), (3, 2), (4, 3), (5, 4), (5, 3), (6, 5)],
        ),
        // Adverbial clause: 85A and 86A different, dependent clause.
        build_pair(
            &[
                ("They", "PRON", 2, "nsubj"),
                ("left", "VERB", 0, "ROOT"),
                ("because", "ADP", 6, "mark"),
                ("the", "DET", 5, "det"),
                ("queen", "NOUN", 6, "nsubj"),
                ("went", "VERB", 2, "advcl"),
                ("to", "ADP", 6, "adpmod"),
                ("her", "PRON", 9, "poss"),
                ("city", "NOUN", 7, "adpobj"),
                (".", ".", 2, "punct"),
            ],
            &["sie", "gingen", "weil", "königin", "ging", "stadt", "ihr", "zu", "."],
            &[(1, 1), (2, 2), (3, 3), (5, 4), (6, 5), (9, 6), (8, 7), (7, 8), (10, 9)],
        ),
        // Plain passive: 107A same.
        build_pair(
            &[
                ("The", "DET", 2, "det"),
                ("bread", "NOUN", 4, "nsubjpass"),
                ("was", "VERB", 4, "auxpass"),
                ("taken", "VERB", 0, "ROOT"),
                (".", ".", 4, "punct"),
            ],
            &["brot", "genommen", "."],
            &[(2, 1), (4, 2), (5, 3)],
        ),
        // 83A same; 88A two different.
        build_pair(
            &[
                ("Those", "DET", 2, "det"),
                ("men", "NOUN", 3, "nsubj"),
                ("built", "VERB", 0, "ROOT"),
                ("that", "DET", 5, "det"),
                ("house", "NOUN", 3, "dobj"),
                (".", ".", 3, "punct"),
            ],
            &["männer", "jene", "bauten", "haus", "das", "."],
            &[(2, 1), (1, 2), (3, 3), (5, 4), (4, 5), (6, 6)],
        ),
        // Information question: 83A and 88A different.
        build_pair(
            &[
                ("Where", "ADV", 4, "advmod"),
                ("did", "VERB", 4, "aux"),
                ("man", "NOUN", 4, "nsubj"),
                ("put", "VERB", 0, "ROOT"),
                ("these", "DET", 6, "det"),
                ("stones", "NOUN", 4, "dobj"),
                ("?", ".", 4, "punct"),
            ],
            &["wo", "mann", "steine", "diese", "legte", "?"],
            &[(1, 1), (3, 2), (6, 3), (5, 4), (4, 5), (7, 6)],
        ),
    ];
    let expected = BTreeMap::from([
        ("83A", [2, 2, 0, 2, 0, 0]),
        ("85A", [1, 2, 0, 0, 0, 1]),
        ("86A", [1, 1, 0, 0, 0, 1]),
        ("88A", [0, 4, 0, 2, 0, 0]),
        ("107A", [1, 1, 0, 0, 0, 1]),
    ]);
    (ParallelCorpus { language_code: "deu".into(), pairs }, expected)
}

/// Mutual one-to-one alignment of `src`, by scanning every link.
pub fn brute_exclusive(pair: &SentencePair, src: usize) -> Option<usize> {
    let out: Vec<usize> = pair.links.iter().filter(|l| l.src == src).map(|l| l.tgt).collect();
    if out.len() != 1 {
        return None;
    }
    let back = pair.links.iter().filter(|l| l.tgt == out[0]).count();
    (back == 1).then_some(out[0])
}

/// Every candidate (head, dependent) pair for `rule`, found by scanning all
/// token pairs.
pub fn brute_candidates(pair: &SentencePair, rule: &str) -> Vec<(usize, usize)> {
    let toks = pair.source.tokens();
    let mut out = Vec::new();
    for h in toks {
        for d in toks {
            if d.head != h.index {
                continue;
            }
            let ok = match rule {
                "83A" => d.deprel == "dobj",
                "85A" => d.deprel == "adpobj" && h.deprel == "adpmod" && h.head != 0,
                "86A" => d.deprel == "poss",
                "88A" => {
                    (d.deprel == "det" || d.deprel == "pron")
                        && ["this", "that", "these", "those"].contains(&d.form.to_lowercase().as_str())
                        && h.upos.starts_with('N')
                }
                "107A" => d.deprel == "nsubjpass",
                _ => false,
            };
            if ok {
                out.push((h.index, d.index));
            }
        }
    }
    out.sort();
    out
}

/// Random well-formed pair: a random tree over `n` tokens with labels and
/// forms drawn from the extractor vocabulary, and random (often
/// many-to-many) links.
pub fn random_pair(rng: &mut ChaCha8Rng) -> SentencePair {
    const LABELS: [&str; 9] = ["dobj", "adpmod", "adpobj", "poss", "det", "pron", "nsubjpass", "nsubj", "amod"];
    const FORMS: [&str; 7] = ["this", "That", "these", "those", "dog", "ran", "?"];
    const UPOS: [&str; 5] = ["NOUN", "N", "VERB", "DET", "ADP"];
    let n = rng.gen_range(1..=12);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0usize; n + 1];
    for (i, &tok) in order.iter().enumerate().skip(1) {
        heads[tok] = order[rng.gen_range(0..i)];
    }
    let rows: Vec<(String, &str, usize, &str)> = (1..=n)
        .map(|i| {
            let label = if heads[i] == 0 { "ROOT" } else { LABELS[rng.gen_range(0..LABELS.len())] };
            (FORMS[rng.gen_range(0..FORMS.len())].to_string(), UPOS[rng.gen_range(0..UPOS.len())], heads[i], label)
        })
        .collect();
    let m = rng.gen_range(1..=12);
    let targets: Vec<String> = (1..=m).map(|j| format!("t{j}")).collect();
    let density = rng.gen_range(0.05..0.3);
    let mut links = Vec::new();
    for s in 1..=n {
        for t in 1..=m {
            if rng.gen_bool(density) {
                links.push((s, t));
            }
        }
    }
    let src: Vec<(&str, &str, usize, &str)> = rows.iter().map(|(f, u, h, l)| (f.as_str(), *u, *h, *l)).collect();
    let tgt: Vec<&str> = targets.iter().map(String::as_str).collect();
    build_pair(&src, &tgt, &links)
}

/// Dataset of `n` rows, `d` continuous columns and labels in `1..=k`.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> Dataset {
    let genera = ["ga", "gb", "gc", "gd"];
    let families = ["fa", "fb"];
    let rows = (0..n)
        .map(|i| DatasetRow {
            language: format!("l{i:03}"),
            genus: genera[rng.gen_range(0..genera.len())].into(),
            family: families[rng.gen_range(0..families.len())].into(),
            features: (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            label: rng.gen_range(1..=k) as ClassCode,
        })
        .collect();
    Dataset::continuous("T".into(), k, rows)
}

/// Leave-one-out predictions by an explicit double loop that rebuilds each
/// training set row by row.
pub fn naive_loocv(ds: &Dataset, spec: &ClassifierSpec) -> Vec<ClassCode> {
    let mut preds = Vec::new();
    for i in 0..ds.rows.len() {
        let mut train = ds.clone();
        train.rows.clear();
        for (j, r) in ds.rows.iter().enumerate() {
            if j != i {
                train.rows.push(r.clone());
            }
        }
        let model = spec.train(&train).unwrap();
        preds.push(model.predict(&ds.rows[i]).unwrap());
    }
    preds
}

/// Counting vote over genus peers, then family peers, then everyone.
pub fn vote_oracle(peers: &[Peer], genus: Option<&str>, family: Option<&str>, level: GenealogyLevel) -> Option<ClassCode> {
    let tally = |pred: &dyn Fn(&Peer) -> bool| -> Option<ClassCode> {
        let mut counts = [0usize; 256];
        let mut any = false;
        for p in peers.iter().filter(|p| pred(p)) {
            counts[p.label as usize] += 1;
            any = true;
        }
        if !any {
            return None;
        }
        let best = *counts.iter().max().unwrap();
        (0..256).find(|&c| counts[c] == best).map(|c| c as ClassCode)
    };
    let genus_vote = || genus.and_then(|g| tally(&|p: &Peer| p.genus == g));
    let family_vote = || family.and_then(|f| tally(&|p: &Peer| p.family == f));
    let first = match level {
        GenealogyLevel::Genus => genus_vote().or_else(family_vote),
        GenealogyLevel::Family => family_vote(),
    };
    first.or_else(|| tally(&|_| true))
}

/// Largest |analytic - numeric| / max(1, |analytic|, |numeric|) over all
/// parameters, with central differences of step `h`.
pub fn gradient_error(ds: &Dataset, lambda: f64, w: &[f64], h: f64) -> f64 {
    let p = Problem::new(ds, lambda).unwrap();
    let mut g = vec![0.0; p.n_params()];
    p.objective(w, Some(&mut g));
    let mut worst: f64 = 0.0;
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        probe[i] = w[i] + h;
        let up = p.objective(&probe, None);
        probe[i] = w[i] - h;
        let down = p.objective(&probe, None);
        probe[i] = w[i];
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((g[i] - numeric).abs() / g[i].abs().max(numeric.abs()).max(1.0));
    }
    worst
}

/// Database with one three-valued rule `T1`, five genera, three families
/// and about a fifth of the values missing.
pub fn random_db(seed: u64) -> WalsDatabase {
    let mut r = rng(seed);
    let rule = RuleDef::new("T1".into(), "T1", (1..=3).map(|c| (c, format!("v{c}"))).collect()).unwrap();
    let n = r.gen_range(2..25);
    let languages = (0..n)
        .map(|i| {
            let mut values = BTreeMap::new();
            if r.gen_bool(0.8) {
                values.insert(RuleId::from("T1"), r.gen_range(1..=3));
            }
            LanguageRecord {
                wals_code: format!("x{i:02}"),
                name: format!("X{i}"),
                genus: format!("g{}", r.gen_range(0..5)),
                family: format!("f{}", r.gen_range(0..3)),
                rule_values: values,
            }
        })
        .collect();
    WalsDatabase::new(vec![rule], vec!["T1".into()], languages).unwrap()
}

/// Two one-dimensional classes, {0, 0.1} and {0.9, 1.0}.
pub fn four_point_dataset() -> Dataset {
    let rows = [(0.0, 1), (0.1, 1), (0.9, 2), (1.0, 2)]
        .iter()
        .enumerate()
        .map(|(i, &(x, label))| DatasetRow {
            language: format!("l{i}"),
            genus: "g".into(),
            family: "f".into(),
            features: vec![x],
            label,
        })
        .collect();
    Dataset::continuous("T".into(), 2, rows)
}

/// Class means 0.05 and 0.95, both maximum-likelihood variances 0.0025 and
/// equal priors, so P(c1 | x) = 1 / (1 + exp(((x - 0.05)^2 - (x - 0.95)^2) / 0.005)).
pub fn four_point_posterior(x: f64) -> f64 {
    1.0 / (1.0 + (((x - 0.05f64).powi(2) - (x - 0.95f64).powi(2)) / 0.005).exp())
}
