use std::collections::BTreeSet;

use wals_typology::evaluation::{emit_report, run_experiments, text_table, ExperimentReport, GridConfig, ReportFormat, RuleGrid};
use wals_typology::extraction::{context_counts, extract_all, ExtractionConfig};
use wals_typology::particles::{build_92a_vector, split_questions};
use wals_typology::rules::study_rules;
use wals_typology::synthetic::{
    default_benchmark, generate, generate_corpus, planted_particle, ObjectOrder, ParticlePosition, SyntheticLanguage,
    SyntheticSpec,
};

fn report_for(spec: &SyntheticSpec) -> ExperimentReport {
    let (db, corpora) = generate(spec).unwrap();
    let rules = study_rules();
    let vectors = extract_all(corpora.values(), &rules, &ExtractionConfig::default()).unwrap();
    let set: BTreeSet<String> = corpora.keys().cloned().collect();
    run_experiments(&db, &text_table(&vectors), &set, &rules, &GridConfig::default()).unwrap()
}

fn cell(g: &RuleGrid, row: &str, column: &str) -> f64 {
    let c = g.grid.columns.iter().position(|x| x == column).unwrap();
    g.grid.rows.iter().find(|(r, _)| r == row).unwrap().1[c].unwrap()
}

#[test]
fn noiseless_benchmark_is_recovered_exactly() {
    let started = std::time::Instant::now();
    let report = report_for(&default_benchmark());
    assert_eq!(report.grids.len(), 6);
    for g in &report.grids {
        assert_eq!(g.n, 20);
        for column in ["Naive Bayes", "LR1", "LR.5", "LR.1", "LR.01", "LR-8"] {
            assert_eq!(cell(g, "Text", column), 1.0, "{} {column}", g.rule);
        }
    }
    for row in &report.genealogy {
        assert_eq!(row.same_genus, 1.0, "{}", row.rule);
    }
    assert!(started.elapsed().as_secs() < 300);
}

#[test]
fn planted_particles_are_recovered() {
    let spec = default_benchmark();
    let (_, corpora) = generate(&spec).unwrap();
    let mut bearing = 0;
    for lang in &spec.languages {
        let v = build_92a_vector(&corpora[&lang.code], &ExtractionConfig::default());
        match planted_particle(lang, spec.seed) {
            Some(p) => {
                bearing += 1;
                assert_eq!(v.particle.as_deref(), Some(p.as_str()), "{}", lang.code);
            }
            None => assert_eq!(lang.profile.v92a, ParticlePosition::None),
        }
    }
    assert_eq!(bearing, 15);
}

#[test]
fn final_particle_sits_final_in_every_polar_question() {
    let spec = default_benchmark();
    let lang = spec.languages.iter().find(|l| l.profile.v92a == ParticlePosition::Final).unwrap();
    let corpus = generate_corpus(lang, spec.sentences_per_language, spec.seed).unwrap();
    let polar = split_questions(&corpus).polar.len() as u64;
    let v = build_92a_vector(&corpus, &ExtractionConfig::default());
    assert!(polar > 0);
    assert_eq!(v.counts, [0, 0, polar, 0]);
}

#[test]
fn strict_ov_language_is_fully_different_from_english() {
    let spec = default_benchmark();
    let lang: &SyntheticLanguage = spec.languages.iter().find(|l| l.profile.v83a == ObjectOrder::Ov).unwrap();
    let corpus = generate_corpus(lang, 100, 7).unwrap();
    let c = context_counts("83A", &corpus, &ExtractionConfig::default()).unwrap();
    assert!(c.diff_all > 0);
    assert_eq!(c.same_all, 0);
}

/// Same-order proportion of each binary rule, pooled per genus, tracks the
/// flip rate within three binomial standard deviations.
#[test]
fn heavy_noise_pushes_pairs_toward_half() {
    let p = 0.45;
    let spec = default_benchmark().with_noise(p);
    let (_, corpora) = generate(&spec).unwrap();
    // English: VO, prepositions, possessor first, demonstrative first.
    let english = [("83A", 2), ("85A", 2), ("86A", 1), ("88A", 1)];
    let genera: BTreeSet<&str> = spec.languages.iter().map(|l| l.genus.as_str()).collect();
    for genus in genera {
        let members: Vec<&SyntheticLanguage> = spec.languages.iter().filter(|l| l.genus == genus).collect();
        for (rule, english_code) in english {
            let (mut same, mut n) = (0u64, 0u64);
            for lang in &members {
                let c = context_counts(rule, &corpora[&lang.code], &ExtractionConfig::default()).unwrap();
                same += c.same_all;
                n += c.same_all + c.diff_all;
            }
            let frac = same as f64 / n as f64;
            let want = if members[0].profile.code(rule) == Some(english_code) { 1.0 - p } else { p };
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((frac - want).abs() <= 3.0 * sigma, "{genus} {rule}: {frac} vs {want} (n={n})");
        }
    }
}

#[test]
fn noise_keeps_text_lr_above_majority() {
    let report = report_for(&default_benchmark().with_noise(0.3));
    for g in report.grids.iter().filter(|g| ["83A", "85A", "86A", "88A"].contains(&g.rule.as_str())) {
        assert!(cell(g, "Text", "LR1") > cell(g, "Text", "Majority"), "{}", g.rule);
    }
}

#[test]
fn generation_is_reproducible() {
    let spec = default_benchmark();
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a.1, b.1);
    let mut other = spec.clone();
    other.seed += 1;
    assert_ne!(generate(&other).unwrap().1, a.1);
    assert_eq!(emit_report(&report_for(&spec), ReportFormat::Tsv), emit_report(&report_for(&spec), ReportFormat::Tsv));
}
