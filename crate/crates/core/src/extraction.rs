//! Dependency projection and the order-based text features.
//!
//! A source dependency is projected onto the target sentence only when both
//! of its words are exclusively aligned: each word links to exactly one
//! target token, and that token links back to nothing else.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use serde::{Deserialize, Serialize};

use crate::corpus::{DependencyTree, ParallelCorpus, SentencePair};
use crate::rules::RuleId;

pub const DEFAULT_CLAUSE_LABELS: [&str; 7] = ["advcl", "ccomp", "xcomp", "rcmod", "acl", "csubj", "csubjpass"];

pub const DEMONSTRATIVES: [&str; 4] = ["this", "that", "these", "those"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub clause_labels: BTreeSet<String>,
    /// Add-alpha smoothing for question-particle inference.
    pub alpha: f64,
    /// Minimum polar-question count for a particle candidate.
    pub min_freq: u64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig { clause_labels: DEFAULT_CLAUSE_LABELS.iter().map(|s| s.to_string()).collect(), alpha: 0.5, min_freq: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Context {
    Plain,
    Question,
    DependentClause,
}

/// Source relation an instance was projected from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    /// verb → object
    Dobj,
    /// adposition → governed noun
    Adposition,
    /// noun → possessor
    Poss,
    /// noun → demonstrative
    Demonstrative,
    /// verb → passive subject
    NsubjPass,
    /// verb → active subject
    Nsubj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedInstance {
    pub relation: Relation,
    pub src_head: usize,
    pub src_dep: usize,
    pub tgt_head: usize,
    pub tgt_dep: usize,
    pub context: Context,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextCounts {
    pub same_all: u64,
    pub diff_all: u64,
    pub same_q: u64,
    pub diff_q: u64,
    pub same_dep: u64,
    pub diff_dep: u64,
}

impl ContextCounts {
    pub fn record(&mut self, context: Context, same: bool) {
        let bump = |s: &mut u64, d: &mut u64| if same { *s += 1 } else { *d += 1 };
        bump(&mut self.same_all, &mut self.diff_all);
        match context {
            Context::Plain => {}
            Context::Question => bump(&mut self.same_q, &mut self.diff_q),
            Context::DependentClause => bump(&mut self.same_dep, &mut self.diff_dep),
        }
    }

    pub fn merge(&mut self, other: &ContextCounts) {
        self.same_all += other.same_all;
        self.diff_all += other.diff_all;
        self.same_q += other.same_q;
        self.diff_q += other.diff_q;
        self.same_dep += other.same_dep;
        self.diff_dep += other.diff_dep;
    }

    pub fn as_array(&self) -> [u64; 6] {
        [self.same_all, self.diff_all, self.same_q, self.diff_q, self.same_dep, self.diff_dep]
    }

    /// Each (same, diff) pair divided by its sum; a zero pair stays (0, 0).
    pub fn normalized(&self) -> Vec<f64> {
        self.as_array()
            .chunks(2)
            .flat_map(|p| {
                let total = p[0] + p[1];
                if total == 0 {
                    [0.0, 0.0]
                } else {
                    [p[0] as f64 / total as f64, p[1] as f64 / total as f64]
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RawCounts {
    Context(ContextCounts),
    /// (initial, second, final, elsewhere)
    Positions([u64; 4]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextFeatureVector {
    pub rule: RuleId,
    pub language: String,
    pub raw: RawCounts,
    pub normalized: Vec<f64>,
    pub n_instances: u64,
    /// Inferred polar question particle (92A only).
    pub particle: Option<String>,
}

/// The unique target token mutually and exclusively aligned to `src`.
pub fn exclusive_alignment(pair: &SentencePair, src: usize) -> Option<usize> {
    let mut targets = pair.targets_of(src);
    let tgt = targets.next()?;
    if targets.next().is_some() {
        return None;
    }
    let mut sources = pair.sources_of(tgt);
    match (sources.next(), sources.next()) {
        (Some(s), None) if s == src => Some(tgt),
        _ => None,
    }
}

pub fn is_question(tree: &DependencyTree) -> bool {
    tree.tokens().iter().any(|t| t.form == "?")
}

pub fn classify_context(tree: &DependencyTree, head_idx: usize, config: &ExtractionConfig) -> Context {
    if is_question(tree) {
        Context::Question
    } else if tree.path_to_root(head_idx).iter().any(|&i| config.clause_labels.contains(&tree.token(i).deprel)) {
        Context::DependentClause
    } else {
        Context::Plain
    }
}

/// Whether the dependent sits on the same side of its head in both languages.
pub fn order_match(e_dep: usize, e_head: usize, f_dep: usize, f_head: usize) -> bool {
    (e_dep > e_head) == (f_dep > f_head)
}

fn project(
    pair: &SentencePair,
    relation: Relation,
    head: usize,
    dep: usize,
    config: &ExtractionConfig,
) -> Option<ProjectedInstance> {
    let tgt_head = exclusive_alignment(pair, head)?;
    let tgt_dep = exclusive_alignment(pair, dep)?;
    Some(ProjectedInstance {
        relation,
        src_head: head,
        src_dep: dep,
        tgt_head,
        tgt_dep,
        context: classify_context(&pair.source, head, config),
    })
}

/// Source `(head, dependent)` edges (excluding root attachments) with one of `labels`.
fn edges<'a>(tree: &'a DependencyTree, label: &'a str) -> impl Iterator<Item = (usize, usize)> + 'a {
    tree.tokens().iter().filter(move |t| t.head != 0 && t.deprel == label).map(|t| (t.head, t.index))
}

pub fn select_instances_83a(pair: &SentencePair, config: &ExtractionConfig) -> Vec<ProjectedInstance> {
    edges(&pair.source, "dobj").filter_map(|(verb, obj)| project(pair, Relation::Dobj, verb, obj, config)).collect()
}

/// Adpositions attached via `adpmod` to a parent word, paired with the noun
/// they govern (their `adpobj` dependents).
pub fn select_instances_85a(pair: &SentencePair, config: &ExtractionConfig) -> Vec<ProjectedInstance> {
    let tree = &pair.source;
    edges(tree, "adpmod")
        .flat_map(|(_, adp)| tree.children(adp).filter(|c| c.deprel == "adpobj").map(move |noun| (adp, noun.index)))
        .filter_map(|(adp, noun)| project(pair, Relation::Adposition, adp, noun, config))
        .collect()
}

pub fn select_instances_86a(pair: &SentencePair, config: &ExtractionConfig) -> Vec<ProjectedInstance> {
    edges(&pair.source, "poss").filter_map(|(noun, gen)| project(pair, Relation::Poss, noun, gen, config)).collect()
}

pub fn select_instances_88a(pair: &SentencePair, config: &ExtractionConfig) -> Vec<ProjectedInstance> {
    let tree = &pair.source;
    edges(tree, "det")
        .chain(edges(tree, "pron"))
        .filter(|&(noun, dem)| {
            let form = tree.token(dem).form.to_lowercase();
            DEMONSTRATIVES.contains(&form.as_str()) && tree.token(noun).upos.starts_with('N')
        })
        .filter_map(|(noun, dem)| project(pair, Relation::Demonstrative, noun, dem, config))
        .collect()
}

/// Passive (`nsubjpass`) and active (`nsubj`) subject instances.
pub fn select_instances_107a(pair: &SentencePair, config: &ExtractionConfig) -> Vec<ProjectedInstance> {
    let tree = &pair.source;
    let passive = edges(tree, "nsubjpass").map(|e| (Relation::NsubjPass, e));
    let active = edges(tree, "nsubj").map(|e| (Relation::Nsubj, e));
    passive.chain(active).filter_map(|(rel, (verb, subj))| project(pair, rel, verb, subj, config)).collect()
}

/// Instances that feed the order counts of an order rule. `None` for rules
/// without an order extractor.
pub fn counted_instances(rule: &str, pair: &SentencePair, config: &ExtractionConfig) -> Option<Vec<ProjectedInstance>> {
    Some(match rule {
        "83A" => select_instances_83a(pair, config),
        "85A" => select_instances_85a(pair, config),
        "86A" => select_instances_86a(pair, config),
        "88A" => select_instances_88a(pair, config),
        "107A" => select_instances_107a(pair, config).into_iter().filter(|i| i.relation == Relation::NsubjPass).collect(),
        _ => return None,
    })
}

pub fn context_counts(rule: &str, corpus: &ParallelCorpus, config: &ExtractionConfig) -> Option<ContextCounts> {
    if !crate::rules::ORDER_RULES.contains(&rule) {
        return None;
    }
    let mut counts = ContextCounts::default();
    for pair in &corpus.pairs {
        for inst in counted_instances(rule, pair, config)? {
            let same = order_match(inst.src_dep, inst.src_head, inst.tgt_dep, inst.tgt_head);
            counts.record(inst.context, same);
        }
    }
    Some(counts)
}

/// Six-column order vector for 83A, 85A, 86A, 88A or 107A. Returns `None`
/// for other rules.
pub fn build_text_vector(rule: &RuleId, corpus: &ParallelCorpus, config: &ExtractionConfig) -> Option<TextFeatureVector> {
    let counts = context_counts(rule.as_str(), corpus, config)?;
    Some(TextFeatureVector {
        rule: rule.clone(),
        language: corpus.language_code.clone(),
        normalized: counts.normalized(),
        n_instances: counts.same_all + counts.diff_all,
        raw: RawCounts::Context(counts),
        particle: None,
    })
}

/// Text vector for any of the six studied rules, dispatching 92A to the
/// question-particle pipeline.
pub fn text_vector(rule: &RuleId, corpus: &ParallelCorpus, config: &ExtractionConfig) -> Option<TextFeatureVector> {
    if rule.as_str() == "92A" {
        let pv = crate::particles::build_92a_vector(corpus, config);
        Some(TextFeatureVector {
            rule: rule.clone(),
            language: corpus.language_code.clone(),
            normalized: pv.normalized.to_vec(),
            n_instances: pv.counts.iter().sum(),
            raw: RawCounts::Positions(pv.counts),
            particle: pv.particle,
        })
    } else {
        build_text_vector(rule, corpus, config)
    }
}

/// Rule → language → vector for every corpus. Languages are processed in
/// parallel; the result does not depend on scheduling.
pub fn extract_all<'a>(
    corpora: impl IntoIterator<Item = &'a ParallelCorpus>,
    rules: &[RuleId],
    config: &ExtractionConfig,
) -> crate::error::Result<BTreeMap<RuleId, BTreeMap<String, TextFeatureVector>>> {
    let corpora: Vec<&ParallelCorpus> = corpora.into_iter().collect();
    let per_language: Vec<Vec<TextFeatureVector>> = corpora
        .par_iter()
        .map(|c| {
            rules.iter().map(|r| text_vector(r, c, config).ok_or_else(|| crate::error::Error::UnknownRule(r.clone()))).collect()
        })
        .collect::<crate::error::Result<_>>()?;
    let mut out: BTreeMap<RuleId, BTreeMap<String, TextFeatureVector>> =
        rules.iter().map(|r| (r.clone(), BTreeMap::new())).collect();
    for vectors in per_language {
        for v in vectors {
            out.get_mut(&v.rule).expect("requested rule").insert(v.language.clone(), v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AlignmentLink, Token};
    use crate::fixtures::joseph_pair;

    fn pair(tokens: Vec<Token>, target: &[&str], links: &[(usize, usize)]) -> SentencePair {
        SentencePair::new(
            DependencyTree::new(tokens).unwrap(),
            target.iter().map(|s| s.to_string()).collect(),
            links.iter().map(|&(s, t)| AlignmentLink::new(s, t)).collect(),
            1,
        )
        .unwrap()
    }

    fn the_dog_barks() -> Vec<Token> {
        vec![
            Token::new(1, "The", "D", 2, "det"),
            Token::new(2, "dog", "N", 3, "nsubj"),
            Token::new(3, "barks", "V", 0, "root"),
            Token::new(4, ".", ".", 3, "punct"),
        ]
    }

    #[test]
    fn exclusive_alignment_cases() {
        let toks = the_dog_barks();
        let p = pair(toks.clone(), &["a", "b"], &[(1, 1)]);
        assert_eq!(exclusive_alignment(&p, 1), Some(1));
        let p = pair(toks.clone(), &["a", "b"], &[(1, 1), (1, 2)]);
        assert_eq!(exclusive_alignment(&p, 1), None);
        let p = pair(toks, &["a", "b"], &[(1, 1), (2, 1)]);
        assert_eq!(exclusive_alignment(&p, 1), None);
        assert_eq!(exclusive_alignment(&p, 3), None);
    }

    #[test]
    fn contexts() {
        let cfg = ExtractionConfig::default();
        let tree = DependencyTree::new(the_dog_barks()).unwrap();
        assert_eq!(classify_context(&tree, 3, &cfg), Context::Plain);

        let mut q = the_dog_barks();
        q[3].form = "?".into();
        let tree = DependencyTree::new(q).unwrap();
        assert_eq!(classify_context(&tree, 2, &cfg), Context::Question);

        let joseph = joseph_pair();
        assert_eq!(joseph.source.token(8).form, "found");
        assert_eq!(classify_context(&joseph.source, 8, &cfg), Context::Plain);
    }

    #[test]
    fn dependent_clause_via_path() {
        let cfg = ExtractionConfig::default();
        // he said that she saw him
        let toks = vec![
            Token::new(1, "he", "PRON", 2, "nsubj"),
            Token::new(2, "said", "V", 0, "root"),
            Token::new(3, "that", "ADP", 5, "mark"),
            Token::new(4, "she", "PRON", 5, "nsubj"),
            Token::new(5, "saw", "V", 2, "ccomp"),
            Token::new(6, "him", "PRON", 5, "dobj"),
        ];
        let tree = DependencyTree::new(toks).unwrap();
        assert_eq!(classify_context(&tree, 5, &cfg), Context::DependentClause);
        assert_eq!(classify_context(&tree, 6, &cfg), Context::DependentClause);
        assert_eq!(classify_context(&tree, 2, &cfg), Context::Plain);
    }

    #[test]
    fn order_match_joseph_examples() {
        assert!(order_match(9, 8, 9, 8));
        assert!(order_match(11, 8, 11, 8));
        assert!(!order_match(6, 4, 5, 6));
    }

    #[test]
    fn joseph_pair_instances() {
        let cfg = ExtractionConfig::default();
        let p = joseph_pair();
        let dobj = select_instances_83a(&p, &cfg);
        assert_eq!(dobj.len(), 1);
        assert_eq!((dobj[0].src_head, dobj[0].src_dep, dobj[0].tgt_head, dobj[0].tgt_dep), (8, 9, 8, 9));

        let corpus = ParallelCorpus { language_code: "ger".into(), pairs: vec![p] };
        let v = build_text_vector(&"85A".into(), &corpus, &cfg).unwrap();
        let RawCounts::Context(c) = v.raw else { panic!() };
        assert_eq!(c.as_array(), [1, 1, 0, 0, 0, 0]);
        assert_eq!(v.normalized, vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.n_instances, 2);
    }

    #[test]
    fn empty_corpus_zero_vector() {
        let corpus = ParallelCorpus { language_code: "x".into(), pairs: vec![] };
        for r in crate::rules::ORDER_RULES {
            let v = build_text_vector(&r.into(), &corpus, &ExtractionConfig::default()).unwrap();
            assert_eq!(v.normalized, vec![0.0; 6]);
            assert_eq!(v.n_instances, 0);
        }
        assert!(build_text_vector(&"92A".into(), &corpus, &ExtractionConfig::default()).is_none());
    }

    #[test]
    fn adposition_and_poss_fixtures() {
        let cfg = ExtractionConfig::default();
        // he went to his house
        let toks = vec![
            Token::new(1, "he", "PRON", 2, "nsubj"),
            Token::new(2, "went", "V", 0, "root"),
            Token::new(3, "to", "ADP", 2, "adpmod"),
            Token::new(4, "his", "PRON", 5, "poss"),
            Token::new(5, "house", "N", 3, "adpobj"),
        ];
        // er ging Haus sein zu
        let p = pair(toks.clone(), &["er", "ging", "haus", "sein", "zu"], &[(1, 1), (2, 2), (3, 5), (4, 4), (5, 3)]);
        let adp = select_instances_85a(&p, &cfg);
        assert_eq!(adp.len(), 1);
        assert!(!order_match(adp[0].src_dep, adp[0].src_head, adp[0].tgt_dep, adp[0].tgt_head));
        let poss = select_instances_86a(&p, &cfg);
        assert_eq!(poss.len(), 1);
        assert!(!order_match(poss[0].src_dep, poss[0].src_head, poss[0].tgt_dep, poss[0].tgt_head));

        let unaligned = pair(toks.clone(), &["er", "ging", "haus", "sein"], &[(1, 1), (2, 2), (4, 4), (5, 3)]);
        assert!(select_instances_85a(&unaligned, &cfg).is_empty());
        assert_eq!(select_instances_86a(&unaligned, &cfg).len(), 1);
        let no_edges = pair(the_dog_barks(), &["a"], &[]);
        assert!(select_instances_85a(&no_edges, &cfg).is_empty());
        assert!(select_instances_86a(&no_edges, &cfg).is_empty());
    }

    #[test]
    fn demonstratives() {
        let cfg = ExtractionConfig::default();
        let toks = vec![
            Token::new(1, "This", "D", 2, "det"),
            Token::new(2, "dog", "NN", 3, "nsubj"),
            Token::new(3, "barks", "V", 0, "root"),
        ];
        let p = pair(toks, &["hund", "dies", "bellt"], &[(1, 2), (2, 1), (3, 3)]);
        let d = select_instances_88a(&p, &cfg);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].src_head, d[0].src_dep), (2, 1));

        // that he left: `that` attaches to a verb
        let toks = vec![
            Token::new(1, "I", "PRON", 2, "nsubj"),
            Token::new(2, "know", "V", 0, "root"),
            Token::new(3, "that", "D", 5, "det"),
            Token::new(4, "he", "PRON", 5, "nsubj"),
            Token::new(5, "left", "V", 2, "ccomp"),
        ];
        let p = pair(toks, &["a", "b", "c", "d", "e"], &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)]);
        assert!(select_instances_88a(&p, &cfg).is_empty());
    }

    #[test]
    fn passives() {
        let cfg = ExtractionConfig::default();
        let toks = vec![
            Token::new(1, "the", "D", 2, "det"),
            Token::new(2, "dog", "N", 4, "nsubjpass"),
            Token::new(3, "was", "AUX", 4, "auxpass"),
            Token::new(4, "seen", "V", 0, "root"),
        ];
        let p = pair(toks.clone(), &["gesehen", "hund"], &[(4, 1), (2, 2)]);
        let inst = select_instances_107a(&p, &cfg);
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].relation, Relation::NsubjPass);
        let p = pair(toks, &["gesehen", "hund", "x"], &[(4, 1), (2, 2), (2, 3)]);
        assert!(select_instances_107a(&p, &cfg).is_empty());
        let p = pair(the_dog_barks(), &["a", "b"], &[(2, 1), (3, 2)]);
        let inst = select_instances_107a(&p, &cfg);
        assert!(inst.iter().all(|i| i.relation == Relation::Nsubj));
        assert!(counted_instances("107A", &p, &cfg).unwrap().is_empty());
    }
}
