//! Seeded synthetic languages with known typology.
//!
//! Source sentences come from a small set of English templates with gold
//! parses. Each target sentence reorders the source according to the
//! language profile, drops articles and auxiliaries, and translates the
//! remaining words through a per-language pseudo-word dictionary. Every
//! kept word is aligned one-to-one, so projection keeps every instance.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded from the benchmark seed
//! and a SHA-256 digest of the language code.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{write_corpus, AlignmentLink, DependencyTree, ParallelCorpus, SentencePair, Token};
use crate::error::{Error, Result};
use crate::rules::{ClassCode, RuleId, STUDY_RULES};
use crate::wals::{builtin_rule_defs, write_wals_csv, LanguageRecord, WalsDatabase};

pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.3)";
pub const MANIFEST_FILE: &str = "MANIFEST.sha256";
pub const METADATA_FILE: &str = "benchmark.json";
pub const WALS_FILE: &str = "wals.csv";
pub const RULES_FILE: &str = "rules.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectOrder {
    Ov,
    Vo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdpositionOrder {
    Pre,
    Post,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenitiveOrder {
    GenNoun,
    NounGen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemonstrativeOrder {
    DemNoun,
    NounDem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParticlePosition {
    Initial,
    Second,
    Final,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassiveType {
    Passive,
    NoPassive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypologicalProfile {
    pub v83a: ObjectOrder,
    pub v85a: AdpositionOrder,
    pub v86a: GenitiveOrder,
    pub v88a: DemonstrativeOrder,
    pub v92a: ParticlePosition,
    pub v107a: PassiveType,
    /// Probability that a single head-dependent order is flipped.
    pub noise: f64,
}

impl TypologicalProfile {
    /// WALS class code this profile carries for `rule`.
    pub fn code(&self, rule: &str) -> Option<ClassCode> {
        Some(match rule {
            "83A" => match self.v83a {
                ObjectOrder::Ov => 1,
                ObjectOrder::Vo => 2,
            },
            "85A" => match self.v85a {
                AdpositionOrder::Post => 1,
                AdpositionOrder::Pre => 2,
            },
            "86A" => match self.v86a {
                GenitiveOrder::GenNoun => 1,
                GenitiveOrder::NounGen => 2,
            },
            "88A" => match self.v88a {
                DemonstrativeOrder::DemNoun => 1,
                DemonstrativeOrder::NounDem => 2,
            },
            "92A" => match self.v92a {
                ParticlePosition::Initial => 1,
                ParticlePosition::Final => 2,
                ParticlePosition::Second => 3,
                ParticlePosition::None => 6,
            },
            "107A" => match self.v107a {
                PassiveType::Passive => 1,
                PassiveType::NoPassive => 2,
            },
            _ => return None,
        })
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLanguage {
    pub code: String,
    pub genus: String,
    pub family: String,
    pub profile: TypologicalProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub languages: Vec<SyntheticLanguage>,
    pub sentences_per_language: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sentences_per_language == 0 {
            return Err(Error::Config("sentences_per_language must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        for l in &self.languages {
            if l.code.is_empty() || !seen.insert(l.code.as_str()) {
                return Err(Error::Config(format!("duplicate or empty language code `{}`", l.code)));
            }
            if !(0.0..0.5).contains(&l.profile.noise) {
                return Err(Error::Config(format!("noise {} for `{}` outside [0, 0.5)", l.profile.noise, l.code)));
            }
        }
        Ok(())
    }

    /// Same spec with every profile's noise set to `noise`.
    pub fn with_noise(mut self, noise: f64) -> Self {
        for l in &mut self.languages {
            l.profile.noise = noise;
        }
        self
    }
}

/// The four genus profiles of the default benchmark.
pub fn benchmark_profiles() -> [TypologicalProfile; 4] {
    use AdpositionOrder::*;
    use DemonstrativeOrder::*;
    use GenitiveOrder::*;
    use ObjectOrder::*;
    use PassiveType::*;
    let p = |v83a, v85a, v86a, v88a, v92a, v107a| TypologicalProfile { v83a, v85a, v86a, v88a, v92a, v107a, noise: 0.0 };
    [
        p(Ov, Post, GenNoun, DemNoun, ParticlePosition::Final, Passive),
        p(Vo, Pre, NounGen, NounDem, ParticlePosition::Initial, NoPassive),
        p(Ov, Pre, NounGen, DemNoun, ParticlePosition::Second, NoPassive),
        p(Vo, Post, GenNoun, NounDem, ParticlePosition::None, Passive),
    ]
}

/// 20 languages in four genus-pure groups of five, two families, 200
/// sentences each, seed 42.
pub fn default_benchmark() -> SyntheticSpec {
    let genera = ["GenusA", "GenusB", "GenusC", "GenusD"];
    let families = ["FamilyX", "FamilyX", "FamilyY", "FamilyY"];
    let profiles = benchmark_profiles();
    let languages = (0..20)
        .map(|i| SyntheticLanguage {
            code: format!("s{:02}", i + 1),
            genus: genera[i / 5].into(),
            family: families[i / 5].into(),
            profile: profiles[i / 5],
        })
        .collect();
    SyntheticSpec { languages, sentences_per_language: 200, seed: 42 }
}

const NOUNS: [&str; 24] = [
    "man", "woman", "king", "city", "house", "field", "son", "daughter", "river", "stone", "bread", "servant", "sheep", "sword",
    "boat", "door", "gate", "mountain", "tree", "letter", "horse", "child", "queen", "temple",
];
const TRANSITIVE: [&str; 8] = ["saw", "found", "took", "built", "sent", "heard", "killed", "followed"];
const PARTICIPLES: [&str; 6] = ["taken", "built", "sent", "heard", "killed", "followed"];
const MOTION: [&str; 5] = ["went", "came", "ran", "lived", "sat"];
const INTRANSITIVE: [&str; 4] = ["left", "slept", "wept", "returned"];
const ADPOSITIONS: [&str; 6] = ["to", "in", "from", "with", "near", "at"];
const POSSESSORS: [&str; 5] = ["his", "her", "their", "my", "your"];
const DEMONSTRATIVES: [&str; 4] = ["this", "that", "these", "those"];
const WH: [&str; 3] = ["where", "when", "why"];
const OTHER: [&str; 5] = ["said", "that", "because", "see", "."];
const DROPPED: [&str; 3] = ["the", "did", "was"];

fn lexicon() -> BTreeSet<&'static str> {
    NOUNS
        .iter()
        .chain(&TRANSITIVE)
        .chain(&PARTICIPLES)
        .chain(&MOTION)
        .chain(&INTRANSITIVE)
        .chain(&ADPOSITIONS)
        .chain(&POSSESSORS)
        .chain(&DEMONSTRATIVES)
        .chain(&WH)
        .chain(&OTHER)
        .copied()
        .filter(|w| w.chars().all(char::is_alphabetic))
        .collect()
}

/// Target-language vocabulary: one distinct pseudo-word per English word,
/// plus the polar question particle.
struct Dictionary {
    words: BTreeMap<&'static str, String>,
    particle: String,
}

impl Dictionary {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        const ONSETS: &[u8] = b"ptkbdgmnslrfvhz";
        const VOWELS: &[u8] = b"aeiou";
        let mut used = BTreeSet::new();
        let mut fresh = |rng: &mut ChaCha8Rng| loop {
            let syllables = rng.gen_range(2..=3);
            let w: String = (0..syllables)
                .flat_map(|_| [*ONSETS.choose(rng).unwrap() as char, *VOWELS.choose(rng).unwrap() as char])
                .collect();
            if used.insert(w.clone()) {
                break w;
            }
        };
        let words = lexicon().into_iter().map(|w| (w, fresh(rng))).collect();
        let particle = fresh(rng);
        Dictionary { words, particle }
    }

    fn translate(&self, form: &str) -> String {
        self.words.get(form).cloned().unwrap_or_else(|| form.to_string())
    }
}

/// Target-side order over source token indices.
#[derive(Clone, Debug)]
enum Phr {
    Tok(usize),
    Seq(Vec<Phr>),
}

impl Phr {
    fn flatten(&self, out: &mut Vec<usize>) {
        match self {
            Phr::Tok(i) => out.push(*i),
            Phr::Seq(v) => v.iter().for_each(|p| p.flatten(out)),
        }
    }
}

#[derive(Clone, Copy)]
enum NpKind {
    Bare,
    Poss,
    Dem,
}

struct Np {
    head: usize,
    phr: Phr,
}

struct Generator<'a> {
    profile: &'a TypologicalProfile,
    content: ChaCha8Rng,
    noise: ChaCha8Rng,
    toks: Vec<(String, &'static str, usize, &'static str)>,
}

impl<'a> Generator<'a> {
    fn push(&mut self, form: &str, upos: &'static str) -> usize {
        self.toks.push((form.to_string(), upos, 0, "ROOT"));
        self.toks.len()
    }

    fn attach(&mut self, dep: usize, head: usize, label: &'static str) {
        let t = &mut self.toks[dep - 1];
        t.2 = head;
        t.3 = label;
    }

    fn pick(&mut self, words: &[&'static str]) -> &'static str {
        words.choose(&mut self.content).unwrap()
    }

    /// `dep` before `head` iff `dep_first`, unless noise flips it.
    fn order(&mut self, head: Phr, dep: Phr, dep_first: bool) -> Phr {
        let flip = self.profile.noise > 0.0 && self.noise.gen_bool(self.profile.noise);
        if dep_first != flip {
            Phr::Seq(vec![dep, head])
        } else {
            Phr::Seq(vec![head, dep])
        }
    }

    fn noun_kind(&mut self) -> NpKind {
        match self.content.gen_range(0..3) {
            0 => NpKind::Bare,
            1 => NpKind::Poss,
            _ => NpKind::Dem,
        }
    }

    /// Noun phrase with a fresh noun. Heads are attached by the caller.
    fn np(&mut self, kind: NpKind) -> Np {
        let noun = self.pick(&NOUNS);
        self.np_with(kind, noun)
    }

    fn np_with(&mut self, kind: NpKind, noun: &str) -> Np {
        match kind {
            NpKind::Bare => {
                let det = self.push("the", "DET");
                let n = self.push(noun, "NOUN");
                self.attach(det, n, "det");
                Np { head: n, phr: Phr::Tok(n) }
            }
            NpKind::Poss => {
                let possessor = self.pick(&POSSESSORS);
                let p = self.push(possessor, "PRON");
                let n = self.push(noun, "NOUN");
                self.attach(p, n, "poss");
                let gen_first = self.profile.v86a == GenitiveOrder::GenNoun;
                let phr = self.order(Phr::Tok(n), Phr::Tok(p), gen_first);
                Np { head: n, phr }
            }
            NpKind::Dem => {
                let dem = self.pick(&DEMONSTRATIVES);
                let d = self.push(dem, "DET");
                let n = self.push(noun, "NOUN");
                self.attach(d, n, "det");
                let dem_first = self.profile.v88a == DemonstrativeOrder::DemNoun;
                let phr = self.order(Phr::Tok(n), Phr::Tok(d), dem_first);
                Np { head: n, phr }
            }
        }
    }

    /// Adpositional phrase attached to `head` via `adpmod`.
    fn pp(&mut self, head: usize) -> Phr {
        let adp = self.pick(&ADPOSITIONS);
        let a = self.push(adp, "ADP");
        self.attach(a, head, "adpmod");
        let kind = self.noun_kind();
        let obj = self.np(kind);
        self.attach(obj.head, a, "adpobj");
        let post = self.profile.v85a == AdpositionOrder::Post;
        self.order(Phr::Tok(a), obj.phr, post)
    }

    /// Subject, verb phrase, then obliques and clausal complements on the
    /// side of the verb dictated by the object order.
    fn clause(&mut self, subj: Phr, verb: usize, obj: Option<Phr>, rest: Vec<Phr>) -> Phr {
        let ov = self.profile.v83a == ObjectOrder::Ov;
        let vp = match obj {
            Some(o) => self.order(Phr::Tok(verb), o, ov),
            None => Phr::Tok(verb),
        };
        let mut seq = vec![subj];
        if ov {
            seq.extend(rest);
            seq.push(vp);
        } else {
            seq.push(vp);
            seq.extend(rest);
        }
        Phr::Seq(seq)
    }

    /// "NP V NP (PP)" with the verb attached to `parent` under `label`.
    fn transitive(&mut self, verb_form: &str, with_pp: bool) -> (usize, Phr) {
        let kind = self.noun_kind();
        let subj = self.np(kind);
        let v = self.push(verb_form, "VERB");
        self.attach(subj.head, v, "nsubj");
        let kind = self.noun_kind();
        let obj = self.np(kind);
        self.attach(obj.head, v, "dobj");
        let rest = if with_pp { vec![self.pp(v)] } else { vec![] };
        let phr = self.clause(subj.phr, v, Some(obj.phr), rest);
        (v, phr)
    }

    fn full_stop(&mut self, root: usize) -> Phr {
        let p = self.push(".", ".");
        self.attach(p, root, "punct");
        Phr::Tok(p)
    }

    fn declarative(&mut self, template: usize) -> Phr {
        match template {
            0 => {
                let verb = self.pick(&TRANSITIVE);
                let (v, c) = self.transitive(verb, false);
                let stop = self.full_stop(v);
                Phr::Seq(vec![c, stop])
            }
            1 => {
                let verb = self.pick(&TRANSITIVE);
                let (v, c) = self.transitive(verb, true);
                let stop = self.full_stop(v);
                Phr::Seq(vec![c, stop])
            }
            2 => {
                let kind = self.noun_kind();
                let subj = self.np(kind);
                let verb = self.pick(&MOTION);
                let v = self.push(verb, "VERB");
                self.attach(subj.head, v, "nsubj");
                let pp = self.pp(v);
                let c = self.clause(subj.phr, v, None, vec![pp]);
                let stop = self.full_stop(v);
                Phr::Seq(vec![c, stop])
            }
            3 => {
                let subj = self.np(NpKind::Poss);
                let verb = self.pick(&TRANSITIVE);
                let v = self.push(verb, "VERB");
                self.attach(subj.head, v, "nsubj");
                let obj = self.np(NpKind::Dem);
                self.attach(obj.head, v, "dobj");
                let c = self.clause(subj.phr, v, Some(obj.phr), vec![]);
                let stop = self.full_stop(v);
                Phr::Seq(vec![c, stop])
            }
            4 => {
                let subj = self.np(NpKind::Dem);
                let verb = self.pick(&TRANSITIVE);
                let v = self.push(verb, "VERB");
                self.attach(subj.head, v, "nsubj");
                let obj = self.np(NpKind::Poss);
                self.attach(obj.head, v, "dobj");
                let c = self.clause(subj.phr, v, Some(obj.phr), vec![]);
                let stop = self.full_stop(v);
                Phr::Seq(vec![c, stop])
            }
            5 | 6 => {
                // the N was taken (PP) .
                let kind = self.noun_kind();
                let subj = self.np(kind);
                let aux = self.push("was", "VERB");
                let participle = self.pick(&PARTICIPLES);
                let v = self.push(participle, "VERB");
                self.attach(subj.head, v, "nsubjpass");
                self.attach(aux, v, "auxpass");
                let passive = self.profile.v107a == PassiveType::Passive;
                let core = self.order(Phr::Tok(v), subj.phr, passive);
                let rest = if template == 6 { vec![self.pp(v)] } else { vec![] };
                let ov = self.profile.v83a == ObjectOrder::Ov;
                let mut seq = Vec::new();
                if ov {
                    seq.extend(rest);
                    seq.push(core);
                } else {
                    seq.push(core);
                    seq.extend(rest);
                }
                let stop = self.full_stop(v);
                seq.push(stop);
                Phr::Seq(seq)
            }
            7 => {
                // NP said that NP V NP .
                let kind = self.noun_kind();
                let subj = self.np(kind);
                let said = self.push("said", "VERB");
                self.attach(subj.head, said, "nsubj");
                let mark = self.push("that", "ADP");
                let verb = self.pick(&TRANSITIVE);
                let (v, inner) = self.transitive(verb, false);
                self.attach(mark, v, "mark");
                self.attach(v, said, "ccomp");
                let comp = Phr::Seq(vec![Phr::Tok(mark), inner]);
                let c = self.clause(subj.phr, said, None, vec![comp]);
                let stop = self.full_stop(said);
                Phr::Seq(vec![c, stop])
            }
            8 => {
                // NP V-intr because NP V NP (PP) .
                let kind = self.noun_kind();
                let subj = self.np(kind);
                let verb = self.pick(&INTRANSITIVE);
                let main = self.push(verb, "VERB");
                self.attach(subj.head, main, "nsubj");
                let mark = self.push("because", "ADP");
                let verb = self.pick(&TRANSITIVE);
                let with_pp = self.content.gen_bool(0.5);
                let (v, inner) = self.transitive(verb, with_pp);
                self.attach(mark, v, "mark");
                self.attach(v, main, "advcl");
                let adv = Phr::Seq(vec![Phr::Tok(mark), inner]);
                let c = self.clause(subj.phr, main, None, vec![adv]);
                let stop = self.full_stop(main);
                Phr::Seq(vec![c, stop])
            }
            _ => {
                // NP V-motion PP because NP was taken .
                let kind = self.noun_kind();
                let subj = self.np(kind);
                let verb = self.pick(&MOTION);
                let main = self.push(verb, "VERB");
                self.attach(subj.head, main, "nsubj");
                let pp = self.pp(main);
                let mark = self.push("because", "ADP");
                let kind = self.noun_kind();
                let psubj = self.np(kind);
                let aux = self.push("was", "VERB");
                let participle = self.pick(&PARTICIPLES);
                let v = self.push(participle, "VERB");
                self.attach(psubj.head, v, "nsubjpass");
                self.attach(aux, v, "auxpass");
                self.attach(mark, v, "mark");
                self.attach(v, main, "advcl");
                let passive = self.profile.v107a == PassiveType::Passive;
                let core = self.order(Phr::Tok(v), psubj.phr, passive);
                let adv = Phr::Seq(vec![Phr::Tok(mark), core]);
                let c = self.clause(subj.phr, main, None, vec![pp, adv]);
                let stop = self.full_stop(main);
                Phr::Seq(vec![c, stop])
            }
        }
    }

    /// "(wh) did POSS N see the N ?" with fixed nouns.
    fn question(&mut self, wh: Option<&str>, possessor_noun: &str, possessor: &str, object_noun: &str) -> Phr {
        let w = wh.map(|w| self.push(w, "ADV"));
        let did = self.push("did", "VERB");
        let p = self.push(possessor, "PRON");
        let n = self.push(possessor_noun, "NOUN");
        let see = self.push("see", "VERB");
        let obj = self.np_with(NpKind::Bare, object_noun);
        let q = self.push("?", ".");
        self.attach(did, see, "aux");
        self.attach(p, n, "poss");
        self.attach(n, see, "nsubj");
        self.attach(obj.head, see, "dobj");
        self.attach(q, see, "punct");
        if let Some(w) = w {
            self.attach(w, see, "advmod");
        }
        let gen_first = self.profile.v86a == GenitiveOrder::GenNoun;
        let subj = self.order(Phr::Tok(n), Phr::Tok(p), gen_first);
        let c = self.clause(subj, see, Some(obj.phr), vec![]);
        let mut seq = Vec::new();
        if let Some(w) = w {
            seq.push(Phr::Tok(w));
        }
        seq.push(c);
        seq.push(Phr::Tok(q));
        Phr::Seq(seq)
    }

    fn finish(&mut self, phr: Phr, dict: &Dictionary, particle: bool, ordinal: usize) -> Result<SentencePair> {
        let toks = std::mem::take(&mut self.toks);
        let mut order = Vec::new();
        phr.flatten(&mut order);
        let mut target: Vec<(Option<usize>, String)> = order
            .into_iter()
            .filter(|&i| !DROPPED.contains(&toks[i - 1].0.as_str()))
            .map(|i| (Some(i), dict.translate(&toks[i - 1].0)))
            .collect();
        if particle {
            let words = target.iter().filter(|(_, f)| f != "?" && f != ".").count();
            let at = match self.profile.v92a {
                ParticlePosition::Initial => Some(0),
                ParticlePosition::Second => Some(1.min(words)),
                ParticlePosition::Final => Some(words),
                ParticlePosition::None => None,
            };
            if let Some(at) = at {
                target.insert(at, (None, dict.particle.clone()));
            }
        }
        let tokens = toks
            .into_iter()
            .enumerate()
            .map(|(i, (form, upos, head, deprel))| Token::new(i + 1, &form, upos, head, deprel))
            .collect();
        let tree = DependencyTree::new(tokens).map_err(|m| Error::Invariant(format!("generated tree: {m}")))?;
        let links = target.iter().enumerate().filter_map(|(j, (src, _))| src.map(|s| AlignmentLink::new(s, j + 1))).collect();
        let forms = target.into_iter().map(|(_, f)| f).collect();
        SentencePair::new(tree, forms, links, ordinal)
    }
}

/// Number of declarative templates; one more slot draws a question pair.
const DECLARATIVE_TEMPLATES: usize = 10;

fn language_seed(seed: u64, code: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(code.as_bytes());
    h.finalize().into()
}

/// Corpus for one language. Question pairs (polar then information, same
/// words) are never split, so the last sentence is always declarative if
/// only one slot remains.
pub fn generate_corpus(lang: &SyntheticLanguage, sentences: usize, seed: u64) -> Result<ParallelCorpus> {
    let base = language_seed(seed, &lang.code);
    let mut content = ChaCha8Rng::from_seed(base);
    let mut noise_seed = base;
    noise_seed[0] ^= 0x5a;
    let mut dict_seed = base;
    dict_seed[0] ^= 0xa5;
    let dict = Dictionary::new(&mut ChaCha8Rng::from_seed(dict_seed));
    let mut g = Generator {
        profile: &lang.profile,
        content: ChaCha8Rng::from_seed(base),
        noise: ChaCha8Rng::from_seed(noise_seed),
        toks: Vec::new(),
    };
    let mut pairs = Vec::with_capacity(sentences);
    while pairs.len() < sentences {
        let slots = if sentences - pairs.len() >= 2 { DECLARATIVE_TEMPLATES + 1 } else { DECLARATIVE_TEMPLATES };
        let t = content.gen_range(0..slots);
        g.content = ChaCha8Rng::from_seed(content.gen());
        if t < DECLARATIVE_TEMPLATES {
            let phr = g.declarative(t);
            pairs.push(g.finish(phr, &dict, false, pairs.len() + 1)?);
        } else {
            let subj = g.pick(&NOUNS);
            let obj = loop {
                let o = g.pick(&NOUNS);
                if o != subj {
                    break o;
                }
            };
            let possessor = g.pick(&POSSESSORS);
            let wh = g.pick(&WH);
            let polar = g.question(None, subj, possessor, obj);
            pairs.push(g.finish(polar, &dict, true, pairs.len() + 1)?);
            let info = g.question(Some(wh), subj, possessor, obj);
            pairs.push(g.finish(info, &dict, false, pairs.len() + 1)?);
        }
    }
    Ok(ParallelCorpus { language_code: lang.code.clone(), pairs })
}

/// The planted polar question particle of `lang`, if its profile has one.
pub fn planted_particle(lang: &SyntheticLanguage, seed: u64) -> Option<String> {
    if lang.profile.v92a == ParticlePosition::None {
        return None;
    }
    let mut dict_seed = language_seed(seed, &lang.code);
    dict_seed[0] ^= 0xa5;
    Some(Dictionary::new(&mut ChaCha8Rng::from_seed(dict_seed)).particle)
}

pub fn wals_records(spec: &SyntheticSpec) -> Result<WalsDatabase> {
    let columns: Vec<RuleId> = STUDY_RULES.iter().map(|r| RuleId::from(*r)).collect();
    let languages = spec
        .languages
        .iter()
        .map(|l| LanguageRecord {
            wals_code: l.code.clone(),
            name: format!("Synthetic {}", l.code),
            genus: l.genus.clone(),
            family: l.family.clone(),
            rule_values: columns.iter().map(|r| (r.clone(), l.profile.code(r.as_str()).expect("study rule"))).collect(),
        })
        .collect();
    WalsDatabase::new(builtin_rule_defs(), columns, languages)
}

pub fn generate(spec: &SyntheticSpec) -> Result<(WalsDatabase, BTreeMap<String, ParallelCorpus>)> {
    spec.validate()?;
    let db = wals_records(spec)?;
    let corpora = spec
        .languages
        .par_iter()
        .map(|l| generate_corpus(l, spec.sentences_per_language, spec.seed).map(|c| (l.code.clone(), c)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok((db, corpora))
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    prng: &'static str,
    spec: &'a SyntheticSpec,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn relative_files(dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else if path.file_name().is_some_and(|n| n != MANIFEST_FILE) {
                out.push(path.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}

fn manifest_name(p: &Path) -> String {
    p.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect::<Vec<_>>().join("/")
}

/// Writes `<dir>/<code>/` corpora, `wals.csv`, `rules.csv`, a JSON metadata
/// file and a SHA-256 manifest over all of them.
pub fn write_benchmark(spec: &SyntheticSpec, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let (db, corpora) = generate(spec)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (code, corpus) in &corpora {
        write_corpus(dir.join(code), corpus)?;
    }
    write_wals_csv(&db, dir.join(WALS_FILE), dir.join(RULES_FILE))?;
    let meta = Metadata { tool: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION"), prng: PRNG_NAME, spec };
    let meta_path = dir.join(METADATA_FILE);
    let json = serde_json::to_string_pretty(&meta).expect("serializable") + "\n";
    fs::write(&meta_path, json).map_err(|e| Error::io(&meta_path, e))?;
    let mut manifest = String::new();
    for rel in relative_files(dir)? {
        let path = dir.join(&rel);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!("{}  {}\n", sha256_hex(&bytes), manifest_name(&rel)));
    }
    let mpath = dir.join(MANIFEST_FILE);
    fs::write(&mpath, manifest).map_err(|e| Error::io(&mpath, e))
}

/// Files whose contents no longer match the manifest, plus files missing
/// from either side. Empty when the directory is intact.
pub fn verify_manifest(dir: impl AsRef<Path>) -> Result<Vec<String>> {
    let dir = dir.as_ref();
    let mpath = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let mut expected = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let (hash, name) =
            line.split_once("  ").ok_or_else(|| Error::parse(MANIFEST_FILE, i + 1, "expected `<sha256>  <path>`"))?;
        expected.insert(name.to_string(), hash.to_string());
    }
    let mut bad = Vec::new();
    let mut present = BTreeSet::new();
    for rel in relative_files(dir)? {
        let name = manifest_name(&rel);
        let path = dir.join(&rel);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        match expected.get(&name) {
            Some(h) if *h == sha256_hex(&bytes) => {}
            _ => bad.push(name.clone()),
        }
        present.insert(name);
    }
    bad.extend(expected.keys().filter(|k| !present.contains(*k)).cloned());
    bad.sort();
    Ok(bad)
}
