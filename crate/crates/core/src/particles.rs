//! Polar question particles: split source questions into polar and
//! information questions, infer the target particle by a smoothed ratio of
//! relative frequencies, then count where it sits in polar questions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{ParallelCorpus, SentencePair};
use crate::extraction::{is_question, ExtractionConfig};

pub const WH_WORDS: [&str; 9] = ["who", "whom", "whose", "what", "which", "when", "where", "why", "how"];

#[derive(Clone, Debug, Default)]
pub struct QuestionSplit<'a> {
    pub polar: Vec<&'a SentencePair>,
    pub information: Vec<&'a SentencePair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleVector {
    pub particle: Option<String>,
    /// (initial, second, final, elsewhere)
    pub counts: [u64; 4],
    pub normalized: [f64; 4],
}

/// A form with no letter or digit.
pub fn is_punctuation(form: &str) -> bool {
    !form.chars().any(char::is_alphanumeric)
}

pub fn split_questions(corpus: &ParallelCorpus) -> QuestionSplit<'_> {
    let mut split = QuestionSplit::default();
    for pair in corpus.pairs.iter().filter(|p| is_question(&p.source)) {
        let has_wh = pair.source.tokens().iter().any(|t| WH_WORDS.contains(&t.form.to_lowercase().as_str()));
        if has_wh {
            split.information.push(pair);
        } else {
            split.polar.push(pair);
        }
    }
    split
}

#[derive(Clone, Copy, Debug, Default)]
struct TypeCounts {
    polar: u64,
    information: u64,
}

/// Smoothed ratio score of a candidate word.
pub fn particle_score(c_pol: u64, c_inf: u64, n_pol: u64, n_inf: u64, vocab: usize, alpha: f64) -> f64 {
    let av = alpha * vocab as f64;
    ((c_pol as f64 + alpha) / (n_pol as f64 + av)) / ((c_inf as f64 + alpha) / (n_inf as f64 + av))
}

pub fn infer_particle(split: &QuestionSplit<'_>, config: &ExtractionConfig) -> Option<String> {
    let mut types: BTreeMap<&str, TypeCounts> = BTreeMap::new();
    for p in &split.polar {
        for f in &p.target_forms {
            types.entry(f).or_default().polar += 1;
        }
    }
    for p in &split.information {
        for f in &p.target_forms {
            types.entry(f).or_default().information += 1;
        }
    }
    let alpha = config.alpha;
    // The split totals and vocabulary size are shared by every candidate, so
    // comparing (c_pol + a)(c_inf' + a) against (c_pol' + a)(c_inf + a)
    // orders candidates exactly as `particle_score` does, without rounding
    // ties apart.
    let cmp = |a: &TypeCounts, b: &TypeCounts| -> Ordering {
        let lhs = (a.polar as f64 + alpha) * (b.information as f64 + alpha);
        let rhs = (b.polar as f64 + alpha) * (a.information as f64 + alpha);
        lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal)
    };
    types
        .iter()
        .filter(|(w, c)| c.polar >= config.min_freq && !is_punctuation(w))
        // BTreeMap iterates lexicographically, so on a full tie the earlier
        // word is kept.
        .fold(None::<(&str, TypeCounts)>, |best, (w, c)| match best {
            None => Some((w, *c)),
            Some((bw, bc)) => match cmp(c, &bc).then(c.polar.cmp(&bc.polar)) {
                Ordering::Greater => Some((w, *c)),
                _ => Some((bw, bc)),
            },
        })
        .map(|(w, _)| w.to_string())
}

/// Position class of `particle` in a target sentence, ignoring punctuation:
/// 0 initial, 1 second, 2 final, 3 elsewhere.
pub fn particle_position(forms: &[String], particle: &str) -> Option<usize> {
    let words: Vec<&String> = forms.iter().filter(|f| !is_punctuation(f)).collect();
    let at = words.iter().position(|w| w.as_str() == particle)? + 1;
    Some(if at == 1 {
        0
    } else if at == words.len() {
        2
    } else if at == 2 {
        1
    } else {
        3
    })
}

pub fn build_92a_vector(corpus: &ParallelCorpus, config: &ExtractionConfig) -> ParticleVector {
    let split = split_questions(corpus);
    let particle = infer_particle(&split, config);
    let mut counts = [0u64; 4];
    if let Some(p) = &particle {
        for pair in &split.polar {
            if let Some(pos) = particle_position(&pair.target_forms, p) {
                counts[pos] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    let mut normalized = [0.0; 4];
    if total > 0 {
        for (n, c) in normalized.iter_mut().zip(counts) {
            *n = c as f64 / total as f64;
        }
    }
    ParticleVector { particle, counts, normalized }
}
