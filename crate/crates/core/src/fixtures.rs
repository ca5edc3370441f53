//! Small hand-built corpora used by examples and tests.

use std::collections::BTreeSet;

use crate::corpus::{AlignmentLink, DependencyTree, SentencePair, Token};

/// Builds a sentence pair from `(form, upos, head, deprel)` rows, target
/// forms and 1-based links. Panics on invalid input.
pub fn build_pair(source: &[(&str, &str, usize, &str)], target: &[&str], links: &[(usize, usize)]) -> SentencePair {
    let tokens =
        source.iter().enumerate().map(|(i, &(form, upos, head, deprel))| Token::new(i + 1, form, upos, head, deprel)).collect();
    let tree = DependencyTree::new(tokens).expect("valid fixture tree");
    let links: BTreeSet<AlignmentLink> = links.iter().map(|&(s, t)| AlignmentLink::new(s, t)).collect();
    SentencePair::new(tree, target.iter().map(|s| s.to_string()).collect(), links, 1).expect("valid fixture links")
}

/// "So Joseph went after his brothers and found them at Dothan" aligned to
/// "Da ging Joseph seinen Brüdern nach und fand sie zu Dothan".
///
/// `brothers` is attached to the adposition `after` as its `adpobj`.
pub fn joseph_pair() -> SentencePair {
    build_pair(
        &[
            ("So", "ADV", 3, "advmod"),
            ("Joseph", "NOUN", 3, "nsubj"),
            ("went", "VERB", 0, "ROOT"),
            ("after", "ADP", 3, "adpmod"),
            ("his", "PRON", 6, "poss"),
            ("brothers", "NOUN", 4, "adpobj"),
            ("and", "CONJ", 3, "cc"),
            ("found", "VERB", 3, "conj"),
            ("them", "PRON", 8, "dobj"),
            ("at", "ADP", 8, "adpmod"),
            ("Dothan", "NOUN", 10, "adpobj"),
        ],
        &["Da", "ging", "Joseph", "seinen", "Brüdern", "nach", "und", "fand", "sie", "zu", "Dothan"],
        &[(1, 1), (2, 3), (3, 2), (4, 6), (5, 4), (6, 5), (7, 7), (8, 8), (9, 9), (10, 10), (11, 11)],
    )
}
