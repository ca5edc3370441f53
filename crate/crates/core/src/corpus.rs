//! Parsed source sentences, target sentences and word alignments, with
//! readers and writers for the CoNLL-X, plain-text and Pharaoh formats.
//!
//! All indices are 1-based internally. Pharaoh files are 0-based on disk and
//! shifted exactly once, in [`parse_alignments`] and [`format_alignments`].

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SOURCE_FILE: &str = "source.conll";
pub const TARGET_FILE: &str = "target.txt";
pub const ALIGNMENT_FILE: &str = "align.txt";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub upos: String,
    /// Index of the governing token, 0 for the artificial root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    pub fn new(index: usize, form: impl Into<String>, upos: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        Token { index, form: form.into(), upos: upos.into(), head, deprel: deprel.into() }
    }
}

/// A single-rooted, acyclic dependency tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyTree {
    tokens: Vec<Token>,
}

impl DependencyTree {
    /// Validates the token invariants and tree shape. The returned message
    /// describes the first violation found.
    pub fn new(tokens: Vec<Token>) -> std::result::Result<Self, String> {
        let len = tokens.len();
        let mut roots = 0;
        for (pos, tok) in tokens.iter().enumerate() {
            if tok.index != pos + 1 {
                return Err(format!("token {} has index {}", pos + 1, tok.index));
            }
            if tok.head == tok.index {
                return Err(format!("token {} is its own head", tok.index));
            }
            if tok.head > len {
                return Err(format!("token {} has head {} beyond sentence length {len}", tok.index, tok.head));
            }
            if tok.deprel.is_empty() {
                return Err(format!("token {} has an empty dependency label", tok.index));
            }
            if tok.head == 0 {
                roots += 1;
            }
        }
        if len > 0 && roots != 1 {
            return Err(format!("expected exactly one root, found {roots}"));
        }
        // Every walk towards the root must terminate within `len` steps.
        for tok in &tokens {
            let mut cur = tok.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > len {
                    return Err(format!("cycle through token {}", tok.index));
                }
                cur = tokens[cur - 1].head;
            }
        }
        Ok(DependencyTree { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    /// Indices from `index` up to (and including) the root token.
    pub fn path_to_root(&self, index: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = index;
        while cur != 0 {
            path.push(cur);
            cur = self.token(cur).head;
        }
        path
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AlignmentLink {
    pub src: usize,
    pub tgt: usize,
}

impl AlignmentLink {
    pub fn new(src: usize, tgt: usize) -> Self {
        AlignmentLink { src, tgt }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub source: DependencyTree,
    pub target_forms: Vec<String>,
    pub links: BTreeSet<AlignmentLink>,
}

impl SentencePair {
    /// Bundles one sentence pair; `ordinal` (1-based) is only used in errors.
    pub fn new(
        source: DependencyTree,
        target_forms: Vec<String>,
        links: BTreeSet<AlignmentLink>,
        ordinal: usize,
    ) -> Result<Self> {
        for link in &links {
            if link.src == 0 || link.tgt == 0 || link.src > source.len() || link.tgt > target_forms.len() {
                return Err(Error::LinkOutOfBounds {
                    sentence: ordinal,
                    src: link.src,
                    tgt: link.tgt,
                    src_len: source.len(),
                    tgt_len: target_forms.len(),
                });
            }
        }
        Ok(SentencePair { source, target_forms, links })
    }

    /// Target indices linked to source token `src`.
    pub fn targets_of(&self, src: usize) -> impl Iterator<Item = usize> + '_ {
        self.links.range(AlignmentLink::new(src, 0)..=AlignmentLink::new(src, usize::MAX)).map(|l| l.tgt)
    }

    /// Source indices linked to target token `tgt`.
    pub fn sources_of(&self, tgt: usize) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().filter(move |l| l.tgt == tgt).map(|l| l.src)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelCorpus {
    pub language_code: String,
    pub pairs: Vec<SentencePair>,
}

fn decode_utf8(bytes: Vec<u8>, context: &str) -> Result<String> {
    String::from_utf8(bytes).map_err(|e| {
        let valid = e.utf8_error().valid_up_to();
        let line = e.as_bytes()[..valid].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::parse(context, line, "invalid UTF-8")
    })
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_utf8(bytes, &path.display().to_string())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_index(field: &str, what: &str, context: &str, line: usize) -> Result<usize> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(context, line, format!("{what} `{field}` is not a non-negative integer")));
    }
    field.parse().map_err(|_| Error::parse(context, line, format!("{what} `{field}` out of range")))
}

/// Parses CoNLL-X text. Columns beyond DEPREL are ignored; the coarse POS
/// column is taken as the token's part of speech.
pub fn parse_conll(text: &str, context: &str) -> Result<Vec<DependencyTree>> {
    let mut trees = Vec::new();
    let mut block: Vec<Token> = Vec::new();

    let finish = |block: &mut Vec<Token>, trees: &mut Vec<DependencyTree>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let ordinal = trees.len() + 1;
        let tree = DependencyTree::new(std::mem::take(block)).map_err(|message| Error::Structure {
            context: context.to_string(),
            sentence: ordinal,
            message,
        })?;
        trees.push(tree);
        Ok(())
    };

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            finish(&mut block, &mut trees)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(Error::parse(
                context,
                lineno,
                format!("expected at least 8 tab-separated columns, found {}", cols.len()),
            ));
        }
        let index = parse_index(cols[0], "ID", context, lineno)?;
        let head = parse_index(cols[6], "HEAD", context, lineno)?;
        if index != block.len() + 1 {
            return Err(Error::parse(context, lineno, format!("ID {index} out of sequence, expected {}", block.len() + 1)));
        }
        let deprel = cols[7];
        if deprel.is_empty() {
            return Err(Error::parse(context, lineno, "empty DEPREL"));
        }
        block.push(Token::new(index, cols[1], cols[3], head, deprel));
    }
    finish(&mut block, &mut trees)?;
    Ok(trees)
}

pub fn format_conll(trees: &[DependencyTree]) -> String {
    let mut out = String::new();
    for tree in trees {
        for t in tree.tokens() {
            let _ = writeln!(out, "{}\t{}\t_\t{}\t{}\t_\t{}\t{}\t_\t_", t.index, t.form, t.upos, t.upos, t.head, t.deprel);
        }
        out.push('\n');
    }
    out
}

pub fn read_conll(path: impl AsRef<Path>) -> Result<Vec<DependencyTree>> {
    let path = path.as_ref();
    parse_conll(&read_text(path)?, &path.display().to_string())
}

pub fn write_conll(path: impl AsRef<Path>, trees: &[DependencyTree]) -> Result<()> {
    write_text(path.as_ref(), &format_conll(trees))
}

/// One sentence per line, tokens separated by whitespace.
pub fn parse_sentences(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split_whitespace().map(str::to_string).collect()).collect()
}

pub fn format_sentences(sentences: &[Vec<String>]) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_sentences(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    Ok(parse_sentences(&read_text(path.as_ref())?))
}

pub fn write_sentences(path: impl AsRef<Path>, sentences: &[Vec<String>]) -> Result<()> {
    write_text(path.as_ref(), &format_sentences(sentences))
}

/// Parses Pharaoh `i-j` lines (0-based on disk) into 1-based link sets.
pub fn parse_alignments(text: &str, context: &str) -> Result<Vec<BTreeSet<AlignmentLink>>> {
    text.lines()
        .enumerate()
        .map(|(lineno, line)| {
            line.split_whitespace()
                .map(|pair| {
                    let bad = || Error::parse(context, lineno + 1, format!("malformed link `{pair}`"));
                    let (i, j) = pair.split_once('-').ok_or_else(bad)?;
                    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
                    if !digits(i) || !digits(j) {
                        return Err(bad());
                    }
                    let i: usize = i.parse().map_err(|_| bad())?;
                    let j: usize = j.parse().map_err(|_| bad())?;
                    Ok(AlignmentLink::new(i + 1, j + 1))
                })
                .collect()
        })
        .collect()
}

pub fn format_alignments(alignments: &[BTreeSet<AlignmentLink>]) -> String {
    let mut out = String::new();
    for links in alignments {
        let line: Vec<String> = links.iter().map(|l| format!("{}-{}", l.src - 1, l.tgt - 1)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_alignments(path: impl AsRef<Path>) -> Result<Vec<BTreeSet<AlignmentLink>>> {
    let path = path.as_ref();
    parse_alignments(&read_text(path)?, &path.display().to_string())
}

pub fn write_alignments(path: impl AsRef<Path>, alignments: &[BTreeSet<AlignmentLink>]) -> Result<()> {
    write_text(path.as_ref(), &format_alignments(alignments))
}

pub fn zip_corpus(
    trees: Vec<DependencyTree>,
    target_sentences: Vec<Vec<String>>,
    alignments: Vec<BTreeSet<AlignmentLink>>,
    language_code: &str,
) -> Result<ParallelCorpus> {
    if language_code.is_empty() {
        return Err(Error::Config("empty language code".into()));
    }
    if trees.len() != target_sentences.len() || trees.len() != alignments.len() {
        return Err(Error::LengthMismatch { trees: trees.len(), targets: target_sentences.len(), alignments: alignments.len() });
    }
    let pairs = trees
        .into_iter()
        .zip(target_sentences)
        .zip(alignments)
        .enumerate()
        .map(|(i, ((tree, target), links))| SentencePair::new(tree, target, links, i + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParallelCorpus { language_code: language_code.to_string(), pairs })
}

/// Reads `<dir>/source.conll`, `target.txt` and `align.txt`.
pub fn read_corpus(dir: impl AsRef<Path>, language_code: &str) -> Result<ParallelCorpus> {
    let dir = dir.as_ref();
    let trees = read_conll(dir.join(SOURCE_FILE))?;
    let targets = read_sentences(dir.join(TARGET_FILE))?;
    let aligns = read_alignments(dir.join(ALIGNMENT_FILE))?;
    zip_corpus(trees, targets, aligns, language_code)
}

pub fn write_corpus(dir: impl AsRef<Path>, corpus: &ParallelCorpus) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let trees: Vec<DependencyTree> = corpus.pairs.iter().map(|p| p.source.clone()).collect();
    let targets: Vec<Vec<String>> = corpus.pairs.iter().map(|p| p.target_forms.clone()).collect();
    let aligns: Vec<BTreeSet<AlignmentLink>> = corpus.pairs.iter().map(|p| p.links.clone()).collect();
    write_conll(dir.join(SOURCE_FILE), &trees)?;
    write_sentences(dir.join(TARGET_FILE), &targets)?;
    write_alignments(dir.join(ALIGNMENT_FILE), &aligns)
}

/// Language subdirectories of a corpus directory, sorted by code.
pub fn corpus_languages(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut langs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() && path.join(SOURCE_FILE).exists() {
            langs.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    langs.sort();
    Ok(langs)
}
