//! Predicting WALS typological rule values from word-aligned parallel text.
//!
//! The pipeline reads a dependency-parsed source side, a tokenized target
//! side and word alignments per language, projects selected dependencies
//! through exclusive alignments, and turns agreement counts into feature
//! vectors. Those vectors, optionally joined with the WALS values of other
//! rules and with genealogy, feed simple classifiers evaluated by
//! leave-one-out cross-validation.

pub mod classifiers;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod features;
pub mod fixtures;
pub mod particles;
pub mod rules;
pub mod synthetic;
pub mod wals;

pub use error::{Error, Result};
pub use rules::{ClassCode, RuleId};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
