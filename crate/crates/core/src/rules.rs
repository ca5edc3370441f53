//! Rule identifiers and the built-in inventory of the six studied rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A WALS feature identifier such as `83A`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleId(String);

impl RuleId {
    pub fn new(id: impl Into<String>) -> Self {
        RuleId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for RuleId {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(RuleId(s.trim().to_string()))
    }
}

impl From<&str> for RuleId {
    fn from(s: &str) -> Self {
        RuleId(s.to_string())
    }
}

/// Class code of a rule value. Codes run from 1 to the domain size.
pub type ClassCode = u8;

/// The six rules handled by the text extractors, in canonical order.
pub const STUDY_RULES: [&str; 6] = ["83A", "85A", "86A", "88A", "92A", "107A"];

/// Rules whose text vector is built from projected dependency orders.
pub const ORDER_RULES: [&str; 5] = ["83A", "85A", "86A", "88A", "107A"];

pub fn study_rules() -> Vec<RuleId> {
    STUDY_RULES.iter().map(|r| RuleId::from(*r)).collect()
}

/// Human-readable rule name for the built-in rules.
pub fn known_rule_name(id: &str) -> Option<&'static str> {
    Some(match id {
        "83A" => "Order of Object and Verb",
        "85A" => "Order of Adposition and Noun Phrase",
        "86A" => "Order of Genitive and Noun",
        "88A" => "Order of Demonstrative and Noun",
        "92A" => "Position of Polar Question Particles",
        "107A" => "Passive Constructions",
        _ => return None,
    })
}

/// WALS value tables for the six rules, as `(code, label)` pairs.
pub fn known_rule_values(id: &str) -> Option<&'static [(ClassCode, &'static str)]> {
    Some(match id {
        "83A" => &[(1, "OV"), (2, "VO"), (3, "No dominant order")],
        "85A" => {
            &[(1, "Postpositions"), (2, "Prepositions"), (3, "Inpositions"), (4, "No dominant order"), (5, "No adpositions")]
        }
        "86A" => &[(1, "Genitive-Noun"), (2, "Noun-Genitive"), (3, "No dominant order")],
        "88A" => &[
            (1, "Demonstrative-Noun"),
            (2, "Noun-Demonstrative"),
            (3, "Demonstrative prefix"),
            (4, "Demonstrative suffix"),
            (5, "Demonstrative before and after Noun"),
            (6, "Mixed"),
        ],
        "92A" => &[
            (1, "Initial"),
            (2, "Final"),
            (3, "Second position"),
            (4, "Other position"),
            (5, "In either of two positions"),
            (6, "No question particle"),
        ],
        "107A" => &[(1, "Passive construction present"), (2, "There is no passive construction")],
        _ => return None,
    })
}
