//! Task-Method-Knowledge models of the Blocksworld operators.
//!
//! Conditions are stored as signed literals over canonical predicates. The
//! surface spelling of each predicate (`IsClear`, `Province`,
//! `aqcjuuehivl8auwt`, ...) lives in the model's [`TmkNotation`], and the
//! two JSON shapes (string lists with a `NOT ` prefix, or maps to
//! booleans) are chosen at serialization time.

mod generate;
mod serialize;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::Predicate;
use crate::vocabulary::{Variant, Vocabulary};

pub use generate::generate_tmk;
pub use serialize::{parse_tmk, parse_tmk_any, serialize_tmk, Dialect, TmkParseError};
pub use validate::{semantics_check, semantics_mismatches, validate_tmk, Lint, ValidationReport, Violation};

/// The reference TMK JSON documents, unmodified.
pub mod verbatim {
    use crate::vocabulary::Variant;

    pub const CLASSIC: &str = include_str!("documents/classic.json");
    pub const MYSTERY: &str = include_str!("documents/mystery.json");
    pub const RANDOM: &str = include_str!("documents/random.json");

    pub fn for_variant(variant: Variant) -> &'static str {
        match variant {
            Variant::Classic => CLASSIC,
            Variant::Mystery => MYSTERY,
            Variant::Random => RANDOM,
        }
    }
}

/// A signed literal over named parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Condition {
    pub predicate: Predicate,
    pub args: Vec<String>,
    pub positive: bool,
}

impl Condition {
    pub fn pos(predicate: Predicate, args: &[&str]) -> Self {
        Condition {
            predicate,
            args: args.iter().map(|s| s.to_string()).collect(),
            positive: true,
        }
    }

    pub fn neg(predicate: Predicate, args: &[&str]) -> Self {
        Condition {
            positive: false,
            ..Condition::pos(predicate, args)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmkGoal {
    pub name: String,
    pub description: String,
    pub input_parameters: Vec<String>,
    pub output_parameters: Vec<String>,
    pub given: Vec<Condition>,
    pub makes: Vec<Condition>,
    pub mechanism: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmkMechanism {
    pub name: String,
    /// May contain `{parameter}` placeholders.
    pub description: String,
    pub input_parameters: Vec<String>,
    pub output_parameters: Vec<String>,
    pub kind: String,
    pub requires: Vec<Condition>,
    pub provides: Vec<Condition>,
    pub process: String,
    /// `provides` entries that were written as informal prose.
    pub prose: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TmkKnowledge {
    pub concepts: Vec<KnowledgeEntry>,
    pub relations: Vec<KnowledgeEntry>,
}

impl TmkKnowledge {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.concepts
            .iter()
            .chain(&self.relations)
            .map(|e| e.name.as_str())
    }

    pub fn houses(&self, name: &str) -> bool {
        self.names().any(|n| n == name)
    }
}

/// How predicates are spelled inside TMK condition strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmkNotation {
    pub names: BTreeMap<Predicate, String>,
    /// Write on-table as `On(x, <constant>)` instead of its own predicate.
    pub on_table_constant: Option<String>,
    /// Write zero-arity predicates with `()`.
    pub nullary_parens: bool,
    /// Informal prose accepted on input, e.g. `Hand not empty`. Each entry
    /// binds the phrase to a literal over the owner's first parameter.
    pub informal: Vec<(String, Predicate, bool)>,
}

impl TmkNotation {
    /// Notation matching the reference TMK for a builtin variant.
    pub fn for_variant(variant: Variant) -> TmkNotation {
        TmkNotation::for_vocabulary(&Vocabulary::builtin(variant))
    }

    /// Classic uses its own predicate vocabulary; the obfuscated variants
    /// use the vocabulary's predicate names with spaces removed.
    pub fn for_vocabulary(vocab: &Vocabulary) -> TmkNotation {
        match vocab.variant {
            Variant::Classic => TmkNotation {
                names: [
                    (Predicate::HandEmpty, "HandIsEmpty"),
                    (Predicate::Holding, "Holding"),
                    (Predicate::OnTable, "On"),
                    (Predicate::On, "On"),
                    (Predicate::Clear, "IsClear"),
                ]
                .into_iter()
                .map(|(p, s)| (p, s.to_string()))
                .collect(),
                on_table_constant: Some("table".into()),
                nullary_parens: true,
                informal: vec![
                    ("Hand not empty".into(), Predicate::HandEmpty, false),
                    ("Block not on table".into(), Predicate::OnTable, false),
                ],
            },
            Variant::Mystery | Variant::Random => TmkNotation {
                names: Predicate::ALL
                    .into_iter()
                    .map(|p| (p, vocab.predicate_name(p).replace(' ', "")))
                    .collect(),
                on_table_constant: None,
                nullary_parens: false,
                informal: vec![],
            },
        }
    }

    pub fn name(&self, predicate: Predicate) -> &str {
        &self.names[&predicate]
    }

    /// `On(block, table)`, `NOT HandIsEmpty()`, `Harmony`, ...
    pub fn render(&self, cond: &Condition) -> String {
        let body = self.render_literal(cond);
        if cond.positive {
            body
        } else {
            format!("NOT {body}")
        }
    }

    /// The literal without its sign (map-dialect key).
    pub fn render_literal(&self, cond: &Condition) -> String {
        let name = self.name(cond.predicate);
        let mut args = cond.args.clone();
        if cond.predicate == Predicate::OnTable {
            if let Some(constant) = &self.on_table_constant {
                args.push(constant.clone());
            }
        }
        if args.is_empty() && !self.nullary_parens {
            name.to_string()
        } else {
            format!("{name}({})", args.join(", "))
        }
    }

    /// Parses a literal written in this notation. `owner_params` supplies
    /// the argument for informal phrases.
    pub fn parse(&self, text: &str, owner_params: &[String]) -> Option<Condition> {
        let text = text.trim();
        for (phrase, predicate, positive) in &self.informal {
            if text.eq_ignore_ascii_case(phrase) {
                let args = match predicate.arity() {
                    0 => vec![],
                    _ => vec![owner_params.first()?.clone()],
                };
                return Some(Condition {
                    predicate: *predicate,
                    args,
                    positive: *positive,
                });
            }
        }
        let (positive, body) = match text.strip_prefix("NOT ") {
            Some(rest) => (false, rest.trim()),
            None => (true, text),
        };
        let (name, args) = match body.find('(') {
            Some(open) => {
                let close = body.rfind(')')?;
                if close < open || close != body.len() - 1 {
                    return None;
                }
                let inner = &body[open + 1..close];
                let args: Vec<String> = inner
                    .split(',')
                    .map(|a| a.trim().to_string())
                    .filter(|a| !a.is_empty())
                    .collect();
                (body[..open].trim(), args)
            }
            None => (body, vec![]),
        };
        if let Some(constant) = &self.on_table_constant {
            if name == self.name(Predicate::OnTable)
                && args.len() == 2
                && &args[1] == constant
            {
                return Some(Condition {
                    predicate: Predicate::OnTable,
                    args: vec![args[0].clone()],
                    positive,
                });
            }
        }
        let predicate = Predicate::ALL
            .into_iter()
            .filter(|p| self.on_table_constant.is_none() || *p != Predicate::OnTable)
            .find(|p| self.name(*p) == name)?;
        Some(Condition {
            predicate,
            args,
            positive,
        })
    }
}

/// Goals, their mechanisms and the shared ontology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmkModel {
    pub goals: Vec<TmkGoal>,
    pub mechanisms: Vec<TmkMechanism>,
    pub knowledge: TmkKnowledge,
    pub notation: TmkNotation,
}

impl TmkModel {
    pub fn mechanism(&self, name: &str) -> Option<&TmkMechanism> {
        self.mechanisms.iter().find(|m| m.name == name)
    }

    pub fn goal(&self, name: &str) -> Option<&TmkGoal> {
        self.goals.iter().find(|g| g.name == name)
    }

    pub fn goal_mut(&mut self, name: &str) -> Option<&mut TmkGoal> {
        self.goals.iter_mut().find(|g| g.name == name)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("NOT ")?;
        }
        write!(f, "{:?}({})", self.predicate, self.args.join(", "))
    }
}
