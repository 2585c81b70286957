//! Surface naming for the Classic, Mystery and Random variants.
//!
//! The three builtin tables are bijective renamings of the same four
//! operators and five predicates. Mystery's `overcome X from Y` is
//! `stack X on Y` and `feast X from Y` is `unstack X from Y`; the mapping
//! is fixed here, not inferred.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Action, ActionKind, BlockId, Fact, Predicate};

/// Benchmark vocabulary variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Classic,
    Mystery,
    Random,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Classic, Variant::Mystery, Variant::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Classic => "classic",
            Variant::Mystery => "mystery",
            Variant::Random => "random",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(Variant::Classic),
            "mystery" => Ok(Variant::Mystery),
            "random" => Ok(Variant::Random),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

/// How blocks are named in sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NounStyle {
    /// `the red block`; letters a, b, c, ... map onto [`BLOCK_COLOURS`].
    ColouredBlock,
    /// `object a`
    LetteredObject,
}

/// Colours assigned to blocks `a`, `b`, `c`, ... in the Classic variant.
pub const BLOCK_COLOURS: [&str; 12] = [
    "red", "blue", "orange", "yellow", "white", "magenta", "black", "cyan", "green", "violet",
    "silver", "gold",
];

/// Canonical block label for the `index`-th block: `a`, `b`, ..., `z`, `a1`, ...
pub fn letter_label(index: usize) -> BlockId {
    let letter = (b'a' + (index % 26) as u8) as char;
    if index < 26 {
        BlockId::new(letter.to_string())
    } else {
        BlockId::new(format!("{letter}{}", index / 26))
    }
}

/// Names and sentence templates for one variant.
///
/// Templates use `{0}` and `{1}` for noun phrases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub variant: Variant,
    pub action_names: BTreeMap<ActionKind, String>,
    pub predicate_names: BTreeMap<Predicate, String>,
    pub noun_style: NounStyle,
    pub action_templates: BTreeMap<ActionKind, String>,
    pub fact_templates: BTreeMap<Predicate, String>,
    /// The on-relation as spelled in the rules paragraph, which differs in
    /// case from the statement form for Random.
    pub on_rule_phrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabularyError {
    #[error("slot {0} is not populated")]
    MissingSlot(String),
    #[error("surface name `{0}` is used more than once")]
    DuplicateName(String),
}

/// Why a strict parse failed. `position` is a zero-based token index.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at token {position} (`{token}`)")]
pub struct ParseError {
    pub position: usize,
    pub token: String,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedToken,
    UnknownBlock,
    TrailingInput,
    MissingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Empty => "empty input",
            ParseErrorKind::UnexpectedToken => "unexpected token",
            ParseErrorKind::UnknownBlock => "unknown block",
            ParseErrorKind::TrailingInput => "trailing input",
            ParseErrorKind::MissingInput => "input ends early",
        };
        f.write_str(s)
    }
}

fn map<K: Ord + Copy, const N: usize>(pairs: [(K, &str); N]) -> BTreeMap<K, String> {
    pairs.into_iter().map(|(k, v)| (k, v.to_string())).collect()
}

impl Vocabulary {
    /// The builtin name table for `variant`.
    pub fn builtin(variant: Variant) -> Vocabulary {
        use ActionKind::*;
        use Predicate as P;
        match variant {
            Variant::Classic => Vocabulary {
                variant,
                action_names: map([
                    (PickUp, "pick up"),
                    (PutDown, "put down"),
                    (Stack, "stack"),
                    (Unstack, "unstack"),
                ]),
                predicate_names: map([
                    (P::HandEmpty, "empty hand"),
                    (P::Holding, "holding"),
                    (P::OnTable, "on table"),
                    (P::On, "on"),
                    (P::Clear, "clear"),
                ]),
                noun_style: NounStyle::ColouredBlock,
                action_templates: map([
                    (PickUp, "pick up {0}"),
                    (PutDown, "put down {0}"),
                    (Stack, "stack {0} on top of {1}"),
                    (Unstack, "unstack {0} from on top of {1}"),
                ]),
                fact_templates: map([
                    (P::HandEmpty, "the hand is empty"),
                    (P::Holding, "the hand is holding {0}"),
                    (P::OnTable, "{0} is on the table"),
                    (P::On, "{0} is on top of {1}"),
                    (P::Clear, "{0} is clear"),
                ]),
                on_rule_phrase: "on top of".into(),
            },
            Variant::Mystery => Vocabulary {
                variant,
                action_names: map([
                    (PickUp, "Attack"),
                    (PutDown, "Succumb"),
                    (Stack, "Overcome"),
                    (Unstack, "Feast"),
                ]),
                predicate_names: map([
                    (P::HandEmpty, "Harmony"),
                    (P::Holding, "Pain"),
                    (P::OnTable, "Planet"),
                    (P::On, "Object Craves"),
                    (P::Clear, "Province"),
                ]),
                noun_style: NounStyle::LetteredObject,
                action_templates: map([
                    (PickUp, "attack {0}"),
                    (PutDown, "succumb {0}"),
                    (Stack, "overcome {0} from {1}"),
                    (Unstack, "feast {0} from {1}"),
                ]),
                fact_templates: map([
                    (P::HandEmpty, "harmony"),
                    (P::Holding, "pain {0}"),
                    (P::OnTable, "planet {0}"),
                    (P::On, "{0} craves {1}"),
                    (P::Clear, "province {0}"),
                ]),
                on_rule_phrase: "Object Craves".into(),
            },
            Variant::Random => Vocabulary {
                variant,
                action_names: map([
                    (PickUp, "1jpkithdyjmlikck"),
                    (PutDown, "9big8ruzarkkquyu"),
                    (Stack, "2ijg9q8swj2shjel"),
                    (Unstack, "xptxjrdkbi3pqsqr"),
                ]),
                predicate_names: map([
                    (P::HandEmpty, "3covmuy4yrjthijd"),
                    (P::Holding, "gk5asm3f7u1fekpj"),
                    (P::OnTable, "51nbwlachmfartjn"),
                    (P::On, "4dmf1cmtyxgsp94g"),
                    (P::Clear, "aqcjuuehivl8auwt"),
                ]),
                noun_style: NounStyle::LetteredObject,
                action_templates: map([
                    (PickUp, "1jpkithdyjmlikck {0}"),
                    (PutDown, "9big8ruzarkkquyu {0}"),
                    (Stack, "2ijg9q8swj2shjel {0} from {1}"),
                    (Unstack, "xptxjrdkbi3pqsqr {0} from {1}"),
                ]),
                fact_templates: map([
                    (P::HandEmpty, "3covmuy4yrjthijd"),
                    (P::Holding, "gk5asm3f7u1fekpj {0}"),
                    (P::OnTable, "51nbwlachmfartjn {0}"),
                    (P::On, "{0} 4dmf1cmtyxgsp94g {1}"),
                    (P::Clear, "aqcjuuehivl8auwt {0}"),
                ]),
                // The reference rule text spells it with this mixed case.
                on_rule_phrase: "Object 4DMF1cMTYXGSP94G".into(),
            },
        }
    }

    /// Checks slot population and name distinctness.
    pub fn check(&self) -> Result<(), VocabularyError> {
        for kind in ActionKind::ALL {
            for (table, label) in [(&self.action_names, "action"), (&self.action_templates, "template")] {
                if table.get(&kind).is_none_or(|s| s.trim().is_empty()) {
                    return Err(VocabularyError::MissingSlot(format!("{label} {kind:?}")));
                }
            }
        }
        for pred in Predicate::ALL {
            for (table, label) in [(&self.predicate_names, "predicate"), (&self.fact_templates, "fact")] {
                if table.get(&pred).is_none_or(|s| s.trim().is_empty()) {
                    return Err(VocabularyError::MissingSlot(format!("{label} {pred:?}")));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for name in self.action_names.values().chain(self.predicate_names.values()) {
            if !seen.insert(name.to_lowercase()) {
                return Err(VocabularyError::DuplicateName(name.clone()));
            }
        }
        Ok(())
    }

    pub fn action_name(&self, kind: ActionKind) -> &str {
        &self.action_names[&kind]
    }

    pub fn predicate_name(&self, pred: Predicate) -> &str {
        &self.predicate_names[&pred]
    }

    /// Lower-cased action keyword as it opens a plan line.
    pub fn action_keyword(&self, kind: ActionKind) -> String {
        self.action_names[&kind].to_lowercase()
    }

    /// Noun phrase for a block: `the red block` or `object a`.
    pub fn noun(&self, block: &BlockId) -> String {
        match self.noun_style {
            NounStyle::ColouredBlock => format!("the {} block", colour_of(block)),
            NounStyle::LetteredObject => format!("object {block}"),
        }
    }

    /// The bare word identifying a block inside its noun phrase.
    pub fn block_word(&self, block: &BlockId) -> String {
        match self.noun_style {
            NounStyle::ColouredBlock => colour_of(block),
            NounStyle::LetteredObject => block.as_str().to_string(),
        }
    }

    /// Resolves a bare identifier word (case-insensitive) to a block.
    pub fn resolve_block(&self, word: &str, blocks: &[BlockId]) -> Option<BlockId> {
        let word = word.to_lowercase();
        blocks
            .iter()
            .find(|b| self.block_word(b).to_lowercase() == word)
            .or_else(|| blocks.iter().find(|b| b.as_str().to_lowercase() == word))
            .cloned()
    }

    fn noun_frame(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self.noun_style {
            NounStyle::ColouredBlock => (&["the"], &["block"]),
            NounStyle::LetteredObject => (&["object"], &[]),
        }
    }

    fn fill(&self, template: &str, args: &[&BlockId]) -> String {
        let mut out = template.to_string();
        for (i, b) in args.iter().enumerate() {
            out = out.replace(&format!("{{{i}}}"), &self.noun(b));
        }
        out
    }

    /// One plan line for `action`.
    pub fn render_action(&self, action: &Action) -> String {
        self.fill(&self.action_templates[&action.kind()], &action.blocks())
    }

    /// One statement clause for `fact`.
    pub fn render_fact(&self, fact: &Fact) -> String {
        self.fill(&self.fact_templates[&fact.predicate()], &fact.blocks())
    }

    /// Strict inverse of [`Vocabulary::render_action`]; case and whitespace
    /// insensitive, nothing else is tolerated.
    pub fn parse_action(&self, blocks: &[BlockId], line: &str) -> Result<Action, ParseError> {
        let tokens = tokenize(line);
        if tokens.is_empty() {
            return Err(ParseError {
                position: 0,
                token: String::new(),
                kind: ParseErrorKind::Empty,
            });
        }
        let mut best: Option<ParseError> = None;
        for kind in ActionKind::ALL {
            match self.match_template(&self.action_templates[&kind], &tokens, blocks) {
                Ok(args) => {
                    return Ok(Action::from_parts(kind, &args).expect("template arity matches kind"))
                }
                Err(e) => best = Some(deeper(best, e)),
            }
        }
        Err(best.expect("at least one template tried"))
    }

    /// Strict inverse of [`Vocabulary::render_fact`].
    pub fn parse_fact(&self, blocks: &[BlockId], text: &str) -> Result<Fact, ParseError> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(ParseError {
                position: 0,
                token: String::new(),
                kind: ParseErrorKind::Empty,
            });
        }
        let mut best: Option<ParseError> = None;
        for pred in Predicate::ALL {
            match self.match_template(&self.fact_templates[&pred], &tokens, blocks) {
                Ok(args) => {
                    let fact = match (pred, args.as_slice()) {
                        (Predicate::HandEmpty, []) => Fact::HandEmpty,
                        (Predicate::Holding, [a]) => Fact::Holding(a.clone()),
                        (Predicate::OnTable, [a]) => Fact::OnTable(a.clone()),
                        (Predicate::Clear, [a]) => Fact::Clear(a.clone()),
                        (Predicate::On, [a, b]) => Fact::On(a.clone(), b.clone()),
                        _ => unreachable!("fact template arity"),
                    };
                    return Ok(fact);
                }
                Err(e) => best = Some(deeper(best, e)),
            }
        }
        Err(best.expect("at least one template tried"))
    }

    fn match_template(
        &self,
        template: &str,
        tokens: &[String],
        blocks: &[BlockId],
    ) -> Result<Vec<BlockId>, ParseError> {
        let (prefix, suffix) = self.noun_frame();
        let err = |pos: usize, kind| ParseError {
            position: pos,
            token: tokens.get(pos).cloned().unwrap_or_default(),
            kind,
        };
        let mut pos = 0;
        let mut args = Vec::new();
        for piece in template.split_whitespace() {
            if piece.starts_with('{') && piece.ends_with('}') {
                for word in prefix {
                    if tokens.get(pos).map(String::as_str) != Some(*word) {
                        return Err(err(pos, expect_kind(tokens, pos)));
                    }
                    pos += 1;
                }
                let Some(word) = tokens.get(pos) else {
                    return Err(err(pos, ParseErrorKind::MissingInput));
                };
                let block = self
                    .resolve_block(word, blocks)
                    .ok_or_else(|| err(pos, ParseErrorKind::UnknownBlock))?;
                args.push(block);
                pos += 1;
                for word in suffix {
                    if tokens.get(pos).map(String::as_str) != Some(*word) {
                        return Err(err(pos, expect_kind(tokens, pos)));
                    }
                    pos += 1;
                }
            } else {
                if tokens.get(pos).map(String::as_str) != Some(piece.to_lowercase().as_str()) {
                    return Err(err(pos, expect_kind(tokens, pos)));
                }
                pos += 1;
            }
        }
        if pos < tokens.len() {
            return Err(err(pos, ParseErrorKind::TrailingInput));
        }
        Ok(args)
    }
}

fn expect_kind(tokens: &[String], pos: usize) -> ParseErrorKind {
    if pos >= tokens.len() {
        ParseErrorKind::MissingInput
    } else {
        ParseErrorKind::UnexpectedToken
    }
}

/// Keeps the error that got furthest into the input; ties prefer the more
/// specific unknown-block report.
fn deeper(best: Option<ParseError>, e: ParseError) -> ParseError {
    match best {
        None => e,
        Some(b) if e.position > b.position => e,
        Some(b) if e.position == b.position && e.kind == ParseErrorKind::UnknownBlock => e,
        Some(b) => b,
    }
}

fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_lowercase).collect()
}

fn colour_of(block: &BlockId) -> String {
    let label = block.as_str();
    let mut chars = label.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        if c.is_ascii_lowercase() {
            let idx = (c as u8 - b'a') as usize;
            if let Some(colour) = BLOCK_COLOURS.get(idx) {
                return colour.to_string();
            }
        }
    }
    label.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BlockId {
        BlockId::from(s)
    }

    fn abcd() -> Vec<BlockId> {
        ["a", "b", "c", "d"].iter().map(|s| b(s)).collect()
    }

    #[test]
    fn builtin_tables_match_the_name_correspondences() {
        let random = Vocabulary::builtin(Variant::Random);
        assert_eq!(random.action_name(ActionKind::Stack), "2ijg9q8swj2shjel");
        assert_eq!(random.predicate_name(Predicate::On), "4dmf1cmtyxgsp94g");
        let mystery = Vocabulary::builtin(Variant::Mystery);
        assert_eq!(mystery.predicate_name(Predicate::On), "Object Craves");
        assert_eq!(mystery.action_name(ActionKind::Unstack), "Feast");
        let classic = Vocabulary::builtin(Variant::Classic);
        assert_eq!(classic.action_name(ActionKind::PickUp), "pick up");
        for v in Variant::ALL {
            Vocabulary::builtin(v).check().unwrap();
        }
    }

    #[test]
    fn renders_reference_plan_lines() {
        let classic = Vocabulary::builtin(Variant::Classic);
        assert_eq!(
            classic.render_action(&Action::Unstack(b("b"), b("c"))),
            "unstack the blue block from on top of the orange block"
        );
        let mystery = Vocabulary::builtin(Variant::Mystery);
        assert_eq!(
            mystery.render_action(&Action::Stack(b("c"), b("b"))),
            "overcome object c from object b"
        );
        let random = Vocabulary::builtin(Variant::Random);
        assert_eq!(
            random.render_action(&Action::Unstack(b("b"), b("c"))),
            "xptxjrdkbi3pqsqr object b from object c"
        );
    }

    #[test]
    fn parses_reference_plan_lines() {
        let classic = Vocabulary::builtin(Variant::Classic);
        assert_eq!(
            classic.parse_action(&abcd(), "put down the blue block"),
            Ok(Action::PutDown(b("b")))
        );
        let mystery = Vocabulary::builtin(Variant::Mystery);
        assert_eq!(
            mystery.parse_action(&abcd(), "Succumb object b"),
            Ok(Action::PutDown(b("b")))
        );
    }

    #[test]
    fn unknown_identifier_is_reported_with_position() {
        let random = Vocabulary::builtin(Variant::Random);
        let err = random
            .parse_action(&abcd(), "1jpkithdyjmlikck object q")
            .unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownBlock);
        assert_eq!(err.position, 2);
        assert_eq!(err.token, "q");
    }

    #[test]
    fn strict_parser_rejects_decorations() {
        let classic = Vocabulary::builtin(Variant::Classic);
        let err = classic
            .parse_action(&abcd(), "1. pick up the red block")
            .unwrap_err();
        assert_eq!(err.position, 0);
        let err = classic
            .parse_action(&abcd(), "pick up the red block now")
            .unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TrailingInput);
        assert_eq!(
            classic.parse_action(&abcd(), "  ").unwrap_err().kind,
            ParseErrorKind::Empty
        );
    }

    #[test]
    fn facts_round_trip() {
        for v in Variant::ALL {
            let vocab = Vocabulary::builtin(v);
            for fact in [
                Fact::HandEmpty,
                Fact::Holding(b("a")),
                Fact::OnTable(b("b")),
                Fact::On(b("c"), b("d")),
                Fact::Clear(b("a")),
            ] {
                let text = vocab.render_fact(&fact);
                assert_eq!(vocab.parse_fact(&abcd(), &text), Ok(fact), "{v}: {text}");
            }
        }
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut v = Vocabulary::builtin(Variant::Mystery);
        v.predicate_names.insert(Predicate::Clear, "attack".into());
        assert_eq!(v.check(), Err(VocabularyError::DuplicateName("attack".into())));
        let mut v = Vocabulary::builtin(Variant::Classic);
        v.action_names.remove(&ActionKind::Stack);
        assert!(matches!(v.check(), Err(VocabularyError::MissingSlot(_))));
    }

    #[test]
    fn classic_colours_follow_block_order() {
        let classic = Vocabulary::builtin(Variant::Classic);
        let names: Vec<String> = abcd().iter().map(|x| classic.noun(x)).collect();
        assert_eq!(
            names,
            ["the red block", "the blue block", "the orange block", "the yellow block"]
        );
        assert_eq!(letter_label(0), b("a"));
        assert_eq!(letter_label(27), b("b1"));
    }
}
