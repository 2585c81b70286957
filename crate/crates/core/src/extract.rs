//! Lenient recovery of a plan from free-form model output.
//!
//! Leniency is a whitelist: list markers and symbols are stripped, `o` and
//! `obj` stand in for `object`, an English gloss next to an obfuscated
//! action name is ignored. Nothing is fuzzy-matched, so a line naming the
//! wrong action or the wrong blocks still yields the wrong action.

use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Action, ActionKind, BlockId};
use crate::vocabulary::{NounStyle, Vocabulary, BLOCK_COLOURS};

static TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\[\s*plan(\s*[_\- ]?\s*end)?\s*\]").unwrap());

static MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:(?:step\s*\d+\s*[:.)\-]*|\(?\d+\s*[:.)\-]+|\d+\s+|[-*•+>_#]+)\s*)*")
        .unwrap()
});

/// Byte range of the plan inside `text`: the last `[PLAN]`...`[PLAN END]`
/// pair, else everything after the last `[PLAN]`, else everything before
/// the last `[PLAN END]`, else the whole text.
pub fn extract_block(text: &str) -> Range<usize> {
    let mut opens = Vec::new();
    let mut closes = Vec::new();
    for m in TAG.captures_iter(text) {
        let whole = m.get(0).unwrap();
        if m.get(1).is_some() {
            closes.push(whole.range());
        } else {
            opens.push(whole.range());
        }
    }
    let closed_after = |start: usize| closes.iter().find(|c| c.start >= start).map(|c| c.start);
    let last_pair = opens
        .iter()
        .rev()
        .find_map(|o| closed_after(o.end).map(|end| o.end..end));
    match opens.last() {
        Some(open) => match closed_after(open.end) {
            Some(end) => open.end..end,
            // An empty trailing [PLAN] (an echoed query header) defers to
            // the last complete pair.
            None if text[open.end..].trim().is_empty() => {
                last_pair.unwrap_or(open.end..text.len())
            }
            None => open.end..text.len(),
        },
        None => match closes.last() {
            Some(close) => 0..close.start,
            None => 0..text.len(),
        },
    }
}

/// Why a line produced no action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Skip {
    NoAction,
    Ambiguous { keywords: Vec<String> },
    ArityMismatch { action: String, expected: usize, found: usize },
    UnknownBlock { word: String },
}

impl fmt::Display for Skip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Skip::NoAction => f.write_str("no action keyword"),
            Skip::Ambiguous { keywords } => {
                write!(f, "several action keywords: {}", keywords.join(", "))
            }
            Skip::ArityMismatch { action, expected, found } => {
                write!(f, "{action} takes {expected} argument(s), found {found}")
            }
            Skip::UnknownBlock { word } => write!(f, "unknown object `{word}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedLine {
    /// 1-based, counted within the plan block.
    pub line: usize,
    pub text: String,
    #[serde(flatten)]
    pub skip: Skip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedPlan {
    pub actions: Vec<Action>,
    pub dropped_lines: Vec<DroppedLine>,
    pub source_span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("no line of the response names an action")]
    EmptyPlan { dropped_lines: Vec<DroppedLine> },
}

/// Lower-cased tokens after stripping list markers and symbols.
fn clean_tokens(line: &str) -> Vec<String> {
    let line = line.to_lowercase();
    let rest = &line[MARKER.find(&line).map_or(0, |m| m.end())..];
    rest.chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// English action names accepted as glosses: token sequences per kind.
fn english_forms(kind: ActionKind) -> &'static [&'static [&'static str]] {
    match kind {
        ActionKind::PickUp => &[&["pick", "up"], &["pickup"]],
        ActionKind::PutDown => &[&["put", "down"], &["putdown"]],
        ActionKind::Stack => &[&["stack"]],
        ActionKind::Unstack => &[&["unstack"]],
    }
}

fn keyword_forms(vocab: &Vocabulary, kind: ActionKind) -> Vec<Vec<String>> {
    let own: Vec<String> = vocab
        .action_keyword(kind)
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut forms = vec![own.clone()];
    if vocab.noun_style == NounStyle::ColouredBlock {
        for form in english_forms(kind) {
            let form: Vec<String> = form.iter().map(|s| s.to_string()).collect();
            if form != own {
                forms.push(form);
            }
        }
    }
    forms
}

/// Marks token positions covered by any of `forms`; returns whether any matched.
fn mark(tokens: &[String], forms: &[Vec<String>], covered: &mut [bool]) -> bool {
    let mut hit = false;
    for form in forms {
        let n = form.len();
        if n == 0 || n > tokens.len() {
            continue;
        }
        for start in 0..=tokens.len() - n {
            if tokens[start..start + n] == form[..] {
                hit = true;
                covered[start..start + n].iter_mut().for_each(|c| *c = true);
            }
        }
    }
    hit
}

const OBJECT_MARKERS: [&str; 3] = ["object", "obj", "o"];

fn identifiers(
    vocab: &Vocabulary,
    blocks: &[BlockId],
    tokens: &[String],
    covered: &[bool],
) -> Result<Vec<BlockId>, Skip> {
    let free = |i: usize| !covered[i];
    let resolve = |word: &str| {
        vocab
            .resolve_block(word, blocks)
            .ok_or_else(|| Skip::UnknownBlock { word: word.into() })
    };
    match vocab.noun_style {
        NounStyle::ColouredBlock => (0..tokens.len())
            .filter(|&i| free(i) && BLOCK_COLOURS.contains(&tokens[i].as_str()))
            .map(|i| resolve(&tokens[i]))
            .collect(),
        NounStyle::LetteredObject => {
            let marked: Vec<usize> = (1..tokens.len())
                .filter(|&i| free(i) && free(i - 1))
                .filter(|&i| OBJECT_MARKERS.contains(&tokens[i - 1].as_str()))
                .filter(|&i| !OBJECT_MARKERS.contains(&tokens[i].as_str()))
                .collect();
            if !marked.is_empty() {
                return marked.into_iter().map(|i| resolve(&tokens[i])).collect();
            }
            Ok((0..tokens.len())
                .filter(|&i| free(i))
                .filter_map(|i| {
                    blocks
                        .iter()
                        .find(|b| b.as_str().eq_ignore_ascii_case(&tokens[i]))
                        .cloned()
                })
                .collect())
        }
    }
}

/// Reads one line as an action, or says why it is not one.
pub fn normalize_line(vocab: &Vocabulary, blocks: &[BlockId], line: &str) -> Result<Action, Skip> {
    let tokens = clean_tokens(line);
    let mut covered = vec![false; tokens.len()];
    let mut kinds = Vec::new();
    for kind in ActionKind::ALL {
        if mark(&tokens, &keyword_forms(vocab, kind), &mut covered) {
            kinds.push(kind);
        }
    }
    let kind = match kinds.as_slice() {
        [] => return Err(Skip::NoAction),
        [kind] => *kind,
        _ => {
            return Err(Skip::Ambiguous {
                keywords: kinds.iter().map(|k| vocab.action_name(*k).to_string()).collect(),
            })
        }
    };
    if vocab.noun_style == NounStyle::LetteredObject {
        for other in ActionKind::ALL {
            let glosses: Vec<Vec<String>> = english_forms(other)
                .iter()
                .map(|f| f.iter().map(|s| s.to_string()).collect())
                .collect();
            mark(&tokens, &glosses, &mut covered);
        }
    }
    let args = identifiers(vocab, blocks, &tokens, &covered)?;
    Action::from_parts(kind, &args).ok_or_else(|| Skip::ArityMismatch {
        action: vocab.action_name(kind).to_string(),
        expected: kind.arity(),
        found: args.len(),
    })
}

/// Finds the plan block and reads each of its lines, in order.
pub fn extract_plan(
    vocab: &Vocabulary,
    blocks: &[BlockId],
    text: &str,
) -> Result<ExtractedPlan, ExtractError> {
    let span = extract_block(text);
    let mut actions = Vec::new();
    let mut dropped_lines = Vec::new();
    for (i, line) in text[span.clone()].lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match normalize_line(vocab, blocks, line) {
            Ok(action) => actions.push(action),
            Err(skip) => dropped_lines.push(DroppedLine {
                line: i + 1,
                text: line.trim().to_string(),
                skip,
            }),
        }
    }
    if actions.is_empty() {
        return Err(ExtractError::EmptyPlan { dropped_lines });
    }
    Ok(ExtractedPlan {
        actions,
        dropped_lines,
        source_span: span,
    })
}
