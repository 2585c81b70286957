//! Prompt assembly: plain zero-shot, plain one-shot and TMK one-shot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    execute_plan, satisfies, Action, ActionKind, BlockId, Fact, GoalSpec, Instance, Predicate,
    Support, WorldState,
};
use crate::tmk::{generate_tmk, serialize_tmk, verbatim, Dialect};
use crate::vocabulary::{letter_label, Variant, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptMode {
    PlainZeroShot,
    PlainOneShot,
    TmkOneShot,
}

impl PromptMode {
    pub const ALL: [PromptMode; 3] = [
        PromptMode::PlainZeroShot,
        PromptMode::PlainOneShot,
        PromptMode::TmkOneShot,
    ];

    pub fn is_one_shot(self) -> bool {
        self != PromptMode::PlainZeroShot
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PromptMode::PlainZeroShot => "plain-zero-shot",
            PromptMode::PlainOneShot => "plain-one-shot",
            PromptMode::TmkOneShot => "tmk-one-shot",
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PromptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown prompt mode `{s}` (expected plain-zero-shot, plain-one-shot or tmk-one-shot)"))
    }
}

/// Where the TMK JSON in a TMK prompt comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TmkSource {
    /// The reference document for a builtin variant, byte for byte.
    #[default]
    Reference,
    /// Generated from the vocabulary and serialized in the given dialect.
    Generated(Dialect),
}

/// Worked example shown before the query in one-shot prompts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demo {
    pub instance: Instance,
    pub plan: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub vocab: Vocabulary,
    pub mode: PromptMode,
    pub query: Instance,
    pub demo: Option<Demo>,
    pub tmk: TmkSource,
}

impl PromptSpec {
    /// Builtin vocabulary, reference TMK.
    pub fn new(variant: Variant, mode: PromptMode, query: Instance, demo: Option<Demo>) -> Self {
        PromptSpec {
            vocab: Vocabulary::builtin(variant),
            mode,
            query,
            demo,
            tmk: TmkSource::Reference,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("{0} prompts need a demonstration")]
    MissingDemo(PromptMode),
    #[error("zero-shot prompts take no demonstration")]
    UnexpectedDemo,
    #[error("demonstration plan is not a correct plan for instance {0}")]
    InvalidDemoPlan(String),
    #[error("no reference TMK exists for a custom {0} vocabulary")]
    NoReferenceTmk(Variant),
}

/// Which statement a paragraph renders; the Mystery reference prompts word
/// the one-shot query differently from the demo and zero-shot statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementRole {
    Demo,
    OneShotQuery,
    ZeroShotQuery,
}

fn colon_style(variant: Variant, role: StatementRole) -> bool {
    match variant {
        Variant::Classic => false,
        Variant::Random => true,
        Variant::Mystery => role == StatementRole::OneShotQuery,
    }
}

/// Predicate groups in the order statements list them.
fn predicate_order(variant: Variant) -> [Predicate; 5] {
    use Predicate::*;
    match variant {
        Variant::Classic | Variant::Random => [Clear, HandEmpty, Holding, On, OnTable],
        Variant::Mystery => [On, HandEmpty, Holding, OnTable, Clear],
    }
}

/// Facts grouped by predicate, then by the position of their blocks in
/// the instance's block list.
fn ordered(variant: Variant, instance: &Instance, facts: &[Fact]) -> Vec<Fact> {
    let mut facts = facts.to_vec();
    let order = predicate_order(variant);
    facts.sort_by_key(|f| {
        let group = order.iter().position(|p| *p == f.predicate());
        let positions: Vec<Option<usize>> =
            f.blocks().into_iter().map(|b| instance.index_of(b)).collect();
        (group, positions)
    });
    facts
}

/// `x`, `x and y`, `x, y and z`.
fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// The initial-condition sentence and goal sentence for `instance`, in
/// the wording the variant uses for demonstrations.
pub fn render_statement(vocab: &Vocabulary, instance: &Instance) -> String {
    render_statement_as(vocab, instance, StatementRole::Demo)
}

pub fn render_statement_as(vocab: &Vocabulary, instance: &Instance, role: StatementRole) -> String {
    let render = |facts: &[Fact]| {
        let clauses: Vec<String> = ordered(vocab.variant, instance, facts)
            .iter()
            .map(|f| vocab.render_fact(f))
            .collect();
        join_and(&clauses)
    };
    let initial = render(&instance.initial.describe());
    let goal = render(instance.goal.facts());
    if colon_style(vocab.variant, role) {
        format!(
            "As initial conditions I have that: {initial}.\nMy goal is for the following to be true: {goal}."
        )
    } else {
        format!("As initial conditions I have that, {initial}.\nMy goal is to have that {goal}.")
    }
}

const CLASSIC_RULES: &str = "\
I am playing with a set of blocks where I need to arrange the blocks into stacks. Here are the actions I can do

Pick up a block
Unstack a block from on top of another block
Put down a block
Stack a block on top of another block

I have the following restrictions on my actions:
I can only pick up or unstack one block at a time.
I can only pick up or unstack a block if my hand is empty.
I can only pick up a block if the block is on the table and the block is clear. A block is clear if the block has no other blocks on top of it and if the block is not picked up.
I can only unstack a block from on top of another block if the block I am unstacking was really on top of the other block.
I can only unstack a block from on top of another block if the block I am unstacking is clear.
Once I pick up or unstack a block, I am holding the block.
I can only put down a block that I am holding.
I can only stack a block on top of another block if I am holding the block being stacked.
I can only stack a block on top of another block if the block onto which I am stacking the block is clear.
Once I put down or stack a block, my hand becomes empty.";

/// The obfuscated variants share one rule template; `{pick}` etc. are
/// action names, `{clear}` etc. predicate names.
const OBJECT_RULES: &str = "\
I am playing with a set of objects. Here are the actions I can do

{pick} object
{unstack} object from another object
{put} object
{stack} object from another object

I have the following restrictions on my actions:
To perform {pick} action, the following facts need to be true: {clear} object, {table} object, {empty}.
Once {pick} action is performed the following facts will be true: {holding} object.
Once {pick} action is performed the following facts will be false: {clear} object, {table} object, {empty}.
To perform {put} action, the following facts need to be true: {holding} object.
Once {put} action is performed the following facts will be true: {clear} object, {table} object, {empty}.
Once {put} action is performed the following facts will be false: {holding} object.
To perform {stack} action, the following needs to be true: {clear} other object, {holding} object.
Once {stack} action is performed the following will be true: {empty}, {clear} object, {on} other object.
Once {stack} action is performed the following will be false: {clear} other object, {holding} object.
To perform {unstack} action, the following needs to be true: {on} other object, {clear} object, {empty}.
Once {unstack} action is performed the following will be true: {holding} object, {clear} other object.
Once {unstack} action is performed the following will be false:, {on} other object, {clear} object, {empty}.";

/// Action list and restriction paragraph for the plain prompts.
pub fn render_rules(vocab: &Vocabulary) -> String {
    if vocab.variant == Variant::Classic {
        return CLASSIC_RULES.to_string();
    }
    OBJECT_RULES
        .replace("{pick}", vocab.action_name(ActionKind::PickUp))
        .replace("{put}", vocab.action_name(ActionKind::PutDown))
        .replace("{stack}", vocab.action_name(ActionKind::Stack))
        .replace("{unstack}", vocab.action_name(ActionKind::Unstack))
        .replace("{clear}", vocab.predicate_name(Predicate::Clear))
        .replace("{table}", vocab.predicate_name(Predicate::OnTable))
        .replace("{empty}", vocab.predicate_name(Predicate::HandEmpty))
        .replace("{holding}", vocab.predicate_name(Predicate::Holding))
        .replace("{on}", &vocab.on_rule_phrase)
}

fn zero_shot_closing(variant: Variant) -> &'static str {
    match variant {
        Variant::Classic | Variant::Mystery => {
            "What is the plan to achieve my goal? Just give the actions in the plan."
        }
        Variant::Random => {
            "To solve the problem, you will have to provide which actions to take from the initial conditions and in which order in order to achieve the goal conditions. Provide the plan by giving the action names along with the objects \"ACTION_NAME OBJECTS\". Provide the plan between these two tags [PLAN] and [PLAN END]."
        }
    }
}

fn tmk_header(variant: Variant) -> &'static str {
    match variant {
        Variant::Classic => "You must adhere strictly to the JSON below, paying attention to the rules, ensuring to use only legal moves to achieve the final plan.",
        Variant::Mystery | Variant::Random => "You must adhere strictly to the JSON below, paying attention to the rules, ensuring to use only moves spelt out in the JSON to achieve the final plan.",
    }
}

const FORMAT_PREAMBLE: &str = "Below, within [Plan] and [Plan End], is the format you will use for the answer. The first one is an example. Focus on only the second plan.";

/// The TMK JSON a prompt embeds.
pub fn tmk_text(vocab: &Vocabulary, source: TmkSource) -> Result<String, PromptError> {
    match source {
        TmkSource::Reference => {
            if *vocab != Vocabulary::builtin(vocab.variant) {
                return Err(PromptError::NoReferenceTmk(vocab.variant));
            }
            Ok(verbatim::for_variant(vocab.variant).trim_end().to_string())
        }
        TmkSource::Generated(dialect) => Ok(serialize_tmk(&generate_tmk(vocab), dialect)),
    }
}

fn render_plan(vocab: &Vocabulary, plan: &[Action]) -> String {
    plan.iter()
        .map(|a| vocab.render_action(a))
        .collect::<Vec<_>>()
        .join("\n")
}

fn demo_block(vocab: &Vocabulary, demo: &Demo) -> String {
    format!(
        "[STATEMENT]\n{}\n\nMy plan is as follows:\n\n[PLAN]\n{}\n[PLAN END]",
        render_statement_as(vocab, &demo.instance, StatementRole::Demo),
        render_plan(vocab, &demo.plan)
    )
}

fn query_block(vocab: &Vocabulary, query: &Instance) -> String {
    format!(
        "[STATEMENT]\n{}\n\nMy plan is as follows:\n\n[PLAN]",
        render_statement_as(vocab, query, StatementRole::OneShotQuery)
    )
}

fn check_demo(demo: &Demo) -> Result<(), PromptError> {
    let ok = execute_plan(&demo.instance.initial, &demo.plan)
        .map(|t| satisfies(t.final_state(), &demo.instance.goal))
        .unwrap_or(false);
    if ok {
        Ok(())
    } else {
        Err(PromptError::InvalidDemoPlan(demo.instance.id.clone()))
    }
}

/// Renders the full user message for `spec`.
pub fn assemble_prompt(spec: &PromptSpec) -> Result<String, PromptError> {
    let vocab = &spec.vocab;
    let demo = match (spec.mode.is_one_shot(), &spec.demo) {
        (true, None) => return Err(PromptError::MissingDemo(spec.mode)),
        (false, Some(_)) => return Err(PromptError::UnexpectedDemo),
        (true, Some(demo)) => {
            check_demo(demo)?;
            Some(demo)
        }
        (false, None) => None,
    };
    let text = match (spec.mode, demo) {
        (PromptMode::PlainZeroShot, _) => format!(
            "{}\n\n[STATEMENT]\n{}\n\n{}",
            render_rules(vocab),
            render_statement_as(vocab, &spec.query, StatementRole::ZeroShotQuery),
            zero_shot_closing(vocab.variant)
        ),
        (PromptMode::PlainOneShot, Some(demo)) => format!(
            "{}\n\n{}\n\n{}",
            render_rules(vocab),
            demo_block(vocab, demo),
            query_block(vocab, &spec.query)
        ),
        (PromptMode::TmkOneShot, Some(demo)) => {
            // The Classic reference prompt leaves a blank line after the JSON.
            let gap = if vocab.variant == Variant::Classic { "\n\n" } else { "\n" };
            format!(
                "{}\n{}{gap}{FORMAT_PREAMBLE}\n\n{}\n\n{}",
                tmk_header(vocab.variant),
                tmk_text(vocab, spec.tmk)?,
                demo_block(vocab, demo),
                query_block(vocab, &spec.query)
            )
        }
        (_, None) => unreachable!("one-shot demo checked above"),
    };
    Ok(text)
}

/// Inverse of [`render_statement_as`] for any role. Blocks are the
/// letters `a`..`z`; the initial facts must describe the state exactly.
pub fn parse_statement(vocab: &Vocabulary, text: &str) -> Option<Instance> {
    let candidates: Vec<BlockId> = (0..26).map(letter_label).collect();
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let initial = lines
        .next()?
        .strip_prefix("As initial conditions I have that")?
        .trim_start_matches([',', ':'])
        .trim()
        .strip_suffix('.')?;
    let goal_line = lines.next()?;
    let goal = goal_line
        .strip_prefix("My goal is to have that")
        .or_else(|| goal_line.strip_prefix("My goal is for the following to be true:"))?
        .trim()
        .strip_suffix('.')?;
    let facts = |s: &str| -> Option<Vec<Fact>> {
        s.replace(" and ", ", ")
            .split(", ")
            .map(|c| vocab.parse_fact(&candidates, c.trim()).ok())
            .collect()
    };
    let initial = facts(initial)?;
    let mut support = BTreeMap::new();
    let mut held = None;
    for fact in &initial {
        match fact {
            Fact::On(x, y) => {
                support.insert(x.clone(), Support::Block(y.clone()));
            }
            Fact::OnTable(x) => {
                support.insert(x.clone(), Support::Table);
            }
            Fact::Holding(x) => held = Some(x.clone()),
            Fact::Clear(_) | Fact::HandEmpty => {}
        }
    }
    let state = WorldState::new(support, held).ok()?;
    let stated: BTreeSet<Fact> = initial.into_iter().collect();
    if stated != state.describe().into_iter().collect() {
        return None;
    }
    let mut blocks: Vec<BlockId> = state.blocks().into_iter().collect();
    blocks.sort_by_key(|b| candidates.iter().position(|c| c == b));
    let goal = GoalSpec::new(facts(goal)?).ok()?;
    Instance::new("parsed", blocks, state, goal).ok()
}

/// Trims trailing whitespace on each line, collapses runs of blank lines
/// and drops leading and trailing blank lines.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out: Vec<&str> = Vec::new();
    for line in text.lines().map(str::trim_end) {
        if line.is_empty() && out.last().is_none_or(|l| l.is_empty()) {
            continue;
        }
        out.push(line);
    }
    while out.last().is_some_and(|l| l.is_empty()) {
        out.pop();
    }
    out.join("\n")
}

/// The worked example and query used by the reference prompts.
pub mod reference {
    use super::Demo;
    use crate::domain::{Action, Instance};

    /// Blue on orange, goal orange on blue (blocks a-d).
    pub fn demo_instance() -> Instance {
        serde_json::from_str(
            r#"{"id":"reference-demo","blocks":["a","b","c","d"],
                "initial":{"towers":[["a"],["c","b"],["d"]],"held":null},
                "goal":[{"on":["c","b"]}]}"#,
        )
        .expect("reference demo instance is valid")
    }

    pub fn demo_plan() -> Vec<Action> {
        vec![
            Action::Unstack("b".into(), "c".into()),
            Action::PutDown("b".into()),
            Action::PickUp("c".into()),
            Action::Stack("c".into(), "b".into()),
        ]
    }

    pub fn demo() -> Demo {
        Demo {
            instance: demo_instance(),
            plan: demo_plan(),
        }
    }

    /// Red on blue, yellow on orange, goal orange on red.
    pub fn query_instance() -> Instance {
        serde_json::from_str(
            r#"{"id":"reference-query","blocks":["a","b","c","d"],
                "initial":{"towers":[["b","a"],["c","d"]],"held":null},
                "goal":[{"on":["c","a"]}]}"#,
        )
        .expect("reference query instance is valid")
    }
}
