//! Executable STRIPS semantics of Blocksworld.
//!
//! A [`WorldState`] stores only the support relation and the held block.
//! `clear` and `hand-empty` are derived on demand, so a state can never
//! disagree with itself about them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque block label, e.g. `"b"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(String);

impl BlockId {
    pub fn new(label: impl Into<String>) -> Self {
        let label = label.into();
        assert!(!label.is_empty(), "block labels must be non-empty");
        BlockId(label)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BlockId {
    fn from(s: &str) -> Self {
        BlockId::new(s)
    }
}

/// What a block rests on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Support {
    Table,
    Block(BlockId),
}

/// Ground fact over blocks. Used for goals and for describing states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fact {
    On(BlockId, BlockId),
    OnTable(BlockId),
    Clear(BlockId),
    Holding(BlockId),
    HandEmpty,
}

impl Fact {
    pub fn blocks(&self) -> Vec<&BlockId> {
        match self {
            Fact::On(a, b) => vec![a, b],
            Fact::OnTable(a) | Fact::Clear(a) | Fact::Holding(a) => vec![a],
            Fact::HandEmpty => vec![],
        }
    }

    pub fn predicate(&self) -> Predicate {
        match self {
            Fact::On(..) => Predicate::On,
            Fact::OnTable(_) => Predicate::OnTable,
            Fact::Clear(_) => Predicate::Clear,
            Fact::Holding(_) => Predicate::Holding,
            Fact::HandEmpty => Predicate::HandEmpty,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::On(a, b) => write!(f, "on({a}, {b})"),
            Fact::OnTable(a) => write!(f, "on-table({a})"),
            Fact::Clear(a) => write!(f, "clear({a})"),
            Fact::Holding(a) => write!(f, "holding({a})"),
            Fact::HandEmpty => write!(f, "hand-empty"),
        }
    }
}

/// The five Blocksworld predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    HandEmpty,
    Holding,
    OnTable,
    On,
    Clear,
}

impl Predicate {
    pub const ALL: [Predicate; 5] = [
        Predicate::HandEmpty,
        Predicate::Holding,
        Predicate::OnTable,
        Predicate::On,
        Predicate::Clear,
    ];

    pub fn arity(self) -> usize {
        match self {
            Predicate::HandEmpty => 0,
            Predicate::Holding | Predicate::OnTable | Predicate::Clear => 1,
            Predicate::On => 2,
        }
    }
}

/// The four operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    PickUp,
    PutDown,
    Stack,
    Unstack,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::PickUp,
        ActionKind::PutDown,
        ActionKind::Stack,
        ActionKind::Unstack,
    ];

    pub fn arity(self) -> usize {
        match self {
            ActionKind::PickUp | ActionKind::PutDown => 1,
            ActionKind::Stack | ActionKind::Unstack => 2,
        }
    }
}

/// A ground Blocksworld action.
///
/// `Stack(b, b)` and `Unstack(b, b)` are representable so that an
/// extracted plan can contain them; applying one yields
/// [`StepError::SelfStack`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    PickUp(BlockId),
    PutDown(BlockId),
    Stack(BlockId, BlockId),
    Unstack(BlockId, BlockId),
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::PickUp(_) => ActionKind::PickUp,
            Action::PutDown(_) => ActionKind::PutDown,
            Action::Stack(..) => ActionKind::Stack,
            Action::Unstack(..) => ActionKind::Unstack,
        }
    }

    pub fn blocks(&self) -> Vec<&BlockId> {
        match self {
            Action::PickUp(b) | Action::PutDown(b) => vec![b],
            Action::Stack(b, t) | Action::Unstack(b, t) => vec![b, t],
        }
    }

    /// Builds an action from a kind and an argument list of matching arity.
    pub fn from_parts(kind: ActionKind, args: &[BlockId]) -> Option<Action> {
        match (kind, args) {
            (ActionKind::PickUp, [b]) => Some(Action::PickUp(b.clone())),
            (ActionKind::PutDown, [b]) => Some(Action::PutDown(b.clone())),
            (ActionKind::Stack, [b, t]) => Some(Action::Stack(b.clone(), t.clone())),
            (ActionKind::Unstack, [b, t]) => Some(Action::Unstack(b.clone(), t.clone())),
            _ => None,
        }
    }

    /// Every ground action over `blocks`, in `Ord` order. Includes no
    /// self-stacks.
    pub fn all_over(blocks: &[BlockId]) -> Vec<Action> {
        let mut out = Vec::new();
        for b in blocks {
            out.push(Action::PickUp(b.clone()));
            out.push(Action::PutDown(b.clone()));
            for t in blocks {
                if b != t {
                    out.push(Action::Stack(b.clone(), t.clone()));
                    out.push(Action::Unstack(b.clone(), t.clone()));
                }
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::PickUp(b) => write!(f, "(pick-up {b})"),
            Action::PutDown(b) => write!(f, "(put-down {b})"),
            Action::Stack(b, t) => write!(f, "(stack {b} {t})"),
            Action::Unstack(b, t) => write!(f, "(unstack {b} {t})"),
        }
    }
}

/// Parameter-indexed literal inside an [`OperatorSchema`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaLiteral {
    pub predicate: Predicate,
    pub params: Vec<usize>,
}

/// Declarative STRIPS form of one operator: preconditions, add list and
/// delete list over the operator's parameters.
///
/// [`apply_action`] is the executable form of the same rules; tests check
/// that the two agree on every reachable state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSchema {
    pub kind: ActionKind,
    pub pre: Vec<SchemaLiteral>,
    pub add: Vec<SchemaLiteral>,
    pub del: Vec<SchemaLiteral>,
}

fn lits(items: &[(Predicate, &[usize])]) -> Vec<SchemaLiteral> {
    items
        .iter()
        .map(|(predicate, params)| SchemaLiteral {
            predicate: *predicate,
            params: params.to_vec(),
        })
        .collect()
}

/// The four Blocksworld operators in STRIPS form.
pub fn operator_schema(kind: ActionKind) -> OperatorSchema {
    use Predicate::*;
    let (pre, add, del) = match kind {
        ActionKind::PickUp => (
            lits(&[(Clear, &[0]), (OnTable, &[0]), (HandEmpty, &[])]),
            lits(&[(Holding, &[0])]),
            lits(&[(Clear, &[0]), (OnTable, &[0]), (HandEmpty, &[])]),
        ),
        ActionKind::PutDown => (
            lits(&[(Holding, &[0])]),
            lits(&[(Clear, &[0]), (OnTable, &[0]), (HandEmpty, &[])]),
            lits(&[(Holding, &[0])]),
        ),
        ActionKind::Stack => (
            lits(&[(Holding, &[0]), (Clear, &[1])]),
            lits(&[(On, &[0, 1]), (Clear, &[0]), (HandEmpty, &[])]),
            lits(&[(Holding, &[0]), (Clear, &[1])]),
        ),
        ActionKind::Unstack => (
            lits(&[(On, &[0, 1]), (Clear, &[0]), (HandEmpty, &[])]),
            lits(&[(Holding, &[0]), (Clear, &[1])]),
            lits(&[(On, &[0, 1]), (Clear, &[0]), (HandEmpty, &[])]),
        ),
    };
    OperatorSchema { kind, pre, add, del }
}

impl SchemaLiteral {
    /// Grounds the literal; `args` must cover every parameter index.
    pub fn ground(&self, args: &[BlockId]) -> Fact {
        let a = |i: usize| args[self.params[i]].clone();
        match self.predicate {
            Predicate::On => Fact::On(a(0), a(1)),
            Predicate::OnTable => Fact::OnTable(a(0)),
            Predicate::Clear => Fact::Clear(a(0)),
            Predicate::Holding => Fact::Holding(a(0)),
            Predicate::HandEmpty => Fact::HandEmpty,
        }
    }
}

/// Identity of the precondition an illegal step violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    HandNotEmpty,
    BlockNotClear,
    BlockNotOnTable,
    NotHolding,
    NotOnTarget,
    SelfStack,
    UnknownBlock,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::HandNotEmpty => "hand-not-empty",
            Rule::BlockNotClear => "block-not-clear",
            Rule::BlockNotOnTable => "block-not-on-table",
            Rule::NotHolding => "not-holding",
            Rule::NotOnTarget => "not-on-target",
            Rule::SelfStack => "self-stack",
            Rule::UnknownBlock => "unknown-block",
        };
        f.write_str(s)
    }
}

/// First violated precondition of an action.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("hand is not empty (holding {held})")]
    HandNotEmpty { held: BlockId },
    #[error("block {block} is not clear")]
    BlockNotClear { block: BlockId },
    #[error("block {block} is not on the table")]
    BlockNotOnTable { block: BlockId },
    #[error("block {block} is not being held")]
    NotHolding { block: BlockId },
    #[error("block {block} is not on top of {target}")]
    NotOnTarget { block: BlockId, target: BlockId },
    #[error("block {block} cannot be stacked on or unstacked from itself")]
    SelfStack { block: BlockId },
    #[error("block {block} does not exist in this state")]
    UnknownBlock { block: BlockId },
}

impl StepError {
    pub fn rule(&self) -> Rule {
        match self {
            StepError::HandNotEmpty { .. } => Rule::HandNotEmpty,
            StepError::BlockNotClear { .. } => Rule::BlockNotClear,
            StepError::BlockNotOnTable { .. } => Rule::BlockNotOnTable,
            StepError::NotHolding { .. } => Rule::NotHolding,
            StepError::NotOnTarget { .. } => Rule::NotOnTarget,
            StepError::SelfStack { .. } => Rule::SelfStack,
            StepError::UnknownBlock { .. } => Rule::UnknownBlock,
        }
    }
}

/// Violation of a [`WorldState`] or [`GoalSpec`] structural invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("block {0} appears more than once")]
    DuplicateBlock(BlockId),
    #[error("block {0} rests on unknown block {1}")]
    UnknownSupport(BlockId, BlockId),
    #[error("block {0} carries more than one block")]
    SharedSupport(BlockId),
    #[error("support relation has a cycle through {0}")]
    Cycle(BlockId),
    #[error("a block rests on the held block {0}")]
    SupportOnHeld(BlockId),
    #[error("goal is empty")]
    EmptyGoal,
    #[error("goal is inconsistent: {0}")]
    InconsistentGoal(String),
    #[error("goal mentions unknown block {0}")]
    UnknownGoalBlock(BlockId),
    #[error("instance block list does not match its initial state")]
    BlockSetMismatch,
}

/// Ground truth of a Blocksworld configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorldState {
    support: BTreeMap<BlockId, Support>,
    held: Option<BlockId>,
}

impl WorldState {
    /// Builds a state and checks every structural invariant.
    pub fn new(
        support: BTreeMap<BlockId, Support>,
        held: Option<BlockId>,
    ) -> Result<Self, StateError> {
        let state = WorldState { support, held };
        state.audit()?;
        Ok(state)
    }

    /// Towers are listed bottom block first.
    pub fn from_towers<T, B>(towers: T, held: Option<BlockId>) -> Result<Self, StateError>
    where
        T: IntoIterator<Item = B>,
        B: IntoIterator<Item = BlockId>,
    {
        let mut support = BTreeMap::new();
        for tower in towers {
            let mut below = Support::Table;
            for block in tower {
                if support.insert(block.clone(), below).is_some() {
                    return Err(StateError::DuplicateBlock(block));
                }
                below = Support::Block(block);
            }
        }
        if let Some(h) = &held {
            if support.contains_key(h) {
                return Err(StateError::DuplicateBlock(h.clone()));
            }
        }
        WorldState::new(support, held)
    }

    /// Checks the structural invariants. Every successful transition must
    /// leave this returning `Ok`.
    pub fn audit(&self) -> Result<(), StateError> {
        if let Some(h) = &self.held {
            if self.support.contains_key(h) {
                return Err(StateError::DuplicateBlock(h.clone()));
            }
        }
        let mut carried: BTreeSet<&BlockId> = BTreeSet::new();
        for (block, sup) in &self.support {
            if let Support::Block(below) = sup {
                if Some(below) == self.held.as_ref() {
                    return Err(StateError::SupportOnHeld(below.clone()));
                }
                if !self.support.contains_key(below) {
                    return Err(StateError::UnknownSupport(block.clone(), below.clone()));
                }
                if !carried.insert(below) {
                    return Err(StateError::SharedSupport(below.clone()));
                }
            }
        }
        for start in self.support.keys() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(Support::Block(below)) = self.support.get(cur) {
                cur = below;
                steps += 1;
                if steps > self.support.len() {
                    return Err(StateError::Cycle(start.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn blocks(&self) -> BTreeSet<BlockId> {
        let mut out: BTreeSet<BlockId> = self.support.keys().cloned().collect();
        if let Some(h) = &self.held {
            out.insert(h.clone());
        }
        out
    }

    pub fn contains(&self, block: &BlockId) -> bool {
        self.support.contains_key(block) || self.held.as_ref() == Some(block)
    }

    pub fn support_of(&self, block: &BlockId) -> Option<&Support> {
        self.support.get(block)
    }

    pub fn held(&self) -> Option<&BlockId> {
        self.held.as_ref()
    }

    pub fn hand_empty(&self) -> bool {
        self.held.is_none()
    }

    pub fn is_clear(&self, block: &BlockId) -> bool {
        if self.held.as_ref() == Some(block) || !self.support.contains_key(block) {
            return false;
        }
        !self
            .support
            .values()
            .any(|s| matches!(s, Support::Block(b) if b == block))
    }

    pub fn is_on(&self, block: &BlockId, below: &BlockId) -> bool {
        matches!(self.support.get(block), Some(Support::Block(b)) if b == below)
    }

    pub fn is_on_table(&self, block: &BlockId) -> bool {
        matches!(self.support.get(block), Some(Support::Table))
    }

    pub fn holds(&self, fact: &Fact) -> bool {
        match fact {
            Fact::On(a, b) => self.is_on(a, b),
            Fact::OnTable(a) => self.is_on_table(a),
            Fact::Clear(a) => self.is_clear(a),
            Fact::Holding(a) => self.held.as_ref() == Some(a),
            Fact::HandEmpty => self.hand_empty(),
        }
    }

    /// Every true ground fact, sorted.
    pub fn describe(&self) -> Vec<Fact> {
        let mut facts = Vec::new();
        for (block, sup) in &self.support {
            match sup {
                Support::Table => facts.push(Fact::OnTable(block.clone())),
                Support::Block(b) => facts.push(Fact::On(block.clone(), b.clone())),
            }
            if self.is_clear(block) {
                facts.push(Fact::Clear(block.clone()));
            }
        }
        match &self.held {
            Some(h) => facts.push(Fact::Holding(h.clone())),
            None => facts.push(Fact::HandEmpty),
        }
        facts.sort();
        facts
    }

    /// Towers bottom-first, ordered by bottom block label.
    pub fn towers(&self) -> Vec<Vec<BlockId>> {
        let mut above: BTreeMap<&BlockId, &BlockId> = BTreeMap::new();
        for (block, sup) in &self.support {
            if let Support::Block(b) = sup {
                above.insert(b, block);
            }
        }
        let mut towers = Vec::new();
        for (block, sup) in &self.support {
            if *sup == Support::Table {
                let mut tower = vec![block.clone()];
                let mut cur = block;
                while let Some(next) = above.get(cur) {
                    tower.push((*next).clone());
                    cur = next;
                }
                towers.push(tower);
            }
        }
        towers
    }

    fn unknown(&self, block: &BlockId) -> Result<(), StepError> {
        if self.contains(block) {
            Ok(())
        } else {
            Err(StepError::UnknownBlock {
                block: block.clone(),
            })
        }
    }

    fn require_hand_empty(&self) -> Result<(), StepError> {
        match &self.held {
            Some(h) => Err(StepError::HandNotEmpty { held: h.clone() }),
            None => Ok(()),
        }
    }

    fn require_clear(&self, block: &BlockId) -> Result<(), StepError> {
        if self.is_clear(block) {
            Ok(())
        } else {
            Err(StepError::BlockNotClear {
                block: block.clone(),
            })
        }
    }

    fn require_holding(&self, block: &BlockId) -> Result<(), StepError> {
        if self.held.as_ref() == Some(block) {
            Ok(())
        } else {
            Err(StepError::NotHolding {
                block: block.clone(),
            })
        }
    }
}

/// Applies one action, returning the successor state. `state` is untouched.
pub fn apply_action(state: &WorldState, action: &Action) -> Result<WorldState, StepError> {
    match action {
        Action::PickUp(b) => {
            state.unknown(b)?;
            state.require_hand_empty()?;
            if !state.is_on_table(b) {
                return Err(StepError::BlockNotOnTable { block: b.clone() });
            }
            state.require_clear(b)?;
            let mut next = state.clone();
            next.support.remove(b);
            next.held = Some(b.clone());
            Ok(next)
        }
        Action::PutDown(b) => {
            state.unknown(b)?;
            state.require_holding(b)?;
            let mut next = state.clone();
            next.held = None;
            next.support.insert(b.clone(), Support::Table);
            Ok(next)
        }
        Action::Stack(b, t) => {
            if b == t {
                return Err(StepError::SelfStack { block: b.clone() });
            }
            state.unknown(b)?;
            state.unknown(t)?;
            state.require_holding(b)?;
            state.require_clear(t)?;
            let mut next = state.clone();
            next.held = None;
            next.support.insert(b.clone(), Support::Block(t.clone()));
            Ok(next)
        }
        Action::Unstack(b, t) => {
            if b == t {
                return Err(StepError::SelfStack { block: b.clone() });
            }
            state.unknown(b)?;
            state.unknown(t)?;
            state.require_hand_empty()?;
            if !state.is_on(b, t) {
                return Err(StepError::NotOnTarget {
                    block: b.clone(),
                    target: t.clone(),
                });
            }
            state.require_clear(b)?;
            let mut next = state.clone();
            next.support.remove(b);
            next.held = Some(b.clone());
            Ok(next)
        }
    }
}

/// Every state visited by a plan, starting with the initial one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<WorldState>,
}

impl Trace {
    pub fn final_state(&self) -> &WorldState {
        self.states.last().expect("trace holds at least the initial state")
    }
}

/// First illegal step of a plan. `step_index` is zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step_index} is illegal: {error}")]
pub struct PlanFailure {
    pub step_index: usize,
    pub error: StepError,
    /// States reached before the illegal step.
    pub trace: Trace,
}

/// Applies `plan` left to right, stopping at the first illegal action.
pub fn execute_plan(state: &WorldState, plan: &[Action]) -> Result<Trace, PlanFailure> {
    let mut states = Vec::with_capacity(plan.len() + 1);
    states.push(state.clone());
    for (step_index, action) in plan.iter().enumerate() {
        let current = states.last().expect("non-empty");
        match apply_action(current, action) {
            Ok(next) => states.push(next),
            Err(error) => {
                return Err(PlanFailure {
                    step_index,
                    error,
                    trace: Trace { states },
                })
            }
        }
    }
    Ok(Trace { states })
}

/// Conjunction of ground facts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Fact>", into = "Vec<Fact>")]
pub struct GoalSpec {
    facts: Vec<Fact>,
}

impl GoalSpec {
    pub fn new(facts: Vec<Fact>) -> Result<Self, StateError> {
        if facts.is_empty() {
            return Err(StateError::EmptyGoal);
        }
        check_goal_consistency(&facts)?;
        let mut facts = facts;
        facts.sort();
        facts.dedup();
        Ok(GoalSpec { facts })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn blocks(&self) -> BTreeSet<BlockId> {
        self.facts
            .iter()
            .flat_map(|f| f.blocks().into_iter().cloned())
            .collect()
    }
}

impl TryFrom<Vec<Fact>> for GoalSpec {
    type Error = StateError;

    fn try_from(facts: Vec<Fact>) -> Result<Self, Self::Error> {
        GoalSpec::new(facts)
    }
}

impl From<GoalSpec> for Vec<Fact> {
    fn from(goal: GoalSpec) -> Self {
        goal.facts
    }
}

fn check_goal_consistency(facts: &[Fact]) -> Result<(), StateError> {
    let bad = |msg: String| Err(StateError::InconsistentGoal(msg));
    let mut placed: BTreeMap<&BlockId, &Fact> = BTreeMap::new();
    let mut carrier: BTreeMap<&BlockId, &BlockId> = BTreeMap::new();
    let mut held: Option<&BlockId> = None;
    let mut hand_empty = false;
    for fact in facts {
        match fact {
            Fact::On(a, b) => {
                if a == b {
                    return bad(format!("{fact} stacks a block on itself"));
                }
                if let Some(prev) = carrier.insert(b, a) {
                    if prev != a {
                        return bad(format!("{prev} and {a} both on {b}"));
                    }
                }
            }
            Fact::HandEmpty => hand_empty = true,
            Fact::Holding(a) => {
                if let Some(prev) = held {
                    if prev != a {
                        return bad(format!("holding both {prev} and {a}"));
                    }
                }
                held = Some(a);
            }
            Fact::Clear(_) => continue,
            Fact::OnTable(_) => {}
        }
        if let Some(block) = placement_subject(fact) {
            if let Some(prev) = placed.insert(block, fact) {
                if prev != fact {
                    return bad(format!("{prev} conflicts with {fact}"));
                }
            }
        }
    }
    if hand_empty && held.is_some() {
        return bad("hand-empty conflicts with holding".into());
    }
    for fact in facts {
        if let Fact::Clear(a) = fact {
            if carrier.contains_key(a) {
                return bad(format!("{fact} conflicts with a block on {a}"));
            }
            if held == Some(a) {
                return bad(format!("{fact} conflicts with holding({a})"));
            }
        }
    }
    // on-chains must be acyclic
    for start in carrier.values() {
        let mut cur = *start;
        let mut steps = 0;
        while let Some(Fact::On(_, below)) = placed.get(cur) {
            cur = below;
            steps += 1;
            if steps > facts.len() {
                return bad(format!("cyclic on-chain through {start}"));
            }
        }
    }
    Ok(())
}

fn placement_subject(fact: &Fact) -> Option<&BlockId> {
    match fact {
        Fact::On(a, _) | Fact::OnTable(a) | Fact::Holding(a) => Some(a),
        _ => None,
    }
}

/// True iff every goal fact holds in `state`.
pub fn satisfies(state: &WorldState, goal: &GoalSpec) -> bool {
    goal.facts().iter().all(|f| state.holds(f))
}

/// A planning problem: ordered block list, initial state and goal.
///
/// The block order drives statement rendering (and, for the Classic
/// vocabulary, the colour assigned to each block).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    pub id: String,
    pub blocks: Vec<BlockId>,
    pub initial: WorldState,
    pub goal: GoalSpec,
}

impl Instance {
    pub fn new(
        id: impl Into<String>,
        blocks: Vec<BlockId>,
        initial: WorldState,
        goal: GoalSpec,
    ) -> Result<Self, StateError> {
        let listed: BTreeSet<BlockId> = blocks.iter().cloned().collect();
        if listed.len() != blocks.len() {
            let dup = blocks
                .iter()
                .find(|b| blocks.iter().filter(|c| c == b).count() > 1)
                .cloned()
                .expect("duplicate exists");
            return Err(StateError::DuplicateBlock(dup));
        }
        if listed != initial.blocks() {
            return Err(StateError::BlockSetMismatch);
        }
        if let Some(b) = goal.blocks().into_iter().find(|b| !listed.contains(b)) {
            return Err(StateError::UnknownGoalBlock(b));
        }
        Ok(Instance {
            id: id.into(),
            blocks,
            initial,
            goal,
        })
    }

    /// Position of a block in the instance's block list.
    pub fn index_of(&self, block: &BlockId) -> Option<usize> {
        self.blocks.iter().position(|b| b == block)
    }

    /// True when `plan` is legal from the initial state and reaches the goal.
    pub fn plan_is_correct(&self, plan: &[Action]) -> bool {
        execute_plan(&self.initial, plan)
            .map(|t| satisfies(t.final_state(), &self.goal))
            .unwrap_or(false)
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    id: String,
    blocks: Vec<BlockId>,
    initial: RawState,
    goal: GoalSpec,
}

/// Towers bottom-first plus the held block.
#[derive(Serialize, Deserialize)]
struct RawState {
    towers: Vec<Vec<BlockId>>,
    #[serde(default)]
    held: Option<BlockId>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = StateError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        let initial = WorldState::from_towers(raw.initial.towers, raw.initial.held)?;
        Instance::new(raw.id, raw.blocks, initial, raw.goal)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            id: inst.id,
            blocks: inst.blocks,
            initial: RawState {
                towers: inst.initial.towers(),
                held: inst.initial.held.clone(),
            },
            goal: inst.goal,
        }
    }
}
