//! Helpers shared by the integration and acceptance targets. The executor
//! and search here are deliberately separate from the library's so they
//! can be used as oracles against it.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use serde::Deserialize;
use tmkbench::bench::Dataset;
use tmkbench::{Action, Fact, Instance, Variant};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Pos {
    Table,
    On(String),
    Hand,
}

/// Block positions keyed by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefState(HashMap<String, Pos>);

impl RefState {
    pub fn of(instance: &Instance) -> RefState {
        let mut map = HashMap::new();
        for tower in instance.initial.towers() {
            let mut below: Option<String> = None;
            for block in tower {
                let pos = match below {
                    None => Pos::Table,
                    Some(b) => Pos::On(b),
                };
                map.insert(block.as_str().to_string(), pos);
                below = Some(block.as_str().to_string());
            }
        }
        if let Some(b) = instance.initial.held() {
            map.insert(b.as_str().to_string(), Pos::Hand);
        }
        RefState(map)
    }

    fn clear(&self, x: &str) -> bool {
        self.0.get(x).is_some_and(|p| *p != Pos::Hand)
            && !self.0.values().any(|p| *p == Pos::On(x.to_string()))
    }

    fn hand_empty(&self) -> bool {
        !self.0.values().any(|p| *p == Pos::Hand)
    }

    /// One STRIPS step, or `None` when a precondition fails.
    pub fn step(&self, action: &Action) -> Option<RefState> {
        let mut next = self.clone();
        match action {
            Action::PickUp(x) => {
                let x = x.as_str();
                if !(self.hand_empty() && self.0.get(x) == Some(&Pos::Table) && self.clear(x)) {
                    return None;
                }
                next.0.insert(x.into(), Pos::Hand);
            }
            Action::PutDown(x) => {
                if self.0.get(x.as_str()) != Some(&Pos::Hand) {
                    return None;
                }
                next.0.insert(x.as_str().into(), Pos::Table);
            }
            Action::Stack(x, y) => {
                let (x, y) = (x.as_str(), y.as_str());
                if x == y || self.0.get(x) != Some(&Pos::Hand) || !self.clear(y) {
                    return None;
                }
                next.0.insert(x.into(), Pos::On(y.into()));
            }
            Action::Unstack(x, y) => {
                let (x, y) = (x.as_str(), y.as_str());
                if !(self.hand_empty()
                    && self.0.get(x) == Some(&Pos::On(y.into()))
                    && self.clear(x))
                {
                    return None;
                }
                next.0.insert(x.into(), Pos::Hand);
            }
        }
        Some(next)
    }

    pub fn holds(&self, fact: &Fact) -> bool {
        match fact {
            Fact::On(x, y) => self.0.get(x.as_str()) == Some(&Pos::On(y.as_str().into())),
            Fact::OnTable(x) => self.0.get(x.as_str()) == Some(&Pos::Table),
            Fact::Clear(x) => self.clear(x.as_str()),
            Fact::Holding(x) => self.0.get(x.as_str()) == Some(&Pos::Hand),
            Fact::HandEmpty => self.hand_empty(),
        }
    }
}

/// Outcome of running a plan with the reference executor.
#[derive(Debug, PartialEq, Eq)]
pub enum RefOutcome {
    Solved,
    GoalUnmet,
    FailsAt(usize),
}

pub fn ref_run(instance: &Instance, plan: &[Action]) -> RefOutcome {
    let mut state = RefState::of(instance);
    for (i, action) in plan.iter().enumerate() {
        match state.step(action) {
            Some(next) => state = next,
            None => return RefOutcome::FailsAt(i),
        }
    }
    if instance.goal.facts().iter().all(|f| state.holds(f)) {
        RefOutcome::Solved
    } else {
        RefOutcome::GoalUnmet
    }
}

fn inverse(a: &Action, b: &Action) -> bool {
    matches!((a, b),
        (Action::PickUp(x), Action::PutDown(y)) | (Action::PutDown(x), Action::PickUp(y)) if x == y)
        || matches!((a, b),
        (Action::Unstack(x, p), Action::Stack(y, q)) | (Action::Stack(x, p), Action::Unstack(y, q))
            if x == y && p == q)
}

/// Every ground action over `blocks`, in no particular order.
pub fn ref_actions(instance: &Instance) -> Vec<Action> {
    let mut out = Vec::new();
    for x in &instance.blocks {
        out.push(Action::PickUp(x.clone()));
        out.push(Action::PutDown(x.clone()));
        for y in &instance.blocks {
            if x != y {
                out.push(Action::Stack(x.clone(), y.clone()));
                out.push(Action::Unstack(x.clone(), y.clone()));
            }
        }
    }
    out
}

fn dfs(
    instance: &Instance,
    state: &RefState,
    actions: &[Action],
    last: Option<&Action>,
    depth: usize,
) -> bool {
    if instance.goal.facts().iter().all(|f| state.holds(f)) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    actions.iter().any(|a| {
        if last.is_some_and(|l| inverse(l, a)) {
            return false;
        }
        state
            .step(a)
            .is_some_and(|next| dfs(instance, &next, actions, Some(a), depth - 1))
    })
}

/// Shortest plan length by iterative deepening.
pub fn iddfs_length(instance: &Instance) -> usize {
    let start = RefState::of(instance);
    let actions = ref_actions(instance);
    (0..)
        .find(|&depth| dfs(instance, &start, &actions, None, depth))
        .unwrap()
}

#[derive(Debug, Deserialize)]
pub struct CorpusCase {
    pub name: String,
    pub variant: Variant,
    pub response: String,
    /// Canonical lines in the case's own vocabulary.
    pub expected: Vec<String>,
}

pub fn extraction_corpus() -> Vec<CorpusCase> {
    let path = fixtures().join("extraction/corpus.json");
    let text = std::fs::read_to_string(&path).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Instances on which every two-line swap of both the demo plan and the
/// instance's own shortest plan fails.
pub fn scramble_dataset() -> Dataset {
    Dataset::load(&fixtures().join("datasets/scramble")).unwrap()
}

pub fn oracle_dataset() -> Dataset {
    Dataset::load(&fixtures().join("datasets/mock30")).unwrap()
}

/// All plans obtained from `plan` by swapping two unequal entries.
pub fn swaps(plan: &[Action]) -> Vec<Vec<Action>> {
    let mut out = Vec::new();
    for i in 0..plan.len() {
        for j in i + 1..plan.len() {
            if plan[i] != plan[j] {
                let mut p = plan.to_vec();
                p.swap(i, j);
                out.push(p);
            }
        }
    }
    out
}
