mod common;

use std::collections::VecDeque;

use common::{ref_actions, ref_run, RefOutcome, RefState};
use proptest::prelude::*;
use tmkbench::bench::{judge, Verdict};
use tmkbench::oracle::{arrangement_count, enumerate_reachable, random_instance, solve_optimal};
use tmkbench::{apply_action, execute_plan, satisfies, Action, Instance, Variant, Vocabulary};

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=4, any::<u64>()).prop_map(|(n, seed)| random_instance(n, seed).unwrap())
}

/// An instance with a plan that is its shortest plan after a few random
/// edits, so every verdict kind shows up.
fn instance_and_plan() -> impl Strategy<Value = (Instance, Vec<Action>)> {
    instance().prop_flat_map(|inst| {
        let plan = solve_optimal(&inst).unwrap().plan;
        let actions = Action::all_over(&inst.blocks);
        let edits = prop::collection::vec(
            (0usize..3, any::<prop::sample::Index>(), prop::sample::select(actions)),
            0..3,
        );
        (Just(inst), Just(plan), edits)
    })
    .prop_map(|(inst, mut plan, edits)| {
        for (kind, at, action) in edits {
            let i = at.index(plan.len() + 1);
            match kind {
                0 => plan.insert(i, action),
                1 if i < plan.len() => {
                    plan.remove(i);
                }
                _ if i < plan.len() => plan[i] = action,
                _ => plan.push(action),
            }
        }
        (inst, plan)
    })
}

fn library_verdict(instance: &Instance, plan: &[Action]) -> RefOutcome {
    match execute_plan(&instance.initial, plan) {
        Err(f) => RefOutcome::FailsAt(f.step_index),
        Ok(t) if satisfies(t.final_state(), &instance.goal) => RefOutcome::Solved,
        Ok(_) => RefOutcome::GoalUnmet,
    }
}

proptest! {
    #[test]
    fn transitions_preserve_invariants(inst in instance(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..30)) {
        let actions = Action::all_over(&inst.blocks);
        let mut state = inst.initial.clone();
        for pick in picks {
            if let Ok(next) = apply_action(&state, pick.get(&actions)) {
                prop_assert!(next.audit().is_ok());
                prop_assert_eq!(next.blocks(), state.blocks());
                state = next;
            }
        }
    }

    #[test]
    fn validator_agrees_with_reference((inst, plan) in instance_and_plan()) {
        prop_assert_eq!(library_verdict(&inst, &plan), ref_run(&inst, &plan));
    }

    #[test]
    fn verdicts_survive_renaming((inst, plan) in instance_and_plan()) {
        let verdicts: Vec<Verdict> = Variant::ALL
            .into_iter()
            .map(|v| {
                let vocab = Vocabulary::builtin(v);
                let text: Vec<String> = plan.iter().map(|a| vocab.render_action(a)).collect();
                judge(&vocab, &inst, &format!("[PLAN]\n{}\n[PLAN END]", text.join("\n"))).verdict
            })
            .collect();
        prop_assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "{:?}", verdicts);
    }

    #[test]
    fn oracle_plans_are_valid_and_optimal(inst in (3usize..=4, any::<u64>()).prop_map(|(n, s)| random_instance(n, s).unwrap())) {
        let plan = solve_optimal(&inst).unwrap().plan;
        prop_assert_eq!(ref_run(&inst, &plan), RefOutcome::Solved);
        prop_assert_eq!(plan.len(), common::iddfs_length(&inst));
    }
}

/// Reachable states by breadth-first search with the reference executor.
fn reference_reachable(inst: &Instance) -> usize {
    let start = RefState::of(inst);
    let actions = ref_actions(inst);
    let mut seen = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for a in &actions {
            if let Some(next) = s.step(a) {
                if !seen.contains(&next) {
                    seen.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
    }
    seen.len()
}

#[test]
fn reachable_sets_are_closed_and_complete() {
    for n in 2..=4 {
        let inst = random_instance(n, 3).unwrap();
        let reachable = enumerate_reachable(&inst);
        for state in &reachable {
            assert!(state.audit().is_ok());
            for action in Action::all_over(&inst.blocks) {
                if let Ok(next) = apply_action(state, &action) {
                    assert!(reachable.contains(&next));
                }
            }
        }
        let held = n as u128 * arrangement_count(n - 1);
        assert_eq!(reachable.len() as u128, arrangement_count(n) + held, "{n} blocks");
        assert_eq!(reachable.len(), reference_reachable(&inst), "{n} blocks");
    }
}
