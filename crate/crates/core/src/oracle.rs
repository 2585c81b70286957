//! Ground truth: an exact shortest-plan search, the reachable state space
//! and seeded random instances.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::{
    apply_action, satisfies, Action, BlockId, Fact, GoalSpec, Instance, WorldState,
};
use crate::vocabulary::letter_label;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerResult {
    pub plan: Vec<Action>,
    /// States taken off the frontier.
    pub expanded: usize,
    pub optimal: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("no state reachable from the initial state satisfies the goal")]
    Unsolvable,
    #[error("instances need between 2 and {max} blocks, got {got}")]
    BlockCount { got: usize, max: usize },
}

/// Breadth-first search from `initial`. Successors are generated in
/// `Action` order, so ties always resolve the same way.
pub fn solve(initial: &WorldState, goal: &GoalSpec) -> Result<PlannerResult, OracleError> {
    let blocks: Vec<BlockId> = initial.blocks().into_iter().collect();
    let actions = Action::all_over(&blocks);
    if satisfies(initial, goal) {
        return Ok(PlannerResult {
            plan: vec![],
            expanded: 0,
            optimal: true,
        });
    }
    let mut parent: HashMap<WorldState, Option<(WorldState, Action)>> = HashMap::new();
    parent.insert(initial.clone(), None);
    let mut queue = VecDeque::from([initial.clone()]);
    let mut expanded = 0;
    while let Some(state) = queue.pop_front() {
        expanded += 1;
        for action in &actions {
            let Ok(next) = apply_action(&state, action) else {
                continue;
            };
            if parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some((state.clone(), action.clone())));
            if satisfies(&next, goal) {
                let mut plan = Vec::new();
                let mut cursor = next;
                while let Some(Some((prev, step))) = parent.get(&cursor) {
                    plan.push(step.clone());
                    cursor = prev.clone();
                }
                plan.reverse();
                return Ok(PlannerResult {
                    plan,
                    expanded,
                    optimal: true,
                });
            }
            queue.push_back(next);
        }
    }
    Err(OracleError::Unsolvable)
}

/// A shortest plan for `instance`.
pub fn solve_optimal(instance: &Instance) -> Result<PlannerResult, OracleError> {
    solve(&instance.initial, &instance.goal)
}

/// Every state reachable from the initial state under legal actions.
pub fn enumerate_reachable(instance: &Instance) -> BTreeSet<WorldState> {
    reachable_from(&instance.initial)
}

pub fn reachable_from(initial: &WorldState) -> BTreeSet<WorldState> {
    let blocks: Vec<BlockId> = initial.blocks().into_iter().collect();
    let actions = Action::all_over(&blocks);
    let mut seen = BTreeSet::from([initial.clone()]);
    let mut queue = VecDeque::from([initial.clone()]);
    while let Some(state) = queue.pop_front() {
        for action in &actions {
            if let Ok(next) = apply_action(&state, action) {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen
}

/// Number of ground arrangements of `n` labeled blocks (sets of ordered
/// towers): 1, 1, 3, 13, 73, 501, ...
pub fn arrangement_count(n: usize) -> u128 {
    let mut f = vec![1u128; n + 1];
    for m in 1..=n {
        f[m] = (1..=m)
            .map(|s| binomial(m - 1, s - 1) * factorial(s) * f[m - s])
            .sum();
    }
    f[n]
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Samples towers uniformly over all ground arrangements of `blocks`.
///
/// The tower holding the first remaining block has size `s` with weight
/// `C(m-1, s-1) * s! * f(m-s)`, where `f` counts arrangements; its
/// companions and their order are then drawn uniformly.
pub fn sample_arrangement<R: Rng>(blocks: &[BlockId], rng: &mut R) -> Vec<Vec<BlockId>> {
    let mut remaining: Vec<BlockId> = blocks.to_vec();
    let mut towers = Vec::new();
    while !remaining.is_empty() {
        let m = remaining.len();
        let weights: Vec<u128> = (1..=m)
            .map(|s| binomial(m - 1, s - 1) * factorial(s) * arrangement_count(m - s))
            .collect();
        let mut pick = rng.random_range(0..weights.iter().sum::<u128>());
        let mut size = m;
        for (i, w) in weights.iter().enumerate() {
            if pick < *w {
                size = i + 1;
                break;
            }
            pick -= w;
        }
        let first = remaining.remove(0);
        remaining.shuffle(rng);
        let mut tower: Vec<BlockId> = remaining.drain(..size - 1).collect();
        tower.push(first);
        tower.shuffle(rng);
        remaining.sort();
        towers.push(tower);
    }
    towers.sort();
    towers
}

pub const MAX_RANDOM_BLOCKS: usize = 26;

/// Deterministic in `seed`. The initial state is uniform over ground
/// arrangements; the goal is the `on` facts of an independently sampled
/// arrangement that has at least one and is not already satisfied.
pub fn random_instance(n_blocks: usize, seed: u64) -> Result<Instance, OracleError> {
    if !(2..=MAX_RANDOM_BLOCKS).contains(&n_blocks) {
        return Err(OracleError::BlockCount {
            got: n_blocks,
            max: MAX_RANDOM_BLOCKS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<BlockId> = (0..n_blocks).map(letter_label).collect();
    let initial = WorldState::from_towers(sample_arrangement(&blocks, &mut rng), None)
        .expect("sampled towers are a valid state");
    let goal = loop {
        let towers = sample_arrangement(&blocks, &mut rng);
        let facts: Vec<Fact> = towers
            .iter()
            .flat_map(|t| t.windows(2).map(|w| Fact::On(w[1].clone(), w[0].clone())))
            .collect();
        if facts.is_empty() {
            continue;
        }
        let goal = GoalSpec::new(facts).expect("on facts of one arrangement are consistent");
        if !satisfies(&initial, &goal) {
            break goal;
        }
    };
    Ok(Instance::new(format!("bw{n_blocks}-{seed}"), blocks, initial, goal)
        .expect("generated instance is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use crate::domain::{execute_plan, operator_schema};

    fn ids(n: usize) -> Vec<BlockId> {
        (0..n).map(letter_label).collect()
    }

    fn all_on_table(n: usize) -> WorldState {
        WorldState::from_towers(ids(n).into_iter().map(|b| vec![b]), None).unwrap()
    }

    fn demo() -> Instance {
        serde_json::from_str(
            r#"{"id":"demo","blocks":["a","b","c","d"],
                "initial":{"towers":[["a"],["c","b"],["d"]]},
                "goal":[{"on":["c","b"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn demo_task_takes_four_steps() {
        let result = solve_optimal(&demo()).unwrap();
        assert_eq!(result.plan.len(), 4);
        assert!(demo().plan_is_correct(&result.plan));
    }

    #[test]
    fn satisfied_goal_gives_empty_plan() {
        let inst = demo();
        let goal = GoalSpec::new(vec![Fact::On("b".into(), "c".into())]).unwrap();
        assert!(solve(&inst.initial, &goal).unwrap().plan.is_empty());
    }

    #[test]
    fn three_tower_from_table_takes_four_steps() {
        let goal = GoalSpec::new(vec![
            Fact::On("a".into(), "b".into()),
            Fact::On("b".into(), "c".into()),
        ])
        .unwrap();
        let plan = solve(&all_on_table(3), &goal).unwrap().plan;
        assert_eq!(
            plan,
            vec![
                Action::PickUp("b".into()),
                Action::Stack("b".into(), "c".into()),
                Action::PickUp("a".into()),
                Action::Stack("a".into(), "b".into()),
            ]
        );
    }

    /// Counts by construction: ground arrangements of n blocks, plus one
    /// held block times arrangements of the rest.
    fn brute_force_count(n: usize) -> usize {
        let f = |m: usize| arrangement_count(m) as usize;
        f(n) + n * f(n - 1)
    }

    #[test]
    fn reachable_counts_match_brute_force() {
        assert_eq!(reachable_from(&all_on_table(1)).len(), 2);
        assert_eq!(reachable_from(&all_on_table(2)).len(), 5);
        assert_eq!(reachable_from(&all_on_table(3)).len(), 22);
        for n in 1..=5 {
            assert_eq!(reachable_from(&all_on_table(n)).len(), brute_force_count(n), "n={n}");
        }
    }

    #[test]
    fn reachable_set_is_closed() {
        let states = reachable_from(&all_on_table(3));
        for s in &states {
            for a in Action::all_over(&ids(3)) {
                if let Ok(next) = apply_action(s, &a) {
                    assert!(states.contains(&next));
                }
            }
        }
    }

    #[test]
    fn transitions_agree_with_operator_schemas() {
        for state in reachable_from(&all_on_table(3)) {
            let facts: BTreeSet<Fact> = state.describe().into_iter().collect();
            for action in Action::all_over(&ids(3)) {
                let schema = operator_schema(action.kind());
                let args: Vec<BlockId> = action.blocks().into_iter().cloned().collect();
                let ground = |lits: &[crate::domain::SchemaLiteral]| -> BTreeSet<Fact> {
                    lits.iter().map(|l| l.ground(&args)).collect()
                };
                let pre = ground(&schema.pre);
                match apply_action(&state, &action) {
                    Ok(next) => {
                        assert!(pre.is_subset(&facts), "{action} applied without {pre:?}");
                        let expected: BTreeSet<Fact> = facts
                            .difference(&ground(&schema.del))
                            .cloned()
                            .chain(ground(&schema.add))
                            .collect();
                        let got: BTreeSet<Fact> = next.describe().into_iter().collect();
                        assert_eq!(got, expected, "{action}");
                    }
                    Err(_) => assert!(!pre.is_subset(&facts), "{action} refused"),
                }
            }
        }
    }

    #[test]
    fn arrangement_counts() {
        let counts: Vec<u128> = (0..7).map(arrangement_count).collect();
        assert_eq!(counts, [1, 1, 3, 13, 73, 501, 4051]);
        assert!(arrangement_count(MAX_RANDOM_BLOCKS) > 0);
    }

    #[test]
    fn random_instances_are_deterministic_and_unsatisfied() {
        assert_eq!(random_instance(3, 7).unwrap(), random_instance(3, 7).unwrap());
        for seed in 0..50 {
            let inst = random_instance(4, seed).unwrap();
            assert!(!satisfies(&inst.initial, &inst.goal));
            let plan = solve_optimal(&inst).unwrap().plan;
            assert!(execute_plan(&inst.initial, &plan).is_ok());
            assert!(inst.plan_is_correct(&plan));
        }
        assert!(matches!(random_instance(1, 0), Err(OracleError::BlockCount { .. })));
    }

    #[test]
    fn every_three_block_arrangement_is_sampled() {
        let mut seen: BTreeMap<Vec<Vec<BlockId>>, usize> = BTreeMap::new();
        for seed in 0..1000 {
            *seen.entry(random_instance(3, seed).unwrap().initial.towers()).or_default() += 1;
        }
        assert_eq!(seen.len(), 13);
        // Uniform: expected 1000/13 ≈ 77 per arrangement.
        assert!(seen.values().all(|&c| (40..=120).contains(&c)), "{seen:?}");
    }
}
