//! Seeded random instances and their shortest plans, plus the size of the
//! reachable state space for small block counts.
//!
//! cargo run --example oracle_solve -- [blocks] [seed]

use tmkbench::oracle::{arrangement_count, enumerate_reachable, random_instance, solve_optimal};
use tmkbench::{Variant, Vocabulary};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(5, |s| s.parse().unwrap());
    let seed: u64 = args.next().map_or(42, |s| s.parse().unwrap());

    let instance = random_instance(n, seed).unwrap();
    let vocab = Vocabulary::builtin(Variant::Classic);
    let towers: Vec<String> = instance
        .initial
        .towers()
        .iter()
        .map(|t| t.iter().map(|b| b.as_str()).collect::<Vec<_>>().join(""))
        .collect();
    println!("{}: towers (bottom first) {}", instance.id, towers.join(" | "));
    let goal: Vec<String> = instance.goal.facts().iter().map(|f| vocab.render_fact(f)).collect();
    println!("goal: {}", goal.join(", "));

    let result = solve_optimal(&instance).unwrap();
    println!("{} steps, {} states expanded", result.plan.len(), result.expanded);
    for action in &result.plan {
        println!("  {}", vocab.render_action(action));
    }

    println!("\nblocks  arrangements  reachable");
    for k in 2..=5 {
        let reachable = enumerate_reachable(&random_instance(k, 0).unwrap()).len();
        println!("{k:>6}  {:>12}  {reachable:>9}", arrangement_count(k));
    }
}
