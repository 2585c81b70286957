//! Runs the reference demonstration plan through the validator in all three
//! vocabularies, then shows what a broken plan reports.
//!
//! cargo run --example validate_reference_plans

use tmkbench::bench::judge;
use tmkbench::prompts::reference;
use tmkbench::{execute_plan, Variant, Vocabulary};

fn main() {
    let instance = reference::demo_instance();
    let plan = reference::demo_plan();

    for variant in Variant::ALL {
        let vocab = Vocabulary::builtin(variant);
        let text: Vec<String> = plan.iter().map(|a| vocab.render_action(a)).collect();
        let judgement = judge(&vocab, &instance, &text.join("\n"));
        println!("{variant}:");
        for line in &text {
            println!("    {line}");
        }
        println!("  -> {:?}", judgement.verdict);
    }

    // Dropping the first step leaves the blue block on the orange one.
    let failure = execute_plan(&instance.initial, &plan[1..]).unwrap_err();
    println!(
        "without step 1: step {} fails: {}",
        failure.step_index + 1,
        failure.error
    );
}
