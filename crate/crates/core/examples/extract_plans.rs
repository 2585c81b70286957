//! Lenient extraction from messy responses, with the reasons for every
//! dropped line.
//!
//! cargo run --example extract_plans

use tmkbench::extract::extract_plan;
use tmkbench::vocabulary::letter_label;
use tmkbench::{Variant, Vocabulary};

const RESPONSES: &[(Variant, &str)] = &[
    (
        Variant::Classic,
        "Sure, here is the plan.\n[PLAN]\n1. unstack the blue block from on top of the orange block\n\
         The hand now holds blue.\n2. put down the blue block\n3. pick up the red block\n[PLAN END]",
    ),
    (Variant::Mystery, "- feast obj b from o c\n- succumb o b\n- attack b and c"),
    (
        Variant::Random,
        "[PLAN]\nStep 1: 2ijg9q8swj2shjel stack object b from object a\nStep 2: stack object c from object b\n[PLAN-END]",
    ),
];

fn main() {
    let blocks: Vec<_> = (0..4).map(letter_label).collect();
    for (variant, response) in RESPONSES {
        let vocab = Vocabulary::builtin(*variant);
        println!("--- {variant} ---");
        match extract_plan(&vocab, &blocks, response) {
            Ok(plan) => {
                for action in &plan.actions {
                    println!("  {}", vocab.render_action(action));
                }
                for dropped in &plan.dropped_lines {
                    println!("  dropped line {} ({}): {}", dropped.line, dropped.skip, dropped.text);
                }
            }
            Err(e) => println!("  {e}"),
        }
    }
}
