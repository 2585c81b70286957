//! Prints the prompt for each (variant, mode) pair on the reference query.
//!
//! cargo run --example render_prompts -- [classic|mystery|random]

use tmkbench::prompts::{assemble_prompt, reference, PromptMode, PromptSpec, TmkSource};
use tmkbench::tmk::Dialect;
use tmkbench::Variant;

fn main() {
    let only: Option<Variant> = std::env::args().nth(1).map(|s| s.parse().unwrap());
    for variant in Variant::ALL.into_iter().filter(|v| only.is_none_or(|o| o == *v)) {
        for mode in PromptMode::ALL {
            let demo = mode.is_one_shot().then(reference::demo);
            let spec = PromptSpec::new(variant, mode, reference::query_instance(), demo);
            println!("===== {variant} / {mode} =====");
            println!("{}\n", assemble_prompt(&spec).unwrap());
        }
    }

    // TMK prompts can embed a generated model instead of the reference text.
    let mut spec = PromptSpec::new(
        Variant::Mystery,
        PromptMode::TmkOneShot,
        reference::query_instance(),
        Some(reference::demo()),
    );
    spec.tmk = TmkSource::Generated(Dialect::BooleanMap);
    let text = assemble_prompt(&spec).unwrap();
    println!("===== mystery / tmk-one-shot, generated boolean-map TMK =====");
    for line in text.lines().take(16) {
        println!("{line}");
    }
}
