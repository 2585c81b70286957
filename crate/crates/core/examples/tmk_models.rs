//! Generates the TMK model for each variant, validates it, checks it against
//! the STRIPS operators, and lints the reference documents.
//!
//! cargo run --example tmk_models

use tmkbench::tmk::{
    generate_tmk, parse_tmk_any, semantics_mismatches, serialize_tmk, validate_tmk, verbatim,
    Dialect,
};
use tmkbench::{Variant, Vocabulary};

fn main() {
    for variant in Variant::ALL {
        let vocab = Vocabulary::builtin(variant);
        let model = generate_tmk(&vocab);
        let report = validate_tmk(&model);
        println!(
            "{variant}: {} goals, {} mechanisms, clean: {}, semantic mismatches: {}",
            model.goals.len(),
            model.mechanisms.len(),
            report.is_clean(),
            semantics_mismatches(&model, &vocab).len()
        );

        let (detected, reference) = parse_tmk_any(verbatim::for_variant(variant)).unwrap();
        assert_eq!(detected, variant);
        for lint in validate_tmk(&reference).lints {
            println!("  reference lint: {lint}");
        }
    }

    let mystery = generate_tmk(&Vocabulary::builtin(Variant::Mystery));
    let text = serialize_tmk(&mystery, Dialect::StringList);
    println!("\nMystery, string-list dialect (first goal):");
    for line in text.lines().skip(2).take(20) {
        println!("{line}");
    }
}
