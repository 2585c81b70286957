//! A five-instance run against one OpenAI-compatible chat endpoint.
//!
//! The key is read from the environment variable named in the config and is
//! never written anywhere.
//!
//! TMKBENCH_API_KEY=... cargo run --example live_smoke -- <endpoint-url> <model>

use tmkbench::bench::{load_records, run_matrix, score, Dataset, RunOptions};
use tmkbench::gateway::{ModelConfig, Responder, RetryPolicy};
use tmkbench::oracle::random_instance;
use tmkbench::prompts::PromptMode;
use tmkbench::Variant;

const KEY_ENV: &str = "TMKBENCH_API_KEY";

fn main() {
    let mut args = std::env::args().skip(1);
    let (Some(endpoint), Some(model)) = (args.next(), args.next()) else {
        eprintln!("usage: live_smoke <endpoint-url> <model>  (key in ${KEY_ENV})");
        std::process::exit(1);
    };
    if std::env::var(KEY_ENV).is_err() {
        eprintln!("${KEY_ENV} is not set");
        std::process::exit(1);
    }
    let config = ModelConfig {
        name: model.clone(),
        endpoint,
        model: Some(model),
        credential_env: KEY_ENV.into(),
        temperature: 0.0,
        max_output_tokens: Some(1024),
        timeout_secs: 120,
        retry: RetryPolicy::default(),
    };
    let dataset = Dataset {
        instances: (0..5).map(|seed| random_instance(4, seed).unwrap()).collect(),
    };
    let dir = tempfile::tempdir().unwrap();
    let options = RunOptions::new(dir.path().join("live.jsonl"));
    let summary = run_matrix(
        &dataset,
        &[Responder::Remote(config)],
        &[Variant::Classic],
        &[PromptMode::PlainOneShot, PromptMode::TmkOneShot],
        &options,
    )
    .unwrap();
    println!("{} trials, {} failed to get a completion", summary.written, summary.failed);
    let records = load_records(&options.log).unwrap().records;
    for r in &records {
        println!("{} {}: {:?}", r.instance_id, r.mode, r.verdict);
    }
    print!("{}", score(&records).render());
}
