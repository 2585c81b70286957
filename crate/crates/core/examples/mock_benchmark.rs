//! The full trial matrix against the offline responders. The oracle scores
//! 100 and the scrambler 0; the demo-echoer only scores when the demo plan
//! happens to solve a task.
//!
//! cargo run --release --example mock_benchmark -- [instances]

use tmkbench::bench::{load_records, run_matrix, score, Dataset, RunOptions};
use tmkbench::gateway::Responder;
use tmkbench::oracle::random_instance;
use tmkbench::prompts::PromptMode;
use tmkbench::Variant;

fn main() {
    let count: u64 = std::env::args().nth(1).map_or(20, |s| s.parse().unwrap());
    let instances = (0..count)
        .map(|seed| random_instance(3 + (seed % 3) as usize, seed).unwrap())
        .collect();
    let dataset = Dataset { instances };

    let dir = tempfile::tempdir().unwrap();
    let options = RunOptions::new(dir.path().join("records.jsonl"));
    let models = [
        Responder::Oracle,
        Responder::Scramble { seed: 3 },
        Responder::EchoDemo,
    ];
    let summary = run_matrix(&dataset, &models, &Variant::ALL, &PromptMode::ALL, &options).unwrap();
    println!(
        "{} trials written, {} demo tasks excluded\n",
        summary.written, summary.excluded_demo_tasks
    );

    let table = score(&load_records(&options.log).unwrap().records);
    print!("{}", table.render());
    print!("\n{}", table.compare());
}
