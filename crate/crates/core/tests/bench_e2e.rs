mod common;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;

use common::{oracle_dataset, ref_run, scramble_dataset, swaps, RefOutcome};
use tmkbench::bench::{self, load_records, run_matrix, RunOptions};
use tmkbench::gateway::Responder;
use tmkbench::oracle::solve_optimal;
use tmkbench::prompts::{reference, PromptMode};
use tmkbench::Variant;

fn stripped_log(path: &std::path::Path) -> Vec<String> {
    load_records(path)
        .unwrap()
        .records
        .iter()
        .map(|r| serde_json::to_string(&r.without_timing()).unwrap())
        .collect()
}

#[test]
fn scramble_fixtures_break_under_every_swap() {
    let demo = reference::demo_plan();
    for instance in &scramble_dataset().instances {
        let own = solve_optimal(instance).unwrap().plan;
        assert!(own.len() >= 2, "{}", instance.id);
        for plan in swaps(&demo).into_iter().chain(swaps(&own)) {
            assert_ne!(ref_run(instance, &plan), RefOutcome::Solved, "{}", instance.id);
        }
    }
}

#[test]
fn oracle_scores_full_marks_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = oracle_dataset();
    assert_eq!(dataset.instances.len(), 30);
    let mut logs = Vec::new();
    for name in ["first.jsonl", "second.jsonl"] {
        let mut options = RunOptions::new(dir.path().join(name));
        options.parallelism = if name == "first.jsonl" { 1 } else { 6 };
        let summary = run_matrix(
            &dataset,
            &[Responder::Oracle],
            &Variant::ALL,
            &PromptMode::ALL,
            &options,
        )
        .unwrap();
        assert_eq!(summary.written, 270);
        logs.push(stripped_log(&options.log));
    }
    assert_eq!(logs[0], logs[1]);
    let records = load_records(&dir.path().join("first.jsonl")).unwrap().records;
    for r in &records {
        let instance = dataset.instances.iter().find(|i| i.id == r.instance_id).unwrap();
        assert!(r.audit(instance), "{}", r.instance_id);
    }
    let table = bench::score(&records);
    for variant in Variant::ALL {
        for mode in PromptMode::ALL {
            let cell = table.get("oracle", variant, mode).unwrap();
            assert_eq!((cell.n, cell.accuracy()), (30, 100.0), "{variant} {mode}");
        }
    }
}

#[test]
fn scramble_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let options = RunOptions::new(dir.path().join("log.jsonl"));
    run_matrix(
        &scramble_dataset(),
        &[Responder::Scramble { seed: 7 }, Responder::EchoDemo],
        &Variant::ALL,
        &PromptMode::ALL,
        &options,
    )
    .unwrap();
    let records = load_records(&options.log).unwrap().records;
    let table = bench::score(&records);
    for variant in Variant::ALL {
        for mode in PromptMode::ALL {
            let cell = table.get("scramble-7", variant, mode).unwrap();
            assert_eq!(cell.accuracy(), 0.0, "{variant} {mode}");
        }
    }
}

#[test]
fn interrupted_run_resumes_without_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = oracle_dataset();
    let models = [Responder::Oracle, Responder::Scramble { seed: 1 }];
    let mut options = RunOptions::new(dir.path().join("log.jsonl"));
    options.parallelism = 3;
    options.stop_after = Some(101);
    let first = run_matrix(&dataset, &models, &Variant::ALL, &PromptMode::ALL, &options).unwrap();
    assert_eq!(first.written, 101);

    // A kill mid-write leaves half a line behind.
    let mut file = fs::OpenOptions::new().append(true).open(&options.log).unwrap();
    file.write_all(br#"{"schema_version":1,"instance_id":"bw"#).unwrap();
    drop(file);

    options.stop_after = None;
    let second = run_matrix(&dataset, &models, &Variant::ALL, &PromptMode::ALL, &options).unwrap();
    assert!(second.repaired_torn_line);
    assert_eq!(second.skipped_existing, 101);
    assert_eq!(first.written + second.written, 540);

    let loaded = load_records(&options.log).unwrap();
    assert!(loaded.corrupt_lines.is_empty());
    let keys: Vec<_> = loaded.records.iter().map(|r| r.key()).collect();
    let unique: BTreeSet<_> = keys.iter().cloned().collect();
    assert_eq!(keys.len(), unique.len());
    assert_eq!(unique.len(), 540);
}

#[test]
fn demo_task_is_never_scored() {
    let dir = tempfile::tempdir().unwrap();
    let mut dataset = oracle_dataset();
    let mut demo = reference::demo_instance();
    demo.id = "looks-new".into();
    dataset.instances.push(demo);
    let options = RunOptions::new(dir.path().join("log.jsonl"));
    let summary = run_matrix(
        &dataset,
        &[Responder::EchoDemo],
        &[Variant::Classic],
        &[PromptMode::PlainOneShot],
        &options,
    )
    .unwrap();
    assert_eq!(summary.excluded_demo_tasks, 1);
    assert_eq!(summary.written, 30);
}
