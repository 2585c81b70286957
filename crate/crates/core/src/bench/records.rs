//! Append-only JSONL record log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{execute_plan, satisfies, Instance, Rule};
use crate::extract::{extract_plan, DroppedLine};
use crate::prompts::PromptMode;
use crate::vocabulary::{Variant, Vocabulary};

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one trial. `Correct` requires every step to be legal and the
/// final state to satisfy the goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Correct,
    WrongStep { index: usize, rule: Rule },
    WrongGoal,
    EmptyPlan,
    Failed { error_class: String, message: String },
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        *self == Verdict::Correct
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, Verdict::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub temperature: Option<f64>,
    pub max_output_tokens: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub instance_id: String,
    pub variant: Variant,
    pub mode: PromptMode,
    pub model: String,
    pub prompt_sha256: String,
    pub response: String,
    /// Extracted actions rendered in the variant's surface form.
    pub extracted_plan: Vec<String>,
    pub dropped_lines: Vec<DroppedLine>,
    pub verdict: Verdict,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    pub sampling: Sampling,
    pub started_unix_ms: u64,
    pub wall_ms: u64,
}

/// Identity of a trial within a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub instance_id: String,
    pub model: String,
    pub mode: PromptMode,
    pub variant: Variant,
}

impl RunRecord {
    pub fn key(&self) -> RecordKey {
        RecordKey {
            instance_id: self.instance_id.clone(),
            model: self.model.clone(),
            mode: self.mode,
            variant: self.variant,
        }
    }

    /// The record with timing fields zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord {
            started_unix_ms: 0,
            wall_ms: 0,
            ..self.clone()
        }
    }

    /// Re-derives the verdict from the stored response.
    pub fn audit(&self, instance: &Instance) -> bool {
        if self.verdict.is_failed() {
            return true;
        }
        judge(&Vocabulary::builtin(self.variant), instance, &self.response).verdict == self.verdict
    }
}

/// Extraction plus validation of one response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgement {
    pub extracted_plan: Vec<String>,
    pub dropped_lines: Vec<DroppedLine>,
    pub verdict: Verdict,
}

pub fn judge(vocab: &Vocabulary, instance: &Instance, response: &str) -> Judgement {
    let plan = match extract_plan(vocab, &instance.blocks, response) {
        Ok(plan) => plan,
        Err(crate::extract::ExtractError::EmptyPlan { dropped_lines }) => {
            return Judgement {
                extracted_plan: vec![],
                dropped_lines,
                verdict: Verdict::EmptyPlan,
            }
        }
    };
    let verdict = match execute_plan(&instance.initial, &plan.actions) {
        Err(failure) => Verdict::WrongStep {
            index: failure.step_index,
            rule: failure.error.rule(),
        },
        Ok(trace) if satisfies(trace.final_state(), &instance.goal) => Verdict::Correct,
        Ok(_) => Verdict::WrongGoal,
    };
    Judgement {
        extracted_plan: plan.actions.iter().map(|a| vocab.render_action(a)).collect(),
        dropped_lines: plan.dropped_lines,
        verdict,
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("record log I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("record log line {line}: schema version {found}, this build reads version {expected}")]
    SchemaVersionMismatch { line: usize, found: u32, expected: u32 },
}

/// Records read from a log, plus the 1-based numbers of unreadable lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedRecords {
    pub records: Vec<RunRecord>,
    pub corrupt_lines: Vec<usize>,
}

pub fn record_line(record: &RunRecord) -> String {
    serde_json::to_string(record).expect("records always serialize")
}

pub fn write_records(records: &[RunRecord], path: &Path) -> Result<(), RecordError> {
    let mut file = File::create(path)?;
    for r in records {
        writeln!(file, "{}", record_line(r))?;
    }
    file.sync_all()?;
    Ok(())
}

pub fn load_records(path: &Path) -> Result<LoadedRecords, RecordError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = LoadedRecords::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => {
                out.corrupt_lines.push(i + 1);
                continue;
            }
        };
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(found) => {
                return Err(RecordError::SchemaVersionMismatch {
                    line: i + 1,
                    found: found as u32,
                    expected: SCHEMA_VERSION,
                })
            }
            None => {
                out.corrupt_lines.push(i + 1);
                continue;
            }
        }
        match serde_json::from_value(value) {
            Ok(r) => out.records.push(r),
            Err(_) => out.corrupt_lines.push(i + 1),
        }
    }
    Ok(out)
}

/// Drops an unterminated final line left by an interrupted writer.
/// Returns whether anything was removed.
pub fn repair_torn_tail(path: &Path) -> Result<bool, RecordError> {
    let mut file = OpenOptions::new().read(true).write(true).open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(false);
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    file.set_len(keep as u64)?;
    file.seek(SeekFrom::End(0))?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::reference;

    fn record(id: &str, verdict: Verdict) -> RunRecord {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            instance_id: id.into(),
            variant: Variant::Classic,
            mode: PromptMode::PlainOneShot,
            model: "m".into(),
            prompt_sha256: "00".into(),
            response: String::new(),
            extracted_plan: vec![],
            dropped_lines: vec![],
            verdict,
            prompt_tokens: None,
            completion_tokens: None,
            sampling: Sampling {
                temperature: Some(0.0),
                max_output_tokens: None,
            },
            started_unix_ms: 5,
            wall_ms: 7,
        }
    }

    #[test]
    fn judge_distinguishes_outcomes() {
        let vocab = Vocabulary::builtin(Variant::Classic);
        let demo = reference::demo_instance();
        let good = "[PLAN]\nunstack the blue block from on top of the orange block\nput down the blue block\npick up the orange block\nstack the orange block on top of the blue block\n[PLAN END]";
        assert_eq!(judge(&vocab, &demo, good).verdict, Verdict::Correct);
        assert_eq!(
            judge(&vocab, &demo, "[PLAN]\nput down the blue block\n[PLAN END]").verdict,
            Verdict::WrongStep { index: 0, rule: Rule::NotHolding }
        );
        assert_eq!(
            judge(&vocab, &demo, "[PLAN]\nunstack the blue block from on top of the orange block\n[PLAN END]").verdict,
            Verdict::WrongGoal
        );
        assert_eq!(judge(&vocab, &demo, "I cannot help").verdict, Verdict::EmptyPlan);
    }

    #[test]
    fn round_trip_and_corrupt_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let records: Vec<_> = (0..4)
            .map(|i| record(&format!("i{i}"), Verdict::WrongStep { index: i, rule: Rule::BlockNotClear }))
            .collect();
        write_records(&records, &path).unwrap();
        assert_eq!(load_records(&path).unwrap().records, records);

        let mut text = std::fs::read_to_string(&path).unwrap();
        text.truncate(text.len() - 20);
        std::fs::write(&path, &text).unwrap();
        let loaded = load_records(&path).unwrap();
        assert_eq!(loaded.records.len(), 3);
        assert_eq!(loaded.corrupt_lines, vec![4]);

        assert!(repair_torn_tail(&path).unwrap());
        assert_eq!(load_records(&path).unwrap().corrupt_lines, Vec::<usize>::new());
    }

    #[test]
    fn other_schema_versions_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let mut r = record("x", Verdict::Correct);
        r.schema_version = 2;
        write_records(&[r], &path).unwrap();
        assert!(matches!(
            load_records(&path),
            Err(RecordError::SchemaVersionMismatch { line: 1, found: 2, expected: 1 })
        ));
    }

    #[test]
    fn timing_is_excluded_from_comparisons() {
        let a = record("x", Verdict::Correct);
        let mut b = a.clone();
        b.wall_ms = 99;
        assert_ne!(a, b);
        assert_eq!(a.without_timing(), b.without_timing());
    }
}
