//! Accuracy tables over loaded records.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::records::{RunRecord, Verdict};
use crate::prompts::PromptMode;
use crate::vocabulary::Variant;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cell {
    pub n: usize,
    pub correct: usize,
    /// Trials whose completion never arrived; counted in `n`.
    pub failed: usize,
}

impl Cell {
    /// Percentage rounded to one decimal place.
    pub fn accuracy(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (1000.0 * self.correct as f64 / self.n as f64).round() / 10.0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub cells: BTreeMap<(String, Variant, PromptMode), Cell>,
}

/// Groups by (model, variant, mode). When a key was recorded more than
/// once, the last record counts.
pub fn score(records: &[RunRecord]) -> ScoreTable {
    let mut latest = BTreeMap::new();
    for r in records {
        latest.insert(r.key(), r);
    }
    let mut table = ScoreTable::default();
    for r in latest.values() {
        let cell = table
            .cells
            .entry((r.model.clone(), r.variant, r.mode))
            .or_default();
        cell.n += 1;
        cell.correct += usize::from(r.verdict == Verdict::Correct);
        cell.failed += usize::from(r.verdict.is_failed());
    }
    table
}

fn pct(cell: Option<&Cell>) -> String {
    cell.map_or("-".into(), |c| format!("{:.1}", c.accuracy()))
}

impl ScoreTable {
    pub fn get(&self, model: &str, variant: Variant, mode: PromptMode) -> Option<&Cell> {
        self.cells.get(&(model.to_string(), variant, mode))
    }

    pub fn models(&self) -> Vec<&str> {
        let mut models: Vec<&str> = self.cells.keys().map(|(m, _, _)| m.as_str()).collect();
        models.dedup();
        models
    }

    fn variants_of(&self, model: &str) -> Vec<Variant> {
        Variant::ALL
            .into_iter()
            .filter(|v| PromptMode::ALL.iter().any(|m| self.get(model, *v, *m).is_some()))
            .collect()
    }

    /// Better of the two plain modes.
    pub fn best_plain(&self, model: &str, variant: Variant) -> Option<&Cell> {
        [PromptMode::PlainZeroShot, PromptMode::PlainOneShot]
            .into_iter()
            .filter_map(|m| self.get(model, variant, m))
            .max_by(|a, b| a.accuracy().total_cmp(&b.accuracy()))
    }

    /// Models as row groups, variants as rows, prompt modes as columns.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for model in self.models() {
            writeln!(out, "{model}").unwrap();
            writeln!(
                out,
                "  {:<9} {:>10} {:>10} {:>11} {:>8} {:>6}",
                "variant", "zero-shot", "one-shot", "best plain", "TMK", "n"
            )
            .unwrap();
            for variant in self.variants_of(model) {
                let cell = |m| self.get(model, variant, m);
                let n = PromptMode::ALL
                    .iter()
                    .filter_map(|m| cell(*m))
                    .map(|c| c.n)
                    .max()
                    .unwrap_or(0);
                writeln!(
                    out,
                    "  {:<9} {:>10} {:>10} {:>11} {:>8} {:>6}",
                    variant.as_str(),
                    pct(cell(PromptMode::PlainZeroShot)),
                    pct(cell(PromptMode::PlainOneShot)),
                    pct(self.best_plain(model, variant)),
                    pct(cell(PromptMode::TmkOneShot)),
                    n
                )
                .unwrap();
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["model", "variant", "mode", "n", "correct", "failed", "accuracy"])
            .unwrap();
        for ((model, variant, mode), c) in &self.cells {
            w.write_record([
                model.as_str(),
                variant.as_str(),
                mode.as_str(),
                &c.n.to_string(),
                &c.correct.to_string(),
                &c.failed.to_string(),
                &format!("{:.1}", c.accuracy()),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).expect("csv output is UTF-8")
    }

    /// Best plain accuracy against TMK accuracy, per model and variant.
    pub fn compare(&self) -> String {
        let mut out = String::new();
        for model in self.models() {
            for variant in self.variants_of(model) {
                let plain = self.best_plain(model, variant);
                let tmk = self.get(model, variant, PromptMode::TmkOneShot);
                let delta = match (plain, tmk) {
                    (Some(p), Some(t)) => format!("{:+.1}", t.accuracy() - p.accuracy()),
                    _ => "-".into(),
                };
                writeln!(
                    out,
                    "{model} {}: plain {} -> TMK {} ({delta})",
                    variant.as_str(),
                    pct(plain),
                    pct(tmk)
                )
                .unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::records::{Sampling, SCHEMA_VERSION};
    use crate::domain::Rule;

    fn rec(id: &str, mode: PromptMode, verdict: Verdict) -> RunRecord {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            instance_id: id.into(),
            variant: Variant::Random,
            mode,
            model: "m".into(),
            prompt_sha256: String::new(),
            response: String::new(),
            extracted_plan: vec![],
            dropped_lines: vec![],
            verdict,
            prompt_tokens: None,
            completion_tokens: None,
            sampling: Sampling {
                temperature: None,
                max_output_tokens: None,
            },
            started_unix_ms: 0,
            wall_ms: 0,
        }
    }

    #[test]
    fn three_of_four_is_seventy_five() {
        let mut records: Vec<_> = (0..3)
            .map(|i| rec(&i.to_string(), PromptMode::TmkOneShot, Verdict::Correct))
            .collect();
        records.push(rec(
            "3",
            PromptMode::TmkOneShot,
            Verdict::WrongStep { index: 1, rule: Rule::BlockNotClear },
        ));
        let table = score(&records);
        assert_eq!(table.get("m", Variant::Random, PromptMode::TmkOneShot).unwrap().accuracy(), 75.0);
    }

    #[test]
    fn accuracy_rounds_to_one_decimal() {
        let c = Cell { n: 600, correct: 584, failed: 0 };
        assert_eq!(c.accuracy(), 97.3);
        let c = Cell { n: 3, correct: 1, failed: 0 };
        assert_eq!(c.accuracy(), 33.3);
    }

    #[test]
    fn later_records_replace_earlier_ones() {
        let records = vec![
            rec("a", PromptMode::PlainOneShot, Verdict::EmptyPlan),
            rec("a", PromptMode::PlainOneShot, Verdict::Correct),
        ];
        let cell = *score(&records).get("m", Variant::Random, PromptMode::PlainOneShot).unwrap();
        assert_eq!(cell, Cell { n: 1, correct: 1, failed: 0 });
    }

    #[test]
    fn reports_render_every_cell() {
        let records = vec![
            rec("a", PromptMode::PlainZeroShot, Verdict::EmptyPlan),
            rec("a", PromptMode::PlainOneShot, Verdict::Correct),
            rec("b", PromptMode::PlainOneShot, Verdict::WrongGoal),
            rec("a", PromptMode::TmkOneShot, Verdict::Correct),
        ];
        let table = score(&records);
        let text = table.render();
        assert!(text.contains("random"), "{text}");
        assert!(text.contains("50.0"));
        assert_eq!(table.compare(), "m random: plain 50.0 -> TMK 100.0 (+50.0)\n");
        let csv = table.to_csv();
        assert!(csv.starts_with("model,variant,mode,n,correct,failed,accuracy\n"));
        assert!(csv.contains("m,random,tmk-one-shot,1,1,0,100.0"));
    }
}
