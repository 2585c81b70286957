//! Experiment orchestration: datasets, the run matrix, the record log and
//! score tables.

mod records;
mod run;
mod score;

pub use records::{
    judge, load_records, record_line, repair_torn_tail, write_records, Judgement, LoadedRecords,
    RecordError, RecordKey, RunRecord, Sampling, Verdict, SCHEMA_VERSION,
};
pub use run::{
    demo_for, is_demo_task, run_config, run_matrix, DataError, Dataset, RunConfig, RunOptions,
    RunSummary,
};
pub use score::{score, Cell, ScoreTable};
