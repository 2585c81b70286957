//! Datasets, run configuration and matrix execution.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::records::{
    judge, load_records, record_line, repair_torn_tail, RecordError, RecordKey, RunRecord,
    Sampling, Verdict, SCHEMA_VERSION,
};
use crate::domain::Instance;
use crate::gateway::{complete, set_remote_concurrency, Responder};
use crate::prompts::{assemble_prompt, reference, Demo, PromptMode, PromptSpec, TmkSource};
use crate::vocabulary::{Variant, Vocabulary};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("dataset {0} contains no instances")]
    Empty(PathBuf),
    #[error("duplicate instance id {0}")]
    DuplicateId(String),
    #[error(transparent)]
    Records(#[from] RecordError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A directory of instance JSON files, read in file-name order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Dataset, DataError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut instances = Vec::new();
        let mut ids = BTreeSet::new();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let inst: Instance = serde_json::from_str(&text).map_err(|e| DataError::Invalid {
                path: path.clone(),
                message: e.to_string(),
            })?;
            if !ids.insert(inst.id.clone()) {
                return Err(DataError::DuplicateId(inst.id));
            }
            instances.push(inst);
        }
        if instances.is_empty() {
            return Err(DataError::Empty(dir.to_path_buf()));
        }
        Ok(Dataset { instances })
    }

    /// Writes one `<id>.json` per instance.
    pub fn save(&self, dir: &Path) -> Result<(), DataError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for inst in &self.instances {
            let path = dir.join(format!("{}.json", inst.id));
            let text = serde_json::to_string_pretty(inst).expect("instances serialize");
            fs::write(&path, text + "\n").map_err(io_err(&path))?;
        }
        Ok(())
    }
}

/// The demonstration used by every one-shot prompt of a variant.
pub fn demo_for(_variant: Variant) -> Demo {
    reference::demo()
}

/// Instances that pose the demonstration task are not scored.
pub fn is_demo_task(instance: &Instance) -> bool {
    let demo = reference::demo_instance();
    instance.initial == demo.initial && instance.goal == demo.goal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub log: PathBuf,
    pub models: Vec<Responder>,
    #[serde(default = "all_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "all_modes")]
    pub modes: Vec<PromptMode>,
    #[serde(default)]
    pub system_prompt: String,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub tmk: TmkSource,
}

fn all_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

fn all_modes() -> Vec<PromptMode> {
    PromptMode::ALL.to_vec()
}

fn default_parallelism() -> usize {
    4
}

impl RunConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<RunConfig, DataError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut config: RunConfig =
            serde_json::from_str(&text).map_err(|e| DataError::Invalid {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.dataset, &mut config.log] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for m in &config.models {
            if let Responder::Remote(c) = m {
                c.check().map_err(|message| DataError::Invalid {
                    path: path.to_path_buf(),
                    message,
                })?;
            }
        }
        Ok(config)
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub log: PathBuf,
    pub system_prompt: String,
    pub parallelism: usize,
    pub tmk: TmkSource,
    /// Discard the existing log instead of resuming it.
    pub force: bool,
    /// Stop after writing this many new records, as if interrupted.
    pub stop_after: Option<usize>,
}

impl RunOptions {
    pub fn new(log: impl Into<PathBuf>) -> Self {
        RunOptions {
            log: log.into(),
            system_prompt: String::new(),
            parallelism: default_parallelism(),
            tmk: TmkSource::Reference,
            force: false,
            stop_after: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub written: usize,
    pub skipped_existing: usize,
    pub excluded_demo_tasks: usize,
    pub failed: usize,
    pub repaired_torn_line: bool,
}

struct Trial<'a> {
    responder: &'a Responder,
    variant: Variant,
    mode: PromptMode,
    instance: &'a Instance,
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn run_trial(trial: &Trial, options: &RunOptions) -> RunRecord {
    let vocab = Vocabulary::builtin(trial.variant);
    let spec = PromptSpec {
        vocab: vocab.clone(),
        mode: trial.mode,
        query: trial.instance.clone(),
        demo: trial.mode.is_one_shot().then(|| demo_for(trial.variant)),
        tmk: options.tmk,
    };
    let started_unix_ms = unix_ms();
    let clock = Instant::now();
    let prompt = assemble_prompt(&spec);
    let prompt_sha256 = match &prompt {
        Ok(p) => hex::encode(Sha256::digest(p.as_bytes())),
        Err(_) => String::new(),
    };
    let sampling = match trial.responder {
        Responder::Remote(c) => Sampling {
            temperature: Some(c.temperature),
            max_output_tokens: c.max_output_tokens,
        },
        _ => Sampling {
            temperature: None,
            max_output_tokens: None,
        },
    };
    let mut record = RunRecord {
        schema_version: SCHEMA_VERSION,
        instance_id: trial.instance.id.clone(),
        variant: trial.variant,
        mode: trial.mode,
        model: trial.responder.name(),
        prompt_sha256,
        response: String::new(),
        extracted_plan: vec![],
        dropped_lines: vec![],
        verdict: Verdict::EmptyPlan,
        prompt_tokens: None,
        completion_tokens: None,
        sampling,
        started_unix_ms,
        wall_ms: 0,
    };
    let outcome = prompt
        .map_err(|e| ("prompt".to_string(), e.to_string()))
        .and_then(|p| {
            complete(trial.responder, &options.system_prompt, &p)
                .map_err(|e| (e.class().to_string(), e.to_string()))
        });
    match outcome {
        Ok(response) => {
            let judgement = judge(&vocab, trial.instance, &response.text);
            record.response = response.text;
            record.prompt_tokens = response.prompt_tokens;
            record.completion_tokens = response.completion_tokens;
            record.extracted_plan = judgement.extracted_plan;
            record.dropped_lines = judgement.dropped_lines;
            record.verdict = judgement.verdict;
        }
        Err((error_class, message)) => {
            record.verdict = Verdict::Failed {
                error_class,
                message,
            };
        }
    }
    record.wall_ms = clock.elapsed().as_millis() as u64;
    record
}

/// Runs every (model, variant, mode, instance) trial not already in the
/// log, appending one line per trial in matrix order.
pub fn run_matrix(
    dataset: &Dataset,
    models: &[Responder],
    variants: &[Variant],
    modes: &[PromptMode],
    options: &RunOptions,
) -> Result<RunSummary, DataError> {
    let mut summary = RunSummary::default();
    if options.force && options.log.exists() {
        fs::remove_file(&options.log).map_err(io_err(&options.log))?;
    }
    let mut done = BTreeSet::new();
    if options.log.exists() {
        summary.repaired_torn_line = repair_torn_tail(&options.log)?;
        done = load_records(&options.log)?
            .records
            .iter()
            .map(RunRecord::key)
            .collect::<BTreeSet<RecordKey>>();
    }
    let scored: Vec<&Instance> = dataset
        .instances
        .iter()
        .filter(|i| !is_demo_task(i))
        .collect();
    summary.excluded_demo_tasks = dataset.instances.len() - scored.len();
    let mut trials = Vec::new();
    for responder in models {
        for &variant in variants {
            for &mode in modes {
                for &instance in &scored {
                    let key = RecordKey {
                        instance_id: instance.id.clone(),
                        model: responder.name(),
                        mode,
                        variant,
                    };
                    if done.contains(&key) {
                        summary.skipped_existing += 1;
                    } else {
                        trials.push(Trial {
                            responder,
                            variant,
                            mode,
                            instance,
                        });
                    }
                }
            }
        }
    }
    if let Some(limit) = options.stop_after {
        trials.truncate(limit);
    }
    if let Some(parent) = options.log.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&options.log)
        .map_err(io_err(&options.log))?;
    set_remote_concurrency(options.parallelism);
    let next = AtomicUsize::new(0);
    let workers = options.parallelism.clamp(1, trials.len().max(1));
    let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();
    thread::scope(|scope| -> Result<(), DataError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, trials) = (&next, &trials);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(trial) = trials.get(i) else { break };
                if tx.send((i, run_trial(trial, options))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // Single writer; completed trials wait here until their turn so
        // the log order does not depend on scheduling.
        let mut pending = BTreeMap::new();
        let mut turn = 0;
        for (i, record) in rx {
            pending.insert(i, record);
            while let Some(record) = pending.remove(&turn) {
                if record.verdict.is_failed() {
                    summary.failed += 1;
                }
                writeln!(log, "{}", record_line(&record)).map_err(io_err(&options.log))?;
                log.flush().map_err(io_err(&options.log))?;
                summary.written += 1;
                turn += 1;
            }
        }
        Ok(())
    })?;
    log.sync_all().map_err(io_err(&options.log))?;
    Ok(summary)
}

/// Runs the matrix a config file describes.
pub fn run_config(config: &RunConfig, force: bool) -> Result<RunSummary, DataError> {
    let dataset = Dataset::load(&config.dataset)?;
    let options = RunOptions {
        log: config.log.clone(),
        system_prompt: config.system_prompt.clone(),
        parallelism: config.parallelism,
        tmk: config.tmk,
        force,
        stop_after: None,
    };
    run_matrix(&dataset, &config.models, &config.variants, &config.modes, &options)
}
