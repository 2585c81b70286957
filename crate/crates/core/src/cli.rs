//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 transport exhaustion.

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{self, Dataset, RunConfig};
use crate::domain::Instance;
use crate::oracle::{random_instance, solve_optimal};
use crate::prompts::{assemble_prompt, PromptMode, PromptSpec, TmkSource};
use crate::tmk::{generate_tmk, serialize_tmk, validate_tmk, verbatim, semantics_mismatches, Dialect};
use crate::vocabulary::{Variant, Vocabulary};

#[derive(Parser)]
#[command(name = "tmkbench", version, about = "Blocksworld planning benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TmkArg {
    /// The reference JSON document, unmodified.
    Reference,
    StringList,
    BooleanMap,
}

impl From<TmkArg> for TmkSource {
    fn from(arg: TmkArg) -> Self {
        match arg {
            TmkArg::Reference => TmkSource::Reference,
            TmkArg::StringList => TmkSource::Generated(Dialect::StringList),
            TmkArg::BooleanMap => TmkSource::Generated(Dialect::BooleanMap),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded random instances into a directory of JSON files.
    Gen {
        #[arg(long, default_value_t = 3)]
        min_blocks: usize,
        #[arg(long, default_value_t = 5)]
        max_blocks: usize,
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one assembled prompt.
    Prompt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, value_parser = parse_mode)]
        mode: PromptMode,
        #[arg(long, value_enum, default_value = "reference")]
        tmk: TmkArg,
    },
    /// Execute the trial matrix described by a run-config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Start a fresh log instead of resuming.
        #[arg(long)]
        force: bool,
    },
    /// Judge one response (file, or `-` for stdin) against one instance.
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long)]
        response: PathBuf,
    },
    /// Score record logs.
    Score {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print plain-vs-TMK deltas.
        #[arg(long)]
        compare: bool,
    },
    /// Print a shortest plan for an instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_variant, default_value = "classic")]
        variant: Variant,
    },
    /// Print the TMK model for a variant, or check a TMK document.
    Tmk {
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, value_enum, default_value = "reference")]
        format: TmkArg,
        /// Validate this document instead of printing one.
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<PromptMode, String> {
    s.parse()
}

enum Failure {
    Data(anyhow::Error),
    Transport(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    serde_json::from_str(&text).with_context(|| format!("{}: invalid instance", path.display()))
}

fn gen(min: usize, max: usize, count: usize, seed: u64, out: &Path) -> anyhow::Result<()> {
    if min < 2 || max < min {
        bail!("need 2 <= min-blocks <= max-blocks");
    }
    let mut instances = Vec::new();
    let mut s = seed;
    while instances.len() < count {
        let n = min + instances.len() % (max - min + 1);
        let inst = random_instance(n, s)?;
        s += 1;
        if !bench::is_demo_task(&inst) {
            instances.push(inst);
        }
    }
    Dataset { instances }.save(out)?;
    println!("wrote {count} instances to {}", out.display());
    Ok(())
}

fn read_response(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    std::fs::read_to_string(path).with_context(|| path.display().to_string())
}

fn tmk(variant: Variant, format: TmkArg, check: Option<PathBuf>) -> anyhow::Result<()> {
    let vocab = Vocabulary::builtin(variant);
    let Some(path) = check else {
        match TmkSource::from(format) {
            TmkSource::Reference => println!("{}", verbatim::for_variant(variant).trim_end()),
            TmkSource::Generated(d) => println!("{}", serialize_tmk(&generate_tmk(&vocab), d)),
        }
        return Ok(());
    };
    let text = std::fs::read_to_string(&path).with_context(|| path.display().to_string())?;
    let model = crate::tmk::parse_tmk(&text, &crate::tmk::TmkNotation::for_vocabulary(&vocab))
        .with_context(|| path.display().to_string())?;
    let report = validate_tmk(&model);
    for v in &report.violations {
        println!("violation: {v}");
    }
    for l in &report.lints {
        println!("lint: {l}");
    }
    let mismatches = semantics_mismatches(&model, &vocab);
    for m in &mismatches {
        println!("semantics: {m}");
    }
    if !report.is_clean() || !mismatches.is_empty() {
        bail!("{} is not a faithful {variant} TMK model", path.display());
    }
    println!("ok");
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            min_blocks,
            max_blocks,
            count,
            seed,
            out,
        } => gen(min_blocks, max_blocks, count, seed, &out)?,
        Command::Prompt {
            instance,
            variant,
            mode,
            tmk,
        } => {
            let query = read_instance(&instance)?;
            let mut spec = PromptSpec::new(
                variant,
                mode,
                query,
                mode.is_one_shot().then(|| bench::demo_for(variant)),
            );
            spec.tmk = tmk.into();
            println!("{}", assemble_prompt(&spec).map_err(anyhow::Error::from)?);
        }
        Command::Run { config, force } => {
            let config = RunConfig::load(&config).map_err(anyhow::Error::from)?;
            let summary = bench::run_config(&config, force).map_err(anyhow::Error::from)?;
            eprintln!(
                "wrote {} records ({} already logged, {} demo tasks excluded)",
                summary.written, summary.skipped_existing, summary.excluded_demo_tasks
            );
            let loaded = bench::load_records(&config.log).map_err(anyhow::Error::from)?;
            print!("{}", bench::score(&loaded.records).render());
            if summary.failed > 0 {
                return Err(Failure::Transport(format!(
                    "{} trials failed to get a completion",
                    summary.failed
                )));
            }
        }
        Command::Validate {
            instance,
            variant,
            response,
        } => {
            let instance = read_instance(&instance)?;
            let text = read_response(&response)?;
            let judgement = bench::judge(&Vocabulary::builtin(variant), &instance, &text);
            for line in &judgement.extracted_plan {
                println!("{line}");
            }
            for d in &judgement.dropped_lines {
                eprintln!("dropped line {}: {} ({})", d.line, d.text, d.skip);
            }
            println!(
                "{}",
                serde_json::to_string(&judgement.verdict).expect("verdicts serialize")
            );
        }
        Command::Score { logs, csv, compare } => {
            let mut records = Vec::new();
            for log in &logs {
                let loaded = bench::load_records(log)
                    .with_context(|| log.display().to_string())?;
                for line in &loaded.corrupt_lines {
                    eprintln!("{}: corrupt line {line} skipped", log.display());
                }
                records.extend(loaded.records);
            }
            let table = bench::score(&records);
            print!("{}", table.render());
            if compare {
                print!("{}", table.compare());
            }
            if let Some(path) = csv {
                std::fs::write(&path, table.to_csv())
                    .with_context(|| path.display().to_string())?;
            }
        }
        Command::Oracle { instance, variant } => {
            let instance = read_instance(&instance)?;
            let vocab = Vocabulary::builtin(variant);
            let result = solve_optimal(&instance).map_err(anyhow::Error::from)?;
            for action in &result.plan {
                println!("{}", vocab.render_action(action));
            }
        }
        Command::Tmk {
            variant,
            format,
            check,
        } => tmk(variant, format, check)?,
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            2
        }
        Err(Failure::Transport(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}
