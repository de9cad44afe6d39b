//! `atcn`: corpus preparation, training, restoration and the evaluation
//! reports.

mod error;
mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use diacritics::atcn::{format::FORMAT_VERSION, AtcnModel, Decoding, INITIAL_CAPACITY};
use diacritics::baselines::DiacriticDictionary;
use diacritics::corpus::{CleanConfig, Cleaner, DatasetStats, DiacriticTable, IndexedFile, Split};
use diacritics::metrics::{analyze_ambiguity, confusion, sample_errors};
use diacritics::trainer::{
    evaluate, strip_inputs, train_model, CopyRestorer, DictionaryRestorer, ModelRestorer, Restorer, StripMode,
    TrainConfig, TrainOptions,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use error::{CliError, Result};
use io::{read_bytes, read_lines, write_lines, write_report, Input, Output};

#[derive(Parser)]
#[command(name = "atcn", version, about = "Diacritics restoration with an acausal temporal convolutional network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a raw corpus and split it into train and dev files.
    Prepare(PrepareArgs),
    /// Train a model.
    Train(TrainArgs),
    /// Restore diacritics line by line.
    Restore(RestoreArgs),
    /// Score a restorer on stripped gold text.
    Evaluate(EvaluateArgs),
    /// Confusion matrix over important characters.
    Confusion(ConfusionArgs),
    /// Word-level ambiguity statistics of a gold corpus.
    Ambiguity(AmbiguityArgs),
    /// Uniform sample of character errors for manual inspection.
    SampleErrors(SampleArgs),
    /// Build a word dictionary from a training corpus.
    DictBuild(DictBuildArgs),
    /// Restore diacritics with a word dictionary.
    DictRestore(DictRestoreArgs),
    /// Copy a model into a static site directory and update its manifest.
    ExportWeb(ExportArgs),
}

#[derive(Args)]
struct PrepareArgs {
    #[arg(long, default_value = "hu")]
    lang: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_dev: PathBuf,
    #[arg(long, default_value_t = 500)]
    max_len: usize,
    #[arg(long, default_value_t = 0.05)]
    min_diacritic_ratio: f64,
    /// Dev shards out of 1000, e.g. "0-9,17".
    #[arg(long, default_value = "0-9")]
    dev_shards: String,
    /// Statistics report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML training configuration; defaults for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    out_model: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Continue from the checkpoint directory.
    #[arg(long, requires = "checkpoint_dir")]
    resume: bool,
    /// Stop once dev character accuracy reaches this value.
    #[arg(long)]
    target_char_accuracy: Option<f64>,
    #[arg(long)]
    time_limit_minutes: Option<f64>,
    /// Per-epoch log as JSON.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArg {
    #[arg(long, env = "DIACRITIC_MODEL")]
    model: Option<PathBuf>,
}

impl ModelArg {
    fn load(&self) -> Result<AtcnModel<f32>> {
        let path = self
            .model
            .as_deref()
            .ok_or_else(|| CliError::Usage("no model given: pass --model or set DIACRITIC_MODEL".into()))?;
        Ok(AtcnModel::load(path)?)
    }
}

#[derive(Args)]
struct RestoreArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Only choose among the input character's diacritic variants.
    #[arg(long)]
    constrained: bool,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Baseline {
    Copy,
    Dict,
    Model,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strip {
    Full,
    Augmented,
}

#[derive(Args)]
struct StripArgs {
    #[arg(long, value_enum, default_value = "full")]
    strip: Strip,
    /// Strip probability for `--strip augmented`.
    #[arg(long, default_value_t = 0.8)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl StripArgs {
    fn mode(&self) -> Result<StripMode> {
        match self.strip {
            Strip::Full => Ok(StripMode::Full),
            Strip::Augmented if (0.0..=1.0).contains(&self.p) => Ok(StripMode::Augmented { p: self.p, seed: self.seed }),
            Strip::Augmented => Err(CliError::Usage(format!("--p {} is outside [0, 1]", self.p))),
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_enum, default_value = "model")]
    baseline: Baseline,
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    constrained: bool,
    /// Dictionary file for `--baseline dict`.
    #[arg(long, conflicts_with = "train")]
    dict: Option<PathBuf>,
    /// Training corpus to build the dictionary from.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Language table; defaults to the model's, then "hu".
    #[arg(long)]
    lang: Option<String>,
    #[command(flatten)]
    strip: StripArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Gold text with hypotheses from a file or, without `--hyp`, from a
/// model run on the fully stripped gold.
#[derive(Args)]
struct HypothesisArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    hyp: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    constrained: bool,
    #[arg(long)]
    lang: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConfusionArgs {
    #[command(flatten)]
    source: HypothesisArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Args)]
struct AmbiguityArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, default_value = "hu")]
    lang: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: HypothesisArgs,
    #[arg(short = 'n', long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DictBuildArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long, default_value = "hu")]
    lang: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DictRestoreArgs {
    #[arg(long)]
    dict: PathBuf,
    #[arg(long, default_value = "hu")]
    lang: String,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    out_dir: PathBuf,
    /// Language code in the manifest; defaults to the model's.
    #[arg(long)]
    lang: Option<String>,
}

#[derive(Serialize)]
struct PrepareReport {
    clean: diacritics::corpus::CleanStats,
    train: DatasetStats,
    dev: DatasetStats,
}

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    initial_capacity: usize,
    languages: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    code: String,
    file: String,
    bytes: u64,
    sha256: String,
    vocab_size: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Prepare(a) => prepare(a),
        Command::Train(a) => train(a),
        Command::Restore(a) => restore(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Confusion(a) => {
            let (gold, hyp, table) = hypotheses(&a.source)?;
            let m = confusion(&gold, &hyp, &table)?;
            match a.format {
                ReportFormat::Json => write_report(a.source.out.as_deref(), &m.report()),
                ReportFormat::Text => {
                    let mut out = Output::create(a.source.out.as_deref())?;
                    out.write_str(&m.to_text_table())?;
                    out.flush()
                }
            }
        }
        Command::Ambiguity(a) => {
            let table = DiacriticTable::for_language(&a.lang)?;
            let gold = read_lines(&a.gold)?;
            write_report(a.out.as_deref(), &analyze_ambiguity(&gold, &table))
        }
        Command::SampleErrors(a) => {
            let (gold, hyp, _) = hypotheses(&a.source)?;
            if a.count == 0 {
                return Err(CliError::Usage("-n must be at least 1".into()));
            }
            let set = sample_errors(&gold, &hyp, a.count, a.seed)?;
            if let Some(notice) = &set.notice {
                log::warn!("{notice}");
            }
            write_report(a.source.out.as_deref(), &set)
        }
        Command::DictBuild(a) => {
            let table = DiacriticTable::for_language(&a.lang)?;
            let dict = DiacriticDictionary::build(&read_lines(&a.train)?, &table);
            let mut out = Output::create(Some(&a.out))?;
            out.write_str(&dict.to_tsv())?;
            out.flush()
        }
        Command::DictRestore(a) => {
            let table = DiacriticTable::for_language(&a.lang)?;
            let text = String::from_utf8(read_bytes(&a.dict)?).map_err(|e| CliError::Utf8 {
                what: a.dict.display().to_string(),
                offset: e.utf8_error().valid_up_to() as u64,
            })?;
            let dict = DiacriticDictionary::from_tsv(&text)?;
            stream_lines(a.input.as_deref(), a.out.as_deref(), |line| Ok(dict.restore(line, &table)))
        }
        Command::ExportWeb(a) => export_web(a),
    }
}

fn prepare(a: PrepareArgs) -> Result<()> {
    let table = DiacriticTable::for_language(&a.lang)?;
    if !(0.0..=1.0).contains(&a.min_diacritic_ratio) || a.max_len == 0 {
        return Err(CliError::Usage("--max-len must be positive and --min-diacritic-ratio within [0, 1]".into()));
    }
    let split = Split::parse(&a.dev_shards).map_err(|e| CliError::Usage(e.to_string()))?;
    let config = CleanConfig {
        max_len: a.max_len,
        min_diacritic_ratio: a.min_diacritic_ratio,
        ..CleanConfig::default()
    };
    let raw = read_bytes(&a.input)?;
    let mut raw_lines: Vec<&[u8]> = raw.split(|&b| b == b'\n').collect();
    if raw.ends_with(b"\n") {
        raw_lines.pop();
    }
    let (kept, clean) = Cleaner::new(&table, config).clean_corpus(raw_lines);
    if kept.is_empty() {
        return Err(diacritics::DiacriticsError::EmptyCorpus(format!("no usable lines in {}", a.input.display())).into());
    }
    let (train, dev) = split.split(&kept);
    write_lines(&a.out_train, &train)?;
    write_lines(&a.out_dev, &dev)?;
    let report = PrepareReport {
        clean,
        train: DatasetStats::from_lines(&train),
        dev: DatasetStats::from_lines(&dev),
    };
    write_report(a.report.as_deref(), &report)
}

fn train(a: TrainArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => {
            let text = String::from_utf8(read_bytes(path)?).map_err(|e| CliError::Utf8 {
                what: path.display().to_string(),
                offset: e.utf8_error().valid_up_to() as u64,
            })?;
            toml::from_str::<TrainConfig>(&text).map_err(|e| CliError::Config {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => TrainConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(epochs) = a.epochs {
        config.epochs = epochs;
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let source = IndexedFile::open(&a.train)?;
    let dev = match &a.dev {
        Some(p) => read_lines(p)?,
        None => Vec::new(),
    };
    let options = TrainOptions {
        checkpoint_dir: a.checkpoint_dir.clone(),
        resume: a.resume,
        target_character_accuracy: a.target_char_accuracy,
        time_limit: a.time_limit_minutes.map(|m| Duration::from_secs_f64(m * 60.0)),
    };
    let run = train_model(&config, &source, &dev, &options)?;
    run.best_or_last().save(&a.out_model)?;
    if let Some(log) = &a.log {
        write_report(Some(log), &run.log)?;
    }
    if let Some((epoch, _)) = &run.best {
        log::info!("wrote the epoch {epoch} model to {}", a.out_model.display());
    }
    Ok(())
}

/// Applies `f` to each line, keeping the terminators, and flushes after
/// every line so the command works as a pipe filter.
fn stream_lines(input: Option<&Path>, output: Option<&Path>, mut f: impl FnMut(&str) -> Result<String>) -> Result<()> {
    let mut input = Input::open(input)?;
    let mut out = Output::create(output)?;
    while let Some((line, ending)) = input.next_line()? {
        out.write_str(&f(&line)?)?;
        out.write_str(ending)?;
        out.flush()?;
    }
    out.flush()
}

fn decoding(constrained: bool) -> Decoding {
    if constrained {
        Decoding::VariantConstrained
    } else {
        Decoding::Unconstrained
    }
}

fn restore(a: RestoreArgs) -> Result<()> {
    let model = a.model.load()?;
    let d = decoding(a.constrained);
    stream_lines(a.input.as_deref(), a.out.as_deref(), |line| Ok(model.restore(line, d)?))
}

fn language(lang: Option<&str>, model: Option<&AtcnModel<f32>>) -> Result<DiacriticTable> {
    let code = lang
        .map(str::to_string)
        .or_else(|| model.and_then(|m| m.language.clone()))
        .unwrap_or_else(|| "hu".into());
    Ok(DiacriticTable::for_language(&code)?)
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let gold = read_lines(&a.gold)?;
    let mode = a.strip.mode()?;
    let report = match a.baseline {
        Baseline::Copy => evaluate(&CopyRestorer, &gold, &language(a.lang.as_deref(), None)?, mode)?,
        Baseline::Dict => {
            let table = language(a.lang.as_deref(), None)?;
            let dict = match (&a.dict, &a.train) {
                (Some(path), _) => {
                    let text = String::from_utf8(read_bytes(path)?).map_err(|e| CliError::Utf8 {
                        what: path.display().to_string(),
                        offset: e.utf8_error().valid_up_to() as u64,
                    })?;
                    DiacriticDictionary::from_tsv(&text)?
                }
                (None, Some(train)) => DiacriticDictionary::build(&read_lines(train)?, &table),
                (None, None) => return Err(CliError::Usage("--baseline dict needs --dict or --train".into())),
            };
            evaluate(&DictionaryRestorer { dictionary: &dict, table: &table }, &gold, &table, mode)?
        }
        Baseline::Model => {
            let model = a.model.load()?;
            let table = language(a.lang.as_deref(), Some(&model))?;
            let restorer = ModelRestorer {
                model: &model,
                decoding: decoding(a.constrained),
            };
            evaluate(&restorer, &gold, &table, mode)?
        }
    };
    write_report(a.out.as_deref(), &report)
}

fn hypotheses(a: &HypothesisArgs) -> Result<(Vec<String>, Vec<String>, DiacriticTable)> {
    let gold = read_lines(&a.gold)?;
    match &a.hyp {
        Some(path) => Ok((gold, read_lines(path)?, language(a.lang.as_deref(), None)?)),
        None => {
            let model = a.model.load()?;
            let table = language(a.lang.as_deref(), Some(&model))?;
            let inputs = strip_inputs(&gold, &table, StripMode::Full);
            let restorer = ModelRestorer {
                model: &model,
                decoding: decoding(a.constrained),
            };
            let hyp = restorer.restore_lines(&inputs)?;
            Ok((gold, hyp, table))
        }
    }
}

fn export_web(a: ExportArgs) -> Result<()> {
    let model_path = a
        .model
        .model
        .as_deref()
        .ok_or_else(|| CliError::Usage("no model given: pass --model or set DIACRITIC_MODEL".into()))?;
    let bytes = read_bytes(model_path)?;
    // Parse first so only loadable models are published.
    let model = AtcnModel::<f32>::from_bytes(&bytes)?;
    let code = a
        .lang
        .clone()
        .or_else(|| model.language.clone())
        .ok_or_else(|| CliError::Usage("the model has no language; pass --lang".into()))?;
    if code.is_empty() || !code.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return Err(CliError::Usage(format!("language code {code:?} is not usable as a file name")));
    }
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let file = format!("{code}.atcn");
    let target = a.out_dir.join(&file);
    std::fs::write(&target, &bytes).map_err(|e| CliError::io(&target, e))?;

    let manifest_path = a.out_dir.join(MANIFEST);
    let mut entries: BTreeMap<String, ManifestEntry> = BTreeMap::new();
    if manifest_path.exists() {
        let old: Manifest = serde_json::from_slice(&read_bytes(&manifest_path)?).map_err(|e| CliError::Config {
            path: manifest_path.clone(),
            message: e.to_string(),
        })?;
        entries.extend(old.languages.into_iter().map(|e| (e.code.clone(), e)));
    }
    entries.insert(
        code.clone(),
        ManifestEntry {
            code,
            file,
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(&bytes)),
            vocab_size: model.vocab_size(),
        },
    );
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        initial_capacity: INITIAL_CAPACITY,
        languages: entries.into_values().collect(),
    };
    write_report(Some(&manifest_path), &manifest)
}
