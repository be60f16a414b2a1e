//! The `podsum` command line.
//!
//! Every stage reads and writes JSONL records. Exit status is 0 on success,
//! 1 on validation errors (bad flags, bad records, inconsistent inputs) and 2
//! on I/O or transport failures.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use podsum_core::backend::{summarize, DecodeConfig, ExtractiveSummarizer};
use podsum_core::cleanser::{brevity_filter, build_training_set, CleanPair, CleanseConfig};
use podsum_core::eval::{
    aggregate, compare, majority_baseline, question_equal_or_better, rouge_report, system_ratings,
    JudgmentRecord,
};
use podsum_core::features::{
    select_candidates, Binner, CandidateSet, SegmentFeatures, DEFAULT_HEAD, DEFAULT_TAIL,
};
use podsum_core::labeler::{candidate_coverage, label_corpus, SegmentLabel, DEFAULT_TAU};
use podsum_core::postprocess::{clean_summary, dedup_cross_episode, PostprocessConfig};
use podsum_core::selector::{
    select_source, train, truncate_lead, BatchMode, ModelConfig, SavedModel, Selector, SourceText,
    DEFAULT_BUDGET,
};
use podsum_core::stats::{build_idf, DocView, IdfTable};
use podsum_core::textnorm::WhitespaceTokenizer;
use podsum_core::{Episode, Split};
use rayon::prelude::*;

use crate::corpus_io::{read_corpus, read_text, write_corpus};
use crate::error::{PodsumError, Result};
use crate::pipeline::{
    build_features, group_features, pair_candidates, training_examples, Provider, ProviderKind,
};
use crate::records::{
    read_records, read_single, read_typed, write_typed, EpisodeRecord, Record, SummaryRecord,
};
use crate::report::{
    corpus_stats, gap_table, question_table, rouge_table, stats_table, system_table, StatsConfig,
};
use crate::service::ServiceClient;
use crate::synth::{synth_corpus, SynthConfig};

pub const SEED_ENV: &str = "PODSUM_SEED";
pub const DEFAULT_SEED: u64 = 13;

#[derive(Debug, Parser)]
#[command(
    name = "podsum",
    version,
    about = "Podcast summarization pipeline over JSONL artifacts"
)]
pub struct Cli {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for initialization, shuffling and synthetic data (PODSUM_SEED overrides).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Worker threads for per-episode stages.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load transcripts and metadata listed in manifests into episode records.
    Ingest(IngestArgs),
    /// Build clean reference summaries by sentence-salience filtering.
    Cleanse(CleanseArgs),
    /// Document frequencies over descriptions or transcripts.
    Idf(IdfArgs),
    /// Head and tail candidate windows per episode.
    Candidates(CandidatesArgs),
    /// Surface feature scores and their binarization.
    Features(FeaturesArgs),
    /// Salience labels for candidate segments.
    Label(LabelArgs),
    /// Train the segment selector.
    Train(TrainArgs),
    /// Select source text with a trained selector.
    Select(SelectArgs),
    /// Source text from the transcript lead.
    Lead(LeadArgs),
    /// Run a summarizer backend over source texts.
    Summarize(SummarizeArgs),
    /// Clean generated summaries and drop cross-episode duplicates.
    Postprocess(PostprocessArgs),
    /// ROUGE-1/2/L table of summaries against references.
    Rouge(RougeArgs),
    /// Aggregate human judgments and compare with the majority baseline.
    Judge(JudgeArgs),
    /// Corpus statistics for full-data checks.
    Stats(StatsArgs),
    /// Write a synthetic corpus (transcripts, metadata, manifest).
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Manifest file; repeat for several splits.
    #[arg(long, required = true)]
    pub manifest: Vec<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CleanseFilter {
    /// Drop sentences with IDF salience below sigma.
    Salience,
    /// Keep whole descriptions of 20 to 750 characters.
    Brevity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Valid,
    Test,
    All,
}

impl SplitArg {
    fn admits(self, split: Split) -> bool {
        match self {
            SplitArg::All => true,
            SplitArg::Train => split == Split::Train,
            SplitArg::Valid => split == Split::Valid,
            SplitArg::Test => split == Split::Test,
        }
    }
}

#[derive(Debug, Args)]
pub struct CleanseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    #[arg(long = "min-occ", default_value_t = 5)]
    pub min_occ: u64,
    #[arg(long = "min-idf", default_value_t = 1.5)]
    pub min_idf: f64,
    /// Description IDF table; built from the selected episodes when absent.
    #[arg(long)]
    pub idf: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitArg::Train)]
    pub split: SplitArg,
    #[arg(long, value_enum, default_value_t = CleanseFilter::Salience)]
    pub filter: CleanseFilter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DocsArg {
    Descriptions,
    Transcripts,
}

#[derive(Debug, Args)]
pub struct IdfArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = DocsArg::Descriptions)]
    pub docs: DocsArg,
}

#[derive(Debug, Args)]
pub struct CandidatesArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_HEAD)]
    pub head: usize,
    #[arg(long, default_value_t = DEFAULT_TAIL)]
    pub tail: usize,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Episode records.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Transcript IDF table; built from the input episodes when absent.
    #[arg(long)]
    pub idf: Option<PathBuf>,
    /// Existing binner to apply instead of fitting one.
    #[arg(long)]
    pub binner: Option<PathBuf>,
    /// Where to write the binner used.
    #[arg(long = "binner-output")]
    pub binner_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ProviderArgs {
    /// Context embedding provider.
    #[arg(long, value_enum, default_value_t = ProviderKind::Stub)]
    pub provider: ProviderKind,
    /// Model server base URL (service provider or backend).
    #[arg(long)]
    pub url: Option<String>,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
}

impl ProviderArgs {
    fn client(&self) -> Result<ServiceClient> {
        let url = self.url.as_deref().ok_or_else(|| {
            PodsumError::invalid("--url is required for the service provider or backend")
        })?;
        Ok(ServiceClient::new(url, Duration::from_secs(self.timeout)))
    }

    fn provider(&self) -> Result<Provider> {
        Ok(match self.provider {
            ProviderKind::Stub => Provider::Stub,
            ProviderKind::Zero => Provider::Zero,
            ProviderKind::Service => Provider::Service(self.client()?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchArg {
    PerEpisode,
    FullBatch,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Episode records (segment text for context embeddings).
    #[arg(long)]
    pub episodes: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Output model file (JSON).
    #[arg(long = "model-out")]
    pub model_out: PathBuf,
    #[arg(long = "d-model", default_value_t = 16)]
    pub d_model: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 2)]
    pub heads: usize,
    #[arg(long = "max-positions", default_value_t = DEFAULT_HEAD + DEFAULT_TAIL)]
    pub max_positions: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value_t = BatchArg::PerEpisode)]
    pub batch: BatchArg,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

#[derive(Debug, Args)]
pub struct LeadArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Extractive,
    Service,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Source records.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendArg::Extractive)]
    pub backend: BackendArg,
    #[arg(long)]
    pub url: Option<String>,
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    #[arg(long = "min-len", default_value_t = 39)]
    pub min_len: usize,
    #[arg(long = "max-len", default_value_t = 250)]
    pub max_len: usize,
    #[arg(long, default_value_t = 4)]
    pub beam: usize,
    #[arg(long = "length-penalty", default_value_t = 2.0)]
    pub length_penalty: f64,
    #[arg(long = "no-repeat", default_value_t = 3)]
    pub no_repeat: usize,
}

#[derive(Debug, Args)]
pub struct PostprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub long: usize,
    #[arg(long, default_value_t = 3)]
    pub dedup: usize,
}

#[derive(Debug, Args)]
pub struct RougeArgs {
    /// Summary records.
    #[arg(long)]
    pub system: PathBuf,
    /// Summary, clean_ref or episode records (creator descriptions).
    #[arg(long)]
    pub refs: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    /// Judgment records.
    #[arg(long)]
    pub input: PathBuf,
    /// Systems to report; all judged systems when absent.
    #[arg(long)]
    pub system: Vec<String>,
    /// Also compare against this system's ratings (e.g. the descriptions).
    #[arg(long)]
    pub baseline: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Episode records.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    #[arg(long = "min-occ", default_value_t = 5)]
    pub min_occ: u64,
    #[arg(long = "min-idf", default_value_t = 1.5)]
    pub min_idf: f64,
    #[arg(long, default_value_t = DEFAULT_HEAD)]
    pub head: usize,
    #[arg(long, default_value_t = DEFAULT_TAIL)]
    pub tail: usize,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long = "output-dir")]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub episodes: usize,
    #[arg(long, value_enum, default_value_t = SplitArg::Train)]
    pub split: SplitArg,
}

fn command() -> clap::Command {
    let mut cmd = Cli::command().args_override_self(true);
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    cmd
}

fn long_flags(cmd: &clap::Command) -> Vec<String> {
    cmd.get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect()
}

fn config_value_args(flag: &str, value: &serde_json::Value) -> Result<Vec<String>> {
    use serde_json::Value;
    Ok(match value {
        Value::Bool(true) => vec![format!("--{flag}")],
        Value::Bool(false) | Value::Null => Vec::new(),
        Value::Number(n) => vec![format!("--{flag}"), n.to_string()],
        Value::String(s) => vec![format!("--{flag}"), s.clone()],
        Value::Array(items) => {
            let mut out = Vec::new();
            for item in items {
                out.extend(config_value_args(flag, item)?);
            }
            out
        }
        Value::Object(_) => {
            return Err(PodsumError::invalid(format!(
                "config key {flag:?} cannot hold an object"
            )))
        }
    })
}

/// Splices flags from a `--config` JSON file right after the subcommand name.
///
/// Top-level keys apply to whichever subcommand accepts them; a key whose value
/// is an object named after a subcommand applies to that subcommand only.
/// Explicit flags come later on the line and so win.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let path = args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else {
        return Ok(args);
    };
    let cmd = command();
    let Some(sub_pos) = args
        .iter()
        .position(|a| cmd.get_subcommands().any(|s| s.get_name() == a))
    else {
        return Ok(args);
    };
    let sub = cmd.find_subcommand(&args[sub_pos]).expect("found above");
    let text = read_text(Path::new(&path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| PodsumError::Record {
            path: PathBuf::from(&path),
            line: e.line(),
            message: e.to_string(),
        })?;
    let serde_json::Value::Object(map) = value else {
        return Err(PodsumError::invalid(format!(
            "{path}: config must be a JSON object"
        )));
    };
    let globals = long_flags(&cmd);
    let accepted = long_flags(sub);
    let mut extra = Vec::new();
    for (key, v) in &map {
        let flag = key.replace('_', "-");
        if flag == "config" {
            return Err(PodsumError::invalid(format!(
                "{path}: config files cannot nest"
            )));
        }
        if let serde_json::Value::Object(section) = v {
            if cmd.find_subcommand(key).is_none() {
                return Err(PodsumError::invalid(format!(
                    "{path}: unknown config section {key:?}"
                )));
            }
            if key == sub.get_name() {
                for (k, v) in section {
                    extra.extend(config_value_args(&k.replace('_', "-"), v)?);
                }
            }
            continue;
        }
        if accepted.contains(&flag) || globals.contains(&flag) {
            extra.extend(config_value_args(&flag, v)?);
        } else if !cmd.get_subcommands().any(|s| long_flags(s).contains(&flag)) {
            return Err(PodsumError::invalid(format!(
                "{path}: unknown config key {key:?}"
            )));
        }
    }
    let mut out = args[..=sub_pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub_pos + 1..]);
    Ok(out)
}

fn parse(args: Vec<String>) -> std::result::Result<Cli, clap::Error> {
    let matches: ArgMatches = command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Runs the CLI on `args` (program name first), writing reports to `out`.
/// Returns the process exit code.
pub fn run(args: Vec<String>, out: &mut dyn Write) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut cli = match parse(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var(SEED_ENV) {
        match v.trim().parse() {
            Ok(seed) => cli.seed = seed,
            Err(_) => {
                eprintln!("error: {SEED_ENV}={v:?} is not an unsigned integer");
                return 1;
            }
        }
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(usize::from(cli.jobs))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    // reports are buffered so stdout stays on the calling thread
    let mut buffer = Vec::new();
    let result = pool.install(|| execute(&cli, &mut buffer));
    if let Err(e) = out.write_all(&buffer).and_then(|()| out.flush()) {
        eprintln!("error: cannot write report: {e}");
        return 2;
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_episodes(path: &Path) -> Result<Vec<EpisodeRecord>> {
    read_typed::<EpisodeRecord>(path)
}

fn episodes_only(records: Vec<EpisodeRecord>) -> Vec<Episode> {
    records.into_iter().map(|r| r.episode).collect()
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| PodsumError::io("<stdout>", e))
}

fn emit_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    emit(out, &s)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Cleanse(a) => cleanse(a),
        Command::Idf(a) => idf(a),
        Command::Candidates(a) => candidates(a),
        Command::Features(a) => features(a),
        Command::Label(a) => label(a),
        Command::Train(a) => train_cmd(a, cli.seed),
        Command::Select(a) => select(a),
        Command::Lead(a) => lead(a),
        Command::Summarize(a) => summarize_cmd(a),
        Command::Postprocess(a) => postprocess(a),
        Command::Rouge(a) => rouge(a, out),
        Command::Judge(a) => judge(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Synth(a) => synth(a, cli.seed),
    }
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for m in &a.manifest {
        let corpus = read_corpus(m)?;
        info!(
            "{}: {} {} episodes",
            m.display(),
            corpus.episodes.len(),
            corpus.split.as_str()
        );
        for episode in corpus.episodes {
            if !seen.insert(episode.episode_id.clone()) {
                return Err(PodsumError::invalid(format!(
                    "duplicate episode_id {} across manifests",
                    episode.episode_id
                )));
            }
            records.push(EpisodeRecord {
                split: corpus.split,
                episode,
            });
        }
    }
    write_typed(&a.output, records)
}

fn cleanse(a: &CleanseArgs) -> Result<()> {
    let config = CleanseConfig {
        sigma: a.sigma,
        min_occurrence: a.min_occ,
        min_idf: a.min_idf,
    };
    config.validate()?;
    let episodes: Vec<Episode> = read_episodes(&a.input)?
        .into_iter()
        .filter(|r| a.split.admits(r.split))
        .map(|r| r.episode)
        .collect();
    let pairs = match a.filter {
        CleanseFilter::Brevity => {
            let pairs: Vec<CleanPair> = episodes
                .iter()
                .filter(|e| brevity_filter(&e.creator_description))
                .map(|e| CleanPair {
                    episode_id: e.episode_id.clone(),
                    reference: e.creator_description.clone(),
                })
                .collect();
            info!(
                "brevity filter kept {} of {} descriptions",
                pairs.len(),
                episodes.len()
            );
            pairs
        }
        CleanseFilter::Salience => {
            let table = match &a.idf {
                Some(p) => read_single::<IdfTable>(p)?,
                None => {
                    if episodes.is_empty() {
                        return write_typed::<CleanPair>(&a.output, Vec::new());
                    }
                    build_idf(&episodes, DocView::Descriptions)?
                }
            };
            if table.doc_view != DocView::Descriptions {
                warn!("cleansing with a transcript-view IDF table");
            }
            let set = build_training_set(&episodes, &table, &config)?;
            info!(
                "{} training pairs from {} episodes; mean words {:.1} -> {:.1} (all descriptions {:.1})",
                set.pairs.len(),
                set.input_count,
                set.mean_words_before,
                set.mean_words_after,
                set.mean_words_raw
            );
            set.pairs
        }
    };
    write_typed(&a.output, pairs)
}

fn idf(a: &IdfArgs) -> Result<()> {
    let episodes = episodes_only(read_episodes(&a.input)?);
    let view = match a.docs {
        DocsArg::Descriptions => DocView::Descriptions,
        DocsArg::Transcripts => DocView::Transcripts,
    };
    let table = build_idf(&episodes, view)?;
    info!(
        "idf over {} documents, {} terms",
        table.n_docs,
        table.df.len()
    );
    write_typed(&a.output, [table])
}

fn candidates(a: &CandidatesArgs) -> Result<()> {
    let episodes = episodes_only(read_episodes(&a.input)?);
    let sets: Vec<CandidateSet> = episodes
        .par_iter()
        .map(|e| select_candidates(e, a.head, a.tail))
        .collect();
    write_typed(&a.output, sets)
}

fn features(a: &FeaturesArgs) -> Result<()> {
    let episodes = episodes_only(read_episodes(&a.input)?);
    let sets = read_typed::<CandidateSet>(&a.candidates)?;
    let pairs = pair_candidates(&episodes, &sets)?;
    let table = match &a.idf {
        Some(p) => read_single::<IdfTable>(p)?,
        None => build_idf(&episodes, DocView::Transcripts)?,
    };
    let binner = a.binner.as_deref().map(read_single::<Binner>).transpose()?;
    let (binner, feats) = build_features(&pairs, &table, binner)?;
    if let Some(p) = &a.binner_output {
        write_typed(p, [binner])?;
    }
    write_typed(&a.output, feats)
}

fn label(a: &LabelArgs) -> Result<()> {
    let episodes = episodes_only(read_episodes(&a.input)?);
    let sets = read_typed::<CandidateSet>(&a.candidates)?;
    let pairs = pair_candidates(&episodes, &sets)?;
    let ordered: Vec<Episode> = pairs.iter().map(|(e, _)| (*e).clone()).collect();
    let labels = label_corpus(&ordered, &sets, a.tau)?;
    let ratio = labels
        .negatives_per_positive()
        .map_or(String::from("n/a"), |r| format!("1:{r:.1}"));
    info!(
        "{} positive, {} negative candidates ({ratio})",
        labels.positives, labels.negatives
    );
    if let Some(c) = candidate_coverage(&ordered, &sets, a.tau)? {
        info!(
            "{:.1}% of positive segments fall in the candidate windows",
            100.0 * c
        );
    }
    write_typed(&a.output, labels.labels)
}

fn train_cmd(a: &TrainArgs, seed: u64) -> Result<()> {
    let config = ModelConfig {
        d_model: a.d_model,
        n_layers: a.layers,
        n_heads: a.heads,
        max_positions: a.max_positions,
        seed,
        learning_rate: a.lr,
        epochs: a.epochs,
    };
    config.validate()?;
    let episodes = episodes_only(read_episodes(&a.episodes)?);
    let feats = read_typed::<SegmentFeatures>(&a.features)?;
    let labels = read_typed::<SegmentLabel>(&a.labels)?;
    let provider = a.provider.provider()?;
    let data = training_examples(&episodes, feats, &labels, &provider, config.d_model)?;
    let mode = match a.batch {
        BatchArg::PerEpisode => BatchMode::PerEpisode,
        BatchArg::FullBatch => BatchMode::FullBatch,
    };
    let outcome = train(&data, &config, mode)?;
    for (epoch, l) in outcome.losses.iter().enumerate() {
        log::debug!("epoch {epoch}: loss {l:.6}");
    }
    info!(
        "trained on {} episodes: loss {:.4} -> {:.4}",
        data.len(),
        outcome.losses.first().copied().unwrap_or(f64::NAN),
        outcome.losses.last().copied().unwrap_or(f64::NAN)
    );
    let saved = Selector::new(config, outcome.params)?.to_saved();
    let json = serde_json::to_string(&saved).expect("model serializes");
    std::fs::write(&a.model_out, json).map_err(|e| PodsumError::io(&a.model_out, e))
}

fn load_model(path: &Path) -> Result<Selector> {
    let raw = std::fs::read(path).map_err(|e| PodsumError::io(path, e))?;
    let saved: SavedModel =
        serde_json::from_slice(&raw).map_err(|e| crate::corpus_io::json_error(path, &raw, &e))?;
    Ok(Selector::from_saved(saved)?)
}

fn select(a: &SelectArgs) -> Result<()> {
    let selector = load_model(&a.model)?;
    let episodes = episodes_only(read_episodes(&a.input)?);
    let by_id: BTreeMap<&str, &Episode> = episodes
        .iter()
        .map(|e| (e.episode_id.as_str(), e))
        .collect();
    let provider = a.provider.provider()?;
    let groups = group_features(read_typed::<SegmentFeatures>(&a.features)?)?;
    let sources: Vec<SourceText> = groups
        .par_iter()
        .map(|(id, feats)| {
            let episode = by_id.get(id.as_str()).ok_or_else(|| {
                PodsumError::invalid(format!("features for unknown episode {id}"))
            })?;
            let inputs = crate::pipeline::candidate_inputs(
                episode,
                feats,
                &provider,
                selector.config.d_model,
            )?;
            let probs = selector.predict(&inputs)?;
            let cands = CandidateSet {
                episode_id: id.clone(),
                indices: feats.iter().map(|f| f.segment_index).collect(),
                head_count: feats.len(),
                tail_count: 0,
            };
            Ok(select_source(
                episode,
                &cands,
                &probs,
                a.budget,
                &WhitespaceTokenizer,
            )?)
        })
        .collect::<Result<_>>()?;
    write_typed(&a.output, sources)
}

fn lead(a: &LeadArgs) -> Result<()> {
    let episodes = episodes_only(read_episodes(&a.input)?);
    let sources: Vec<SourceText> = episodes
        .par_iter()
        .map(|e| Ok(truncate_lead(e, a.budget, &WhitespaceTokenizer)?))
        .collect::<Result<_>>()?;
    write_typed(&a.output, sources)
}

fn summarize_cmd(a: &SummarizeArgs) -> Result<()> {
    let config = DecodeConfig {
        length_penalty: a.length_penalty,
        no_repeat_ngram_size: a.no_repeat,
        min_length: a.min_len,
        max_length: a.max_len,
        num_beams: a.beam,
    };
    config.validate()?;
    let sources = read_typed::<SourceText>(&a.input)?;
    let run_one = |s: &SourceText| -> Result<SummaryRecord> {
        let summary = match a.backend {
            BackendArg::Extractive => summarize(
                &ExtractiveSummarizer::new(WhitespaceTokenizer),
                &s.text,
                &config,
                &WhitespaceTokenizer,
            )?,
            BackendArg::Service => {
                let url = a.url.as_deref().ok_or_else(|| {
                    PodsumError::invalid("--url is required for the service backend")
                })?;
                let client = ServiceClient::new(url, Duration::from_secs(a.timeout));
                summarize(&client, &s.text, &config, &WhitespaceTokenizer)?
            }
        };
        for w in &summary.warnings {
            warn!("episode {}: {w:?}", s.episode_id);
        }
        Ok(SummaryRecord {
            episode_id: s.episode_id.clone(),
            summary: summary.text,
            postprocessed: false,
            warnings: summary.warnings,
        })
    };
    let summaries: Vec<SummaryRecord> = sources.par_iter().map(run_one).collect::<Result<_>>()?;
    write_typed(&a.output, summaries)
}

fn postprocess(a: &PostprocessArgs) -> Result<()> {
    let config = PostprocessConfig {
        long_summary_tokens: a.long,
        dedup_min_occurrences: a.dedup,
    };
    config.validate()?;
    let records = read_typed::<SummaryRecord>(&a.input)?;
    let cleaned: Vec<(String, String)> = records
        .par_iter()
        .map(|r| (r.episode_id.clone(), clean_summary(&r.summary, &config)))
        .collect();
    let dedup = dedup_cross_episode(&cleaned, &config);
    for r in &dedup.removed {
        info!(
            "removed sentence shared by {} episodes: {:?}",
            r.episodes, r.sentence
        );
    }
    let out = records
        .into_iter()
        .zip(dedup.summaries)
        .map(|(r, (_, summary))| SummaryRecord {
            summary,
            postprocessed: true,
            ..r
        });
    write_typed(&a.output, out)
}

fn reference_map(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut refs = BTreeMap::new();
    for (line, record) in read_records(path)?.into_iter().enumerate() {
        let (id, text) = match record {
            Record::Summary(s) => (s.episode_id, s.summary),
            Record::CleanRef(c) => (c.episode_id, c.reference),
            Record::Episode(e) => (e.episode.episode_id, e.episode.creator_description),
            other => {
                return Err(PodsumError::Record {
                    path: path.to_path_buf(),
                    line: line + 1,
                    message: format!(
                        "expected summary, clean_ref or episode records, found \"{}\"",
                        other.kind()
                    ),
                })
            }
        };
        refs.insert(id, text);
    }
    Ok(refs)
}

fn rouge(a: &RougeArgs, out: &mut dyn Write) -> Result<()> {
    let system: Vec<(String, String)> = read_typed::<SummaryRecord>(&a.system)?
        .into_iter()
        .map(|s| (s.episode_id, s.summary))
        .collect();
    let refs = reference_map(&a.refs)?;
    let report = rouge_report(&system, &refs)?;
    if a.json {
        emit_json(out, &report)
    } else {
        emit(out, &rouge_table(&report))
    }
}

#[derive(serde::Serialize)]
struct JudgeReport {
    systems: Vec<podsum_core::eval::SystemReport>,
    versus_majority: Vec<(String, podsum_core::eval::GapDistribution)>,
    versus_baseline: Option<(String, Vec<(String, podsum_core::eval::GapDistribution)>)>,
    questions_versus_majority: Vec<(String, [f64; podsum_core::eval::QUESTION_COUNT])>,
}

fn judge(a: &JudgeArgs, out: &mut dyn Write) -> Result<()> {
    let judgments = read_typed::<JudgmentRecord>(&a.input)?;
    for j in &judgments {
        j.validate()?;
    }
    let systems: Vec<String> = if a.system.is_empty() {
        let mut all: Vec<String> = judgments.iter().map(|j| j.system_id.clone()).collect();
        all.sort();
        all.dedup();
        all
    } else {
        a.system.clone()
    };
    let majority = majority_baseline(&judgments);
    let mut report = JudgeReport {
        systems: Vec::new(),
        versus_majority: Vec::new(),
        versus_baseline: None,
        questions_versus_majority: Vec::new(),
    };
    for s in &systems {
        report.systems.push(aggregate(&judgments, s)?);
        let ratings = system_ratings(&judgments, s);
        let baseline: BTreeMap<String, u8> =
            ratings.keys().map(|k| (k.clone(), majority[k])).collect();
        report
            .versus_majority
            .push((s.clone(), compare(&ratings, &baseline)?));
        report
            .questions_versus_majority
            .push((s.clone(), question_equal_or_better(&judgments, s)?));
    }
    if let Some(b) = &a.baseline {
        let base = system_ratings(&judgments, b);
        let mut rows = Vec::new();
        for s in systems.iter().filter(|s| *s != b) {
            rows.push((s.clone(), compare(&system_ratings(&judgments, s), &base)?));
        }
        report.versus_baseline = Some((b.clone(), rows));
    }
    if a.json {
        return emit_json(out, &report);
    }
    let mut text = system_table(&report.systems);
    text.push('\n');
    text.push_str(&gap_table(&report.versus_majority, "majority"));
    if let Some((b, rows)) = &report.versus_baseline {
        text.push('\n');
        text.push_str(&gap_table(rows, b));
    }
    text.push('\n');
    text.push_str(&question_table(&report.questions_versus_majority));
    emit(out, &text)
}

fn stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let records = read_episodes(&a.input)?;
    let config = StatsConfig {
        cleanse: CleanseConfig {
            sigma: a.sigma,
            min_occurrence: a.min_occ,
            min_idf: a.min_idf,
        },
        head: a.head,
        tail: a.tail,
        tau: a.tau,
    };
    let s = corpus_stats(&records, &config)?;
    if a.json {
        emit_json(out, &s)
    } else {
        emit(out, &stats_table(&s))
    }
}

fn synth(a: &SynthArgs, seed: u64) -> Result<()> {
    let split = match a.split {
        SplitArg::Train | SplitArg::All => Split::Train,
        SplitArg::Valid => Split::Valid,
        SplitArg::Test => Split::Test,
    };
    let corpus = synth_corpus(&SynthConfig {
        episodes: a.episodes,
        split,
        seed,
        ..SynthConfig::default()
    });
    let manifest = write_corpus(&a.output_dir, &corpus)?;
    info!(
        "wrote {} episodes; manifest {}",
        corpus.episodes.len(),
        manifest.display()
    );
    Ok(())
}
