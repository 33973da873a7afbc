use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lyricraft::error::{Error, Result};
use lyricraft::remote::{RemoteBackend, RemoteConfig};
use lyricraft::service::{self, AppState, CorsConfig};
use lyricraft::session::SessionStore;
use lyricraft::toolkit::{self, PhoneticsOptions};
use lyricraft::{corpus_io, dataset_io, model_io};
use lyricraft_core::corpus::{self, FilterRules, LanguageFilter, SplitConfig};
use lyricraft_core::dataset::{self, BuildOptions, DatasetKind};
use lyricraft_core::generation::{
    self, EchoBackend, GenerationBackend, GenerationError, NgramBackend, SuggestionRequest,
};
use lyricraft_core::metrics::{self, BleuConfig, EvaluationConfig};
use lyricraft_core::ngram::NgramModel;
use lyricraft_core::rhyme::{Rhymer, DEFAULT_TOP_RHYMES};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Parser)]
#[command(name = "lyricraft", version, about = "Lyric corpus, dataset, evaluation and suggestion tools")]
struct Cli {
    #[command(flatten)]
    phonetics: PhoneticsArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PhoneticsArgs {
    /// Pronouncing dictionary (`word<TAB>IPA`) replacing the bundled one.
    #[arg(long, global = true)]
    dictionary: Option<PathBuf>,
    /// Phoneme equivalence table replacing the bundled one.
    #[arg(long, global = true, env = "LYRICRAFT_EQUIVALENCE_TABLE")]
    equivalence_table: Option<PathBuf>,
    /// External G2P command; the word is passed as the last argument.
    #[arg(long, global = true)]
    g2p_command: Option<String>,
    /// Trust the G2P command over the dictionary when both know a word.
    #[arg(long, global = true)]
    prefer_engine: bool,
    /// Fail on words neither source knows instead of guessing from spelling.
    #[arg(long, global = true)]
    no_fallback: bool,
}

impl PhoneticsArgs {
    fn options(&self) -> PhoneticsOptions {
        PhoneticsOptions {
            dictionary: self.dictionary.clone(),
            equivalence_table: self.equivalence_table.clone(),
            g2p_command: self.g2p_command.clone(),
            prefer_engine: self.prefer_engine,
            no_fallback: self.no_fallback,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Filter a raw corpus and split it into train and test songs.
    Preprocess(PreprocessArgs),
    /// Build task-tagged training data from a corpus.
    BuildDataset(BuildDatasetArgs),
    /// Train the n-gram baseline.
    TrainBaseline(TrainArgs),
    /// Score a backend on a test dataset.
    Evaluate(EvaluateArgs),
    /// Suggest next lines for a few input lines.
    Suggest(SuggestArgs),
    /// List the most frequent rhymes of a word.
    Rhymes(RhymesArgs),
    /// Run the HTTP suggestion service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    /// Raw corpus, one song per JSON line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Consecutive lines more similar than this are duplicates.
    #[arg(long, default_value_t = 0.70)]
    similarity_threshold: f64,
    #[arg(long, default_value_t = 6)]
    min_lines: usize,
    #[arg(long, default_value_t = 50)]
    min_chars: usize,
    /// Untagged songs need a stopword share above this to count as English.
    #[arg(long, default_value_t = 0.25)]
    stopword_floor: f64,
    #[arg(long, default_value_t = 0.1)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to these artists (repeatable).
    #[arg(long = "allow-artist")]
    allow_artists: Vec<String>,
    /// Drop these artists (repeatable).
    #[arg(long = "deny-artist")]
    deny_artists: Vec<String>,
}

#[derive(Args)]
struct BuildDatasetArgs {
    /// Training corpus.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "combined-list")]
    kind: DatasetKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = dataset::DEFAULT_RHYME_LIST_EXAMPLES)]
    rhyme_list_size: usize,
    /// Tag control examples with their syllable count too.
    #[arg(long)]
    control_syllable_tag: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    /// Replays dataset targets (evaluation only).
    Echo,
    Baseline,
    Remote,
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value = "baseline", env = "LYRICRAFT_BACKEND")]
    backend: BackendKind,
    /// Baseline model file.
    #[arg(long, env = "LYRICRAFT_MODEL")]
    model: Option<PathBuf>,
    /// Corpus for rhyme frequencies; defaults to the dictionary word list.
    #[arg(long, env = "LYRICRAFT_CORPUS")]
    corpus: Option<PathBuf>,
    /// Remote model URL.
    #[arg(long, env = "LYRICRAFT_ENDPOINT")]
    endpoint: Option<String>,
    #[arg(long, default_value_t = 30_000)]
    timeout_ms: u64,
    /// Extra request header, `Name: value`.
    #[arg(long, env = "LYRICRAFT_AUTH_HEADER", hide_env_values = true)]
    auth_header: Option<String>,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Test dataset (TSV).
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset name recorded in the report; defaults to the file stem.
    #[arg(long)]
    dataset_id: Option<String>,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuggestArgs {
    /// Input line, oldest first (repeatable, up to 4).
    #[arg(long = "line", required = true)]
    lines: Vec<String>,
    #[arg(long)]
    end_word: Option<String>,
    #[arg(long)]
    force_rhyme: bool,
    #[arg(long)]
    syllables: Option<usize>,
    #[arg(long, default_value_t = generation::DEFAULT_CANDIDATES)]
    k: usize,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RhymesArgs {
    word: String,
    #[arg(long, default_value_t = DEFAULT_TOP_RHYMES)]
    k: usize,
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080, env = "LYRICRAFT_PORT")]
    port: u16,
    /// Session log; sessions are kept in memory when absent.
    #[arg(long, env = "LYRICRAFT_SESSIONS")]
    sessions: Option<PathBuf>,
    /// Allowed browser origin (repeatable, `*` for any).
    #[arg(long = "cors-origin", env = "LYRICRAFT_CORS_ORIGINS", value_delimiter = ',')]
    cors_origins: Vec<String>,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long, default_value_t = 0, env = "LYRICRAFT_SEED")]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match &e {
                e if e.is_backend() => EXIT_BACKEND,
                Error::Config(_)
                | Error::Generation(GenerationError::InvalidRequest(_) | GenerationError::ConstraintConflict) => {
                    EXIT_USAGE
                }
                _ => EXIT_DATA,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let opts = cli.phonetics.options();
    match cli.command {
        Command::Preprocess(args) => preprocess(args),
        Command::BuildDataset(args) => build_dataset(args, &opts),
        Command::TrainBaseline(args) => train_baseline(args),
        Command::Evaluate(args) => evaluate(args, &opts),
        Command::Suggest(args) => suggest(args, &opts),
        Command::Rhymes(args) => rhymes(args, &opts),
        Command::Serve(args) => serve(args, &opts),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, json + "\n").map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn preprocess(args: PreprocessArgs) -> Result<()> {
    let raw = corpus_io::read_corpus(&args.input)?;
    let rules = FilterRules {
        similarity_threshold: args.similarity_threshold,
        min_lines: args.min_lines,
        min_chars: args.min_chars,
    };
    let mut language = LanguageFilter::default();
    language.stopword_floor = args.stopword_floor;
    let (filtered, stats) = corpus::preprocess(&raw, &rules, &language);
    let split = SplitConfig {
        test_fraction: args.test_fraction,
        seed: args.seed,
        allow_artists: args.allow_artists,
        deny_artists: args.deny_artists,
    };
    let (train, test) = corpus::split_by_song(&filtered, &split)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::Io { path: args.out_dir.clone(), source: e })?;
    corpus_io::write_corpus(&args.out_dir.join("filtered.jsonl"), &filtered)?;
    corpus_io::write_corpus(&args.out_dir.join("train.jsonl"), &train)?;
    corpus_io::write_corpus(&args.out_dir.join("test.jsonl"), &test)?;
    write_json(&args.out_dir.join("stats.json"), &stats)?;
    println!(
        "kept {} of {} songs ({} verses); train {} / test {} songs",
        stats.songs_out,
        stats.songs_in,
        stats.verses_out,
        train.len(),
        test.len()
    );
    Ok(())
}

fn build_dataset(args: BuildDatasetArgs, opts: &PhoneticsOptions) -> Result<()> {
    let rhymer = toolkit::build_rhymer(opts)?;
    let corpus = corpus_io::read_corpus(&args.input)?;
    let build = BuildOptions {
        seed: args.seed,
        control_syllable_tag: args.control_syllable_tag,
        rhyme_list_examples: args.rhyme_list_size,
    };
    let mixture = dataset::build_dataset(&corpus, args.kind, &build, &rhymer)?;
    let manifest = dataset_io::write_mixture(&args.out_dir, &mixture, args.seed)?;
    for task in &manifest.tasks {
        println!("{}: {} examples", task.path.display(), task.examples);
    }
    Ok(())
}

fn train_baseline(args: TrainArgs) -> Result<()> {
    let corpus = corpus_io::read_corpus(&args.input)?;
    let model = NgramModel::train(corpus.lines(), args.order)?.with_smoothing(args.smoothing);
    model_io::save_model(&args.out, &model)?;
    println!("trained order-{} model over {} words", args.order, model.vocabulary().count());
    Ok(())
}

fn parse_header(raw: &str) -> Result<(String, String)> {
    let (name, value) = raw
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("--auth-header must be `Name: value`, got {raw:?}")))?;
    Ok((name.trim().to_string(), value.trim().to_string()))
}

/// Builds the requested backend. Must run outside the async runtime.
fn make_backend(
    args: &BackendArgs,
    rhymer: &Arc<Rhymer>,
    echo_examples: Option<&[dataset::TrainingExample]>,
) -> Result<Arc<dyn GenerationBackend>> {
    match args.backend {
        BackendKind::Echo => match echo_examples {
            Some(examples) => Ok(Arc::new(EchoBackend::from_examples(examples))),
            None => Err(Error::Config("the echo backend only works with `evaluate`".into())),
        },
        BackendKind::Baseline => {
            let path =
                args.model.as_deref().ok_or_else(|| Error::Config("--model is required for the baseline".into()))?;
            let model = model_io::load_model(path)?;
            let dictionary = toolkit::load_rhyme_dictionary(args.corpus.as_deref(), rhymer)?;
            Ok(Arc::new(NgramBackend::new(model, dictionary, Arc::clone(rhymer))))
        }
        BackendKind::Remote => {
            let endpoint = args
                .endpoint
                .clone()
                .ok_or_else(|| Error::Config("--endpoint is required for the remote backend".into()))?;
            let config = RemoteConfig {
                timeout: Duration::from_millis(args.timeout_ms),
                auth_header: args.auth_header.as_deref().map(parse_header).transpose()?,
                max_in_flight: args.max_in_flight,
                ..RemoteConfig::new(endpoint)
            };
            Ok(Arc::new(RemoteBackend::new(config).map_err(|e| Error::Config(e.to_string()))?))
        }
    }
}

fn evaluate(args: EvaluateArgs, opts: &PhoneticsOptions) -> Result<()> {
    let rhymer = Arc::new(toolkit::build_rhymer(opts)?);
    let examples = dataset_io::read_tsv(&args.dataset)?;
    let backend = make_backend(&args.backend, &rhymer, Some(&examples))?;
    let dataset_id = args
        .dataset_id
        .unwrap_or_else(|| args.dataset.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let cfg = EvaluationConfig { seed: args.seed, dataset_id, bleu: BleuConfig::default() };
    let report = metrics::evaluate(&backend, &examples, &rhymer, &cfg)?;
    match &args.out {
        Some(path) => {
            model_io::save_report(path, &report)?;
            println!(
                "bleu {:.2}  lexical-rmse {:.4}  rhyme {:.4}  syllable-rmse {:.4}  end-word {:.4}  ({} examples)",
                report.bleu,
                report.lexical_diversity_rmse,
                report.rhyme_score,
                report.syllable_rmse,
                report.end_word_accuracy,
                report.n_examples
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    Ok(())
}

fn suggest(args: SuggestArgs, opts: &PhoneticsOptions) -> Result<()> {
    let rhymer = Arc::new(toolkit::build_rhymer(opts)?);
    let backend = make_backend(&args.backend, &rhymer, None)?;
    let dictionary = toolkit::load_rhyme_dictionary(args.backend.corpus.as_deref(), &rhymer)?;
    let req = SuggestionRequest {
        syllable_target: args.syllables,
        ending_word: args.end_word,
        force_rhyme: args.force_rhyme,
        k: args.k,
        ..SuggestionRequest::new(args.lines)
    };
    let mut rng = lyricraft_core::seeded_rng(args.seed);
    let set = generation::suggest(&req, &backend, &dictionary, &rhymer, &mut rng)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&set).expect("suggestions serialize"));
        return Ok(());
    }
    if let Some(advisory) = &set.advisory {
        eprintln!("note: {advisory}");
    }
    for c in &set.candidates {
        let r = &c.report;
        let end = match r.end_word_match {
            Some(true) => " end-word ok",
            Some(false) => " end-word MISSED",
            None => "",
        };
        println!("{}\t[{}/{} syllables, {:?}{end}]", c.line, r.syllables, r.syllable_target, r.rhyme_class);
    }
    Ok(())
}

fn rhymes(args: RhymesArgs, opts: &PhoneticsOptions) -> Result<()> {
    let rhymer = toolkit::build_rhymer(opts)?;
    let dictionary = toolkit::load_rhyme_dictionary(args.corpus.as_deref(), &rhymer)?;
    for r in dictionary.top_rhymes(&rhymer, &args.word, args.k)? {
        println!("{}\t{}", r.word, r.frequency);
    }
    Ok(())
}

fn serve(args: ServeArgs, opts: &PhoneticsOptions) -> Result<()> {
    let rhymer = Arc::new(toolkit::build_rhymer(opts)?);
    let backend = make_backend(&args.backend, &rhymer, None)?;
    let dictionary = Arc::new(toolkit::load_rhyme_dictionary(args.backend.corpus.as_deref(), &rhymer)?);
    let sessions = Arc::new(match &args.sessions {
        Some(path) => SessionStore::open(path)?,
        None => SessionStore::in_memory(),
    });
    let state = Arc::new(AppState::new(backend, rhymer, dictionary, sessions, args.seed));
    let cors = CorsConfig { origins: args.cors_origins };
    let addr = format!("{}:{}", args.host, args.port);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::Config(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Error::Config(format!("cannot bind {addr}: {e}")))?;
        log::info!("listening on {addr}");
        eprintln!("listening on http://{addr}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        service::serve(listener, state, &cors, shutdown)
            .await
            .map_err(|e| Error::Io { path: PathBuf::from(addr), source: e })
    })
}
