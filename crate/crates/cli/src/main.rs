use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use analogon_cli::config::{ServerConfig, Settings};
use analogon_cli::service::{router, AppState};
use analogon_core::abstraction::abstract_corpus;
use analogon_core::corpus::{load_corpus, validate_corpus};
use analogon_core::engine::{analyzer_for, load_kb_and_corpus, Engine};
use analogon_core::kb::load_kb;
use analogon_core::search::{overlap_report, ScenarioMatches};
use analogon_core::stats::{eval_report, read_ratings};
use analogon_core::{build_query, Analyzer, FocusOnlyMode, FocusSelection, Method};

#[derive(Parser)]
#[command(name = "analogon", version, about = "Focus-abstracted analogical product search")]
struct Cli {
    #[command(flatten)]
    data: DataArgs,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Line-JSON product corpus
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Primary knowledge base (line-JSON term/property/level)
    #[arg(long, global = true)]
    kb: Option<PathBuf>,
    #[arg(long = "kb-fallback", global = true)]
    kb_fallback: Option<PathBuf>,
    /// Word vectors in text format
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Precomputed purpose/mechanism vectors
    #[arg(long, global = true)]
    purpmech: Option<PathBuf>,
    /// TOML file with defaults for any of the above
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a corpus file, or check it with --validate
    Ingest {
        #[arg(long)]
        validate: bool,
    },
    /// List the abstraction properties offered for a term
    Abstractions { term: String },
    /// Build the focus query for a selection
    QueryBuild {
        #[arg(long)]
        selection: PathBuf,
    },
    /// Dump the corpus abstracted under the given properties
    Abstract {
        #[arg(long, value_delimiter = ',', required = true)]
        properties: Vec<String>,
    },
    /// Rank corpus documents against a seed selection
    Search {
        #[arg(long, default_value = "focus-abstracted")]
        method: Method,
        #[arg(long)]
        selection: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Use only the abstracted words' original terms for focus-only
        #[arg(long)]
        focus_only_abstracted_words_only: bool,
    },
    /// Means, ANOVA, Tukey HSD and correlations from a ratings CSV
    Eval {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, value_enum, default_value_t = EvalFormat::Tsv)]
        format: EvalFormat,
    },
    /// Count distinct matches across methods; one search output file per scenario
    Overlap {
        #[arg(required = true)]
        matches: Vec<PathBuf>,
        #[arg(long, default_value_t = analogon_core::search::DEFAULT_K)]
        k: usize,
        /// Print the one-line summary instead of JSON
        #[arg(long)]
        text: bool,
    },
    /// Run the HTTP API
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<i64>,
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFormat {
    Tsv,
    Json,
}

impl DataArgs {
    fn settings(&self) -> Result<Settings> {
        let flags = Settings {
            corpus_path: self.corpus.clone(),
            kb_primary_path: self.kb.clone(),
            kb_fallback_path: self.kb_fallback.clone(),
            embeddings_path: self.embeddings.clone(),
            purpmech_path: self.purpmech.clone(),
            ..Default::default()
        };
        Ok(Settings::layered(flags, self.config.as_deref())?)
    }
}

fn read_selection(path: &Path) -> Result<FocusSelection> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read selection {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid selection {}", path.display()))
}

fn load_engine(s: &Settings) -> Result<Engine> {
    Ok(Engine::load(s.require_corpus()?, s.require_kb()?, s.kb_fallback()?, s.require_embeddings()?, s.purpmech()?)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn lines<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().map(|l| l + "\n").collect()
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let settings = cli.data.settings()?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Ingest { validate } => {
            let path = settings.require_corpus()?;
            let analyzer = match settings.kb_primary_path {
                Some(_) => analyzer_for(&load_kb(settings.require_kb()?, settings.kb_fallback()?)?),
                None => Analyzer::new(),
            };
            if validate {
                let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
                let (valid, errors) = validate_corpus(BufReader::new(file), &analyzer);
                for e in &errors {
                    eprintln!("{e}");
                }
                emit(out, &format!("{}\n", serde_json::json!({ "valid": valid, "invalid": errors.len() })))?;
                if !errors.is_empty() {
                    bail!("{} invalid record(s) in {}", errors.len(), path.display());
                }
            } else {
                let corpus = load_corpus(path, &analyzer)?;
                emit(out, &lines(corpus.iter().map(|d| serde_json::to_string(d).expect("document serializes"))))?;
            }
        }
        Command::Abstractions { term } => {
            let kb = load_kb(settings.require_kb()?, settings.kb_fallback()?)?;
            let entries = kb.abstractions_for(&term.to_lowercase());
            emit(out, &lines(entries.iter().map(|e| serde_json::to_string(e).expect("entry serializes"))))?;
        }
        Command::QueryBuild { selection } => {
            let sel = read_selection(&selection)?;
            let (kb, corpus) = load_kb_and_corpus(settings.require_corpus()?, settings.require_kb()?, settings.kb_fallback()?)?;
            let doc = corpus.get(&sel.doc_id).with_context(|| format!("unknown document {:?}", sel.doc_id))?;
            let query = build_query(doc, &sel, &kb)?;
            emit(out, &format!("{}\n", serde_json::to_string(&query)?))?;
        }
        Command::Abstract { properties } => {
            let (kb, corpus) = load_kb_and_corpus(settings.require_corpus()?, settings.require_kb()?, settings.kb_fallback()?)?;
            let props: BTreeSet<String> = properties.into_iter().map(|p| p.trim().to_string()).collect();
            let docs = abstract_corpus(&corpus, &props, &kb);
            emit(out, &lines(docs.iter().map(|d| serde_json::to_string(d).expect("document serializes"))))?;
        }
        Command::Search { method, selection, k, focus_only_abstracted_words_only } => {
            let sel = read_selection(&selection)?;
            let k = match k {
                Some(k) => k,
                None => settings.k_or_default()?,
            };
            let mode = if focus_only_abstracted_words_only {
                FocusOnlyMode::AbstractedWordsOnly
            } else {
                FocusOnlyMode::Step2Terms
            };
            let engine = load_engine(&settings)?;
            let outcome = engine.search(&sel, method, k, mode)?;
            emit(out, &lines(outcome.matches.iter().map(|m| m.to_json_line())))?;
        }
        Command::Eval { ratings, format } => {
            let file = File::open(&ratings).with_context(|| format!("cannot open {}", ratings.display()))?;
            let records = read_ratings(file)?;
            let report = eval_report(&records)?;
            let text = match format {
                EvalFormat::Tsv => report.to_tsv(),
                EvalFormat::Json => report.to_json_lines(),
            };
            emit(out, &text)?;
        }
        Command::Overlap { matches, k, text } => {
            let scenarios = read_match_files(&matches)?;
            let report = overlap_report(&scenarios, k);
            let body = if text { report.to_string() } else { serde_json::to_string(&report)? };
            emit(out, &format!("{body}\n"))?;
        }
        Command::Serve { host, port, k } => {
            let flags = Settings { host, port, k_default: k, ..Default::default() };
            let config = ServerConfig::try_from(flags.or(settings))?;
            serve(config)?;
        }
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct MatchLine {
    method: Method,
    doc_id: String,
}

/// Each file holds search output lines for one scenario, named by its stem.
fn read_match_files(paths: &[PathBuf]) -> Result<BTreeMap<String, ScenarioMatches>> {
    let mut scenarios: BTreeMap<String, ScenarioMatches> = BTreeMap::new();
    for path in paths {
        let scenario = path
            .file_stem()
            .and_then(|s| s.to_str())
            .with_context(|| format!("no scenario name in {}", path.display()))?
            .to_string();
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let m: MatchLine = serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
            scenarios.entry(scenario.clone()).or_default().entry(m.method).or_default().push(m.doc_id);
        }
    }
    Ok(scenarios)
}

fn serve(config: ServerConfig) -> Result<()> {
    let engine = Engine::load(
        &config.corpus_path,
        &config.kb_primary_path,
        config.kb_fallback_path.as_deref(),
        &config.embeddings_path,
        config.purpmech_path.as_deref(),
    )?;
    let state = AppState { engine: Arc::new(engine), k_default: config.k_default };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = format!("{}:{}", config.host, config.port);
        let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("cannot bind {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(state)).await?;
        Ok(())
    })
}
