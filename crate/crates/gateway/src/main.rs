use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ontoserv_core::catalog::IndexedCatalog;
use ontoserv_core::ontology::{export_canonical, export_owl, import_canonical_with};
use ontoserv_core::profile::ProfileStore;
use ontoserv_core::text::Analyzer;
use ontoserv_core::{Execution, LanguageCode};
use ontoserv_gateway::engine::{load_catalog, load_ontology, SearchRequest, Settings};
use ontoserv_gateway::{bundle, http, Engine, EngineConfig};

#[derive(Debug, Parser)]
#[command(name = "ontoserv", version, about = "Multilingual ontology-driven e-service search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate sectoral ontology files and print their reports.
    Validate {
        #[arg(required = true)]
        ontologies: Vec<PathBuf>,
    },
    /// Merge sectoral ontologies into one canonical document.
    Merge {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "fr")]
        reference_language: LanguageCode,
        #[arg(required = true)]
        ontologies: Vec<PathBuf>,
    },
    /// Build an index directory from ontologies and a service catalog.
    Index {
        #[arg(long, num_args = 1.., required = true)]
        ontology: Vec<PathBuf>,
        #[arg(long)]
        services: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "fr")]
        default_language: LanguageCode,
        #[arg(long, default_value = "fr")]
        reference_language: LanguageCode,
        /// Stopword override as LANG=FILE; repeatable.
        #[arg(long, value_parser = stopword_arg)]
        stopwords: Vec<(LanguageCode, PathBuf)>,
    },
    /// Run one query against an index directory and print the JSON response.
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        lang: Option<LanguageCode>,
        #[arg(long)]
        user: Option<String>,
        #[arg(short)]
        k: Option<usize>,
        /// Profile journal directory, needed for personalized ranking.
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Export an ontology to OWL (Turtle).
    ExportOwl {
        ontology: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Start the HTTP server.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

fn stopword_arg(s: &str) -> Result<(LanguageCode, PathBuf), String> {
    let (lang, path) = s.split_once('=').ok_or("expected LANG=FILE")?;
    Ok((LanguageCode::new(lang).map_err(|e| e.to_string())?, PathBuf::from(path)))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn validate(paths: &[PathBuf]) -> anyhow::Result<bool> {
    let analyzer = Analyzer::default();
    let mut ok = true;
    for path in paths {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let o = import_canonical_with(&text, &analyzer).with_context(|| path.display().to_string())?;
        let report = o.validate();
        println!(
            "{}: {} concepts, {} expressions, {} error(s), {} warning(s)",
            path.display(),
            o.concepts().len(),
            o.expressions().len(),
            report.error_count(),
            report.warnings().count()
        );
        if !report.is_empty() {
            print!("{report}");
        }
        ok &= !report.has_errors();
    }
    Ok(ok)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Validate { ontologies } => validate(&ontologies),
        Command::Merge {
            output,
            reference_language,
            ontologies,
        } => {
            let merged = load_ontology(&ontologies, reference_language, &Analyzer::default())?;
            write(&output, &export_canonical(&merged))?;
            Ok(true)
        }
        Command::Index {
            ontology,
            services,
            out,
            default_language,
            reference_language,
            stopwords,
        } => {
            let mut analyzer = Analyzer::new(default_language);
            for (language, path) in &stopwords {
                analyzer.load_stopwords_file(*language, path)?;
            }
            let merged = load_ontology(&ontology, reference_language, &analyzer)?;
            let catalog = load_catalog(&services)?;
            for w in catalog.check_annotations(&merged).warnings() {
                eprintln!("warning: {w}");
            }
            let indexed = IndexedCatalog::new(catalog, analyzer, Execution::default());
            let manifest = bundle::save(&out, &merged, &indexed)?;
            println!(
                "{}: {} concepts, {} expressions, {} services, {} index keys",
                out.display(),
                manifest.concepts,
                manifest.expressions,
                manifest.services,
                manifest.index_keys
            );
            Ok(true)
        }
        Command::Search {
            index,
            query,
            lang,
            user,
            k,
            profiles,
            sequential,
        } => {
            let (_, ontology, services) = bundle::open(&index)?;
            let mut settings = Settings::default();
            if sequential {
                settings.exec = Execution::Sequential;
            }
            if k.is_some_and(|k| k > settings.max_k) {
                settings.max_k = k.unwrap_or_default();
            }
            let mut engine = Engine::new(ontology, services, settings);
            if let Some(dir) = profiles {
                engine = engine.with_profile_store(ProfileStore::open(dir)?)?;
            }
            let req = SearchRequest { q: query, lang, user, k };
            let res = engine.search(&req).map_err(|e| anyhow::anyhow!("{}: {}", e.body.code, e.body.message))?;
            // a closed pipe (`| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&res)?);
            Ok(true)
        }
        Command::ExportOwl { ontology, output } => {
            let text = std::fs::read_to_string(&ontology).with_context(|| format!("reading {}", ontology.display()))?;
            let o = import_canonical_with(&text, &Analyzer::default()).with_context(|| ontology.display().to_string())?;
            if o.validate().has_errors() {
                bail!("{}: ontology has validation errors; run `ontoserv validate`", ontology.display());
            }
            write(&output, &export_owl(&o))?;
            Ok(true)
        }
        Command::Serve { config } => {
            let config = EngineConfig::load(&config)?;
            let addr = config.listen_addr().map_err(anyhow::Error::msg)?;
            let engine = Arc::new(Engine::start(&config)?);
            let snap = engine.snapshot();
            tracing::info!(
                sectors = snap.ontology.sectors().len(),
                services = snap.services.catalog().len(),
                "engine ready"
            );
            drop(snap);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                tracing::info!(%addr, "listening");
                axum::serve(listener, http::router(engine))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
