//! Command-line verbs.

use crate::api::{self, AppState};
use anyhow::{bail, Context};
use charonette_core::video::{DEFAULT_FPS, DEFAULT_PAUSE_MS};
use charonette_core::workspace::{VideoImport, Workspace};
use charonette_core::Lexicon;
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(name = "charonette", version, about = "Frame-semantic annotation of image and video corpora")]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "CHARONETTE_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Lexicon file; the bundled lexicon is used when absent.
    #[arg(long, global = true, env = "CHARONETTE_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Import a ZIP bundle of images, captions and boxes.
    ImportStatic {
        bundle: PathBuf,
        #[arg(long)]
        corpus: String,
    },
    /// Import a transcript with optional subtitles and detections.
    ImportVideo(ImportVideoArgs),
    /// Identify and disambiguate frame-evoking targets.
    Preannotate {
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        doc: Option<String>,
    },
    /// Write a document as XML.
    Export {
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        doc: String,
        /// Output file; standard output when absent.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Load an exported XML document.
    Import {
        #[arg(short = 'i', long)]
        input: PathBuf,
        #[arg(long)]
        corpus: String,
    },
    /// Lexicon utilities.
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum LexiconCommand {
    /// Parse and check a lexicon file.
    Validate { path: PathBuf },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "CHARONETTE_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "CHARONETTE_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    /// Directory of static UI assets served at `/`.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportVideoArgs {
    #[arg(long)]
    pub corpus: String,
    #[arg(long)]
    pub transcript: PathBuf,
    #[arg(long)]
    pub subtitles: Option<PathBuf>,
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_FPS)]
    pub fps: u32,
    #[arg(long)]
    pub width: u32,
    #[arg(long)]
    pub height: u32,
    /// Document id; defaults to the transcript file stem.
    #[arg(long)]
    pub doc: Option<String>,
    #[arg(long)]
    pub media: Option<String>,
    #[arg(long)]
    pub frame_count: Option<u64>,
    #[arg(long)]
    pub first_object_id: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PAUSE_MS)]
    pub pause_ms: i64,
}

pub fn load_lexicon(path: Option<&Path>) -> anyhow::Result<Lexicon> {
    match path {
        None => Ok(Lexicon::fixture()),
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            Lexicon::from_bytes(&bytes).with_context(|| format!("loading {}", p.display()))
        }
    }
}

fn open_workspace(cli: &Cli) -> anyhow::Result<Workspace> {
    let lex = load_lexicon(cli.lexicon.as_deref())?;
    Workspace::open(&cli.data_dir, Arc::new(lex))
        .with_context(|| format!("opening store at {}", cli.data_dir.display()))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Serve(args) => serve(&cli, args)?,
        Command::ImportStatic { bundle, corpus } => {
            let mut ws = open_workspace(&cli)?;
            let bytes = fs::read(bundle).with_context(|| format!("reading {}", bundle.display()))?;
            let report = ws.import_static(corpus, &bytes)?;
            println!(
                "imported {} documents into `{}` ({} boxes without a caption mention)",
                report.documents.len(),
                report.corpus,
                report.orphan_boxes
            );
        }
        Command::ImportVideo(args) => {
            let mut ws = open_workspace(&cli)?;
            let doc_id = match &args.doc {
                Some(d) => d.clone(),
                None => args
                    .transcript
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .context("transcript path has no file name")?
                    .to_string(),
            };
            let mut input = VideoImport::new(&doc_id, read_text(&args.transcript)?, args.width, args.height);
            input.subtitles = args.subtitles.as_deref().map(read_text).transpose()?;
            input.detections = args.detections.as_deref().map(read_text).transpose()?;
            input.fps = args.fps;
            input.frame_count = args.frame_count;
            input.first_object_id = args.first_object_id;
            input.pause_threshold_ms = args.pause_ms;
            if let Some(m) = &args.media {
                input.media_ref = m.clone();
            }
            ws.import_video(&args.corpus, &input)?;
            let (doc, _) = ws.document(&args.corpus, &doc_id)?;
            println!(
                "imported `{doc_id}` into `{}`: {} sentence drafts, {} detections",
                args.corpus,
                doc.drafts.drafts.len(),
                doc.detections.len()
            );
        }
        Command::Preannotate { corpus, doc } => {
            let mut ws = open_workspace(&cli)?;
            let ids = match doc {
                Some(d) => vec![d.clone()],
                None => ws.documents(corpus)?.into_iter().map(|s| s.doc_id).collect(),
            };
            let mut out = std::io::stdout().lock();
            writeln!(out, "{:<24} {:>8} {:>10}", "document", "targets", "ambiguous")?;
            let (mut total, mut total_ambiguous) = (0, 0);
            for id in ids {
                let (targets, _) = ws.preannotate(corpus, &id, None)?;
                let (d, _) = ws.document(corpus, &id)?;
                let ambiguous = d.candidates.iter().filter(|c| c.candidate_frames.len() > 1).count();
                writeln!(out, "{id:<24} {targets:>8} {ambiguous:>10}")?;
                total += targets;
                total_ambiguous += ambiguous;
            }
            writeln!(out, "{:<24} {total:>8} {total_ambiguous:>10}", "total")?;
        }
        Command::Export { corpus, doc, output } => {
            let ws = open_workspace(&cli)?;
            let xml = ws.export(corpus, doc)?;
            match output {
                Some(path) => fs::write(path, &xml).with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().write_all(&xml)?,
            }
        }
        Command::Import { input, corpus } => {
            let mut ws = open_workspace(&cli)?;
            let xml = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
            let doc_id = ws.import_xml(corpus, &xml)?;
            println!("imported `{doc_id}` into `{corpus}`");
        }
        Command::Lexicon {
            command: LexiconCommand::Validate { path },
        } => {
            return Ok(match load_lexicon(Some(path)) {
                Ok(lex) => {
                    println!(
                        "ok: {} frames, {} frame elements, {} lexical units, {} relations",
                        lex.frames().len(),
                        lex.frame_elements().len(),
                        lex.lexical_units().len(),
                        lex.relations().len()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(cli: &Cli, args: &ServeArgs) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        let state = AppState::pending(args.token.clone());
        let mut app = api::router(state.clone());
        if let Some(dir) = &args.ui_dir {
            if !dir.is_dir() {
                bail!("UI directory {} does not exist", dir.display());
            }
            app = app.fallback_service(tower_http::services::ServeDir::new(dir));
        }
        let ws = open_workspace(cli)?;
        state.install(ws);
        tracing::info!(%addr, data_dir = %cli.data_dir.display(), "listening");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
