mod engine;
mod replay;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use veriloop_core::backend::MockScript;
use veriloop_core::feedback::{Author, ChatEntry};
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::Error;
use veriloop_service::{serve, App, BackendArgs, BackendSource, EditArgs, ServeArgs, Store};

use engine::{Engine, Local, Remote};
use replay::SceneFiles;

const EXIT_USAGE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_BACKEND: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "veriloop", version, about = "Edit images by prompt and check every edit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read prompts from stdin and print feedback after each edit.
    Interactive(InteractiveArgs),
    /// Re-run a recorded transcript and compare every edit.
    Replay(ReplayArgs),
    /// Replay every scene in a fixture directory.
    Batch(BatchArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct InteractiveArgs {
    #[arg(long)]
    image: PathBuf,
    /// 16-bit label PNG; without it the configured segmentation endpoint is used.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Keep the session in this store directory.
    #[arg(long, conflicts_with = "remote")]
    store: Option<PathBuf>,
    /// Base URL of a running service; the session then lives there.
    #[arg(long, env = "VERILOOP_REMOTE")]
    remote: Option<String>,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    edit: EditArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[arg(long)]
    transcript: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Directory with one subdirectory per scene.
    #[arg(long, default_value = "fixtures")]
    fixtures: PathBuf,
    /// Scenes to run; all subdirectories with a transcript when omitted.
    #[arg(long = "scene")]
    scenes: Vec<String>,
    /// Write each scene's final image and replayed transcript here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Interactive(a) => interactive(a),
        Command::Replay(a) => replay_one(a),
        Command::Batch(a) => batch(a),
        Command::Serve(a) => serve_http(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let backend = e.downcast_ref::<Error>().is_some_and(Error::is_backend_failure);
            ExitCode::from(if backend { EXIT_BACKEND } else { EXIT_USAGE })
        }
    }
}

fn render(entry: &ChatEntry) -> String {
    match (entry.heading_level, entry.author) {
        (Some(level), _) => format!("{} {}", "#".repeat(level as usize), entry.text),
        (None, Author::User) => format!("> {}", entry.text),
        (None, Author::System) => entry.text.clone(),
    }
}

fn interactive(a: InteractiveArgs) -> anyhow::Result<ExitCode> {
    let mut engine: Box<dyn Engine> = match &a.remote {
        Some(url) => Box::new(Remote::open(url, &a.image, a.labels.as_deref())?),
        None => {
            let image = ImageBuffer::load(&a.image)?;
            let labels = a.labels.as_ref().map(LabelMap::load).transpose()?;
            let store = a.store.as_ref().map(Store::open).transpose()?;
            let source = a.backend.source()?;
            Box::new(Local::open(image, labels, &source, a.edit.session_config(), store)?)
        }
    };
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    let mut shown = 0;
    show_new(engine.as_mut(), &mut shown, &mut out)?;
    for line in stdin.lock().lines() {
        let line = line?;
        let line = line.trim();
        let result = match line.split_once(' ').map_or((line, ""), |(c, r)| (c, r.trim())) {
            ("", _) => continue,
            (":quit" | ":q", _) => break,
            (":undo", _) => engine.undo(),
            (":redo", _) => engine.redo(),
            (":save", "") => Err("usage: :save <path>".to_string()),
            (":save", path) => match engine.save(Path::new(path)) {
                Ok(digest) => {
                    writeln!(out, "saved {path} ({digest})")?;
                    Ok(())
                }
                Err(e) => Err(format!("could not save: {e:#}")),
            },
            (":help", _) => Err(":undo  :redo  :save <path>  :quit; anything else is a prompt".to_string()),
            (cmd, _) if cmd.starts_with(':') => Err(format!("unknown command {cmd}; try :help")),
            _ => engine.prompt(line),
        };
        let added = show_new(engine.as_mut(), &mut shown, &mut out)?;
        if let Err(msg) = result {
            if added == 0 {
                writeln!(out, "{msg}")?;
            }
        }
        out.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

fn show_new(engine: &mut dyn Engine, shown: &mut usize, out: &mut impl Write) -> anyhow::Result<usize> {
    let chat = engine.chat()?;
    let new = chat.get(*shown..).unwrap_or_default();
    for entry in new {
        writeln!(out, "{}", render(entry))?;
    }
    *shown = chat.len();
    Ok(new.len())
}

fn replay_one(a: ReplayArgs) -> anyhow::Result<ExitCode> {
    let files = SceneFiles {
        transcript: a.transcript,
        image: a.image,
        labels: a.labels,
    };
    let extra: Vec<&Path> = a.backend.mock_script.iter().map(PathBuf::as_path).collect();
    files.check(&extra)?;
    let report = replay::run(&files, &a.backend.source()?)?;
    replay::print(&report, &mut std::io::stdout().lock())?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_MISMATCH) })
}

fn batch(a: BatchArgs) -> anyhow::Result<ExitCode> {
    let scenes = if a.scenes.is_empty() {
        let mut found = Vec::new();
        let entries = std::fs::read_dir(&a.fixtures)
            .map_err(|_| Error::MissingFixture(a.fixtures.display().to_string()))?;
        for e in entries {
            let e = e?;
            if e.path().join("transcript.json").is_file() {
                found.push(e.file_name().to_string_lossy().into_owned());
            }
        }
        found.sort();
        found
    } else {
        a.scenes.clone()
    };
    if scenes.is_empty() {
        return Err(Error::MissingFixture(format!("no scenes under {}", a.fixtures.display())).into());
    }
    if let Some(out) = &a.out {
        std::fs::create_dir_all(out)?;
    }
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for scene in &scenes {
        let dir = a.fixtures.join(scene);
        let mock = dir.join("mock.json");
        let files = SceneFiles::in_dir(&dir);
        files.check(&[&mock])?;
        let source = BackendSource::Mock(MockScript::load(&mock)?);
        writeln!(out, "== {scene}")?;
        let report = replay::run(&files, &source)?;
        replay::print(&report, &mut out)?;
        if !report.passed() {
            failed += 1;
        }
        if let Some(dest) = &a.out {
            let s = &report.session;
            std::fs::write(dest.join(format!("{scene}.png")), s.current_image().encode_png())?;
            s.transcript().save(dest.join(format!("{scene}.json")))?;
        }
    }
    writeln!(out, "{}/{} scenes pass", scenes.len() - failed, scenes.len())?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(EXIT_MISMATCH) })
}

fn serve_http(a: ServeArgs) -> anyhow::Result<ExitCode> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let app = App::new(a.service_config()?)?;
        let listener = tokio::net::TcpListener::bind(&a.listen)
            .await
            .with_context(|| format!("binding {}", a.listen))?;
        eprintln!("listening on {}", listener.local_addr()?);
        serve(app, listener).await?;
        Ok(ExitCode::SUCCESS)
    })
}
