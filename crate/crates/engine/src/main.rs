use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use iolap::session::seed_from_env;
use iolap::{Catalog, SessionManager, SharedCatalog};
use iolap_engine::{router, run_script, AppState};

#[derive(Parser)]
#[command(name = "engine", about = "Intentional OLAP engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        catalog: PathBuf,
    },
    /// Interactive session on stdin.
    Repl {
        #[arg(long)]
        catalog: PathBuf,
    },
    /// Run a script of statements, one per line, printing one JSON document per line.
    Run {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        script: PathBuf,
    },
}

fn sessions(dir: &PathBuf) -> anyhow::Result<SessionManager> {
    let c = Catalog::load_dir(dir).with_context(|| format!("loading catalog {}", dir.display()))?;
    Ok(SessionManager::new(SharedCatalog::new(c), seed_from_env()))
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Serve { port, catalog } => {
            let state = AppState {
                sessions: Arc::new(sessions(&catalog)?),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                log::info!("listening on {}", listener.local_addr()?);
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
        Command::Repl { catalog } => repl(&sessions(&catalog)?)?,
        Command::Run { catalog, script } => {
            let s = sessions(&catalog)?;
            let file = std::fs::File::open(&script).with_context(|| format!("opening {}", script.display()))?;
            let stdout = std::io::stdout();
            let outcome = run_script(&s, BufReader::new(file), stdout.lock())?;
            if outcome.failed > 0 {
                eprintln!("{} of {} statements failed", outcome.failed, outcome.ok + outcome.failed);
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

fn repl(s: &SessionManager) -> anyhow::Result<()> {
    let id = s.create();
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    write!(out, "iql> ")?;
    out.flush()?;
    for line in stdin.lock().lines() {
        let line = line?;
        match line.trim() {
            "" => {}
            ":quit" | ":q" => break,
            ":catalog" => println!("{}", serde_json::to_string_pretty(&s.catalog.read().to_json())?),
            ":dashboard" => println!("{}", serde_json::to_string_pretty(&s.dashboard(id)?)?),
            text => match s.submit(id, text) {
                Ok(doc) => {
                    println!("{}: {} cells", doc["name"], doc["cube"]["cells"].as_array().map_or(0, Vec::len));
                    if !doc["highlight"].is_null() {
                        let h = &doc["highlight"];
                        println!("highlight {} / {} score {}", h["model"], h["component"], h["score"]);
                        for c in h["core_cell_coordinates"].as_array().into_iter().flatten() {
                            println!("  {c}");
                        }
                    }
                }
                Err(e) => println!("{e}"),
            },
        }
        write!(out, "iql> ")?;
        out.flush()?;
    }
    Ok(())
}
