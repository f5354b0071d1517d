use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use gamify::clock::SystemClock;
use gamify::envdoc::{self, hash_credentials};
use gamify::service::{digest, Service};
use gamify::store::{self, DEFAULT_SNAPSHOT_EVERY};
use gamify::{api, fixtures, report};
use gamify_core::engine::{EnvDocument, GameDef};
use gamify_core::graph::GraphFilter;
use gamify_core::model::{AchievementType, BehaviorTypeDef, LevelPolicy, Player, Project, Tool};
use gamify_core::rules::GameRule;
use gamify_core::customize::CustomizationRule;
use gamify_core::Command;
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "gamify", version, about = "Gamification engine: HTTP service and administration")]
struct Cli {
    /// Directory holding the command log and snapshots.
    #[arg(long, global = true, default_value = "gamify-data")]
    data_dir: PathBuf,
    /// Records between automatic snapshots.
    #[arg(long, global = true, default_value_t = DEFAULT_SNAPSHOT_EVERY)]
    snapshot_every: u64,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        /// Key for the /api/admin routes; without it they always refuse.
        #[arg(long, env = "GAMIFY_ADMIN_KEY", hide_env_values = true)]
        admin_key: Option<String>,
    },
    /// Define one entity, or a JSON array of them, from a file.
    Define { entity: Entity, file: PathBuf },
    /// Add every definition in a document; fails whole if any identifier exists.
    Import { file: PathBuf },
    /// Write the environment document (stdout by default).
    Export { file: Option<PathBuf> },
    /// Ingest an events file (one JSON event per line) at each event's time.
    Replay {
        events: PathBuf,
        /// Refuse to run unless the data directory is empty.
        #[arg(long)]
        fresh: bool,
        /// Import this environment document first.
        #[arg(long)]
        env: Option<PathBuf>,
    },
    /// Print a report of the current state.
    Report {
        kind: ReportKind,
        /// Point type for rankings (defaults to the level basis).
        #[arg(long = "type")]
        point_type: Option<String>,
    },
    /// Write a bundled environment and its events into a directory.
    Fixture { name: FixtureName, dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Entity {
    BehaviorType,
    AchievementType,
    LevelPolicy,
    Game,
    Project,
    Rule,
    Customization,
    Tool,
    Player,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Totals,
    Rankings,
    Communities,
    Grants,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixtureName {
    Cases,
    Suite,
    Triangles,
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn open(cli: &Cli) -> Result<Service> {
    let (svc, recovery) = Service::open(&cli.data_dir, cli.snapshot_every, Arc::new(SystemClock), None)?;
    log::debug!("recovered {recovery:?}");
    Ok(svc)
}

/// Accepts either one JSON value or an array of them.
fn items<T: DeserializeOwned>(file: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(file).map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let list = match value {
        serde_json::Value::Array(v) => v,
        v => vec![v],
    };
    list.into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| format!("{}: {e}", file.display()).into()))
        .collect()
}

fn define_commands(entity: Entity, file: &Path) -> Result<Vec<Command>> {
    Ok(match entity {
        Entity::BehaviorType => items::<BehaviorTypeDef>(file)?
            .into_iter()
            .map(|def| Command::DefineBehaviorType { def })
            .collect(),
        Entity::AchievementType => items::<AchievementType>(file)?
            .into_iter()
            .map(|def| Command::DefineAchievementType { def })
            .collect(),
        Entity::LevelPolicy => items::<LevelPolicy>(file)?
            .into_iter()
            .map(|policy| Command::SetLevelPolicy { policy })
            .collect(),
        Entity::Game => items::<GameDef>(file)?
            .into_iter()
            .map(|g| Command::DefineGame { id: g.id, name: g.name })
            .collect(),
        Entity::Project => items::<Project>(file)?
            .into_iter()
            .map(|project| Command::DefineProject { project })
            .collect(),
        Entity::Rule => items::<GameRule>(file)?
            .into_iter()
            .map(|rule| Command::DefineRule { rule })
            .collect(),
        Entity::Customization => items::<CustomizationRule>(file)?
            .into_iter()
            .map(|rule| Command::DefineCustomization { rule })
            .collect(),
        Entity::Tool => items::<Tool>(file)?
            .into_iter()
            .map(|mut tool| {
                tool.secret = tool.secret.as_deref().map(digest);
                Command::RegisterTool { tool }
            })
            .collect(),
        Entity::Player => items::<Player>(file)?
            .into_iter()
            .map(|mut player| {
                player.token = player.token.as_deref().map(digest);
                Command::RegisterPlayer { player }
            })
            .collect(),
    })
}

fn import(svc: &Service, mut document: EnvDocument) -> Result<()> {
    hash_credentials(&mut document);
    svc.submit(Command::ImportEnvironment { document })?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Cmd::Serve { listen, admin_key } => {
            if admin_key.is_none() {
                log::warn!("no admin key configured; administration routes will refuse every request");
            }
            let (svc, recovery) = Service::open(
                &cli.data_dir,
                cli.snapshot_every,
                Arc::new(SystemClock),
                admin_key.as_deref(),
            )?;
            log::info!(
                "recovered {} records on top of snapshot {:?}",
                recovery.replayed,
                recovery.snapshot_seq
            );
            let svc = Arc::new(svc);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(api::serve(svc.clone(), *listen))?;
            svc.snapshot()?;
        }
        Cmd::Define { entity, file } => {
            let cmds = define_commands(*entity, file)?;
            let svc = open(&cli)?;
            let n = cmds.len();
            for cmd in cmds {
                svc.submit(cmd)?;
            }
            writeln!(stdout, "defined {n}")?;
        }
        Cmd::Import { file } => {
            let doc = envdoc::read_document(file)?;
            import(&open(&cli)?, doc)?;
        }
        Cmd::Export { file } => {
            let doc = open(&cli)?.read(|e| e.export());
            match file {
                Some(f) => envdoc::write_document(f, &doc)?,
                None => stdout.write_all(&envdoc::to_bytes(&doc))?,
            }
        }
        Cmd::Replay { events, fresh, env } => {
            if *fresh && !store::is_empty(&cli.data_dir) {
                return Err(format!("{} is not empty", cli.data_dir.display()).into());
            }
            let events = envdoc::read_events(events)?;
            let doc = env.as_deref().map(envdoc::read_document).transpose()?;
            let svc = open(&cli)?;
            if let Some(doc) = doc {
                import(&svc, doc)?;
            }
            let (mut fresh_events, mut duplicates, mut grants) = (0, 0, 0);
            for event in events {
                let at = event.occurred_at;
                let id = event.event_id.clone();
                match svc.submit_at(Command::IngestEvent { event }, at) {
                    Ok(gamify_core::engine::Outcome::Ingested(i)) => {
                        if i.replayed {
                            duplicates += 1;
                        } else {
                            fresh_events += 1;
                        }
                        grants += i.grants.len();
                    }
                    Ok(_) => unreachable!(),
                    Err(e) => return Err(format!("event {id}: {e}").into()),
                }
            }
            svc.snapshot()?;
            writeln!(stdout, "ingested {fresh_events}, duplicates {duplicates}, grants {grants}")?;
        }
        Cmd::Report { kind, point_type } => {
            let svc = open(&cli)?;
            let text = svc.read(|e| -> std::result::Result<String, gamify_core::Error> {
                Ok(match kind {
                    ReportKind::Totals => report::totals(e)?,
                    ReportKind::Rankings => report::rankings(e, point_type.as_deref())?,
                    ReportKind::Communities => report::communities(e, &GraphFilter::default()),
                    ReportKind::Grants => report::grants(e),
                })
            })?;
            stdout.write_all(text.as_bytes())?;
        }
        Cmd::Fixture { name, dir } => {
            let (doc, events) = match name {
                FixtureName::Cases => (fixtures::cases_document(), fixtures::cases_events()),
                FixtureName::Suite => (
                    fixtures::suite_document(),
                    fixtures::suite_events(fixtures::SUITE_SEED, fixtures::SUITE_EVENTS),
                ),
                FixtureName::Triangles => (fixtures::triangles_document(), fixtures::triangles_events()),
            };
            fs::create_dir_all(dir)?;
            envdoc::write_document(&dir.join("environment.json"), &doc)?;
            fs::write(dir.join("events.jsonl"), envdoc::events_to_bytes(&events))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
