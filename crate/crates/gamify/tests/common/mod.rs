//! Helpers shared by the service tests and the acceptance harness.

#![allow(dead_code)]

use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::Duration;
use gamify::api;
use gamify::clock::{Clock, ManualClock};
use gamify::fixtures;
use gamify::service::Service;
use gamify_core::engine::EnvDocument;
use gamify_core::model::Timestamp;
use gamify_core::social::{Period, QuestGoal};
use gamify_core::Command;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tower::ServiceExt;

pub const ADMIN_KEY: &str = "let-me-in";

pub fn tool_key(tool: &str) -> String {
    format!("{tool}-key")
}

pub fn player_token(player: &str) -> String {
    format!("{player}-token")
}

pub type Headers = Vec<(&'static str, String)>;

pub fn admin() -> Headers {
    vec![(api::HEADER_ADMIN_KEY, ADMIN_KEY.into())]
}

pub fn as_tool(tool: &str) -> Headers {
    vec![(api::HEADER_TOOL_ID, tool.into()), (api::HEADER_TOOL_KEY, tool_key(tool))]
}

pub fn as_player(player: &str) -> Headers {
    vec![
        (api::HEADER_PLAYER_ID, player.into()),
        (api::HEADER_PLAYER_TOKEN, player_token(player)),
    ]
}

pub fn memory_service(start: Timestamp) -> (Arc<Service>, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(start));
    let svc = Service::in_memory(clock.clone() as Arc<dyn Clock>, Some(ADMIN_KEY));
    (Arc::new(svc), clock)
}

pub fn app(svc: &Arc<Service>) -> Router {
    api::router(svc.clone()).0
}

pub async fn call(app: &Router, method: &str, uri: &str, headers: &Headers, body: Option<&Value>) -> (StatusCode, Bytes) {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, v);
    }
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes())
}

/// Like [`call`] but insists on a 2xx answer and decodes it.
pub async fn json(app: &Router, method: &str, uri: &str, headers: &Headers, body: Option<&Value>) -> Value {
    let (status, bytes) = call(app, method, uri, headers, body).await;
    assert!(
        status.is_success(),
        "{method} {uri}: {status} {}",
        String::from_utf8_lossy(&bytes)
    );
    serde_json::from_slice(&bytes).unwrap()
}

/// Imports `doc` through the admin API and issues credentials to every
/// tool and player in it.
pub async fn install(app: &Router, doc: &EnvDocument) {
    json(app, "POST", "/api/admin/environment", &admin(), Some(&serde_json::to_value(doc).unwrap())).await;
    for t in &doc.tools {
        let body = serde_json::json!({ "secret": tool_key(t.id.as_str()) });
        json(app, "PUT", &format!("/api/admin/tools/{}/secret", t.id), &admin(), Some(&body)).await;
    }
    for p in &doc.players {
        let body = serde_json::json!({ "token": player_token(p.id.as_str()) });
        json(app, "PUT", &format!("/api/admin/players/{}/token", p.id), &admin(), Some(&body)).await;
    }
}

/// GET responses a client can observe, in a fixed order.
pub async fn read_all(app: &Router, players: &[&str]) -> Vec<(String, StatusCode, Bytes)> {
    let mut uris = Vec::new();
    for p in players {
        for what in ["profile", "achievements", "customization", "notifications", "friends", "messages", "quests"] {
            uris.push(format!("/api/players/{p}/{what}"));
        }
        uris.push(format!("/api/rankings/friends?player={p}"));
        uris.push(format!("/api/rankings/neighborhood?player={p}&k=1"));
    }
    uris.extend(
        [
            "/api/rankings/global",
            "/api/analysis/communities?algorithm=louvain",
            "/api/analysis/communities?algorithm=girvan-newman",
            "/api/analysis/scc",
            "/api/analysis/graph",
            "/api/admin/environment",
            "/api/admin/rules",
        ]
        .map(String::from),
    );
    let mut out = Vec::new();
    for uri in uris {
        let (status, body) = call(app, "GET", &uri, &admin(), None).await;
        out.push((uri, status, body));
    }
    out
}

pub fn suite_players() -> Vec<&'static str> {
    fixtures::SUITE_PLAYERS.iter().map(|p| p.0).collect()
}

/// The durability workload: `count` suite events, with friendships,
/// messages, assistant conversations, quests and settlements mixed in.
pub fn durability_stream(seed: u64, count: usize) -> Vec<(Timestamp, Command)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let players = suite_players();
    let mut pairs: Vec<(usize, usize)> = (0..players.len())
        .flat_map(|a| (a + 1..players.len()).map(move |b| (a, b)))
        .collect();
    let texts = ["great work, thanks!", "this build is broken again", "hello", "what are badges", "ok"];
    let mut out = Vec::new();
    for event in fixtures::suite_events(seed, count) {
        let at = event.occurred_at;
        out.push((at, Command::IngestEvent { event }));
        if !rng.gen_bool(0.08) {
            continue;
        }
        let a = players[rng.gen_range(0..players.len())];
        let b = players[rng.gen_range(0..players.len())];
        let cmd = match rng.gen_range(0..5) {
            0 if !pairs.is_empty() => {
                let (x, y) = pairs.swap_remove(rng.gen_range(0..pairs.len()));
                Command::Befriend {
                    a: players[x].into(),
                    b: players[y].into(),
                }
            }
            1 => Command::SendMessage {
                from: a.into(),
                to: b.into(),
                body: texts[rng.gen_range(0..texts.len())].into(),
            },
            2 => Command::AssistantInput {
                player: a.into(),
                text: texts[rng.gen_range(0..texts.len())].into(),
            },
            3 if a != b => Command::CreateQuest {
                challenger: a.into(),
                challenged: b.into(),
                goal: QuestGoal {
                    achievement_type: "XP".into(),
                    amount: rng.gen_range(5..60),
                },
                period: Period {
                    start: at,
                    end: at + Duration::days(rng.gen_range(1..10)),
                },
            },
            _ => Command::SettleQuests,
        };
        out.push((at + Duration::seconds(1), cmd));
    }
    out
}

/// Credential setup for a stream that runs below the HTTP layer.
pub fn credential_commands() -> Vec<Command> {
    let doc = fixtures::suite_document();
    let mut cmds = vec![Command::ImportEnvironment { document: doc.clone() }];
    for t in &doc.tools {
        cmds.push(Command::SetToolSecret {
            tool: t.id.clone(),
            secret: gamify::service::digest(&tool_key(t.id.as_str())),
        });
    }
    for p in &doc.players {
        cmds.push(Command::SetPlayerToken {
            player: p.id.clone(),
            token: gamify::service::digest(&player_token(p.id.as_str())),
        });
    }
    cmds
}
