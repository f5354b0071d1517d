//! HTTP API. Every route is declared in one table together with the
//! credential it needs; the table drives both the router and the access
//! guard, so a route cannot exist without an access rule.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, RawPathParams, Request, State};
use axum::http::{HeaderMap, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{on, MethodFilter, MethodRouter};
use axum::{Extension, Json, Router};
use chrono::DateTime;
use gamify_core::engine::{EnvDocument, GameDef, Outcome};
use gamify_core::graph::GraphFilter;
use gamify_core::model::{AchievementType, BehaviorEvent, BehaviorTypeDef, LevelPolicy, Player, Project, Tool};
use gamify_core::rules::GameRule;
use gamify_core::customize::CustomizationRule;
use gamify_core::social::{Period, QuestGoal};
use gamify_core::{Command, Engine, PlayerId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::envdoc::hash_credentials;
use crate::service::{digest, Caller, Service, ServiceError};

pub const HEADER_ADMIN_KEY: &str = "x-admin-key";
pub const HEADER_TOOL_ID: &str = "x-tool-id";
pub const HEADER_TOOL_KEY: &str = "x-tool-key";
pub const HEADER_PLAYER_ID: &str = "x-player-id";
pub const HEADER_PLAYER_TOKEN: &str = "x-player-token";

/// Credential a route requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Admin,
    Tool,
    /// Admin, any tool, or the player named by the `{id}` path segment.
    Player,
    /// Any valid credential.
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteSpec {
    pub method: &'static str,
    pub path: &'static str,
    pub access: Access,
}

type AppState = Arc<Service>;

// Errors.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }

    fn unauthorized(message: &str) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", message)
    }

    fn forbidden(message: &str) -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", message)
    }

    fn bad_input(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_request", message)
    }
}

impl From<gamify_core::Error> for ApiError {
    fn from(e: gamify_core::Error) -> Self {
        use gamify_core::Error as E;
        let status = if e.is_not_found() {
            StatusCode::NOT_FOUND
        } else if matches!(e, E::DuplicateIdentifier { .. } | E::AlreadyFriends) {
            StatusCode::CONFLICT
        } else {
            StatusCode::UNPROCESSABLE_ENTITY
        };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Engine(e) => e.into(),
            ServiceError::Store(e) => {
                log::error!("{e}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", e.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn ok<T: Serialize>(value: T) -> ApiResult {
    Ok(Json(value).into_response())
}

fn created<T: Serialize>(value: T) -> ApiResult {
    Ok((StatusCode::CREATED, Json(value)).into_response())
}

fn parse<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_input(format!("malformed body: {e}")))
}

// Authentication.

fn header<'a>(h: &'a HeaderMap, name: &str) -> Option<&'a str> {
    h.get(name).and_then(|v| v.to_str().ok())
}

/// Resolves the caller from request headers. Presenting a credential that
/// does not check out is an error, not an anonymous request.
pub fn authenticate(svc: &Service, h: &HeaderMap) -> Result<Option<Caller>, ApiError> {
    if let Some(key) = header(h, HEADER_ADMIN_KEY) {
        return if svc.check_admin(key) {
            Ok(Some(Caller::Admin))
        } else {
            Err(ApiError::unauthorized("bad admin key"))
        };
    }
    if let Some(id) = header(h, HEADER_TOOL_ID) {
        let key = header(h, HEADER_TOOL_KEY).unwrap_or("");
        return if svc.check_tool(id, key) {
            Ok(Some(Caller::Tool(id.into())))
        } else {
            Err(ApiError::unauthorized("bad tool credentials"))
        };
    }
    if let Some(id) = header(h, HEADER_PLAYER_ID) {
        let token = header(h, HEADER_PLAYER_TOKEN).unwrap_or("");
        return if svc.check_player(id, token) {
            Ok(Some(Caller::Player(id.into())))
        } else {
            Err(ApiError::unauthorized("bad player token"))
        };
    }
    Ok(None)
}

fn authorize(access: Access, caller: Option<&Caller>, path_player: Option<&str>) -> Result<(), ApiError> {
    let Some(caller) = caller else {
        return Err(ApiError::unauthorized("credentials required"));
    };
    let allowed = match (access, caller) {
        (Access::Any, _) => true,
        (Access::Admin, Caller::Admin) => true,
        (Access::Tool, Caller::Tool(_)) => true,
        (Access::Player, Caller::Admin | Caller::Tool(_)) => true,
        (Access::Player, Caller::Player(p)) => Some(p.as_str()) == path_player,
        _ => false,
    };
    if allowed {
        Ok(())
    } else {
        Err(ApiError::forbidden("this credential cannot use this endpoint"))
    }
}

async fn guard(
    State((svc, access)): State<(AppState, Access)>,
    params: RawPathParams,
    mut req: Request,
    next: Next,
) -> Response {
    let player = params.iter().find(|(k, _)| *k == "id").map(|(_, v)| v.to_string());
    let caller = match authenticate(&svc, req.headers()) {
        Ok(c) => c,
        Err(e) => return e.into_response(),
    };
    if let Err(e) = authorize(access, caller.as_ref(), player.as_deref()) {
        return e.into_response();
    }
    req.extensions_mut().insert(caller.expect("authorized callers exist"));
    next.run(req).await
}

// Route table.

struct Table {
    router: Router<AppState>,
    specs: Vec<RouteSpec>,
    state: AppState,
}

impl Table {
    fn add(mut self, method: &'static str, path: &'static str, access: Access, handler: MethodRouter<AppState>) -> Self {
        let guarded = handler.layer(middleware::from_fn_with_state((self.state.clone(), access), guard));
        self.router = self.router.route(path, guarded);
        self.specs.push(RouteSpec { method, path, access });
        self
    }
}

macro_rules! h {
    (GET, $f:expr) => {
        on(MethodFilter::GET, $f)
    };
    (POST, $f:expr) => {
        on(MethodFilter::POST, $f)
    };
    (PUT, $f:expr) => {
        on(MethodFilter::PUT, $f)
    };
    (DELETE, $f:expr) => {
        on(MethodFilter::DELETE, $f)
    };
}

macro_rules! routes {
    ($t:expr; $($m:ident $path:literal $access:ident => $f:expr;)*) => {
        $t$(.add(stringify!($m), $path, Access::$access, h!($m, $f)))*
    };
}

fn table(svc: AppState) -> Table {
    let t = Table {
        router: Router::new(),
        specs: Vec::new(),
        state: svc,
    };
    routes! { t;
        POST "/api/behaviors" Tool => post_behavior;
        GET "/api/behaviors/{eventId}" Any => get_behavior;

        GET "/api/players/{id}/profile" Player => get_profile;
        GET "/api/players/{id}/achievements" Player => get_achievements;
        GET "/api/players/{id}/customization" Player => get_customization;
        GET "/api/players/{id}/notifications" Player => get_notifications;
        POST "/api/players/{id}/notifications/{notification}/read" Player => post_notification_read;
        GET "/api/players/{id}/friends" Player => get_friends;
        POST "/api/players/{id}/friends" Player => post_friend;
        GET "/api/players/{id}/messages" Player => get_messages;
        POST "/api/players/{id}/messages" Player => post_message;
        GET "/api/players/{id}/quests" Player => get_quests;
        POST "/api/players/{id}/quests" Player => post_quest;
        POST "/api/assistant/{id}/messages" Player => post_assistant;

        GET "/api/rankings/global" Any => get_global_ranking;
        GET "/api/rankings/friends" Any => get_friends_ranking;
        GET "/api/rankings/neighborhood" Any => get_neighborhood_ranking;

        GET "/api/analysis/communities" Any => get_communities;
        GET "/api/analysis/scc" Any => get_scc;
        GET "/api/analysis/maxflow" Any => get_maxflow;
        GET "/api/analysis/graph" Any => get_graph;

        GET "/api/admin/behavior-types" Admin => admin_list_behavior_types;
        POST "/api/admin/behavior-types" Admin => admin_define_behavior_type;
        GET "/api/admin/achievement-types" Admin => admin_list_achievement_types;
        POST "/api/admin/achievement-types" Admin => admin_define_achievement_type;
        GET "/api/admin/level-policy" Admin => admin_get_level_policy;
        PUT "/api/admin/level-policy" Admin => admin_set_level_policy;
        GET "/api/admin/games" Admin => admin_list_games;
        POST "/api/admin/games" Admin => admin_define_game;
        GET "/api/admin/projects" Admin => admin_list_projects;
        POST "/api/admin/projects" Admin => admin_define_project;
        PUT "/api/admin/projects/{project}/games" Admin => admin_set_active_games;
        GET "/api/admin/rules" Admin => admin_list_rules;
        POST "/api/admin/rules" Admin => admin_define_rule;
        GET "/api/admin/rules/{rule}" Admin => admin_get_rule;
        DELETE "/api/admin/rules/{rule}" Admin => admin_remove_rule;
        GET "/api/admin/customizations" Admin => admin_list_customizations;
        POST "/api/admin/customizations" Admin => admin_define_customization;
        GET "/api/admin/tools" Admin => admin_list_tools;
        POST "/api/admin/tools" Admin => admin_register_tool;
        PUT "/api/admin/tools/{tool}/secret" Admin => admin_set_tool_secret;
        GET "/api/admin/players" Admin => admin_list_players;
        POST "/api/admin/players" Admin => admin_register_player;
        PUT "/api/admin/players/{player}/token" Admin => admin_set_player_token;
        GET "/api/admin/environment" Admin => admin_export;
        POST "/api/admin/environment" Admin => admin_import;
        POST "/api/admin/settle" Admin => admin_settle;
    }
}

/// The router together with its route table.
pub fn router(svc: AppState) -> (Router, Vec<RouteSpec>) {
    let t = table(svc.clone());
    let fallback = |method: Method| async move {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no {method} route here"))
    };
    (t.router.fallback(fallback).with_state(svc), t.specs)
}

pub fn route_table() -> Vec<RouteSpec> {
    table(Arc::new(Service::in_memory(Arc::new(crate::clock::SystemClock), None))).specs
}

// Handlers: behaviors.

async fn post_behavior(State(svc): State<AppState>, Extension(caller): Extension<Caller>, body: Bytes) -> ApiResult {
    let event: BehaviorEvent = parse(&body)?;
    if caller != Caller::Tool(event.tool.clone()) {
        return Err(ApiError::forbidden("events must be reported by the tool they name"));
    }
    match svc.submit(Command::IngestEvent { event }) {
        Ok(Outcome::Ingested(i)) => ok(i),
        Ok(other) => unreachable!("ingest produced {other:?}"),
        // Anything the engine rejects about an event is a validation failure.
        Err(ServiceError::Engine(e)) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), e.to_string())),
        Err(e) => Err(e.into()),
    }
}

async fn get_behavior(State(svc): State<AppState>, Path(event_id): Path<String>) -> ApiResult {
    match svc.read(|e| e.ingested(&event_id)) {
        Some(i) => ok(i),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_event", format!("unknown event `{event_id}`"))),
    }
}

// Handlers: players.

fn read_player<T: Serialize>(
    svc: &Service,
    id: &str,
    f: impl FnOnce(&Engine) -> Result<T, gamify_core::Error>,
) -> ApiResult {
    let value = svc.read(|e| {
        e.env().player(id)?;
        f(e)
    })?;
    ok(value)
}

async fn get_profile(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let now = svc.now();
    read_player(&svc, &id, |e| e.profile(&id, now))
}

async fn get_achievements(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    read_player(&svc, &id, |e| Ok(e.grants_of(&id).cloned().collect::<Vec<_>>()))
}

async fn get_customization(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let now = svc.now();
    read_player(&svc, &id, |e| e.customization(&id, now))
}

async fn get_notifications(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    read_player(&svc, &id, |e| Ok(e.notifications_of(&id).cloned().collect::<Vec<_>>()))
}

async fn post_notification_read(State(svc): State<AppState>, Path((id, n)): Path<(String, u64)>) -> ApiResult {
    svc.submit(Command::MarkNotificationRead { player: id.into(), id: n })?;
    ok(json!({ "read": n }))
}

async fn get_friends(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    read_player(&svc, &id, |e| Ok(e.social().friends_of(&id)))
}

#[derive(Deserialize)]
struct FriendBody {
    friend: PlayerId,
}

async fn post_friend(State(svc): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let b: FriendBody = parse(&body)?;
    match svc.submit(Command::Befriend { a: id.into(), b: b.friend })? {
        Outcome::Friendship(f) => created(f),
        other => unreachable!("{other:?}"),
    }
}

async fn get_messages(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    read_player(&svc, &id, |e| Ok(e.social().messages_of(&id).cloned().collect::<Vec<_>>()))
}

#[derive(Deserialize)]
struct MessageBody {
    to: PlayerId,
    body: String,
}

async fn post_message(State(svc): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let b: MessageBody = parse(&body)?;
    match svc.submit(Command::SendMessage {
        from: id.into(),
        to: b.to,
        body: b.body,
    })? {
        Outcome::Message(m) => created(m),
        other => unreachable!("{other:?}"),
    }
}

async fn get_quests(State(svc): State<AppState>, Path(id): Path<String>) -> ApiResult {
    read_player(&svc, &id, |e| Ok(e.social().quests_of(&id).cloned().collect::<Vec<_>>()))
}

#[derive(Deserialize)]
struct QuestBody {
    challenged: PlayerId,
    goal: QuestGoal,
    period: Period,
}

async fn post_quest(State(svc): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let b: QuestBody = parse(&body)?;
    match svc.submit(Command::CreateQuest {
        challenger: id.into(),
        challenged: b.challenged,
        goal: b.goal,
        period: b.period,
    })? {
        Outcome::Quest(q) => created(q),
        other => unreachable!("{other:?}"),
    }
}

#[derive(Deserialize)]
struct AssistantBody {
    text: String,
}

async fn post_assistant(State(svc): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let b: AssistantBody = parse(&body)?;
    match svc.submit(Command::AssistantInput { player: id.into(), text: b.text })? {
        Outcome::Assistant(r) => ok(r),
        other => unreachable!("{other:?}"),
    }
}

// Handlers: rankings and analysis.

type Params = Query<BTreeMap<String, String>>;

fn number<T: std::str::FromStr>(q: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ApiError> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| ApiError::bad_input(format!("`{key}` must be a number"))))
        .transpose()
}

fn required<'a>(q: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    q.get(key)
        .map(String::as_str)
        .ok_or_else(|| ApiError::bad_input(format!("missing query parameter `{key}`")))
}

async fn get_global_ranking(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let limit = number(&q, "limit")?;
    ok(svc.read(|e| e.global_ranking(q.get("type").map(String::as_str), limit))?)
}

async fn get_friends_ranking(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let player = required(&q, "player")?;
    ok(svc.read(|e| e.friends_ranking(player, q.get("type").map(String::as_str)))?)
}

async fn get_neighborhood_ranking(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let player = required(&q, "player")?;
    let k = number(&q, "k")?.unwrap_or(2);
    ok(svc.read(|e| e.neighborhood_ranking(player, q.get("type").map(String::as_str), k))?)
}

fn filter(q: &BTreeMap<String, String>) -> Result<GraphFilter, ApiError> {
    let time = |key: &str| -> Result<_, ApiError> {
        q.get(key)
            .map(|v| {
                DateTime::parse_from_rfc3339(v)
                    .map(|t| t.to_utc())
                    .map_err(|_| ApiError::bad_input(format!("`{key}` must be an RFC 3339 timestamp")))
            })
            .transpose()
    };
    Ok(GraphFilter {
        labels: q
            .get("labels")
            .map(|l| l.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect::<BTreeSet<_>>()),
        from: time("from")?,
        to: time("to")?,
        project: q.get("project").map(|p| p.as_str().into()),
    })
}

fn partition(
    e: &Engine,
    g: &gamify_core::graph::InteractionGraph,
    q: &BTreeMap<String, String>,
) -> Result<gamify_core::graph::Partition, ApiError> {
    let _ = e;
    match q.get("algorithm").map(String::as_str).unwrap_or("louvain") {
        "louvain" => Ok(g.louvain()),
        "girvan-newman" => Ok(g.girvan_newman(number(q, "target")?)),
        other => Err(ApiError::bad_input(format!(
            "unknown algorithm `{other}` (expected louvain or girvan-newman)"
        ))),
    }
}

async fn get_communities(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let f = filter(&q)?;
    ok(svc.read(|e| partition(e, &e.graph(&f), &q))?)
}

async fn get_scc(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let f = filter(&q)?;
    ok(json!({ "components": svc.read(|e| e.graph(&f).tarjan_scc()) }))
}

async fn get_maxflow(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let f = filter(&q)?;
    let source = required(&q, "source")?;
    let sink = required(&q, "sink")?;
    ok(svc.read(|e| e.graph(&f).edmonds_karp(source, sink, &BTreeMap::new()))?)
}

async fn get_graph(State(svc): State<AppState>, Query(q): Params) -> ApiResult {
    let f = filter(&q)?;
    ok(svc.read(|e| -> Result<_, ApiError> {
        let g = e.graph(&f);
        let p = if q.contains_key("algorithm") { Some(partition(e, &g, &q)?) } else { None };
        Ok(g.node_link(p.as_ref()))
    })?)
}

// Handlers: administration.

fn define(svc: &Service, cmd: Command, echo: Value) -> ApiResult {
    svc.submit(cmd)?;
    created(echo)
}

async fn admin_list_behavior_types(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().behavior_types.values().cloned().collect::<Vec<_>>()))
}

async fn admin_define_behavior_type(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let def: BehaviorTypeDef = parse(&body)?;
    let echo = json!(def);
    define(&svc, Command::DefineBehaviorType { def }, echo)
}

async fn admin_list_achievement_types(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().achievement_types.values().cloned().collect::<Vec<_>>()))
}

async fn admin_define_achievement_type(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let def: AchievementType = parse(&body)?;
    let echo = json!(def);
    define(&svc, Command::DefineAchievementType { def }, echo)
}

async fn admin_get_level_policy(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().level_policy))
}

async fn admin_set_level_policy(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let policy: LevelPolicy = parse(&body)?;
    svc.submit(Command::SetLevelPolicy { policy })?;
    ok(policy)
}

async fn admin_list_games(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().games.values().cloned().collect::<Vec<_>>()))
}

async fn admin_define_game(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let g: GameDef = parse(&body)?;
    let echo = json!(g);
    define(&svc, Command::DefineGame { id: g.id, name: g.name }, echo)
}

async fn admin_list_projects(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().projects.values().cloned().collect::<Vec<_>>()))
}

async fn admin_define_project(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let project: Project = parse(&body)?;
    let echo = json!(project);
    define(&svc, Command::DefineProject { project }, echo)
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ActiveGamesBody {
    game_ids: Vec<gamify_core::GameId>,
}

async fn admin_set_active_games(State(svc): State<AppState>, Path(project): Path<String>, body: Bytes) -> ApiResult {
    let b: ActiveGamesBody = parse(&body)?;
    svc.submit(Command::SetActiveGames {
        project: project.as_str().into(),
        game_ids: b.game_ids,
    })?;
    ok(svc.read(|e| e.env().projects.get(project.as_str()).cloned()))
}

async fn admin_list_rules(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.rules().iter().cloned().collect::<Vec<_>>()))
}

async fn admin_define_rule(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let rule: GameRule = parse(&body)?;
    let echo = json!(rule);
    define(&svc, Command::DefineRule { rule }, echo)
}

async fn admin_get_rule(State(svc): State<AppState>, Path(rule): Path<String>) -> ApiResult {
    match svc.read(|e| e.rules().get(&rule).cloned()) {
        Some(r) => ok(r),
        None => Err(gamify_core::Error::UnknownRule(rule).into()),
    }
}

async fn admin_remove_rule(State(svc): State<AppState>, Path(rule): Path<String>) -> ApiResult {
    svc.submit(Command::RemoveRule { id: rule.as_str().into() })?;
    ok(json!({ "removed": rule }))
}

async fn admin_list_customizations(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.customizations().iter().cloned().collect::<Vec<_>>()))
}

async fn admin_define_customization(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let rule: CustomizationRule = parse(&body)?;
    let echo = json!(rule);
    define(&svc, Command::DefineCustomization { rule }, echo)
}

fn public_tool(t: &Tool) -> Tool {
    Tool {
        secret: None,
        ..t.clone()
    }
}

fn public_player(p: &Player) -> Player {
    Player {
        token: None,
        ..p.clone()
    }
}

async fn admin_list_tools(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().tools.values().map(public_tool).collect::<Vec<_>>()))
}

async fn admin_register_tool(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let mut tool: Tool = parse(&body)?;
    tool.secret = tool.secret.as_deref().map(digest);
    let echo = json!(public_tool(&tool));
    define(&svc, Command::RegisterTool { tool }, echo)
}

#[derive(Deserialize)]
struct SecretBody {
    secret: String,
}

async fn admin_set_tool_secret(State(svc): State<AppState>, Path(tool): Path<String>, body: Bytes) -> ApiResult {
    let b: SecretBody = parse(&body)?;
    svc.submit(Command::SetToolSecret {
        tool: tool.as_str().into(),
        secret: digest(&b.secret),
    })?;
    ok(json!({ "tool": tool }))
}

async fn admin_list_players(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.env().players.values().map(public_player).collect::<Vec<_>>()))
}

async fn admin_register_player(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let mut player: Player = parse(&body)?;
    player.token = player.token.as_deref().map(digest);
    let echo = json!(public_player(&player));
    define(&svc, Command::RegisterPlayer { player }, echo)
}

#[derive(Deserialize)]
struct TokenBody {
    token: String,
}

async fn admin_set_player_token(State(svc): State<AppState>, Path(player): Path<String>, body: Bytes) -> ApiResult {
    let b: TokenBody = parse(&body)?;
    svc.submit(Command::SetPlayerToken {
        player: player.as_str().into(),
        token: digest(&b.token),
    })?;
    ok(json!({ "player": player }))
}

async fn admin_export(State(svc): State<AppState>) -> ApiResult {
    ok(svc.read(|e| e.export()))
}

async fn admin_import(State(svc): State<AppState>, body: Bytes) -> ApiResult {
    let mut document: EnvDocument = parse(&body)?;
    hash_credentials(&mut document);
    svc.submit(Command::ImportEnvironment { document })?;
    ok(svc.read(|e| e.export()))
}

async fn admin_settle(State(svc): State<AppState>) -> ApiResult {
    match svc.submit(Command::SettleQuests)? {
        Outcome::Settled { changes } => ok(changes),
        other => unreachable!("{other:?}"),
    }
}

/// Serves until Ctrl-C.
pub async fn serve(svc: AppState, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let (app, _) = router(svc);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
