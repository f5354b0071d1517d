//! Bundled environments and event streams: the "Task completion" rule with
//! its three worked cases, and a synthetic replay of the tool suite's
//! behavior catalog (four tools, nineteen behaviors).

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use gamify_core::engine::{EnvDocument, GameDef};
use gamify_core::expr::Expr;
use gamify_core::model::{
    AchievementClass, AchievementType, BehaviorEvent, BehaviorKind, BehaviorTypeDef, LevelPolicy, Player, Project,
    TaskAttrs, Timestamp, Tool,
};
use gamify_core::rules::{AchievementOutcome, GameRule, GrantTarget, Interval, RuleKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TASK_COMPLETION_MESSAGE: &str = "Congrats! You've completed a task! (Task #id, #name)";

fn outcome(ty: &str, condition: &str, modifier: Option<&str>, message: &str) -> AchievementOutcome {
    AchievementOutcome {
        achievement_type: ty.into(),
        condition: Expr::parse_unchecked(condition).expect("fixture condition"),
        modifier: modifier.map(|m| Expr::parse_unchecked(m).expect("fixture modifier")),
        message_template: message.into(),
        first_time_only: false,
        grant_target: GrantTarget::Actor,
    }
}

fn behavior(id: &str, kind: BehaviorKind, name: &str, category: &str) -> BehaviorTypeDef {
    BehaviorTypeDef {
        identifier: id.into(),
        kind,
        name: name.into(),
        description: String::new(),
        category: category.into(),
    }
}

fn achievement(id: &str, class: AchievementClass, name: &str) -> AchievementType {
    AchievementType {
        identifier: id.into(),
        class,
        name: name.into(),
        is_level_basis: id == "XP",
    }
}

fn player(id: &str, name: &str, joined: Timestamp) -> Player {
    Player {
        id: id.into(),
        name: name.into(),
        joined_at: joined,
        token: None,
    }
}

fn tool(id: &str, name: &str) -> Tool {
    Tool {
        id: id.into(),
        name: name.into(),
        secret: None,
    }
}

/// The rule exactly as the worked example defines it.
pub fn task_completion_rule(game: &str) -> GameRule {
    GameRule {
        id: "task-completion".into(),
        name: "Task completion".into(),
        game_id: game.into(),
        source_behavior_type: "GSE_TASK_COMPLETED".into(),
        kind: RuleKind::Simple,
        outcomes: vec![
            outcome("XP", "realEffort < estimatedEffort", Some("estimatedEffort"), TASK_COMPLETION_MESSAGE),
            outcome(
                "XP",
                "realEffort ≥ estimatedEffort",
                Some("estimatedEffort − (realEffort − estimatedEffort)"),
                "Task #id done, over the estimate (#name)",
            ),
            outcome("STAR", "realEffort < (estimatedEffort/2)", None, "Star performer! (Task #id, #name)"),
        ],
    }
}

// Cases 1-3.

pub fn cases_start() -> Timestamp {
    Utc.with_ymd_and_hms(2024, 4, 1, 8, 0, 0).unwrap()
}

pub fn cases_document() -> EnvDocument {
    EnvDocument {
        behavior_types: vec![behavior("GSE_TASK_COMPLETED", BehaviorKind::Task, "Complete a task", "Tasks")],
        achievement_types: vec![
            achievement("XP", AchievementClass::Points, "Experience points"),
            achievement("STAR", AchievementClass::Badge, "Star performer"),
        ],
        level_policy: LevelPolicy::default(),
        games: vec![GameDef {
            id: "tasks".into(),
            name: "Task management".into(),
        }],
        projects: vec![Project {
            id: "auth-service".into(),
            name: "Authentication service".into(),
            active_game_ids: ["tasks".into()].into_iter().collect(),
        }],
        tools: vec![tool("sc-manage", "SC-Manage")],
        players: vec![player("john", "John", cases_start())],
        rules: vec![task_completion_rule("tasks")],
        ..EnvDocument::default()
    }
}

/// John completes task 45 (estimated 20 hours) in 18, 22 and 8 hours.
pub fn cases_events() -> Vec<BehaviorEvent> {
    [18.0, 22.0, 8.0]
        .iter()
        .enumerate()
        .map(|(i, &real)| BehaviorEvent {
            event_id: format!("case-{}", i + 1).into(),
            behavior_type: "GSE_TASK_COMPLETED".into(),
            player: "john".into(),
            tool: "sc-manage".into(),
            project: "auth-service".into(),
            occurred_at: cases_start() + Duration::hours(1 + i as i64),
            artifact_id: Some("45".into()),
            artifact_name: Some("User authentication".into()),
            task_attrs: Some(TaskAttrs {
                estimated_effort: Some(20.0),
                real_effort: Some(real),
                ..TaskAttrs::default()
            }),
            interaction: None,
        })
        .collect()
}

// Tool-suite catalog.

/// (tool id, tool name)
pub const TOOLS: [(&str, &str); 4] = [
    ("sc-manage", "SC-Manage"),
    ("redmine", "Redmine"),
    ("testlink", "TestLink"),
    ("junit", "JUnit"),
];

/// (behavior id, name, tool id, kind, category). The attachment behavior is
/// listed twice in the catalog, once per reporting tool.
pub const CATALOG: [(&str, &str, &str, BehaviorKind, &str); 19] = [
    ("GSE_TASK_CREATED", "Create task", "sc-manage", BehaviorKind::Simple, "Project management"),
    ("GSE_TASK_ASSIGNED", "Assign a task to people", "sc-manage", BehaviorKind::Simple, "Project management"),
    ("GSE_TASK_EFFORT_REPORTED", "Report task effort", "sc-manage", BehaviorKind::Task, "Project management"),
    ("GSE_TASK_COMPLETED", "Complete a task", "sc-manage", BehaviorKind::Task, "Project management"),
    ("GSE_REQ_BOOK_OPENED", "Open requirements book", "sc-manage", BehaviorKind::Simple, "Requirements"),
    ("GSE_REQ_SECTION_CREATED", "Create requirement section", "sc-manage", BehaviorKind::Simple, "Requirements"),
    ("GSE_REQ_REGISTERED", "Register requirement", "sc-manage", BehaviorKind::Simple, "Requirements"),
    ("GSE_REQ_STATE_UPDATED", "Update requirement state", "sc-manage", BehaviorKind::Simple, "Requirements"),
    ("GSE_REQ_ATTACHMENT_SCM", "Add attachment to requirement", "sc-manage", BehaviorKind::Simple, "Requirements"),
    ("GSE_REQ_ATTACHMENT_RM", "Add attachment to requirement", "redmine", BehaviorKind::Simple, "Requirements"),
    ("GSE_REQ_BOOK_CLOSED", "Close requirements book", "redmine", BehaviorKind::Simple, "Requirements"),
    ("GSE_SERIOUS_BUG_DEV", "Serious bug in development", "redmine", BehaviorKind::Simple, "Issues"),
    ("GSE_SERIOUS_BUG_PROD", "Serious bug in production", "redmine", BehaviorKind::Simple, "Issues"),
    ("GSE_MINOR_BUG_DEV", "Minor bug in development", "testlink", BehaviorKind::Simple, "Issues"),
    ("GSE_MINOR_BUG_PROD", "Minor bug in production", "testlink", BehaviorKind::Simple, "Issues"),
    ("GSE_ISSUE_CLOSED", "Close issue", "testlink", BehaviorKind::Simple, "Issues"),
    ("GSE_TEST_PLAN_CREATED", "Create test plan", "testlink", BehaviorKind::Simple, "Testing"),
    ("GSE_TEST_CASE_CREATED", "Create a test case", "junit", BehaviorKind::Simple, "Testing"),
    ("GSE_UNIT_TESTS_RUN", "Run unit tests", "junit", BehaviorKind::Task, "Testing"),
];

pub const SUITE_PLAYERS: [(&str, &str); 6] = [
    ("ana", "Ana"),
    ("ben", "Ben"),
    ("carla", "Carla"),
    ("dmitri", "Dmitri"),
    ("eva", "Eva"),
    ("farid", "Farid"),
];

pub fn suite_start() -> Timestamp {
    Utc.with_ymd_and_hms(2024, 1, 8, 8, 0, 0).unwrap()
}

// Flat rewards for the simple behaviors. Only Task completion has known
// rewards; these are illustrative.
const FLAT_POINTS: [(&str, &str, i64); 15] = [
    ("GSE_TASK_CREATED", "requirements", 2),
    ("GSE_TASK_ASSIGNED", "requirements", 1),
    ("GSE_REQ_BOOK_OPENED", "requirements", 1),
    ("GSE_REQ_SECTION_CREATED", "requirements", 2),
    ("GSE_REQ_REGISTERED", "requirements", 3),
    ("GSE_REQ_STATE_UPDATED", "requirements", 1),
    ("GSE_REQ_ATTACHMENT_SCM", "requirements", 1),
    ("GSE_REQ_ATTACHMENT_RM", "requirements", 1),
    ("GSE_SERIOUS_BUG_DEV", "quality", 5),
    ("GSE_SERIOUS_BUG_PROD", "quality", 2),
    ("GSE_MINOR_BUG_DEV", "quality", 2),
    ("GSE_MINOR_BUG_PROD", "quality", 1),
    ("GSE_ISSUE_CLOSED", "quality", 3),
    ("GSE_TEST_PLAN_CREATED", "quality", 4),
    ("GSE_TEST_CASE_CREATED", "quality", 2),
];

fn simple_rule(id: &str, game: &str, source: &str, kind: RuleKind, outcomes: Vec<AchievementOutcome>) -> GameRule {
    GameRule {
        id: id.into(),
        name: id.replace('-', " "),
        game_id: game.into(),
        source_behavior_type: source.into(),
        kind,
        outcomes,
    }
}

pub fn suite_document() -> EnvDocument {
    let mut rules = vec![task_completion_rule("tasks")];
    let mut first = outcome("FIRST_TASK", "true", None, "First task completed!");
    first.first_time_only = true;
    rules.push(simple_rule("first-task", "tasks", "GSE_TASK_COMPLETED", RuleKind::Simple, vec![first]));
    rules.push(simple_rule(
        "effort-report",
        "tasks",
        "GSE_TASK_EFFORT_REPORTED",
        RuleKind::Simple,
        vec![outcome("XP", "realEffort > 0", Some("realEffort / 2"), "Effort reported for #name")],
    ));
    let mut green = outcome("GREEN_BUILD", "grade == 100", None, "Every unit test passed in #name");
    green.first_time_only = true;
    rules.push(simple_rule(
        "unit-tests",
        "quality",
        "GSE_UNIT_TESTS_RUN",
        RuleKind::Simple,
        vec![outcome("XP", "grade >= 90", Some("5"), "Unit tests mostly green in #name"), green],
    ));
    rules.push(simple_rule(
        "book-closed",
        "requirements",
        "GSE_REQ_BOOK_CLOSED",
        RuleKind::Simple,
        vec![
            outcome("XP", "true", Some("5"), "Requirements book #id closed"),
            outcome("COINS", "true", Some("10"), "10 coins for closing #name"),
        ],
    ));
    rules.push(simple_rule(
        "bug-squasher",
        "quality",
        "GSE_ISSUE_CLOSED",
        RuleKind::Repetitive {
            repetition_count: 10,
            window: None,
        },
        vec![outcome("BUG_SQUASHER", "true", None, "Ten more issues closed")],
    ));
    rules.push(simple_rule(
        "weekly-tester",
        "quality",
        "GSE_TEST_CASE_CREATED",
        RuleKind::IntervalRepetitive {
            repetition_count: 3,
            interval: Interval::Week,
        },
        vec![outcome("WEEKLY_TESTER", "true", None, "Three test cases this week")],
    ));
    for (source, game, points) in FLAT_POINTS {
        rules.push(simple_rule(
            &format!("flat-{}", source.trim_start_matches("GSE_").to_lowercase().replace('_', "-")),
            game,
            source,
            RuleKind::Simple,
            vec![outcome("XP", "true", Some(&points.to_string()), "#name")],
        ));
    }

    EnvDocument {
        behavior_types: CATALOG
            .iter()
            .map(|(id, name, _, kind, category)| behavior(id, *kind, name, category))
            .collect(),
        achievement_types: vec![
            achievement("XP", AchievementClass::Points, "Experience points"),
            achievement("STAR", AchievementClass::Badge, "Star performer"),
            achievement("FIRST_TASK", AchievementClass::Badge, "First task completed!"),
            achievement("GREEN_BUILD", AchievementClass::Badge, "Green build"),
            achievement("BUG_SQUASHER", AchievementClass::Badge, "Bug squasher"),
            achievement("WEEKLY_TESTER", AchievementClass::Badge, "Weekly tester"),
            achievement("COINS", AchievementClass::Resource, "Coins"),
        ],
        level_policy: LevelPolicy::default(),
        games: [
            ("tasks", "Task management"),
            ("requirements", "Requirements"),
            ("quality", "Quality"),
        ]
        .iter()
        .map(|(id, name)| GameDef {
            id: (*id).into(),
            name: (*name).into(),
        })
        .collect(),
        projects: vec![
            Project {
                id: "sc-core".into(),
                name: "Core platform".into(),
                active_game_ids: ["tasks".into(), "requirements".into(), "quality".into()].into_iter().collect(),
            },
            Project {
                id: "sc-web".into(),
                name: "Web front end".into(),
                active_game_ids: ["tasks".into(), "quality".into()].into_iter().collect(),
            },
        ],
        tools: TOOLS.iter().map(|(id, name)| tool(id, name)).collect(),
        players: SUITE_PLAYERS
            .iter()
            .map(|(id, name)| player(id, name, suite_start()))
            .collect(),
        rules,
        ..EnvDocument::default()
    }
}

fn date(t: Timestamp) -> NaiveDate {
    t.date_naive()
}

/// A reproducible stream of `count` catalog behaviors from all four tools.
pub fn suite_events(seed: u64, count: usize) -> Vec<BehaviorEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at = suite_start();
    (0..count)
        .map(|k| {
            at += Duration::minutes(rng.gen_range(1..=240));
            let (id, name, tool, kind, _) = CATALOG[rng.gen_range(0..CATALOG.len())];
            let player = SUITE_PLAYERS[rng.gen_range(0..SUITE_PLAYERS.len())].0;
            let project = if rng.gen_bool(0.75) { "sc-core" } else { "sc-web" };
            let artifact = rng.gen_range(1..400u32);
            let task_attrs = match (kind, id) {
                (BehaviorKind::Task, "GSE_TASK_EFFORT_REPORTED") => Some(TaskAttrs {
                    real_effort: Some(f64::from(rng.gen_range(1..=16u32)) / 2.0),
                    ..TaskAttrs::default()
                }),
                (BehaviorKind::Task, "GSE_UNIT_TESTS_RUN") => Some(TaskAttrs {
                    grade: Some(f64::from(rng.gen_range(60..=100u32))),
                    ..TaskAttrs::default()
                }),
                (BehaviorKind::Task, _) => {
                    let est = f64::from(rng.gen_range(2..=40u32));
                    let real = f64::from(rng.gen_range(1..=48u32));
                    let planned = date(at) + Duration::days(rng.gen_range(-3..=10));
                    let units = f64::from(rng.gen_range(50..=900u32));
                    Some(TaskAttrs {
                        planned_completion_date: Some(planned),
                        real_completion_date: Some(date(at)),
                        estimated_effort: Some(est),
                        real_effort: Some(real),
                        estimated_work_units: Some(units),
                        real_work_units: Some((units * rng.gen_range(0.6..1.4)).round()),
                        unit_type: Some("lines of code".into()),
                        grade: Some(f64::from(rng.gen_range(0..=100u32))),
                    })
                }
                _ => None,
            };
            BehaviorEvent {
                event_id: format!("{tool}-{k:05}").into(),
                behavior_type: id.into(),
                player: player.into(),
                tool: tool.into(),
                project: project.into(),
                occurred_at: at,
                artifact_id: Some(artifact.to_string()),
                artifact_name: Some(format!("{name} {artifact}")),
                task_attrs,
                interaction: None,
            }
        })
        .collect()
}

pub const SUITE_SEED: u64 = 2024;
pub const SUITE_EVENTS: usize = 600;

// Two triangles joined by nothing: the textbook two-community graph.

pub fn triangles_document() -> EnvDocument {
    let t = suite_start();
    EnvDocument {
        behavior_types: vec![behavior("GSE_HELPS", BehaviorKind::Interaction, "Help a colleague", "Social")],
        projects: vec![Project {
            id: "team".into(),
            name: "Team".into(),
            active_game_ids: Default::default(),
        }],
        tools: vec![tool("chat", "Chat")],
        players: ["a", "b", "c", "d", "e", "f"].iter().map(|p| player(p, &p.to_uppercase(), t)).collect(),
        ..EnvDocument::default()
    }
}

pub fn triangles_events() -> Vec<BehaviorEvent> {
    let pairs = [("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")];
    pairs
        .iter()
        .enumerate()
        .map(|(k, (from, to))| BehaviorEvent {
            event_id: format!("help-{k}").into(),
            behavior_type: "GSE_HELPS".into(),
            player: (*from).into(),
            tool: "chat".into(),
            project: "team".into(),
            occurred_at: suite_start() + Duration::minutes(k as i64),
            artifact_id: None,
            artifact_name: None,
            task_attrs: None,
            interaction: Some(gamify_core::model::Interaction {
                target_player: (*to).into(),
                label: "Helps".into(),
            }),
        })
        .collect()
}
