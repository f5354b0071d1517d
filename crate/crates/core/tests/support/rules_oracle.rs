//! A from-scratch log-replay oracle for rule evaluation. Instead of keeping
//! counters, it recounts the qualifying events of the whole log prefix for
//! every decision: the k-th qualifying event in a bucket fires iff k is a
//! multiple of the repetition count.

use std::collections::BTreeSet;

use chrono::{Datelike, Duration, TimeZone, Utc};
use gamify_core::expr::Expr;
use gamify_core::model::{
    AchievementClass, AchievementType, BehaviorEvent, BehaviorKind, BehaviorTypeDef, Environment, Player, Project,
    TaskAttrs, Timestamp, Tool,
};
use gamify_core::rules::{AchievementOutcome, GameRule, GrantTarget, Interval, RuleBook, RuleKind, RuleState, Window};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cond {
    True,
    RealLt(f64),
    GradeGe(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modifier {
    Badge,
    Est,
    EstTimes(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OOutcome {
    pub cond: Cond,
    pub modifier: Modifier,
    pub first_time_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OKind {
    Simple,
    Repetitive { n: u32, window: Option<(Timestamp, Timestamp)> },
    Interval { n: u32, interval: Interval },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ORule {
    pub id: String,
    /// Rules in game "off" are never active in any project.
    pub active_game: bool,
    pub kind: OKind,
    pub outcomes: Vec<OOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OEvent {
    pub id: String,
    pub player: usize,
    pub active_project: bool,
    pub at: Timestamp,
    pub est: Option<f64>,
    pub real: Option<f64>,
    pub grade: Option<f64>,
}

/// What the oracle and the engine are compared on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GrantKey {
    pub event: String,
    pub rule: String,
    pub outcome: usize,
    pub player: String,
    pub achievement: String,
    pub amount: i64,
}

fn t0() -> Timestamp {
    Utc.with_ymd_and_hms(2024, 1, 1, 8, 0, 0).unwrap()
}

pub fn random_outcome(rng: &mut impl Rng) -> OOutcome {
    let cond = match rng.gen_range(0..3) {
        0 => Cond::True,
        1 => Cond::RealLt(f64::from(rng.gen_range(2..12u32))),
        _ => Cond::GradeGe(f64::from(rng.gen_range(0..100u32))),
    };
    let modifier = match rng.gen_range(0..3) {
        0 => Modifier::Badge,
        1 => Modifier::Est,
        _ => Modifier::EstTimes([0.5, 1.5, -1.0, 2.25][rng.gen_range(0..4)]),
    };
    OOutcome {
        cond,
        modifier,
        first_time_only: rng.gen_bool(0.25),
    }
}

/// Always includes a Repetitive N=3 rule and an IntervalRepetitive Week N=2
/// rule, plus up to two random extra rules.
pub fn random_rules(rng: &mut impl Rng) -> Vec<ORule> {
    let outcomes = |rng: &mut dyn rand::RngCore| -> Vec<OOutcome> {
        let mut rng = rng;
        let n = 1 + (rng.next_u32() % 3) as usize;
        (0..n).map(|_| random_outcome(&mut rng)).collect()
    };
    let mut rules = vec![
        ORule {
            id: "r-repeat3".into(),
            active_game: true,
            kind: OKind::Repetitive { n: 3, window: None },
            outcomes: outcomes(rng),
        },
        ORule {
            id: "r-week2".into(),
            active_game: true,
            kind: OKind::Interval {
                n: 2,
                interval: Interval::Week,
            },
            outcomes: outcomes(rng),
        },
    ];
    for k in 0..rng.gen_range(0..=2) {
        let kind = match rng.gen_range(0..4) {
            0 => OKind::Simple,
            1 => {
                let start = t0() + Duration::hours(rng.gen_range(0..400));
                OKind::Repetitive {
                    n: rng.gen_range(1..=4),
                    window: Some((start, start + Duration::hours(rng.gen_range(24..600)))),
                }
            }
            2 => OKind::Repetitive {
                n: rng.gen_range(1..=4),
                window: None,
            },
            _ => OKind::Interval {
                n: rng.gen_range(1..=3),
                interval: [Interval::Day, Interval::Week, Interval::Month][rng.gen_range(0..3)],
            },
        };
        rules.push(ORule {
            id: format!("r-extra{k}"),
            active_game: rng.gen_bool(0.8),
            kind,
            outcomes: outcomes(rng),
        });
    }
    rules
}

pub fn random_events(rng: &mut impl Rng, count: usize) -> Vec<OEvent> {
    let mut at = t0();
    (0..count)
        .map(|k| {
            at += Duration::minutes(rng.gen_range(0..(60 * 40)));
            OEvent {
                id: format!("e{k}"),
                player: rng.gen_range(0..3),
                active_project: rng.gen_bool(0.9),
                at,
                est: rng.gen_bool(0.85).then(|| f64::from(rng.gen_range(0..40u32)) / 2.0),
                real: rng.gen_bool(0.85).then(|| f64::from(rng.gen_range(0..30u32)) / 2.0),
                grade: rng.gen_bool(0.6).then(|| f64::from(rng.gen_range(0..=100u32))),
            }
        })
        .collect()
}

fn cond_holds(c: Cond, e: &OEvent) -> bool {
    match c {
        Cond::True => true,
        Cond::RealLt(k) => e.real.is_some_and(|r| r < k),
        Cond::GradeGe(k) => e.grade.is_some_and(|g| g >= k),
    }
}

fn amount(m: Modifier, e: &OEvent) -> Option<i64> {
    match m {
        Modifier::Badge => Some(1),
        Modifier::Est => e.est.map(|v| v.round() as i64),
        Modifier::EstTimes(k) => e.est.map(|v| (v * k).round() as i64),
    }
}

fn bucket(interval: Interval, t: Timestamp) -> (i32, u32, u32) {
    let d = t.date_naive();
    match interval {
        Interval::Day => (d.year(), d.ordinal(), 0),
        Interval::Week => (d.iso_week().year(), d.iso_week().week(), 1),
        Interval::Month => (d.year(), d.month(), 2),
    }
}

/// Expected grants for the full log, recomputed from scratch per decision.
pub fn replay(rules: &[ORule], events: &[OEvent]) -> Vec<GrantKey> {
    let mut sorted: Vec<&ORule> = rules.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out: Vec<GrantKey> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        for rule in &sorted {
            for (oi, o) in rule.outcomes.iter().enumerate() {
                let qualifies = |x: &OEvent| {
                    x.player == e.player
                        && x.active_project
                        && rule.active_game
                        && cond_holds(o.cond, x)
                        && amount(o.modifier, x).is_some()
                        && match rule.kind {
                            OKind::Repetitive { window: Some((s, t)), .. } => s <= x.at && x.at <= t,
                            _ => true,
                        }
                };
                if !qualifies(e) {
                    continue;
                }
                let already = out
                    .iter()
                    .any(|g| g.rule == rule.id && g.outcome == oi && g.player == format!("p{}", e.player));
                if o.first_time_only && already {
                    continue;
                }
                let fires = match rule.kind {
                    OKind::Simple => true,
                    OKind::Repetitive { n, .. } => {
                        let k = events[..=i].iter().filter(|x| qualifies(x)).count();
                        k % n as usize == 0
                    }
                    OKind::Interval { n, interval } => {
                        let b = bucket(interval, e.at);
                        let k = events[..=i]
                            .iter()
                            .filter(|x| qualifies(x) && bucket(interval, x.at) == b)
                            .count();
                        k % n as usize == 0
                    }
                };
                if fires {
                    out.push(GrantKey {
                        event: e.id.clone(),
                        rule: rule.id.clone(),
                        outcome: oi,
                        player: format!("p{}", e.player),
                        achievement: match o.modifier {
                            Modifier::Badge => "BADGE".into(),
                            _ => "XP".into(),
                        },
                        amount: amount(o.modifier, e).unwrap(),
                    });
                }
            }
        }
    }
    out
}

// Building the same scenario in the engine.

pub fn environment() -> Environment {
    let mut env = Environment::default();
    env.define_behavior_type(BehaviorTypeDef {
        identifier: "GSE_TASK".into(),
        kind: BehaviorKind::Task,
        name: "Complete a task".into(),
        description: String::new(),
        category: String::new(),
    })
    .unwrap();
    env.define_achievement_type(AchievementType {
        identifier: "XP".into(),
        class: AchievementClass::Points,
        name: "Experience".into(),
        is_level_basis: true,
    })
    .unwrap();
    env.define_achievement_type(AchievementType {
        identifier: "BADGE".into(),
        class: AchievementClass::Badge,
        name: "Badge".into(),
        is_level_basis: false,
    })
    .unwrap();
    env.define_game("on".into(), "Active".into()).unwrap();
    env.define_game("off".into(), "Inactive".into()).unwrap();
    env.define_project(Project {
        id: "prj-on".into(),
        name: String::new(),
        active_game_ids: BTreeSet::from(["on".into()]),
    })
    .unwrap();
    env.define_project(Project {
        id: "prj-off".into(),
        name: String::new(),
        active_game_ids: BTreeSet::new(),
    })
    .unwrap();
    env.register_tool(Tool {
        id: "tool".into(),
        name: String::new(),
        secret: None,
    })
    .unwrap();
    for p in 0..3 {
        env.register_player(Player {
            id: format!("p{p}").into(),
            name: String::new(),
            joined_at: t0(),
            token: None,
        })
        .unwrap();
    }
    env
}

pub fn to_rule(r: &ORule) -> GameRule {
    let kind = match r.kind {
        OKind::Simple => RuleKind::Simple,
        OKind::Repetitive { n, window } => RuleKind::Repetitive {
            repetition_count: n,
            window: window.map(|(start, end)| Window { start, end }),
        },
        OKind::Interval { n, interval } => RuleKind::IntervalRepetitive {
            repetition_count: n,
            interval,
        },
    };
    let outcomes = r
        .outcomes
        .iter()
        .map(|o| {
            let condition = match o.cond {
                Cond::True => "true".to_string(),
                Cond::RealLt(k) => format!("realEffort < {k}"),
                Cond::GradeGe(k) => format!("grade >= {k}"),
            };
            let (ty, modifier) = match o.modifier {
                Modifier::Badge => ("BADGE", None),
                Modifier::Est => ("XP", Some("estimatedEffort".to_string())),
                Modifier::EstTimes(k) if k < 0.0 => ("XP", Some(format!("estimatedEffort * (0 - {})", -k))),
                Modifier::EstTimes(k) => ("XP", Some(format!("estimatedEffort * {k}"))),
            };
            AchievementOutcome {
                achievement_type: ty.into(),
                condition: Expr::parse_unchecked(&condition).unwrap(),
                modifier: modifier.map(|m| Expr::parse_unchecked(&m).unwrap()),
                message_template: "#name".into(),
                first_time_only: o.first_time_only,
                grant_target: GrantTarget::Actor,
            }
        })
        .collect();
    GameRule {
        id: r.id.clone().into(),
        name: r.id.clone(),
        game_id: if r.active_game { "on".into() } else { "off".into() },
        source_behavior_type: "GSE_TASK".into(),
        kind,
        outcomes,
    }
}

pub fn to_event(e: &OEvent) -> BehaviorEvent {
    BehaviorEvent {
        event_id: e.id.clone().into(),
        behavior_type: "GSE_TASK".into(),
        player: format!("p{}", e.player).into(),
        tool: "tool".into(),
        project: if e.active_project { "prj-on".into() } else { "prj-off".into() },
        occurred_at: e.at,
        artifact_id: None,
        artifact_name: Some(e.id.clone()),
        task_attrs: Some(TaskAttrs {
            estimated_effort: e.est,
            real_effort: e.real,
            grade: e.grade,
            ..TaskAttrs::default()
        }),
        interaction: None,
    }
}

/// Runs the scenario through the engine's rule book.
pub fn engine_grants(rules: &[ORule], events: &[OEvent]) -> Vec<GrantKey> {
    let mut env = environment();
    let mut book = RuleBook::default();
    for r in rules {
        book.define(&mut env, to_rule(r)).unwrap();
    }
    let mut state = RuleState::default();
    let mut next = 0;
    let mut out = Vec::new();
    for e in events {
        let event = to_event(e);
        env.validate_event(&event).unwrap();
        let (grants, _) = book.evaluate(&env, &mut state, &event, &mut next);
        out.extend(grants.into_iter().map(|g| GrantKey {
            event: g.triggering_event_id.to_string(),
            rule: g.rule_id.to_string(),
            outcome: g.outcome_index,
            player: g.player_id.to_string(),
            achievement: g.achievement_type.to_string(),
            amount: g.amount,
        }));
    }
    out
}

#[derive(Debug, Default, Clone)]
pub struct RulesReport {
    pub streams: usize,
    pub grants: usize,
    pub repetitive_grants: usize,
    pub weekly_grants: usize,
    pub first_time_violations: usize,
}

pub fn run_rule_streams(seed: u64, streams: usize) -> Result<RulesReport, String> {
    let mut rng = super::rng(seed);
    let mut report = RulesReport::default();
    for s in 0..streams {
        let rules = random_rules(&mut rng);
        let n = rng.gen_range(5..60);
        let events = random_events(&mut rng, n);
        let want = replay(&rules, &events);
        let got = engine_grants(&rules, &events);
        if got != want {
            let first = got.iter().zip(&want).position(|(a, b)| a != b).unwrap_or(got.len().min(want.len()));
            return Err(format!(
                "stream {s}: engine produced {} grants, oracle {}; first difference at #{first}: engine {:?}, oracle {:?}\nrules: {rules:?}",
                got.len(),
                want.len(),
                got.get(first),
                want.get(first)
            ));
        }
        for r in rules.iter() {
            for (oi, o) in r.outcomes.iter().enumerate() {
                if !o.first_time_only {
                    continue;
                }
                for p in 0..3 {
                    let c = got
                        .iter()
                        .filter(|g| g.rule == r.id && g.outcome == oi && g.player == format!("p{p}"))
                        .count();
                    if c > 1 {
                        report.first_time_violations += 1;
                    }
                }
            }
        }
        report.streams += 1;
        report.grants += got.len();
        report.repetitive_grants += got.iter().filter(|g| g.rule == "r-repeat3").count();
        report.weekly_grants += got.iter().filter(|g| g.rule == "r-week2").count();
    }
    if report.first_time_violations > 0 {
        return Err(format!("{} first-time-only outcomes granted more than once", report.first_time_violations));
    }
    Ok(report)
}
