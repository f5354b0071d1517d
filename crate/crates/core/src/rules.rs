//! Game rules and their evaluation against incoming behavior events.
//!
//! A rule names a source behavior type and an ordered list of outcomes.
//! Each outcome is guarded by a boolean condition over the event's
//! attributes and, for points and resources, valued by a numeric modifier.
//! Outcomes are independent: any subset of them may fire for one event.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::expr::{Expr, Scope, Signature, Type};
use crate::ids::*;
use crate::model::{
    render_message, AchievementClass, BehaviorEvent, BehaviorKind, Environment, TaskAttrs,
    Timestamp,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GrantTarget {
    #[default]
    Actor,
    InteractionTarget,
}

fn always() -> Expr {
    Expr::Bool(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AchievementOutcome {
    pub achievement_type: AchievementTypeId,
    #[serde(default = "always")]
    pub condition: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modifier: Option<Expr>,
    #[serde(default)]
    pub message_template: String,
    #[serde(default)]
    pub first_time_only: bool,
    #[serde(default)]
    pub grant_target: GrantTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Interval {
    Day,
    Week,
    Month,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Window {
    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RuleKind {
    Simple,
    #[serde(rename_all = "camelCase")]
    Repetitive {
        repetition_count: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Window>,
    },
    #[serde(rename_all = "camelCase")]
    IntervalRepetitive {
        repetition_count: u32,
        interval: Interval,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameRule {
    pub id: RuleId,
    pub name: String,
    pub game_id: GameId,
    pub source_behavior_type: BehaviorTypeId,
    #[serde(flatten)]
    pub kind: RuleKind,
    pub outcomes: Vec<AchievementOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AchievementGrant {
    pub id: u64,
    pub player_id: PlayerId,
    pub achievement_type: AchievementTypeId,
    pub amount: i64,
    pub message: String,
    pub triggering_event_id: EventId,
    pub rule_id: RuleId,
    pub outcome_index: usize,
    /// The triggering event's `occurredAt`.
    pub granted_at: Timestamp,
}

/// An outcome that was skipped because its expressions could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalWarning {
    pub rule_id: RuleId,
    pub outcome_index: usize,
    pub message: String,
}

/// Counting bucket of a repetitive outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bucket {
    All,
    Day(NaiveDate),
    Week { year: i32, week: u32 },
    Month { year: i32, month: u32 },
}

impl Bucket {
    /// UTC calendar bucket: calendar day, ISO week, or calendar month.
    pub fn of(interval: Interval, t: Timestamp) -> Bucket {
        let date = t.date_naive();
        match interval {
            Interval::Day => Bucket::Day(date),
            Interval::Week => {
                let w = date.iso_week();
                Bucket::Week {
                    year: w.year(),
                    week: w.week(),
                }
            }
            Interval::Month => Bucket::Month {
                year: date.year(),
                month: date.month(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterKey {
    pub rule_id: RuleId,
    pub outcome_index: usize,
    pub player_id: PlayerId,
    pub bucket: Bucket,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GateKey {
    pub rule_id: RuleId,
    pub outcome_index: usize,
    pub player_id: PlayerId,
}

/// Mutable evaluation state: repetition counters and first-time gates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleState {
    #[serde(with = "crate::pairs")]
    pub counters: BTreeMap<CounterKey, u32>,
    pub first_time_gates: BTreeSet<GateKey>,
}

/// The attribute signature rules over a behavior kind may reference.
pub fn signature_for(kind: BehaviorKind) -> Signature {
    match kind {
        BehaviorKind::Task => TaskAttrs::signature(),
        BehaviorKind::Simple | BehaviorKind::Interaction => Signature::new(),
    }
}

fn scope_for(event: &BehaviorEvent) -> Scope {
    event
        .task_attrs
        .as_ref()
        .map(TaskAttrs::scope)
        .unwrap_or_default()
}

fn check_expr(expr: &Expr, sig: &Signature, want: Type, context: String) -> Result<(), Error> {
    let wrap = |source| Error::Expression {
        context: context.clone(),
        source,
    };
    for name in expr.free_identifiers() {
        if sig.get(&name).is_none() {
            return Err(wrap(crate::expr::ExprError::UnknownIdentifier(name)));
        }
    }
    let got = expr.type_check(sig).map_err(wrap)?;
    if got != want {
        return Err(wrap(crate::expr::ExprError::TypeMismatch(format!(
            "expected {want}, found {got}"
        ))));
    }
    Ok(())
}

/// All defined rules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleBook {
    rules: BTreeMap<RuleId, GameRule>,
}

impl RuleBook {
    pub fn get(&self, id: &str) -> Option<&GameRule> {
        self.rules.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GameRule> {
        self.rules.values()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Checks a rule against the environment without storing it.
    pub fn validate(&self, env: &Environment, rule: &GameRule) -> Result<(), Error> {
        if rule.id.as_str().trim().is_empty() {
            return Err(Error::EmptyIdentifier { entity: "rule" });
        }
        if self.rules.contains_key(&rule.id) {
            return Err(Error::DuplicateIdentifier {
                entity: "rule",
                id: rule.id.to_string(),
            });
        }
        if !env.games.contains_key(&rule.game_id) {
            return Err(Error::UnknownGame(rule.game_id.to_string()));
        }
        let source = env
            .behavior_types
            .get(&rule.source_behavior_type)
            .ok_or_else(|| Error::UnknownBehaviorType(rule.source_behavior_type.to_string()))?;
        match &rule.kind {
            RuleKind::Simple => {}
            RuleKind::Repetitive {
                repetition_count,
                window,
            } => {
                if *repetition_count < 1 {
                    return Err(Error::InvalidRule("repetitionCount must be at least 1".into()));
                }
                if let Some(w) = window {
                    if w.end < w.start {
                        return Err(Error::InvalidRule("window ends before it starts".into()));
                    }
                }
            }
            RuleKind::IntervalRepetitive {
                repetition_count, ..
            } => {
                if *repetition_count < 1 {
                    return Err(Error::InvalidRule("repetitionCount must be at least 1".into()));
                }
            }
        }
        if rule.outcomes.is_empty() {
            return Err(Error::InvalidRule("a rule needs at least one outcome".into()));
        }
        let sig = signature_for(source.kind);
        for (i, outcome) in rule.outcomes.iter().enumerate() {
            let ty = env
                .achievement_types
                .get(&outcome.achievement_type)
                .ok_or_else(|| Error::UnknownAchievementType(outcome.achievement_type.to_string()))?;
            check_expr(
                &outcome.condition,
                &sig,
                Type::Bool,
                format!("outcome {i} condition"),
            )?;
            match (ty.class, &outcome.modifier) {
                (AchievementClass::Badge, None) => {}
                (AchievementClass::Badge, Some(_)) => {
                    return Err(Error::InvalidRule(format!(
                        "outcome {i}: badges take no modifier"
                    )))
                }
                (_, None) => {
                    return Err(Error::InvalidRule(format!(
                        "outcome {i}: points and resources need a modifier"
                    )))
                }
                (_, Some(m)) => check_expr(m, &sig, Type::Number, format!("outcome {i} modifier"))?,
            }
            if outcome.grant_target == GrantTarget::InteractionTarget
                && source.kind != BehaviorKind::Interaction
            {
                return Err(Error::InvalidRule(format!(
                    "outcome {i}: InteractionTarget requires an interaction behavior"
                )));
            }
        }
        Ok(())
    }

    pub fn define(&mut self, env: &mut Environment, rule: GameRule) -> Result<&GameRule, Error> {
        self.validate(env, &rule)?;
        if let Some(game) = env.games.get_mut(&rule.game_id) {
            game.rule_ids.insert(rule.id.clone());
        }
        let id = rule.id.clone();
        Ok(self.rules.entry(id).or_insert(rule))
    }

    /// Removes a rule from future evaluation. Counters already accumulated
    /// for it are kept in [`RuleState`] but never consulted again.
    pub fn remove(&mut self, env: &mut Environment, id: &RuleId) -> Result<GameRule, Error> {
        let rule = self
            .rules
            .remove(id)
            .ok_or_else(|| Error::UnknownRule(id.to_string()))?;
        if let Some(game) = env.games.get_mut(&rule.game_id) {
            game.rule_ids.remove(id);
        }
        Ok(rule)
    }

    /// Evaluates every active rule for `event`'s behavior type, updating
    /// counters and gates. The event must already be validated.
    pub fn evaluate(
        &self,
        env: &Environment,
        state: &mut RuleState,
        event: &BehaviorEvent,
        next_grant_id: &mut u64,
    ) -> (Vec<AchievementGrant>, Vec<EvalWarning>) {
        let mut grants = Vec::new();
        let mut warnings = Vec::new();
        let Some(project) = env.projects.get(&event.project) else {
            return (grants, warnings);
        };
        let scope = scope_for(event);
        let matching = self.rules.values().filter(|r| {
            r.source_behavior_type == event.behavior_type
                && project.active_game_ids.contains(&r.game_id)
        });
        for rule in matching {
            for (index, outcome) in rule.outcomes.iter().enumerate() {
                let mut warn = |message: String| {
                    log::warn!("rule {} outcome {index}: {message}", rule.id);
                    warnings.push(EvalWarning {
                        rule_id: rule.id.clone(),
                        outcome_index: index,
                        message,
                    });
                };
                let recipient = match (outcome.grant_target, &event.interaction) {
                    (GrantTarget::Actor, _) => &event.player,
                    (GrantTarget::InteractionTarget, Some(i)) => &i.target_player,
                    (GrantTarget::InteractionTarget, None) => {
                        warn("event carries no interaction target".into());
                        continue;
                    }
                };
                let gate = GateKey {
                    rule_id: rule.id.clone(),
                    outcome_index: index,
                    player_id: recipient.clone(),
                };
                if outcome.first_time_only && state.first_time_gates.contains(&gate) {
                    continue;
                }
                match outcome.condition.eval_bool(&scope) {
                    Ok(true) => {}
                    Ok(false) => continue,
                    Err(e) => {
                        warn(format!("condition failed: {e}"));
                        continue;
                    }
                }
                let Some(class) = env
                    .achievement_types
                    .get(&outcome.achievement_type)
                    .map(|t| t.class)
                else {
                    warn(format!("achievement type {} vanished", outcome.achievement_type));
                    continue;
                };
                let amount = match (class, &outcome.modifier) {
                    (AchievementClass::Badge, _) => 1,
                    (_, None) => {
                        warn("missing modifier".into());
                        continue;
                    }
                    (_, Some(m)) => match m.eval_number(&scope) {
                        Ok(v) if v.is_finite() => round_points(v),
                        Ok(v) => {
                            warn(format!("modifier is not finite ({v})"));
                            continue;
                        }
                        Err(e) => {
                            warn(format!("modifier failed: {e}"));
                            continue;
                        }
                    },
                };
                let fires = match &rule.kind {
                    RuleKind::Simple => true,
                    RuleKind::Repetitive {
                        repetition_count,
                        window,
                    } => {
                        if window.is_some_and(|w| !w.contains(event.occurred_at)) {
                            continue;
                        }
                        bump(state, &gate, Bucket::All, *repetition_count)
                    }
                    RuleKind::IntervalRepetitive {
                        repetition_count,
                        interval,
                    } => bump(
                        state,
                        &gate,
                        Bucket::of(*interval, event.occurred_at),
                        *repetition_count,
                    ),
                };
                if !fires {
                    continue;
                }
                if outcome.first_time_only {
                    state.first_time_gates.insert(gate.clone());
                }
                grants.push(AchievementGrant {
                    id: *next_grant_id,
                    player_id: gate.player_id,
                    achievement_type: outcome.achievement_type.clone(),
                    amount,
                    message: render_message(&outcome.message_template, event),
                    triggering_event_id: event.event_id.clone(),
                    rule_id: rule.id.clone(),
                    outcome_index: index,
                    granted_at: event.occurred_at,
                });
                *next_grant_id += 1;
            }
        }
        (grants, warnings)
    }
}

/// Increments a counter; returns true (and resets it) when it reaches `n`.
fn bump(state: &mut RuleState, gate: &GateKey, bucket: Bucket, n: u32) -> bool {
    let key = CounterKey {
        rule_id: gate.rule_id.clone(),
        outcome_index: gate.outcome_index,
        player_id: gate.player_id.clone(),
        bucket,
    };
    let count = state.counters.entry(key.clone()).or_insert(0);
    *count += 1;
    if *count >= n {
        state.counters.remove(&key);
        true
    } else {
        false
    }
}

/// Half-away-from-zero rounding to whole points, saturating at the i64 range.
pub fn round_points(v: f64) -> i64 {
    let r = libm::round(v);
    if r >= i64::MAX as f64 {
        i64::MAX
    } else if r <= i64::MIN as f64 {
        i64::MIN
    } else {
        r as i64
    }
}

/// Per-player running totals derived from grants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Ledger {
    totals: BTreeMap<PlayerId, BTreeMap<AchievementTypeId, i64>>,
    first_grant: BTreeMap<AchievementTypeId, BTreeMap<PlayerId, Timestamp>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlayerTotals {
    pub totals: BTreeMap<AchievementTypeId, i64>,
    pub points: i64,
    pub level: u32,
}

impl Ledger {
    pub fn apply(&mut self, grant: &AchievementGrant) {
        let total = self
            .totals
            .entry(grant.player_id.clone())
            .or_default()
            .entry(grant.achievement_type.clone())
            .or_insert(0);
        *total = total.saturating_add(grant.amount);
        let first = self
            .first_grant
            .entry(grant.achievement_type.clone())
            .or_default()
            .entry(grant.player_id.clone())
            .or_insert(grant.granted_at);
        if grant.granted_at < *first {
            *first = grant.granted_at;
        }
    }

    pub fn total(&self, player: &str, ty: &str) -> i64 {
        self.totals
            .get(player)
            .and_then(|m| m.get(ty))
            .copied()
            .unwrap_or(0)
    }

    pub fn first_grant(&self, player: &str, ty: &str) -> Option<Timestamp> {
        self.first_grant.get(ty).and_then(|m| m.get(player)).copied()
    }

    /// Totals for every registered achievement type plus the derived level.
    pub fn player_totals(&self, env: &Environment, player: &str) -> Result<PlayerTotals, Error> {
        env.player(player)?;
        let totals: BTreeMap<_, _> = env
            .achievement_types
            .keys()
            .map(|ty| (ty.clone(), self.total(player, ty.as_str())))
            .collect();
        let points = env
            .level_basis()
            .map_or(0, |t| self.total(player, t.identifier.as_str()));
        Ok(PlayerTotals {
            totals,
            points,
            level: env.level_policy.level_for_points(points),
        })
    }
}
