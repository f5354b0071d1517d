//! Domain entities, registries, the level policy and message templating.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::expr::{Scope, Signature, Type, Value};
use crate::ids::*;

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BehaviorKind {
    Simple,
    Task,
    Interaction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BehaviorTypeDef {
    pub identifier: BehaviorTypeId,
    pub kind: BehaviorKind,
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Descriptive only; never consulted during evaluation.
    #[serde(default)]
    pub category: String,
}

/// Optional attributes carried by task behaviors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskAttrs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planned_completion_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_completion_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_effort: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_effort: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_work_units: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_work_units: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<f64>,
}

impl TaskAttrs {
    /// Identifiers a task-behavior rule may reference.
    pub fn signature() -> Signature {
        Signature::new()
            .with("plannedCompletionDate", Type::Date)
            .with("realCompletionDate", Type::Date)
            .with("estimatedEffort", Type::Number)
            .with("realEffort", Type::Number)
            .with("estimatedWorkUnits", Type::Number)
            .with("realWorkUnits", Type::Number)
            .with("grade", Type::Number)
    }

    pub fn scope(&self) -> Scope {
        let mut s = Scope::new();
        s.set("plannedCompletionDate", self.planned_completion_date.map(Value::Date));
        s.set("realCompletionDate", self.real_completion_date.map(Value::Date));
        s.set("estimatedEffort", self.estimated_effort.map(Value::Number));
        s.set("realEffort", self.real_effort.map(Value::Number));
        s.set("estimatedWorkUnits", self.estimated_work_units.map(Value::Number));
        s.set("realWorkUnits", self.real_work_units.map(Value::Number));
        s.set("grade", self.grade.map(Value::Number));
        s
    }

    fn validate(&self) -> Result<(), Error> {
        let non_negative = [
            ("estimatedEffort", self.estimated_effort),
            ("realEffort", self.real_effort),
            ("estimatedWorkUnits", self.estimated_work_units),
            ("realWorkUnits", self.real_work_units),
        ];
        for (name, value) in non_negative {
            if let Some(v) = value {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidEvent(format!("{name} must be a non-negative number")));
                }
            }
        }
        if let Some(g) = self.grade {
            if !(0.0..=100.0).contains(&g) {
                return Err(Error::InvalidEvent("grade must lie in [0, 100]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Interaction {
    pub target_player: PlayerId,
    pub label: String,
}

/// A behavior reported by a tool. The only input stream of the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BehaviorEvent {
    pub event_id: EventId,
    pub behavior_type: BehaviorTypeId,
    pub player: PlayerId,
    pub tool: ToolId,
    pub project: ProjectId,
    pub occurred_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_attrs: Option<TaskAttrs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<Interaction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AchievementClass {
    Points,
    Badge,
    Resource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AchievementType {
    pub identifier: AchievementTypeId,
    pub class: AchievementClass,
    pub name: String,
    #[serde(default)]
    pub is_level_basis: bool,
}

/// Level thresholds `floor(a * b^(l*c))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPolicy {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for LevelPolicy {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.4,
            c: 2.0,
        }
    }
}

impl LevelPolicy {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, Error> {
        let policy = Self { a, b, c };
        policy.validate()?;
        Ok(policy)
    }

    /// Requires `a > 0`, `b > 1`, `c > 0`, and consecutive raw thresholds at
    /// least one point apart (`a * b^c * (b^c - 1) >= 1`) so that the floored
    /// thresholds stay strictly increasing.
    pub fn validate(&self) -> Result<(), Error> {
        let Self { a, b, c } = *self;
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidPolicy("parameters must be finite".into()));
        }
        if a <= 0.0 || b <= 1.0 || c <= 0.0 {
            return Err(Error::InvalidPolicy("requires a > 0, b > 1, c > 0".into()));
        }
        let step = libm::pow(b, c);
        if a * step * (step - 1.0) < 1.0 {
            return Err(Error::InvalidPolicy(
                "thresholds of consecutive levels must differ by at least one point".into(),
            ));
        }
        Ok(())
    }

    /// Points needed to reach `level`.
    pub fn threshold(&self, level: u32) -> Result<u64, Error> {
        if level < 1 {
            return Err(Error::InvalidLevel(level));
        }
        Ok(self.raw_threshold(level))
    }

    fn raw_threshold(&self, level: u32) -> u64 {
        let raw = libm::floor(self.a * libm::pow(self.b, f64::from(level) * self.c));
        if raw >= u64::MAX as f64 {
            u64::MAX
        } else {
            raw as u64
        }
    }

    /// Highest level whose threshold is covered by `points`; 0 below level 1.
    pub fn level_for_points(&self, points: i64) -> u32 {
        if points < 0 {
            return 0;
        }
        let points = points as u64;
        let reached = |l: u32| self.raw_threshold(l) <= points;
        if !reached(1) {
            return 0;
        }
        let mut lo = 1u32;
        let mut hi = 2u32;
        while reached(hi) {
            lo = hi;
            match hi.checked_mul(2) {
                Some(h) => hi = h,
                None => {
                    if reached(u32::MAX) {
                        return u32::MAX;
                    }
                    hi = u32::MAX;
                    break;
                }
            }
        }
        // reached(lo) && !reached(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reached(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Percentage in `[0, 100]` of the way from the current level's
    /// threshold to the next one.
    pub fn progress(&self, points: i64) -> f64 {
        let level = self.level_for_points(points);
        if level == u32::MAX {
            return 100.0;
        }
        let current = if level == 0 {
            0.0
        } else {
            self.raw_threshold(level) as f64
        };
        let next = self.raw_threshold(level + 1) as f64;
        let pct = (points as f64 - current) / (next - current) * 100.0;
        pct.clamp(0.0, 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Game {
    pub id: GameId,
    pub name: String,
    #[serde(default)]
    pub rule_ids: BTreeSet<RuleId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Project {
    pub id: ProjectId,
    pub name: String,
    #[serde(default)]
    pub active_game_ids: BTreeSet<GameId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tool {
    pub id: ToolId,
    pub name: String,
    /// Opaque credential (the service stores a digest, never the secret).
    /// Never exposed by read endpoints or environment exports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Player {
    pub id: PlayerId,
    pub name: String,
    pub joined_at: Timestamp,
    /// Opaque credential for the player's own endpoints, like `Tool::secret`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
}

/// Replaces `#id` and `#name` with the event's artifact id and name.
pub fn render_message(template: &str, event: &BehaviorEvent) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(i) = rest.find('#') {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        let (field, name, len) = if tail.starts_with("#id") {
            (&event.artifact_id, "artifactId", 3)
        } else if tail.starts_with("#name") {
            (&event.artifact_name, "artifactName", 5)
        } else {
            out.push('#');
            rest = &tail[1..];
            continue;
        };
        match field {
            Some(v) => out.push_str(v),
            None => log::warn!(
                "event {} has no {name}; placeholder rendered empty",
                event.event_id
            ),
        }
        rest = &tail[len..];
    }
    out.push_str(rest);
    out
}

/// Registries of everything an administrator defines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Environment {
    pub behavior_types: BTreeMap<BehaviorTypeId, BehaviorTypeDef>,
    pub achievement_types: BTreeMap<AchievementTypeId, AchievementType>,
    pub level_policy: LevelPolicy,
    pub games: BTreeMap<GameId, Game>,
    pub projects: BTreeMap<ProjectId, Project>,
    pub tools: BTreeMap<ToolId, Tool>,
    pub players: BTreeMap<PlayerId, Player>,
}

fn require_id(entity: &'static str, id: &str) -> Result<(), Error> {
    if id.trim().is_empty() {
        Err(Error::EmptyIdentifier { entity })
    } else {
        Ok(())
    }
}

fn duplicate(entity: &'static str, id: &str) -> Error {
    Error::DuplicateIdentifier {
        entity,
        id: id.to_string(),
    }
}

impl Environment {
    pub fn define_behavior_type(&mut self, def: BehaviorTypeDef) -> Result<&BehaviorTypeDef, Error> {
        require_id("behavior type", def.identifier.as_str())?;
        if self.behavior_types.contains_key(&def.identifier) {
            return Err(duplicate("behavior type", def.identifier.as_str()));
        }
        let id = def.identifier.clone();
        Ok(self.behavior_types.entry(id).or_insert(def))
    }

    pub fn define_achievement_type(&mut self, def: AchievementType) -> Result<&AchievementType, Error> {
        require_id("achievement type", def.identifier.as_str())?;
        if self.achievement_types.contains_key(&def.identifier) {
            return Err(duplicate("achievement type", def.identifier.as_str()));
        }
        if def.is_level_basis {
            if def.class != AchievementClass::Points {
                return Err(Error::InvalidAchievementType(
                    "only a Points type can be the level basis".into(),
                ));
            }
            if let Some(existing) = self.level_basis() {
                return Err(Error::InvalidAchievementType(format!(
                    "`{}` is already the level basis",
                    existing.identifier
                )));
            }
        }
        let id = def.identifier.clone();
        Ok(self.achievement_types.entry(id).or_insert(def))
    }

    pub fn set_level_policy(&mut self, policy: LevelPolicy) -> Result<(), Error> {
        policy.validate()?;
        self.level_policy = policy;
        Ok(())
    }

    pub fn level_basis(&self) -> Option<&AchievementType> {
        self.achievement_types.values().find(|t| t.is_level_basis)
    }

    pub fn define_game(&mut self, id: GameId, name: String) -> Result<&Game, Error> {
        require_id("game", id.as_str())?;
        if self.games.contains_key(&id) {
            return Err(duplicate("game", id.as_str()));
        }
        let game = Game {
            id: id.clone(),
            name,
            rule_ids: BTreeSet::new(),
        };
        Ok(self.games.entry(id).or_insert(game))
    }

    pub fn define_project(&mut self, project: Project) -> Result<&Project, Error> {
        require_id("project", project.id.as_str())?;
        if self.projects.contains_key(&project.id) {
            return Err(duplicate("project", project.id.as_str()));
        }
        self.check_games(&project.active_game_ids)?;
        let id = project.id.clone();
        Ok(self.projects.entry(id).or_insert(project))
    }

    pub fn set_active_games(&mut self, project: &ProjectId, games: BTreeSet<GameId>) -> Result<(), Error> {
        self.check_games(&games)?;
        let p = self
            .projects
            .get_mut(project)
            .ok_or_else(|| Error::UnknownProject(project.to_string()))?;
        p.active_game_ids = games;
        Ok(())
    }

    fn check_games(&self, games: &BTreeSet<GameId>) -> Result<(), Error> {
        match games.iter().find(|g| !self.games.contains_key(*g)) {
            Some(g) => Err(Error::UnknownGame(g.to_string())),
            None => Ok(()),
        }
    }

    pub fn register_tool(&mut self, tool: Tool) -> Result<&Tool, Error> {
        require_id("tool", tool.id.as_str())?;
        if self.tools.contains_key(&tool.id) {
            return Err(duplicate("tool", tool.id.as_str()));
        }
        let id = tool.id.clone();
        Ok(self.tools.entry(id).or_insert(tool))
    }

    pub fn register_player(&mut self, player: Player) -> Result<&Player, Error> {
        require_id("player", player.id.as_str())?;
        if self.players.contains_key(&player.id) {
            return Err(duplicate("player", player.id.as_str()));
        }
        let id = player.id.clone();
        Ok(self.players.entry(id).or_insert(player))
    }

    pub fn set_tool_secret(&mut self, tool: &ToolId, secret: String) -> Result<(), Error> {
        let t = self
            .tools
            .get_mut(tool)
            .ok_or_else(|| Error::UnknownTool(tool.to_string()))?;
        t.secret = Some(secret);
        Ok(())
    }

    pub fn set_player_token(&mut self, player: &PlayerId, token: String) -> Result<(), Error> {
        let p = self
            .players
            .get_mut(player)
            .ok_or_else(|| Error::UnknownPlayer(player.to_string()))?;
        p.token = Some(token);
        Ok(())
    }

    pub fn player(&self, id: &str) -> Result<&Player, Error> {
        self.players
            .get(id)
            .ok_or_else(|| Error::UnknownPlayer(id.to_string()))
    }

    /// Checks an event against the registries; returns its behavior type.
    pub fn validate_event(&self, event: &BehaviorEvent) -> Result<&BehaviorTypeDef, Error> {
        if event.event_id.as_str().trim().is_empty() {
            return Err(Error::InvalidEvent("eventId must not be empty".into()));
        }
        let def = self
            .behavior_types
            .get(&event.behavior_type)
            .ok_or_else(|| Error::UnknownBehaviorType(event.behavior_type.to_string()))?;
        self.player(event.player.as_str())?;
        if !self.tools.contains_key(&event.tool) {
            return Err(Error::UnknownTool(event.tool.to_string()));
        }
        if !self.projects.contains_key(&event.project) {
            return Err(Error::UnknownProject(event.project.to_string()));
        }
        match (def.kind, &event.task_attrs, &event.interaction) {
            (BehaviorKind::Simple, None, None) => {}
            (BehaviorKind::Task, Some(attrs), None) => attrs.validate()?,
            (BehaviorKind::Interaction, None, Some(interaction)) => {
                self.player(interaction.target_player.as_str())?;
                if interaction.target_player == event.player {
                    return Err(Error::InvalidEvent(
                        "an interaction needs two distinct players".into(),
                    ));
                }
            }
            (kind, attrs, interaction) => {
                let mut present = Vec::new();
                if attrs.is_some() {
                    present.push("taskAttrs");
                }
                if interaction.is_some() {
                    present.push("interaction");
                }
                return Err(Error::InvalidEvent(format!(
                    "behavior `{}` is {kind:?}; sections present: [{}]",
                    def.identifier,
                    present.join(", ")
                )));
            }
        }
        Ok(def)
    }
}
