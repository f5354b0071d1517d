//! The engine: every mutation is a [`Command`] applied at a timestamp, so the
//! whole state is a fold over the command log.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::assistant::Brain;
use crate::customize::{CustomizationRule, Customizations, ProfileFacts};
use crate::error::Error;
use crate::graph::{GraphFilter, InteractionGraph};
use crate::ids::*;
use crate::model::{
    AchievementClass, AchievementType, BehaviorEvent, BehaviorTypeDef, Environment, LevelPolicy, Player,
    Project, Timestamp, Tool,
};
use crate::rules::{AchievementGrant, EvalWarning, GameRule, Ledger, PlayerTotals, RuleBook, RuleState};
use crate::sentiment::{Classifier, LexiconClassifier, PolarityResult, SentimentLog};
use crate::social::{
    self, Friendship, Message, Notification, Period, Quest, QuestChange, QuestGoal, RankEntry, Social,
};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameDef {
    pub id: GameId,
    pub name: String,
}

/// Everything an administrator defines, as one portable document.
/// Tool secrets and player tokens are never part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvDocument {
    pub version: u32,
    #[serde(default)]
    pub behavior_types: Vec<BehaviorTypeDef>,
    #[serde(default)]
    pub achievement_types: Vec<AchievementType>,
    #[serde(default)]
    pub level_policy: LevelPolicy,
    #[serde(default)]
    pub games: Vec<GameDef>,
    #[serde(default)]
    pub projects: Vec<Project>,
    #[serde(default)]
    pub tools: Vec<Tool>,
    #[serde(default)]
    pub players: Vec<Player>,
    #[serde(default)]
    pub rules: Vec<GameRule>,
    #[serde(default)]
    pub customizations: Vec<CustomizationRule>,
}

impl Default for EnvDocument {
    fn default() -> Self {
        Self {
            version: DOCUMENT_VERSION,
            behavior_types: Vec::new(),
            achievement_types: Vec::new(),
            level_policy: LevelPolicy::default(),
            games: Vec::new(),
            projects: Vec::new(),
            tools: Vec::new(),
            players: Vec::new(),
            rules: Vec::new(),
            customizations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Command {
    DefineBehaviorType { def: BehaviorTypeDef },
    DefineAchievementType { def: AchievementType },
    SetLevelPolicy { policy: LevelPolicy },
    DefineGame { id: GameId, name: String },
    DefineProject { project: Project },
    #[serde(rename_all = "camelCase")]
    SetActiveGames { project: ProjectId, game_ids: Vec<GameId> },
    DefineRule { rule: GameRule },
    RemoveRule { id: RuleId },
    DefineCustomization { rule: CustomizationRule },
    RegisterTool { tool: Tool },
    RegisterPlayer { player: Player },
    SetToolSecret { tool: ToolId, secret: String },
    SetPlayerToken { player: PlayerId, token: String },
    IngestEvent { event: BehaviorEvent },
    Befriend { a: PlayerId, b: PlayerId },
    SendMessage { from: PlayerId, to: PlayerId, body: String },
    CreateQuest {
        challenger: PlayerId,
        challenged: PlayerId,
        goal: QuestGoal,
        period: Period,
    },
    AssistantInput { player: PlayerId, text: String },
    MarkNotificationRead { player: PlayerId, id: u64 },
    ImportEnvironment { document: EnvDocument },
    /// Only settles quests; useful as a clock tick.
    SettleQuests,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Ingested {
    pub event_id: EventId,
    pub grants: Vec<AchievementGrant>,
    pub warnings: Vec<EvalWarning>,
    /// True when the event id had already been ingested; nothing changed.
    pub replayed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssistantReply {
    pub reply: String,
    pub polarity: PolarityResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Outcome {
    Done,
    Ingested(Ingested),
    Friendship(Friendship),
    Message(Message),
    Quest(Quest),
    Assistant(AssistantReply),
    Settled { changes: Vec<QuestChange> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoredEvent {
    pub event: BehaviorEvent,
    pub grant_ids: Vec<u64>,
    pub warnings: Vec<EvalWarning>,
}

/// All state the engine folds commands into. Serializable for snapshots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EngineState {
    pub env: Environment,
    pub rules: RuleBook,
    pub rule_state: RuleState,
    pub customizations: Customizations,
    pub events: Vec<StoredEvent>,
    pub event_index: BTreeMap<EventId, usize>,
    /// Grant ids are positions in this list.
    pub grants: Vec<AchievementGrant>,
    pub ledger: Ledger,
    pub social: Social,
    pub sentiment: SentimentLog,
}

/// A player's profile as served to the player's site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Profile {
    pub id: PlayerId,
    pub name: String,
    pub joined_at: Timestamp,
    pub totals: BTreeMap<AchievementTypeId, i64>,
    pub points: i64,
    pub level: u32,
    /// Points needed for the current level (0 at level 0).
    pub level_threshold: u64,
    pub next_level_threshold: Option<u64>,
    /// Percentage of the way to the next level.
    pub progress: f64,
    pub badges: BTreeMap<AchievementTypeId, i64>,
    pub resources: BTreeMap<AchievementTypeId, i64>,
    pub friends: Vec<PlayerId>,
    pub followers: usize,
    pub following: usize,
    pub polarity: f64,
}

#[derive(Clone)]
pub struct Engine {
    state: EngineState,
    classifier: Arc<dyn Classifier>,
    brain: Arc<Brain>,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("classifier", &self.classifier.name())
            .field("events", &self.state.events.len())
            .field("grants", &self.state.grants.len())
            .finish_non_exhaustive()
    }
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    /// An empty engine with the bundled classifier and help brain.
    pub fn new() -> Self {
        Self::with_parts(
            EngineState::default(),
            Arc::new(LexiconClassifier::bundled()),
            Arc::new(Brain::bundled()),
        )
    }

    pub fn with_parts(state: EngineState, classifier: Arc<dyn Classifier>, brain: Arc<Brain>) -> Self {
        Self {
            state,
            classifier,
            brain,
        }
    }

    pub fn from_state(state: EngineState) -> Self {
        let mut e = Self::new();
        e.state = state;
        e
    }

    /// Keeps the classifier and brain, swaps the state.
    pub fn with_state(mut self, state: EngineState) -> Self {
        self.state = state;
        self
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn into_state(self) -> EngineState {
        self.state
    }

    pub fn env(&self) -> &Environment {
        &self.state.env
    }

    pub fn brain(&self) -> &Brain {
        &self.brain
    }

    pub fn classifier(&self) -> &dyn Classifier {
        &*self.classifier
    }

    /// Applies `cmd` as of `at`. On error the state is unchanged. Every
    /// successful command also settles open quests at `at`.
    pub fn apply(&mut self, cmd: Command, at: Timestamp) -> Result<Outcome, Error> {
        let outcome = self.apply_inner(cmd, at)?;
        let changes = self.state.social.evaluate_quests(&self.state.grants, at);
        Ok(match outcome {
            Outcome::Settled { .. } => Outcome::Settled { changes },
            other => other,
        })
    }

    fn apply_inner(&mut self, cmd: Command, at: Timestamp) -> Result<Outcome, Error> {
        let s = &mut self.state;
        match cmd {
            Command::DefineBehaviorType { def } => {
                s.env.define_behavior_type(def)?;
            }
            Command::DefineAchievementType { def } => {
                s.env.define_achievement_type(def)?;
            }
            Command::SetLevelPolicy { policy } => s.env.set_level_policy(policy)?,
            Command::DefineGame { id, name } => {
                s.env.define_game(id, name)?;
            }
            Command::DefineProject { project } => {
                s.env.define_project(project)?;
            }
            Command::SetActiveGames { project, game_ids } => {
                s.env.set_active_games(&project, game_ids.into_iter().collect())?;
            }
            Command::DefineRule { rule } => {
                s.rules.define(&mut s.env, rule)?;
            }
            Command::RemoveRule { id } => {
                s.rules.remove(&mut s.env, &id)?;
            }
            Command::DefineCustomization { rule } => {
                s.customizations.define(rule)?;
            }
            Command::RegisterTool { tool } => {
                s.env.register_tool(tool)?;
            }
            Command::RegisterPlayer { player } => {
                s.env.register_player(player)?;
            }
            Command::SetToolSecret { tool, secret } => s.env.set_tool_secret(&tool, secret)?,
            Command::SetPlayerToken { player, token } => s.env.set_player_token(&player, token)?,
            Command::IngestEvent { event } => return self.ingest(event).map(Outcome::Ingested),
            Command::Befriend { a, b } => {
                return s.social.befriend(&s.env, &a, &b, at).map(Outcome::Friendship);
            }
            Command::SendMessage { from, to, body } => {
                let message = s.social.send_message(&s.env, &from, &to, &body, at)?;
                s.sentiment.record(&*self.classifier, &from, &body, at);
                return Ok(Outcome::Message(message));
            }
            Command::CreateQuest {
                challenger,
                challenged,
                goal,
                period,
            } => {
                return s
                    .social
                    .create_quest(&s.env, &challenger, &challenged, goal, period, at)
                    .map(Outcome::Quest);
            }
            Command::AssistantInput { player, text } => {
                s.env.player(player.as_str())?;
                let polarity = s.sentiment.record(&*self.classifier, &player, &text, at);
                let reply = self.brain.respond(&text);
                return Ok(Outcome::Assistant(AssistantReply { reply, polarity }));
            }
            Command::MarkNotificationRead { player, id } => s.social.mark_read(player.as_str(), id)?,
            Command::ImportEnvironment { document } => self.import(document)?,
            Command::SettleQuests => return Ok(Outcome::Settled { changes: Vec::new() }),
        }
        Ok(Outcome::Done)
    }

    fn ingest(&mut self, event: BehaviorEvent) -> Result<Ingested, Error> {
        if let Some(previous) = self.ingested(event.event_id.as_str()) {
            return Ok(Ingested {
                replayed: true,
                ..previous
            });
        }
        let s = &mut self.state;
        s.env.validate_event(&event)?;
        let mut next_id = s.grants.len() as u64;
        let (grants, warnings) = s.rules.evaluate(&s.env, &mut s.rule_state, &event, &mut next_id);
        for g in &grants {
            s.ledger.apply(g);
        }
        s.grants.extend(grants.iter().cloned());
        let id = event.event_id.clone();
        s.event_index.insert(id.clone(), s.events.len());
        s.events.push(StoredEvent {
            event,
            grant_ids: grants.iter().map(|g| g.id).collect(),
            warnings: warnings.clone(),
        });
        Ok(Ingested {
            event_id: id,
            grants,
            warnings,
            replayed: false,
        })
    }

    /// The result recorded when `event_id` was first ingested.
    pub fn ingested(&self, event_id: &str) -> Option<Ingested> {
        let stored = &self.state.events[*self.state.event_index.get(event_id)?];
        Some(Ingested {
            event_id: stored.event.event_id.clone(),
            grants: stored
                .grant_ids
                .iter()
                .map(|&id| self.state.grants[id as usize].clone())
                .collect(),
            warnings: stored.warnings.clone(),
            replayed: false,
        })
    }

    /// Imports a document on a scratch copy so a failure leaves nothing behind.
    fn import(&mut self, doc: EnvDocument) -> Result<(), Error> {
        if doc.version != DOCUMENT_VERSION {
            return Err(Error::InvalidPolicy(alloc::format!(
                "unsupported document version {}",
                doc.version
            )));
        }
        let mut env = self.state.env.clone();
        let mut rules = self.state.rules.clone();
        let mut customizations = self.state.customizations.clone();
        for def in doc.behavior_types {
            env.define_behavior_type(def)?;
        }
        for def in doc.achievement_types {
            env.define_achievement_type(def)?;
        }
        env.set_level_policy(doc.level_policy)?;
        for g in doc.games {
            env.define_game(g.id, g.name)?;
        }
        for p in doc.projects {
            env.define_project(p)?;
        }
        for t in doc.tools {
            env.register_tool(t)?;
        }
        for p in doc.players {
            env.register_player(p)?;
        }
        for r in doc.rules {
            rules.define(&mut env, r)?;
        }
        for c in doc.customizations {
            customizations.define(c)?;
        }
        self.state.env = env;
        self.state.rules = rules;
        self.state.customizations = customizations;
        Ok(())
    }

    pub fn export(&self) -> EnvDocument {
        let env = &self.state.env;
        EnvDocument {
            version: DOCUMENT_VERSION,
            behavior_types: env.behavior_types.values().cloned().collect(),
            achievement_types: env.achievement_types.values().cloned().collect(),
            level_policy: env.level_policy,
            games: env
                .games
                .values()
                .map(|g| GameDef {
                    id: g.id.clone(),
                    name: g.name.clone(),
                })
                .collect(),
            projects: env.projects.values().cloned().collect(),
            tools: env
                .tools
                .values()
                .map(|t| Tool {
                    secret: None,
                    ..t.clone()
                })
                .collect(),
            players: env
                .players
                .values()
                .map(|p| Player {
                    token: None,
                    ..p.clone()
                })
                .collect(),
            rules: self.state.rules.iter().cloned().collect(),
            customizations: self.state.customizations.iter().cloned().collect(),
        }
    }

    // Reads.

    pub fn grants(&self) -> &[AchievementGrant] {
        &self.state.grants
    }

    pub fn grants_of<'a>(&'a self, player: &'a str) -> impl Iterator<Item = &'a AchievementGrant> + 'a {
        self.state.grants.iter().filter(move |g| g.player_id.as_str() == player)
    }

    pub fn events(&self) -> impl Iterator<Item = &BehaviorEvent> {
        self.state.events.iter().map(|s| &s.event)
    }

    pub fn ledger(&self) -> &Ledger {
        &self.state.ledger
    }

    pub fn social(&self) -> &Social {
        &self.state.social
    }

    pub fn sentiment(&self) -> &SentimentLog {
        &self.state.sentiment
    }

    pub fn rules(&self) -> &RuleBook {
        &self.state.rules
    }

    pub fn customizations(&self) -> &Customizations {
        &self.state.customizations
    }

    pub fn player_totals(&self, player: &str) -> Result<PlayerTotals, Error> {
        self.state.ledger.player_totals(&self.state.env, player)
    }

    pub fn notifications_of<'a>(&'a self, player: &'a str) -> impl Iterator<Item = &'a Notification> + 'a {
        self.state.social.notifications_of(player)
    }

    pub fn graph(&self, filter: &GraphFilter) -> InteractionGraph {
        InteractionGraph::build(self.state.env.players.keys(), self.events(), filter)
    }

    /// The level-basis type, the default point type for rankings.
    fn point_type(&self, requested: Option<&str>) -> Result<String, Error> {
        match requested {
            Some(t) => Ok(t.to_string()),
            None => self
                .state
                .env
                .level_basis()
                .map(|t| t.identifier.to_string())
                .ok_or_else(|| Error::UnknownAchievementType("no level-basis point type".into())),
        }
    }

    pub fn global_ranking(&self, point_type: Option<&str>, limit: Option<usize>) -> Result<Vec<RankEntry>, Error> {
        let ty = self.point_type(point_type)?;
        social::global_ranking(&self.state.env, &self.state.ledger, &ty, limit)
    }

    pub fn friends_ranking(&self, player: &str, point_type: Option<&str>) -> Result<Vec<RankEntry>, Error> {
        let ty = self.point_type(point_type)?;
        social::friends_ranking(&self.state.env, &self.state.ledger, &self.state.social, player, &ty)
    }

    pub fn neighborhood_ranking(&self, player: &str, point_type: Option<&str>, k: usize) -> Result<Vec<RankEntry>, Error> {
        let ty = self.point_type(point_type)?;
        social::neighborhood_ranking(&self.state.env, &self.state.ledger, player, &ty, k)
    }

    pub fn profile_facts(&self, player: &str, now: Timestamp) -> Result<ProfileFacts, Error> {
        let totals = self.player_totals(player)?;
        let degrees = self.graph(&GraphFilter::default()).degrees(player)?;
        let first_behavior_date = self
            .events()
            .filter(|e| e.player.as_str() == player)
            .map(|e| e.occurred_at)
            .min()
            .map(|t| t.date_naive());
        Ok(ProfileFacts {
            today: now.date_naive(),
            first_behavior_date,
            points: totals.points,
            level: totals.level,
            followers: degrees.followers,
            following: degrees.following,
            polarity: self.state.sentiment.rolling_polarity(player, now),
        })
    }

    pub fn customization(&self, player: &str, now: Timestamp) -> Result<BTreeMap<String, bool>, Error> {
        Ok(self.state.customizations.evaluate(&self.profile_facts(player, now)?))
    }

    pub fn profile(&self, player: &str, now: Timestamp) -> Result<Profile, Error> {
        let env = &self.state.env;
        let p = env.player(player)?;
        let facts = self.profile_facts(player, now)?;
        let totals = self.player_totals(player)?;
        let policy = env.level_policy;
        let level_threshold = if totals.level == 0 {
            0
        } else {
            policy.threshold(totals.level)?
        };
        let by_class = |class: AchievementClass| -> BTreeMap<AchievementTypeId, i64> {
            totals
                .totals
                .iter()
                .filter(|(ty, n)| **n != 0 && env.achievement_types[*ty].class == class)
                .map(|(ty, n)| (ty.clone(), *n))
                .collect()
        };
        Ok(Profile {
            id: p.id.clone(),
            name: p.name.clone(),
            joined_at: p.joined_at,
            badges: by_class(AchievementClass::Badge),
            resources: by_class(AchievementClass::Resource),
            next_level_threshold: totals.level.checked_add(1).and_then(|l| policy.threshold(l).ok()),
            progress: policy.progress(totals.points),
            level_threshold,
            points: totals.points,
            level: totals.level,
            totals: totals.totals,
            friends: self.state.social.friends_of(player).into_iter().collect(),
            followers: facts.followers,
            following: facts.following,
            polarity: facts.polarity,
        })
    }
}
