use alloc::string::String;

use crate::expr::ExprError;

/// Every failure the engine can report for a command or query.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{entity} identifier `{id}` is already registered")]
    DuplicateIdentifier { entity: &'static str, id: String },
    #[error("{entity} identifier must not be empty")]
    EmptyIdentifier { entity: &'static str },
    #[error("level must be at least 1, got {0}")]
    InvalidLevel(u32),
    #[error("invalid level policy: {0}")]
    InvalidPolicy(String),
    #[error("unknown behavior type `{0}`")]
    UnknownBehaviorType(String),
    #[error("unknown achievement type `{0}`")]
    UnknownAchievementType(String),
    #[error("unknown game `{0}`")]
    UnknownGame(String),
    #[error("unknown project `{0}`")]
    UnknownProject(String),
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown quest `{0}`")]
    UnknownQuest(u64),
    #[error("unknown notification {0}")]
    UnknownNotification(u64),
    #[error("invalid behavior event: {0}")]
    InvalidEvent(String),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("invalid achievement type: {0}")]
    InvalidAchievementType(String),
    #[error("expression error in {context}: {source}")]
    Expression { context: String, source: ExprError },
    #[error("a player cannot befriend themselves")]
    SelfFriendship,
    #[error("players are already friends")]
    AlreadyFriends,
    #[error("message body must not be empty")]
    EmptyMessage,
    #[error("invalid quest period: {0}")]
    InvalidPeriod(String),
    #[error("source and sink must differ")]
    SameSourceSink,
    #[error("capacities must be positive")]
    InvalidCapacity,
}

impl Error {
    /// Stable machine-readable code, used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateIdentifier { .. } => "duplicate_identifier",
            Error::EmptyIdentifier { .. } => "empty_identifier",
            Error::InvalidLevel(_) => "invalid_level",
            Error::InvalidPolicy(_) => "invalid_policy",
            Error::UnknownBehaviorType(_) => "unknown_behavior_type",
            Error::UnknownAchievementType(_) => "unknown_achievement_type",
            Error::UnknownGame(_) => "unknown_game",
            Error::UnknownProject(_) => "unknown_project",
            Error::UnknownTool(_) => "unknown_tool",
            Error::UnknownPlayer(_) => "unknown_player",
            Error::UnknownRule(_) => "unknown_rule",
            Error::UnknownQuest(_) => "unknown_quest",
            Error::UnknownNotification(_) => "unknown_notification",
            Error::InvalidEvent(_) => "invalid_event",
            Error::InvalidRule(_) => "invalid_rule",
            Error::InvalidAchievementType(_) => "invalid_achievement_type",
            Error::Expression { .. } => "expression_error",
            Error::SelfFriendship => "self_friendship",
            Error::AlreadyFriends => "already_friends",
            Error::EmptyMessage => "empty_message",
            Error::InvalidPeriod(_) => "invalid_period",
            Error::SameSourceSink => "same_source_sink",
            Error::InvalidCapacity => "invalid_capacity",
        }
    }

    /// True for lookups of missing resources (mapped to 404 by the service).
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            Error::UnknownBehaviorType(_)
                | Error::UnknownAchievementType(_)
                | Error::UnknownGame(_)
                | Error::UnknownProject(_)
                | Error::UnknownTool(_)
                | Error::UnknownPlayer(_)
                | Error::UnknownRule(_)
                | Error::UnknownQuest(_)
                | Error::UnknownNotification(_)
        )
    }
}
