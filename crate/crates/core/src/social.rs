//! Friendships, messages, notifications, quests and rankings.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ids::*;
use crate::model::{Environment, Timestamp};
use crate::rules::{AchievementGrant, Ledger};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Friendship {
    pub players: (PlayerId, PlayerId),
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Message {
    pub from: PlayerId,
    pub to: PlayerId,
    pub body: String,
    pub sent_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuestStatus {
    Open,
    Achieved,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuestGoal {
    pub achievement_type: AchievementTypeId,
    pub amount: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Quest {
    pub id: u64,
    pub challenger: PlayerId,
    pub challenged: PlayerId,
    pub goal: QuestGoal,
    pub period: Period,
    pub status: QuestStatus,
}

impl Quest {
    /// Status as a pure function of the grant log and `now`.
    pub fn status_at(&self, grants: &[AchievementGrant], now: Timestamp) -> QuestStatus {
        let until = now.min(self.period.end);
        let earned: i64 = grants
            .iter()
            .filter(|g| {
                g.player_id == self.challenged
                    && g.achievement_type == self.goal.achievement_type
                    && self.period.start <= g.granted_at
                    && g.granted_at <= until
            })
            .map(|g| g.amount)
            .sum();
        if earned >= 0 && earned as u64 >= self.goal.amount {
            QuestStatus::Achieved
        } else if now > self.period.end {
            QuestStatus::Expired
        } else {
            QuestStatus::Open
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuestChange {
    pub quest_id: u64,
    pub status: QuestStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotificationKind {
    Friendship,
    Message,
    QuestCreated,
    QuestAchieved,
    QuestExpired,
    Achievement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Notification {
    pub id: u64,
    pub player_id: PlayerId,
    pub kind: NotificationKind,
    pub body: String,
    pub created_at: Timestamp,
    pub read: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Social {
    friends: BTreeMap<PlayerId, BTreeMap<PlayerId, Timestamp>>,
    messages: Vec<Message>,
    quests: BTreeMap<u64, Quest>,
    notifications: Vec<Notification>,
    next_quest_id: u64,
}

impl Social {
    pub fn befriend(
        &mut self,
        env: &Environment,
        a: &PlayerId,
        b: &PlayerId,
        now: Timestamp,
    ) -> Result<Friendship, Error> {
        env.player(a.as_str())?;
        env.player(b.as_str())?;
        if a == b {
            return Err(Error::SelfFriendship);
        }
        if self.are_friends(a.as_str(), b.as_str()) {
            return Err(Error::AlreadyFriends);
        }
        self.friends.entry(a.clone()).or_default().insert(b.clone(), now);
        self.friends.entry(b.clone()).or_default().insert(a.clone(), now);
        self.notify(b, NotificationKind::Friendship, format!("{a} is now your friend"), now);
        self.notify(a, NotificationKind::Friendship, format!("{b} is now your friend"), now);
        let pair = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        Ok(Friendship {
            players: pair,
            created_at: now,
        })
    }

    pub fn are_friends(&self, a: &str, b: &str) -> bool {
        self.friends.get(a).is_some_and(|m| m.contains_key(b))
    }

    pub fn friends_of(&self, player: &str) -> BTreeSet<PlayerId> {
        self.friends
            .get(player)
            .map(|m| m.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn send_message(
        &mut self,
        env: &Environment,
        from: &PlayerId,
        to: &PlayerId,
        body: &str,
        now: Timestamp,
    ) -> Result<Message, Error> {
        env.player(from.as_str())?;
        env.player(to.as_str())?;
        if body.trim().is_empty() {
            return Err(Error::EmptyMessage);
        }
        let message = Message {
            from: from.clone(),
            to: to.clone(),
            body: body.to_string(),
            sent_at: now,
        };
        self.messages.push(message.clone());
        self.notify(to, NotificationKind::Message, format!("New message from {from}"), now);
        Ok(message)
    }

    /// Messages sent or received by `player`, oldest first.
    pub fn messages_of<'a>(&'a self, player: &'a str) -> impl Iterator<Item = &'a Message> + 'a {
        self.messages
            .iter()
            .filter(move |m| m.from.as_str() == player || m.to.as_str() == player)
    }

    pub fn create_quest(
        &mut self,
        env: &Environment,
        challenger: &PlayerId,
        challenged: &PlayerId,
        goal: QuestGoal,
        period: Period,
        now: Timestamp,
    ) -> Result<Quest, Error> {
        env.player(challenger.as_str())?;
        env.player(challenged.as_str())?;
        if !env.achievement_types.contains_key(&goal.achievement_type) {
            return Err(Error::UnknownAchievementType(goal.achievement_type.to_string()));
        }
        if period.end <= period.start {
            return Err(Error::InvalidPeriod("end must be after start".into()));
        }
        if period.end <= now {
            return Err(Error::InvalidPeriod("period has already ended".into()));
        }
        let quest = Quest {
            id: self.next_quest_id,
            challenger: challenger.clone(),
            challenged: challenged.clone(),
            goal,
            period,
            status: QuestStatus::Open,
        };
        self.next_quest_id += 1;
        self.quests.insert(quest.id, quest.clone());
        self.notify(
            challenged,
            NotificationKind::QuestCreated,
            format!(
                "{challenger} challenges you to earn {} {} by {}",
                quest.goal.amount,
                quest.goal.achievement_type,
                quest.period.end.to_rfc3339()
            ),
            now,
        );
        Ok(quest)
    }

    pub fn quest(&self, id: u64) -> Result<&Quest, Error> {
        self.quests.get(&id).ok_or(Error::UnknownQuest(id))
    }

    pub fn quests_of<'a>(&'a self, player: &'a str) -> impl Iterator<Item = &'a Quest> + 'a {
        self.quests
            .values()
            .filter(move |q| q.challenger.as_str() == player || q.challenged.as_str() == player)
    }

    /// Settles open quests at `now`, returning the ones whose status changed.
    pub fn evaluate_quests(&mut self, grants: &[AchievementGrant], now: Timestamp) -> Vec<QuestChange> {
        let mut changes = Vec::new();
        for quest in self.quests.values_mut() {
            if quest.status != QuestStatus::Open {
                continue;
            }
            let status = quest.status_at(grants, now);
            if status != QuestStatus::Open {
                quest.status = status;
                changes.push((quest.clone(), status));
            }
        }
        changes
            .into_iter()
            .map(|(quest, status)| {
                let (kind, verb) = match status {
                    QuestStatus::Achieved => (NotificationKind::QuestAchieved, "achieved"),
                    _ => (NotificationKind::QuestExpired, "expired"),
                };
                let body = format!("Quest {} {verb}", quest.id);
                self.notify(&quest.challenged, kind, body.clone(), now);
                if quest.challenger != quest.challenged {
                    self.notify(&quest.challenger, kind, body, now);
                }
                QuestChange {
                    quest_id: quest.id,
                    status,
                }
            })
            .collect()
    }

    pub fn notify(&mut self, player: &PlayerId, kind: NotificationKind, body: String, now: Timestamp) {
        let id = self.notifications.len() as u64;
        self.notifications.push(Notification {
            id,
            player_id: player.clone(),
            kind,
            body,
            created_at: now,
            read: false,
        });
    }

    pub fn notifications_of<'a>(&'a self, player: &'a str) -> impl Iterator<Item = &'a Notification> + 'a {
        self.notifications
            .iter()
            .filter(move |n| n.player_id.as_str() == player)
    }

    /// Marks a notification as read. Notifications are never removed.
    pub fn mark_read(&mut self, player: &str, id: u64) -> Result<(), Error> {
        match self.notifications.get_mut(id as usize) {
            Some(n) if n.player_id.as_str() == player => {
                n.read = true;
                Ok(())
            }
            _ => Err(Error::UnknownNotification(id)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RankEntry {
    pub player: PlayerId,
    pub total: i64,
}

fn ranked(env: &Environment, ledger: &Ledger, point_type: &str) -> Result<Vec<RankEntry>, Error> {
    if !env.achievement_types.contains_key(point_type) {
        return Err(Error::UnknownAchievementType(point_type.to_string()));
    }
    let mut rows: Vec<(RankEntry, Option<Timestamp>)> = env
        .players
        .keys()
        .map(|p| {
            (
                RankEntry {
                    player: p.clone(),
                    total: ledger.total(p.as_str(), point_type),
                },
                ledger.first_grant(p.as_str(), point_type),
            )
        })
        .collect();
    rows.sort_by(|(a, fa), (b, fb)| {
        b.total
            .cmp(&a.total)
            .then_with(|| match (fa, fb) {
                (Some(x), Some(y)) => x.cmp(y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| a.player.cmp(&b.player))
    });
    Ok(rows.into_iter().map(|(r, _)| r).collect())
}

/// All players, best first. Ties go to the earlier first grant, then the
/// smaller player id.
pub fn global_ranking(
    env: &Environment,
    ledger: &Ledger,
    point_type: &str,
    limit: Option<usize>,
) -> Result<Vec<RankEntry>, Error> {
    let mut rows = ranked(env, ledger, point_type)?;
    if let Some(limit) = limit {
        rows.truncate(limit);
    }
    Ok(rows)
}

/// The global ranking restricted to `player` and their friends.
pub fn friends_ranking(
    env: &Environment,
    ledger: &Ledger,
    social: &Social,
    player: &str,
    point_type: &str,
) -> Result<Vec<RankEntry>, Error> {
    env.player(player)?;
    let friends = social.friends_of(player);
    Ok(ranked(env, ledger, point_type)?
        .into_iter()
        .filter(|r| r.player.as_str() == player || friends.contains(&r.player))
        .collect())
}

/// Up to `k` players immediately above and below `player`, plus the player.
pub fn neighborhood_ranking(
    env: &Environment,
    ledger: &Ledger,
    player: &str,
    point_type: &str,
    k: usize,
) -> Result<Vec<RankEntry>, Error> {
    env.player(player)?;
    let rows = ranked(env, ledger, point_type)?;
    let pos = rows
        .iter()
        .position(|r| r.player.as_str() == player)
        .ok_or_else(|| Error::UnknownPlayer(player.to_string()))?;
    let lo = pos.saturating_sub(k);
    let hi = (pos + k + 1).min(rows.len());
    Ok(rows[lo..hi].to_vec())
}
