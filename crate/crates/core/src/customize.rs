//! Customization variables: named predicates over a player's profile.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::expr::{ExprError, Expr, Scope, Signature, Type, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CustomizationRule {
    pub variable_name: String,
    pub condition: Expr,
}

/// Identifiers available to customization predicates.
pub fn profile_signature() -> Signature {
    Signature::new()
        .with("Date", Type::Date)
        .with("firstBehaviorDate", Type::Date)
        .with("Points", Type::Number)
        .with("Level", Type::Number)
        .with("Followers", Type::Number)
        .with("Following", Type::Number)
        .with("Polarity", Type::Number)
}

/// The profile values bound into [`profile_signature`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileFacts {
    pub today: NaiveDate,
    pub first_behavior_date: Option<NaiveDate>,
    pub points: i64,
    pub level: u32,
    pub followers: usize,
    pub following: usize,
    pub polarity: f64,
}

impl ProfileFacts {
    pub fn scope(&self) -> Scope {
        let mut s = Scope::new()
            .with("Date", Value::Date(self.today))
            .with_number("Points", self.points as f64)
            .with_number("Level", f64::from(self.level))
            .with_number("Followers", self.followers as f64)
            .with_number("Following", self.following as f64)
            .with_number("Polarity", self.polarity);
        s.set("firstBehaviorDate", self.first_behavior_date.map(Value::Date));
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Customizations {
    rules: BTreeMap<String, CustomizationRule>,
}

impl Customizations {
    pub fn iter(&self) -> impl Iterator<Item = &CustomizationRule> {
        self.rules.values()
    }

    pub fn validate(&self, rule: &CustomizationRule) -> Result<(), Error> {
        if rule.variable_name.trim().is_empty() {
            return Err(Error::EmptyIdentifier {
                entity: "customization variable",
            });
        }
        if self.rules.contains_key(&rule.variable_name) {
            return Err(Error::DuplicateIdentifier {
                entity: "customization variable",
                id: rule.variable_name.clone(),
            });
        }
        let wrap = |source| Error::Expression {
            context: rule.variable_name.clone(),
            source,
        };
        let sig = profile_signature();
        for name in rule.condition.free_identifiers() {
            if sig.get(&name).is_none() {
                return Err(wrap(ExprError::UnknownIdentifier(name)));
            }
        }
        match rule.condition.type_check(&sig).map_err(wrap)? {
            Type::Bool => Ok(()),
            other => Err(wrap(ExprError::TypeMismatch(alloc::format!(
                "expected boolean, found {other}"
            )))),
        }
    }

    pub fn define(&mut self, rule: CustomizationRule) -> Result<&CustomizationRule, Error> {
        self.validate(&rule)?;
        let key = rule.variable_name.clone();
        Ok(self.rules.entry(key).or_insert(rule))
    }

    /// Evaluates every variable. A condition that fails to evaluate (for
    /// instance on division by zero) yields false.
    pub fn evaluate(&self, facts: &ProfileFacts) -> BTreeMap<String, bool> {
        let scope = facts.scope();
        self.rules
            .values()
            .map(|r| {
                let value = r.condition.eval_bool(&scope).unwrap_or_else(|e| {
                    log::warn!("customization {} failed: {e}", r.variable_name);
                    false
                });
                (r.variable_name.to_string(), value)
            })
            .collect()
    }
}
