use serde::{Deserialize, Serialize};

use crate::optics::DisplacementKey;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    Alice,
    Bob,
    Mediator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Encrypt,
    Compute,
    ReturnMode,
    Measure,
    Feedforward,
    Decrypt,
}

/// One protocol step. `index` is a logical clock shared by both parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub index: u64,
    pub actor: Actor,
    pub kind: EventKind,
    pub summary: String,
    /// Key material used by the step; only ever set on Alice's events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<DisplacementKey>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interleaves two event lists by index.
    pub fn merged(mut a: Vec<Event>, b: Vec<Event>) -> Self {
        a.extend(b);
        a.sort_by_key(|e| e.index);
        Self { events: a }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn first(&self, kind: EventKind) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == kind)
    }

    /// True when no Bob or Mediator event carries key material.
    pub fn keys_stay_with_alice(&self) -> bool {
        self.events.iter().all(|e| e.actor == Actor::Alice || e.key.is_none())
    }

    /// Checks strict ordering, key bookkeeping, and that every measure
    /// event is followed by exactly one feedforward before the next measure.
    pub fn validate(&self) -> Result<()> {
        if self.events.windows(2).any(|w| w[0].index >= w[1].index) {
            return Err(Error::InvalidParameter("transcript indices are not strictly increasing".into()));
        }
        if !self.keys_stay_with_alice() {
            return Err(Error::InvalidParameter("key material recorded on a non-Alice event".into()));
        }
        let mut pending = false;
        for e in &self.events {
            match e.kind {
                EventKind::Measure => {
                    if pending {
                        return Err(Error::InvalidParameter("measure event without feedforward".into()));
                    }
                    pending = true;
                }
                EventKind::Feedforward => {
                    if !pending {
                        return Err(Error::InvalidParameter("feedforward without a preceding measure".into()));
                    }
                    pending = false;
                }
                _ => {}
            }
        }
        if pending {
            return Err(Error::InvalidParameter("measure event without feedforward".into()));
        }
        Ok(())
    }

    /// One line per event.
    pub fn summary_lines(&self) -> Vec<String> {
        self.events
            .iter()
            .map(|e| {
                let actor = match e.actor {
                    Actor::Alice => "alice",
                    Actor::Bob => "bob",
                    Actor::Mediator => "mediator",
                };
                let kind = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
                format!("{:>3} {:<8} {:<11} {}", e.index, actor, kind, e.summary)
            })
            .collect()
    }
}
