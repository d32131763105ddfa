use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Deserializer, Serialize};

use super::lists::TrialList;
use super::store::{Event, Judgment, JudgmentStore};
use crate::error::{Error, Result};
use crate::eval::{AccuracyTable, Grouping, Member};

/// Sessions with more attention errors than this are excluded.
pub const MAX_ATTENTION_ERRORS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Top,
    Bottom,
}

impl Choice {
    pub fn parse(s: &str) -> Option<Choice> {
        match s.trim().to_ascii_lowercase().as_str() {
            "top" | "1" => Some(Choice::Top),
            "bottom" | "2" => Some(Choice::Bottom),
            _ => None,
        }
    }

    /// The member chosen when `top` is displayed on top.
    pub fn picks(self, top: Member) -> Member {
        match (self, top) {
            (Choice::Top, m) => m,
            (Choice::Bottom, Member::Grammatical) => Member::Ungrammatical,
            (Choice::Bottom, Member::Ungrammatical) => Member::Grammatical,
        }
    }
}

/// Accepts `"top"`/`"bottom"`, or the key codes `1`/`2` as number or string.
impl<'de> Deserialize<'de> for Choice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Key(u64),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Text(s) => Choice::parse(&s),
            Raw::Key(1) => Some(Choice::Top),
            Raw::Key(2) => Some(Choice::Bottom),
            Raw::Key(_) => None,
        };
        parsed.ok_or_else(|| serde::de::Error::custom("choice must be top, bottom, 1 or 2"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: String,
    pub list_id: u32,
}

/// What a participant sees. Carries no role information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrialView {
    Trial {
        trial_id: u32,
        sentence_top: String,
        sentence_bottom: String,
    },
    Done {
        done: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub session: String,
    pub trial_id: u32,
    pub choice: Choice,
    pub done: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("trial {got} submitted, current trial is {expected}")]
    OutOfOrder { expected: u32, got: u32 },
    #[error("session {0} is finished")]
    Finished(String),
    #[error(transparent)]
    Store(#[from] Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExclusion {
    pub session_id: String,
    pub list_id: u32,
    pub attention_items: usize,
    pub attention_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub max_attention_errors: usize,
    pub sessions: usize,
    /// Sessions that have not answered every trial; not aggregated.
    pub incomplete: Vec<String>,
    pub excluded: Vec<SessionExclusion>,
    pub retained: Vec<SessionExclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsReport {
    /// Accuracy per condition over retained sessions.
    pub human: AccuracyTable,
    pub by_subcondition: AccuracyTable,
    pub exclusion: ExclusionReport,
    pub judgments_per_pair: BTreeMap<String, u64>,
}

impl ResultsReport {
    /// Aggregates a store. Only completed sessions count; completed sessions
    /// with more than [`MAX_ATTENTION_ERRORS`] attention errors are excluded.
    pub fn from_store(store: &JudgmentStore, lists: &[TrialList]) -> Self {
        let mut exclusion = ExclusionReport {
            max_attention_errors: MAX_ATTENTION_ERRORS,
            sessions: store.session_count(),
            incomplete: Vec::new(),
            excluded: Vec::new(),
            retained: Vec::new(),
        };
        let mut kept: Vec<&Judgment> = Vec::new();
        for session in store.sessions() {
            let length = lists
                .iter()
                .find(|l| l.list_id == session.list_id)
                .map_or(0, |l| l.trials.len());
            if session.cursor() < length || length == 0 {
                exclusion.incomplete.push(session.session_id.clone());
                continue;
            }
            let attention: Vec<&Judgment> = session.judgments.iter().filter(|j| j.attention).collect();
            let summary = SessionExclusion {
                session_id: session.session_id.clone(),
                list_id: session.list_id,
                attention_items: attention.len(),
                attention_errors: attention.iter().filter(|j| !j.correct).count(),
            };
            if summary.attention_errors > MAX_ATTENTION_ERRORS {
                exclusion.excluded.push(summary);
            } else {
                kept.extend(&session.judgments);
                exclusion.retained.push(summary);
            }
        }
        let table = |g: Grouping| {
            AccuracyTable::from_outcomes(
                &g,
                kept.iter()
                    .map(|j| (g.key(&j.condition, &j.subcondition, &j.features), j.correct, false)),
            )
        };
        let mut judgments_per_pair = BTreeMap::new();
        for j in &kept {
            *judgments_per_pair.entry(j.pair_id.clone()).or_default() += 1;
        }
        ResultsReport {
            human: table(Grouping::Condition),
            by_subcondition: table(Grouping::Subcondition),
            exclusion,
            judgments_per_pair,
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Experiment state shared by all request handlers. All mutations go through
/// one lock, so log order equals application order.
pub struct JudgeService {
    lists: Vec<TrialList>,
    store: Mutex<JudgmentStore>,
}

impl JudgeService {
    pub fn new(lists: Vec<TrialList>, store: JudgmentStore) -> Result<Self> {
        if lists.is_empty() || lists.iter().any(|l| l.trials.is_empty()) {
            return Err(Error::InvalidArgument(
                "judge service needs nonempty trial lists".into(),
            ));
        }
        Ok(JudgeService {
            lists,
            store: Mutex::new(store),
        })
    }

    pub fn lists(&self) -> &[TrialList] {
        &self.lists
    }

    fn list(&self, list_id: u32) -> &TrialList {
        &self.lists[(list_id as usize - 1) % self.lists.len()]
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, JudgmentStore> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Opens a session on the next list in round-robin order.
    pub fn create_session(&self) -> Result<SessionInfo, ServiceError> {
        let mut store = self.lock();
        let list_id = (store.session_count() % self.lists.len()) as u32 + 1;
        let session_id = loop {
            let id = format!("{:016x}", rand::random::<u64>());
            if store.session(&id).is_none() {
                break id;
            }
        };
        store.append(Event::SessionCreated {
            session_id: session_id.clone(),
            list_id,
            timestamp: now_ms(),
        })?;
        Ok(SessionInfo { session_id, list_id })
    }

    pub fn next_trial(&self, session_id: &str) -> Result<TrialView, ServiceError> {
        let store = self.lock();
        let session = store
            .session(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))?;
        let list = self.list(session.list_id);
        Ok(match list.trials.get(session.cursor()) {
            Some(t) => TrialView::Trial {
                trial_id: t.trial_id,
                sentence_top: t.sentence_top().to_string(),
                sentence_bottom: t.sentence_bottom().to_string(),
            },
            None => TrialView::Done { done: true },
        })
    }

    /// Records a judgment for the session's current trial. Resubmitting an
    /// answered trial returns the original acknowledgment and changes nothing.
    pub fn submit(&self, session_id: &str, trial_id: u32, choice: Choice) -> Result<Ack, ServiceError> {
        let mut store = self.lock();
        let session = store
            .session(session_id)
            .ok_or_else(|| ServiceError::UnknownSession(session_id.to_string()))?;
        let list = self.list(session.list_id);
        let ack = |trial_id: u32, choice: Choice| Ack {
            session: session_id.to_string(),
            trial_id,
            choice,
            done: trial_id as usize == list.trials.len(),
        };
        if let Some(previous) = session.judgments.iter().find(|j| j.trial_id == trial_id) {
            return Ok(ack(previous.trial_id, previous.choice));
        }
        let cursor = session.cursor();
        let Some(trial) = list.trials.get(cursor) else {
            return Err(ServiceError::Finished(session_id.to_string()));
        };
        if trial.trial_id != trial_id {
            return Err(ServiceError::OutOfOrder {
                expected: trial.trial_id,
                got: trial_id,
            });
        }
        let judgment = Judgment {
            trial_id,
            pair_id: trial.pair_id.clone(),
            condition: trial.condition.clone(),
            subcondition: trial.subcondition.clone(),
            features: trial.features.clone(),
            attention: trial.attention,
            choice,
            correct: choice.picks(trial.top) == Member::Grammatical,
            timestamp: now_ms(),
        };
        store.append(Event::Judgment {
            session_id: session_id.to_string(),
            judgment,
        })?;
        Ok(ack(trial_id, choice))
    }

    pub fn results(&self) -> ResultsReport {
        ResultsReport::from_store(&self.lock(), &self.lists)
    }

    pub fn event_count(&self) -> usize {
        self.lock().event_count()
    }
}
